"""Hot loops, compiled with numba when available.

Set ``TORUSBIF_NO_NUMBA=1`` to force the pure-numpy implementations (useful
for debugging and for platforms without numba). Both variants are always
importable through :data:`IMPLEMENTATIONS` so they can be compared.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("TORUSBIF_NO_NUMBA", "").strip().lower() not in (
    "1",
    "true",
    "yes",
)


# ---------------------------------------------------------------------------
# Galerkin product matrix. For an even weight q with half-spectrum qhat
# (real, qhat[m] = (1/M) sum_j q_j e^{-2 pi i j m / M}), multiplication by q in
# the cosine basis is Toeplitz-plus-Hankel:
#   A[n, j] = c_n * (qhat[|n-j|] + qhat[fold(n+j)]) / 2,  c_0 = 1, c_n = 2.
# fold() maps a frequency into 0..M//2 using the DFT periodicity, which is
# what the grid-based product computes.
# ---------------------------------------------------------------------------
def _product_matrix_loops(qhat, N, M):
    A = np.empty((N + 1, N + 1))
    half = M // 2
    for n in range(N + 1):
        c = 0.5 if n == 0 else 1.0
        for j in range(N + 1):
            d = n - j if n >= j else j - n
            s = (n + j) % M
            if s > half:
                s = M - s
            A[n, j] = c * (qhat[d] + qhat[s])
    return A


def _product_matrix_numpy(qhat, N, M):
    idx = np.arange(N + 1)
    d = np.abs(idx[:, None] - idx[None, :])
    s = (idx[:, None] + idx[None, :]) % M
    s = np.where(s > M // 2, M - s, s)
    A = qhat[d] + qhat[s]
    A[0, :] *= 0.5
    return A


# ---------------------------------------------------------------------------
# Direct cosine-series evaluation, O(N * len(x)). Independent of any FFT, so
# it doubles as an oracle for the transforms.
# ---------------------------------------------------------------------------
def _cosine_eval_loops(a, x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        acc = a[0]
        for n in range(1, a.shape[0]):
            acc += a[n] * math.cos(n * x[i])
        out[i] = acc
    return out


def _cosine_eval_numpy(a, x):
    n = np.arange(1, a.shape[0])
    return a[0] + np.cos(np.outer(x, n)) @ a[1:]


# ---------------------------------------------------------------------------
# Partial zeta sum, accumulated from the small terms upward.
# ---------------------------------------------------------------------------
def _zeta_partial_loops(q, K):
    acc = 0.0
    for n in range(K, 0, -1):
        acc += float(n) ** (-q)
    return acc


def _zeta_partial_numpy(q, K):
    n = np.arange(K, 0, -1, dtype=float)
    return float(np.sum(n ** (-q)))


IMPLEMENTATIONS = {
    "numpy": {
        "product_matrix": _product_matrix_numpy,
        "cosine_eval": _cosine_eval_numpy,
        "zeta_partial": _zeta_partial_numpy,
    }
}
if HAVE_NUMBA:
    IMPLEMENTATIONS["numba"] = {
        "product_matrix": njit(cache=True)(_product_matrix_loops),
        "cosine_eval": njit(cache=True)(_cosine_eval_loops),
        "zeta_partial": njit(cache=True)(_zeta_partial_loops),
    }

BACKEND = "numba" if USE_NUMBA else "numpy"
_active = IMPLEMENTATIONS[BACKEND]


def product_matrix(qhat: np.ndarray, N: int, M: int) -> np.ndarray:
    return _active["product_matrix"](np.ascontiguousarray(qhat, dtype=np.float64), int(N), int(M))


def cosine_eval(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    return _active["cosine_eval"](
        np.ascontiguousarray(a, dtype=np.float64), np.ascontiguousarray(x, dtype=np.float64)
    )


def zeta_partial(q: float, K: int) -> float:
    return float(_active["zeta_partial"](float(q), int(K)))
