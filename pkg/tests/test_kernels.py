import os
import subprocess
import sys

import numpy as np
import pytest

from torusbif import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def variants(name):
    return _kernels.IMPLEMENTATIONS["numpy"][name], _kernels.IMPLEMENTATIONS["numba"][name]


@needs_numba
@pytest.mark.parametrize("N,M", [(1, 3), (8, 33), (31, 100)])
def test_product_matrix_backends_agree(N, M):
    rng = np.random.default_rng(N)
    q = rng.normal(size=M // 2 + 1)
    a, b = variants("product_matrix")
    np.testing.assert_allclose(a(q, N, M), b(q, N, M), rtol=1e-14, atol=1e-15)


@needs_numba
def test_cosine_eval_backends_agree():
    rng = np.random.default_rng(1)
    coeffs, x = rng.normal(size=20), rng.uniform(0, 7, size=50)
    a, b = variants("cosine_eval")
    np.testing.assert_allclose(a(coeffs, x), b(coeffs, x), atol=1e-12)


@needs_numba
@pytest.mark.parametrize("q", [1.5, 2.0, 4.0])
def test_zeta_partial_backends_agree(q):
    a, b = variants("zeta_partial")
    assert a(q, 999) == pytest.approx(b(q, 999), rel=1e-13)


def test_product_matrix_is_multiplication():
    # A @ v is the cosine projection of q * v when q has enough modes
    from torusbif.field import CosineField, GridSamples, from_grid, to_grid

    N, M = 6, 64
    rng = np.random.default_rng(2)
    w = CosineField(rng.normal(size=N + 1))
    v = CosineField(rng.normal(size=N + 1))
    qhat = np.fft.rfft(to_grid(w, M).values).real / M
    A = _kernels.product_matrix(qhat, N, M)
    direct = from_grid(GridSamples(to_grid(w, M).values * to_grid(v, M).values), N)
    np.testing.assert_allclose(A @ v.a, direct.a, atol=1e-12)


def test_env_flag_selects_numpy():
    env = dict(os.environ, TORUSBIF_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from torusbif import _kernels; print(_kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
