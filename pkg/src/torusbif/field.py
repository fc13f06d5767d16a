"""Even periodic functions stored as truncated cosine series.

A :class:`CosineField` with coefficients ``a`` represents

    u(x) = a[0] + sum_{n=1}^{N} a[n] cos(n x),

so the complex Fourier coefficients are u^(0) = a[0] and u^(+-n) = a[n]/2.
Grids are the uniform nodes x_j = 2 pi j / M, j = 0..M-1.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from . import _kernels
from .errors import GridTooCoarse
from .multiplier import MultiplierSpec, operator_symbols

log = logging.getLogger(__name__)

ASYMMETRY_WARN = 1e-8


@dataclass(frozen=True, eq=False)
class CosineField:
    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64, copy=True)
        if a.ndim != 1 or a.size < 2:
            raise ValueError("coefficient array must be 1-D with N >= 1")
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def N(self) -> int:
        return self.a.size - 1

    @classmethod
    def zeros(cls, N: int) -> "CosineField":
        return cls(np.zeros(N + 1))

    @classmethod
    def constant(cls, c: float, N: int) -> "CosineField":
        a = np.zeros(N + 1)
        a[0] = c
        return cls(a)

    @classmethod
    def mode(cls, k: int, N: int, amplitude: float = 1.0) -> "CosineField":
        """amplitude*cos(kx); k = 0 gives the constant function."""
        if not 0 <= k <= N:
            raise ValueError(f"mode {k} not representable with N={N}")
        a = np.zeros(N + 1)
        a[k] = amplitude
        return cls(a)

    def resized(self, N: int) -> "CosineField":
        """Zero-pad or truncate to order N."""
        a = np.zeros(N + 1)
        m = min(N, self.N) + 1
        a[:m] = self.a[:m]
        return CosineField(a)

    def __call__(self, x) -> np.ndarray:
        """Direct (FFT-free) evaluation at arbitrary points."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return _kernels.cosine_eval(self.a, x)

    def __add__(self, other: "CosineField") -> "CosineField":
        return CosineField(self.a + other.a)

    def __sub__(self, other: "CosineField") -> "CosineField":
        return CosineField(self.a - other.a)

    def __mul__(self, c: float) -> "CosineField":
        return CosineField(self.a * c)

    __rmul__ = __mul__

    def __neg__(self) -> "CosineField":
        return CosineField(-self.a)

    def complex_coefficients(self) -> np.ndarray:
        """u^(n) for n = 0..N."""
        c = self.a.astype(complex)
        c[1:] *= 0.5
        return c

    def tail_ratio(self) -> float:
        """|a_N| / max_{n>=1} |a_n|: a cheap resolution diagnostic."""
        peak = np.max(np.abs(self.a[1:]))
        return float(abs(self.a[-1]) / peak) if peak > 0 else 0.0

    def to_json(self) -> dict:
        return {"N": self.N, "a": [float(v) for v in self.a]}

    @classmethod
    def from_json(cls, d: dict) -> "CosineField":
        a = np.asarray(d["a"], dtype=float)
        if "N" in d and int(d["N"]) != a.size - 1:
            raise ValueError(f"N={d['N']} inconsistent with {a.size} coefficients")
        return cls(a)


@dataclass(frozen=True, eq=False)
class GridSamples:
    values: np.ndarray

    @property
    def M(self) -> int:
        return self.values.size

    @staticmethod
    def nodes(M: int) -> np.ndarray:
        return 2.0 * np.pi * np.arange(M) / M

    @classmethod
    def sample(cls, f, M: int) -> "GridSamples":
        return cls(np.asarray(f(cls.nodes(M)), dtype=float))


def dealias_size(N: int, p: float) -> int:
    """Full-grid size for alias-free products of degree ceil(p).

    A degree-q product of fields with N modes has bandwidth qN; keeping the
    lowest N modes exact needs M >= (q + 1) N + 1 nodes. For non-integer p
    the projection of |u|^p is never exact and the same rule with q = ceil(p)
    is used as a pragmatic oversampling.
    """
    q = math.ceil(p)
    return int(sfft.next_fast_len((q + 1) * N + 1, real=True))


def to_grid(u: CosineField, M: int) -> GridSamples:
    if M < 2 * u.N + 1:
        raise GridTooCoarse(f"grid size M={M} < 2N+1={2 * u.N + 1}")
    c = np.zeros(M // 2 + 1, dtype=complex)
    c[0] = u.a[0]
    c[1 : u.N + 1] = 0.5 * u.a[1:]
    return GridSamples(sfft.irfft(c, n=M) * M)


def symmetrize(values: np.ndarray) -> np.ndarray:
    """Even part of grid data: (g_j + g_{M-j}) / 2."""
    mirrored = np.roll(values[::-1], 1)
    return 0.5 * (values + mirrored)


def from_grid(g: GridSamples, N: int) -> CosineField:
    v = np.asarray(g.values, dtype=float)
    M = v.size
    even = symmetrize(v)
    scale = max(1.0, float(np.max(np.abs(v)))) if M else 1.0
    asym = float(np.max(np.abs(v - even))) if M else 0.0
    if asym > ASYMMETRY_WARN * scale:
        warnings.warn(f"from_grid: input asymmetry {asym:.2e} discarded", RuntimeWarning, stacklevel=2)
    c = sfft.rfft(even).real / M
    a = np.zeros(N + 1)
    m = min(N, c.size - 1)
    a[0] = c[0]
    a[1 : m + 1] = 2.0 * c[1 : m + 1]
    if M % 2 == 0 and m == M // 2:
        a[m] = c[m]  # the Nyquist mode is not split between +-n
    return CosineField(a)


def apply_L(spec: MultiplierSpec, u: CosineField) -> CosineField:
    return CosineField(operator_symbols(spec, u.N) * u.a)


def abs_power(g: np.ndarray, e: float) -> np.ndarray:
    """|g|^e with the convention 0^0 = 1."""
    return np.abs(g) ** e


def signed_power(g: np.ndarray, e: float) -> np.ndarray:
    """sign(g)|g|^e, i.e. g|g|^{e-1} without evaluating 0^negative."""
    return np.sign(g) * np.abs(g) ** e


def nonlinearity(u: CosineField, p: float, signed: bool = False, M: int | None = None) -> CosineField:
    """Cosine projection of |u|^p, or of u|u|^{p-2} when ``signed``."""
    need = dealias_size(u.N, p)
    if M is None:
        M = need
    if M < need:
        raise GridTooCoarse(f"M={M} below dealias size {need} for N={u.N}, p={p}")
    g = to_grid(u, M).values
    vals = signed_power(g, p - 1.0) if signed else abs_power(g, p)
    return from_grid(GridSamples(vals), u.N)


@dataclass(frozen=True)
class Norms:
    l2: float
    hdot_s: float
    hdot_2s: float
    h_s: float
    h_2s: float
    linf: float
    l1_coeff: float  # sum over n in Z of |u^(n)|, an upper bound for linf

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def l2_norm(u: CosineField) -> float:
    a = u.a
    return math.sqrt(2.0 * math.pi * (a[0] ** 2 + 0.5 * float(np.dot(a[1:], a[1:]))))


def inner_l2(u: CosineField, v: CosineField) -> float:
    """L^2 pairing int u v dx over one period."""
    return 2.0 * math.pi * (u.a[0] * v.a[0] + 0.5 * float(np.dot(u.a[1:], v.a[1:])))


def hdot_norm(u: CosineField, r: float) -> float:
    """Homogeneous Sobolev seminorm with weight |n|^{2r} (no 2 pi factor)."""
    n = np.arange(1, u.N + 1, dtype=float)
    return math.sqrt(0.5 * float(np.sum(n ** (2.0 * r) * u.a[1:] ** 2)))


def linf_norm(u: CosineField) -> float:
    M = max(1024, 8 * u.N)
    return float(np.max(np.abs(to_grid(u, M).values)))


def norms(u: CosineField, s: float) -> Norms:
    l2 = l2_norm(u)
    hs = hdot_norm(u, s)
    h2s = hdot_norm(u, 2 * s)
    return Norms(
        l2=l2,
        hdot_s=hs,
        hdot_2s=h2s,
        h_s=math.hypot(l2, hs),
        h_2s=math.hypot(l2, h2s),
        linf=linf_norm(u),
        l1_coeff=float(abs(u.a[0]) + np.sum(np.abs(u.a[1:]))),
    )
