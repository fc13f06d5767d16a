"""Closed-form Benjamin-Ono solutions (s = 1/2, m = 1, p = 2).

For lambda < -1 the two solutions are

    u(x) = 1 / (-lambda +- sqrt(lambda^2 - 1) cos x),

with cosine coefficients (-+1)^n 2 e^{-beta n}, beta = artanh(1/|lambda|)
(and a_0 = 1). The shift lambda -> -lambda, u -> u + lambda and the scaling
u -> k u(kx) turn these into the families bifurcating from lambda = k:

    u(x) = k^2 / (lambda +- sqrt(lambda^2 - k^2) cos kx) - lambda.

Fields are built by sampling the closed form on a fine grid and projecting;
the result is then cross-checked against the exponential coefficient formula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .errors import LambdaOutOfRange
from .field import CosineField, GridSamples, from_grid
from .multiplier import MultiplierSpec
from .operator import ProblemSpec
from .spectrum import bifurcation_direction, sigma

SELF_TEST_TOL = 1e-10
MIN_GAP = 1e-6


class OracleSelfTestError(AssertionError):
    pass


def bo_problem(N: int = 256) -> ProblemSpec:
    return ProblemSpec(MultiplierSpec.fractional(0.5), p=2.0, N=N)


def _sign_value(sign) -> int:
    if sign in ("+", 1, +1):
        return 1
    if sign in ("-", -1):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def beta_of(lam_ratio: float) -> float:
    """artanh(1/|lambda|) for |lambda| > 1."""
    return math.atanh(1.0 / abs(lam_ratio))


def _sample_size(N: int, beta: float) -> int:
    # Coefficients decay like e^{-beta n}; sample enough modes that aliasing
    # from the discarded tail is below double precision.
    need = 2 * (N + int(math.ceil(40.0 / beta))) + 1
    return int(sfft.next_fast_len(max(need, 4 * N + 1), real=True))


def _coefficients(N: int, k: int, lam: float, sgn: int) -> np.ndarray:
    """Exponential-formula coefficients of the k-family at lambda > k (a_0 = k - lambda)."""
    beta = beta_of(lam / k)
    a = np.zeros(N + 1)
    a[0] = k - lam
    m = np.arange(1, N // k + 1)
    a[k * m] = 2.0 * k * (-sgn) ** m * np.exp(-beta * m)
    return a


def truncation_tail(k: int, lam: float, N: int) -> float:
    """Relative size of the first coefficient dropped by truncating at N.

    Works for both families: ``k=1, lam<-1`` is the negative family.
    """
    k = max(int(k), 1)
    return math.exp(-beta_of(lam / k) * (N // k + 1))


def _self_test(u: CosineField, expected: np.ndarray) -> CosineField:
    err = float(np.max(np.abs(u.a - expected)))
    if err > SELF_TEST_TOL:
        raise OracleSelfTestError(f"closed form and coefficient formula disagree by {err:.3e}")
    return u


def bo_negative(lam: float, sign="+", N: int = 256) -> CosineField:
    if not lam < -1.0 - MIN_GAP:
        raise LambdaOutOfRange(f"bo_negative needs lambda < -1, got {lam}")
    sgn = _sign_value(sign)
    root = math.sqrt(lam * lam - 1.0)
    M = _sample_size(N, beta_of(lam))
    g = GridSamples.sample(lambda x: 1.0 / (-lam + sgn * root * np.cos(x)), M)
    expected = _coefficients(N, 1, -lam, sgn)
    expected[0] = 1.0
    return _self_test(from_grid(g, N), expected)


def bo_positive(k: int, lam: float, sign="+", N: int = 256) -> CosineField:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not lam - k >= MIN_GAP:
        raise LambdaOutOfRange(f"bo_positive needs lambda > k={k} (by at least {MIN_GAP}), got {lam}")
    sgn = _sign_value(sign)
    root = math.sqrt(lam * lam - k * k)
    M = _sample_size(N, beta_of(lam / k) / k)
    g = GridSamples.sample(lambda x: k * k / (lam + sgn * root * np.cos(k * x)) - lam, M)
    return _self_test(from_grid(g, N), _coefficients(N, k, lam, sgn))


@dataclass(frozen=True)
class BOParametrization:
    amplitude: float
    predicted_lambda: float


def bo_branch_parametrization(k: int, lam: float) -> BOParametrization:
    """Leading coefficient a_k on the k-th branch (positive member) and the local-model lambda.

    The local model is sigma_k + lambda_ddot a^2 / 2 with lambda_ddot from the
    general bifurcation-direction formula.
    """
    if not lam - k >= MIN_GAP:
        raise LambdaOutOfRange(f"need lambda > k={k}, got {lam}")
    spec = MultiplierSpec.fractional(0.5)
    amp = 2.0 * k * math.exp(-beta_of(lam / k))
    ddot = bifurcation_direction(spec, k).lambda_ddot
    return BOParametrization(amp, sigma(spec, k) + 0.5 * ddot * amp * amp)
