"""Closed-form spectral data along the trivial and constant branches.

Also provides the second-order local predictor for the branch emanating
from (sigma_k, 0) when p = 2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedP
from .field import CosineField, apply_L, inner_l2, l2_norm, nonlinearity
from .multiplier import MultiplierSpec, operator_symbol, symbol
from .operator import ProblemSpec, jacobian_apply

PHI_CHECK_TOL = 1e-12


@dataclass(frozen=True)
class EigenData:
    k: int
    sigma: float
    chi: int = 1

    def kernel_mode(self, N: int) -> CosineField:
        return CosineField.mode(self.k, N)


def sigma(spec: MultiplierSpec, k: int) -> float:
    return operator_symbol(spec, k)


def trivial_spectrum(spec: MultiplierSpec, k_max: int) -> list[EigenData]:
    return [EigenData(k, sigma(spec, k)) for k in range(k_max + 1)]


def constant_branch_spectrum(spec: MultiplierSpec, p: float, k_max: int) -> list[float]:
    """Values of lambda where the linearisation about the constant solution is singular."""
    if not p > 1:
        raise UnsupportedP("constant branch spectrum requires p > 1")
    return [0.0] + [-sigma(spec, k) / (p - 1.0) for k in range(1, k_max + 1)]


@dataclass(frozen=True)
class Transversality:
    projection: float
    passes: bool


def transversality_check(ps: ProblemSpec, k: int, tol: float = 1e-8) -> Transversality:
    """Pair d/dlambda of the linearisation at (sigma_k, 0) applied to cos(kx) with cos(kx).

    The lambda-derivative is taken by a central difference; the map is affine
    in lambda so the difference is exact up to rounding.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    zero = CosineField.zeros(ps.N)
    mode = CosineField.mode(k, ps.N)
    sk = sigma(ps.multiplier, k)
    h = 0.5
    d = (jacobian_apply(ps, sk + h, zero, mode) - jacobian_apply(ps, sk - h, zero, mode)) * (0.5 / h)
    proj = inner_l2(d, mode)
    return Transversality(proj, abs(proj) > tol)


@dataclass(frozen=True)
class Direction:
    lambda_dot: float
    lambda_ddot: float


def _require_p2(p: float) -> None:
    if p != 2:
        raise UnsupportedP(f"closed-form local bifurcation data exists only for p=2 (got p={p})")


def bifurcation_direction(spec: MultiplierSpec, k: int, p: float = 2.0) -> Direction:
    _require_p2(p)
    m1, m2 = symbol(spec, k), symbol(spec, 2 * k)
    two2s = 2.0 ** (2.0 * spec.s)
    sk = sigma(spec, k)
    ddot = (2.0 * two2s * m2 - 3.0 * m1) / (two2s * m2 - m1) / sk
    return Direction(0.0, ddot)


def corrector_phi(spec: MultiplierSpec, k: int, N: int | None = None, p: float = 2.0) -> CosineField:
    """phi_k solving L phi - sigma_k phi = 2 cos^2(kx), with no cos(kx) component."""
    _require_p2(p)
    N = 2 * k if N is None else N
    if N < 2 * k:
        raise ValueError(f"N={N} cannot hold mode 2k={2 * k}")
    sk, s2k = sigma(spec, k), sigma(spec, 2 * k)
    a = np.zeros(N + 1)
    a[0] = -1.0 / sk
    a[2 * k] = 1.0 / (s2k - sk)
    phi = CosineField(a)
    mode = CosineField.mode(k, N)
    rhs = nonlinearity(mode, 2.0) * 2.0
    err = l2_norm(apply_L(spec, phi) - phi * sk - rhs)
    if err > PHI_CHECK_TOL:
        raise ArithmeticError(f"corrector check failed: defect {err:.3e}")
    return phi


def local_predictor(
    spec: MultiplierSpec, k: int, amplitude: float, N: int | None = None, p: float = 2.0
) -> tuple[float, CosineField]:
    """Second-order approximation (lambda, u) of the k-th branch at a_k = amplitude.

    u = s cos(kx) + (s^2/2) phi_k and lambda = sigma_k + lambda_ddot s^2 / 2.
    Intended for |amplitude| <= 0.3 as a Newton starting guess.
    """
    _require_p2(p)
    N = 2 * k if N is None else N
    phi = corrector_phi(spec, k, N)
    s = float(amplitude)
    u = CosineField.mode(k, N, s) + phi * (0.5 * s * s)
    lam = sigma(spec, k) + 0.5 * bifurcation_direction(spec, k).lambda_ddot * s * s
    return lam, u


def smallest_singular_values(J: np.ndarray, count: int = 2) -> np.ndarray:
    sv = np.linalg.svd(J, compute_uv=False)
    return np.sort(sv)[:count]

