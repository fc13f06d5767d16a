"""The map F(lambda, u) = L u - lambda u - |u|^p, its derivatives, and Newton.

Everything works on cosine coefficients; pointwise products are formed on a
dealiased grid of size ``ProblemSpec.M``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy import fft as sfft
from scipy.linalg import lapack

from . import _kernels
from .errors import (
    GridTooCoarse,
    InvalidSpec,
    NoConvergence,
    RegularityUnavailable,
    SingularJacobian,
)
from .field import (
    CosineField,
    GridSamples,
    abs_power,
    apply_L,
    dealias_size,
    from_grid,
    l2_norm,
    nonlinearity,
    signed_power,
    to_grid,
)
from .multiplier import MultiplierSpec, operator_symbols

log = logging.getLogger(__name__)

RCOND_MIN = 1e-14
MAX_HALVINGS = 30


@dataclass(frozen=True)
class ProblemSpec:
    multiplier: MultiplierSpec
    p: float = 2.0
    N: int = 256
    M: int = field(default=0)

    def __post_init__(self):
        if not (self.p >= 2 and math.isfinite(self.p)):
            raise InvalidSpec(f"p must be >= 2, got {self.p}")
        if self.N < 1:
            raise InvalidSpec("N must be >= 1")
        need = dealias_size(self.N, self.p)
        if self.M == 0:
            object.__setattr__(self, "M", need)
        elif self.M < need:
            raise GridTooCoarse(f"M={self.M} below dealias size {need}")
        if self.multiplier.kind == "table" and self.multiplier.n_max < self.N:
            raise InvalidSpec(f"table covers n <= {self.multiplier.n_max} but N={self.N}")

    @property
    def s(self) -> float:
        return self.multiplier.s

    def with_truncation(self, N: int) -> "ProblemSpec":
        return replace(self, N=int(N), M=0)

    def to_dict(self) -> dict:
        return {"multiplier": self.multiplier.to_dict(), "p": self.p, "N": self.N, "M": self.M}

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemSpec":
        return cls(MultiplierSpec.from_dict(d["multiplier"]), float(d["p"]), int(d["N"]), int(d.get("M", 0)))


def _check(ps: ProblemSpec, *fields: CosineField) -> None:
    for f in fields:
        if f.N != ps.N:
            raise ValueError(f"field has N={f.N}, problem expects N={ps.N}")


def residual(ps: ProblemSpec, lam: float, u: CosineField) -> CosineField:
    _check(ps, u)
    Lu = apply_L(ps.multiplier, u)
    nl = nonlinearity(u, ps.p, signed=False, M=ps.M)
    return CosineField(Lu.a - lam * u.a - nl.a)


def residual_norm(ps: ProblemSpec, lam: float, u: CosineField) -> float:
    return l2_norm(residual(ps, lam, u))


def _grid(ps: ProblemSpec, u: CosineField) -> np.ndarray:
    return to_grid(u, ps.M).values


def _project(ps: ProblemSpec, values: np.ndarray) -> CosineField:
    return from_grid(GridSamples(values), ps.N)


def jacobian_weight(ps: ProblemSpec, u: CosineField) -> np.ndarray:
    """Grid values of p u|u|^{p-2}, the multiplier in the linearisation."""
    return ps.p * signed_power(_grid(ps, u), ps.p - 1.0)


def jacobian_apply(ps: ProblemSpec, lam: float, u: CosineField, v: CosineField) -> CosineField:
    _check(ps, u, v)
    Lv = apply_L(ps.multiplier, v)
    prod = _project(ps, jacobian_weight(ps, u) * _grid(ps, v))
    return CosineField(Lv.a - lam * v.a - prod.a)


def derivative_available(p: float, order: int) -> bool:
    """Whether the order-th u-derivative of |u|^p exists as a continuous function.

    Even integers are smooth. For other p, f(x) = |x|^p has ``ceil(p) - 1``
    continuous derivatives (odd integer p) or ``floor(p)`` (non-integer p).
    """
    if float(p).is_integer():
        pi = int(p)
        return pi % 2 == 0 or order <= pi - 1
    return order <= math.floor(p)


def second_derivative(ps: ProblemSpec, u: CosineField, v1: CosineField, v2: CosineField) -> CosineField:
    _check(ps, u, v1, v2)
    if not derivative_available(ps.p, 2):
        raise RegularityUnavailable(f"second derivative unavailable for p={ps.p}")
    p = ps.p
    w = -p * (p - 1.0) * abs_power(_grid(ps, u), p - 2.0)
    return _project(ps, w * _grid(ps, v1) * _grid(ps, v2))


def third_derivative(
    ps: ProblemSpec, u: CosineField, v1: CosineField, v2: CosineField, v3: CosineField
) -> CosineField:
    _check(ps, u, v1, v2, v3)
    p = ps.p
    if p == 2:
        return CosineField.zeros(ps.N)
    if not derivative_available(p, 3):
        raise RegularityUnavailable(f"third derivative unavailable for p={p}")
    w = -p * (p - 1.0) * (p - 2.0) * signed_power(_grid(ps, u), p - 3.0)
    return _project(ps, w * _grid(ps, v1) * _grid(ps, v2) * _grid(ps, v3))


def multiplication_matrix(ps: ProblemSpec, weight: np.ndarray) -> np.ndarray:
    """Galerkin matrix of v -> P_N(weight * v) for an even grid weight."""
    qhat = sfft.rfft(weight).real / ps.M
    return _kernels.product_matrix(qhat, ps.N, ps.M)


def jacobian_matrix(ps: ProblemSpec, lam: float, u: CosineField) -> np.ndarray:
    _check(ps, u)
    J = -multiplication_matrix(ps, jacobian_weight(ps, u))
    J[np.diag_indices_from(J)] += operator_symbols(ps.multiplier, ps.N) - lam
    return J


def lu_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b by LU with partial pivoting; refuse ill-conditioned A."""
    lu, piv, info = lapack.dgetrf(A)
    if info > 0:
        raise SingularJacobian(0.0)
    anorm = np.linalg.norm(A, 1)
    rcond, _ = lapack.dgecon(lu, anorm, norm="1")
    if not rcond > RCOND_MIN:
        raise SingularJacobian(float(rcond))
    x, info = lapack.dgetrs(lu, piv, b)
    return x


class NewtonResult(NamedTuple):
    u: CosineField
    iterations: int
    residual: float
    history: tuple


def newton_solve(
    ps: ProblemSpec,
    lam: float,
    u0: CosineField,
    tol: float = 1e-10,
    max_iter: int = 50,
) -> NewtonResult:
    """Damped Newton iteration for F(lam, u) = 0 at fixed lam.

    The step is halved (at most 30 times) until the residual L^2 norm
    decreases. Convergence is tested before each linear solve, so an exact
    starting guess costs no iterations.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check(ps, u0)
    u = u0
    r = residual(ps, lam, u)
    rn = l2_norm(r)
    history = [rn]
    for it in range(max_iter + 1):
        if rn <= tol:
            return NewtonResult(u, it, rn, tuple(history))
        if it == max_iter:
            break
        delta = lu_solve(jacobian_matrix(ps, lam, u), -r.a)
        t = 1.0
        halvings = 0
        while True:
            trial = CosineField(u.a + t * delta)
            r_trial = residual(ps, lam, trial)
            rn_trial = l2_norm(r_trial)
            if rn_trial < rn or halvings >= MAX_HALVINGS:
                break
            t *= 0.5
            halvings += 1
        if not rn_trial < rn:
            raise NoConvergence(it + 1, rn, f"Newton stagnated at residual {rn:.3e}")
        log.debug(
            "newton step",
            extra={"iteration": it + 1, "residual": rn_trial, "damping": halvings, "lam": lam},
        )
        u, r, rn = trial, r_trial, rn_trial
        history.append(rn)
    raise NoConvergence(max_iter, rn)
