"""A-priori bounds for solutions of L u = lambda u + |u|^p.

Two kinds of bound live here.

*Hard* bounds need no unknown constants and must hold for every computed
solution: the L^2 bound sqrt(2 pi) |lambda|^{1/(p-1)}, the coefficient chain
||u||_inf <= max(sqrt(2 pi), sqrt(2 zeta(4s))) (||u||_2 + ||u||_{H^2s-dot}),
and (fractional Laplacian, lambda >= 0) the pointwise lower bound
u >= -lambda^{1/(p-1)}.

*Indicative* bounds (Phi_rho, Psi_rho and what is built from them) depend on
a Gagliardo-Nirenberg constant and Sobolev embedding constants that are not
known in closed form. They are evaluated from user-supplied
:class:`BoundConstants`; with the 1.0 placeholders they are only indicative.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from . import _kernels
from .errors import UnsupportedMultiplier, UnsupportedRegime
from .field import CosineField, Norms, norms as field_norms, to_grid
from .operator import ProblemSpec

log = logging.getLogger(__name__)

PLACEHOLDER_BANNER = (
    "bound constants are user-supplied placeholders (1.0); "
    "Phi/Psi-based bounds are indicative only"
)
EQUALITY_SLACK = 1e-10
LOWER_SLACK = 1e-8


@dataclass(frozen=True)
class BoundConstants:
    c_gns: float = 1.0
    rho: float = 1.0
    c_rho: float = 1.0
    a_embed: dict = field(default_factory=dict)  # r -> A_r; missing entries default to 1.0
    placeholder: bool = True

    def __post_init__(self):
        vals = [self.c_gns, self.rho, self.c_rho, *self.a_embed.values()]
        if any(not (v > 0 and math.isfinite(v)) for v in vals):
            raise ValueError("bound constants must be finite and positive")

    def A(self, r: float) -> float:
        return float(self.a_embed.get(r, self.a_embed.get(float(r), 1.0)))


_banner_shown = False


def _banner(bc: BoundConstants) -> None:
    global _banner_shown
    if bc.placeholder and not _banner_shown:
        log.warning(PLACEHOLDER_BANNER)
        _banner_shown = True


# ---------------------------------------------------------------------------
# constant-free bounds
# ---------------------------------------------------------------------------
def l2_bound(p: float, lam: float) -> float:
    return math.sqrt(2.0 * math.pi) * abs(lam) ** (1.0 / (p - 1.0))


def zeta(q: float, K: int = 1000) -> float:
    """Riemann zeta for q > 1: partial sum plus an Euler-Maclaurin tail."""
    if not q > 1:
        raise ValueError("zeta needs q > 1")
    head = _kernels.zeta_partial(q, K - 1)
    tail = (
        K ** (1.0 - q) / (q - 1.0)
        + 0.5 * K ** (-q)
        + q / 12.0 * K ** (-q - 1.0)
        - q * (q + 1.0) * (q + 2.0) / 720.0 * K ** (-q - 3.0)
    )
    return head + tail


def chain_constant(s: float) -> float:
    return max(math.sqrt(2.0 * math.pi), math.sqrt(2.0 * zeta(4.0 * s)))


def chain_bound(s: float, nrm: Norms) -> float:
    return chain_constant(s) * (nrm.l2 + nrm.hdot_2s)


@dataclass(frozen=True)
class LowerBound:
    min_u: float
    bound: float
    passes: bool


def lower_bound_check(lam: float, u: CosineField, p: float, ps: Optional[ProblemSpec] = None) -> LowerBound:
    """u >= -lambda^{1/(p-1)} for the fractional Laplacian and lambda >= 0."""
    if ps is not None and ps.multiplier.kind != "fractional":
        raise UnsupportedMultiplier("lower bound holds for the fractional Laplacian only")
    if lam < 0:
        raise ValueError("lower bound applies for lambda >= 0")
    M = max(1024, 8 * u.N)
    m = float(np.min(to_grid(u, M).values))
    b = -(lam ** (1.0 / (p - 1.0)))
    return LowerBound(m, b, m >= b - LOWER_SLACK)


# ---------------------------------------------------------------------------
# constant-dependent bounds
# ---------------------------------------------------------------------------
def _regime(ps: ProblemSpec) -> None:
    if not ps.p < 4.0 * ps.s + 1.0:
        raise UnsupportedRegime(f"needs p < 4s+1 (p={ps.p}, s={ps.s})")


def _poly_parts(ps: ProblemSpec, bc: BoundConstants, lam: float):
    p, s, m0 = ps.p, ps.s, ps.multiplier.m0
    L = abs(lam)
    two_pi = 2.0 * math.pi
    C1 = (bc.c_gns + bc.rho) * two_pi ** (1.0 + (p - 1.0) * (2.0 * s - 1.0) / (4.0 * s))
    C2 = two_pi + bc.c_rho * two_pi ** ((p + 1.0) / 2.0)
    quad = two_pi * m0
    mid = C1 * L ** (2.0 / (p - 1.0) + (2.0 * s - 1.0) / (2.0 * s))
    const = C2 * L ** ((p + 1.0) / (p - 1.0))
    expo = (p - 1.0) / (2.0 * s)
    return quad, mid, expo, const


def phi_polynomial(ps: ProblemSpec, bc: BoundConstants, lam: float, x: float) -> float:
    quad, mid, expo, const = _poly_parts(ps, bc, lam)
    return quad * x * x - mid * x**expo - const


def phi_rho(ps: ProblemSpec, bc: BoundConstants, lam: float) -> float:
    """Unique positive zero of the bounding polynomial; bounds ||u||_{H^s-dot}."""
    _regime(ps)
    _banner(bc)
    if lam == 0:
        return 0.0
    f = lambda x: phi_polynomial(ps, bc, lam, x)  # noqa: E731
    hi = 1.0
    while f(hi) <= 0:
        hi *= 2.0
    return float(optimize.bisect(f, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=2000))


def growth_exponent(p: float, s: float) -> float:
    return (2 * s * p + 2 * s - p + 1) / ((4 * s - p + 1) * (p - 1))


def growth_constant(ps: ProblemSpec, bc: BoundConstants) -> float:
    p, s, m0 = ps.p, ps.s, ps.multiplier.m0
    base = (bc.c_gns + bc.rho) / m0 * (2 * math.pi) ** ((p - 1) * (2 * s - 1) / (4 * s))
    return base ** (2 * s / (4 * s - p + 1))


def phi_asymptotic(ps: ProblemSpec, bc: BoundConstants, lam: float) -> float:
    _regime(ps)
    return growth_constant(ps, bc) * abs(lam) ** growth_exponent(ps.p, ps.s)


def psi_rho(ps: ProblemSpec, bc: BoundConstants, lam: float) -> float:
    """Bound for ||u||_{H^2s-dot}."""
    _regime(ps)
    if lam == 0:
        return 0.0
    p, m0 = ps.p, ps.multiplier.m0
    L = abs(lam)
    base = 2 * math.pi * L ** (2 / (p - 1)) + phi_rho(ps, bc, lam) ** 2
    inner = (
        2 * math.pi * L ** (2 / (p - 1) + 2)
        + 2 * L * bc.A(p + 1) ** (p + 1) * base ** ((p + 1) / 2)
        + bc.A(2 * p) ** (2 * p) * base**p
    )
    return math.sqrt(inner) / m0


def psi_asymptotic(ps: ProblemSpec, bc: BoundConstants, lam: float) -> float:
    p = ps.p
    return (
        bc.A(2 * p) ** p / ps.multiplier.m0 * growth_constant(ps, bc) ** p
        * abs(lam) ** (growth_exponent(p, ps.s) * p)
    )


def hs_bound(ps: ProblemSpec, bc: BoundConstants, lam: float) -> float:
    return math.sqrt(2 * math.pi * abs(lam) ** (2 / (ps.p - 1)) + phi_rho(ps, bc, lam) ** 2)


def h2s_bound(ps: ProblemSpec, bc: BoundConstants, lam: float) -> float:
    return math.sqrt(2 * math.pi * abs(lam) ** (2 / (ps.p - 1)) + psi_rho(ps, bc, lam) ** 2)


def linf_bound(ps: ProblemSpec, bc: BoundConstants, lam: float) -> float:
    return math.sqrt(2 * math.pi) * h2s_bound(ps, bc, lam)


# ---------------------------------------------------------------------------
# aggregated report
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class BoundCheck:
    name: str
    measured: float
    bound: float
    passes: bool
    hard: bool  # hard checks need no unknown constants


@dataclass
class BoundReport:
    lam: float
    checks: list

    @property
    def hard_ok(self) -> bool:
        return all(c.passes for c in self.checks if c.hard)

    @property
    def all_ok(self) -> bool:
        return all(c.passes for c in self.checks)

    def get(self, name: str) -> BoundCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _upper(name, measured, bound, hard, slack=EQUALITY_SLACK) -> BoundCheck:
    return BoundCheck(name, measured, bound, measured <= bound + slack * max(1.0, bound), hard)


def check_point(ps: ProblemSpec, bc: Optional[BoundConstants], point) -> BoundReport:
    """Bound report for a continuation point (anything with lam, u and norms)."""
    return check_solution(ps, point.lam, point.u, bc, getattr(point, "norms", None))


def check_solution(
    ps: ProblemSpec,
    lam: float,
    u: CosineField,
    bc: Optional[BoundConstants] = None,
    nrm: Optional[Norms] = None,
) -> BoundReport:
    """Evaluate every applicable bound at the solution (lam, u)."""
    nrm = nrm or field_norms(u, ps.s)
    checks = [
        _upper("l2", nrm.l2, l2_bound(ps.p, lam), True),
        _upper("linf_chain", nrm.linf, chain_bound(ps.s, nrm), True),
        _upper("linf_l1", nrm.linf, nrm.l1_coeff, True),
    ]
    if ps.multiplier.kind == "fractional" and lam >= 0:
        lb = lower_bound_check(lam, u, ps.p, ps)
        checks.append(BoundCheck("lower", lb.min_u, lb.bound, lb.passes, True))
    if bc is not None and ps.p < 4 * ps.s + 1:
        checks += [
            _upper("hdot_s", nrm.hdot_s, phi_rho(ps, bc, lam), False),
            _upper("hdot_2s", nrm.hdot_2s, psi_rho(ps, bc, lam), False),
            _upper("h_2s", nrm.h_2s, h2s_bound(ps, bc, lam), False),
            _upper("linf", nrm.linf, linf_bound(ps, bc, lam), False),
        ]
    return BoundReport(lam, checks)
