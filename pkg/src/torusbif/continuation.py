"""Pseudo-arclength continuation of solution branches.

The unknown is z = (a, lambda), with a the cosine coefficients of u. Arclength
is measured in the H^{2s} norm of u combined with |lambda|, i.e. with the
diagonal weights

    w_0 = 2 pi,   w_n = pi + n^{4s} / 2,   w_lambda = 1,

so that ||dz||_W^2 = ||du||_{H^2s}^2 + dlambda^2.

Each step predicts along the current tangent and corrects with Newton on the
bordered (Keller) system

    [ J_u   -a ] [da]   [ -F            ]
    [ W t_u  t_l] [dl] = [ ds - W t.(z-z0) ]

The first tangent comes from the null space of [J_u, -a]; later ones are
secants through the last two accepted points.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import optimize

from . import bounds as _bounds
from .errors import (
    BoundViolation,
    InvalidSpec,
    NoConvergence,
    SingularJacobian,
    StallAtMinStep,
    TruncationOverflow,
    UnsupportedMultiplier,
    UnsupportedP,
    ZeroLambda,
)
from .field import CosineField, Norms, l2_norm, norms as field_norms
from .operator import ProblemSpec, jacobian_matrix, lu_solve, newton_solve, residual
from .spectrum import local_predictor, sigma

log = logging.getLogger(__name__)

DEFAULT_N_MAX = 8192


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class BranchPoint:
    lam: float
    u: CosineField
    residual: float
    norms: Norms
    min_sv: float
    arclength: float = 0.0
    det_sign: int = 0

    @classmethod
    def evaluate(cls, ps: ProblemSpec, lam: float, u: CosineField, arclength: float = 0.0) -> "BranchPoint":
        """Build a point and compute its diagnostics (residual, norms, min_sv, det sign)."""
        res = l2_norm(residual(ps, lam, u))
        J = jacobian_matrix(ps, lam, u)
        sv = np.linalg.svd(J, compute_uv=False)
        sign, _ = np.linalg.slogdet(J)
        return cls(
            lam=float(lam),
            u=u,
            residual=res,
            norms=field_norms(u, ps.s),
            min_sv=float(sv[-1]),
            arclength=float(arclength),
            det_sign=int(sign),
        )

    def to_json(self) -> dict:
        return {
            "lambda": self.lam,
            "a": [float(v) for v in self.u.a],
            "residual": self.residual,
            "min_sv": self.min_sv,
            "arclength": self.arclength,
            "det_sign": self.det_sign,
        }

    @classmethod
    def from_json(cls, d: dict, s: float) -> "BranchPoint":
        u = CosineField(np.asarray(d["a"], dtype=float))
        return cls(
            lam=float(d["lambda"]),
            u=u,
            residual=float(d["residual"]),
            norms=field_norms(u, s),
            min_sv=float(d["min_sv"]),
            arclength=float(d["arclength"]),
            det_sign=int(d.get("det_sign", 0)),
        )


@dataclass
class Branch:
    problem: ProblemSpec
    origin: str
    points: list = field(default_factory=list)
    status: str = "complete"

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([pt.lam for pt in self.points])

    def __len__(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {
            "problem": self.problem.to_dict(),
            "origin": self.origin,
            "status": self.status,
            "points": [pt.to_json() for pt in self.points],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Branch":
        ps = ProblemSpec.from_dict(d["problem"])
        pts = [BranchPoint.from_json(p, ps.s) for p in d["points"]]
        return cls(ps, d["origin"], pts, d.get("status", "complete"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "Branch":
        return cls.from_json(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "l2", "h2s", "linf", "residual", "min_sv"])
        for pt in self.points:
            n = pt.norms
            w.writerow([repr(v) for v in (pt.lam, n.l2, n.h_2s, n.linf, pt.residual, pt.min_sv)])
        return buf.getvalue()


@dataclass(frozen=True)
class ContinuationConfig:
    ds0: float = 0.05
    ds_min: float = 1e-6
    ds_max: float = 0.25
    target_lambda: Optional[float] = None
    max_steps: int = 200
    newton_tol: float = 1e-10
    max_iter: int = 10
    easy_iters: int = 3
    check_bounds: bool = True

    def __post_init__(self):
        if not (0 < self.ds_min <= self.ds0 <= self.ds_max):
            raise InvalidSpec(
                f"need 0 < ds_min <= ds0 <= ds_max (got {self.ds_min}, {self.ds0}, {self.ds_max})"
            )
        if self.max_steps < 1 or self.newton_tol <= 0 or self.max_iter < 1:
            raise InvalidSpec("max_steps, newton_tol and max_iter must be positive")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------
def arclength_weights(ps: ProblemSpec) -> np.ndarray:
    n = np.arange(ps.N + 1, dtype=float)
    w = np.empty(ps.N + 2)
    w[: ps.N + 1] = math.pi + 0.5 * n ** (4.0 * ps.s)
    w[0] = 2.0 * math.pi
    w[-1] = 1.0
    return w


def _pack(lam: float, u: CosineField) -> np.ndarray:
    return np.append(u.a, lam)


def _unpack(z: np.ndarray) -> tuple[float, CosineField]:
    return float(z[-1]), CosineField(z[:-1])


def _wnorm(w: np.ndarray, z: np.ndarray) -> float:
    return math.sqrt(float(np.sum(w * z * z)))


def bordered_newton(
    ps: ProblemSpec,
    z0: np.ndarray,
    row: np.ndarray,
    rhs: float,
    tol: float = 1e-10,
    max_iter: int = 10,
) -> tuple[np.ndarray, int]:
    """Solve F(lambda, u) = 0 together with the linear constraint row . z = rhs.

    Returns the solution vector and the number of Newton iterations used.
    """
    z = np.array(z0, dtype=float)
    scale = max(1.0, abs(rhs))
    first = None
    for it in range(max_iter + 1):
        lam, u = _unpack(z)
        r = residual(ps, lam, u)
        rn = l2_norm(r)
        c = float(row @ z) - rhs
        if first is None:
            first = rn
        if not math.isfinite(rn) or rn > 1e6 * max(first, 1.0):
            raise NoConvergence(it, rn, "bordered Newton diverged")
        if rn <= tol and abs(c) <= 1e-12 * scale:
            return z, it
        if it == max_iter:
            break
        J = jacobian_matrix(ps, lam, u)
        B = np.empty((ps.N + 2, ps.N + 2))
        B[:-1, :-1] = J
        B[:-1, -1] = -u.a
        B[-1, :] = row
        z = z + lu_solve(B, -np.append(r.a, c))
    raise NoConvergence(max_iter, rn)


def null_tangent(ps: ProblemSpec, lam: float, u: CosineField, direction: int) -> np.ndarray:
    """Unit (in the W metric) null vector of [J_u, -a], oriented by ``direction``.

    ``direction`` is the sign of dlambda/ds; when the tangent has no lambda
    component the sign of its largest u-component is used instead.
    """
    w = arclength_weights(ps)
    A = np.hstack([jacobian_matrix(ps, lam, u), -u.a[:, None]])
    # work in scaled coordinates y = sqrt(w) z so the null vector is W-unit
    _, _, vt = np.linalg.svd(A / np.sqrt(w)[None, :])
    t = vt[-1] / np.sqrt(w)
    t /= _wnorm(w, t)
    key = t[-1] if abs(t[-1]) > 1e-10 else t[np.argmax(np.abs(t[:-1]))]
    return t if key * direction > 0 else -t


# ---------------------------------------------------------------------------
# special solutions
# ---------------------------------------------------------------------------
def constant_solution(p: float, lam: float, N: int = 256) -> CosineField:
    """The non-zero constant solution: negative for lambda > 0, positive for lambda < 0."""
    if lam == 0:
        raise ZeroLambda("only u = 0 solves the equation at lambda = 0")
    c = abs(lam) ** (1.0 / (p - 1.0))
    return CosineField.constant(-c if lam > 0 else c, N)


def trivial_point(ps: ProblemSpec, lam: float) -> BranchPoint:
    return BranchPoint.evaluate(ps, lam, CosineField.zeros(ps.N))


def constant_point(ps: ProblemSpec, lam: float) -> BranchPoint:
    return BranchPoint.evaluate(ps, lam, constant_solution(ps.p, lam, ps.N))


def branch_switch(
    ps: ProblemSpec, k: int, amplitude: float, cfg: Optional[ContinuationConfig] = None
) -> BranchPoint:
    """Corrected point on the k-th bifurcating branch with a_k = amplitude.

    The guess is the second-order predictor for p = 2 and (sigma_k, amplitude
    cos kx) otherwise. It is corrected by Newton on F = 0 with a_k pinned, so
    lambda is an unknown.
    """
    cfg = cfg or ContinuationConfig()
    if not 1 <= k <= ps.N // 2:
        raise ValueError(f"mode k={k} needs N >= 2k (N={ps.N})")
    if amplitude == 0:
        raise ValueError("amplitude must be non-zero")
    if ps.p == 2:
        lam0, u0 = local_predictor(ps.multiplier, k, amplitude, N=ps.N)
    else:
        lam0, u0 = sigma(ps.multiplier, k), CosineField.mode(k, ps.N, amplitude)
    row = np.zeros(ps.N + 2)
    row[k] = 1.0
    z, _ = bordered_newton(ps, _pack(lam0, u0), row, amplitude, cfg.newton_tol, max(cfg.max_iter, 20))
    lam, u = _unpack(z)
    others = np.delete(np.abs(u.a[1:]), k - 1)
    if others.size and np.max(others) >= abs(u.a[k]):
        raise NoConvergence(0, 0.0, f"corrected point is not dominated by mode {k}")
    return BranchPoint.evaluate(ps, lam, u)


# ---------------------------------------------------------------------------
# continuation
# ---------------------------------------------------------------------------
def _assert_bounds(ps: ProblemSpec, pt: BranchPoint) -> None:
    rep = _bounds.check_point(ps, None, pt)
    if not rep.hard_ok:
        bad = [c for c in rep.checks if c.hard and not c.passes]
        raise BoundViolation(
            f"hard bound failed at lambda={pt.lam:.6g}: "
            + ", ".join(f"{c.name} {c.measured:.6g} vs {c.bound:.6g}" for c in bad)
        )


def continue_branch(
    ps: ProblemSpec,
    start: BranchPoint,
    direction: int = 1,
    cfg: Optional[ContinuationConfig] = None,
    origin: str = "manual",
) -> Branch:
    cfg = cfg or ContinuationConfig()
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    if start.residual > max(cfg.newton_tol, 1e-12) * 10:
        raise ValueError(f"start point residual {start.residual:.2e} above tolerance")
    w = arclength_weights(ps)
    branch = Branch(ps, origin, [start])
    z = _pack(start.lam, start.u)
    t = null_tangent(ps, start.lam, start.u, direction)
    ds = cfg.ds0
    easy = 0
    target = cfg.target_lambda
    if target is not None and start.lam == target:
        return branch

    for step in range(cfg.max_steps):
        while True:
            row = w * t
            try:
                z_new, iters = bordered_newton(
                    ps, z + ds * t, row, float(row @ z) + ds, cfg.newton_tol, cfg.max_iter
                )
                dz = z_new - z
                if float(row @ dz) <= 0:
                    raise NoConvergence(iters, 0.0, "corrector moved backwards")
                break
            except (NoConvergence, SingularJacobian) as exc:
                ds *= 0.5
                easy = 0
                log.debug("step rejected", extra={"step": step, "ds": ds, "reason": str(exc)})
                if ds < cfg.ds_min:
                    branch.status = "stalled"
                    raise StallAtMinStep(
                        f"step size fell below ds_min={cfg.ds_min} near lambda={z[-1]:.6g}", branch
                    ) from exc

        dist = _wnorm(w, dz)
        lam_old, lam_new = float(z[-1]), float(z_new[-1])
        crossed = target is not None and (lam_new - target) * (lam_old - target) <= 0
        if crossed:
            theta = (target - lam_old) / (lam_new - lam_old)
            guess = CosineField(z[:-1] + theta * dz[:-1])
            res = newton_solve(ps, target, guess, tol=cfg.newton_tol, max_iter=cfg.max_iter)
            z_end = _pack(target, res.u)
            pt = BranchPoint.evaluate(
                ps, target, res.u, branch.points[-1].arclength + _wnorm(w, z_end - z)
            )
        else:
            pt = BranchPoint.evaluate(ps, lam_new, CosineField(z_new[:-1]), branch.points[-1].arclength + dist)
        if cfg.check_bounds:
            _assert_bounds(ps, pt)
        branch.points.append(pt)
        log.debug(
            "point accepted",
            extra={"step": step, "lam": pt.lam, "ds": ds, "iterations": iters, "min_sv": pt.min_sv},
        )
        if crossed:
            return branch
        z, t = z_new, dz / dist
        if iters <= cfg.easy_iters:
            easy += 1
            if easy >= 4:
                ds = min(2.0 * ds, cfg.ds_max)
                easy = 0
        else:
            easy = 0
    branch.status = "max_steps"
    return branch


# ---------------------------------------------------------------------------
# event detection
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Event:
    type: str  # "Fold" or "BranchPoint"
    lam: float
    estimate: float  # value before refinement
    index: int  # events lie between points index and index + 1 (folds: near index)
    min_sv: float
    bracket: float  # final |delta lambda| of the refinement

    @property
    def lambda_(self) -> float:
        return self.lam


def _solve_near(ps: ProblemSpec, lam: float, guess: CosineField, tol: float) -> CosineField:
    return newton_solve(ps, lam, guess, tol=tol, max_iter=30).u


def _refine_branch_point(ps, p0: BranchPoint, p1: BranchPoint, tol: float, newton_tol: float):
    lo, hi = p0.lam, p1.lam
    s_lo = p0.det_sign
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        theta = (mid - p0.lam) / (p1.lam - p0.lam)
        guess = CosineField(p0.u.a + theta * (p1.u.a - p0.u.a))
        u_mid = _solve_near(ps, mid, guess, newton_tol)
        sgn, _ = np.linalg.slogdet(jacobian_matrix(ps, mid, u_mid))
        if sgn == 0:
            lo = hi = mid
            break
        if sgn == s_lo:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    theta = (lam - p0.lam) / (p1.lam - p0.lam)
    u = _solve_near(ps, lam, CosineField(p0.u.a + theta * (p1.u.a - p0.u.a)), newton_tol)
    J = jacobian_matrix(ps, lam, u)
    return lam, float(np.linalg.svd(J, compute_uv=False)[-1]), abs(hi - lo), J


def _refine_fold(ps, branch: Branch, i: int, tol: float, newton_tol: float):
    """Locate the lambda-extremum near point i on the chord family through i-1, i+1."""
    w = arclength_weights(ps)
    pa, pb = branch.points[i - 1], branch.points[i + 1]
    za, zb = _pack(pa.lam, pa.u), _pack(pb.lam, pb.u)
    chord = zb - za
    S = _wnorm(w, chord)
    d = chord / S
    row = w * d
    sign = 1.0 if branch.points[i].lam > pa.lam else -1.0  # maximum or minimum

    def lam_at(sig: float) -> float:
        z, _ = bordered_newton(ps, za + sig * d, row, float(row @ za) + sig, newton_tol, 30)
        return float(z[-1])

    res = optimize.minimize_scalar(
        lambda sg: -sign * lam_at(sg), bounds=(0.0, S), method="bounded", options={"xatol": 1e-10 * max(S, 1.0)}
    )
    sig = float(res.x)
    lam = lam_at(sig)
    # |delta lambda| across the final bracket, measured directly
    h = 1e-7 * max(S, 1.0)
    spread = max(abs(lam_at(min(sig + h, S)) - lam), abs(lam_at(max(sig - h, 0.0)) - lam))
    z, _ = bordered_newton(ps, za + sig * d, row, float(row @ za) + sig, newton_tol, 30)
    lam_z, u = _unpack(z)
    J = jacobian_matrix(ps, lam_z, u)
    return lam, float(np.linalg.svd(J, compute_uv=False)[-1]), spread


def detect_events(
    branch: Branch,
    threshold: float = 1e-6,
    tol: float = 1e-8,
    newton_tol: float = 1e-11,
) -> list[Event]:
    """Folds (dlambda/ds changes sign) and branch points (det J_u changes sign).

    A branch point is kept only if, after bisection to |dlambda| <= tol, the
    smallest singular value falls below ``threshold`` times the diagonal scale
    of the Jacobian. Determinant sign changes next to a fold are attributed to
    the fold.
    """
    pts = branch.points
    if len(pts) < 3:
        return []
    ps = branch.problem
    lams = branch.lambdas
    dl = np.diff(lams)
    events: list[Event] = []
    fold_intervals: set[int] = set()
    for i in range(1, len(dl)):
        if dl[i - 1] * dl[i] < 0:
            fold_intervals.update((i - 1, i))
            try:
                lam, msv, spread = _refine_fold(ps, branch, i, tol, newton_tol)
            except (NoConvergence, SingularJacobian) as exc:
                log.info("fold refinement failed near index %d: %s", i, exc)
                lam, msv, spread = float(lams[i]), pts[i].min_sv, float(abs(dl[i - 1]) + abs(dl[i]))
            events.append(Event("Fold", lam, float(lams[i]), i, msv, spread))
    for i in range(len(pts) - 1):
        p0, p1 = pts[i], pts[i + 1]
        if i in fold_intervals or p0.det_sign * p1.det_sign >= 0:
            continue
        f0, f1 = p0.det_sign * p0.min_sv, p1.det_sign * p1.min_sv
        estimate = p0.lam + (p1.lam - p0.lam) * f0 / (f0 - f1)
        try:
            lam, msv, width, J = _refine_branch_point(ps, p0, p1, tol, newton_tol)
        except (NoConvergence, SingularJacobian) as exc:
            log.info("branch point refinement failed in interval %d: %s", i, exc)
            continue
        scale = max(1.0, float(np.max(np.abs(np.diag(J)))))
        if msv < threshold * scale:
            events.append(Event("BranchPoint", lam, estimate, i, msv, width))
        else:
            log.info("det sign change at lambda~%.6g not confirmed (min_sv=%.3e)", lam, msv)
    events.sort(key=lambda e: (e.index, e.type))
    return events


# ---------------------------------------------------------------------------
# symmetry and scaling maps
# ---------------------------------------------------------------------------
def symmetry_T(point: BranchPoint, ps: ProblemSpec) -> BranchPoint:
    """(lambda, u) -> (-lambda, u + lambda); an involution of the p = 2 solution set."""
    if ps.p != 2:
        raise UnsupportedP("the symmetry T exists for p = 2 only")
    a = point.u.a.copy()
    a[0] += point.lam
    return replace(BranchPoint.evaluate(ps, -point.lam, CosineField(a)), arclength=point.arclength)


def symmetry_T_branch(branch: Branch) -> Branch:
    ps = branch.problem
    return Branch(ps, f"T({branch.origin})", [symmetry_T(pt, ps) for pt in branch.points], branch.status)


def scale_T_k(point: BranchPoint, ps: ProblemSpec, k: int, n_max: int = DEFAULT_N_MAX) -> BranchPoint:
    """(lambda, u) -> (k^{2s} lambda, k^{2s/(p-1)} u(kx)) for the fractional Laplacian.

    The output lives at truncation k*N (see ``ps.with_truncation``), so no
    mode is dropped.
    """
    if ps.multiplier.kind != "fractional":
        raise UnsupportedMultiplier("T_k is defined for the fractional Laplacian only")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k * ps.N > n_max:
        raise TruncationOverflow(f"k*N = {k * ps.N} exceeds N_max = {n_max}")
    ps_k = ps.with_truncation(k * ps.N)
    b = np.zeros(k * ps.N + 1)
    b[::k] = k ** (2.0 * ps.s / (ps.p - 1.0)) * point.u.a
    lam = k ** (2.0 * ps.s) * point.lam
    return replace(BranchPoint.evaluate(ps_k, lam, CosineField(b)), arclength=point.arclength)
