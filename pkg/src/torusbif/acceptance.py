"""Acceptance checks, shared by the test-suite and the ``verify`` subcommand.

Every check returns a :class:`CheckResult`; none of them raises on a numerical
failure (the exception text is recorded instead), so a run always produces a
complete report.
"""
from __future__ import annotations

import math
import time
import traceback
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bounds
from .continuation import (
    ContinuationConfig,
    branch_switch,
    constant_point,
    continue_branch,
    detect_events,
    scale_T_k,
    symmetry_T,
    trivial_point,
    BranchPoint,
)
from .errors import RegularityUnavailable, TruncationOverflow
from .evolve import traveling_wave_check
from .field import CosineField, l2_norm, linf_norm
from .multiplier import MultiplierSpec
from .operator import (
    ProblemSpec,
    jacobian_apply,
    newton_solve,
    residual,
    residual_norm,
    second_derivative,
    third_derivative,
)
from .oracle import bo_negative as _bo_negative, bo_positive as _bo_positive, truncation_tail
from .spectrum import bifurcation_direction, local_predictor, trivial_spectrum

SCAN_N = 32
ORACLE_TAIL_TOL = 1e-12


def _resolved(k: int, lam: float, N: int) -> None:
    tail = truncation_tail(k, lam, N)
    if tail > ORACLE_TAIL_TOL:
        raise TruncationOverflow(
            f"N={N} cannot represent the closed-form solution at k={k}, lambda={lam}: "
            f"first dropped coefficient is {tail:.1e} of the leading one"
        )


def bo_negative(lam, sign, N):
    _resolved(1, lam, N)
    return _bo_negative(lam, sign, N)


def bo_positive(k, lam, sign, N):
    _resolved(k, lam, N)
    return _bo_positive(k, lam, sign, N)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number}: {self.name}: {self.summary}"

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "passed": self.passed,
            "summary": self.summary,
            "details": self.details,
            "seconds": round(self.seconds, 3),
        }


def _run(number: int, name: str, fn: Callable[[], tuple[bool, str, dict]]) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, summary, details = fn()
    except Exception as exc:  # a crash is a failed criterion, with the reason kept
        ok, summary = False, f"{type(exc).__name__}: {exc}"
        details = {"traceback": traceback.format_exc(limit=4)}
    return CheckResult(number, name, bool(ok), summary, details, time.perf_counter() - t0)


def _bo(N: int) -> ProblemSpec:
    return ProblemSpec(MultiplierSpec.fractional(0.5), 2.0, N)


# ---------------------------------------------------------------------------
# 1. spectrum
# ---------------------------------------------------------------------------
def trivial_scan(s: float, k_max: int, N: int = SCAN_N):
    spec = MultiplierSpec.fractional(s)
    ps = ProblemSpec(spec, 2.0, N)
    top = float(k_max) ** (2 * s) + 0.5
    cfg = ContinuationConfig(ds0=0.05, ds_max=0.25, target_lambda=top, max_steps=10_000)
    branch = continue_branch(ps, trivial_point(ps, 0.5), 1, cfg, origin="trivial")
    return branch, detect_events(branch)


def check_spectrum(N: int = 256) -> CheckResult:
    def body():
        details = {}
        ok = True
        for s in (0.5, 0.75, 1.0):
            spec = MultiplierSpec.fractional(s)
            sig = np.array([e.sigma for e in trivial_spectrum(spec, 10)])
            exact = np.arange(11, dtype=float) ** (2 * s)
            closed_err = float(np.max(np.abs(sig - exact) / np.maximum(exact, 1)))
            _, events = trivial_scan(s, 10)
            found = sorted(e.lam for e in events if e.type == "BranchPoint")
            want = exact[1:]
            if len(found) != len(want):
                ok = False
                details[f"s={s}"] = {"found": found}
                continue
            loc_err = float(np.max(np.abs(np.array(found) - want)))
            pre_err = float(max(abs(e.estimate - w) for e, w in zip(events, want)))
            ok &= closed_err <= 4e-16 and loc_err <= 1e-6
            details[f"s={s}"] = {"closed_form_err": closed_err, "located_err": loc_err, "estimate_err": pre_err}
        worst = max(d.get("located_err", math.inf) for d in details.values())
        return ok, f"10 eigenvalues for each s located, worst |dlambda| = {worst:.2e}", details

    return _run(1, "spectrum exactness", body)


# ---------------------------------------------------------------------------
# 2. oracle residuals
# ---------------------------------------------------------------------------
NEG_LAMBDAS = (-5.0, -2.0, -1.5)
POS_CASES = ((1, 1.5), (1, 2.0), (1, 5.0), (2, 3.0), (3, 4.0))


def check_oracle_residuals(N: int = 256) -> CheckResult:
    def body():
        ps = _bo(N)
        res = {}
        for lam in NEG_LAMBDAS:
            for sg in "+-":
                res[f"neg({lam},{sg})"] = residual_norm(ps, lam, bo_negative(lam, sg, N))
        for k, lam in POS_CASES:
            for sg in "+-":
                res[f"pos({k},{lam},{sg})"] = residual_norm(ps, lam, bo_positive(k, lam, sg, N))
        worst = max(res.values())
        return worst < 1e-9, f"max residual {worst:.2e} at N={N}", res

    return _run(2, "oracle residuals", body)


# ---------------------------------------------------------------------------
# 3. local-to-global agreement
# ---------------------------------------------------------------------------
def bo_branch(N: int, amplitude: float = 0.2, target: float = 3.0, tol: float = 1e-12):
    ps = _bo(N)
    start = branch_switch(ps, 1, amplitude, ContinuationConfig(newton_tol=tol))
    cfg = ContinuationConfig(target_lambda=target, newton_tol=tol)
    return continue_branch(ps, start, 1, cfg, origin="trivial_mode:1")


def check_local_global(N: int = 256) -> CheckResult:
    def body():
        ps = _bo(N)
        lam, u0 = local_predictor(ps.multiplier, 1, 0.2, N=N)
        sol = newton_solve(ps, lam, u0)
        sign = "-" if sol.u.a[1] > 0 else "+"
        err0 = linf_norm(sol.u - bo_positive(1, lam, sign, N))
        branch = bo_branch(N)
        errs = [linf_norm(pt.u - bo_positive(1, pt.lam, "-", N)) for pt in branch.points]
        reached = branch.points[-1].lam
        ok = sol.iterations <= 8 and err0 < 1e-6 and max(errs) < 1e-6 and reached == 3.0
        details = {
            "newton_iterations": sol.iterations,
            "predictor_lambda": lam,
            "newton_linf_err": err0,
            "branch_points": len(branch),
            "branch_max_linf_err": max(errs),
            "final_lambda": reached,
        }
        return ok, (
            f"{sol.iterations} Newton iterations, error {err0:.1e}; "
            f"{len(branch)} branch points to lambda={reached}, max error {max(errs):.1e}"
        ), details

    return _run(3, "local-to-global agreement", body)


# ---------------------------------------------------------------------------
# 4. bifurcation direction
# ---------------------------------------------------------------------------
def fitted_ddot(s: float, k: int, N: int = 64, a_max: float = 0.15) -> tuple[float, int]:
    """Quadratic fit of lambda against a_k along both halves of the k-th branch."""
    ps = ProblemSpec(MultiplierSpec.fractional(s), 2.0, N)
    cfg = ContinuationConfig(ds0=0.005, ds_max=0.02, max_steps=40, newton_tol=1e-12)
    amps, lams = [], []
    for sgn in (1, -1):
        start = branch_switch(ps, k, sgn * 0.02, cfg)
        branch = continue_branch(ps, start, 1, cfg)
        for pt in branch.points:
            if abs(pt.u.a[k]) <= a_max:
                amps.append(pt.u.a[k])
                lams.append(pt.lam)
    c2, _, _ = np.polyfit(amps, lams, 2)
    return 2.0 * c2, len(amps)


def exact_bo_ddot(a_max: float = 0.15, count: int = 31) -> float:
    """Same fit on the exact relation lambda = coth(beta), amplitude = 2 e^{-beta}."""
    amps = np.linspace(-a_max, a_max, count)
    amps = amps[amps != 0]
    beta = -np.log(np.abs(amps) / 2.0)
    lams = 1.0 / np.tanh(beta)
    c2, _, _ = np.polyfit(amps, lams, 2)
    return 2.0 * c2


def check_direction(N: int = 256) -> CheckResult:
    def body():
        details = {}
        ok = True
        for s, k in ((0.5, 1), (0.5, 2), (1.0, 1)):
            formula = bifurcation_direction(MultiplierSpec.fractional(s), k).lambda_ddot
            fit, npts = fitted_ddot(s, k)
            rel = abs(fit - formula) / formula
            ok &= rel < 0.05
            details[f"s={s},k={k}"] = {"formula": formula, "fit": fit, "rel_err": rel, "points": npts}
        exact = exact_bo_ddot()
        bo_fit = details["s=0.5,k=1"]["fit"]
        ok &= abs(bo_fit - 1.0) <= 0.05 and abs(exact - 1.0) <= 0.05
        details["exact_relation_fit"] = exact
        worst = max(d["rel_err"] for d in details.values() if isinstance(d, dict))
        return ok, f"worst relative error {worst:.2%}; BO fit {bo_fit:.4f}, exact-relation fit {exact:.4f}", details

    return _run(4, "bifurcation direction", body)


# ---------------------------------------------------------------------------
# 5. symmetry and scaling
# ---------------------------------------------------------------------------
def check_symmetry(N: int = 256) -> CheckResult:
    def body():
        ps = _bo(N)
        tt_err, t_res, t_match = 0.0, 0.0, 0.0
        for lam in NEG_LAMBDAS:
            for sg in "+-":
                pt = BranchPoint.evaluate(ps, lam, bo_negative(lam, sg, N))
                img = symmetry_T(pt, ps)
                back = symmetry_T(img, ps)
                tt_err = max(tt_err, float(np.max(np.abs(back.u.a - pt.u.a))), abs(back.lam - pt.lam))
                t_res = max(t_res, img.residual)
                t_match = max(t_match, float(np.max(np.abs(img.u.a - bo_positive(1, -lam, sg, N).a))))
        half = max(N // 2, 1)
        branch = bo_branch(half)
        scale_err = 0.0
        for pt in branch.points:
            img = scale_T_k(pt, branch.problem, 2)
            ref = bo_positive(2, img.lam, "-", 2 * half)
            scale_err = max(scale_err, float(np.max(np.abs(img.u.a - ref.a))))
        ok = tt_err <= 1e-12 and t_res < 1e-9 and scale_err <= 1e-10
        details = {
            "TT_identity_err": tt_err,
            "T_image_max_residual": t_res,
            "T_image_vs_oracle": t_match,
            "T2_points": len(branch),
            "T2_vs_oracle_max_coeff_err": scale_err,
        }
        return ok, (
            f"T.T err {tt_err:.1e}, T-image residual {t_res:.1e}, "
            f"T_2 vs oracle {scale_err:.1e} over {len(branch)} points"
        ), details

    return _run(5, "symmetry and scaling", body)


# ---------------------------------------------------------------------------
# 6. bounds
# ---------------------------------------------------------------------------
ASYMPTOTIC_CASES = ((0.5, 2.0), (0.75, 2.0), (1.0, 2.0), (1.0, 3.0))


def check_bounds(N: int = 256) -> CheckResult:
    def body():
        details = {}
        ps = _bo(N)
        branches = [bo_branch(N, target=5.0, tol=1e-10)]
        branches.append(
            continue_branch(ps, constant_point(ps, 0.5), 1, ContinuationConfig(target_lambda=5.0), origin="constant")
        )
        neg_const = continue_branch(
            ps, constant_point(ps, -0.5), -1, ContinuationConfig(target_lambda=-3.5), origin="constant"
        )
        branches.append(neg_const)
        branches.append(
            continue_branch(ps, trivial_point(ps, 0.5), 1, ContinuationConfig(target_lambda=3.5), origin="trivial")
        )
        checked = 0
        failures = []
        for br in branches:
            for pt in br.points:
                if pt.residual >= 1e-8:
                    continue
                rep = bounds.check_point(ps, None, pt)
                checked += 1
                for name in ("l2", "linf_chain"):
                    c = rep.get(name)
                    if not c.passes:
                        failures.append((br.origin, pt.lam, name, c.measured, c.bound))
        sat = max(
            abs(pt.norms.l2 - bounds.l2_bound(2.0, pt.lam)) for br in branches[1:3] for pt in br.points
        )
        details["points_checked"] = checked
        details["failures"] = failures
        details["constant_saturation_err"] = sat

        bc = bounds.BoundConstants()
        root_res = 0.0
        ratios = {}
        for s, p in ASYMPTOTIC_CASES:
            pss = ProblemSpec(MultiplierSpec.fractional(s), p, 16)
            for lam in (0.3, -2.0, 7.5, 1e3, 1e6):
                phi = bounds.phi_rho(pss, bc, lam)
                quad = 2 * math.pi * pss.multiplier.m0 * phi * phi
                root_res = max(root_res, abs(bounds.phi_polynomial(pss, bc, lam, phi)) / quad)
                if bounds.phi_polynomial(pss, bc, lam, 0.5 * phi) >= 0:
                    root_res = math.inf
            big = 1e6
            ratios[f"s={s},p={p}"] = {
                "phi": bounds.phi_rho(pss, bc, big) / bounds.phi_asymptotic(pss, bc, big),
                "psi": bounds.psi_rho(pss, bc, big) / bounds.psi_asymptotic(pss, bc, big),
            }
        details["phi_root_rel_residual"] = root_res
        details["asymptotic_ratios"] = ratios
        worst_ratio = max(abs(r - 1) for d in ratios.values() for r in d.values())
        ok = not failures and sat <= 1e-10 and root_res < 1e-10 and worst_ratio <= 0.02
        return ok, (
            f"{checked} points, {len(failures)} bound failures; saturation {sat:.1e}; "
            f"root residual {root_res:.1e}; worst asymptotic deviation {worst_ratio:.2%}"
        ), details

    return _run(6, "a-priori bounds", body)


# ---------------------------------------------------------------------------
# 7. constant-branch spectrum
# ---------------------------------------------------------------------------
def constant_scan(N: int = SCAN_N):
    ps = ProblemSpec(MultiplierSpec.fractional(0.5), 2.0, N)
    cfg = ContinuationConfig(ds_max=0.25, target_lambda=-3.5)
    branch = continue_branch(ps, constant_point(ps, -0.5), -1, cfg, origin="constant")
    return branch, detect_events(branch)


def check_constant_spectrum(N: int = 256) -> CheckResult:
    def body():
        branch, events = constant_scan()
        found = sorted((e.lam for e in events if e.type == "BranchPoint"), reverse=True)
        want = [-1.0, -2.0, -3.0]
        drift = max(float(np.max(np.abs(pt.u.a[1:]))) + abs(pt.u.a[0] + pt.lam) for pt in branch.points)
        if len(found) != 3:
            return False, f"expected 3 branch points, found {found}", {"found": found}
        err = max(abs(f - w) for f, w in zip(found, want))
        return err <= 1e-6 and drift < 1e-12, f"located {', '.join(f'{f:.9f}' for f in found)}; max err {err:.1e}", {
            "found": found,
            "err": err,
            "max_departure_from_u=-lambda": drift,
        }

    return _run(7, "constant-branch spectrum", body)


# ---------------------------------------------------------------------------
# 8. derivatives
# ---------------------------------------------------------------------------
def random_field(rng: np.random.Generator, N: int, s: float, h2s_max: float = 1.0) -> CosineField:
    n = np.arange(N + 1)
    a = rng.standard_normal(N + 1) / (1.0 + n) ** (2 * s + 1)
    u = CosineField(a)
    from .field import norms as _norms

    scale = rng.uniform(0.2, 1.0) * h2s_max / _norms(u, s).h_2s
    return u * scale


def _rel(a: CosineField, b: CosineField) -> float:
    num = l2_norm(a - b)
    den = max(l2_norm(a), l2_norm(b))
    return 0.0 if num == 0 else num / den


def derivative_errors(p: float, instances: int = 20, N: int = 32, h: float = 1e-5, seed: int = 20240517) -> dict:
    rng = np.random.default_rng(seed + int(10 * p))
    ps = ProblemSpec(MultiplierSpec.fractional(0.5), p, N)
    worst = {"first": 0.0, "second": 0.0, "third": 0.0}
    third_available = True
    for _ in range(instances):
        lam = rng.uniform(-3, 3)
        u = random_field(rng, N, ps.s)
        v1, v2, v3 = (random_field(rng, N, ps.s) for _ in range(3))
        fd1 = (residual(ps, lam, u + v1 * h) - residual(ps, lam, u - v1 * h)) * (0.5 / h)
        worst["first"] = max(worst["first"], _rel(jacobian_apply(ps, lam, u, v1), fd1))
        fd2 = (jacobian_apply(ps, lam, u + v2 * h, v1) - jacobian_apply(ps, lam, u - v2 * h, v1)) * (0.5 / h)
        worst["second"] = max(worst["second"], _rel(second_derivative(ps, u, v1, v2), fd2))
        try:
            d3 = third_derivative(ps, u, v1, v2, v3)
        except RegularityUnavailable:
            third_available = False
            continue
        fd3 = (second_derivative(ps, u + v3 * h, v1, v2) - second_derivative(ps, u - v3 * h, v1, v2)) * (0.5 / h)
        worst["third"] = max(worst["third"], _rel(d3, fd3))
    if not third_available:
        worst["third"] = None
    return worst


def check_derivatives(N: int = 256) -> CheckResult:
    def body():
        details = {f"p={p}": derivative_errors(p) for p in (2.0, 3.0, 4.0)}
        vals = [v for d in details.values() for v in d.values() if v is not None]
        worst = max(vals)
        # third derivative at p = 3 must be refused rather than computed
        refused = details["p=3.0"]["third"] is None
        ok = worst < 1e-5 and refused
        return ok, f"worst relative FD error {worst:.1e} (third derivative refused at p=3)", details

    return _run(8, "derivative correctness", body)


# ---------------------------------------------------------------------------
# 9. traveling waves
# ---------------------------------------------------------------------------
def order_study(N: int = 64, dts=(0.005, 0.0025, 0.00125)) -> tuple[list, list]:
    spec = MultiplierSpec.fractional(0.5)
    phi = bo_positive(1, 2.0, "+", N)
    devs = [traveling_wave_check(spec, phi, 2.0, 1.0, dt=dt).max_deviation for dt in dts]
    orders = [math.log2(devs[i] / devs[i + 1]) for i in range(len(devs) - 1)]
    return devs, orders


def check_traveling_wave(N: int = 256) -> CheckResult:
    def body():
        spec = MultiplierSpec.fractional(0.5)
        rep = traveling_wave_check(spec, bo_positive(1, 2.0, "+", N), 2.0, 1.0)
        devs, orders = order_study()
        ok = (
            rep.max_deviation < 1e-4
            and rep.mass_drift == 0.0
            and rep.momentum_drift < 1e-8
            and all(3.5 <= o <= 4.5 for o in orders)
        )
        details = {
            "deviation": rep.max_deviation,
            "mass_drift": rep.mass_drift,
            "momentum_rel_drift": rep.momentum_drift,
            "dt": rep.dt,
            "order_deviations": devs,
            "orders": orders,
        }
        return ok, (
            f"deviation {rep.max_deviation:.1e}, mass drift {rep.mass_drift:.0e}, "
            f"momentum drift {rep.momentum_drift:.1e}, orders {', '.join(f'{o:.2f}' for o in orders)}"
        ), details

    return _run(9, "traveling waves", body)


CHECKS = (
    check_spectrum,
    check_oracle_residuals,
    check_local_global,
    check_direction,
    check_symmetry,
    check_bounds,
    check_constant_spectrum,
    check_derivatives,
    check_traveling_wave,
)

VERIFY_N = 256

EXCLUDED = {10: "global alternative and existence ranges (theory only, not reproducible as computation)"}


def run_all(N: int = VERIFY_N) -> list[CheckResult]:
    return [check(N) for check in CHECKS]
