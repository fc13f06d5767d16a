"""Command-line interface.

Exit status: 0 on success, 1 on a numerical failure, 2 on a configuration
error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import acceptance, bounds
from .config import RunConfig, parse_config
from .continuation import (
    Branch,
    branch_switch,
    constant_point,
    continue_branch,
    detect_events,
    symmetry_T_branch,
    trivial_point,
)
from .errors import ConfigError, NumericalError, TorusBifError
from .evolve import ComplexField, conserved_quantities, evolve, suggested_dt
from .field import CosineField
from .operator import newton_solve
from .oracle import bo_negative, bo_positive
from .spectrum import bifurcation_direction, local_predictor, sigma, trivial_spectrum

log = logging.getLogger("torusbif")

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------
def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _emit(cfg: RunConfig, name: str, text: str, to_stdout: bool = True) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    if to_stdout:
        sys.stdout.write(text)
    return path


def _field_output(cfg: RunConfig, stem: str, lam: float, u: CosineField, extra: Optional[dict] = None) -> None:
    if cfg.format == "json":
        doc = {"lambda": lam, **u.to_json(), **(extra or {})}
        _emit(cfg, f"{stem}.json", json.dumps(doc, indent=1) + "\n")
    else:
        rows = [(n, float(a)) for n, a in enumerate(u.a)]
        _emit(cfg, f"{stem}.csv", _csv_text(["n", "a"], rows))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------
def cmd_spectrum(cfg: RunConfig) -> int:
    spec = cfg.multiplier_spec()
    rows = []
    for e in trivial_spectrum(spec, cfg.kmax):
        ddot = ""
        if cfg.p == 2 and e.k >= 1:
            ddot = repr(bifurcation_direction(spec, e.k).lambda_ddot)
        rows.append((e.k, e.sigma, ddot))
    _emit(cfg, "spectrum.csv", _csv_text(["k", "sigma", "lambda_ddot"], rows))
    return EXIT_OK


def cmd_solve(cfg: RunConfig) -> int:
    ps = cfg.problem()
    lam = cfg.lam if cfg.lam is not None else sigma(ps.multiplier, cfg.k) + 0.1
    k = cfg.k
    if ps.p == 2:
        ddot = bifurcation_direction(ps.multiplier, k).lambda_ddot
        gap = lam - sigma(ps.multiplier, k)
        amp = math.copysign(math.sqrt(2 * gap / ddot), cfg.amplitude) if gap > 0 else cfg.amplitude
        _, u0 = local_predictor(ps.multiplier, k, amp, N=ps.N)
    else:
        u0 = CosineField.mode(k, ps.N, cfg.amplitude)
    res = newton_solve(ps, lam, u0, tol=cfg.newton_tol)
    log.info("solve: %d iterations, residual %.3e", res.iterations, res.residual)
    _field_output(cfg, "solution", lam, res.u, {"iterations": res.iterations, "residual": res.residual})
    return EXIT_OK


def cmd_branch(cfg: RunConfig) -> int:
    ps = cfg.problem()
    start = branch_switch(ps, cfg.k, cfg.amplitude, cfg.continuation())
    direction = 1 if start.lam >= sigma(ps.multiplier, cfg.k) else -1
    target = cfg.lambda_max if direction > 0 else cfg.lambda_min
    branch = continue_branch(ps, start, direction, cfg.continuation(target), origin=f"trivial_mode:{cfg.k}")
    stem = f"branch_k{cfg.k}{'p' if cfg.amplitude > 0 else 'm'}"
    _emit(cfg, f"{stem}.json", branch.dumps() + "\n", to_stdout=cfg.format == "json")
    _emit(cfg, f"{stem}.csv", branch.to_csv(), to_stdout=cfg.format == "csv")
    return EXIT_OK


def cmd_oracle(cfg: RunConfig) -> int:
    if cfg.lam is None:
        raise ConfigError(["lambda: the oracle subcommand needs --lambda"])
    if cfg.lam < 0:
        u = bo_negative(cfg.lam, cfg.sign, cfg.N)
    else:
        u = bo_positive(cfg.k, cfg.lam, cfg.sign, cfg.N)
    _field_output(cfg, "oracle", cfg.lam, u)
    return EXIT_OK


def cmd_bounds_check(cfg: RunConfig) -> int:
    if not cfg.branch:
        raise ConfigError(["branch: bounds-check needs --branch <file.json>"])
    branch = Branch.loads(Path(cfg.branch).read_text())
    ps = branch.problem
    bc = bounds.BoundConstants() if ps.p < 4 * ps.s + 1 else None
    header = ["index", "lambda", "l2", "l2_bound", "linf", "chain_bound", "hard_pass", "indicative_pass"]
    rows = []
    all_hard = True
    for i, pt in enumerate(branch.points):
        rep = bounds.check_point(ps, bc, pt)
        l2, chain = rep.get("l2"), rep.get("linf_chain")
        soft = [c.passes for c in rep.checks if not c.hard]
        rows.append(
            (i, pt.lam, l2.measured, l2.bound, chain.measured, chain.bound,
             int(rep.hard_ok), int(all(soft)) if soft else "")
        )
        all_hard &= rep.hard_ok
    _emit(cfg, "bounds.csv", _csv_text(header, rows))
    return EXIT_OK if all_hard else EXIT_NUMERIC


def cmd_evolve(cfg: RunConfig) -> int:
    if cfg.lam is None:
        raise ConfigError(["lambda: the evolve subcommand needs --lambda"])
    spec = cfg.multiplier_spec()
    phi = bo_negative(cfg.lam, cfg.sign, cfg.N) if cfg.lam < 0 else bo_positive(cfg.k, cfg.lam, cfg.sign, cfg.N)
    u0 = ComplexField.from_cosine(phi)
    dt = cfg.dt or suggested_dt(u0)
    M = max(256, 4 * cfg.N)
    x = 2 * np.pi * np.arange(M) / M
    snaps = []

    def keep(t, state):
        snaps.append((t, state))

    uT = evolve(spec, u0, dt, cfg.t_end, callback=keep, snapshot_every=cfg.snapshot_every)
    if not snaps or snaps[-1][0] != cfg.t_end:
        snaps.append((cfg.t_end, uT))
    for i, (t, state) in enumerate(snaps):
        _emit(cfg, f"evolve_{i:04d}.csv", _csv_text(["t", "x", "u"], zip([t] * M, x, state.values(M))), False)
    q0, q1 = conserved_quantities(u0), conserved_quantities(uT)
    exact = u0.shifted(cfg.lam * cfg.t_end)
    dev = float(np.max(np.abs(uT.values() - exact.values())))
    summary = {
        "snapshots": len(snaps),
        "max_deviation_from_shift": dev,
        "mass_drift": q1.mass - q0.mass,
        "momentum_drift": q1.momentum - q0.momentum,
        "dt": dt,
    }
    _emit(cfg, "evolve_summary.json", json.dumps(summary, indent=1) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# diagram
# ---------------------------------------------------------------------------
@dataclass
class _Job:
    name: str
    sign: int
    kind: str
    k: int = 0
    start_lam: float = 0.0
    direction: int = 1


def _diagram_jobs(cfg: RunConfig) -> list[_Job]:
    ps = cfg.problem()
    jobs = [_Job("trivial", 1, "trivial", start_lam=cfg.lambda_min)]
    eps = 0.05
    if cfg.lambda_max > 0:
        jobs.append(_Job("constant_pos", 1, "constant", start_lam=min(eps, 0.5 * cfg.lambda_max), direction=1))
    if cfg.lambda_min < 0:
        jobs.append(_Job("constant_neg", 1, "constant", start_lam=max(-eps, 0.5 * cfg.lambda_min), direction=-1))
    for k in range(1, cfg.kmax + 1):
        if sigma(ps.multiplier, k) >= cfg.lambda_max or 2 * k > ps.N:
            continue
        for sgn in (1, -1):
            jobs.append(_Job(f"C{k}{'p' if sgn > 0 else 'm'}", sgn, "mode", k=k))
    return jobs


def _run_job(cfg: RunConfig, job: _Job) -> dict:
    ps = cfg.problem()
    try:
        if job.kind == "trivial":
            lam0 = job.start_lam
            if abs(lam0 - round(lam0)) < 1e-9 and any(
                abs(lam0 - e.sigma) < 1e-9 for e in trivial_spectrum(ps.multiplier, cfg.kmax + 1)
            ):
                lam0 -= 1e-3  # never start exactly on an eigenvalue
            branch = continue_branch(
                ps, trivial_point(ps, lam0), 1, cfg.continuation(cfg.lambda_max), origin="trivial"
            )
        elif job.kind == "constant":
            target = cfg.lambda_max if job.direction > 0 else cfg.lambda_min
            branch = continue_branch(
                ps, constant_point(ps, job.start_lam), job.direction, cfg.continuation(target), origin="constant"
            )
        else:
            start = branch_switch(ps, job.k, job.sign * abs(cfg.amplitude), cfg.continuation())
            direction = 1 if start.lam >= sigma(ps.multiplier, job.k) else -1
            target = cfg.lambda_max if direction > 0 else cfg.lambda_min
            branch = continue_branch(
                ps, start, direction, cfg.continuation(target), origin=f"trivial_mode:{job.k}"
            )
        events = detect_events(branch)
        return {"job": job, "branch": branch, "events": events, "error": None}
    except TorusBifError as exc:
        partial = getattr(exc, "branch", None)
        return {"job": job, "branch": partial, "events": [], "error": f"{type(exc).__name__}: {exc}"}


def run_diagram(cfg: RunConfig) -> dict:
    """Trace every branch of the diagram and write branch files plus a combined CSV."""
    jobs = _diagram_jobs(cfg)
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(lambda j: _run_job(cfg, j), jobs))  # map keeps job order

    if cfg.p == 2:
        mirrored = []
        for r in results:
            if r["job"].kind == "mode" and r["branch"] is not None and r["branch"].points:
                img = symmetry_T_branch(r["branch"])
                img.points = [pt for pt in img.points if pt.lam >= cfg.lambda_min]
                job = _Job(f"T_{r['job'].name}", r["job"].sign, "mirror", k=r["job"].k)
                mirrored.append({"job": job, "branch": img, "events": [], "error": None})
        results += mirrored

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    summary = {"problem": cfg.problem().to_dict(), "branches": []}
    for r in results:
        job, branch = r["job"], r["branch"]
        entry = {"name": job.name, "error": r["error"], "events": [
            {"type": e.type, "lambda": e.lam} for e in r["events"]
        ]}
        if branch is not None:
            path = out / f"branch_{job.name}.json"
            path.write_text(branch.dumps() + "\n")
            entry.update(file=path.name, origin=branch.origin, points=len(branch), status=branch.status)
            for pt in branch.points:
                rows.append((job.name, pt.lam, job.sign * pt.norms.h_2s))
        summary["branches"].append(entry)
    (out / "diagram.csv").write_text(_csv_text(["branch", "lambda", "signed_h2s_norm"], rows))
    (out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    return summary


def cmd_diagram(cfg: RunConfig) -> int:
    summary = run_diagram(cfg)
    for b in summary["branches"]:
        ev = ", ".join(f"{e['type']}@{e['lambda']:.6g}" for e in b["events"]) or "-"
        status = b.get("error") or b.get("status")
        print(f"{b['name']:>14s}  points={b.get('points', 0):4d}  {status}  events: {ev}")
    failed = [b for b in summary["branches"] if b["error"]]
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    results = acceptance.run_all(cfg.N)
    for r in results:
        print(r.line())
    for number, why in acceptance.EXCLUDED.items():
        print(f"[SKIP] criterion {number}: excluded: {why}")
    report = {
        "N": cfg.N,
        "passed": all(r.passed for r in results),
        "checks": [r.to_dict() for r in results],
        "failing": [r.name for r in results if not r.passed],
    }
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "verify.json").write_text(json.dumps(report, indent=1, default=float) + "\n")
    return EXIT_OK if report["passed"] else EXIT_NUMERIC


COMMANDS = {
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
    "branch": cmd_branch,
    "diagram": cmd_diagram,
    "oracle": cmd_oracle,
    "bounds-check": cmd_bounds_check,
    "evolve": cmd_evolve,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("problem and output")
    g.add_argument("--config", help="TOML configuration file")
    g.add_argument("--multiplier", choices=["fractional", "ilw", "table"])
    g.add_argument("--s", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--m0", type=float)
    g.add_argument("--m1", type=float)
    g.add_argument("--n", dest="N", type=int, help="truncation order N")
    g.add_argument("--kmax", type=int)
    g.add_argument("--lambda-min", dest="lambda_min", type=float)
    g.add_argument("--lambda-max", dest="lambda_max", type=float)
    g.add_argument("--out", help="output directory")
    g.add_argument("--format", choices=["csv", "json"])
    g.add_argument("--workers", type=int)
    g.add_argument("-v", "--verbose", action="count", default=0)
    s = common.add_argument_group("subcommand parameters")
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--k", type=int)
    s.add_argument("--sign", choices=["+", "-"])
    s.add_argument("--amplitude", type=float)
    s.add_argument("--t-end", dest="t_end", type=float)
    s.add_argument("--dt", type=float)
    s.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    s.add_argument("--branch", help="branch JSON file (bounds-check)")

    parser = argparse.ArgumentParser(prog="torusbif", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    if args.command == "verify" and args.N is None:
        overrides["N"] = acceptance.VERIFY_N  # criteria are stated at this truncation
    try:
        cfg = parse_config(args.config, overrides)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TorusBifError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
