"""Run configuration: TOML file plus command-line overrides, validated at once."""
from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .continuation import ContinuationConfig
from .errors import ConfigError, TorusBifError
from .multiplier import MultiplierSpec, validate
from .operator import ProblemSpec


@dataclass
class RunConfig:
    # problem
    multiplier: str = "fractional"
    s: float = 0.5
    p: float = 2.0
    delta: Optional[float] = None
    table: Optional[list] = None
    m0: Optional[float] = None
    m1: Optional[float] = None
    N: int = 128
    M: int = 0
    # diagram / continuation
    kmax: int = 2
    lambda_min: float = -3.0
    lambda_max: float = 5.0
    amplitude: float = 0.1
    ds0: float = 0.05
    ds_min: float = 1e-6
    ds_max: float = 0.25
    max_steps: int = 400
    newton_tol: float = 1e-10
    # output
    out: str = "out"
    format: str = "csv"
    workers: int = 2
    # subcommand parameters
    lam: Optional[float] = None
    k: int = 1
    sign: str = "+"
    t_end: float = 1.0
    dt: Optional[float] = None
    snapshot_every: int = 0
    branch: Optional[str] = None

    def multiplier_spec(self) -> MultiplierSpec:
        extra = {}
        if self.m1 is not None:
            extra["m1"] = self.m1
        if self.multiplier == "fractional":
            if self.m0 is not None:
                extra["m0"] = self.m0
            return MultiplierSpec.fractional(self.s, **extra)
        if self.multiplier == "ilw":
            return MultiplierSpec.ilw(self.delta, s=self.s, m0=self.m0, **extra)
        return MultiplierSpec.from_table(self.table, m0=self.m0, m1=self.m1, s=self.s)

    def problem(self) -> ProblemSpec:
        return ProblemSpec(self.multiplier_spec(), self.p, self.N, self.M)

    def continuation(self, target: Optional[float] = None) -> ContinuationConfig:
        return ContinuationConfig(
            ds0=self.ds0,
            ds_min=self.ds_min,
            ds_max=self.ds_max,
            target_lambda=target,
            max_steps=self.max_steps,
            newton_tol=self.newton_tol,
        )

    def to_dict(self) -> dict:
        return asdict(self)


_ALIASES = {"n": "N", "lambda": "lam", "t-end": "t_end", "lambda-min": "lambda_min", "lambda-max": "lambda_max"}
_FIELDS = {f.name: f for f in fields(RunConfig)}


def _flatten(d: dict, out: dict) -> dict:
    for key, value in d.items():
        if isinstance(value, dict):
            _flatten(value, out)
        else:
            out[_ALIASES.get(key, key)] = value
    return out


def _coerce(name: str, value: Any, errors: list) -> Any:
    if value is None:
        return None
    kind = _FIELDS[name].type
    try:
        if "int" in kind and "float" not in kind:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if "float" in kind:
            return float(value)
        if name == "table":
            return [float(v) for v in value]
        return str(value) if "str" in kind else value
    except (TypeError, ValueError):
        errors.append(f"{name}: cannot interpret {value!r} as {kind}")
        return _FIELDS[name].default


def parse_config(path: Optional[str | Path] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Merge file values with overrides (overrides win) and validate everything.

    All problems are collected and raised together as one ConfigError.
    """
    raw: dict = {}
    errors: list[str] = []
    if path is not None:
        try:
            with open(path, "rb") as fh:
                _flatten(tomllib.load(fh), raw)
        except OSError as exc:
            raise ConfigError([f"config: cannot read {path}: {exc}"]) from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError([f"config: malformed TOML in {path}: {exc}"]) from exc
    if overrides:
        _flatten({k: v for k, v in overrides.items() if v is not None}, raw)

    values = {}
    for key, value in raw.items():
        if key not in _FIELDS:
            errors.append(f"{key}: unknown configuration key")
            continue
        values[key] = _coerce(key, value, errors)
    cfg = RunConfig(**values)
    errors += _validate(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def _validate(cfg: RunConfig) -> list[str]:
    errs = []
    if not cfg.s >= 0.5:
        errs.append(f"s: must be >= 1/2 (got {cfg.s})")
    if not cfg.p >= 2:
        errs.append(f"p: must be >= 2 (got {cfg.p})")
    if cfg.multiplier not in ("fractional", "ilw", "table"):
        errs.append(f"multiplier: unknown kind {cfg.multiplier!r}")
    if cfg.multiplier == "ilw" and not (cfg.delta is not None and cfg.delta > 0):
        errs.append("delta: ILW multiplier needs delta > 0")
    if cfg.multiplier == "table":
        if not cfg.table:
            errs.append("table: table multiplier needs a list of values m(0), m(1), ...")
        if cfg.m0 is None or cfg.m1 is None:
            errs.append("m0/m1: table multiplier needs explicit m0 and m1")
    if cfg.N < 1:
        errs.append(f"N: must be >= 1 (got {cfg.N})")
    if cfg.kmax < 0:
        errs.append("kmax: must be >= 0")
    if not cfg.lambda_min < cfg.lambda_max:
        errs.append("lambda_min/lambda_max: need lambda_min < lambda_max")
    if not (0 < cfg.ds_min <= cfg.ds0 <= cfg.ds_max):
        errs.append("ds0/ds_min/ds_max: need 0 < ds_min <= ds0 <= ds_max")
    if cfg.newton_tol <= 0 or cfg.max_steps < 1:
        errs.append("newton_tol/max_steps: must be positive")
    if cfg.format not in ("csv", "json"):
        errs.append(f"format: must be csv or json (got {cfg.format!r})")
    if cfg.workers < 1:
        errs.append("workers: must be >= 1")
    if cfg.sign not in ("+", "-"):
        errs.append("sign: must be '+' or '-'")
    if cfg.dt is not None and cfg.dt <= 0:
        errs.append("dt: must be positive")
    if cfg.t_end < 0:
        errs.append("t_end: must be >= 0")
    if cfg.amplitude == 0:
        errs.append("amplitude: must be non-zero")
    if errs:
        return errs
    # multiplier hypotheses, checked only once the basic fields are sane
    try:
        spec = cfg.multiplier_spec()
    except TorusBifError as exc:
        return [f"multiplier: {exc}"]
    for v in validate(spec, cfg.N):
        errs.append(f"multiplier: hypothesis {v.hypothesis} violated at n={v.n}: {v.message}")
    if not errs:
        try:
            cfg.problem()
        except TorusBifError as exc:
            errs.append(f"problem: {exc}")
    return errs
