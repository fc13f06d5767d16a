"""Fourier multiplier symbols m(n) and the composite symbol |n|^{2s} m(n).

Three kinds are supported:

* ``fractional``: m(n) = 1, so the operator is the fractional Laplacian.
* ``ilw``: the intermediate-long-wave symbol |coth(delta n) - 1/(delta n)|.
* ``table``: user-provided values m(0), m(1), ..., m(N_max).

Specs are immutable and hashable so symbol arrays can be cached per
(spec, N) pair and shared across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import InvalidSpec, TableOutOfRange

KINDS = ("fractional", "ilw", "table")

# Below this |delta*n| the ILW symbol is evaluated from a cancellation-free series.
_ILW_SERIES_CUTOFF = 1.0
_ILW_SERIES_TERMS = 20


@dataclass(frozen=True)
class MultiplierSpec:
    """Symbol m(n) together with the exponent s and hypothesis bounds m0 < m < m1.

    ``table`` holds m(n) for n = 0..N_max (index equals frequency).
    """

    s: float
    kind: str = "fractional"
    delta: Optional[float] = None
    table: Optional[tuple] = None
    m0: float = 0.5
    m1: float = 2.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown multiplier kind {self.kind!r}; expected one of {KINDS}")
        if not (math.isfinite(self.s) and self.s >= 0.5):
            raise InvalidSpec(f"s must be >= 1/2, got {self.s}")
        if self.kind == "ilw" and not (self.delta is not None and self.delta > 0):
            raise InvalidSpec("ILW multiplier requires delta > 0")
        if self.kind == "table":
            if not self.table:
                raise InvalidSpec("table multiplier requires a non-empty table")
            object.__setattr__(self, "table", tuple(float(v) for v in self.table))
        if not (self.m0 > 0 and self.m1 > self.m0):
            raise InvalidSpec(f"need 0 < m0 < m1, got m0={self.m0}, m1={self.m1}")

    # -- constructors -----------------------------------------------------
    @classmethod
    def fractional(cls, s: float, m0: float = 0.5, m1: float = 2.0) -> "MultiplierSpec":
        return cls(s=float(s), kind="fractional", m0=m0, m1=m1)

    @classmethod
    def ilw(cls, delta: float, s: float = 0.5, m0: float | None = None, m1: float = 2.0) -> "MultiplierSpec":
        if m0 is None:
            # m(1) is the infimum over n >= 1 of a non-decreasing symbol.
            m0 = 0.5 * float(_ilw(np.array([1]), float(delta))[0])
        return cls(s=float(s), kind="ilw", delta=float(delta), m0=m0, m1=m1)

    @classmethod
    def from_table(cls, values, m0: float, m1: float, s: float = 0.5) -> "MultiplierSpec":
        return cls(s=float(s), kind="table", table=tuple(values), m0=m0, m1=m1)

    @property
    def n_max(self) -> Optional[int]:
        return len(self.table) - 1 if self.kind == "table" else None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "s": self.s, "m0": self.m0, "m1": self.m1}
        if self.delta is not None:
            d["delta"] = self.delta
        if self.table is not None:
            d["table"] = list(self.table)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MultiplierSpec":
        table = d.get("table")
        return cls(
            s=float(d["s"]),
            kind=d.get("kind", "fractional"),
            delta=d.get("delta"),
            table=tuple(table) if table is not None else None,
            m0=float(d.get("m0", 0.5)),
            m1=float(d.get("m1", 2.0)),
        )


def _ilw(n: np.ndarray, delta: float) -> np.ndarray:
    x = delta * np.abs(n).astype(float)
    out = np.zeros_like(x)
    small = (x > 0) & (x < _ILW_SERIES_CUTOFF)
    xs = x[small]
    # coth(x) - 1/x = (x cosh x - sinh x) / (x sinh x), and the numerator is
    # sum_{j>=1} 2j x^{2j+1} / (2j+1)!  -- every term positive, so nothing cancels
    num = np.zeros_like(xs)
    term = xs.copy()  # x^{2j+1} / (2j+1)! at j = 0
    x2 = xs * xs
    for j in range(1, _ILW_SERIES_TERMS + 1):
        term = term * x2 / ((2 * j) * (2 * j + 1))
        num += 2 * j * term
    out[small] = num / (xs * np.sinh(xs))
    big = x >= _ILW_SERIES_CUTOFF
    xb = x[big]
    # coth(x) = 1 + 2 e^{-2x} / (1 - e^{-2x}), which cannot overflow
    e = np.exp(-2.0 * xb)
    out[big] = np.abs(1.0 + 2.0 * e / -np.expm1(-2.0 * xb) - 1.0 / xb)
    return out


def symbol(spec: MultiplierSpec, n):
    """Return m(n). Accepts an integer or an integer array."""
    scalar = np.ndim(n) == 0
    n_arr = np.abs(np.atleast_1d(np.asarray(n, dtype=np.int64)))
    if spec.kind == "fractional":
        out = np.ones(n_arr.shape)
    elif spec.kind == "ilw":
        out = _ilw(n_arr, spec.delta)
    else:
        if n_arr.size and n_arr.max() > spec.n_max:
            raise TableOutOfRange(
                f"|n|={int(n_arr.max())} exceeds table range N_max={spec.n_max}"
            )
        out = np.asarray(spec.table)[n_arr]
    return float(out[0]) if scalar else out


def operator_symbol(spec: MultiplierSpec, n):
    """Return |n|^{2s} m(n), the symbol of the operator L (zero at n = 0)."""
    scalar = np.ndim(n) == 0
    n_arr = np.abs(np.atleast_1d(np.asarray(n, dtype=np.int64)))
    out = n_arr.astype(float) ** (2.0 * spec.s) * symbol(spec, n_arr)
    out[n_arr == 0] = 0.0
    return float(out[0]) if scalar else out


@lru_cache(maxsize=256)
def _symbol_table(spec: MultiplierSpec, N: int) -> np.ndarray:
    arr = operator_symbol(spec, np.arange(N + 1))
    arr.setflags(write=False)
    return arr


def operator_symbols(spec: MultiplierSpec, N: int) -> np.ndarray:
    """Cached read-only array of operator_symbol(spec, n) for n = 0..N."""
    return _symbol_table(spec, int(N))


@dataclass(frozen=True)
class Violation:
    hypothesis: str  # "M1", "M2", "M3" or "range"
    n: int
    message: str


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:  # truthy when there is something to report
        return bool(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)


def validate(spec: MultiplierSpec, n_max: int) -> ValidationReport:
    """Check (M1)-(M3) numerically on 1 <= |n| <= n_max; never raises."""
    if n_max < 1:
        raise InvalidSpec("n_max must be >= 1")
    report = ValidationReport()
    upper = n_max
    if spec.kind == "table" and spec.n_max < n_max:
        report.violations.append(
            Violation("range", spec.n_max + 1, f"table covers |n| <= {spec.n_max} only")
        )
        upper = spec.n_max
    if upper < 1:
        return report
    n = np.arange(1, upper + 1)
    m_pos = symbol(spec, n)
    m_neg = symbol(spec, -n)
    for i in np.flatnonzero(m_pos != m_neg):
        report.violations.append(Violation("M1", int(n[i]), "m(-n) != m(n)"))
    for i in np.flatnonzero(np.diff(m_pos) < 0):
        report.violations.append(
            Violation("M2", int(n[i + 1]), f"m({n[i + 1]})={m_pos[i + 1]:.6g} < m({n[i]})={m_pos[i]:.6g}")
        )
    for i in np.flatnonzero((m_pos <= spec.m0) | (m_pos >= spec.m1)):
        report.violations.append(
            Violation("M3", int(n[i]), f"m({n[i]})={m_pos[i]:.6g} outside ({spec.m0}, {spec.m1})")
        )
    return report
