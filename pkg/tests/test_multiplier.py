import math

import mpmath
import numpy as np
import pytest

from torusbif.errors import InvalidSpec, TableOutOfRange
from torusbif.multiplier import MultiplierSpec, operator_symbol, operator_symbols, symbol, validate


def ilw_reference(delta, n):
    # high-precision |coth(dn) - 1/(dn)|
    with mpmath.workdps(60):
        x = mpmath.mpf(delta) * n
        return float(abs(mpmath.coth(x) - 1 / x))


def test_fractional_symbol_is_one():
    assert symbol(MultiplierSpec.fractional(0.5), 7) == 1.0


def test_ilw_symbol_examples():
    spec = MultiplierSpec.ilw(1.0)
    assert symbol(spec, 0) == 0.0
    assert symbol(spec, 2) == pytest.approx(abs(1 / math.tanh(2) - 0.5), rel=1e-15)
    assert symbol(spec, 2) == pytest.approx(0.5373, abs=1e-4)


@pytest.mark.parametrize("delta", [1e-9, 1e-6, 1e-4, 3e-3, 0.0999, 0.1, 0.35, 1.0, 7.5])
def test_ilw_symbol_matches_high_precision(delta):
    n = np.array([1, 2, 3, 10, 100])
    got = symbol(MultiplierSpec.ilw(delta), n)
    want = [ilw_reference(delta, int(k)) for k in n]
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-300)


def test_ilw_tends_to_one():
    # m(n) = coth(n) - 1/n, so the gap to 1 is 1/n up to e^{-2n}
    for n in (100, 10_000, 10**8):
        m = symbol(MultiplierSpec.ilw(1.0), n)
        assert m < 1.0
        assert 1.0 - m == pytest.approx(1.0 / n, rel=1e-9)


def test_operator_symbol_examples():
    assert operator_symbol(MultiplierSpec.fractional(0.5), 3) == 3.0
    assert operator_symbol(MultiplierSpec.fractional(1.0), 2) == 4.0
    for spec in (MultiplierSpec.fractional(0.75), MultiplierSpec.ilw(2.0)):
        assert operator_symbol(spec, 0) == 0.0


def test_operator_symbols_cached_and_read_only():
    spec = MultiplierSpec.fractional(1.0)
    a = operator_symbols(spec, 5)
    np.testing.assert_array_equal(a, [0, 1, 4, 9, 16, 25])
    assert not a.flags.writeable
    assert operator_symbols(spec, 5) is a


def test_validate_fractional_clean():
    assert validate(MultiplierSpec.fractional(0.5), 100).ok


def test_validate_ilw_lower_bound():
    # m(1) = coth(1) - 1 = 0.3130...
    assert validate(MultiplierSpec.ilw(1.0, m0=0.3), 100).ok
    rep = validate(MultiplierSpec.ilw(1.0, m0=0.32), 100)
    assert not rep.ok
    assert [v.n for v in rep if v.hypothesis == "M3"] == [1]


def test_validate_table_monotonicity():
    spec = MultiplierSpec.from_table([0.0, 2.0, 1.0], m0=0.5, m1=3.0)
    rep = validate(spec, 2)
    assert any(v.n == 2 and v.hypothesis == "M2" for v in rep)


def test_table_lookup_beyond_range():
    spec = MultiplierSpec.from_table([0.0, 1.0, 1.5], m0=0.5, m1=3.0)
    assert symbol(spec, 2) == 1.5
    with pytest.raises(TableOutOfRange):
        symbol(spec, 3)


def test_bad_specs_rejected():
    with pytest.raises(InvalidSpec):
        MultiplierSpec.fractional(0.3)
    with pytest.raises(InvalidSpec):
        MultiplierSpec.ilw(-1.0)


def test_dict_round_trip():
    for spec in (
        MultiplierSpec.fractional(0.75),
        MultiplierSpec.ilw(0.4, s=1.0),
        MultiplierSpec.from_table([0, 1, 1.25], m0=0.5, m1=2.0),
    ):
        assert MultiplierSpec.from_dict(spec.to_dict()) == spec
