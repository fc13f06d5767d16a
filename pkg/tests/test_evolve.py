import math

import numpy as np
import pytest

from torusbif.errors import BlowupDetected
from torusbif.evolve import ComplexField, conserved_quantities, evolve, suggested_dt, traveling_wave_check
from torusbif.field import CosineField
from torusbif.multiplier import MultiplierSpec
from torusbif.oracle import bo_positive

BO = MultiplierSpec.fractional(0.5)


def test_conserved_examples():
    q = conserved_quantities(ComplexField.from_cosine(CosineField.mode(1, 4)))
    assert q.mass == 0.0 and q.momentum == pytest.approx(math.pi)
    q = conserved_quantities(ComplexField.from_cosine(CosineField.constant(2.0, 4)))
    assert q.mass == pytest.approx(4 * math.pi) and q.momentum == pytest.approx(8 * math.pi)


def test_complex_field_values_and_shift():
    u = CosineField([0.5, 1.0, -0.25])
    c = ComplexField.from_cosine(u)
    x = 2 * np.pi * np.arange(64) / 64
    np.testing.assert_allclose(c.values(64), u(x), atol=1e-14)
    np.testing.assert_allclose(c.shifted(0.3).values(64), u(x + 0.3), atol=1e-14)
    assert c.full().size == 2 * c.N + 1


def test_constant_is_stationary():
    u0 = ComplexField.from_cosine(CosineField.constant(1.3, 16))
    uT = evolve(BO, u0, 0.01, 1.0)
    np.testing.assert_allclose(uT.c, u0.c, atol=1e-14)


def test_zero_wave_has_zero_deviation():
    rep = traveling_wave_check(BO, CosineField.zeros(16), 1.0, 1.0, dt=0.01)
    assert rep.max_deviation == 0.0


def test_traveling_waves():
    rep = traveling_wave_check(BO, bo_positive(1, 2.0, "+", 256), 2.0, 1.0)
    assert rep.max_deviation < 1e-4
    assert rep.mass_drift == 0.0
    assert rep.momentum_drift < 1e-8
    rep = traveling_wave_check(BO, bo_positive(2, 3.0, "+", 256), 3.0, 0.5)
    assert rep.max_deviation < 1e-4


def test_callback_and_step_count():
    seen = []
    u0 = ComplexField.from_cosine(CosineField.mode(1, 8, 0.1))
    evolve(BO, u0, 0.03, 0.3, callback=lambda t, s: seen.append(t), snapshot_every=5)
    np.testing.assert_allclose(seen, [0.0, 0.15, 0.3])


def test_blowup_detected():
    u0 = ComplexField.from_cosine(CosineField.mode(1, 32, 50.0))
    with pytest.raises(BlowupDetected):
        evolve(BO, u0, 0.5, 50.0)


def test_suggested_dt_shrinks_with_amplitude():
    a = suggested_dt(ComplexField.from_cosine(CosineField.mode(1, 32, 1.0)))
    b = suggested_dt(ComplexField.from_cosine(CosineField.mode(1, 32, 10.0)))
    assert b == pytest.approx(a / 10)


def test_fourth_order():
    phi = bo_positive(1, 2.0, "+", 64)
    devs = [traveling_wave_check(BO, phi, 2.0, 1.0, dt=dt).max_deviation for dt in (0.005, 0.0025)]
    assert 3.5 <= math.log2(devs[0] / devs[1]) <= 4.5


def test_bad_arguments():
    u0 = ComplexField.from_cosine(CosineField.mode(1, 4))
    with pytest.raises(ValueError):
        evolve(BO, u0, 0.0, 1.0)
    with pytest.raises(ValueError):
        ComplexField(np.array([1.0]))
