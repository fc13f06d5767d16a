import math

import numpy as np
import pytest

from torusbif.errors import UnsupportedP
from torusbif.field import apply_L, l2_norm, nonlinearity, CosineField
from torusbif.multiplier import MultiplierSpec
from torusbif.operator import ProblemSpec
from torusbif.spectrum import (
    bifurcation_direction,
    constant_branch_spectrum,
    corrector_phi,
    local_predictor,
    transversality_check,
    trivial_spectrum,
)

BO = MultiplierSpec.fractional(0.5)
ILW_SIGMA1 = 1 / math.tanh(1.0) - 1.0


def test_trivial_spectrum_examples():
    assert [e.sigma for e in trivial_spectrum(BO, 4)] == [0, 1, 2, 3, 4]
    assert [e.sigma for e in trivial_spectrum(MultiplierSpec.fractional(1.0), 3)] == [0, 1, 4, 9]
    ilw = trivial_spectrum(MultiplierSpec.ilw(1.0), 1)
    assert ilw[1].sigma == pytest.approx(ILW_SIGMA1, rel=1e-14)
    assert ilw[1].sigma == pytest.approx(0.3130, abs=1e-4)
    assert all(e.chi == 1 for e in ilw)


def test_constant_branch_spectrum_examples():
    assert constant_branch_spectrum(BO, 2.0, 3) == [0, -1, -2, -3]
    assert constant_branch_spectrum(BO, 3.0, 2)[2] == -1.0
    ilw = constant_branch_spectrum(MultiplierSpec.ilw(1.0), 2.0, 1)
    assert ilw[1] == pytest.approx(-ILW_SIGMA1, rel=1e-14)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_transversality_is_minus_pi(k):
    for spec in (BO, MultiplierSpec.ilw(0.5), MultiplierSpec.fractional(1.25)):
        t = transversality_check(ProblemSpec(spec, 2.0, 12), k)
        assert t.projection == pytest.approx(-math.pi, rel=1e-13)
        assert t.passes


@pytest.mark.parametrize(
    "s,k,expected",
    [(0.5, 1, 1.0), (0.5, 2, 0.5), (1.0, 1, 5.0 / 3.0)],
)
def test_bifurcation_direction_examples(s, k, expected):
    d = bifurcation_direction(MultiplierSpec.fractional(s), k)
    assert d.lambda_dot == 0.0
    assert d.lambda_ddot == pytest.approx(expected, rel=1e-14)


def test_direction_needs_p2():
    with pytest.raises(UnsupportedP):
        bifurcation_direction(BO, 1, p=3.0)


def test_corrector_examples():
    np.testing.assert_allclose(corrector_phi(BO, 1).a, [-1, 0, 1], atol=1e-15)
    np.testing.assert_allclose(corrector_phi(MultiplierSpec.fractional(1.0), 1).a, [-1, 0, 1 / 3], atol=1e-15)


@pytest.mark.parametrize("spec", [BO, MultiplierSpec.ilw(1.0), MultiplierSpec.fractional(0.8)])
def test_corrector_solves_its_equation(spec):
    k = 2
    phi = corrector_phi(spec, k, N=10)
    sk = float(apply_L(spec, CosineField.mode(k, 10)).a[k])
    rhs = nonlinearity(CosineField.mode(k, 10), 2.0) * 2.0
    assert l2_norm(apply_L(spec, phi) - phi * sk - rhs) < 1e-12
    assert phi.a[k] == 0.0


def test_local_predictor_examples():
    lam, u = local_predictor(BO, 1, 0.2)
    assert lam == pytest.approx(1.02)
    np.testing.assert_allclose(u.a, [-0.02, 0.2, 0.02], atol=1e-16)
    lam0, u0 = local_predictor(BO, 1, 0.0)
    assert lam0 == 1.0 and not np.any(u0.a)
    lam_m, _ = local_predictor(BO, 1, -0.2)
    assert lam_m == lam
