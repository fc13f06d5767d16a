import numpy as np
import pytest

from torusbif.continuation import (
    Branch,
    BranchPoint,
    ContinuationConfig,
    branch_switch,
    constant_point,
    constant_solution,
    continue_branch,
    detect_events,
    scale_T_k,
    symmetry_T,
    symmetry_T_branch,
    trivial_point,
)
from torusbif.errors import InvalidSpec, TruncationOverflow, UnsupportedMultiplier, UnsupportedP, ZeroLambda
from torusbif.field import CosineField, linf_norm
from torusbif.multiplier import MultiplierSpec
from torusbif.operator import ProblemSpec
from torusbif.oracle import bo_negative, bo_positive

BO = MultiplierSpec.fractional(0.5)


@pytest.fixture(scope="module")
def bo_branch():
    ps = ProblemSpec(BO, 2.0, 128)
    cfg = ContinuationConfig(target_lambda=3.0, newton_tol=1e-12)
    start = branch_switch(ps, 1, 0.2, cfg)
    return continue_branch(ps, start, 1, cfg, origin="trivial_mode:1")


def test_constant_solution_examples():
    assert constant_solution(2.0, 3.0, 4).a[0] == -3.0
    assert constant_solution(2.0, -3.0, 4).a[0] == 3.0
    assert constant_solution(3.0, 4.0, 4).a[0] == pytest.approx(-2.0)
    with pytest.raises(ZeroLambda):
        constant_solution(2.0, 0.0)


def test_branch_switch_matches_closed_form():
    ps = ProblemSpec(BO, 2.0, 128)
    pt = branch_switch(ps, 1, 0.2)
    assert pt.lam == pytest.approx(1.02, abs=2e-3)
    # a_1 = 0.2 > 0 is the '-' member of the closed-form family
    assert linf_norm(pt.u - bo_positive(1, pt.lam, "-", 128)) < 1e-6
    assert pt.residual < 1e-10


def test_branch_switch_signs_are_translates():
    ps = ProblemSpec(BO, 2.0, 64)
    k = 2
    up, um = branch_switch(ps, k, 0.2), branch_switch(ps, k, -0.2)
    assert up.lam == pytest.approx(um.lam, abs=1e-12)
    x = np.linspace(0, 2 * np.pi, 61)
    np.testing.assert_allclose(up.u(x + np.pi / k), um.u(x), atol=1e-10)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_branch_switch_has_2k_zeros(k):
    ps = ProblemSpec(MultiplierSpec.fractional(0.75), 2.0, 64)
    pt = branch_switch(ps, k, 0.2)
    assert int(np.argmax(np.abs(pt.u.a[1:]))) + 1 == k
    x = np.linspace(0, 2 * np.pi, 4001)[:-1]
    v = pt.u(x + 1e-3)  # avoid starting exactly on a zero
    assert int(np.count_nonzero(np.sign(v) != np.sign(np.roll(v, 1)))) == 2 * k


def test_branch_switch_p3():
    ps = ProblemSpec(BO, 3.0, 32)
    pt = branch_switch(ps, 1, 0.05)
    assert pt.residual < 1e-10 and pt.u.a[1] == pytest.approx(0.05)


def test_continuation_follows_closed_form(bo_branch):
    assert bo_branch.status == "complete"
    assert bo_branch.points[-1].lam == pytest.approx(3.0, abs=1e-12)
    assert np.all(np.diff(bo_branch.lambdas) > 0)
    for pt in bo_branch.points:
        assert pt.residual < 1e-8
        assert linf_norm(pt.u - bo_positive(1, pt.lam, "-", 128)) < 1e-6


def test_no_folds_on_closed_form_branch(bo_branch):
    assert [e for e in detect_events(bo_branch) if e.type == "Fold"] == []


def test_constant_branch_stays_constant():
    ps = ProblemSpec(BO, 2.0, 16)
    br = continue_branch(ps, constant_point(ps, 0.5), 1, ContinuationConfig(target_lambda=5.0))
    assert br.points[-1].lam == pytest.approx(5.0)
    for pt in br.points:
        np.testing.assert_allclose(pt.u.a, CosineField.constant(-pt.lam, 16).a, atol=1e-10)


def test_events_on_trivial_branch():
    ps = ProblemSpec(BO, 2.0, 16)
    br = continue_branch(ps, trivial_point(ps, 0.5), 1, ContinuationConfig(target_lambda=3.5))
    found = [e.lam for e in detect_events(br) if e.type == "BranchPoint"]
    np.testing.assert_allclose(found, [1, 2, 3], atol=1e-7)


def test_events_on_constant_branch():
    ps = ProblemSpec(BO, 2.0, 16)
    br = continue_branch(ps, constant_point(ps, -0.5), -1, ContinuationConfig(target_lambda=-3.5))
    found = [e.lam for e in detect_events(br) if e.type == "BranchPoint"]
    np.testing.assert_allclose(found, [-1, -2, -3], atol=1e-7)


def test_events_for_ilw():
    ps = ProblemSpec(MultiplierSpec.ilw(1.0), 2.0, 16)
    br = continue_branch(ps, trivial_point(ps, 0.1), 1, ContinuationConfig(target_lambda=0.6))
    found = [e.lam for e in detect_events(br) if e.type == "BranchPoint"]
    np.testing.assert_allclose(found, [1 / np.tanh(1.0) - 1.0], atol=1e-7)


def test_fold_is_found():
    # m(2) < 3 m(1) / 4 makes the k=1 pitchfork subcritical; it turns back at a fold
    table = [0.0, 1.0, 0.6] + [1.0] * 14
    ps = ProblemSpec(MultiplierSpec.from_table(table, m0=0.1, m1=3.0), 2.0, 16)
    cfg = ContinuationConfig(max_steps=25, ds_max=0.1, check_bounds=False)
    br = continue_branch(ps, branch_switch(ps, 1, 0.1), -1, cfg)
    folds = [e for e in detect_events(br) if e.type == "Fold"]
    assert len(folds) == 1
    lam_min = float(br.lambdas.min())
    assert lam_min - 1e-3 < folds[0].lam <= lam_min + 1e-12
    assert folds[0].min_sv < 1e-6


def test_json_round_trip(bo_branch, tmp_path):
    path = tmp_path / "b.json"
    path.write_text(bo_branch.dumps())
    back = Branch.loads(path.read_text())
    assert back.problem == bo_branch.problem and back.origin == bo_branch.origin
    assert len(back) == len(bo_branch)
    for a, b in zip(back.points, bo_branch.points):
        assert a.lam == b.lam and np.array_equal(a.u.a, b.u.a)
        assert a.det_sign == b.det_sign and a.min_sv == b.min_sv
    assert back.to_csv() == bo_branch.to_csv()


def test_csv_header(bo_branch):
    lines = bo_branch.to_csv().splitlines()
    assert lines[0] == "lambda,l2,h2s,linf,residual,min_sv"
    assert len(lines) == len(bo_branch) + 1


def test_symmetry_T_examples():
    ps = ProblemSpec(BO, 2.0, 128)
    pt = BranchPoint.evaluate(ps, -2.0, bo_negative(-2.0, "+", 128))
    img = symmetry_T(pt, ps)
    assert img.lam == 2.0
    assert np.max(np.abs(img.u.a - bo_positive(1, 2.0, "+", 128).a)) < 1e-12
    back = symmetry_T(img, ps)
    assert back.lam == -2.0 and np.max(np.abs(back.u.a - pt.u.a)) < 1e-15
    c = symmetry_T(constant_point(ps, -3.0), ps)
    assert c.lam == 3.0 and np.max(np.abs(c.u.a)) < 1e-15


def test_symmetry_T_needs_p2():
    ps = ProblemSpec(BO, 3.0, 8)
    with pytest.raises(UnsupportedP):
        symmetry_T(trivial_point(ps, 1.0), ps)


def test_symmetry_T_branch_residuals(bo_branch):
    img = symmetry_T_branch(bo_branch)
    assert all(pt.residual < 1e-8 for pt in img.points)
    assert np.all(img.lambdas < -1)


def test_scale_T_k_examples():
    ps = ProblemSpec(BO, 2.0, 128)
    pt = BranchPoint.evaluate(ps, 1.5, bo_positive(1, 1.5, "+", 128))
    img = scale_T_k(pt, ps, 2)
    assert img.lam == 3.0 and img.u.N == 256
    assert np.max(np.abs(img.u.a - bo_positive(2, 3.0, "+", 256).a)) < 1e-12
    same = scale_T_k(pt, ps, 1)
    assert same.lam == pt.lam and np.array_equal(same.u.a, pt.u.a)
    ps_s = ProblemSpec(MultiplierSpec.fractional(0.75), 2.0, 8)
    z = scale_T_k(trivial_point(ps_s, 0.7), ps_s, 3)
    assert z.lam == pytest.approx(3**1.5 * 0.7) and not np.any(z.u.a)


def test_scale_T_k_errors():
    ps = ProblemSpec(MultiplierSpec.ilw(1.0), 2.0, 8)
    with pytest.raises(UnsupportedMultiplier):
        scale_T_k(trivial_point(ps, 0.5), ps, 2)
    ps = ProblemSpec(BO, 2.0, 8)
    with pytest.raises(TruncationOverflow):
        scale_T_k(trivial_point(ps, 0.5), ps, 4, n_max=16)


def test_config_validation():
    with pytest.raises(InvalidSpec):
        ContinuationConfig(ds0=1.0, ds_max=0.5)
