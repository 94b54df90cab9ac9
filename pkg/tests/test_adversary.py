from fractions import Fraction as F

import pytest

from rkpos.adversary import (ScriptedQ, first_step_counterexample,
                             negative_entry_counterexample, rk4_counterexample)
from rkpos.errors import InputError, PreconditionError
from rkpos.gamma import gamma_zero_test, subset_bits
from rkpos.polygen import generate, upwind
from rkpos.tableau import erk22, erk33_case3, forward_euler, rk4_classical


def witness_point(ps, w):
    bits = subset_bits(w.subset, len(ps.vars))
    return {v: w.delta for v, b in zip(ps.vars, bits) if b == "1"}


def test_scripted_q_rejects_negative():
    with pytest.raises(InputError):
        ScriptedQ({(0, F(0)): F(-1)})


def test_first_step_erk22_just_past_gamma():
    t = erk22(F(1))
    ps = generate(t, upwind)
    eps = F(1, 10)
    x1, x2, x3 = ps.vars
    point = {x1: F(1), x2: 1 + eps, x3: 1 + eps}
    rep = first_step_counterexample(t, (1, point))
    # 2 P_1(1, 1+e, 1+e) = -e(1+e)
    assert rep.negative_value == -eps * (1 + eps) / 2 == F(-11, 200)
    assert not rep.boundary
    assert rep.resimulate() == tuple(rep.u1)
    assert sum(rep.u0) == 1 and all(v >= 0 for v in rep.u0)


def test_first_step_case3_witness():
    t = erk33_case3(F(1))
    ps = generate(t, upwind)
    # 4 P_2(0, e, 0, 0, 0, e) = -e^2 with e = 1, but scripting activates
    # the confluent stages; the effective value stays negative
    x, y, z, u, v, w = ps.vars
    rep = first_step_counterexample(t, (2, {y: F(1), w: F(1)}))
    assert rep.negative_value == F(-1, 4)
    assert rep.resimulate() == tuple(rep.u1)


def test_first_step_confluence_can_destroy_a_witness():
    t = erk33_case3(F(1))
    ps = generate(t, upwind)
    gw = gamma_zero_test(ps)
    assert gw is not None and gw.value < 0
    with pytest.raises(PreconditionError):
        first_step_counterexample(t, (gw.offset, witness_point(ps, gw)))


def test_first_step_boundary_case():
    t = erk22(F(1))
    ps = generate(t, upwind)
    x1, x2, x3 = ps.vars
    rep = first_step_counterexample(t, (1, {x1: F(1), x2: F(1), x3: F(1)}))
    assert rep.boundary and rep.negative_index is None
    assert rep.expected_value == 0


def test_first_step_rejects_negative_xi():
    t = erk22(F(1))
    ps = generate(t, upwind)
    with pytest.raises(InputError):
        first_step_counterexample(t, (1, {ps.vars[0]: F(-1)}))


def test_negative_entry_case3_uses_the_stage_chain():
    rep = negative_entry_counterexample(erk33_case3(F(1)))
    # a31 = -1/4 relayed through b3 = 1
    assert rep.negative_value == F(-1, 4)
    assert rep.resimulate() == tuple(rep.u1)
    assert all(v >= 0 for v in rep.u0)


def test_negative_entry_negative_weight_direct():
    rep = negative_entry_counterexample(erk22(F(1, 4)))  # b1 = -1
    assert rep.negative_value < 0
    assert rep.resimulate() == tuple(rep.u1)


def test_negative_entry_various_alphas():
    for a in (F(1, 2), F(2), F(-1)):
        rep = negative_entry_counterexample(erk33_case3(a))
        assert rep.negative_value < 0
        assert rep.resimulate() == tuple(rep.u1)


def test_negative_entry_requires_a_negative_entry():
    with pytest.raises(PreconditionError):
        negative_entry_counterexample(rk4_classical())
    with pytest.raises(PreconditionError):
        negative_entry_counterexample(forward_euler())


def test_rk4_closed_form_trajectory():
    for eps in (F(1), F(1, 2), F(2), F(1, 7)):
        rep = rk4_counterexample(eps)
        assert tuple(rep.u1) == (F(1), eps / 6, (2 * eps ** 2 - eps ** 3) / 12,
                                 -eps ** 4 / 24)
        assert rep.resimulate() == tuple(rep.u1)
    assert rk4_counterexample(F(1)).negative_value == F(-1, 24)
    assert rk4_counterexample(F(1, 2)).negative_value == F(-1, 384)


def test_rk4_stage_trace_matches_construction():
    rep = rk4_counterexample(F(1))
    stages = [tuple(s) for s in rep.stages]
    assert stages[0] == (F(1), F(0), F(0), F(0))
    assert stages[1] == (F(1), F(1, 2), F(0), F(0))
    assert stages[2] == (F(1), F(0), F(1, 4), F(0))
    assert stages[3] == (F(1), F(0), F(-1, 4), F(0))


def test_rk4_requires_positive_eps():
    with pytest.raises(InputError):
        rk4_counterexample(F(0))
    with pytest.raises(InputError):
        rk4_counterexample(F(-1))
