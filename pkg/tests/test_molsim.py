import random
import warnings
from fractions import Fraction as F

import pytest

from rkpos.errors import InputError, LimiterContractError, PreconditionError
from rkpos.molsim import (LIMITERS, SemiDiscreteProblem, advection,
                          conservation_law, constant_q, erk_step, heat_q,
                          koren, max_step, mc, minmod, psi, q_advection, run,
                          scripted, tau0)
from rkpos.polygen import centered, generate, heat, upwind
from rkpos.tableau import erk22, erk33_case1, erk33_case2, forward_euler, rk4_classical


def test_psi_values():
    assert psi(minmod, F(1, 2)) == (F(1, 2), F(1))
    assert psi(koren, F(2)) == (F(2, 3), F(1, 3))
    assert psi(mc, F(-1)) == (F(0), F(0))
    assert psi(minmod, F(3)) == (F(1), F(1, 3))
    assert psi(mc, F(1, 4)) == (F(1, 2), F(2))
    assert psi(koren, F(0)) == (F(0), F(1))


def test_limiter_bounds_hold_on_samples():
    rng = random.Random(9)
    for lim in (minmod, koren, mc):
        for _ in range(200):
            theta = F(rng.randint(-40, 40), rng.randint(1, 8))
            val, ratio = psi(lim, theta)
            assert 0 <= val <= 1 if lim is not mc else 0 <= val <= 2
            assert 0 <= ratio <= lim.mu


def test_q_advection_constant_state():
    u = tuple(F(2) for _ in range(5))
    q = q_advection(u, F(0), lambda t: F(3), minmod)
    assert all(val == 3 for val in q)


def test_q_advection_peak():
    u = (F(0), F(1), F(0), F(0))
    q = q_advection(u, F(0), lambda t: F(1), minmod)
    assert q[1] == 1  # psi = 0 on both sides of the extremum


def test_q_advection_bound():
    rng = random.Random(12)
    for lim in (minmod, koren):
        for _ in range(50):
            u = tuple(F(rng.randint(0, 8), rng.randint(1, 4)) for _ in range(7))
            q = q_advection(u, F(0), lambda t: F(2), lim)
            assert all(0 <= val <= (lim.mu + 1) * 2 for val in q)


def test_mc_can_violate_the_contract():
    # the MC limiter admits psi up to 2, so 1 - psi + ratio can go negative
    with pytest.raises(LimiterContractError):
        for _ in range(1):
            u = (F(0), F(1), F(3), F(4), F(4), F(0))
            q_advection(u, F(0), lambda t: F(1), mc)


def test_forward_euler_pure_shift():
    p = SemiDiscreteProblem(4, F(1), upwind, constant_q(F(1)), (F(0), F(1), F(0), F(0)))
    trace = erk_step(p, forward_euler(), F(1), p.u0)
    assert trace.u_next == (F(0), F(0), F(1), F(0))


def test_erk22_constant_q_matches_polynomials():
    t = erk22(F(1))
    ps = generate(t, upwind)
    point = {v: F(1) for v in ps.vars}
    vals = {i: ps.polys[i].eval(point) for i in ps.offsets}
    assert (vals[0], vals[1], vals[2]) == (F(1, 2), F(0), F(1, 2))
    u0 = (F(0), F(1), F(0), F(0))
    p = SemiDiscreteProblem(4, F(1), upwind, constant_q(F(1)), u0)
    trace = erk_step(p, t, F(1), u0)
    for k in range(4):
        assert trace.u_next[k] == sum(
            vals[i] * u0[(k - i) % 4] for i in ps.offsets)


@pytest.mark.parametrize("t", [forward_euler(), erk22(F(3, 4)),
                               erk33_case1(F(1, 2), F(3, 4)), rk4_classical()],
                         ids=lambda t: t.name)
@pytest.mark.parametrize("stencil", [upwind, centered, heat],
                         ids=lambda s: s.name)
def test_polynomial_simulator_agreement(t, stencil):
    rng = random.Random(hash((t.name, stencil.name)) & 0xFFFF)
    n = 9
    ps = generate(t, stencil)
    u0 = tuple(F(rng.randint(0, 9), rng.randint(1, 3)) for _ in range(n))
    table = {}
    for k in range(n):
        for cj in set(t.c):
            table[(k, F(cj) * F(1, 2))] = F(rng.randint(0, 5), rng.randint(1, 4))
    sq = scripted(type("S", (), {"value": staticmethod(
        lambda k, tm: table.get((k, F(tm)), F(0)))})())
    dt, dx = F(1, 2), F(1)
    p = SemiDiscreteProblem(n, dx, stencil, sq, u0)
    trace = erk_step(p, t, dt, u0)
    for k in range(n):
        point = {
            v: dt * table.get(((k + v.offset) % n, F(t.c[v.stage - 1]) * dt), F(0))
            / dx ** stencil.dx_power
            for v in ps.vars
        }
        expect = sum((ps.polys[i].eval(point) * u0[(k - i) % n]
                      for i in ps.offsets), F(0))
        assert trace.u_next[k] == expect


def test_tau0_advection_example():
    p = SemiDiscreteProblem(100, F(1, 100), upwind, advection(F(1), minmod),
                            tuple(F(0) for _ in range(100)))
    assert tau0(p) == F(1, 200)


def test_tau0_burgers_example():
    n, dx = 10, F(1, 10)
    u0 = tuple(F(k % 2) for k in range(n))  # values in [0, 1]
    p = SemiDiscreteProblem(n, dx, upwind,
                            conservation_law(lambda u: u * u / 2, lambda u: u, mc),
                            u0)
    assert tau0(p) == dx / 3


def test_tau0_scripted_needs_bound():
    p = SemiDiscreteProblem(4, F(1), upwind, scripted({}), (F(1),) * 4)
    with pytest.raises(InputError):
        tau0(p)
    assert tau0(p, q_bound=F(2)) == F(1, 2)


def test_tau0_heat_uses_dx_squared():
    p = SemiDiscreteProblem(4, F(1, 10), heat, heat_q([F(2)] * 4), (F(1),) * 4)
    assert tau0(p) == F(1, 100) / 2


def test_max_step_zero_gamma_refuses():
    p = SemiDiscreteProblem(4, F(1), upwind, advection(F(1), minmod), (F(1),) * 4)
    assert max_step(F(0), p) == 0
    with pytest.raises(PreconditionError):
        run(p, forward_euler(), F(0), 5)


def test_interval_invariance_rational():
    rng = random.Random(21)
    for lim in (minmod, koren):
        for t, gamma in ((erk22(F(1)), F(1)), (erk33_case2(F(9, 16)), F(1))):
            n = 8
            u0 = tuple(F(rng.randint(0, 12), 12) for _ in range(n))
            p = SemiDiscreteProblem(n, F(1, n), upwind, advection(F(1), lim), u0)
            rep = run(p, t, max_step(gamma, p), 12)
            assert rep.first_violation is None
            lo, hi = min(u0), max(u0)
            assert all(lo <= v <= hi for v in rep.final_state)


def test_tv_nonincreasing_minmod_forward_euler():
    rng = random.Random(33)
    n = 10
    u0 = tuple(F(rng.randint(0, 10), 10) for _ in range(n))
    p = SemiDiscreteProblem(n, F(1, n), upwind, advection(F(1), minmod), u0)
    rep = run(p, forward_euler(), tau0(p), 20)
    tvs = rep.tvs
    assert all(tvs[i + 1] <= tvs[i] for i in range(len(tvs) - 1))


def test_float_mode_runs():
    n = 16
    u0 = tuple(float(k % 3) / 2 for k in range(n))
    p = SemiDiscreteProblem(n, 1.0 / n, upwind, advection(1.0, minmod), u0)
    rep = run(p, erk22(F(1)), float(max_step(F(1), p)), 50, mode="float")
    assert rep.mode == "float"
    assert rep.first_violation is None


def test_rational_overflow_switches_to_float():
    # an irrational-ish dt makes denominators explode quickly
    n = 6
    u0 = tuple(F(k % 2, 3) for k in range(n))
    p = SemiDiscreteProblem(n, F(1, n), upwind, advection(F(1), minmod), u0)
    dt = F(123456789, 987654321000)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = run(p, erk22(F(1)), dt, 200)
    if rep.mode == "float":
        assert any(issubclass(w.category, RuntimeWarning) for w in caught)


def test_scripted_negative_q_rejected():
    p = SemiDiscreteProblem(3, F(1), upwind, scripted({(0, F(0)): F(-1)}),
                            (F(1),) * 3)
    with pytest.raises(InputError):
        erk_step(p, forward_euler(), F(1), p.u0)


def test_limiters_registry():
    assert set(LIMITERS) == {"minmod", "koren", "mc"}
    assert LIMITERS["minmod"].mu == 1 and LIMITERS["mc"].mu == 2
