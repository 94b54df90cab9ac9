import random
from fractions import Fraction as F

from rkpos.bounds import (radius_abs_monotonicity, ssp_coefficient,
                          ssp_feasible, stability_polynomial)
from rkpos.tableau import (erk22, erk33_case1, erk33_case2, erk33_case3,
                           forward_euler, rk4_classical)


def erk22_ssp(a: F) -> F:
    if a < F(1, 2):
        return F(0)
    if a <= 1:
        return 2 - 1 / a
    return 1 / a


def case2_ssp(a: F) -> F:
    if a < F(3, 8) or a > F(3, 4):
        return F(0)
    if a <= F(9, 16):
        return F(8 * a - 3, 2)
    return 3 - 4 * a


def test_stability_polynomial_truncated_exponential():
    # order-p methods with m = p stages: phi = sum z^k / k!
    assert stability_polynomial(forward_euler()).coeffs == (F(1), F(1))
    for a in (F(1, 2), F(1), F(2)):
        assert stability_polynomial(erk22(a)).coeffs == (F(1), F(1), F(1, 2))
    assert stability_polynomial(erk33_case2(F(9, 16))).coeffs == \
        (F(1), F(1), F(1, 2), F(1, 6))
    assert stability_polynomial(rk4_classical()).coeffs == \
        (F(1), F(1), F(1, 2), F(1, 6), F(1, 24))


def test_radius_closed_values():
    assert radius_abs_monotonicity(forward_euler()).exact == 1
    assert radius_abs_monotonicity(erk22(F(1))).exact == 1
    assert radius_abs_monotonicity(erk33_case1(F(1, 2), F(3, 4))).exact == 1
    assert radius_abs_monotonicity(rk4_classical()).exact == 1


def test_radius_float_oracle():
    # float bisection on phi4 and derivatives as an independent check
    import math

    def ok(r):
        c = [1.0, 1.0, 0.5, 1 / 6, 1 / 24]
        for j in range(5):
            val = sum(c[k] * math.comb(k, j) * (-r) ** (k - j)
                      for k in range(j, 5))
            if val < -1e-12:
                return False
        return True

    lo, hi = 0.0, 4.0
    for _ in range(60):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    assert abs(lo - float(radius_abs_monotonicity(rk4_classical()).exact)) < 1e-9


def test_erk22_ssp_closed_form_25_points():
    rng = random.Random(6)
    pts = {F(1, 4), F(2, 5), F(1, 2), F(3, 4), F(1), F(5, 4), F(3, 2), F(2)}
    while len(pts) < 25:
        pts.add(F(rng.randint(1, 48), rng.randint(1, 16)))
    for a in sorted(pts):
        assert ssp_coefficient(erk22(a)).exact == erk22_ssp(a), a


def test_case2_ssp_closed_form():
    for a in (F(5, 16), F(3, 8), F(7, 16), F(1, 2), F(9, 16), F(5, 8),
              F(3, 4), F(1)):
        assert ssp_coefficient(erk33_case2(a)).exact == case2_ssp(a), a


def test_case3_and_rk4_ssp_zero():
    for a in (F(1, 2), F(1), F(2)):
        assert ssp_coefficient(erk33_case3(a)).exact == 0
    assert ssp_coefficient(rk4_classical()).exact == 0


def test_feasibility_is_monotone_below_the_coefficient():
    for t in (erk22(F(1)), erk22(F(3, 2)), erk33_case2(F(9, 16))):
        c = ssp_coefficient(t).exact
        assert c > 0
        for k in range(1, 5):
            assert ssp_feasible(t, c * F(k, 4))
        assert not ssp_feasible(t, c + F(1, 1000))
        assert not ssp_feasible(t, c * 2)


def test_ssp_below_gamma_upwind():
    from rkpos.gamma import compute_gamma
    for t in (forward_euler(), erk22(F(3, 4)), erk22(F(1)), erk22(F(5, 4)),
              erk33_case1(F(1, 2), F(3, 4)), erk33_case2(F(1, 2)),
              erk33_case2(F(9, 16)), erk33_case3(F(1)), rk4_classical()):
        c = ssp_coefficient(t)
        g = compute_gamma(t)
        cv = c.exact if c.exact is not None else c.upper
        gv = g.exact if g.exact is not None else g.lower
        assert cv <= gv or g.is_zero and cv == 0


def test_interval_width_bounded_by_tol():
    tol = F(1, 2 ** 40)
    for t in (erk22(F(7, 5)), erk33_case2(F(21, 32))):
        res = ssp_coefficient(t, tol=tol)
        if res.exact is None:
            assert res.upper - res.lower <= tol
