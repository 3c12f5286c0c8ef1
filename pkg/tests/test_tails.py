import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from tailcorrect.errors import ExpansionDomainError
from tailcorrect.tails import (ReferenceTail, ShrinkBallContext, f_tail, f_tail_expansion,
                               shrink_ball_bound, shrink_ball_K, shrink_ball_second_order, t_tail,
                               vol_unit_ball)


def test_t_tail_examples():
    assert t_tail(1, 1.0) == pytest.approx(0.25, abs=1e-15)
    for k in (1, 2, 5, 30):
        assert t_tail(k, 0.0) == 0.5
    assert t_tail(3, 10.0) == pytest.approx(0.5 * f_tail(1, 3, 100.0), rel=1e-12)


def test_t_tail_against_scipy():
    u = np.linspace(-30, 30, 121)
    for k in (1, 2, 3, 7.5, 40):
        np.testing.assert_allclose(t_tail(k, u), stats.t(k).sf(u), rtol=1e-10, atol=1e-300)


def test_t_tail_rejects_small_df():
    with pytest.raises(ValueError):
        t_tail(0.5, 1.0)


def test_f_tail_examples():
    assert f_tail(3, 4, 0.0) == 1.0
    u = np.logspace(-3, 4, 50)
    # closed-form survival of F(2, 2), its density 1/(1+u)^2 integrated independently
    np.testing.assert_allclose(f_tail(2, 2, u), 1 / (1 + u), rtol=1e-13)
    assert integrate.quad(lambda s: 1 / (1 + s) ** 2, 3.0, np.inf)[0] == pytest.approx(
        f_tail(2, 2, 3.0), rel=1e-10)
    for k in (1, 4, 9):
        assert f_tail(1, k, 2.5 ** 2) == pytest.approx(2 * t_tail(k, 2.5), rel=1e-13)
    with pytest.raises(ValueError):
        f_tail(2, 3, -1.0)


def test_f_tail_against_scipy():
    u = np.logspace(-2, 3, 40)
    for m, k in ((1, 2), (3, 5), (2, 9)):
        np.testing.assert_allclose(f_tail(m, k, u), stats.f(m, k).sf(u), rtol=1e-10)


def test_half_f_identity_grid():
    u = np.linspace(0, 40, 401)
    for k in range(1, 11):
        assert np.max(np.abs(t_tail(k, u) - 0.5 * f_tail(1, k, u * u))) < 1e-12


def test_f_tail_monotone_and_vanishing():
    u = np.concatenate([np.linspace(0, 200, 2001), [1e4, 1e6]])
    for m, k in ((1, 2), (4, 3)):
        v = f_tail(m, k, u)
        assert np.all(np.diff(v) <= 0)
        assert v[-1] < 1e-3


def test_expansion_accuracy():
    exact = 0.5 * f_tail(1, 3, 50.0 ** 2)
    assert abs(f_tail_expansion(1, 3, 2, 50.0) / exact - 1) < 1e-4
    exact = f_tail(2, 2, 100.0 ** 2)
    assert abs(f_tail_expansion(2, 2, 1, 100.0) / exact - 1) < 1e-7


def test_expansion_leading_coefficient():
    for m, k, alpha in ((1, 3, 2), (2, 5, 1), (3, 2, 1)):
        u = 1e4
        lead = 2 * (k / m) ** (k / 2) / (alpha * k * special.beta(m / 2, k / 2))
        assert f_tail(m, k, u * u) / alpha * u ** k == pytest.approx(lead, rel=1e-6)


def test_expansion_sandwich():
    for m, k, alpha in ((1, 2, 2), (1, 4, 2), (2, 3, 1), (3, 5, 1)):
        lead = 2 * (k / m) ** (k / 2) / (alpha * k * special.beta(m / 2, k / 2))
        for u in (20.0, 60.0, 200.0):
            exact = f_tail(m, k, u * u) / alpha
            one = lead * u ** -k
            two = f_tail_expansion(m, k, alpha, u)
            assert min(one, two) <= exact <= max(one, two)


def test_expansion_domain_signal():
    with pytest.raises(ExpansionDomainError):
        f_tail_expansion(1, 3, 2, 1.0)


def test_vol_unit_ball():
    assert vol_unit_ball(1) == pytest.approx(2.0, rel=1e-15)
    assert vol_unit_ball(2) == pytest.approx(math.pi)
    assert vol_unit_ball(3) == pytest.approx(4 * math.pi / 3)


def test_constants():
    assert ShrinkBallContext(2, 1, 2, 1.0).C1 == pytest.approx(math.pi)
    # (3*4/(1*5)) * 3^(3/2) / B(1/2, 3/2), with B(1/2, 3/2) = pi/2
    assert ShrinkBallContext(3, 1, 2, 1.0).C2 == pytest.approx(2.4 * 3 ** 1.5 / (math.pi / 2),
                                                               rel=1e-14)


def test_K_examples():
    assert shrink_ball_K(ShrinkBallContext(2, 1, 2, 0.0)) == 0.0
    K = shrink_ball_K(ShrinkBallContext(2, 1, 2, 1 / (2 * math.pi)))
    # F(u) for constant G over the disc of radius 1/u, divided by t_2(u), at u = 1e3
    u = 1e3
    assert K == pytest.approx((math.pi / u ** 2) / (2 * math.pi) / t_tail(2, u), rel=1e-5)
    assert shrink_ball_K(ShrinkBallContext(4, 2, 1, 0.3)) == pytest.approx(
        0.5 * shrink_ball_K(ShrinkBallContext(4, 2, 2, 0.3)))


@settings(max_examples=60, deadline=None)
@given(k=st.integers(1, 10), m=st.integers(1, 6), G0=st.floats(1e-3, 1e3))
def test_K_over_alpha_independent_of_alpha(k, m, G0):
    a = shrink_ball_K(ShrinkBallContext(k, m, 1, G0))
    b = shrink_ball_K(ShrinkBallContext(k, m, 2, G0)) / 2
    assert a == pytest.approx(b, rel=1e-13)
    assert a > 0


def test_bound_constant_G():
    for k in (2, 3):
        ctx = ShrinkBallContext(k, 1, 2, 0.7)
        K = shrink_ball_K(ctx)
        for u in (5.0, 10.0, 50.0):
            F = vol_unit_ball(k) * 0.7 * u ** -k
            resid = abs(F - K * t_tail(k, u))
            bound = shrink_ball_bound(ctx, u)
            assert bound == pytest.approx(ctx.C2 * K / 2 * u ** -(k + 2))
            assert resid <= bound


def test_second_order_constant_G_and_linearity():
    ctx = ShrinkBallContext(3, 1, 2, 0.4)
    assert shrink_ball_second_order(ctx) == pytest.approx(ctx.C2 * shrink_ball_K(ctx) / 2)
    ctx2 = ShrinkBallContext(3, 1, 2, 0.8, hess_trace=2.4)
    ctx1 = ShrinkBallContext(3, 1, 2, 0.4, hess_trace=1.2)
    assert shrink_ball_second_order(ctx2) == pytest.approx(2 * shrink_ball_second_order(ctx1))


def test_second_order_constant_G_matches_exact_residual():
    # constant G: F(u) is exact, so u^(k+2) (F - K f) must approach L
    ctx = ShrinkBallContext(2, 1, 2, 0.25)
    K = shrink_ball_K(ctx)
    u = 300.0
    F = math.pi * 0.25 * u ** -2
    assert u ** 4 * (F - K * t_tail(2, u)) == pytest.approx(shrink_ball_second_order(ctx), rel=1e-3)


def test_reference_tail():
    assert ReferenceTail("student-t", 3).alpha == 2
    assert ReferenceTail("fisher-f", 3, 2).alpha == 1
    assert ReferenceTail("fisher-f", 3, 2).survival(0.0) == 1.0
    with pytest.raises(ValueError):
        ReferenceTail("chi", 3)
