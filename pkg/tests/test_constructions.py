import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epdt import constructions as cons
from epdt.errors import NegativeDiscriminant, SignConditionViolated
from epdt.exponents import ModelParams

K_HALF_1 = math.sqrt(math.pi / 2) * math.exp(-1)  # K_{1/2}(1)
K0_1, K1_1, K0_2 = 0.421024438240708333, 0.601907230197234575, 0.113893872749533436
BUMP_INTEGRAL = 1.20690032243787617534  # int_{-1}^{1} exp(1 - 1/(1 - x^2)) dx, mpmath
BUMP_PHI_INTEGRAL = 2.61003470660689676415  # same with weight e^x + e^-x
K_THREE_HALVES_1 = 0.922137008895789116880


def ctx_for(**kw):
    return cons.TestFunctionContext(ModelParams(**kw))


def sphere_oracle(n, r):
    """Integral of exp(x . omega) over the unit sphere at |x| = r by direct quadrature."""
    if n == 2:
        theta = np.linspace(0.0, 2 * np.pi, 2001)[:-1]
        return float(np.exp(r * np.cos(theta)).sum() * (2 * np.pi / theta.size))
    if n == 3:
        u, w = np.polynomial.legendre.leggauss(60)
        return float(2 * np.pi * np.sum(w * np.exp(r * u)))
    raise ValueError(n)


# --- eigenfunction ------------------------------------------------------------------


def test_eigenfunction_examples():
    assert cons.eigenfunction_phi(1, 0.0) == pytest.approx(2.0, rel=1e-15)
    assert cons.eigenfunction_phi(3, 1.0) == pytest.approx(4 * math.pi * math.sinh(1.0), rel=1e-12)
    assert cons.eigenfunction_phi(2, 0.0) == pytest.approx(2 * math.pi, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("r", [0.0, 0.3, 1.0, 4.0, 12.0])
def test_eigenfunction_matches_sphere_quadrature(n, r):
    assert cons.eigenfunction_phi(n, r) == pytest.approx(sphere_oracle(n, r), rel=1e-8)


def test_laplacian_of_eigenfunction_line():
    h = 1e-3
    for r in np.linspace(-5, 5, 21):
        phi = lambda x: cons.eigenfunction_phi(1, x)
        d2 = (phi(r + h) - 2 * phi(r) + phi(r - h)) / h**2
        assert d2 == pytest.approx(phi(r), rel=1e-6)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_laplacian_of_eigenfunction_radial(n):
    h = 1e-3
    phi = lambda x: cons.eigenfunction_phi(n, x)
    for r in np.linspace(0.5, 10, 20):
        d2 = (phi(r + h) - 2 * phi(r) + phi(r - h)) / h**2
        d1 = (phi(r + h) - phi(r - h)) / (2 * h)
        assert d2 + (n - 1) / r * d1 == pytest.approx(phi(r), rel=1e-5)


def _asymptotic_ratio_change(n):
    ratio = lambda r: cons.eigenfunction_phi(n, r) * r ** ((n - 1) / 2) * math.exp(-r)
    return abs(ratio(40.0) / ratio(30.0) - 1.0)


@pytest.mark.parametrize("n", [1, 3])
def test_eigenfunction_asymptotic_ratio_settles(n):
    assert _asymptotic_ratio_change(n) < 1e-3


@pytest.mark.xfail(strict=True, reason="for n = 2 the 1/(8r) correction alone moves the ratio by ~1.04e-3 between r = 30 and 40")
def test_eigenfunction_asymptotic_ratio_settles_plane():
    assert _asymptotic_ratio_change(2) < 1e-3


def test_eigenfunction_plane_ratio_change_is_analytic():
    # r^(1/2) e^-r I_0(r) = (2 pi)^(-1/2) (1 + 1/(8r) + 9/(128 r^2) + ...)
    series = lambda r: 1 + 1 / (8 * r) + 9 / (128 * r**2) + 225 / (3072 * r**3)
    expected = abs(series(40.0) / series(30.0) - 1)
    assert _asymptotic_ratio_change(2) == pytest.approx(expected, rel=1e-3)


# --- rho, rho', psi -----------------------------------------------------------------


def test_rho_examples():
    ctx = ctx_for(ell=0, mu=2, nu2=0)
    assert cons.rho(ctx, 1.0) == pytest.approx(K_HALF_1, rel=1e-10)
    for s in [1.0, 2.5, 7.0, 40.0]:
        assert cons.rho(ctx, s) == pytest.approx(math.sqrt(math.pi / 2) * s * math.exp(-s), rel=1e-10)
    assert cons.rho(ctx_for(ell=0, mu=3, nu2=1), 2.0) == pytest.approx(4 * K0_2, rel=1e-10)


def test_log_rho_far_past_underflow():
    ctx = ctx_for(ell=0, mu=2, nu2=0)
    s = 900.0
    assert cons.log_rho(ctx, s) == pytest.approx(0.5 * math.log(math.pi / 2) + math.log(s) - s, rel=1e-12)


def test_rho_prime_examples():
    assert cons.rho_prime(ctx_for(ell=0, mu=2, nu2=0), 1.0) == pytest.approx(0.0, abs=1e-12)
    assert cons.rho_prime(ctx_for(ell=0, mu=3, nu2=1), 1.0) == pytest.approx(-K1_1 + 2 * K0_1, rel=1e-9)


@pytest.mark.parametrize("s", [1.5, 3.0, 10.0])
def test_rho_prime_matches_difference(s):
    ctx = ctx_for(ell=1, mu=2, nu2=0)
    h = 1e-6
    fd = (cons.rho(ctx, s + h) - cons.rho(ctx, s - h)) / (2 * h)
    assert cons.rho_prime(ctx, s) == pytest.approx(fd, rel=1e-5)


def test_psi_examples():
    assert cons.psi(ctx_for(n=1, ell=0, mu=2, nu2=0), 1.0, 0.0) == pytest.approx(2 * K_HALF_1, rel=1e-10)
    expected = K_HALF_1 * 4 * math.pi * math.sinh(1.0)
    assert cons.psi(ctx_for(n=3, ell=0, mu=2, nu2=0), 1.0, 1.0) == pytest.approx(expected, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 3), st.floats(-0.9, 2.0), st.floats(0.0, 4.0), st.floats(0, 1),
    st.floats(1.0, 30.0), st.floats(0.0, 30.0),
)
def test_rho_and_psi_positive(n, ell, mu, frac, s, r):
    ctx = ctx_for(n=n, ell=ell, mu=mu, nu2=frac * (mu - 1) ** 2 / 4)
    assert math.isfinite(cons.log_rho(ctx, s))
    assert cons.rho(ctx, s) >= 0
    assert cons.psi(ctx, s, r) >= 0


def test_negative_delta_rejected():
    with pytest.raises(NegativeDiscriminant):
        ctx_for(mu=0, nu2=1)


# --- residual checks ----------------------------------------------------------------


def test_rho_ode_closed_form_case():
    assert cons.check_rho_ode(ctx_for(ell=0, mu=2, nu2=0)) <= 1e-6


@pytest.mark.parametrize("kw", [dict(ell=0, mu=3, nu2=1), dict(ell=1, mu=2, nu2=0), dict(ell=-2 / 3, mu=2, nu2=0),
                                dict(ell=-0.5, mu=0, nu2=0), dict(ell=0.5, mu=4, nu2=1)])
def test_rho_ode_generic(kw):
    assert cons.check_rho_ode(ctx_for(**kw)) <= 1e-4


@pytest.mark.parametrize("kw", [dict(ell=0, mu=3, nu2=1), dict(ell=-2 / 3, mu=2, nu2=0), dict(ell=0, mu=2, nu2=0)])
def test_rho_ode_far_range(kw):
    # for ell <= 0 the h^2 truncation stays small out to s = 50
    assert cons.check_rho_ode(ctx_for(**kw), s_samples=np.linspace(1, 50, 50)) <= 1e-4


@pytest.mark.parametrize("order", [0.0, 2.5])
def test_eta_equation(order):
    assert cons.check_eta_equation(order) <= 1e-4


def test_eta_equation_half_order():
    # closed-form order; on [1, 20] only the h^2 truncation of the differences remains
    assert cons.check_eta_equation(0.5, np.linspace(1.0, 20.0, 39)) <= 1e-6


@pytest.mark.parametrize("kw", [dict(n=1, ell=0, mu=2, nu2=0), dict(n=3, ell=-2 / 3, mu=2, nu2=0),
                                dict(n=3, ell=0, mu=3, nu2=1), dict(n=2, ell=1, mu=0.5, nu2=0)])
def test_adjoint_pde(kw):
    ctx = ctx_for(**kw)
    assert cons.check_adjoint_pde(ctx) <= 1e-4


def test_adjoint_pde_with_finite_difference_laplacian():
    ctx = ctx_for(n=3, ell=0, mu=2, nu2=0)
    fn = lambda s, r: float(cons.psi(ctx, s, r))
    assert cons.check_adjoint_pde(ctx, s_grid=np.linspace(1, 5, 5), r_grid=np.linspace(0, 4, 9), psi_fn=fn) <= 1e-4


def test_adjoint_pde_zero_function():
    ctx = ctx_for(n=1)
    assert cons.check_adjoint_pde(ctx, psi_fn=lambda s, r: 0.0) == 0.0


def test_checks_detect_wrong_order():
    ctx = cons.TestFunctionContext(ModelParams(), order_shift=1e-2)
    assert cons.check_rho_ode(ctx) > 1e-4
    assert cons.check_adjoint_pde(ctx) > 1e-4


# --- T0 -----------------------------------------------------------------------------


def test_T0_closed_form_case():
    ctx = ctx_for(ell=0, mu=2, nu2=0)
    assert ctx.T0 == pytest.approx(1.01)
    assert ctx.T1 == 2 * ctx.T0


def test_T0_double_root_case():
    ctx = ctx_for(ell=0, mu=3, nu2=1)
    assert ctx.T0 == pytest.approx(1.01)  # regression constant of the scan
    for s in np.linspace(ctx.T0, 10 * ctx.T0, 200):
        assert min(cons.log_band_margins(ctx, s)) >= 0


@pytest.mark.parametrize("kw", [dict(ell=1, mu=2, nu2=0), dict(ell=-2 / 3, mu=2, nu2=0), dict(n=3, ell=0, mu=0, nu2=0)])
def test_T0_finite(kw):
    ctx = ctx_for(**kw)
    assert 1 < ctx.T0 < 1e4
    assert ctx.T1 == 2 * ctx.T0


# --- data ---------------------------------------------------------------------------


def test_make_bump():
    assert cons.make_bump(2.0, 3.0, 0.0) == pytest.approx(3.0)
    assert np.all(cons.make_bump(2.0, 3.0, np.array([2.0, 2.5, -7.0])) == 0)
    assert cons.make_bump(2.0, 3.0, 2.0 / math.sqrt(2)) == pytest.approx(3.0 / math.e)


def test_data_functional_zero():
    ctx = ctx_for(n=1)
    r = np.linspace(-1, 1, 201)
    assert cons.data_functional(ctx, r, np.zeros_like(r), np.zeros_like(r), geometry="line1d") == 0.0


def test_data_functional_positive_when_coefficient_nonnegative():
    ctx = ctx_for(n=3, ell=0, mu=3, nu2=0)
    r = np.linspace(0, 1, 401)
    assert cons.data_functional(ctx, r, cons.make_bump(1, 1, r), np.zeros_like(r)) > 0


def test_data_functional_regression_value():
    ctx = ctx_for(n=1, ell=0, mu=2, nu2=0)
    x = np.linspace(-1, 1, 2001)
    u0 = cons.make_bump(1.0, 1.0 / BUMP_INTEGRAL, x)
    value = cons.data_functional(ctx, x, u0, np.zeros_like(x), geometry="line1d")
    # r1 = 0 here, so only the K_{3/2}(1) <phi, u0> term survives
    assert value == pytest.approx(K_THREE_HALVES_1 * BUMP_PHI_INTEGRAL / BUMP_INTEGRAL, rel=1e-10)


def test_sign_condition_violation():
    ctx = ctx_for(n=1, ell=0, mu=0, nu2=0)  # r1 = -1
    x = np.linspace(-1, 1, 201)
    u0 = cons.make_bump(1, 1, x)
    with pytest.raises(SignConditionViolated):
        cons.data_functional(ctx, x, u0, np.zeros_like(x), geometry="line1d")
    assert cons.data_functional(ctx, x, u0, u0, geometry="line1d") > 0


def test_initial_data_sampling():
    data = cons.InitialData(amplitude0=2.0, amplitude1=0.5, R=1.5)
    u0, u1 = data.sample(np.array([0.0, 1.6]))
    assert u0.tolist() == [2.0, 0.0] and u1.tolist() == [0.5, 0.0]
    with pytest.raises(ValueError):
        cons.InitialData(kind="gaussian")
