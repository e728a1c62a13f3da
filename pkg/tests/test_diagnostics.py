import math

import numpy as np
import pytest

from epdt import constructions as cons
from epdt.diagnostics import (
    average_U,
    average_U0,
    check_lower_bounds,
    check_ode_identity,
    nonlinear_mass,
)
from epdt.errors import InsufficientSamples
from epdt.exponents import ModelParams
from epdt.solver import SolverConfig, make_grid, run

# mpmath quadrature of exp(1 - 1/(1 - x^2)) over (-1, 1), and with weight e^x + e^-x
BUMP_INTEGRAL = 1.20690032243787617534
BUMP_PHI_INTEGRAL = 2.61003470660689676415

REGRESSION = ModelParams(n=1, ell=0, mu=0, nu2=0, p=2, eps=2.0)


def test_zero_functionals():
    params = ModelParams(n=3)
    grid = make_grid(params, SolverConfig(T_max=2.0, dx=0.05))
    z = np.zeros(grid.size)
    ctx = cons.TestFunctionContext(params)
    assert average_U(z, grid) == 0.0
    assert average_U0(z, 1.5, grid, ctx) == 0.0
    assert nonlinear_mass(z, grid, 2.0) == 0.0


def test_plateau_volume_in_three_dimensions():
    a = 1.0
    grid = make_grid(ModelParams(n=3), SolverConfig(T_max=2.0, dx=a / 200))
    u = 0.5 * (1.0 - np.tanh((grid.nodes - a) / (a / 100)))
    ball = 4.0 / 3.0 * math.pi * a**3
    assert average_U(u, grid) == pytest.approx(ball, rel=1e-3)


@pytest.mark.parametrize("A", [1.0, 0.3])
def test_bump_mass_on_line(A):
    grid = make_grid(ModelParams(n=1), SolverConfig(T_max=2.0, dx=0.001))
    u = cons.make_bump(1.0, A, grid.nodes)
    assert average_U(u, grid) == pytest.approx(A * BUMP_INTEGRAL, rel=1e-8)


def test_U0_with_reciprocal_weight_gives_plateau_volume():
    params = ModelParams(n=1, ell=0, mu=2, nu2=0)
    ctx = cons.TestFunctionContext(params)
    grid = make_grid(params, SolverConfig(T_max=2.0, dx=0.001))
    t = 1.7
    inside = np.abs(grid.nodes) <= 0.5
    u = np.zeros(grid.size)
    u[inside] = 1.0 / np.asarray(cons.psi(ctx, t, grid.nodes[inside]))
    # trapezoid over the two boundary half-cells loses one cell of width
    assert average_U0(u, t, grid, ctx) == pytest.approx(1.0, abs=grid.dx)


def test_U0_at_initial_time_separates():
    params = ModelParams(n=1, ell=0, mu=2, nu2=0, p=2, eps=0.4)
    ctx = cons.TestFunctionContext(params)
    res = run(params, SolverConfig(T_max=1.5, dx=0.005))
    expected = params.eps * cons.rho(ctx, 1.0) * BUMP_PHI_INTEGRAL
    assert res.series["U0"][0] == pytest.approx(expected, rel=1e-8)
    assert res.series["U"][0] == pytest.approx(params.eps * BUMP_INTEGRAL, rel=1e-8)


def test_U0_nonnegative_along_admissible_runs():
    for params in (
        ModelParams(n=1, ell=0, mu=2, nu2=0, p=2, eps=0.4),
        ModelParams(n=3, ell=0, mu=0, nu2=0, p=2, eps=1.0),
        ModelParams(n=1, ell=-0.5, mu=3, nu2=1, p=2, eps=0.5),
    ):
        res = run(params, SolverConfig(T_max=8.0, dx=0.02))
        assert np.nanmin(res.series["U0"]) >= -1e-10


def test_ode_identity_linear_run():
    params = ModelParams(n=1, ell=0, mu=2, nu2=0.25, eps=0.5)
    res = run(params, SolverConfig(T_max=8.0, dx=0.01, nonlinear=False))
    rep = check_ode_identity(res.series, params, nonlinear=False)
    assert rep.residual <= 1e-3


def test_ode_identity_nonlinear_converges_with_stride():
    residuals = []
    for stride in (20, 10):
        res = run(REGRESSION, SolverConfig(T_max=4.0, dx=0.01, output_stride=stride))
        residuals.append(check_ode_identity(res.series, REGRESSION).residual)
    assert residuals[0] <= 0.05
    assert residuals[0] / residuals[1] == pytest.approx(4.0, rel=0.25)


def test_ode_identity_zero_run():
    params = ModelParams(eps=0.0)
    res = run(params, SolverConfig(T_max=4.0))
    rep = check_ode_identity(res.series, params)
    assert rep.residual == 0.0 and rep.absolute == 0.0


def test_ode_identity_needs_rows():
    series = {k: np.zeros(4) for k in ("t", "U", "nonlinear_mass")}
    series["t"] = np.arange(4.0)
    with pytest.raises(InsufficientSamples):
        check_ode_identity(series, ModelParams())


def test_ode_identity_rejects_nonuniform_rows():
    t = np.array([1.0, 1.1, 1.3, 1.4, 1.7, 1.8, 1.9])
    series = {"t": t, "U": t**2, "nonlinear_mass": np.zeros_like(t)}
    with pytest.raises(InsufficientSamples):
        check_ode_identity(series, ModelParams())


def test_fujita_shape_bound_with_unit_damping():
    params = ModelParams(n=1, ell=0, mu=1, nu2=0, p=2, eps=0.1)
    ctx = cons.TestFunctionContext(params)
    res = run(params, SolverConfig(T_max=10.0, dx=0.01))
    rep = check_lower_bounds(res.series, params, ctx)
    fit = rep["fujita_U"]
    assert fit.exponent == 0.0 and fit.positive
    assert rep["U0"].positive and rep["U0"].window[0] >= ctx.T1


def test_lower_bounds_regression_case():
    params = ModelParams(n=1, ell=0, mu=2, nu2=0, p=2, eps=0.3)
    ctx = cons.TestFunctionContext(params)
    res = run(params, SolverConfig(T_max=15.0, dx=0.01))
    rep = check_lower_bounds(res.series, params, ctx)
    assert rep.all_positive
    assert rep["fujita_U"].exponent == pytest.approx(0.0)


def test_lower_bounds_zero_data_trivial():
    params = ModelParams(eps=0.0)
    ctx = cons.TestFunctionContext(params)
    res = run(params, SolverConfig(T_max=6.0))
    rep = check_lower_bounds(res.series, params, ctx)
    assert all(f.trivial and f.constant == 0.0 for f in rep.fits)
    assert rep.all_positive
