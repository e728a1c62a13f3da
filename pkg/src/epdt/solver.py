"""Method-of-lines simulator for u_tt - t^(2l) Lap u + mu u_t/t + nu2 u/t^2 = |u|^p.

Space: second-order central differences on a line or on a radial half line
(ghost node u(-dx) = u(dx) at the origin).  Time: classical RK4 on (u, v = u_t)
with a step limited by the wave speed t^l and by the size of the reaction term.

Data are supported in B_R and the exact solution stays in the cone of radius
R + phi_l(t) - phi_l(1).  Only nodes inside that cone plus a margin wide enough
for the scheme's numerical tail are updated; everything beyond is exactly zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import constructions as cons
from . import diagnostics as diag
from .errors import GridError, ParameterError, StepUnderflow
from .exponents import ModelParams
from .specfun import phi_ell

SERIES_COLUMNS = ("t", "sup_norm", "U", "U0", "nonlinear_mass", "support_radius")
# The semi-discrete scheme leaks an Airy-type tail ahead of the cone whose width
# grows like (cone travel / dx)^(1/3) cells; the active window keeps 8 such widths,
# where the tail is below 1e-16 relative.
ACTIVE_MARGIN = 16
TAIL_WIDTHS = 8.0


@dataclass(frozen=True)
class SolverConfig:
    c_cfl: float = 0.5
    c_react: float = 0.2
    U_max: float = 1e6
    dt_min: float = 1e-12
    T_max: float = 50.0
    output_stride: int = 20
    output_dt: float | None = None
    dx: float = 0.01
    L: float | None = None
    geometry: str | None = None
    nonlinear: bool = True
    record_U0: bool = True

    def __post_init__(self):
        if not 0 < self.c_cfl <= 1:
            raise ParameterError("c_cfl must lie in (0, 1]")
        for name in ("c_react", "U_max", "dt_min", "T_max", "dx"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if self.output_stride < 1:
            raise ParameterError("output_stride must be >= 1")
        if self.output_dt is not None and not self.output_dt > 0:
            raise ParameterError("output_dt must be positive")
        if self.geometry not in (None, "line1d", "radial"):
            raise ParameterError(f"unknown geometry {self.geometry!r}")


@dataclass
class SpatialGrid:
    geometry: str  # "line1d" or "radial"
    n: int
    L: float
    dx: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def center(self) -> int:
        """Index of the origin."""
        return self.size // 2 if self.geometry == "line1d" else 0

    def describe(self) -> dict:
        return {"geometry": self.geometry, "n": self.n, "L": self.L, "dx": self.dx, "nodes": self.size}


def required_radius(params: ModelParams, T_max: float, dx: float) -> float:
    return params.R + float(phi_ell(params.ell, T_max) - phi_ell(params.ell, 1.0)) + 4.0 * dx


def make_grid(params: ModelParams, config: SolverConfig) -> SpatialGrid:
    geometry = config.geometry or ("line1d" if params.n == 1 else "radial")
    if geometry == "line1d" and params.n != 1:
        raise GridError("line1d geometry needs n = 1")
    dx = config.dx
    need = required_radius(params, config.T_max, dx)
    L = need if config.L is None else config.L
    if L < need - 1e-12:
        raise GridError(
            f"domain does not contain support cone: L = {L:g} < {need:g} required up to T_max"
        )
    m = int(math.ceil(L / dx - 1e-9))
    r = np.arange(m + 1) * dx
    if geometry == "line1d":
        nodes = np.concatenate([-r[:0:-1], r])
    else:
        nodes = r
    grid = SpatialGrid(geometry, params.n, m * dx, dx, nodes, np.empty(0))
    grid.weights = diag.node_weights(grid)
    return grid


@dataclass
class SolverState:
    t: float
    u: np.ndarray
    v: np.ndarray

    def copy(self) -> "SolverState":
        return SolverState(self.t, self.u.copy(), self.v.copy())


def laplacian(u: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Second-order discrete Laplacian; the outermost node(s) get 0 (Dirichlet)."""
    dx2 = grid.dx * grid.dx
    out = np.zeros_like(u)
    if grid.geometry == "line1d":
        out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx2
        return out
    n = grid.n
    out[0] = n * 2.0 * (u[1] - u[0]) / dx2
    if n == 1:
        out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx2
    else:
        r = grid.nodes[1:u.size - 1]
        out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx2 + (n - 1) / r * (u[2:] - u[:-2]) / (2.0 * grid.dx)
    return out


def rhs(state: SolverState, params: ModelParams, grid: SpatialGrid, nonlinear: bool = True):
    """(u_t, v_t) = (v, t^(2l) Lap_h u - mu v/t - nu2 u/t^2 + |u|^p); boundary nodes frozen."""
    t, u, v = state.t, state.u, state.v
    dv = t ** (2.0 * params.ell) * laplacian(u, grid) - (params.mu / t) * v - (params.nu2 / t**2) * u
    if nonlinear:
        dv += np.abs(u) ** params.p
    du = v.copy()
    du[-1] = 0.0
    dv[-1] = 0.0
    if grid.geometry == "line1d":
        du[0] = 0.0
        dv[0] = 0.0
    return du, dv


def time_step(t: float, sup_u: float, params: ModelParams, config: SolverConfig) -> float:
    """min(c_cfl dx / max(1, t^l), c_react / max(1, sup|u|)^((p-1)/2), T_max - t)."""
    wave = config.c_cfl * config.dx / max(1.0, t**params.ell)
    react = config.c_react / max(1.0, sup_u) ** (0.5 * (params.p - 1.0))
    dt = min(wave, react)
    remaining = config.T_max - t
    # absorb a rounding-size remainder into this step instead of taking a tiny extra one
    return remaining if remaining <= dt * (1.0 + 1e-6) else dt


class _Stepper:
    """RK4 restricted to the active window of the grid."""

    def __init__(self, params, config, grid):
        self.params = params
        self.config = config
        self.grid = grid
        self.phi1 = float(phi_ell(params.ell, 1.0))

    def window(self, t: float) -> slice:
        g = self.grid
        travel = float(phi_ell(self.params.ell, t)) - self.phi1
        tail = TAIL_WIDTHS * (max(travel, 0.0) / g.dx) ** (1.0 / 3.0)
        k = int(math.ceil((self.params.R + travel) / g.dx + tail)) + ACTIVE_MARGIN
        if g.geometry == "line1d":
            c = g.center
            return slice(max(0, c - k), min(g.size, c + k + 1))
        return slice(0, min(g.size, k + 1))

    def _f(self, t, u, v, sub):
        p = self.params
        dv = t ** (2.0 * p.ell) * laplacian(u, sub) - (p.mu / t) * v - (p.nu2 / t**2) * u
        if self.config.nonlinear:
            dv += np.abs(u) ** p.p
        du = v.copy()
        # frozen ends: the outer boundary or, inside the grid, the window edge
        du[-1] = dv[-1] = 0.0
        if sub.geometry == "line1d":
            du[0] = dv[0] = 0.0
        return du, dv

    def advance(self, state: SolverState, dt: float, inplace: bool = False) -> SolverState:
        w = self.window(state.t + dt)
        g = self.grid
        sub = SpatialGrid(g.geometry, g.n, g.L, g.dx, g.nodes[w], g.weights[w])
        t, u, v = state.t, state.u[w], state.v[w]
        k1u, k1v = self._f(t, u, v, sub)
        h = 0.5 * dt
        k2u, k2v = self._f(t + h, u + h * k1u, v + h * k1v, sub)
        k3u, k3v = self._f(t + h, u + h * k2u, v + h * k2v, sub)
        k4u, k4v = self._f(t + dt, u + dt * k3u, v + dt * k3v, sub)
        out = state if inplace else state.copy()
        out.u[w] = u + (dt / 6.0) * (k1u + 2.0 * (k2u + k3u) + k4u)
        out.v[w] = v + (dt / 6.0) * (k1v + 2.0 * (k2v + k3v) + k4v)
        out.t = t + dt
        return out


def step(state: SolverState, config: SolverConfig, params: ModelParams, grid: SpatialGrid,
         dt: float | None = None) -> SolverState:
    """One RK4 step of size ``time_step`` (or the given dt)."""
    if dt is None:
        dt = time_step(state.t, float(np.max(np.abs(state.u))), params, config)
    if dt < config.dt_min:
        raise StepUnderflow(f"dt = {dt:g} < dt_min at t = {state.t:g}")
    return _Stepper(params, config, grid).advance(state, dt)


def support_radius(state: SolverState, grid: SpatialGrid, tol: float = 1e-12) -> float:
    """Largest |node| where |u| exceeds tol * sup|u|; 0 for the zero state."""
    a = np.abs(state.u)
    sup = a.max() if a.size else 0.0
    if sup == 0.0:
        return 0.0
    idx = np.nonzero(a > tol * sup)[0]
    return float(np.max(np.abs(grid.nodes[idx])))


@dataclass
class SimResult:
    status: str  # "blew_up", "survived", "step_underflow"
    T_num: float | None
    t_final: float
    series: dict
    params: ModelParams
    grid: dict
    config: SolverConfig
    final_state: SolverState | None = field(default=None, repr=False)
    steps: int = 0

    def summary(self) -> dict:
        return {
            "status": self.status,
            "T_num": self.T_num,
            "t_final": self.t_final,
            "steps": self.steps,
            "grid": self.grid,
            "config": asdict(self.config),
        }


def _row(state, grid, params, ctx, log_phi, record_U0):
    u = state.u
    return (
        state.t,
        float(np.max(np.abs(u))),
        diag.average_U(u, grid),
        diag.average_U0(u, state.t, grid, ctx, log_phi) if record_U0 else float("nan"),
        diag.nonlinear_mass(u, grid, params.p),
        support_radius(state, grid),
    )


def initial_state(params: ModelParams, grid: SpatialGrid, data: cons.InitialData) -> SolverState:
    u0, u1 = data.sample(grid.nodes)
    return SolverState(1.0, params.eps * u0, params.eps * u1)


def run(params: ModelParams, config: SolverConfig, data: cons.InitialData | None = None) -> SimResult:
    """Integrate from t = 1 until sup|u| >= U_max, a step underflow, or T_max."""
    if data is None:
        data = cons.InitialData(R=params.R)
    if data.R > params.R:
        raise GridError("data support radius exceeds params.R")
    grid = make_grid(params, config)
    ctx = None
    record_U0 = config.record_U0 and params.delta >= 0
    if params.delta < 0:
        warnings.warn("delta < 0: running outside the range covered by the blow-up estimates", stacklevel=2)
    log_phi = None
    if record_U0:
        ctx = cons.TestFunctionContext(params)
        log_phi = cons.log_eigenfunction_phi(params.n, grid.nodes)
    state = initial_state(params, grid, data)
    stepper = _Stepper(params, config, grid)
    rows = [_row(state, grid, params, ctx, log_phi, record_U0)]
    status, T_num = "survived", None
    steps = 0
    out_k = 1
    next_out = 1.0 + config.output_dt if config.output_dt else None
    sup = rows[0][1]
    while state.t < config.T_max:
        dt = time_step(state.t, sup, params, config)
        if next_out is not None:
            dt = min(dt, next_out - state.t)
        if dt < config.dt_min:
            status, T_num = "step_underflow", state.t
            break
        final = dt == config.T_max - state.t
        state = stepper.advance(state, dt, inplace=True)
        steps += 1
        if final:
            state.t = config.T_max
        if next_out is not None and abs(state.t - next_out) <= 1e-12 * next_out:
            state.t = next_out
        sup = float(np.max(np.abs(state.u)))
        if not math.isfinite(sup) or sup >= config.U_max:
            status, T_num = "blew_up", state.t
            if math.isfinite(sup):
                rows.append(_row(state, grid, params, ctx, log_phi, record_U0))
            break
        if next_out is not None:
            if state.t >= next_out:
                rows.append(_row(state, grid, params, ctx, log_phi, record_U0))
                out_k += 1
                next_out = 1.0 + out_k * config.output_dt
        elif steps % config.output_stride == 0:
            rows.append(_row(state, grid, params, ctx, log_phi, record_U0))
    if status == "survived" and rows[-1][0] != state.t:
        rows.append(_row(state, grid, params, ctx, log_phi, record_U0))
    arr = np.array(rows, dtype=float)
    series = {name: arr[:, i] for i, name in enumerate(SERIES_COLUMNS)}
    return SimResult(status, T_num, state.t, series, params, grid.describe(), config, state, steps)
