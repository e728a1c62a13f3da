"""Spatial functionals U, U0 along a run, and checks of the identities they obey.

U(t) = int u dx and U0(t) = int u psi(t, .) dx, with psi = rho(t) phi(x).  Along
a solution U satisfies U'' + mu U'/t + nu2 U/t^2 = int |u|^p dx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import constructions as cons
from .errors import InsufficientSamples


def node_weights(grid) -> np.ndarray:
    """Volume density on grid nodes (1 on a line, omega_{n-1} r^(n-1) radially)."""
    return cons.volume_weights(grid.n, grid.nodes, grid.geometry)


def average_U(u, grid, n: int | None = None) -> float:
    """Trapezoid rule for int u dx on the solver grid."""
    u = np.asarray(u, dtype=float)
    w = grid.weights if hasattr(grid, "weights") else node_weights(grid)
    m = u.shape[0]
    return float(np.trapezoid(u * w[:m], grid.nodes[:m]))


def nonlinear_mass(u, grid, p: float) -> float:
    u = np.asarray(u, dtype=float)
    m = u.shape[0]
    return float(np.trapezoid(np.abs(u) ** p * grid.weights[:m], grid.nodes[:m]))


def average_U0(u, t: float, grid, ctx: cons.TestFunctionContext, log_phi=None) -> float:
    """int u psi(t, x) dx with psi = rho(t) phi(x), combined in log space."""
    u = np.asarray(u, dtype=float)
    m = u.shape[0]
    if log_phi is None:
        log_phi = cons.log_eigenfunction_phi(ctx.params.n, grid.nodes[:m])
    nz = u != 0.0
    if not np.any(nz):
        return 0.0
    weight = np.zeros(m)
    weight[nz] = np.exp(cons.log_rho(ctx, t) + log_phi[:m][nz])
    return float(np.trapezoid(u * weight * grid.weights[:m], grid.nodes[:m]))


# --- identity checks along a recorded series ------------------------------------------


@dataclass
class ODEIdentityReport:
    residual: float  # max |lhs - N| / max |N| over the window, or absolute if N == 0
    absolute: float
    scale: float
    window: tuple
    samples: int


def check_ode_identity(series, params, trim: float = 0.1, nonlinear: bool = True) -> ODEIdentityReport:
    """Compare U'' + mu U'/t + nu2 U/t^2 with int |u|^p dx on uniformly spaced rows.

    Derivatives are centered differences of the U column; only the middle
    (1 - 2 trim) of the run enters the residual.  For a linear run the
    right-hand side is zero and the residual is absolute.
    """
    t = np.asarray(series["t"], dtype=float)
    U = np.asarray(series["U"], dtype=float)
    N = np.asarray(series["nonlinear_mass"], dtype=float)
    if not nonlinear:
        N = np.zeros_like(N)
    if t.size < 5:
        raise InsufficientSamples(f"need >= 5 rows, got {t.size}")
    h = np.diff(t)
    if h.size > 1 and not np.isclose(h[-1], h[0], rtol=1e-6, atol=1e-12):
        # a run that stops between output times ends on an off-grid row
        t, U, N, h = t[:-1], U[:-1], N[:-1], h[:-1]
    if t.size < 5:
        raise InsufficientSamples(f"need >= 5 uniform rows, got {t.size}")
    if not np.allclose(h, h[0], rtol=1e-6, atol=1e-12):
        raise InsufficientSamples("series rows must be uniformly spaced in t")
    h = float(h[0])
    Upp = (U[2:] - 2.0 * U[1:-1] + U[:-2]) / h**2
    Up = (U[2:] - U[:-2]) / (2.0 * h)
    tc = t[1:-1]
    lhs = Upp + params.mu * Up / tc + params.nu2 * U[1:-1] / tc**2
    span = t[-1] - t[0]
    sel = (tc >= t[0] + trim * span) & (tc <= t[-1] - trim * span)
    if np.count_nonzero(sel) < 1:
        raise InsufficientSamples("window after trimming is empty")
    diff = np.abs(lhs[sel] - N[1:-1][sel])
    scale = float(np.max(np.abs(N[1:-1][sel])))
    absolute = float(diff.max())
    rel = absolute / scale if scale > 0 else absolute
    return ODEIdentityReport(rel, absolute, scale, (float(tc[sel][0]), float(tc[sel][-1])), int(sel.sum()))


@dataclass
class BoundFit:
    name: str
    constant: float
    exponent: float
    window: tuple
    trivial: bool = False

    @property
    def positive(self) -> bool:
        return self.constant > 0


@dataclass
class LowerBoundReport:
    fits: list = field(default_factory=list)

    def __getitem__(self, name):
        return next(f for f in self.fits if f.name == name)

    @property
    def all_positive(self) -> bool:
        return all(f.positive or f.trivial for f in self.fits)


def _fit_constant(name, t, values, scale, exponent, t_lo):
    sel = t >= t_lo
    if not np.any(sel):
        return BoundFit(name, float("nan"), exponent, (t_lo, t_lo))
    ratio = values[sel] / (scale * t[sel] ** exponent) if scale > 0 else np.zeros(sel.sum())
    window = (float(t[sel][0]), float(t[sel][-1]))
    if np.all(values[sel] == 0):
        return BoundFit(name, 0.0, exponent, window, trivial=True)
    return BoundFit(name, float(ratio.min()), exponent, window)


def check_lower_bounds(series, params, ctx: cons.TestFunctionContext) -> LowerBoundReport:
    """Largest constants c making each first lower bound hold on the observed window.

        U(t)  >= c eps t^((1-mu)/2 + sqrt(delta)/2)                 for t >= 1
        U0(t) >= c eps t^-ell                                        for t >= T1
        U(t)  >= c eps^p t^(-((n-1)(l+1)/2 + (l+mu)/2) p + (n-1)(l+1) + 2)   for t >= T1
    """
    t = np.asarray(series["t"], dtype=float)
    U = np.asarray(series["U"], dtype=float)
    U0 = np.asarray(series["U0"], dtype=float)
    n, ell, mu, p, eps = params.n, params.ell, params.mu, params.p, params.eps
    sd = math.sqrt(params.delta)
    e_fuj = 0.5 * (1.0 - mu) + 0.5 * sd
    e_str = -(0.5 * (n - 1) * (ell + 1.0) + 0.5 * (ell + mu)) * p + (n - 1) * (ell + 1.0) + 2.0
    T1 = ctx.T1
    return LowerBoundReport([
        _fit_constant("fujita_U", t, U, eps, e_fuj, 1.0),
        _fit_constant("U0", t, U0, eps, -ell, T1),
        _fit_constant("strauss_U", t, U, eps**p, e_str, T1),
    ])
