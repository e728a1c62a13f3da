"""Explicit test functions of the blow-up argument and residual checkers.

psi(s, x) = rho(s) * phi(x) solves the adjoint of the linear operator, where
phi is the positive solution of Lap phi = phi and

    rho(s) = s^((mu+1)/2) K_order(phi_ell(s)),   order = sqrt(delta) / (2(ell+1)).

The check_* functions measure how well these closed forms satisfy their
defining equations using centered finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import specfun
from .errors import NegativeDiscriminant, NotFound, SignConditionViolated
from .exponents import ModelParams

FD_STEP = 1e-3


@dataclass(frozen=True)
class TestFunctionContext:
    """Parameters plus the Bessel order and the asymptotic thresholds T0, T1 = 2 T0.

    ``order_shift`` perturbs the Bessel order; it exists only so validation
    can be exercised against a deliberately wrong construction.
    """

    __test__ = False  # keep pytest from collecting this class

    params: ModelParams
    order_shift: float = 0.0

    def __post_init__(self):
        if self.params.delta < 0:
            raise NegativeDiscriminant(f"delta = {self.params.delta:g} < 0")

    @property
    def sqrt_delta(self) -> float:
        return math.sqrt(self.params.delta)

    @property
    def order(self) -> float:
        return self.sqrt_delta / (2.0 * (self.params.ell + 1.0)) + self.order_shift

    @cached_property
    def T0(self) -> float:
        return find_T0(self)

    @property
    def T1(self) -> float:
        return 2.0 * self.T0


@dataclass(frozen=True)
class InitialData:
    """Bump-shaped Cauchy data u0 = a0 * bump, u1 = a1 * bump supported in B_R."""

    kind: str = "bump"
    amplitude0: float = 1.0
    amplitude1: float = 0.0
    R: float = 1.0

    def __post_init__(self):
        if self.kind != "bump":
            raise ValueError(f"unknown data kind {self.kind!r}")
        if self.amplitude0 < 0:
            raise ValueError("amplitude0 must be nonnegative")
        if not self.R > 0:
            raise ValueError("R must be positive")

    def sample(self, r):
        b = make_bump(self.R, 1.0, r)
        return self.amplitude0 * b, self.amplitude1 * b


def make_bump(R: float, amplitude: float, r) -> np.ndarray:
    """amplitude * exp(1 - 1/(1 - (r/R)^2)) inside |r| < R, zero outside."""
    r = np.abs(np.asarray(r, dtype=float))
    q = (r / R) ** 2
    out = np.zeros_like(r)
    inside = q < 1.0
    out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - q[inside]))
    return out


def check_sign_condition(params: ModelParams, u0, u1) -> None:
    r1 = 0.5 * (params.mu - 1.0 - math.sqrt(params.delta))
    combo = np.asarray(u1) + r1 * np.asarray(u0)
    if np.any(np.asarray(u0) < 0) or np.any(combo < 0):
        bad = int(np.count_nonzero((combo < 0) | (np.asarray(u0) < 0)))
        raise SignConditionViolated(
            f"u0 >= 0 and u1 + {r1:g} u0 >= 0 fail on {bad} grid node(s)"
        )


# --- eigenfunction of the Laplacian -------------------------------------------------


def log_eigenfunction_phi(n: int, r) -> np.ndarray:
    r = np.abs(np.asarray(r, dtype=float))
    if n == 1:
        return r + np.log1p(np.exp(-2.0 * r))
    nu = n / 2.0 - 1.0
    flat = r.ravel()
    vals = specfun.log_scaled_bessel_i(nu, flat).reshape(r.shape)
    return (n / 2.0) * math.log(2.0 * math.pi) + vals


def eigenfunction_phi(n: int, r):
    """Positive radial solution of Lap phi = phi.

    n = 1: e^r + e^-r.  n >= 2: (2 pi)^(n/2) r^(1-n/2) I_(n/2-1)(r), which equals
    the integral of exp(x . omega) over the unit sphere.
    """
    out = np.exp(log_eigenfunction_phi(n, r))
    return out if np.ndim(r) else float(out)


# --- time factor rho ------------------------------------------------------------------


def log_rho(ctx: TestFunctionContext, s: float) -> float:
    p = ctx.params
    sigma = float(specfun.phi_ell(p.ell, s))
    return 0.5 * (p.mu + 1.0) * math.log(s) + specfun.log_bessel_k(ctx.order, sigma)


def rho(ctx: TestFunctionContext, s: float) -> float:
    return math.exp(log_rho(ctx, s))


def rho_log_derivative(ctx: TestFunctionContext, s: float) -> float:
    """rho'(s) / rho(s), computed from a ratio of K values (no underflow)."""
    p = ctx.params
    sigma = float(specfun.phi_ell(p.ell, s))
    ratio = math.exp(specfun.log_bessel_k_ratio(ctx.order, sigma))
    return -(s**p.ell) * ratio + 0.5 * (p.mu + 1.0 + ctx.sqrt_delta) / s


def rho_prime(ctx: TestFunctionContext, s: float) -> float:
    """-s^((mu+1)/2+ell) K_{order+1}(phi_ell(s)) + (mu+1+sqrt(delta))/2 s^((mu-1)/2) K_order(phi_ell(s))."""
    p = ctx.params
    sigma = float(specfun.phi_ell(p.ell, s))
    a = 0.5 * (p.mu + 1.0)
    return (
        -(s ** (a + p.ell)) * specfun.bessel_k(ctx.order + 1.0, sigma)
        + 0.5 * (p.mu + 1.0 + ctx.sqrt_delta) * s ** (a - 1.0) * specfun.bessel_k(ctx.order, sigma)
    )


def psi(ctx: TestFunctionContext, s: float, r):
    return np.exp(log_rho(ctx, s) + log_eigenfunction_phi(ctx.params.n, r))


# --- residual checks ------------------------------------------------------------------


def check_rho_ode(ctx: TestFunctionContext, s_samples=None, h: float = FD_STEP) -> float:
    """Max normalized residual of rho'' - s^(2l) rho - mu rho'/s + (mu+nu2) rho/s^2.

    Each term is divided by rho(s) first, so the check also works where rho
    itself underflows.
    """
    p = ctx.params
    if s_samples is None:
        s_samples = np.linspace(1.0, 10.0, 37)
    worst = 0.0
    for s in np.asarray(s_samples, dtype=float):
        l0 = log_rho(ctx, s)
        rpp = (math.exp(log_rho(ctx, s + h) - l0) - 2.0 + math.exp(log_rho(ctx, s - h) - l0)) / h**2
        rp = rho_log_derivative(ctx, s)
        speed2 = s ** (2.0 * p.ell)
        res = rpp - speed2 - p.mu * rp / s + (p.mu + p.nu2) / s**2
        worst = max(worst, abs(res) / max(abs(rpp), speed2))
    return worst


def check_eta_equation(order: float, sigma_samples=None, h: float = FD_STEP) -> float:
    """Max normalized residual of the modified Bessel equation for K_order."""
    if sigma_samples is None:
        sigma_samples = np.linspace(0.5, 20.0, 40)
    worst = 0.0
    for sg in np.asarray(sigma_samples, dtype=float):
        l0 = specfun.log_bessel_k(order, sg)
        up = math.exp(specfun.log_bessel_k(order, sg + h) - l0)
        dn = math.exp(specfun.log_bessel_k(order, sg - h) - l0)
        d2 = sg**2 * (up - 2.0 + dn) / h**2
        d1 = sg * (up - dn) / (2.0 * h)
        d0 = sg**2 + order**2
        worst = max(worst, abs(d2 + d1 - d0) / max(abs(d2), abs(d1), d0))
    return worst


def _radial_laplacian_fd(f, n: int, r: float, h: float) -> float:
    if r < h:
        # symmetric limit n * f''(0)
        return n * 2.0 * (f(h) - f(0.0)) / h**2
    d2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / h**2
    d1 = (f(r + h) - f(r - h)) / (2.0 * h)
    return d2 + (n - 1) / r * d1


def check_adjoint_pde(ctx: TestFunctionContext, s_grid=None, r_grid=None, psi_fn=None,
                      h: float = FD_STEP) -> float:
    """Max normalized residual of psi_ss - s^(2l) Lap psi - d/ds(mu psi/s) + nu2 psi/s^2.

    With the default psi = rho * phi the spatial part uses Lap phi = phi; a
    custom ``psi_fn(s, r)`` gets a radial finite-difference Laplacian instead.
    """
    p = ctx.params
    s_grid = np.linspace(1.0, 10.0, 19) if s_grid is None else np.asarray(s_grid, float)
    r_grid = np.linspace(0.0, 5.0, 11) if r_grid is None else np.asarray(r_grid, float)
    analytic = psi_fn is None
    if analytic:
        def psi_fn(s, r):
            return float(psi(ctx, s, r))
    worst = 0.0
    for s in s_grid:
        for r in r_grid:
            c, up, dn = psi_fn(s, r), psi_fn(s + h, r), psi_fn(s - h, r)
            pss = (up - 2.0 * c + dn) / h**2
            damp = p.mu * (up / (s + h) - dn / (s - h)) / (2.0 * h)
            if analytic:
                lap = c
            else:
                lap = _radial_laplacian_fd(lambda rr: psi_fn(s, rr), p.n, r, h)
            speed = s ** (2.0 * p.ell) * lap
            mass = p.nu2 * c / s**2
            scale = max(abs(pss), abs(speed), abs(damp), abs(mass))
            if scale == 0.0:
                continue
            worst = max(worst, abs(pss - speed - damp + mass) / scale)
    return worst


def log_band_margins(ctx: TestFunctionContext, s: float) -> tuple[float, float]:
    """(log rho^2 - log lower, log upper - log rho^2); both >= 0 inside the band."""
    p = ctx.params
    log_base = (
        math.log(math.pi * (p.ell + 1.0))
        - 2.0 * float(specfun.phi_ell(p.ell, s))
        + (p.mu - p.ell) * math.log(s)
    )
    lr2 = 2.0 * log_rho(ctx, s)
    return lr2 - (log_base - math.log(4.0)), log_base - lr2


def _in_band(ctx, s) -> bool:
    lo, hi = log_band_margins(ctx, s)
    return lo >= 0.0 and hi >= 0.0


def find_T0(ctx: TestFunctionContext, step: float = 0.01, s_limit: float = 1e4) -> float:
    """Smallest scanned s* > 1 with pi(l+1)/4 <= rho^2 e^(2 phi_l) s^(l-mu) <= pi(l+1) on [s*, 10 s*]."""
    i = 1
    checked = 0
    while 1.0 + i * step <= s_limit:
        s_star = 1.0 + i * step
        j_end = int(math.ceil((10.0 * s_star - 1.0) / step))
        j = max(i, checked + 1)
        while j <= j_end:
            if not _in_band(ctx, 1.0 + j * step):
                break
            j += 1
        if j > j_end:
            return round(s_star, 10)
        checked = j
        i = j + 1
    raise NotFound(f"no T0 <= {s_limit} found; special function evaluation is suspect")


# --- data functional ------------------------------------------------------------------


def volume_weights(n: int, r: np.ndarray, geometry: str) -> np.ndarray:
    """Density of the volume element on the node coordinates."""
    if geometry == "line1d":
        return np.ones_like(r)
    return specfun.sphere_area(n) * np.abs(r) ** (n - 1)


def data_functional(ctx: TestFunctionContext, r, u0, u1, geometry: str = "radial") -> float:
    """Integral of (K_{o+1}(phi_l(1)) u0 + K_o(phi_l(1)) (u1 + r1 u0)) phi over R^n."""
    p = ctx.params
    r = np.asarray(r, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    check_sign_condition(p, u0, u1)
    sigma1 = float(specfun.phi_ell(p.ell, 1.0))
    k_hi = specfun.bessel_k(ctx.order + 1.0, sigma1)
    k_lo = specfun.bessel_k(ctx.order, sigma1)
    r1 = 0.5 * (p.mu - 1.0 - ctx.sqrt_delta)
    integrand = (k_hi * u0 + k_lo * (u1 + r1 * u0)) * eigenfunction_phi(p.n, r)
    return float(np.trapezoid(integrand * volume_weights(p.n, r, geometry), r))
