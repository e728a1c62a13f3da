"""Parameter validation and critical-exponent algebra.

The model is

    u_tt - t^(2 ell) Lap u + mu t^-1 u_t + nu2 t^-2 u = |u|^p,   t > 1,

with data eps*u0, eps*u1 at t = 1 supported in the ball of radius R.
Everything here is closed-form arithmetic on the parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

from .errors import EmptyRange, NegativeDiscriminant, ParameterError

INF = math.inf
TIE_RTOL = 1e-12
LEAD_ATOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    n: int = 1
    ell: float = 0.0
    mu: float = 2.0
    nu2: float = 0.0
    p: float = 2.0
    eps: float = 1.0
    R: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        checks = [
            (self.ell > -1, "ell > -1"),
            (self.mu >= 0, "mu >= 0"),
            (self.nu2 >= 0, "nu2 >= 0"),
            (self.p > 1, "p > 1"),
            (self.eps >= 0, "eps >= 0"),
            (self.R > 0, "R > 0"),
        ]
        for ok, what in checks:
            if not ok:
                raise ParameterError(f"parameter violates {what}: {self!r}")
        for name in ("ell", "mu", "nu2", "p", "eps", "R"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    @cached_property
    def delta(self) -> float:
        return compute_delta(self.mu, self.nu2)

    @property
    def admissible(self) -> bool:
        """True when delta >= 0, the hypothesis of the blow-up estimates."""
        return self.delta >= 0

    def replace(self, **changes) -> "ModelParams":
        data = {k: getattr(self, k) for k in ("n", "ell", "mu", "nu2", "p", "eps", "R")}
        data.update(changes)
        return ModelParams(**data)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("n", "ell", "mu", "nu2", "p", "eps", "R")}


class LifespanRate(NamedTuple):
    """Exponent a in T(eps) <= C eps^-a for one blow-up branch."""

    branch: str
    rate: float
    binding: bool = False
    degenerate: bool = False


@dataclass(frozen=True)
class ExponentReport:
    delta: float
    sqrt_delta: float
    r1: float
    r2: float
    p_strauss: float
    fujita_arg: float
    p_fujita: float
    p_crit: float
    regime: str
    theta_at_p: float
    rates: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "sqrt_delta": self.sqrt_delta,
            "r1": self.r1,
            "r2": self.r2,
            "p_strauss": self.p_strauss,
            "fujita_arg": self.fujita_arg,
            "p_fujita": self.p_fujita,
            "p_crit": self.p_crit,
            "regime": self.regime,
            "theta_at_p": self.theta_at_p,
            "rates": [r._asdict() for r in self.rates],
        }


def compute_delta(mu: float, nu2: float) -> float:
    """(mu - 1)^2 - 4 nu2; negative values are returned, not rejected."""
    return (mu - 1.0) ** 2 - 4.0 * nu2


def characteristic_roots(mu: float, nu2: float) -> tuple[float, float]:
    """Roots r1 <= r2 of r^2 - (mu-1) r + nu2 = 0."""
    delta = compute_delta(mu, nu2)
    if delta < 0:
        raise NegativeDiscriminant(f"delta = {delta} < 0 for mu={mu}, nu2={nu2}")
    s = math.sqrt(delta)
    return 0.5 * (mu - 1.0 - s), 0.5 * (mu - 1.0 + s)


def _largest_root(a: float, b: float, c: float) -> float:
    """Largest real root of a x^2 + b x + c = 0 for a > 0, c < 0."""
    disc = b * b - 4.0 * a * c
    s = math.sqrt(disc)
    # avoid cancellation: pick the stable formula by the sign of b
    if b <= 0:
        return (-b + s) / (2.0 * a)
    return (2.0 * c) / (-b - s)


def strauss_coefficients(d: float, ell: float) -> tuple[float, float, float]:
    """Coefficients (a, b, c) of a p^2 + b p + c = 0 defining the Strauss-type exponent."""
    a = 0.5 * (d - 1.0) + ell / (2.0 * (ell + 1.0))
    b = -(0.5 * (d + 1.0) - 3.0 * ell / (2.0 * (ell + 1.0)))
    return a, b, -1.0


def strauss_exponent(d: float, ell: float) -> float:
    """Strauss-type exponent in (possibly non-integer) dimension d.

    Returns +inf when the leading coefficient is not positive (up to rounding).
    """
    if not ell > -1:
        raise ParameterError("ell must exceed -1")
    if not d > 0:
        raise ParameterError("effective dimension must be positive")
    a, b, c = strauss_coefficients(d, ell)
    # a is a difference of two terms; treat rounding-level values as the exact zero
    scale = max(1.0, 0.5 * abs(d - 1.0), abs(ell / (2.0 * (ell + 1.0))))
    if a <= LEAD_ATOL * scale:
        return INF
    return _largest_root(a, b, c)


def fujita_exponent(k: float) -> float:
    """1 + 2/k for k > 0, +inf otherwise."""
    if k <= 0:
        return INF
    return 1.0 + 2.0 / k


def fujita_argument(n: int, ell: float, mu: float, nu2: float) -> float:
    """Shifted dimension (ell+1) n + (mu-1)/2 - sqrt(delta)/2."""
    delta = compute_delta(mu, nu2)
    if delta < 0:
        raise NegativeDiscriminant(f"delta = {delta} < 0")
    return (ell + 1.0) * n + 0.5 * (mu - 1.0) - 0.5 * math.sqrt(delta)


def effective_dimension(n: int, ell: float, mu: float) -> float:
    return n + mu / (ell + 1.0)


def theta(n: int, ell: float, mu: float, p: float) -> float:
    a = 0.5 * (n + 1) * (ell + 1.0) + 0.5 * (mu - 3.0 * ell)
    b = 0.5 * (n - 1) * (ell + 1.0) + 0.5 * (ell + mu)
    return (ell + 1.0) + a * p - b * p * p


def quasi_homogeneous_dimension(n: int, ell: float) -> float:
    return (ell + 1.0) * n + 1.0


def _regime(p_strauss: float, p_fujita: float) -> str:
    p_crit = max(p_strauss, p_fujita)
    if p_strauss == p_fujita:
        return "tie"
    if math.isfinite(p_crit) and abs(p_strauss - p_fujita) <= TIE_RTOL * max(1.0, p_crit):
        return "tie"
    return "strauss-dominant" if p_strauss > p_fujita else "fujita-dominant"


def _rates(params: ModelParams, p_strauss: float, k: float, p_fujita: float) -> list[LifespanRate]:
    n, ell, mu, p = params.n, params.ell, params.mu, params.p
    found = []
    th = theta(n, ell, mu, p)
    if math.isfinite(p_strauss):
        if p < p_strauss:
            found.append(("strauss", p * (p - 1.0) / th, False))
    elif th > 0:
        # leading coefficient <= 0: the quadratic gives no finite threshold
        found.append(("strauss", p * (p - 1.0) / th, True))
    if p < p_fujita:
        found.append(("fujita", 1.0 / (2.0 / (p - 1.0) - k), False))
    if not found:
        return []
    candidates = [f for f in found if not f[2]] or found
    best = min(candidates, key=lambda f: f[1])
    return [
        LifespanRate(branch, rate, binding=(branch, rate, deg) == best, degenerate=deg)
        for branch, rate, deg in found
    ]


def critical_exponent(params: ModelParams) -> ExponentReport:
    delta = params.delta
    if delta < 0:
        raise NegativeDiscriminant(
            f"delta = {delta:g} < 0: blow-up estimates require (mu-1)^2 - 4 nu2 >= 0"
        )
    n, ell, mu, p = params.n, params.ell, params.mu, params.p
    r1, r2 = characteristic_roots(mu, params.nu2)
    p_str = strauss_exponent(effective_dimension(n, ell, mu), ell)
    k = fujita_argument(n, ell, mu, params.nu2)
    p_fuj = fujita_exponent(k)
    return ExponentReport(
        delta=delta,
        sqrt_delta=math.sqrt(delta),
        r1=r1,
        r2=r2,
        p_strauss=p_str,
        fujita_arg=k,
        p_fujita=p_fuj,
        p_crit=max(p_str, p_fuj),
        regime=_regime(p_str, p_fuj),
        theta_at_p=theta(n, ell, mu, p),
        rates=_rates(params, p_str, k, p_fuj),
    )


def lifespan_rates(params: ModelParams) -> list[LifespanRate]:
    """Lifespan exponents available at params.p; the smallest one is flagged binding.

    A Strauss entry with ``degenerate=True`` comes from the case where the
    quadratic has no finite positive root; its rate p(p-1)/theta is reported
    whenever theta > 0 but never chosen as binding over a regular branch.
    """
    report = critical_exponent(params)
    if params.p >= report.p_crit or not report.rates:
        raise EmptyRange(
            f"p = {params.p} >= p_crit = {report.p_crit}: no blow-up branch applies"
        )
    return report.rates


def binding_rate(params: ModelParams) -> LifespanRate:
    return next(r for r in lifespan_rates(params) if r.binding)
