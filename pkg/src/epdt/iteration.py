"""Iterated lower bounds U(t) >= C_j t^-alpha_j (t - T1)^beta_j.

Both branches feed a first lower bound into the same integral iteration
frame; C_j grows doubly exponentially so it is tracked as log C_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, EmptyRange
from .exponents import ModelParams, critical_exponent, theta

LOG_OVERFLOW = 700.0
BRANCHES = ("strauss", "fujita")


@dataclass(frozen=True)
class IterationConstants:
    """Constants hidden in the frame's "greater-or-similar" signs, plus derived ones.

    C_frame multiplies the iteration frame, K_str the first Strauss lower bound,
    I_fuj is the integral of u0 used by the Fujita seed.  C_tilde overrides the
    Fujita-branch envelope prefactor; None derives it the same way as D_hat.
    """

    C_frame: float = 1.0
    K_str: float = 1.0
    I_fuj: float = 1.0
    T1: float = 2.02
    C_tilde: float | None = None


@dataclass(frozen=True)
class Seed:
    alpha0: float
    beta0: float
    log_C0: float
    description: str


@dataclass
class IterationTable:
    params: ModelParams
    constants: IterationConstants
    branch: str
    rows: list = field(default_factory=list)  # (j, alpha_j, beta_j, log_C_j)

    @property
    def r2(self) -> float:
        return critical_exponent(self.params).r2


def _check_branch(params: ModelParams, branch: str):
    if branch not in BRANCHES:
        raise ValueError(f"unknown branch {branch!r}")
    rep = critical_exponent(params)
    limit = rep.p_strauss if branch == "strauss" else rep.p_fujita
    if not params.p < limit:
        raise EmptyRange(f"p = {params.p} is not below the {branch} exponent {limit}")
    if branch == "strauss" and not theta(params.n, params.ell, params.mu, params.p) > 0:
        raise EmptyRange("theta(n, ell, mu, p) <= 0")
    return rep


def initial_exponents(params: ModelParams, branch: str, constants: IterationConstants | None = None) -> Seed:
    constants = constants or IterationConstants()
    n, ell, mu, p, eps = params.n, params.ell, params.mu, params.p, params.eps
    if branch == "strauss":
        alpha0 = (0.5 * (n - 1) * (ell + 1.0) + 0.5 * (ell + mu)) * p
        beta0 = (n - 1) * (ell + 1.0) + 2.0
        log_c0 = math.log(constants.K_str) + p * math.log(eps)
        return Seed(alpha0, beta0, log_c0, "C0 = K eps^p")
    if branch == "fujita":
        e = 0.5 * (1.0 - mu) + 0.5 * math.sqrt(params.delta)
        alpha0, beta0 = (0.0, e) if e >= 0 else (-e, 0.0)
        log_c0 = math.log(constants.I_fuj) + math.log(eps)
        return Seed(alpha0, beta0, log_c0, "C0 = I eps")
    raise ValueError(f"unknown branch {branch!r}")


def start_table(params: ModelParams, branch: str, constants: IterationConstants | None = None) -> IterationTable:
    constants = constants or IterationConstants()
    seed = initial_exponents(params, branch, constants)
    return IterationTable(params, constants, branch, [(0, seed.alpha0, seed.beta0, seed.log_C0)])


def advance(table: IterationTable, constants: IterationConstants | None = None) -> tuple:
    """Append and return row j+1 of the recursion."""
    constants = constants or table.constants
    p = table.params
    r2 = table.r2
    j, a, b, log_c = table.rows[-1]
    nxt_b = r2 + 3.0 + p.p * b
    row = (
        j + 1,
        r2 + 1.0 + p.n * (p.ell + 1.0) * (p.p - 1.0) + p.p * a,
        nxt_b,
        math.log(constants.C_frame) + p.p * log_c - 2.0 * math.log(nxt_b),
    )
    table.rows.append(row)
    return row


def build_table(params: ModelParams, branch: str, jmax: int,
                constants: IterationConstants | None = None) -> IterationTable:
    table = start_table(params, branch, constants)
    for _ in range(jmax):
        advance(table)
    return table


@dataclass(frozen=True)
class DerivedConstants:
    D: float
    D_tilde: float
    D_hat: float
    j0: int
    log_D: float
    log_D_tilde: float
    log_D_hat: float


def derived_constants(params: ModelParams, branch: str,
                      constants: IterationConstants | None = None) -> DerivedConstants:
    """D, D~, D^ and j0.  For the Fujita branch the data constant I takes the role of K."""
    constants = constants or IterationConstants()
    rep = critical_exponent(params)
    p = params.p
    seed = initial_exponents(params, branch, constants)
    log_d = math.log(constants.C_frame) - 2.0 * math.log((rep.r2 + 3.0) / (p - 1.0) + seed.beta0)
    data_const = constants.K_str if branch == "strauss" else constants.I_fuj
    log_dt = math.log(data_const) + log_d / (p - 1.0) - 2.0 * p * math.log(p) / (p - 1.0) ** 2
    log_dh = -((rep.r2 + 3.0) / (p - 1.0) + seed.beta0) * math.log(2.0) + log_dt
    j0 = max(0, math.ceil(log_d / (2.0 * math.log(p)) - p / (p - 1.0)))
    return DerivedConstants(
        math.exp(log_d), math.exp(log_dt), math.exp(log_dh), j0, log_d, log_dt, log_dh
    )


def closed_form(j: int, params: ModelParams, branch: str,
                constants: IterationConstants | None = None) -> dict:
    """Closed forms of alpha_j, beta_j, log C_j and the lower bound on log C_j.

    The exact log C_j unrolls the recursion with the closed-form beta_k;
    ``log_C_bound`` is p^j (log C0 - 2p log p/(p-1)^2 + log D/(p-1)), valid for j >= j0.
    """
    constants = constants or IterationConstants()
    rep = critical_exponent(params)
    n, ell, p = params.n, params.ell, params.p
    r2 = rep.r2
    seed = initial_exponents(params, branch, constants)
    a_shift = (r2 + 1.0) / (p - 1.0) + n * (ell + 1.0)
    b_shift = (r2 + 3.0) / (p - 1.0)
    pj = p**j

    def beta(k):
        return (b_shift + seed.beta0) * p**k - b_shift

    log_c = pj * seed.log_C0
    log_cf = math.log(constants.C_frame)
    for k in range(1, j + 1):
        log_c += p ** (j - k) * (log_cf - 2.0 * math.log(beta(k)))
    dc = derived_constants(params, branch, constants)
    bound = pj * (seed.log_C0 - 2.0 * p * math.log(p) / (p - 1.0) ** 2 + dc.log_D / (p - 1.0))
    return {
        "alpha": (a_shift + seed.alpha0) * pj - a_shift,
        "beta": beta(j),
        "log_C": log_c,
        "log_C_bound": bound,
    }


def envelope_exponent(params: ModelParams, branch: str,
                      constants: IterationConstants | None = None) -> float:
    """Coefficient E of log t inside the p^j factor: 2/(p-1) + beta0 - alpha0 - n(l+1)."""
    seed = initial_exponents(params, branch, constants)
    p = params.p
    return 2.0 / (p - 1.0) + seed.beta0 - seed.alpha0 - params.n * (params.ell + 1.0)


def _log_prefactor(params: ModelParams, branch: str, constants: IterationConstants) -> float:
    """log of D^ eps^p (Strauss) or C~ eps (Fujita)."""
    if branch == "fujita" and constants.C_tilde is not None:
        return math.log(constants.C_tilde) + math.log(params.eps)
    # the data constant (K or I) is already folded into D~ and hence D^
    dc = derived_constants(params, branch, constants)
    q = params.p if branch == "strauss" else 1.0
    return dc.log_D_hat + q * math.log(params.eps)


def log_envelope(t: float, j: int, params: ModelParams, branch: str,
                 constants: IterationConstants | None = None) -> float:
    constants = constants or IterationConstants()
    T1 = constants.T1
    if not t > T1:
        raise DomainError(f"envelope needs t > T1 = {T1}, got {t}")
    rep = critical_exponent(params)
    p = params.p
    r2 = rep.r2
    inner = _log_prefactor(params, branch, constants) + envelope_exponent(params, branch, constants) * math.log(t)
    a_shift = (r2 + 1.0) / (p - 1.0)
    return (
        p**j * inner
        + (a_shift + params.n * (params.ell + 1.0)) * math.log(t)
        - a_shift * math.log(t - T1)
    )


def envelope(t: float, j: int, params: ModelParams, branch: str,
             constants: IterationConstants | None = None) -> float:
    """Lower bound for U(t) after j iterations; +inf once its log exceeds 700."""
    lv = log_envelope(t, j, params, branch, constants)
    if lv > LOG_OVERFLOW:
        return math.inf
    return math.exp(lv)


@dataclass(frozen=True)
class BlowupTime:
    t_star: float
    exponent: float
    eps0_bound: float
    branch: str


def envelope_blowup_time(params: ModelParams, branch: str,
                         constants: IterationConstants | None = None) -> BlowupTime:
    """Time beyond which the envelope diverges as j -> infinity.

    ``eps0_bound`` is the largest eps for which t_star >= 2 T1, so that the
    simplified envelope applies at every t > t_star.
    """
    constants = constants or IterationConstants()
    _check_branch(params, branch)
    E = envelope_exponent(params, branch, constants)
    if not E > 0:
        raise EmptyRange(f"envelope exponent {E} <= 0 on the {branch} branch")
    log_a = _log_prefactor(params, branch, constants)
    t_star = math.exp(-log_a / E)
    q = params.p if branch == "strauss" else 1.0
    # A(eps) = A(1) eps^q and t_star(eps) = 2 T1  <=>  eps = (2T1)^(-E/q) A(1)^(-1/q)
    log_a1 = log_a - q * math.log(params.eps)
    eps0 = math.exp((-E * math.log(2.0 * constants.T1) - log_a1) / q)
    return BlowupTime(t_star, E, eps0, branch)
