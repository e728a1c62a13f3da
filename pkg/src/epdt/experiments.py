"""Lifespan sweeps over eps, power-law fits, and p-scans around p_c."""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .constructions import InitialData
from .errors import InsufficientData
from .exponents import ModelParams, critical_exponent, lifespan_rates
from .solver import SolverConfig, run

SWEEP_COLUMNS = ("eps", "status", "T_num", "wallclock_s")


@dataclass(frozen=True)
class SweepRecord:
    eps: float
    status: str
    T_num: float | None
    wallclock: float
    message: str = ""


@dataclass(frozen=True)
class FitReport:
    slope: float
    intercept: float
    r_squared: float
    theoretical_rate: float
    branch: str
    relative_error: float
    points: int

    def as_dict(self) -> dict:
        return asdict(self)


def _one_run(args) -> SweepRecord:
    params, config, data = args
    start = time.perf_counter()
    try:
        res = run(params, config, data)
    except Exception as exc:  # a failed run is recorded, the sweep goes on
        return SweepRecord(params.eps, "error", None, time.perf_counter() - start, str(exc))
    return SweepRecord(params.eps, res.status, res.T_num, time.perf_counter() - start)


def default_jobs() -> int:
    env = os.environ.get("EPDT_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def lifespan_sweep(base: ModelParams, eps_grid, config: SolverConfig,
                   data: InitialData | None = None, jobs: int = 1) -> list[SweepRecord]:
    """One independent run per eps; records come back sorted by eps, largest first."""
    eps_grid = [float(e) for e in eps_grid]
    if any(e <= 0 for e in eps_grid):
        raise ValueError("eps values must be positive")
    data = data or InitialData(R=base.R)
    tasks = [(base.replace(eps=e), config, data) for e in eps_grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_one_run, tasks))
    else:
        records = [_one_run(t) for t in tasks]
    return sorted(records, key=lambda r: -r.eps)


def fit_rate(records, params: ModelParams, max_points: int = 8) -> FitReport:
    """OLS of log T_num on log eps over the smallest-eps blow-up records."""
    usable = sorted((r for r in records if r.status == "blew_up" and r.T_num), key=lambda r: r.eps)
    usable = usable[:max_points]
    if len(usable) < 4:
        raise InsufficientData(f"need >= 4 blow-up records, got {len(usable)}")
    x = np.log([r.eps for r in usable])
    y = np.log([r.T_num for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    binding = next(r for r in lifespan_rates(params) if r.binding)
    theo = -binding.rate
    return FitReport(float(slope), float(intercept), r2, theo, binding.branch,
                     abs(slope - theo) / abs(theo), len(usable))


def fit_rate_from_arrays(eps, T, params: ModelParams, max_points: int = 8) -> FitReport:
    recs = [SweepRecord(float(e), "blew_up", float(t), 0.0) for e, t in zip(eps, T)]
    return fit_rate(recs, params, max_points)


@dataclass(frozen=True)
class ScanRow:
    p: float
    status: str
    T_num: float | None
    p_crit: float


@dataclass(frozen=True)
class ScanTable:
    rows: list
    p_last_blowup: float | None
    p_first_survival: float | None
    p_crit: float


def p_scan(base: ModelParams, p_grid, eps: float, config: SolverConfig,
           data: InitialData | None = None, jobs: int = 1) -> ScanTable:
    """Status at T_max for each p.  "survived" only means no blow-up was seen up to T_max."""
    p_grid = [float(p) for p in p_grid]
    if any(b <= a for a, b in zip(p_grid, p_grid[1:])):
        raise ValueError("p_grid must be increasing")
    data = data or InitialData(R=base.R)
    tasks = [(base.replace(p=p, eps=eps), config, data) for p in p_grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_one_run, tasks))
    else:
        records = [_one_run(t) for t in tasks]
    rows = []
    for (params, _, _), rec in zip(tasks, records):
        p = params.p
        p_c = critical_exponent(params).p_crit if params.delta >= 0 else math.nan
        rows.append(ScanRow(p, rec.status, rec.T_num, p_c))
    blown = [r.p for r in rows if r.status == "blew_up"]
    alive = [r.p for r in rows if r.status == "survived"]
    p_c = critical_exponent(base).p_crit if base.delta >= 0 else math.nan
    return ScanTable(rows, max(blown) if blown else None, min(alive) if alive else None, p_c)


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(x, ".17g")


def write_sweep_csv(records, path, include_wallclock: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        cols = SWEEP_COLUMNS if include_wallclock else SWEEP_COLUMNS[:3]
        w.writerow(cols)
        for r in records:
            row = [_fmt(r.eps), r.status, _fmt(r.T_num)]
            if include_wallclock:
                row.append(format(r.wallclock, ".6g"))
            w.writerow(row)


def read_sweep_csv(path) -> list[SweepRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            T = row.get("T_num") or ""
            out.append(SweepRecord(float(row["eps"]), row["status"], float(T) if T else None,
                                   float(row.get("wallclock_s") or 0.0)))
    return out
