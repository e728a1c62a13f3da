"""Command-line front end: ``epdt {exponents,validate,simulate,iterate,sweep,scan}``.

Configuration comes from an optional flat JSON object (``--config``) and is
overridden key by key with ``--key value`` flags.  Exit codes: 0 ok or
survived, 1 usage/config error, 2 hypothesis violation, 3 blow-up,
4 step underflow.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import constructions as cons
from . import diagnostics as diag
from . import experiments as exp
from . import iteration as it
from . import specfun
from .errors import EmptyRange, EPDTError, InsufficientData, NegativeDiscriminant
from .exponents import ModelParams, critical_exponent, lifespan_rates
from .solver import SERIES_COLUMNS, SolverConfig, run

EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_BLOWUP, EXIT_UNDERFLOW = 0, 1, 2, 3, 4
DELTA_MSG = "delta negative: the blow-up estimates assume (mu-1)^2 - 4 nu2 >= 0"
STATUS_EXIT = {"survived": EXIT_OK, "blew_up": EXIT_BLOWUP, "step_underflow": EXIT_UNDERFLOW}


class ConfigError(ValueError):
    pass


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    text = str(text).strip()
    return [float(x) for x in text.split(",") if x.strip()] if text else []


def _opt(kind):
    def parse(text):
        if text is None or (isinstance(text, str) and text.lower() in ("none", "null", "")):
            return None
        return kind(text)
    return parse


def _int(text):
    if isinstance(text, float) and not text.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(text)


@dataclass(frozen=True)
class Key:
    section: str
    parse: object
    default: object
    help: str


DEFAULT_EPS_GRID = [0.4, 0.3, 0.2, 0.15, 0.1, 0.07, 0.05]
DEFAULT_P_GRID = [2.0, 2.5, 3.0, 3.5, 4.0]

SCHEMA = {
    # model
    "n": Key("model", _int, 1, "space dimension"),
    "ell": Key("model", float, 0.0, "speed exponent l > -1"),
    "mu": Key("model", float, 2.0, "damping coefficient mu >= 0"),
    "nu2": Key("model", float, 0.0, "mass coefficient nu^2 >= 0"),
    "p": Key("model", float, 2.0, "power of the nonlinearity"),
    "eps": Key("model", float, 1.0, "data amplitude"),
    "R": Key("model", float, 1.0, "radius of the data support"),
    # solver
    "c_cfl": Key("solver", float, 0.5, "CFL number"),
    "c_react": Key("solver", float, 0.2, "reaction step factor"),
    "U_max": Key("solver", float, 1e6, "blow-up threshold on sup|u|"),
    "dt_min": Key("solver", float, 1e-12, "step underflow threshold"),
    "T_max": Key("solver", float, 50.0, "final time"),
    "output_stride": Key("solver", _int, 20, "record every k-th step"),
    "output_dt": Key("solver", _opt(float), None, "record on a uniform time grid instead"),
    "dx": Key("solver", float, 0.01, "grid spacing"),
    "L": Key("solver", _opt(float), None, "domain radius (default: just contains the cone)"),
    "geometry": Key("solver", _opt(str), None, "line1d or radial (default by n)"),
    "nonlinear": Key("solver", _bool, True, "include |u|^p"),
    "record_U0": Key("solver", _bool, True, "record the weighted functional U0"),
    # data
    "amplitude0": Key("data", float, 1.0, "bump amplitude of u0"),
    "amplitude1": Key("data", float, 0.0, "bump amplitude of u1"),
    # iteration
    "branch": Key("iteration", _opt(str), None, "strauss or fujita (default: strauss when available)"),
    "jmax": Key("iteration", _int, 10, "number of iteration steps"),
    "C_frame": Key("iteration", float, 1.0, "constant of the iteration frame"),
    "K_str": Key("iteration", float, 1.0, "constant of the first Strauss bound"),
    "I_fuj": Key("iteration", float, 1.0, "data integral for the Fujita seed"),
    "T1": Key("iteration", _opt(float), None, "threshold T1 (default: 2 T0 from the test function)"),
    "C_tilde": Key("iteration", _opt(float), None, "Fujita envelope prefactor override"),
    # sweeps and scans
    "eps_grid": Key("sweep", _float_list, DEFAULT_EPS_GRID, "comma-separated eps values"),
    "p_grid": Key("sweep", _float_list, DEFAULT_P_GRID, "comma-separated increasing p values"),
    "max_points": Key("sweep", _int, 8, "fit uses at most this many smallest eps"),
    "jobs": Key("sweep", _opt(_int), None, "worker processes (default: $EPDT_JOBS, else cores)"),
}


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = {k: v.default for k, v in SCHEMA.items()}
    if path:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(raw) - set(SCHEMA))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for k, v in raw.items():
            try:
                cfg[k] = SCHEMA[k].parse(v)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {k}: {exc}") from exc
    cfg.update(overrides)
    return cfg


def model_params(cfg) -> ModelParams:
    return ModelParams(**{k: cfg[k] for k, v in SCHEMA.items() if v.section == "model"})


def solver_config(cfg) -> SolverConfig:
    return SolverConfig(**{k: cfg[k] for k, v in SCHEMA.items() if v.section == "solver"})


def initial_data(cfg) -> cons.InitialData:
    return cons.InitialData(amplitude0=cfg["amplitude0"], amplitude1=cfg["amplitude1"], R=cfg["R"])


# --- formatting -----------------------------------------------------------------------


def machine(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def human(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return format(x, ".6g")
    return str(x)


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return _jsonable(obj.item())
    return obj


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False)


def _print_table(rows, out=None):
    out = out or sys.stdout
    width = max(len(k) for k, _ in rows) if rows else 0
    for k, v in rows:
        print(f"{k:<{width}}  {human(v)}", file=out)


# --- commands -------------------------------------------------------------------------


def cmd_exponents(cfg, args) -> int:
    params = model_params(cfg)
    try:
        report = critical_exponent(params)
    except NegativeDiscriminant as exc:
        print(f"error: {DELTA_MSG} ({exc})", file=sys.stderr)
        return EXIT_HYPOTHESIS
    try:
        rates = lifespan_rates(params)
    except EmptyRange:
        rates = []
    if args.format == "json":
        out = {"params": params.as_dict(), **report.as_dict()}
        print(dump_json(out))
        return EXIT_OK
    rows = [(k, v) for k, v in report.as_dict().items() if k != "rates"]
    _print_table(rows)
    if not rates:
        print("lifespan rates: none (p >= p_crit, no blow-up branch applies)")
    for r in rates:
        tags = [t for t, on in (("binding", r.binding), ("degenerate", r.degenerate)) if on]
        print(f"rate[{r.branch}]  {human(r.rate)}{'  (' + ', '.join(tags) + ')' if tags else ''}")
    return EXIT_OK


def validation_checks(params: ModelParams, order_shift: float = 0.0) -> list:
    """(name, value, tolerance, passed) for every construction and special-function check."""
    ctx = cons.TestFunctionContext(params, order_shift=order_shift)
    closed = params.ell == 0 and params.mu == 2 and params.nu2 == 0
    checks = []

    def add(name, value, tol, passed=None):
        ok = value <= tol if passed is None else passed  # tol None: pass/fail is structural
        checks.append((name, value, tol, bool(ok)))

    add("rho_ode", cons.check_rho_ode(ctx), 1e-6 if closed else 1e-4)
    add("eta_equation", cons.check_eta_equation(ctx.order), 1e-4)
    add("adjoint_pde", cons.check_adjoint_pde(ctx), 1e-4)
    try:
        t0 = cons.find_T0(ctx)
        lo_hi = [min(cons.log_band_margins(ctx, s)) for s in (t0, 3.0 * t0, 10.0 * t0)]
        add("T0_band", t0, None, math.isfinite(t0) and min(lo_hi) >= 0)
    except EPDTError:
        add("T0_band", math.inf, None, False)
    add("wronskian", specfun.wronskian_residual(), 1e-6)
    add("half_integer_K", specfun.half_integer_residual(), 1e-10)
    margin = specfun.large_argument_margin()
    add("large_argument_excess", -margin, 0.0)
    return checks


def cmd_validate(cfg, args) -> int:
    params = model_params(cfg)
    try:
        checks = validation_checks(params, args.inject_order_fault)
    except NegativeDiscriminant as exc:
        print(f"error: {DELTA_MSG} ({exc})", file=sys.stderr)
        return EXIT_HYPOTHESIS
    if args.format == "json":
        print(dump_json({name: {"value": v, "tolerance": tol, "passed": ok} for name, v, tol, ok in checks}))
    else:
        for name, v, tol, ok in checks:
            print(f"{'PASS' if ok else 'FAIL'}  {name:<22} {human(v):>12}  tol {human(tol)}")
    failed = [c[0] for c in checks if not c[3]]
    if failed:
        print("failing checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def write_series_csv(series, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_COLUMNS)
        cols = [series[c] for c in SERIES_COLUMNS]
        for i in range(len(cols[0])):
            w.writerow([machine(float(c[i])) for c in cols])


def simulation_summary(res, params) -> dict:
    exponents = None
    diagnostics = {"t_final": res.t_final, "steps": res.steps, "grid": res.grid}
    residuals = {"ode_identity": None, "lower_bounds": None}
    if params.delta >= 0:
        exponents = critical_exponent(params).as_dict()
        if res.config.record_U0:
            diagnostics["U0_min"] = float(min(res.series["U0"]))
    try:
        rep = diag.check_ode_identity(res.series, params, nonlinear=res.config.nonlinear)
        residuals["ode_identity"] = {"residual": rep.residual, "absolute": rep.absolute,
                                     "window": list(rep.window)}
    except EPDTError as exc:
        residuals["ode_identity"] = {"skipped": str(exc)}
    if params.delta >= 0 and res.config.record_U0:
        ctx = cons.TestFunctionContext(params)
        lb = diag.check_lower_bounds(res.series, params, ctx)
        residuals["lower_bounds"] = {f.name: f.constant for f in lb.fits}
    return {
        "params": params.as_dict(),
        "exponents": exponents,
        "status": res.status,
        "T_num": res.T_num,
        "diagnostics": diagnostics,
        "residuals": residuals,
    }


def cmd_simulate(cfg, args) -> int:
    params = model_params(cfg)
    res = run(params, solver_config(cfg), initial_data(cfg))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_series_csv(res.series, out_dir / "series.csv")
    summary = simulation_summary(res, params)
    (out_dir / "summary.json").write_text(dump_json(summary) + "\n")
    _print_table([("status", res.status), ("T_num", res.T_num), ("t_final", res.t_final),
                  ("steps", res.steps), ("series", str(out_dir / "series.csv")),
                  ("summary", str(out_dir / "summary.json"))])
    return STATUS_EXIT[res.status]


ITERATION_COLUMNS = ("j", "alpha_rec", "alpha_closed", "beta_rec", "beta_closed", "logC_rec", "logC_bound")


def _pick_branch(params, requested):
    rates = lifespan_rates(params)  # raises EmptyRange when p >= p_crit
    available = [r.branch for r in rates if not r.degenerate]
    if requested:
        return requested
    if "strauss" in available:
        return "strauss"
    if "fujita" in available:
        return "fujita"
    raise EmptyRange("no blow-up branch applies")


def cmd_iterate(cfg, args) -> int:
    params = model_params(cfg)
    try:
        branch = _pick_branch(params, cfg["branch"])
        it._check_branch(params, branch)
        T1 = cfg["T1"] if cfg["T1"] is not None else cons.TestFunctionContext(params).T1
        consts = it.IterationConstants(cfg["C_frame"], cfg["K_str"], cfg["I_fuj"], T1, cfg["C_tilde"])
        table = it.build_table(params, branch, cfg["jmax"], consts)
        dc = it.derived_constants(params, branch, consts)
    except (NegativeDiscriminant, EmptyRange) as exc:
        msg = str(exc)
        if isinstance(exc, NegativeDiscriminant):
            msg = f"{DELTA_MSG} ({exc})"
        elif "no blow-up branch applies" not in msg:
            msg = f"no blow-up branch applies: {msg}"
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    try:
        bt = it.envelope_blowup_time(params, branch, consts)
        t_star, eps0 = bt.t_star, bt.eps0_bound
    except EmptyRange:
        t_star = eps0 = None
    rows = []
    for j, a, b, lc in table.rows:
        cf = it.closed_form(j, params, branch, consts)
        rows.append((j, a, cf["alpha"], b, cf["beta"], lc, cf["log_C_bound"]))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "iteration.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ITERATION_COLUMNS)
        for row in rows:
            w.writerow([machine(x) for x in row])
    _print_table([("branch", branch), ("T1", T1), ("D", dc.D), ("D_tilde", dc.D_tilde),
                  ("D_hat", dc.D_hat), ("j0", dc.j0), ("envelope_blowup_time", t_star),
                  ("eps0_bound", eps0), ("table", str(path))])
    print("  ".join(f"{c:>12}" for c in ITERATION_COLUMNS))
    for row in rows:
        print("  ".join(f"{human(x):>12}" for x in row))
    return EXIT_OK


def _jobs(cfg) -> int:
    return cfg["jobs"] if cfg["jobs"] is not None else exp.default_jobs()


def cmd_sweep(cfg, args) -> int:
    params = model_params(cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.fit_csv:
        records = exp.read_sweep_csv(args.fit_csv)
    else:
        if not cfg["eps_grid"]:
            print("error: empty eps grid", file=sys.stderr)
            return EXIT_CONFIG
        records = exp.lifespan_sweep(params, cfg["eps_grid"], solver_config(cfg),
                                     initial_data(cfg), jobs=_jobs(cfg))
        exp.write_sweep_csv(records, out_dir / "sweep.csv")
        for r in records:
            print(f"eps {human(r.eps):>10}  {r.status:<15} T_num {human(r.T_num):>10}  {r.wallclock:.2f}s")
    try:
        fit = exp.fit_rate(records, params, cfg["max_points"])
    except InsufficientData as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NegativeDiscriminant, EmptyRange) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    (out_dir / "fit.json").write_text(dump_json(fit.as_dict()) + "\n")
    print(f"slope {human(fit.slope)} vs theoretical {human(fit.theoretical_rate)} ({fit.branch}); "
          f"relative error {human(fit.relative_error)}, r^2 {human(fit.r_squared)}")
    return EXIT_OK


def cmd_scan(cfg, args) -> int:
    params = model_params(cfg)
    table = exp.p_scan(params, cfg["p_grid"], cfg["eps"], solver_config(cfg), initial_data(cfg),
                       jobs=_jobs(cfg))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "scan.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("p", "status", "T_num", "p_crit"))
        for r in table.rows:
            w.writerow([machine(r.p), r.status, machine(r.T_num), machine(r.p_crit)])
    for r in table.rows:
        print(f"p {human(r.p):>6}  {r.status:<15} T_num {human(r.T_num)}")
    print(f"bracket [{human(table.p_last_blowup)}, {human(table.p_first_survival)}]  "
          f"p_c {human(table.p_crit)}  (survival means no blow-up seen up to T_max)")
    return EXIT_OK


COMMANDS = {
    "exponents": (cmd_exponents, "critical exponents and lifespan rates"),
    "validate": (cmd_validate, "residuals of the test-function constructions"),
    "simulate": (cmd_simulate, "one simulation; writes series.csv and summary.json"),
    "iterate": (cmd_iterate, "iteration table; writes iteration.csv"),
    "sweep": (cmd_sweep, "lifespan sweep over eps with a power-law fit"),
    "scan": (cmd_scan, "blow-up/survival status over a grid of p"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epdt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", help="flat JSON object with any of the keys below")
        sp.add_argument("--format", choices=("table", "json"), default="table")
        sp.add_argument("--out-dir", default=".", help="directory for output files (default: .)")
        if name == "validate":
            sp.add_argument("--inject-order-fault", type=float, nargs="?", const=1e-2, default=0.0,
                            help=argparse.SUPPRESS)
        if name == "sweep":
            sp.add_argument("--fit-csv", help="fit an existing sweep CSV instead of running")
        for key, spec in SCHEMA.items():
            default = spec.default
            if isinstance(default, list):
                default = ",".join(format(x, "g") for x in default)
            sp.add_argument(f"--{key}", dest=f"set_{key}", type=spec.parse, default=argparse.SUPPRESS,
                            metavar=key.upper(), help=f"{spec.help} (default: {default})")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("set_")}
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command][0](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NegativeDiscriminant as exc:
        print(f"error: {DELTA_MSG} ({exc})", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (EPDTError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
