"""Configuration files, experiment runs and CSV output.

Config files hold ``key = value`` lines with ``#`` comments. Thresholds
accept a ``dB`` suffix and powers a ``dBm`` suffix; everything is stored
linearly. Run as ``python -m iotaoi <command> [config]``.

Exit codes: 0 success, 1 usage or parse error, 2 numerical failure,
3 a ``compare`` tolerance was exceeded.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import warnings
from dataclasses import dataclass, field, fields
from typing import Optional

from . import analytics, jm_cell, simulator
from .errors import IotAoiError, NumericalError, ParameterError, SimulationError
from .model import NetworkParams, check, db_to_linear

COMMANDS = ("analytic", "simulate", "compare", "sweep", "fit-area")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_TOLERANCE = 0, 1, 2, 3

DB_KEYS = {"beta_b", "beta_d"}
DBM_KEYS = {"p_b", "p_d", "p_max"}
_PARAM_FIELDS = {f.name: f for f in fields(NetworkParams)}


class ConfigError(IotAoiError, ValueError):
    code = "CONFIG_PARSE"


# Figure presets: (fixed overrides, sweep_param, sweep_values, series_param, series_values)
PRESETS = {
    "fig4_left": ({}, "beta_d", [db_to_linear(x) for x in (-10, -5, 0, 5, 10)], "epsilon", [0.0, 0.5, 1.0]),
    "fig4_mid": ({}, "beta_b", [db_to_linear(x) for x in (-10, -5, 0, 5, 10)], "epsilon", [0.0, 0.5, 1.0]),
    "fig6_left": ({}, "beta_b", [db_to_linear(x) for x in (-10, -5, 0, 3, 5, 10)], "epsilon", [0.0, 1.0]),
    "fig6_mid": ({}, "jm_radius", [25.0, 30.0, 40.0, 50.0, 60.0], "epsilon", [0.0, 1.0]),
    "fig6_right": ({}, "p_b", [db_to_linear(x) for x in (80, 90, 100, 110, 120)], "epsilon", [0.0, 1.0]),
    "fig7": ({}, "lambda_d", [k * 1e-4 for k in (5, 10, 20, 40)], "access_mode", ["co-channel", "orthogonal"]),
    "fig7_left": (
        {"beta_b": 1.0},
        "jm_radius",
        [25.0, 30.0, 40.0, 50.0, 60.0, 70.0],
        "epsilon",
        [0.0, 0.3, 1.0],
    ),
}


@dataclass
class ExperimentConfig:
    params: NetworkParams = field(default_factory=NetworkParams)
    command: str = "analytic"
    sweep_param: Optional[str] = None
    sweep_values: list = field(default_factory=list)
    series_param: Optional[str] = None
    series_values: list = field(default_factory=list)
    preset: Optional[str] = None
    n_realizations: int = 2000
    n_slots: int = 1000
    master_seed: int = 1
    output_path: Optional[str] = None
    window_side: Optional[float] = None
    workers: int = 1
    eq15_as_printed: bool = False
    corollary5_variant: bool = False
    tol_p_d: float = 0.05
    tol_m_b: float = 0.10
    tol_delta: float = 0.15

    def points(self):
        """Yield ``(series_value, sweep_value, params)`` for every row."""
        series = self.series_values or [None]
        sweep = self.sweep_values or [None]
        for s in series:
            base = self.params if s is None else _with(self.params, self.series_param, s)
            for v in sweep:
                yield s, v, (base if v is None else _with(base, self.sweep_param, v))


def _with(params, name, value):
    changes = {name: value}
    if name == "p_max":
        changes["jm_radius"] = None
    return params.with_(**changes)


_CONFIG_KEYS = {
    "command": str,
    "preset": str,
    "sweep_param": str,
    "sweep_values": str,
    "series_param": str,
    "series_values": str,
    "n_realizations": int,
    "n_slots": int,
    "master_seed": int,
    "output_path": str,
    "window_side": float,
    "workers": int,
    "eq15_as_printed": bool,
    "corollary5_variant": bool,
    "tol_p_d": float,
    "tol_m_b": float,
    "tol_delta": float,
}


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_param_value(name: str, text: str):
    """Convert one parameter value to its linear, typed form."""
    t = text.strip()
    if name == "access_mode":
        return t
    low = t.lower()
    if name in DBM_KEYS and (low.endswith("dbm") or low.endswith("db")):
        return db_to_linear(float(t[: -3 if low.endswith("dbm") else -2]))
    if name in DB_KEYS and low.endswith("db"):
        return db_to_linear(float(t[:-2]))
    if low in ("none", "") and name in ("p_max", "jm_radius"):
        return None
    return float(t)


def _split_values(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _where(lineno):
    return f"line {lineno}" if lineno else "override"


def _check_key(key, where):
    if key not in _CONFIG_KEYS and key not in _PARAM_FIELDS:
        raise ConfigError(f"{where}: unknown key {key!r}", code="UNKNOWN_PARAM")


def parse_config(text: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Parse and validate a ``key = value`` experiment description.

    ``overrides`` (key to value text) replace entries from ``text``.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        key = key.lower()
        _check_key(key, f"line {lineno}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}", line=lineno)
        raw[key] = (lineno, value)
    for key, value in (overrides or {}).items():
        key = key.lower()
        _check_key(key, "override")
        raw[key] = (0, str(value))

    cfg = ExperimentConfig()
    pkw = {}
    for key, (lineno, value) in raw.items():
        try:
            if key in _PARAM_FIELDS:
                pkw[key] = parse_param_value(key, value)
            elif key in ("sweep_values", "series_values"):
                pass  # converted once the parameter name is known
            else:
                typ = _CONFIG_KEYS[key]
                setattr(cfg, key, _parse_bool(value) if typ is bool else typ(value))
        except ValueError as exc:
            raise ConfigError(f"{_where(lineno)}: bad value for {key!r}: {exc}", line=lineno) from None
    if "p_max" in pkw and "jm_radius" not in pkw:
        pkw["jm_radius"] = None

    if cfg.preset is not None:
        if cfg.preset not in PRESETS:
            raise ConfigError(f"unknown preset {cfg.preset!r}; choose from {sorted(PRESETS)}", code="UNKNOWN_PRESET")
        over, sp, sv, rp, rv = PRESETS[cfg.preset]
        for k, v in over.items():
            pkw.setdefault(k, v)
        if "sweep_param" not in raw:
            cfg.sweep_param, cfg.sweep_values = sp, list(sv)
        if "series_param" not in raw:
            cfg.series_param, cfg.series_values = rp, list(rv)
    try:
        cfg.params = NetworkParams(**pkw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    for which in ("sweep", "series"):
        name = getattr(cfg, f"{which}_param")
        if name is None:
            if f"{which}_values" in raw:
                lineno = raw[f"{which}_values"][0]
                raise ConfigError(f"{_where(lineno)}: {which}_values given without {which}_param", line=lineno)
            continue
        if name not in _PARAM_FIELDS:
            raise ConfigError(f"{which}_param {name!r} is not a network parameter", code="UNKNOWN_PARAM")
        if f"{which}_values" in raw:
            lineno, text = raw[f"{which}_values"]
            try:
                vals = [parse_param_value(name, v) for v in _split_values(text)]
            except ValueError as exc:
                raise ConfigError(f"{_where(lineno)}: bad {which} value: {exc}", line=lineno) from None
            setattr(cfg, f"{which}_values", vals)
        if not getattr(cfg, f"{which}_values"):
            raise ConfigError(f"{which}_values must not be empty", code="EMPTY_SWEEP")

    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}; choose from {COMMANDS}", code="UNKNOWN_COMMAND")
    if cfg.n_realizations < 1 or cfg.n_slots < 1:
        raise ConfigError("n_realizations and n_slots must be positive")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _, _, p in cfg.points():
            check(p)
    return cfg


# -- rows ----------------------------------------------------------------------

def _lead(cfg, s, v):
    row = {}
    if cfg.series_param:
        row[cfg.series_param] = s
    if cfg.sweep_param:
        row[cfg.sweep_param] = v
    return row


def analytic_row(cfg, params):
    rep = analytics.analytic_report(params, eq15_as_printed=cfg.eq15_as_printed)
    row = rep.row()
    if not cfg.corollary5_variant:
        row.pop("Delta_1_load_approx")
    return row


def simulate_row(cfg, params):
    n, slots, seed, w, k = cfg.n_realizations, cfg.n_slots, cfg.master_seed, cfg.window_side, cfg.workers
    row = {}
    pd = simulator.estimate_d2d_success(params, max(n, 100), slots, seed, w, k)
    row["P_d"], row["P_d_ci"] = pd.value, pd.ci_half_width
    rates = simulator.success_rates(params, n, slots, seed + 1, w, k)
    for b in (1, 2, -1, -2):
        try:
            est = simulator.estimate_conditional_success_moments(params, [b], n, slots, rates=rates)[b]
            row[f"M_{b}"], row[f"M_{b}_ci"] = est.value, est.ci_half_width
        except SimulationError:
            row[f"M_{b}"], row[f"M_{b}_ci"] = math.nan, math.nan
    samples = simulator.aoi_samples(params, n, slots, seed + 2, w, k)
    moments, diag = simulator.estimate_aoi_moments(params, [1, 2], n, slots, seed + 2, samples=samples)
    for m in (1, 2):
        row[f"Delta_{m}"], row[f"Delta_{m}_ci"] = moments[m].value, moments[m].ci_half_width
    row["zeta_b"] = math.fsum(1.0 / samples.n_cell) / len(samples.n_cell)
    row["ks_assumption"] = diag.ks_distance
    return row


COMPARED = (("P_d", "tol_p_d"), ("M_1", "tol_m_b"), ("M_2", "tol_m_b"), ("Delta_1", "tol_delta"))


def compare_row(cfg, params):
    a = analytic_row(cfg, params)
    s = simulate_row(cfg, params)
    row = {f"{k}_analytic": v for k, v in a.items()}
    row.update({f"{k}_sim": v for k, v in s.items()})
    worst = True
    for name, tol in COMPARED:
        err = abs(s[name] - a[name]) / abs(a[name]) if a[name] else math.inf
        row[f"{name}_rel_err"] = err
        ok = err <= getattr(cfg, tol)
        row[f"{name}_ok"] = ok
        worst = worst and ok
    return row, worst


def fit_area_row(cfg, params):
    lb, ld, J = params.lambda_b, params.lambda_d, params.jm_radius
    model = jm_cell.fit_area_model(lb, J)
    pmf = jm_cell.load_pmf(lb, ld, J, model)
    return {
        "kappa1": model.kappa1,
        "kappa2": model.kappa2,
        "atom_prob": model.atom_prob,
        "mean_area": model.mean_area,
        "second_moment_area": model.second_moment_area,
        "p_empty": pmf.p_empty,
        "mean_load_occupied": jm_cell.load_moment_conditional(pmf, 1),
        "zeta_b": jm_cell.mean_inverse_load(pmf),
    }


# -- run -------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


class _CsvSink:
    """Writes rows as they arrive; the header comes from the first row."""

    def __init__(self, stream):
        self.w = csv.writer(stream, lineterminator="\r\n")
        self.stream = stream
        self.header = None

    def write(self, row):
        if self.header is None:
            self.header = list(row)
            self.w.writerow(self.header)
        self.w.writerow([_fmt(row.get(k)) for k in self.header])
        self.stream.flush()

    def error(self, exc):
        n = len(self.header) if self.header else 1
        self.w.writerow(["ERROR", str(exc)] + [""] * max(0, n - 2))
        self.stream.flush()


def run(cfg: ExperimentConfig, out=None, log=None) -> int:
    """Execute ``cfg``; CSV goes to ``out`` (or ``cfg.output_path``), summary to ``log``."""
    log = sys.stdout if log is None else log
    close = False
    if out is None:
        if cfg.output_path:
            out = open(cfg.output_path, "w", newline="", encoding="utf-8")
            close = True
        else:
            out = sys.stdout
    sink = _CsvSink(out)
    status = EXIT_OK
    command = "analytic" if cfg.command == "sweep" else cfg.command
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for s, v, params in cfg.points():
                row = _lead(cfg, s, v)
                if command == "analytic":
                    row.update(analytic_row(cfg, params))
                elif command == "simulate":
                    row.update(simulate_row(cfg, params))
                elif command == "compare":
                    r, ok = compare_row(cfg, params)
                    row.update(r)
                    if not ok:
                        status = EXIT_TOLERANCE
                else:
                    row.update(fit_area_row(cfg, params))
                sink.write(row)
    except (NumericalError, SimulationError) as exc:
        sink.error(exc)
        print(f"numerical failure: {exc}", file=log)
        return EXIT_NUMERICAL
    except ParameterError as exc:
        sink.error(exc)
        print(f"invalid parameters: {exc}", file=log)
        return EXIT_USAGE
    finally:
        if close:
            out.close()
    where = cfg.output_path or "stdout"
    n_rows = max(1, len(cfg.sweep_values)) * max(1, len(cfg.series_values))
    print(f"{cfg.command}: {n_rows} row(s) written to {where}", file=log)
    if status == EXIT_TOLERANCE:
        print("compare: at least one relative error exceeded its tolerance", file=log)
    return status


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m iotaoi", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("config", nargs="?", help="key = value file (defaults when omitted)")
    ap.add_argument("-o", "--output", help="CSV path (default: stdout)")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="extra config line")
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    text = ""
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"cannot read config: {exc}", file=sys.stderr)
            return EXIT_USAGE
    overrides = {}
    for item in args.set:
        if "=" not in item:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return EXIT_USAGE
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    overrides["command"] = args.command
    if args.output:
        overrides["output_path"] = args.output
    try:
        cfg = parse_config(text, overrides)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log = sys.stdout if args.output else sys.stderr
    try:
        return run(cfg, log=log)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the final flush
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
