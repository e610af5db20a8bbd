"""Command-line front end: spectra, trajectories, sweeps and figure data.

Usage::

    ep3 spectrum --mu-list 0,1,2
    ep3 fig1a --compression-max 1000 --out fig1a.csv
    ep3 classical-check --mu-list 1 --n-mc 100000 --seed 7 --format json

Settings are layered: command-line flags override a ``key=value`` config
file (``--config`` or the ``EP3_CONFIG`` environment variable), which
overrides the built-in defaults.  Exit codes: 0 success, 2 configuration
error, 3 domain error.  Nothing is written unless the command succeeds.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraState, biorthogonal_product, eigensystem
from .classical import compare_with_exact, sample_wigner
from .constants import DomainError, PhysicalConstants, PreconditionError
from .observables import analytic_period_tau, measure_period_and_visibility
from .propagation import CSV_COLUMNS as TRAJECTORY_COLUMNS
from .propagation import FrequencyProfile, evolve_to_tau, exact_trajectory, tau_grid
from .protocol import CSV_COLUMNS as PROTOCOL_COLUMNS
from .protocol import ExperimentPlan, run_protocol

SCHEMA_VERSION = 1
COMMANDS = ("spectrum", "evolve", "sweep", "classical-check", "experiment", "fig1a", "fig1b")

DEFAULT_MU_LISTS = {
    "spectrum": (-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0),
    "sweep": (0.25, 0.5, 1.0, 1.5, 1.9),
    "classical-check": (0.0, 0.5, 1.0, 2.0, 2.5),
    "fig1a": (0.5, 1.0, 1.5, 2.0, 2.5),
    "fig1b": (0.5, 1.0, 1.5, 2.0, 2.5),
}

DEFAULTS = {
    "mu": 1.0,
    "mu_list": None,
    "omega0": 1.0,
    "compression_max": 1e3,
    "samples_per_period": 512,
    "n_mc": 100_000,
    "seed": 7,
    "n_times": 64,
    "out": None,
    "format": "csv",
    "hbar": 1.0,
    "mass": 1.0,
}

CLASSICAL_GRID_POINTS = 50


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    mu: float
    mu_list: tuple
    omega0: float
    compression_max: float
    samples_per_period: int
    n_mc: int
    seed: int
    n_times: int
    output_path: str | None
    format: str
    hbar: float
    mass: float

    @property
    def constants(self):
        return PhysicalConstants(self.hbar, self.mass)


def _parse_mu_list(value):
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    return tuple(float(v) for v in str(value).replace(" ", "").split(",") if v)


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    settings = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        settings[key] = value
    return settings


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ep3", description="Harmonic trap ramped at constant adiabatic parameter.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--mu", type=float)
    parser.add_argument("--mu-list", dest="mu_list", help="comma-separated values")
    parser.add_argument("--omega0", type=float)
    parser.add_argument("--compression-max", dest="compression_max", type=float)
    parser.add_argument("--samples-per-period", dest="samples_per_period", type=int)
    parser.add_argument("--n-mc", dest="n_mc", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--n-times", dest="n_times", type=int)
    parser.add_argument("--out", help="output file ('-' or omitted for stdout)")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--config", help="key=value settings file (default: $EP3_CONFIG)")
    parser.add_argument("--hbar", type=float)
    parser.add_argument("--mass", type=float)
    return parser


def make_config(args, environ=os.environ):
    """Merge defaults, config file and flags into a validated RunConfig."""
    settings = dict(DEFAULTS)
    config_path = args.config or environ.get("EP3_CONFIG")
    if config_path:
        settings.update(read_config_file(config_path))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value

    try:
        mu_list = settings["mu_list"]
        mu_list = _parse_mu_list(mu_list) if mu_list is not None else None
        cfg = RunConfig(
            command=args.command,
            mu=float(settings["mu"]),
            mu_list=mu_list or DEFAULT_MU_LISTS.get(args.command, (float(settings["mu"]),)),
            omega0=float(settings["omega0"]),
            compression_max=float(settings["compression_max"]),
            samples_per_period=int(settings["samples_per_period"]),
            n_mc=int(settings["n_mc"]),
            seed=int(settings["seed"]),
            n_times=int(settings["n_times"]),
            output_path=settings["out"] or None,
            format=str(settings["format"]),
            hbar=float(settings["hbar"]),
            mass=float(settings["mass"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid setting: {exc}") from exc
    _validate(cfg)
    return cfg


def _validate(cfg):
    numbers = [cfg.mu, cfg.omega0, cfg.compression_max, cfg.hbar, cfg.mass, *cfg.mu_list]
    if not all(math.isfinite(v) for v in numbers):
        raise ConfigError("numeric settings must be finite")
    if not cfg.mu_list:
        raise ConfigError("mu list is empty")
    if cfg.omega0 <= 0 or cfg.hbar <= 0 or cfg.mass <= 0:
        raise ConfigError("omega0, hbar and mass must be positive")
    if cfg.compression_max <= 1:
        raise ConfigError("compression_max must exceed 1")
    if cfg.samples_per_period < 64:
        raise ConfigError("samples_per_period must be at least 64")
    if cfg.n_mc < 2 or cfg.n_times < 1:
        raise ConfigError("n_mc must be >= 2 and n_times >= 1")
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    path = cfg.output_path
    if path and path != "-":
        parent = os.path.dirname(os.path.abspath(path))
        if os.path.isdir(path) or not os.path.isdir(parent):
            raise ConfigError(f"cannot write to {path!r}")


def _tau_end(mu, compression_max):
    # a constant trap has no compression; use the |mu| = 1 scale
    return math.log(compression_max) / (abs(mu) if mu != 0 else 1.0)


def _table(columns, rows):
    return {"columns": list(columns), "rows": [list(r) for r in rows]}


def cmd_spectrum(cfg):
    columns = ("mu", "E0_re", "E0_im", "Eplus_re", "Eplus_im", "Eminus_re", "Eminus_im",
               "is_ep", "nilpotency_index", "biorthogonal_product")
    rows = []
    for mu in cfg.mu_list:
        spec = eigensystem(mu)
        values = [mu]
        for e in spec.eigenvalues:
            values += [float(np.real(e)) + 0.0, float(np.imag(e)) + 0.0]
        values += [spec.is_ep, spec.nilpotency_index, biorthogonal_product(mu)]
        rows.append(values)
    return _table(columns, rows)


def cmd_evolve(cfg):
    profile = FrequencyProfile(cfg.omega0, cfg.mu)
    state = AlgebraState.ground(cfg.omega0, constants=cfg.constants)
    tau_end = _tau_end(cfg.mu, cfg.compression_max)
    taus = tau_grid(cfg.mu, tau_end, cfg.samples_per_period)
    if taus[-1] < tau_end * (1 - 1e-12):
        # finish exactly at the requested compression factor
        taus = np.append(taus, tau_end)
    traj = exact_trajectory(state, profile, taus)
    return _table(TRAJECTORY_COLUMNS, traj.rows())


def cmd_sweep(cfg):
    columns = ("mu", "regime", "T_measured", "T_analytic", "V_measured", "V_analytic",
               "rho_max", "rho_min")
    rows = []
    for mu in cfg.mu_list:
        period = analytic_period_tau(mu)
        tau_end = 4 * period if math.isfinite(period) else _tau_end(mu, cfg.compression_max)
        profile = FrequencyProfile(cfg.omega0, mu)
        state = AlgebraState.ground(cfg.omega0, constants=cfg.constants)
        traj = exact_trajectory(state, profile, tau_grid(mu, tau_end, cfg.samples_per_period))
        report = measure_period_and_visibility(traj).to_dict()
        rows.append([report[c] for c in columns])
    return _table(columns, rows)


def cmd_classical_check(cfg):
    columns = ("mu", "t", "tau", "h_mc", "h_exact", "z_h", "l_mc", "l_exact", "z_l",
               "d_mc", "d_exact", "z_d")
    state = AlgebraState.ground(cfg.omega0, constants=cfg.constants)
    ens = sample_wigner(state, cfg.n_mc, cfg.seed, cfg.constants)
    rows = []
    for mu in cfg.mu_list:
        profile = FrequencyProfile(cfg.omega0, mu)
        taus = np.linspace(0.0, _tau_end(mu, cfg.compression_max), CLASSICAL_GRID_POINTS)
        exact = [evolve_to_tau(state, profile, tau) for tau in taus]
        for row in compare_with_exact(ens, profile, taus, exact):
            rows.append([mu] + [row[c] for c in columns[1:]])
    return _table(columns, rows)


def cmd_experiment(cfg):
    plan = ExperimentPlan(cfg.omega0, cfg.omega0 * cfg.compression_max, cfg.mu,
                          n_times=cfg.n_times, constants=cfg.constants)
    return _table(PROTOCOL_COLUMNS, [rec.row() for rec in run_protocol(plan)])


def figure_grid(mu_list, compression_max, samples_per_period):
    """Log-spaced compression factors fine enough for every mu in ``mu_list``."""
    log_k = math.log(compression_max)
    n = 2
    for mu in mu_list:
        period = analytic_period_tau(mu)
        step = (period if math.isfinite(period) else 2 * math.pi) / samples_per_period
        n = max(n, math.ceil(_tau_end(mu, compression_max) / step) + 1)
    return np.linspace(0.0, log_k, n)


def _figure(cfg, column):
    log_k = figure_grid(cfg.mu_list, cfg.compression_max, cfg.samples_per_period)
    state = AlgebraState.ground(cfg.omega0, constants=cfg.constants)
    columns = ["compression_factor"]
    data = [np.exp(log_k)]
    for mu in cfg.mu_list:
        profile = FrequencyProfile(cfg.omega0, mu)
        traj = exact_trajectory(state, profile, log_k / (abs(mu) if mu != 0 else 1.0))
        columns.append(f"{column}_mu={mu:g}")
        if column == "rho":
            data.append(traj.rho)
        else:
            # 2 m w <x^2> / hbar, equal to 1 in the initial ground state
            data.append(2 * traj.x2_scaled / cfg.hbar)
    rows = [[float(c[i]) for c in data] for i in range(len(log_k))]
    return _table(columns, rows)


def cmd_fig1a(cfg):
    return _figure(cfg, "rho")


def cmd_fig1b(cfg):
    return _figure(cfg, "x2w")


HANDLERS = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "classical-check": cmd_classical_check,
    "experiment": cmd_experiment,
    "fig1a": cmd_fig1a,
    "fig1b": cmd_fig1b,
}


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return None if not math.isfinite(v) else float(v)
    return v


def render(cfg, table):
    if cfg.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": cfg.command,
            "rows": [
                {c: _json_value(v) for c, v in zip(table["columns"], row)}
                for row in table["rows"]
            ],
        }
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table["columns"])
    for row in table["rows"]:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def run(cfg):
    """Execute a validated configuration and return the rendered output."""
    return render(cfg, HANDLERS[cfg.command](cfg))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        text = run(cfg)
    except ConfigError as exc:
        print(f"ep3: configuration error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, PreconditionError) as exc:
        print(f"ep3: {exc}", file=sys.stderr)
        return 3
    if cfg.output_path and cfg.output_path != "-":
        try:
            with open(cfg.output_path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"ep3: cannot write output: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
