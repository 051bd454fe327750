"""Command-line front end.

Each subcommand reads a run config, evaluates one family of protocols and
writes CSV files plus ``manifest.json`` into the output directory. Exit codes:
0 on success, 1 for usage, config or dataset errors, 2 for model errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .experiments import (
    bcm_curve,
    bcm_presynaptic_curve,
    frequency_sweep,
    quadruplet_sweep,
    six_triplet_sweep,
    stdp_window,
    triplet_grid,
    zero_crossings,
)
from .files import (
    DATASET_COLUMNS,
    DatasetFormatError,
    atomic_write,
    csv_bytes,
    dataset_row,
    format_float,
    json_bytes,
    read_dataset,
    sha256_bytes,
)
from .fitting import FitOptions, fit, multi_start_fit, predict
from .robustness import PerturbationSpec, monte_carlo, retune
from .rules import BIAS_ALIASES, PARAM_NAMES, TripletParams, drift_root

log = logging.getLogger("tripletstdp")

OUT_ENV = "TRIPLETSTDP_OUT"
DEFAULT_OUT = "tripletstdp-out"
SWEEP_TAIL = ("mean_dw", "std_dw", "trials")
DRIFT_TAIL = ("mean_dw_per_s", "std_dw_per_s", "trials")
_ALIAS_OF = {model: alias for alias, model in BIAS_ALIASES.items()}


class UsageError(Exception):
    """Bad invocation, config or input file (exit 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _ms(seconds):
    return seconds * 1000.0


def _s(ms):
    return ms / 1000.0


def _label(value):
    return format_float(value).replace("-", "m").replace(".", "p")


class Run:
    """Collects output files for one invocation and writes them atomically."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.outputs = {}

    def write(self, name, data):
        atomic_write(self.out_dir / name, data)
        self.outputs[name] = sha256_bytes(data)

    def csv(self, name, header, rows):
        self.write(name, csv_bytes(header, rows))


def _sweep_rows(result, convert):
    for row in result.rows():
        *point, mean, std, trials = row
        yield (*convert(point), mean, std, trials)


def _require_triplet(params, command):
    if not isinstance(params, TripletParams):
        raise UsageError(f"{command} needs rule.kind: triplet")
    return params


# ------------------------------------------------------------------ commands


def cmd_window(cfg, params, run, args):
    c = cfg.window
    result = stdp_window(params, [_s(x) for x in c.dt_ms], c.rho_hz, c.n_pairs)
    run.csv("window.csv", ("dt_ms", *SWEEP_TAIL),
            _sweep_rows(result, lambda p: (_ms(p[0]),)))


def cmd_freq(cfg, params, run, args):
    c = cfg.freq
    for dt_ms in c.dt_ms:
        result = frequency_sweep(params, [_s(dt_ms)], c.rho_hz, c.n_pairs)
        run.csv(f"freq_dt_{_label(dt_ms)}ms.csv", ("rho_hz", *SWEEP_TAIL),
                _sweep_rows(result, lambda p: (p[1],)))


def cmd_triplet(cfg, params, run, args):
    c = cfg.triplet
    for kind, timings in c.timings_ms.items():
        result = triplet_grid(params, kind, [(_s(a), _s(b)) for a, b in timings], c.rho_hz, c.n)
        run.csv(f"triplet_{kind}.csv", ("dt1_ms", "dt2_ms", *SWEEP_TAIL),
                _sweep_rows(result, lambda p: (_ms(p[1]), _ms(p[2]))))


def cmd_quad(cfg, params, run, args):
    c = cfg.quad
    result = quadruplet_sweep(params, _s(c.dt_ms), [_s(x) for x in c.T_ms], c.rho_hz, c.n)
    run.csv("quad.csv", ("T_ms", *SWEEP_TAIL), _sweep_rows(result, lambda p: (_ms(p[0]),)))


def cmd_six(cfg, params, run, args):
    c = cfg.six
    result = six_triplet_sweep(params, [(_s(a), _s(b)) for a, b in c.gaps_ms], c.rho_hz, c.n)
    by_kind = {}
    for row in result.rows():
        kind, dt1, dt2, *tail = row
        by_kind.setdefault(kind, []).append((_ms(dt1), _ms(dt2), *tail))
    for kind, rows in by_kind.items():
        run.csv(f"six_{kind}.csv", ("dt1_ms", "dt2_ms", *SWEEP_TAIL), rows)


def cmd_bcm(cfg, params, run, args):
    c = cfg.bcm
    params = _require_triplet(params, "bcm")
    trials = args.trials if args.trials is not None else c.trials
    if c.mode == "presynaptic":
        result = bcm_presynaptic_curve(params, c.rho_post_hz, c.duration_s, trials, cfg.seed)
        run.csv("bcm_presynaptic.csv", ("rho_hz", *DRIFT_TAIL),
                _sweep_rows(result, lambda p: (p[0],)))
        return
    summary = []
    for a3 in c.a3_plus or [params.a3_plus]:
        p = params.replace(a3_plus=a3)
        # every curve reuses the same seed, so curves differ only through a3_plus
        result = bcm_curve(p, c.rho_pre_hz, c.rho_post_hz, c.duration_s, trials, cfg.seed)
        run.csv(f"bcm_a3plus_{_label(a3)}.csv", ("rho_post_hz", *DRIFT_TAIL),
                _sweep_rows(result, lambda q: (q[1],)))
        crossings = zero_crossings(result.column("rho_post"), result.mean)
        summary.append((a3, crossings[0] if crossings.size else np.nan,
                        crossings.size, drift_root(p)))
    run.csv("bcm_crossings.csv",
            ("a3_plus", "first_crossing_hz", "n_crossings", "analytic_root_hz"), summary)


def _dataset(args):
    if not args.dataset:
        raise UsageError(f"{args.command} needs --dataset")
    try:
        return read_dataset(args.dataset)
    except OSError as err:
        raise UsageError(f"cannot read dataset {args.dataset}: {err.strerror}") from None
    except DatasetFormatError as err:
        raise UsageError(f"{args.dataset}: {err}") from None


def _fit_options(cfg):
    c = cfg.fit
    return FitOptions(c.max_iter, c.tol_x, c.tol_f, restarts=c.restarts)


def _run_fit(cfg, params, dataset):
    frozen = cfg.fit.frozen()
    if cfg.fit.n_starts > 1:
        return multi_start_fit(dataset, params, frozen, cfg.fit.n_starts, cfg.seed,
                               _fit_options(cfg))
    return fit(dataset, params, frozen, _fit_options(cfg))


def _param_block(params):
    values = params.as_dict()
    return {
        "model": values,
        "bias_aliases": {_ALIAS_OF[name]: values[name] for name in PARAM_NAMES},
    }


def cmd_fit(cfg, params, run, args):
    params = _require_triplet(params, "fit")
    dataset = _dataset(args)
    result = _run_fit(cfg, params, dataset)
    frozen = cfg.fit.frozen()
    report = {
        "dataset": dataset.name,
        "points": len(dataset),
        "frozen": sorted(frozen),
        "free": [n for n in PARAM_NAMES if n not in frozen],
        "initial": _param_block(params),
        "params": _param_block(result.params),
        "alias_note": "bias-current names are labels for model parameters; values are in "
                      "model units (dimensionless amplitudes, seconds)",
        "nmse": result.nmse,
        "iterations": result.iterations,
        "evaluations": result.evaluations,
        "converged": result.converged,
        "failed": result.failed,
        "message": result.message,
    }
    run.write("fit_report.json", json_bytes(report))
    model = predict(result.params, dataset)
    rows = []
    for i, (point, dw) in enumerate(zip(dataset.points, model)):
        residual = point.dw_exp - dw
        rows.append((i, *dataset_row(point), float(dw), float(residual),
                     float(residual / point.sem)))
    run.csv("residuals.csv", ("index", *DATASET_COLUMNS, "dw_model", "residual", "z"), rows)
    if result.failed:
        raise RuntimeError(f"fit failed: {result.message}")


def cmd_mc(cfg, params, run, args):
    params = _require_triplet(params, "mc")
    dataset = _dataset(args)
    c = cfg.mc
    baseline = params
    if c.fit_baseline:
        base_fit = _run_fit(cfg, params, dataset)
        if base_fit.failed:
            raise RuntimeError(f"baseline fit failed: {base_fit.message}")
        baseline = base_fit.params
    spec = PerturbationSpec(c.sigma_v, c.v_scale, c.n_runs, cfg.seed)
    report = monte_carlo(dataset, baseline, spec)
    header = ("run", "nmse", "failed", *(f"delta_{n}_v" for n in PARAM_NAMES))
    run.csv("mc_runs.csv", header,
            ((i, float(v), bool(f), *map(float, d)) for i, (v, f, d) in
             enumerate(zip(report.nmse, report.failed, report.deltas))))
    summary = list(report.summary().items())
    summary.append(("baseline_params", " ".join(format_float(v) for v in baseline.to_array())))
    if args.retune or c.retune:
        result = retune(dataset, report.worst_perturbation, baseline, cfg.fit.frozen(),
                        _fit_options(cfg), v_scale=c.v_scale)
        summary += [
            ("retune_run", report.worst_index),
            ("retune_before", report.worst_nmse),
            ("retune_nmse", result.nmse),
            ("retune_ratio", result.nmse / report.baseline_nmse
             if report.baseline_nmse > 0 else np.inf),
            ("retune_iterations", result.iterations),
        ]
        summary += [(f"retune_{n}", v) for n, v in result.params.as_dict().items()]
    run.csv("mc_summary.csv", ("key", "value"), summary)


COMMANDS = {
    "window": (cmd_window, "pairing weight change versus spike timing"),
    "freq": (cmd_freq, "pairing weight change versus repetition frequency"),
    "triplet": (cmd_triplet, "pre-post-pre and post-pre-post triplet grids"),
    "quad": (cmd_quad, "quadruplet weight change versus T"),
    "six": (cmd_six, "all six triplet orderings over gap pairs"),
    "bcm": (cmd_bcm, "Poisson drift versus firing rate"),
    "fit": (cmd_fit, "fit rule parameters to a dataset file"),
    "mc": (cmd_mc, "Monte Carlo mismatch campaign on a dataset file"),
}


def build_parser():
    parser = _Parser(prog="tripletstdp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="YAML or JSON run config (defaults apply if omitted)")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--out", help=f"output directory (default: config 'out', ${OUT_ENV}, "
                                     f"or ./{DEFAULT_OUT})")
        p.add_argument("--trials", type=int, help="trials per grid point for stochastic "
                                                  "protocols")
        p.add_argument("-v", "--verbose", action="store_true")
        if name in ("fit", "mc"):
            p.add_argument("--dataset", help="dataset file (CSV)")
        if name == "mc":
            p.add_argument("--retune", action="store_true",
                           help="refit the worst run with its mismatch held fixed")
    return parser


def _out_dir(args, cfg):
    return args.out or cfg.out or os.environ.get(OUT_ENV) or DEFAULT_OUT


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as err:
        print(f"tripletstdp: error: {err}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.trials is not None:
            if args.trials < 1:
                raise UsageError("--trials must be >= 1")
            overrides["bcm"] = cfg.bcm.model_copy(update={"trials": args.trials})
        cfg = cfg.model_copy(update=overrides)
        params = cfg.rule.build()
        run = Run(_out_dir(args, cfg))
        COMMANDS[args.command][0](cfg, params, run, args)
    except (UsageError, ConfigError) as err:
        print(f"tripletstdp: error: {err}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError, ArithmeticError) as err:
        print(f"tripletstdp: model error: {err}", file=sys.stderr)
        return 2
    manifest = {
        "command": args.command,
        "config_sha256": cfg.digest(),
        "config_file": str(args.config) if args.config else None,
        "dataset_file": getattr(args, "dataset", None),
        "dataset_sha256": _file_digest(getattr(args, "dataset", None)),
        "seed": cfg.seed,
        "version": __version__,
        "started_utc": started.isoformat(timespec="seconds"),
        "wall_clock_s": round(time.perf_counter() - t0, 3),
        "outputs": run.outputs,
    }
    run.write("manifest.json", json_bytes(manifest))
    return 0


def _file_digest(path):
    return sha256_bytes(Path(path).read_bytes()) if path else None


if __name__ == "__main__":
    sys.exit(main())
