"""Command line front end: config-driven runs with reproducible artifacts.

    hawkes-mf simulate     --config cfg.json --out runs/sim
    hawkes-mf meanfield    --config cfg.json --out runs/mf
    hawkes-mf fluctuations --config cfg.json --out runs/fl
    hawkes-mf verify       --experiment lln --config cfg.json --out runs/lln
    hawkes-mf plot-data    runs/lln/report.json --out runs/lln/plotdata.csv

Every run writes a manifest.json holding the tool version, the fully
resolved config and the seed expansion; a manifest can be passed back as
--config to replay the run.  No artifact contains timestamps or other
run-local noise, so a replay is byte-identical.  CSV files start with a
`# schema: <name> v1` comment line.

Exit status: 0 on success, 1 when verify produced a FAIL verdict, 2 on
usage or config errors.
"""

import argparse
import concurrent.futures
import dataclasses
import functools
import json
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import ExperimentReport, report_from_dict, run_experiment
from .config import (EXPERIMENTS, experiment_kwargs, load_config,
                     validate_config)
from .errors import ConfigError, ToolkitError
from .fluctuations import simulate_fluctuations
from .network import sample_network
from .rng import replicate_seed
from .simulator import (SimulationConfig, simulate_thinning,
                        simulate_time_change)
from .volterra import solve_mean_field

__all__ = ["main"]

TOOL_NAME = "hawkes-meanfield"
PLOT_HEADER = "series,t,value,replicate"


def _write_atomic(path, text):
    """Write via a temp file in the same directory, then rename over."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fmt(x):
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _resolve_jobs(args):
    jobs = getattr(args, "jobs", None)
    if jobs is None:
        env = os.environ.get("HAWKES_MF_JOBS", "").strip()
        if env:
            try:
                jobs = int(env)
            except ValueError:
                raise ConfigError(
                    f"HAWKES_MF_JOBS: expected an integer, got {env!r}")
    jobs = 1 if jobs is None else jobs
    if jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    return jobs


def _load_cfg(args, experiment_flag=None):
    raw = load_config(args.config)
    if experiment_flag:
        if not isinstance(raw, dict):
            raise ConfigError("config: expected a JSON object")
        raw = dict(raw, experiment=experiment_flag)
    cfg = validate_config(raw)
    # command line overrides, re-validated so the regime checks still hold
    doc = cfg.resolved()
    if getattr(args, "seed", None) is not None:
        doc["run"]["seed"] = args.seed
    if getattr(args, "replicates", None) is not None:
        doc["run"]["replicates"] = args.replicates
    if getattr(args, "backend", None) is not None:
        doc["run"]["backend"] = args.backend
    if getattr(args, "out", None) is not None:
        doc["output"] = {"directory": args.out}
    return validate_config(doc)


def _ensure_outdir(cfg):
    if cfg.out_dir is None:
        raise ConfigError("output.directory: required (or pass --out)")
    outdir = Path(cfg.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _write_manifest(outdir, command, cfg, jobs=1):
    manifest = {
        "tool": {"name": TOOL_NAME, "version": __version__},
        "command": command,
        "jobs": jobs,
        "resolved_config": cfg.resolved(),
        "seeds": {
            "master": cfg.seed,
            "replicates": [replicate_seed(cfg.seed, r)
                           for r in range(cfg.replicates)],
            "expansion": "replicate_seed(master, r); multi-size experiments "
                         "use replicate_seed(master, block * replicates + r)",
        },
    }
    _write_atomic(outdir / "manifest.json", _json_text(manifest))


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------

def _events_csv(doc, r):
    """Event file content for replicate r; module level so pools can pickle."""
    cfg = validate_config(doc)
    rs = replicate_seed(cfg.seed, r)
    net = sample_network(cfg.n, cfg.p, cfg.q,
                         cfg.net_seed if cfg.net_seed is not None else rs)
    sim_cfg = SimulationConfig(horizon=cfg.horizon, seed=rs,
                               scaling=cfg.scaling, dt=cfg.dt)
    simulate = (simulate_thinning if cfg.backend == "thinning"
                else simulate_time_change)
    res = simulate(net, cfg.build_kernel(), cfg.build_transfer(), sim_cfg)
    ts, vs = res.trains.merged()
    lines = ["# schema: events v1", "t,vertex"]
    lines += [f"{t!r},{v}" for t, v in zip(ts.tolist(), vs.tolist())]
    return "\n".join(lines) + "\n"


def _cmd_simulate(args):
    cfg = _load_cfg(args)
    if isinstance(cfg.n, list):
        raise ConfigError("model.n: simulate takes a single size")
    outdir = _ensure_outdir(cfg)
    jobs = _resolve_jobs(args)
    doc = cfg.resolved()
    worker = functools.partial(_events_csv, doc)
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            texts = list(pool.map(worker, range(cfg.replicates)))
    else:
        texts = [worker(r) for r in range(cfg.replicates)]
    for r, text in enumerate(texts):
        _write_atomic(outdir / f"events_r{r:03d}.csv", text)
    _write_manifest(outdir, "simulate", cfg, jobs)
    print(f"wrote {cfg.replicates} event file(s) to {outdir}")
    return 0


# ----------------------------------------------------------------------
# meanfield
# ----------------------------------------------------------------------

def _cmd_meanfield(args):
    cfg = _load_cfg(args)
    outdir = _ensure_outdir(cfg)
    path = solve_mean_field(cfg.build_kernel(), cfg.build_transfer(),
                            cfg.p, cfg.q, cfg.horizon, cfg.dt)
    lines = ["# schema: meanfield v1", "t,I"]
    lines += [f"{t!r},{v!r}" for t, v in zip(path.grid.tolist(),
                                             path.values.tolist())]
    _write_atomic(outdir / "I.csv", "\n".join(lines) + "\n")
    _write_manifest(outdir, "meanfield", cfg)
    print(f"wrote {outdir / 'I.csv'} ({len(path.grid)} grid points)")
    return 0


# ----------------------------------------------------------------------
# fluctuations
# ----------------------------------------------------------------------

def _cmd_fluctuations(args):
    cfg = _load_cfg(args)
    outdir = _ensure_outdir(cfg)
    mean_path = solve_mean_field(cfg.build_kernel(), cfg.build_transfer(),
                                 cfg.p, cfg.q, cfg.horizon, cfg.dt)
    n_comp = len(cfg.tracked_vertices) or 2
    kernel = cfg.build_kernel()
    transfer = cfg.build_transfer()
    stride = max(1, (len(mean_path.grid) - 1) // 256)
    rows = []
    for r in range(cfg.replicates):
        sample = simulate_fluctuations(mean_path, kernel, transfer,
                                       cfg.p, cfg.q, n_comp,
                                       cfg.seed, sample_index=r)
        grid = sample.grid[::stride]
        for t, v in zip(grid.tolist(), sample.kbar[::stride].tolist()):
            rows.append(f"kbar,{t!r},{v!r},{r}")
        for k in range(n_comp):
            for t, v in zip(grid.tolist(), sample.k[k, ::stride].tolist()):
                rows.append(f"k{k + 1},{t!r},{v!r},{r}")
    text = "\n".join(["# schema: plotdata v1", PLOT_HEADER] + rows) + "\n"
    _write_atomic(outdir / "fluctuations.csv", text)
    _write_manifest(outdir, "fluctuations", cfg)
    print(f"wrote {outdir / 'fluctuations.csv'} "
          f"({cfg.replicates} sample(s), {n_comp} vertex component(s))")
    return 0


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------

def _cmd_verify(args):
    cfg = _load_cfg(args, experiment_flag=args.experiment)
    if cfg.experiment is None:
        raise ConfigError("experiment: required (config key or --experiment)")
    outdir = _ensure_outdir(cfg)
    report = run_experiment(cfg.experiment, **experiment_kwargs(cfg))
    _write_manifest(outdir, "verify", cfg)
    _write_atomic(outdir / "report.json", _json_text(report.to_dict()))
    summary = report.summary_lines()
    _write_atomic(outdir / "summary.txt", "\n".join(summary) + "\n")
    _write_atomic(outdir / "plotdata.csv", _plot_csv(report))
    for line in summary:
        print(line)
    return 0 if report.all_passed else 1


# ----------------------------------------------------------------------
# plot-data
# ----------------------------------------------------------------------

# complementary-mode aggregate paths that live next to tables["series"]
_AGGREGATE_SERIES = ("drift_mean0", "drift_mean1", "drift_gap_mean",
                     "drift_gap_se")
# per-replicate scalars worth re-plotting (value vs replicate index)
_SCALAR_SERIES = ("slope_diag", "slope_target", "slope_cross",
                  "increment_correlations")


def _plot_rows(report):
    """Long-format rows (series, t, value, replicate) from a report.

    Time series carry grid times, size-indexed summaries use the network
    size as the abscissa, and terminal-value samples leave t empty.
    """
    tables = report.tables
    rows = []

    t_grid = tables.get("t_grid")
    if t_grid is not None:
        for name, reps in tables.get("series", {}).items():
            for r, path in enumerate(reps):
                rows += [(name, _fmt(t), _fmt(v), str(r))
                         for t, v in zip(t_grid, path)]
        for name in _AGGREGATE_SERIES:
            if name in tables:
                rows += [(name, _fmt(t), _fmt(v), "")
                         for t, v in zip(t_grid, tables[name])]
        for name in _SCALAR_SERIES:
            if name in tables:
                rows += [(name, "", _fmt(v), str(r))
                         for r, v in enumerate(tables[name])]

    if report.experiment == "lln":
        for n, errs in tables["sup_errors"].items():
            rows += [(f"sup_error[n={n}]", "", _fmt(v), str(r))
                     for r, v in enumerate(errs)]
        rows += [("median_sup_error", n, _fmt(tables["medians"][n]), "")
                 for n in tables["medians"]]
    elif report.experiment == "clt":
        labels = ["kbar_T"] + [f"k{j}_T" for j in range(1, 1 + len(
            tables["values_finite"][0]) - 1)]
        for r, row in enumerate(tables["values_finite"]):
            rows += [(labels[c], "", _fmt(v), str(r))
                     for c, v in enumerate(row)]
    elif report.experiment == "corollary":
        for n, sups in tables["sup_stats"].items():
            rows += [(f"sup_stat[n={n}]", "", _fmt(v), str(r))
                     for r, v in enumerate(sups)]
        rows += [("x0_terminal", "", _fmt(v), str(r))
                 for r, v in enumerate(tables["root_n_stat"]["values"])]
        rows += [("xu_terminal", "", _fmt(v), str(r))
                 for r, v in enumerate(tables["coupling"]["signed_values"])]
    elif report.experiment == "independence":
        for n, mat in tables["counts"].items():
            for r, row in enumerate(mat):
                rows += [(f"count[n={n},vertex={j}]", "", _fmt(v), str(r))
                         for j, v in enumerate(row)]
    return rows


def _plot_csv(report):
    rows = _plot_rows(report)
    lines = ["# schema: plotdata v1", PLOT_HEADER]
    lines += [",".join(row) for row in rows]
    return "\n".join(lines) + "\n"


def _cmd_plot_data(args):
    path = Path(args.report)
    if path.is_dir():
        path = path / "report.json"
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read report {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"report {path} is not valid JSON: {exc}") from exc
    report = report_from_dict(data)
    out = Path(args.out) if args.out else path.with_name("plotdata.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_atomic(out, _plot_csv(report))
    print(f"wrote {out}")
    return 0


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hawkes-mf",
        description="Simulation and verification runs for interacting "
                    "point-process networks.",
    )
    parser.add_argument("--version", action="version",
                        version=f"{TOOL_NAME} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, jobs=False, run_overrides=True):
        sp.add_argument("--config", required=True,
                        help="JSON config file (a manifest.json also works)")
        sp.add_argument("--out", help="output directory "
                        "(overrides output.directory)")
        if run_overrides:
            sp.add_argument("--seed", type=int, help="override run.seed")
            sp.add_argument("--replicates", type=int,
                            help="override run.replicates")
            sp.add_argument("--backend", choices=["thinning", "time_change"],
                            help="override run.backend")
        if jobs:
            sp.add_argument("--jobs", type=int, default=None,
                            help="worker processes for replicate simulation "
                                 "(default: HAWKES_MF_JOBS or 1)")

    sp = sub.add_parser("simulate", help="write per-replicate event files")
    add_common(sp, jobs=True)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("meanfield",
                        help="solve the deterministic input path, write I.csv")
    add_common(sp, run_overrides=False)
    sp.set_defaults(func=_cmd_meanfield)

    sp = sub.add_parser("fluctuations",
                        help="sample limit-system paths, write tidy CSV")
    add_common(sp)
    sp.set_defaults(func=_cmd_fluctuations)

    sp = sub.add_parser("verify",
                        help="run a replicated experiment, write a report")
    add_common(sp)
    sp.add_argument("--experiment", choices=list(EXPERIMENTS),
                    help="experiment to run (overrides the config key)")
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("plot-data",
                        help="emit long-format CSV from a report.json")
    sp.add_argument("report",
                    help="report.json path or a directory containing one")
    sp.add_argument("--out", help="output CSV path "
                    "(default: plotdata.csv beside the report)")
    sp.set_defaults(func=_cmd_plot_data)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
