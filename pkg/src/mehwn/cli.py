"""Command-line front end: bounds | simulate | kappa | stats.

Every command writes CSV/JSON results plus a manifest into the output
directory (--out, else $MEHWN_OUT, else ./out) and renders a PNG figure
next to them unless --no-figures is given.  Identical (config, seed)
always produce byte-identical CSV/JSON regardless of --jobs.

Exit codes: 0 success, 2 config error, 3 numeric/divergence error,
4 estimation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .bounds import build_bounds_report
from .config import NetworkConfig, load_config, parse_region, write_manifest
from .errors import ConfigError, DivergentSeriesError, EstimationError, ParameterError
from .simulator import (
    PAIR_CATEGORIES,
    component_statistics,
    estimate_kappa,
    gamma_repeat,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_ESTIMATION = 4

MANIFEST_COMMENT = "# manifest: manifest.json"


def _fmt(value) -> str:
    """CSV cell: 12 significant digits, dot decimal, empty for missing."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        fh.write(MANIFEST_COMMENT + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _sweep(args) -> list[float]:
    lo, hi, step = args.lambda_min, args.lambda_max, args.lambda_step
    if step <= 0:
        raise ConfigError(f"--lambda-step must be positive, got {step}")
    if hi < lo:
        raise ConfigError(f"--lambda-max {hi} is below --lambda-min {lo}")
    values = []
    k = 0
    while True:
        v = lo + k * step
        if v > hi + 1e-9:
            break
        values.append(round(v, 12))
        k += 1
    return values


def _build_config(args) -> NetworkConfig:
    config = load_config(args.config) if args.config else NetworkConfig()
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.g is not None and args.q is not None:
        raise ConfigError("give either --g or --q, not both")
    if args.g is not None:
        updates["g"] = args.g
    if args.q is not None:
        updates["g"] = args.q ** 2
    if args.r0 is not None:
        updates["r0"] = args.r0
    if args.region is not None:
        updates["region"] = parse_region(args.region)
    if args.repeats is not None:
        updates["repeats"] = args.repeats
    if args.pairs is not None:
        updates["n_random_pairs"] = args.pairs
    if args.max_slots is not None:
        updates["max_slots"] = args.max_slots
    if args.n_max is not None:
        updates["n_max"] = args.n_max
    if args.tail_tol is not None:
        updates["tail_tol"] = args.tail_tol
    if args.kappa is not None:
        updates["kappa"] = args.kappa
    if args.lambda_l is not None:
        updates["lambda_l"] = args.lambda_l
    if args.divergence_policy is not None:
        updates["divergence_policy"] = args.divergence_policy
    if getattr(args, "raw_occupancy", False):
        updates["raw_occupancy"] = True
    if getattr(args, "min_separation", None) is not None:
        updates["kappa_min_separation"] = args.min_separation
    return config.replace(**updates) if updates else config


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("MEHWN_OUT") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


BOUNDS_COLUMNS = [
    "lambda", "g", "r0", "p", "E_size_upper", "E_diam_upper",
    "gamma_lower", "gamma_upper", "wang_gamma_upper", "converged_flag", "n_max",
]


def cmd_bounds(args) -> int:
    config = _build_config(args)
    out = _out_dir(args)
    ctrl = config.series_control()
    reports = []
    for lam in _sweep(args):
        reports.append(build_bounds_report(config.model_params(lam), ctrl).to_dict())
    rows = [[r[c] for c in BOUNDS_COLUMNS] for r in reports]
    _write_csv(out / "bounds.csv", BOUNDS_COLUMNS, rows)
    _write_json(out / "bounds.json", reports)
    outputs = ["bounds.csv", "bounds.json"]
    if not args.no_figures:
        from . import plots

        plots.bounds_figure(reports, out / "bounds.png")
        outputs.append("bounds.png")
    write_manifest(out, "bounds", config, outputs)
    print(f"wrote {', '.join(outputs)} to {out}")
    return EXIT_OK


TRIAL_COLUMNS = [
    "seed", "repeat", "lambda", "pair_category", "source", "dest",
    "distance", "delay_slots", "relative_delay", "timeout_flag",
]


def _gamma_task(payload):
    config_kwargs, lam, n_pairs, seed, rep = payload
    config = NetworkConfig(**config_kwargs).replace(lam=lam)
    return gamma_repeat(config, n_pairs, seed, rep)


def _config_kwargs(config: NetworkConfig) -> dict:
    import dataclasses

    return {f.name: getattr(config, f.name) for f in dataclasses.fields(config)}


def cmd_simulate(args) -> int:
    config = _build_config(args)
    out = _out_dir(args)
    sweep = _sweep(args)
    ctrl = config.series_control()
    tasks = [
        (_config_kwargs(config), lam, config.n_random_pairs, config.seed, rep)
        for lam in sweep
        for rep in range(config.repeats)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_gamma_task, tasks))
    else:
        results = [_gamma_task(t) for t in tasks]
    rows = []
    summaries = []
    for li, lam in enumerate(sweep):
        lam_trials = []
        for rep in range(config.repeats):
            for t in results[li * config.repeats + rep]:
                lam_trials.append(t)
                rows.append([
                    config.seed, rep, lam, t.pair_category, t.source, t.dest,
                    t.distance, t.delay, t.relative_delay, t.timeout,
                ])
        delivered = [t for t in lam_trials if not t.timeout]
        rels = [t.relative_delay for t in delivered]
        report = build_bounds_report(config.model_params(lam), ctrl)
        cat_means = {}
        for cat in PAIR_CATEGORIES:
            cat_rels = [t.relative_delay for t in delivered if t.pair_category == cat]
            if cat_rels:
                cat_means[cat] = float(np.mean(cat_rels))
        summaries.append({
            "lambda": lam,
            "n_trials": len(lam_trials),
            "delivered": len(delivered),
            "timeouts": len(lam_trials) - len(delivered),
            "timeout_rate": (len(lam_trials) - len(delivered)) / len(lam_trials) if lam_trials else 0.0,
            "mean_gamma": float(np.mean(rels)) if rels else None,
            "category_means": cat_means,
            "gamma_lower": report.gamma_lower,
            "gamma_upper": report.gamma_upper,
            "wang_gamma_upper": report.wang_gamma_upper,
            "converged_flag": report.converged,
        })
    _write_csv(out / "trials.csv", TRIAL_COLUMNS, rows)
    _write_json(out / "summary.json", summaries)
    outputs = ["trials.csv", "summary.json"]
    if not args.no_figures:
        from . import plots

        plottable = [s | {"mean_gamma": s["mean_gamma"] or 0.0} for s in summaries]
        plots.gamma_figure(plottable, out / "gamma.png")
        outputs.append("gamma.png")
    write_manifest(out, "simulate", config, outputs)
    print(f"wrote {', '.join(outputs)} to {out}")
    return EXIT_OK


def cmd_kappa(args) -> int:
    config = _build_config(args)
    config = config.replace(lam=config.lambda_l)
    out = _out_dir(args)
    est = estimate_kappa(config, n_pairs=args.pairs, seed=config.seed)
    payload = {
        "kappa_hat": est.kappa_hat,
        "samples": est.samples,
        "unreachable": est.unreachable,
        "n_pairs": est.n_pairs,
        "repeats": est.repeats,
        "lambda_l": config.lambda_l,
        "g": config.g,
        "r0": config.r0,
        "distances": list(est.distances),
        "hops": list(est.hops),
        "ratios": list(est.ratios),
    }
    _write_json(out / "kappa.json", payload)
    outputs = ["kappa.json"]
    if not args.no_figures:
        from . import plots

        plots.kappa_figure(payload, out / "kappa.png")
        outputs.append("kappa.png")
    write_manifest(out, "kappa", config, outputs)
    print(f"kappa_hat = {est.kappa_hat:.6g} ({est.samples} samples, {est.unreachable} unreachable)")
    print(f"wrote {', '.join(outputs)} to {out}")
    return EXIT_OK


STATS_COLUMNS = [
    "lambda", "trials", "mean_n_clusters", "mean_n_components",
    "mean_cluster_nodes", "mean_cluster_size_vertices", "mean_component_size",
    "mean_cluster_diameter", "mean_component_diameter", "straddled_total",
    "occupied_fraction", "E_size_upper", "E_diam_upper", "converged_flag",
]

INSTANCE_COLUMNS = [
    "seed", "lambda", "g", "n_clusters", "n_components", "sizes_hist", "diameters_hist",
]

PDF_COLUMNS = ["lambda", "n", "component_pdf", "cluster_pdf", "p_bar"]


def _hist(values) -> str:
    counts: dict[int, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return " ".join(f"{k}:{counts[k]}" for k in sorted(counts))


def _stats_task(payload):
    config_kwargs, lam, trials, seed = payload
    config = NetworkConfig(**config_kwargs).replace(lam=lam)
    return component_statistics(config, trials, seed)


def cmd_stats(args) -> int:
    config = _build_config(args)
    out = _out_dir(args)
    sweep = _sweep(args)
    ctrl = config.series_control()
    trials = args.trials
    tasks = [(_config_kwargs(config), lam, trials, config.seed) for lam in sweep]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            per_lam = list(pool.map(_stats_task, tasks))
    else:
        per_lam = [_stats_task(t) for t in tasks]

    def _mean(seq):
        vals = list(seq)
        return float(np.mean(vals)) if vals else 0.0

    stat_rows = []
    inst_rows = []
    pdf_rows = []
    pdf_lams = {min(sweep), max(sweep)} if sweep else set()
    for lam, instances in zip(sweep, per_lam):
        report = build_bounds_report(config.model_params(lam), ctrl)
        stat_rows.append({
            "lambda": lam,
            "trials": len(instances),
            "mean_n_clusters": _mean(s.n_clusters for s in instances),
            "mean_n_components": _mean(s.n_components for s in instances),
            "mean_cluster_nodes": _mean(n for s in instances for n in s.cluster_nodes),
            "mean_cluster_size_vertices": _mean(n for s in instances for n in s.mapped_sizes),
            "mean_component_size": _mean(n for s in instances for n in s.component_sizes),
            "mean_cluster_diameter": _mean(d for s in instances for d in s.mapped_diameters),
            "mean_component_diameter": _mean(d for s in instances for d in s.component_diameters),
            "straddled_total": sum(s.straddled_clusters for s in instances),
            "occupied_fraction": _mean(s.occupied_fraction for s in instances),
            "E_size_upper": report.expected_size_upper,
            "E_diam_upper": report.expected_diameter_upper,
            "converged_flag": report.converged,
        })
        for s in instances:
            inst_rows.append([
                config.seed, lam, config.g, s.n_clusters, s.n_components,
                _hist(s.component_sizes), _hist(s.component_diameters),
            ])
        if lam in pdf_lams:
            comp_sizes = [n for s in instances for n in s.component_sizes]
            mapped_sizes = [n for s in instances for n in s.mapped_sizes]
            sizes = sorted(set(comp_sizes) | set(mapped_sizes))
            n_comp = max(len(comp_sizes), 1)
            n_clus = max(len(mapped_sizes), 1)
            p = report.p
            from .bounds import size_prob_upper

            for n in sizes:
                pdf_rows.append({
                    "lambda": lam,
                    "n": n,
                    "component_pdf": comp_sizes.count(n) / n_comp,
                    "cluster_pdf": mapped_sizes.count(n) / n_clus,
                    "p_bar": size_prob_upper(n, p) if n >= 2 and 0 < p < 1 else None,
                })
    _write_csv(out / "stats.csv", STATS_COLUMNS, [[r[c] for c in STATS_COLUMNS] for r in stat_rows])
    _write_csv(out / "instances.csv", INSTANCE_COLUMNS, inst_rows)
    _write_csv(out / "size_pdf.csv", PDF_COLUMNS, [[r[c] for c in PDF_COLUMNS] for r in pdf_rows])
    outputs = ["stats.csv", "instances.csv", "size_pdf.csv"]
    if not args.no_figures:
        from . import plots

        plots.stats_figure(stat_rows, out / "stats.png")
        outputs.append("stats.png")
        if pdf_rows:
            plots.size_pdf_figure(pdf_rows, out / "size_pdf.png")
            outputs.append("size_pdf.png")
    write_manifest(out, "stats", config, outputs)
    print(f"wrote {', '.join(outputs)} to {out}")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument("--seed", type=int, help="master seed (default 1)")
    parser.add_argument("--lambda-min", type=float, default=1.4, help="sweep start (default 1.4)")
    parser.add_argument("--lambda-max", type=float, default=2.8, help="sweep end (default 2.8)")
    parser.add_argument("--lambda-step", type=float, default=0.2, help="sweep step (default 0.2)")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--g", type=float, help="link probability g")
    group.add_argument("--q", type=float, help="activation probability q (g = q^2)")
    parser.add_argument("--r0", type=float, help="communication range (default 1)")
    parser.add_argument("--region", help="deployment area WxH (default 20x20)")
    parser.add_argument("--repeats", type=int, help="repeats per density (default 10)")
    parser.add_argument("--pairs", type=int, help="random pairs per repeat (default 100)")
    parser.add_argument("--max-slots", type=int, help="flood slot budget (default: auto, floor 1000)")
    parser.add_argument("--n-max", type=int, help="series truncation (default: lattice edge count)")
    parser.add_argument("--tail-tol", type=float, help="series tail tolerance (default 1e-9)")
    parser.add_argument("--kappa", type=float, help="hop-ratio constant override (default 1.7)")
    parser.add_argument("--lambda-l", type=float, help="long-term critical density (default 1.44)")
    parser.add_argument("--divergence-policy", choices=("error", "warn"),
                        help="what to do when the series bounds diverge (default warn)")
    parser.add_argument("--out", help="output directory (default $MEHWN_OUT or ./out)")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker processes; never changes output bytes")
    parser.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mehwn",
        description="Delay-ratio simulation and analytical bounds for duty-cycled wireless networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", help="evaluate the closed-form bounds over a density sweep")
    _add_common(p_bounds)

    p_sim = sub.add_parser("simulate", help="run slotted flooding trials over a density sweep")
    _add_common(p_sim)

    p_kappa = sub.add_parser("kappa", help="estimate the hop-to-distance ratio at the critical density")
    _add_common(p_kappa)
    p_kappa.add_argument("--min-separation", type=float,
                         help="minimum distance for random pairs (default 0)")

    p_stats = sub.add_parser("stats", help="cluster/component statistics over a density sweep")
    _add_common(p_stats)
    p_stats.add_argument("--trials", type=int, default=100, help="instances per density (default 100)")
    p_stats.add_argument("--raw-occupancy", action="store_true",
                         help="occupy edges from the full point set instead of the active subset")
    return parser


_COMMANDS = {
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "kappa": cmd_kappa,
    "stats": cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergentSeriesError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except EstimationError as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
