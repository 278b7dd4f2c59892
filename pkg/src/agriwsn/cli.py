"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 runtime error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import io as wio
from .compare import RUNNERS, run_compare, score, write_run
from .config import ExperimentConfig, load_config
from .errors import AgriWsnError, ConfigError
from .extras import connected_fraction, optimize_extras
from .fahp import default_model, load_model, rank_model
from .metrics import coverage_montecarlo
from .svg import emit_plot

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if getattr(args, "seeds", None):
        cfg = replace(cfg, seeds=tuple(range(args.seeds)))
    return cfg


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    out = Path(args.out) if args.out else Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_rank(args) -> int:
    cfg = _config(args)
    path = args.model or cfg.resolve(cfg.fahp.model)
    criteria, alts = load_model(path) if path else default_model()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ranking = rank_model(criteria, alts)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    for pos, (name, value) in enumerate(ranking.items, start=1):
        print(f"{pos}. {name:<10s} {value:.4f}")
    if args.out:
        out = _out_dir(args, cfg)
        wio.write_text(out / "ranking.json", wio.dumps({"ranking": [list(item) for item in ranking.items]}))
        wio.write_text(out / "ranking.csv", wio.ranking_csv(ranking.items))
    return EXIT_OK


def cmd_place(args) -> int:
    cfg = _config(args)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    dep, trace = RUNNERS[args.strategy](cfg, seed)
    out = _out_dir(args, cfg)
    write_run(dep, trace, cfg, out)
    print(json.dumps({"strategy": args.strategy, "seed": seed, **score(dep, cfg)}, sort_keys=True))
    return EXIT_OK


def cmd_extend(args) -> int:
    cfg = _config(args)
    stations = wio.read_deployment_json(args.stations)
    ecfg = cfg.extras if args.seed is None else replace(cfg.extras, seed=args.seed)
    dep, trace = optimize_extras(stations, ecfg, stations.field)
    out = _out_dir(args, cfg)
    write_run(dep, trace, cfg, out)
    ranges = {**cfg.metrics.radii(), "station": ecfg.wifi_range, "anchor": ecfg.wifi_range, "extra": ecfg.bt_range}
    emit_plot(dep, ranges, out / "deployment_ranges.svg", title="communication ranges")
    summary = score(dep, cfg)
    summary["connected_fraction"] = connected_fraction(dep, ecfg.bt_range)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_score(args) -> int:
    cfg = _config(args)
    overrides = {k: v for k, v in (("r_sense", args.r_sense), ("resolution", args.resolution)) if v is not None}
    if overrides:
        cfg = replace(cfg, metrics=replace(cfg.metrics, **overrides))
    dep = wio.read_deployment_json(args.deployment)
    m = cfg.metrics
    result = score(dep, cfg)
    raster = f"resolution={m.resolution};r_sense={m.r_sense};extra_r_sense={m.extra_r_sense}"
    rows = [
        ("node_count", result["node_count"], "count", ""),
        ("coverage", result["coverage"], "raster", raster),
        ("power", result["power"], "link model", ""),
        ("delay", result["delay"], "worst path", ""),
        ("cost", result["cost"], "unit cost", ""),
    ]
    if args.montecarlo:
        seed = args.seed or 0
        mc = coverage_montecarlo(dep, m.radii(), m.samples, seed=seed)
        rows.append(("coverage", mc.fraction, "montecarlo",
                     f"samples={m.samples};seed={seed};halfwidth={mc.confidence_halfwidth!r}"))
    for name, value, method, params in rows:
        print(f"{name:<11s} {value:>14.6f}  {method}")
    if args.out:
        wio.write_text(_out_dir(args, cfg) / "score.csv", wio.score_csv(rows))
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    report = run_compare(cfg, _out_dir(args, cfg))
    for name, value in report.medians().items():
        print(f"{name:<14s} median coverage {value:.4f}")
    for f in report.failures:
        print(f"failed: {f['strategy']} seed {f['seed']}: {f['error']}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_RUNTIME


def cmd_plot(args) -> int:
    cfg = _config(args)
    dep = wio.read_deployment_json(args.deployment)
    emit_plot(dep, cfg.metrics.radii(), args.out, title=args.title or "")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="agriwsn", description="Sensor placement experiments for crop fields.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=False):
        sp.add_argument("--config", help="experiment JSON config (defaults if omitted)")
        sp.add_argument("--out", required=out_required, help="output directory (overrides output_dir)")

    sp = sub.add_parser("rank", help="rank radio technologies with fuzzy AHP")
    common(sp)
    sp.add_argument("--model", help="fuzzy AHP model JSON (shipped default if omitted)")
    sp.set_defaults(func=cmd_rank)

    sp = sub.add_parser("place", help="run one placement strategy")
    sp.add_argument("strategy", choices=["uniform", "fibonacci", "hybrid", "pso"])
    common(sp)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_place)

    sp = sub.add_parser("extend", help="add Bluetooth extra nodes around placed stations")
    sp.add_argument("--stations", required=True, help="station deployment JSON")
    common(sp)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_extend)

    sp = sub.add_parser("score", help="coverage, power, delay and cost of a deployment")
    sp.add_argument("--deployment", required=True)
    common(sp)
    sp.add_argument("--r-sense", type=float, help="sensing radius for stations and anchors (m)")
    sp.add_argument("--resolution", type=float, help="raster pitch (m)")
    sp.add_argument("--montecarlo", action="store_true", help="also estimate coverage by sampling")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("compare", help="all strategies over all seeds")
    common(sp)
    sp.add_argument("--seeds", type=int, help="use seeds 0..N-1 instead of the config list")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("plot", help="render a deployment JSON as SVG")
    sp.add_argument("--deployment", required=True)
    sp.add_argument("--config")
    sp.add_argument("--out", required=True, help="SVG file to write")
    sp.add_argument("--title")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AgriWsnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
