"""Strategy runners and the multi-seed comparison pipeline."""
from __future__ import annotations

import datetime as _dt
import json
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import io as wio
from .config import ExperimentConfig
from .extras import optimize_extras
from .gdl import Trace, align_overlap, initial_deployment, optimize
from .metrics import coverage_raster, deployment_cost, network_delay, total_power
from .placement import Deployment, fibonacci_layout, uniform_layout
from .pso import pso_optimize
from .svg import bar_chart_svg, emit_plot

STRATEGIES = ("uniform", "fibonacci", "hybrid", "hybrid+extras", "pso")


def run_uniform(cfg: ExperimentConfig, seed: int = 0) -> tuple[Deployment, Trace | None]:
    return uniform_layout(cfg.field), None


def run_fibonacci(cfg: ExperimentConfig, seed: int = 0) -> tuple[Deployment, Trace | None]:
    return fibonacci_layout(cfg.field, cfg.placement.fibonacci_walk), None


def run_hybrid(cfg: ExperimentConfig, seed: int = 0) -> tuple[Deployment, Trace]:
    gcfg = replace(cfg.gdl, seed=seed)
    dep, trace = optimize(initial_deployment(cfg.field, gcfg), gcfg, cfg.radios)
    if cfg.alignment.enabled:
        dep = align_overlap(dep, cfg.alignment.min_overlap, cfg.alignment.max_overlap, cfg.metrics.r_sense)
    return dep, trace


def run_hybrid_extras(cfg: ExperimentConfig, seed: int = 0) -> tuple[Deployment, Trace]:
    stations, _ = run_hybrid(cfg, seed)
    return optimize_extras(stations, replace(cfg.extras, seed=seed), cfg.field)


def run_pso(cfg: ExperimentConfig, seed: int = 0) -> tuple[Deployment, Trace]:
    pcfg = replace(cfg.pso, seed=seed, r_sense=cfg.metrics.r_sense, resolution=cfg.metrics.resolution)
    return pso_optimize(pcfg, cfg.field)


RUNNERS = {
    "uniform": run_uniform,
    "fibonacci": run_fibonacci,
    "hybrid": run_hybrid,
    "hybrid+extras": run_hybrid_extras,
    "pso": run_pso,
}


def score(dep: Deployment, cfg: ExperimentConfig) -> dict:
    worst, _ = network_delay(dep, cfg.radios)
    return {
        "node_count": len(dep.nodes),
        "coverage": coverage_raster(dep, cfg.metrics.radii(), cfg.metrics.resolution).fraction,
        "power": total_power(dep, cfg.radios),
        "delay": worst,
        "cost": deployment_cost(dep, cfg.radios),
    }


def write_run(dep: Deployment, trace: Trace | None, cfg: ExperimentConfig, out_dir, stem: str = "deployment") -> list[Path]:
    """Deployment JSON/CSV, plot and (when present) trace CSV for one run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [
        wio.write_deployment_json(dep, out_dir / f"{stem}.json"),
        wio.write_text(out_dir / f"{stem}.csv", wio.deployment_csv(dep)),
        emit_plot(dep, plot_ranges(cfg), out_dir / f"{stem}.svg", title=str(dep.meta.get("algorithm", ""))),
    ]
    if trace is not None:
        paths.append(wio.write_text(out_dir / f"{stem}_trace.csv", wio.trace_csv(trace)))
    return paths


def plot_ranges(cfg: ExperimentConfig) -> dict[str, float]:
    return cfg.metrics.radii()


def _dirname(strategy: str) -> str:
    return strategy.replace("+", "_")


@dataclass
class ComparisonReport:
    rows: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    out_dir: Path | None = None

    @property
    def ok(self) -> bool:
        return not self.failures

    def values(self, strategy: str, key: str = "coverage") -> list[float]:
        return [r[key] for r in self.rows if r["strategy"] == strategy]

    def medians(self, key: str = "coverage") -> dict[str, float]:
        out = {}
        for s in STRATEGIES:
            vals = self.values(s, key)
            if vals:
                out[s] = statistics.median(vals)
        return out


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def run_compare(cfg: ExperimentConfig, out_dir=None, strategies=STRATEGIES, write_runs: bool = True) -> ComparisonReport:
    """Run every strategy for every seed and write the comparison outputs.

    Writes ``comparison.csv``, ``summary.svg`` (median coverage per
    strategy), one sub-directory per strategy and ``manifest.json``. Only
    the manifest carries timestamps. A failing run is recorded there and
    the remaining runs still execute.
    """
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    report = ComparisonReport(out_dir=out)
    files: list[str] = []
    for seed in cfg.seeds:
        for strategy in strategies:
            try:
                dep, trace = RUNNERS[strategy](cfg, seed)
                row = {"strategy": strategy, "seed": seed, **score(dep, cfg)}
            except Exception as exc:  # noqa: BLE001 - recorded in the manifest
                report.failures.append({"strategy": strategy, "seed": seed, "error": f"{type(exc).__name__}: {exc}"})
                continue
            report.rows.append(row)
            if write_runs:
                paths = write_run(dep, trace, cfg, out / _dirname(strategy), stem=f"seed{seed:03d}")
                files += [str(p.relative_to(out)) for p in paths]

    files.append(wio.write_text(out / "comparison.csv", wio.comparison_csv(report.rows)).name)
    med = report.medians()
    files.append(wio.write_text(out / "summary.svg", bar_chart_svg(
        list(med), list(med.values()), title=f"median coverage over {len(cfg.seeds)} seeds")).name)
    manifest = {
        "started": started,
        "finished": _now(),
        "seeds": list(cfg.seeds),
        "strategies": list(strategies),
        "status": "ok" if report.ok else "failed",
        "failures": report.failures,
        "median_coverage": med,
        "files": sorted(files),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return report
