"""Global-best particle swarm baseline that places stations by raster coverage."""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Mapping

import numpy as np

from .errors import ConfigError
from .field import FieldSpec, Point2D
from .gdl import Trace
from .metrics import covered_mask
from .placement import STATION, Deployment, SensorNode, star_links
from .radio import WIFI


@dataclass(frozen=True)
class PsoConfig:
    n_stations: int = 9
    swarm_size: int = 30
    inertia: float = 0.7
    c1: float = 1.5
    c2: float = 1.5
    iterations: int = 200
    r_sense: float = 40.0
    resolution: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_stations < 1:
            raise ConfigError("n_stations must be >= 1")
        if self.swarm_size < 2:
            raise ConfigError("swarm_size must be >= 2")
        if not 0.0 < self.inertia <= 1.0:
            raise ConfigError("inertia must lie in (0, 1]")
        if self.c1 < 0 or self.c2 < 0:
            raise ConfigError("c1 and c2 must be >= 0")
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if self.r_sense <= 0 or self.resolution <= 0:
            raise ConfigError("r_sense and resolution must be > 0")

    @classmethod
    def from_dict(cls, data: Mapping | None) -> "PsoConfig":
        data = dict(data or {})
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"pso: unknown keys {sorted(unknown)}")
        return cls(**data)


def coverage_fitness(flat: np.ndarray, cfg: PsoConfig, spec: FieldSpec) -> float:
    centers = flat.reshape(-1, 2)
    radii = np.full(len(centers), cfg.r_sense)
    return float(covered_mask(spec, centers, radii, cfg.resolution).mean())


def pso_optimize(cfg: PsoConfig, spec: FieldSpec | None = None) -> tuple[Deployment, Trace]:
    """Standard gbest PSO over the flattened station coordinates.

    Velocities are clamped per component to a tenth of the field diagonal
    and positions to the field. The trace records the global best fitness
    after each iteration, so it never decreases.
    """
    spec = spec or FieldSpec()
    rng = np.random.default_rng(cfg.seed)
    dim = 2 * cfg.n_stations
    upper = np.tile([spec.width_m, spec.height_m], cfg.n_stations)
    vmax = spec.diagonal / 10.0

    x = rng.uniform(0.0, 1.0, size=(cfg.swarm_size, dim)) * upper
    v = rng.uniform(-vmax, vmax, size=(cfg.swarm_size, dim))
    fit = np.array([coverage_fitness(p, cfg, spec) for p in x])
    pbest, pbest_fit = x.copy(), fit.copy()
    g = int(np.argmax(pbest_fit))
    gbest, gbest_fit = pbest[g].copy(), float(pbest_fit[g])

    trace = Trace()
    for _ in range(cfg.iterations):
        r1 = rng.uniform(size=x.shape)
        r2 = rng.uniform(size=x.shape)
        v = cfg.inertia * v + cfg.c1 * r1 * (pbest - x) + cfg.c2 * r2 * (gbest - x)
        v = np.clip(v, -vmax, vmax)
        x = np.clip(x + v, 0.0, upper)
        fit = np.array([coverage_fitness(p, cfg, spec) for p in x])
        better = fit > pbest_fit
        pbest[better], pbest_fit[better] = x[better], fit[better]
        g = int(np.argmax(pbest_fit))
        moved = 0.0
        if pbest_fit[g] > gbest_fit:
            moved = float(np.max(np.abs(pbest[g] - gbest)))
            gbest, gbest_fit = pbest[g].copy(), float(pbest_fit[g])
        trace.record(gbest_fit, moved)

    nodes = [SensorNode(i + 1, Point2D(float(px), float(py)), STATION, WIFI)
             for i, (px, py) in enumerate(gbest.reshape(-1, 2))]
    dep = Deployment(spec, nodes, meta={
        "algorithm": "pso",
        "seed": cfg.seed,
        "iterations": cfg.iterations,
        "best_fitness": gbest_fit,
    })
    dep.links = star_links(dep)
    return dep, trace
