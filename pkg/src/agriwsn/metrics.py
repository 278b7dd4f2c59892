"""Scoring of deployments: coverage, overlap, power, delay, cost and the ILP checks."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, DomainError, FeasibilityError, ScaleError, TopologyError
from .field import FieldSpec, Grid, PowerMap, TargetSet, build_grid, cell_of
from .placement import ANCHOR, EXTRA, Deployment, SensorNode
from .radio import DEFAULT_RADIOS, RadioTech, link_delay, link_feasible, link_power

DEFAULT_R_SENSE = 40.0
EXHAUSTIVE_CELL_LIMIT = 16


@dataclass(frozen=True)
class CoverageReport:
    fraction: float
    method: str
    resolution_or_samples: float
    seed: int | None = None
    confidence_halfwidth: float | None = None


@dataclass
class IlpReport:
    node_total: int
    per_target_ok: np.ndarray
    integral_ok: bool
    per_cell_counts: dict = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        return bool(self.integral_ok and np.all(self.per_target_ok))


def node_radii(dep: Deployment, r_sense) -> np.ndarray:
    """Per-node sensing radius from a scalar or a role -> radius mapping."""
    if isinstance(r_sense, Mapping):
        try:
            radii = [float(r_sense[n.role]) for n in dep.nodes]
        except KeyError as exc:
            raise ConfigError(f"no sensing radius for role {exc.args[0]!r}") from None
    else:
        radii = [float(r_sense)] * len(dep.nodes)
    out = np.asarray(radii, dtype=float)
    if np.any(out < 0):
        raise DomainError("sensing radius must be >= 0")
    return out


def _raster_axes(spec: FieldSpec, resolution: float):
    nx = max(1, int(round(spec.width_m / resolution)))
    ny = max(1, int(round(spec.height_m / resolution)))
    px, py = spec.width_m / nx, spec.height_m / ny
    return (np.arange(nx) + 0.5) * px, (np.arange(ny) + 0.5) * py, px, py


def covered_mask(spec: FieldSpec, centers: np.ndarray, radii: np.ndarray, resolution: float) -> np.ndarray:
    """Boolean raster (rows = y) of pixel centres strictly inside at least one disc."""
    if resolution <= 0:
        raise DomainError("resolution must be > 0")
    xs, ys, px, py = _raster_axes(spec, resolution)
    mask = np.zeros((ys.size, xs.size), dtype=bool)
    for (cx, cy), r in zip(centers, radii):
        if r <= 0:
            continue
        # Stamp only the bounding box of each disc.
        i0 = max(0, int(math.floor((cx - r) / px)))
        i1 = min(xs.size, int(math.ceil((cx + r) / px)) + 1)
        j0 = max(0, int(math.floor((cy - r) / py)))
        j1 = min(ys.size, int(math.ceil((cy + r) / py)) + 1)
        if i0 >= i1 or j0 >= j1:
            continue
        dx = xs[i0:i1] - cx
        dy = ys[j0:j1, None] - cy
        mask[j0:j1, i0:i1] |= dx * dx + dy * dy < r * r
    return mask


def coverage_raster(dep: Deployment, r_sense=DEFAULT_R_SENSE, resolution: float = 1.0) -> CoverageReport:
    if resolution <= 0:
        raise DomainError("resolution must be > 0")
    if not dep.nodes:
        return CoverageReport(0.0, "raster", resolution)
    mask = covered_mask(dep.field, dep.positions(), node_radii(dep, r_sense), resolution)
    return CoverageReport(float(mask.mean()), "raster", resolution)


def coverage_montecarlo(dep: Deployment, r_sense=DEFAULT_R_SENSE, samples: int = 1_000_000,
                        seed: int = 0) -> CoverageReport:
    if samples < 1:
        raise DomainError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    spec = dep.field
    pts = rng.uniform((0.0, 0.0), (spec.width_m, spec.height_m), size=(samples, 2))
    covered = np.zeros(samples, dtype=bool)
    if dep.nodes:
        centers = dep.positions()
        radii = node_radii(dep, r_sense)
        for r in np.unique(radii):
            if r <= 0:
                continue
            tree = cKDTree(centers[radii == r])
            dist, _ = tree.query(pts, k=1)
            covered |= dist < r
    p = float(covered.mean())
    half = 1.96 * math.sqrt(p * (1.0 - p) / samples)
    return CoverageReport(p, "montecarlo", samples, seed, half)


def beta_cells(node: SensorNode, r_sense: float, grid: Grid) -> int:
    """Number of grid cells the sensing disc touches (closest-point test)."""
    x, y = node.position
    e = grid.spec.cell_edge_m
    count = 0
    for c in grid.cells:
        x0, y0 = (c.col - 1) * e, (c.row - 1) * e
        qx = min(max(x, x0), x0 + e)
        qy = min(max(y, y0), y0 + e)
        if (qx - x) ** 2 + (qy - y) ** 2 < r_sense * r_sense:
            count += 1
    return count


def lens_area(d: float, r: float) -> float:
    if d >= 2.0 * r:
        return 0.0
    return 2.0 * r * r * math.acos(d / (2.0 * r)) - 0.5 * d * math.sqrt(4.0 * r * r - d * d)


def pairwise_overlap(a, b, r_sense: float) -> float:
    """Lens area of two equal discs as a fraction of one disc's area."""
    if r_sense <= 0:
        raise DomainError("r_sense must be > 0")
    d = math.hypot(a[0] - b[0], a[1] - b[1])
    return lens_area(d, r_sense) / (math.pi * r_sense * r_sense)


def total_power(dep: Deployment, radios: Mapping[str, RadioTech] = DEFAULT_RADIOS) -> float:
    techs = {n.id: radios[n.tech] for n in dep.nodes}
    total = 0.0
    for child, length in sorted(dep.link_lengths().items()):
        tech = techs[child]
        if not link_feasible(tech, length):
            raise FeasibilityError(f"link from node {child} is {length:.3f} m, beyond {tech.name} range")
        total += link_power(tech, length)
    return total


def path_delays(dep: Deployment, radios: Mapping[str, RadioTech] = DEFAULT_RADIOS) -> dict[int, float]:
    """Delay from every linked node to the root, summed over its path."""
    lengths = dep.link_lengths()
    techs = {n.id: radios[n.tech] for n in dep.nodes}
    cache: dict[int, float] = {}

    def walk(node_id: int) -> float:
        if node_id in cache:
            return cache[node_id]
        trail = []
        cur = node_id
        while cur in dep.links and cur not in cache:
            if cur in trail:
                raise TopologyError(f"cycle through node {cur}")
            trail.append(cur)
            cur = dep.links[cur]
        acc = cache.get(cur, 0.0)
        for nid in reversed(trail):
            acc += link_delay(techs[nid], lengths[nid])
            cache[nid] = acc
        return cache[node_id]

    return {nid: walk(nid) for nid in sorted(dep.links)}


def network_delay(dep: Deployment, radios: Mapping[str, RadioTech] = DEFAULT_RADIOS) -> tuple[float, float]:
    """(worst, mean) path delay to the root over all linked nodes; (0, 0) with no links."""
    delays = path_delays(dep, radios)
    if not delays:
        return 0.0, 0.0
    values = list(delays.values())
    return max(values), sum(values) / len(values)


def deployment_cost(dep: Deployment, radios: Mapping[str, RadioTech] = DEFAULT_RADIOS) -> float:
    total = 0.0
    for n in dep.nodes:
        if n.tech not in radios:
            raise KeyError(f"unknown technology {n.tech!r} for node {n.id}")
        total += radios[n.tech].unit_cost
    return total


def covering_cells(spec: FieldSpec, grid: Grid, targets: TargetSet, r_sense: float | None) -> np.ndarray:
    """Boolean matrix [target, cell]: a node in that cell serves that target.

    Without a sensing radius only the cell containing the target serves it;
    with one, every cell whose centre lies strictly within ``r_sense``.
    """
    n_t, n_c = len(targets), len(grid.cells)
    cover = np.zeros((n_t, n_c), dtype=bool)
    if r_sense is None:
        for j, p in enumerate(targets.positions):
            cover[j, cell_of(spec, p).index - 1] = True
    else:
        centers = grid.center_array()
        d2 = ((targets.positions[:, None, :] - centers[None, :, :]) ** 2).sum(-1)
        cover = d2 < r_sense * r_sense
    return cover


def ilp_check(dep: Deployment, power: PowerMap, targets: TargetSet, threshold: float = 1.0,
              r_sense: float | None = None) -> IlpReport:
    grid = build_grid(dep.field)
    counts = {c: 0 for c in grid.cells}
    for n in dep.nodes:
        counts[cell_of(dep.field, n.position)] += 1
    rates = np.array([power[c] for c in grid.cells], dtype=float)
    alloc = np.array([counts[c] for c in grid.cells], dtype=float)
    cover = covering_cells(dep.field, grid, targets, r_sense)
    served = cover.astype(float) @ (rates * alloc)
    integral = bool(np.all(alloc >= 0) and np.all(alloc == np.round(alloc)))
    return IlpReport(int(alloc.sum()), served >= threshold, integral, counts)


def _min_cover_exhaustive(weights: np.ndarray, threshold: float) -> int | None:
    n_c = weights.shape[1]
    for k in range(n_c + 1):
        for subset in itertools.combinations(range(n_c), k):
            if np.all(weights[:, list(subset)].sum(axis=1) >= threshold):
                return k
    return None


def _min_cover_bnb(weights: np.ndarray, threshold: float) -> int | None:
    n_t, n_c = weights.shape
    # suffix[k] = best achievable service per target from cells k..end
    suffix = np.zeros((n_c + 1, n_t))
    for k in range(n_c - 1, -1, -1):
        suffix[k] = suffix[k + 1] + weights[:, k]
    col_max = np.array([weights[:, k:].max() if k < n_c and n_t else 0.0 for k in range(n_c + 1)])
    best = [n_c + 1]

    def branch(k: int, served: np.ndarray, used: int):
        need = threshold - served
        if np.all(need <= 0):
            best[0] = min(best[0], used)
            return
        if k == n_c or np.any(served + suffix[k] < threshold):
            return
        lower = math.ceil(need.max() / col_max[k]) if col_max[k] > 0 else n_c + 1
        if used + lower >= best[0]:
            return
        branch(k + 1, served + weights[:, k], used + 1)
        branch(k + 1, served, used)

    branch(0, np.zeros(n_t), 0)
    return best[0] if best[0] <= n_c else None


def min_nodes_exact(grid: Grid, r_sense: float, targets: TargetSet, threshold: float = 1.0,
                    power: PowerMap | None = None, method: str = "bnb") -> int | None:
    """Fewest cell-centre nodes (at most one per cell) meeting the per-target threshold.

    ``method`` is ``"bnb"`` (depth-first branch and bound) or
    ``"exhaustive"`` (subsets by increasing size). Returns None when even
    using every cell fails.
    """
    if len(grid.cells) > EXHAUSTIVE_CELL_LIMIT:
        raise ScaleError(f"{len(grid.cells)} cells exceeds the exact-search limit of {EXHAUSTIVE_CELL_LIMIT}")
    rates = np.array([1.0 if power is None else power[c] for c in grid.cells])
    weights = covering_cells(grid.spec, grid, targets, r_sense) * rates[None, :]
    if method == "exhaustive":
        return _min_cover_exhaustive(weights, threshold)
    if method == "bnb":
        return _min_cover_bnb(weights, threshold)
    raise ConfigError(f"unknown method {method!r}")


def station_pairs(dep: Deployment) -> list[tuple[SensorNode, SensorNode]]:
    """Angularly adjacent station pairs around the anchor (cyclic)."""
    anchor = dep.anchor
    stations = [n for n in dep.nodes if n.role not in (ANCHOR, EXTRA)]
    if anchor is None or len(stations) < 2:
        return []
    ax, ay = anchor.position
    order = sorted(stations, key=lambda n: (math.atan2(n.position[1] - ay, n.position[0] - ax), n.id))
    if len(order) == 2:
        return [(order[0], order[1])]
    return [(order[i], order[(i + 1) % len(order)]) for i in range(len(order))]


def adjacent_overlaps(dep: Deployment, r_sense: float) -> list[float]:
    return [pairwise_overlap(a.position, b.position, r_sense) for a, b in station_pairs(dep)]

