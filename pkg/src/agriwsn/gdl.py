"""Gradient iteration with Lagrange multipliers for station placement around a fixed anchor.

Objective (maximised), with ``d_i`` the anchor distance of station ``i``,
``u_i`` its unit bearing from the anchor and ``R`` the ring radius
``spacing_ratio * cell_edge``::

    ring(P)   = -k/2 * sum_i (d_i - R)^2
    spread(P) = -s * sum_{i<j} exp(-|u_i - u_j|^2 / (2 w^2))
    J(P)      = w_c * (ring + spread)
                - w_p * sum_i kp * d_i^alpha
                - w_d * sum_i (kd + cd * d_i)

The spread term is a soft repulsion between bearings, so it only acts
tangentially and leaves the equilibrium radius to the ring, power and delay
terms. Every station therefore settles at the same distance.

Inequality slacks per station (all must stay >= 0)::

    d_i, d_max - d_i, x_i - m, W - m - x_i, y_i - m, H - m - y_i

with ``m`` the edge margin. The single equality residual is the station
count minus the budget, which the optimiser keeps at zero structurally.
The Lagrangian is ``J - sum(lambda * g) - sum(mu * h)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Mapping

import numpy as np

from .errors import ConfigError, DomainError, ValidationError
from .field import FieldSpec, Point2D
from .metrics import pairwise_overlap, station_pairs
from .placement import ANCHOR, GOLDEN_RATIO, STATION, Deployment, SensorNode, star_links
from .radio import DEFAULT_RADIOS, WIFI, RadioTech

N_INEQUALITIES = 6


@dataclass(frozen=True)
class GdlConfig:
    n_stations: int = 8
    w_c: float = 1.0
    w_p: float = 1.0
    w_d: float = 1.0
    d_max: float = 100.0
    lr_position: float = 0.01
    lr_multiplier: float = 0.005
    max_iterations: int = 500
    tol: float = 0.01
    min_edge_distance: float = 10.0
    seed: int = 0
    spacing_ratio: float = GOLDEN_RATIO
    ring_stiffness: float = 100.0
    spread_strength: float = 1.0e5
    spread_width: float = 0.5
    tech: str = WIFI

    def __post_init__(self):
        if self.n_stations < 1:
            raise ConfigError("n_stations must be >= 1")
        for name in ("lr_position", "lr_multiplier", "tol", "d_max", "spread_width", "spacing_ratio"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        for name in ("w_c", "w_p", "w_d", "ring_stiffness", "spread_strength", "min_edge_distance"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")

    @classmethod
    def from_dict(cls, data: Mapping) -> "GdlConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown gdl keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class Multipliers:
    lam: np.ndarray  # (n_stations, 6), inequality multipliers
    mu: np.ndarray  # (1,), equality multiplier

    @classmethod
    def zeros(cls, n: int) -> "Multipliers":
        return cls(np.zeros((n, N_INEQUALITIES)), np.zeros(1))


@dataclass
class Trace:
    objective: list[float] = field(default_factory=list)
    max_delta: list[float] = field(default_factory=list)
    lambda_norm: list[float] = field(default_factory=list)
    mu_norm: list[float] = field(default_factory=list)
    converged: bool = False

    def __len__(self):
        return len(self.objective)

    def record(self, objective: float, max_delta: float, lambda_norm: float = 0.0, mu_norm: float = 0.0):
        self.objective.append(float(objective))
        self.max_delta.append(float(max_delta))
        self.lambda_norm.append(float(lambda_norm))
        self.mu_norm.append(float(mu_norm))

    def rows(self):
        for i, (obj, delta) in enumerate(zip(self.objective, self.max_delta), start=1):
            yield i, obj, delta


def ring_radius(cfg: GdlConfig, spec: FieldSpec) -> float:
    return cfg.spacing_ratio * spec.cell_edge_m


def _as_array(positions) -> np.ndarray:
    return np.asarray(positions, dtype=float).reshape(-1, 2)


def _anchor(spec: FieldSpec, anchor) -> np.ndarray:
    return np.asarray(spec.center if anchor is None else anchor, dtype=float)


def _geometry(P: np.ndarray, a: np.ndarray):
    diff = P - a
    d = np.hypot(diff[:, 0], diff[:, 1])
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(d[:, None] > 0, diff / d[:, None], 0.0)
    return d, u


def objective(positions, cfg: GdlConfig, spec: FieldSpec, radio: RadioTech, anchor=None) -> float:
    P = _as_array(positions)
    if not all(spec.contains(p) for p in P):
        raise DomainError("station outside the field")
    d, u = _geometry(P, _anchor(spec, anchor))
    R = ring_radius(cfg, spec)
    ring = -0.5 * cfg.ring_stiffness * np.sum((d - R) ** 2)
    du = u[:, None, :] - u[None, :, :]
    kern = np.exp(-(du ** 2).sum(-1) / (2.0 * cfg.spread_width ** 2))
    spread = -cfg.spread_strength * np.triu(kern, k=1).sum()
    power = np.sum(radio.kp * d ** radio.alpha)
    delay = np.sum(radio.kd + radio.cd * d)
    return float(cfg.w_c * (ring + spread) - cfg.w_p * power - cfg.w_d * delay)


def objective_gradient(positions, cfg: GdlConfig, spec: FieldSpec, radio: RadioTech, anchor=None) -> np.ndarray:
    P = _as_array(positions)
    d, u = _geometry(P, _anchor(spec, anchor))
    R = ring_radius(cfg, spec)
    # dJ/dd_i for the radial terms; zero-length bearings contribute nothing.
    radial = (-cfg.w_c * cfg.ring_stiffness * (d - R)
              - cfg.w_p * radio.kp * radio.alpha * d ** (radio.alpha - 1.0)
              - cfg.w_d * radio.cd)
    grad = radial[:, None] * u
    du = u[:, None, :] - u[None, :, :]
    kern = np.exp(-(du ** 2).sum(-1) / (2.0 * cfg.spread_width ** 2))
    np.fill_diagonal(kern, 0.0)
    g_u = cfg.w_c * cfg.spread_strength / cfg.spread_width ** 2 * (kern[:, :, None] * du).sum(axis=1)
    # Chain rule through u = (p - a)/|p - a|: project out the radial part, divide by d.
    g_u -= (g_u * u).sum(axis=1, keepdims=True) * u
    with np.errstate(invalid="ignore", divide="ignore"):
        grad += np.where(d[:, None] > 0, g_u / d[:, None], 0.0)
    return grad


def inequality_slacks(positions, cfg: GdlConfig, spec: FieldSpec, anchor=None) -> np.ndarray:
    P = _as_array(positions)
    d, _ = _geometry(P, _anchor(spec, anchor))
    m = cfg.min_edge_distance
    return np.column_stack([
        d,
        cfg.d_max - d,
        P[:, 0] - m,
        spec.width_m - m - P[:, 0],
        P[:, 1] - m,
        spec.height_m - m - P[:, 1],
    ])


def slack_gradients(positions, spec: FieldSpec, anchor=None) -> np.ndarray:
    """d(slack)/d(position), shape (n, 6, 2)."""
    P = _as_array(positions)
    _, u = _geometry(P, _anchor(spec, anchor))
    n = len(P)
    ex = np.tile([1.0, 0.0], (n, 1))
    ey = np.tile([0.0, 1.0], (n, 1))
    return np.stack([u, -u, ex, -ex, ey, -ey], axis=1)


def equality_residuals(positions, cfg: GdlConfig) -> np.ndarray:
    return np.array([float(len(_as_array(positions)) - cfg.n_stations)])


def _check_sizes(P: np.ndarray, mult: Multipliers):
    if mult.lam.shape != (len(P), N_INEQUALITIES) or mult.mu.shape != (1,):
        raise ValidationError(
            f"multipliers sized {mult.lam.shape}/{mult.mu.shape}, expected {(len(P), N_INEQUALITIES)}/(1,)"
        )


def lagrangian(positions, mult: Multipliers, cfg: GdlConfig, spec: FieldSpec, radio: RadioTech,
               anchor=None) -> float:
    P = _as_array(positions)
    _check_sizes(P, mult)
    g = inequality_slacks(P, cfg, spec, anchor)
    h = equality_residuals(P, cfg)
    return objective(P, cfg, spec, radio, anchor) - float(np.sum(mult.lam * g)) - float(np.sum(mult.mu * h))


def lagrangian_gradient(positions, mult: Multipliers, cfg: GdlConfig, spec: FieldSpec, radio: RadioTech,
                        anchor=None) -> np.ndarray:
    P = _as_array(positions)
    _check_sizes(P, mult)
    dg = slack_gradients(P, spec, anchor)
    return objective_gradient(P, cfg, spec, radio, anchor) - np.einsum("nk,nkj->nj", mult.lam, dg)


def numerical_gradient(fun: Callable[[np.ndarray], float], x, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function, one coordinate at a time."""
    if h <= 0:
        raise DomainError("h must be > 0")
    x = np.array(x, dtype=float)
    grad = np.zeros_like(x)
    flat, gflat = x.reshape(-1), grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + h
        f_plus = fun(x)
        flat[k] = orig - h
        f_minus = fun(x)
        flat[k] = orig
        gflat[k] = (f_plus - f_minus) / (2.0 * h)
    return grad


def _project(P: np.ndarray, cfg: GdlConfig, spec: FieldSpec, a: np.ndarray) -> np.ndarray:
    d, u = _geometry(P, a)
    too_far = d > cfg.d_max
    P = np.where(too_far[:, None], a + u * cfg.d_max, P)
    m = cfg.min_edge_distance
    P[:, 0] = np.clip(P[:, 0], m, spec.width_m - m)
    P[:, 1] = np.clip(P[:, 1], m, spec.height_m - m)
    return P


def initial_deployment(spec: FieldSpec, cfg: GdlConfig, anchor=None) -> Deployment:
    """Anchor at the field centre (or ``anchor``) plus seeded uniform random stations."""
    m = cfg.min_edge_distance
    if 2 * m >= min(spec.width_m, spec.height_m):
        raise ConfigError("min_edge_distance leaves no room inside the field")
    rng = np.random.default_rng(cfg.seed)
    pts = rng.uniform((m, m), (spec.width_m - m, spec.height_m - m), size=(cfg.n_stations, 2))
    a = Point2D(*(spec.center if anchor is None else anchor))
    nodes = [SensorNode(1, a, ANCHOR, cfg.tech)]
    nodes += [SensorNode(i + 2, Point2D(float(x), float(y)), STATION, cfg.tech) for i, (x, y) in enumerate(pts)]
    dep = Deployment(spec, nodes, meta={"algorithm": "initial", "seed": cfg.seed, "iterations": 0})
    dep.links = star_links(dep)
    return dep


def _with_positions(dep: Deployment, stations: list[SensorNode], P: np.ndarray, meta: dict) -> Deployment:
    moved = {n.id: Point2D(float(x), float(y)) for n, (x, y) in zip(stations, P)}
    nodes = [replace(n, position=moved[n.id]) if n.id in moved else n for n in dep.nodes]
    return Deployment(dep.field, nodes, dict(dep.links), {**dep.meta, **meta})


def optimize(initial: Deployment, cfg: GdlConfig,
             radios: Mapping[str, RadioTech] = DEFAULT_RADIOS) -> tuple[Deployment, Trace]:
    """Projected gradient ascent on the stations with multiplier updates.

    Each iteration takes a tentative step along ``grad J + sum(lambda * grad g)``
    (active multipliers push back into the feasible region), updates
    ``lambda <- max(0, lambda - lr_multiplier * g)`` from the tentative
    slacks, then projects onto the feasible set. The loop stops once the
    largest coordinate move is below ``tol`` and no constraint is violated
    by more than 0.01. The equality multiplier stays at zero because the
    station count never changes.
    """
    spec = initial.field
    anchor_node = initial.anchor
    if anchor_node is None:
        raise ConfigError("hybrid optimisation needs an anchor node")
    stations = [n for n in initial.nodes if n.role != ANCHOR]
    if len(stations) != cfg.n_stations:
        raise ConfigError(f"expected {cfg.n_stations} stations, found {len(stations)}")
    radio = radios[cfg.tech]
    a = np.asarray(anchor_node.position, dtype=float)

    P = _project(_as_array([n.position for n in stations]), cfg, spec, a)
    mult = Multipliers.zeros(len(P))
    trace = Trace()
    best_P, best_J = P.copy(), objective(P, cfg, spec, radio, a)
    for _ in range(cfg.max_iterations):
        dg = slack_gradients(P, spec, a)
        step = objective_gradient(P, cfg, spec, radio, a) + np.einsum("nk,nkj->nj", mult.lam, dg)
        tentative = P + cfg.lr_position * step
        slack = inequality_slacks(tentative, cfg, spec, a)
        mult.lam = np.maximum(0.0, mult.lam - cfg.lr_multiplier * slack)
        violation = float(np.max(np.maximum(0.0, -slack), initial=0.0))
        new_P = _project(tentative, cfg, spec, a)
        delta = float(np.max(np.abs(new_P - P)))
        P = new_P
        J = objective(P, cfg, spec, radio, a)
        trace.record(J, delta, np.linalg.norm(mult.lam), np.linalg.norm(mult.mu))
        if J >= best_J:
            best_P, best_J = P.copy(), J
        if delta < cfg.tol and violation < 0.01:
            trace.converged = True
            break
    final = P if trace.converged else best_P
    out = _with_positions(initial, stations, final, {
        "algorithm": "hybrid",
        "seed": cfg.seed,
        "iterations": len(trace),
        "converged": trace.converged,
    })
    out.links = star_links(out)
    return out, trace


def station_distances(dep: Deployment) -> list[float]:
    a = dep.anchor.position
    return [math.hypot(n.position[0] - a[0], n.position[1] - a[1]) for n in dep.nodes if n.role != ANCHOR]


def _distance_for_overlap(target: float, r: float) -> float:
    """Centre distance at which two radius-r discs overlap by ``target`` (bisection)."""
    lo, hi = 0.0, 2.0 * r
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if pairwise_overlap((0.0, 0.0), (mid, 0.0), r) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _max_radius_in_field(spec: FieldSpec, a: np.ndarray, u: np.ndarray) -> float:
    limits = []
    for k, size in ((0, spec.width_m), (1, spec.height_m)):
        if u[k] > 0:
            limits.append((size - a[k]) / u[k])
        elif u[k] < 0:
            limits.append(-a[k] / u[k])
    return min(limits) if limits else 0.0


def align_overlap(dep: Deployment, min_ov: float = 0.10, max_ov: float = 0.30, r_sense: float = 40.0,
                  max_passes: int = 200) -> Deployment:
    """Slide stations along their anchor rays until adjacent overlaps lie in [min_ov, max_ov].

    Adjacent means consecutive in bearing order around the anchor. Pairs
    already inside the band are never touched, so a compliant deployment
    comes back unchanged. Pairs that cannot be fixed without leaving the
    field are listed in ``meta["alignment"]["infeasible_pairs"]``.
    """
    if not 0.0 <= min_ov < max_ov <= 1.0:
        raise ConfigError("need 0 <= min_ov < max_ov <= 1")
    if dep.anchor is None:
        raise ConfigError("alignment needs an anchor node")
    a = np.asarray(dep.anchor.position, dtype=float)
    band = max_ov - min_ov
    lo_target, hi_target = min_ov + 0.05 * band, max_ov - 0.05 * band

    pos = {n.id: np.asarray(n.position, dtype=float) for n in dep.nodes if n.role != ANCHOR}
    bearing = {}
    for nid, p in pos.items():
        v = p - a
        r = math.hypot(*v)
        bearing[nid] = v / r if r > 0 else np.array([1.0, 0.0])
    rmax = {nid: _max_radius_in_field(dep.field, a, bearing[nid]) for nid in pos}
    radius = {nid: float(math.hypot(*(pos[nid] - a))) for nid in pos}
    pairs = [(p.id, q.id) for p, q in station_pairs(dep)]

    def overlap(i, j):
        return pairwise_overlap(a + radius[i] * bearing[i], a + radius[j] * bearing[j], r_sense)

    moved = set()
    passes = 0
    for passes in range(1, max_passes + 1):
        changed = False
        for i, j in pairs:
            ov = overlap(i, j)
            if min_ov <= ov <= max_ov:
                continue
            target = hi_target if ov > max_ov else lo_target
            d_star = _distance_for_overlap(target, r_sense)
            ri, rj = radius[i], radius[j]
            cos_t = float(np.dot(bearing[i], bearing[j]))
            d = math.sqrt(max(ri * ri + rj * rj - 2 * ri * rj * cos_t, 0.0))
            if d > 1e-9:
                gi, gj = (ri - rj * cos_t) / d, (rj - ri * cos_t) / d
            else:
                gi, gj = 1.0, -1.0
            norm2 = gi * gi + gj * gj
            if norm2 < 1e-12:
                # Opposite bearings at zero radius: push both outward.
                gi, gj, norm2 = 1.0, 1.0, 2.0
            step = (d_star - d) / norm2
            new_i = min(max(ri + step * gi, 0.0), rmax[i])
            new_j = min(max(rj + step * gj, 0.0), rmax[j])
            if abs(new_i - ri) > 1e-12 or abs(new_j - rj) > 1e-12:
                radius[i], radius[j] = new_i, new_j
                moved.update((i, j))
                changed = True
        if not changed:
            break

    infeasible = [[i, j] for i, j in pairs if not min_ov <= overlap(i, j) <= max_ov]
    nodes = []
    for n in dep.nodes:
        if n.id in moved:
            p = a + radius[n.id] * bearing[n.id]
            nodes.append(replace(n, position=Point2D(float(p[0]), float(p[1]))))
        else:
            nodes.append(n)
    out = Deployment(dep.field, nodes, dict(dep.links), dict(dep.meta))
    out.meta["alignment"] = {
        "min_overlap": min_ov,
        "max_overlap": max_ov,
        "r_sense": r_sense,
        "passes": passes,
        "infeasible_pairs": infeasible,
    }
    return out

