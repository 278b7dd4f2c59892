"""Force-directed placement of short-range extra nodes around the stations.

Each station's extras are split into branches of ``branch_length`` nodes.
Inside a branch every extra is tethered to the previous one and the first
is tethered to the station, so each branch is a hop chain that can reach
out of the station's own sensing disc. At each step an extra is moved by:

* inverse-square repulsion from the other extras (cut off at 3 * bt_range),
* a push out of the stations' discs (``clearance``),
* a leash back toward its station once it strays beyond ``wifi_range``,
* a push away from the field boundary,
* the tether tension ``penalty * (lambda_conn + rho * excess)`` toward its
  relay, applied with the opposite sign to the relay itself.

``lambda_conn`` follows ``max(0, lambda + eta * (d - reach))``, where
``reach`` is 90% of the Bluetooth range, so it grows while a tether is
over-stretched and decays once it is slack. Each move is capped at a tenth
of the Bluetooth range.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, fields
from typing import Mapping

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError
from .field import FieldSpec, Point2D
from .gdl import Trace
from .placement import ANCHOR, EXTRA, STATION, Deployment, SensorNode
from .radio import BLUETOOTH

LAMBDA_STEP = 0.1
# Proximal weight on the tether excess; the bare multiplier loop oscillates.
PROXIMAL = 0.06
LINK_SLACK = 0.9
MAX_STEP_FRACTION = 0.1
REPULSION_CUTOFF = 3.0
ROOT = -1


@dataclass(frozen=True)
class ExtraConfig:
    count: int = 100
    learning_rate: float = 0.5
    iterations: int = 300
    repulsion: float = 0.5
    attraction: float = 0.8
    penalty: float = 10.0
    wifi_range: float = 70.0
    bt_range: float = 15.0
    clearance: float = 55.0
    branch_length: int = 6
    seed: int = 0

    def __post_init__(self):
        if self.count < 0 or self.iterations < 0:
            raise ConfigError("count and iterations must be >= 0")
        for name in ("learning_rate", "repulsion", "attraction", "penalty", "clearance"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.wifi_range <= 0 or self.bt_range <= 0:
            raise ConfigError("ranges must be > 0")
        if self.branch_length < 1:
            raise ConfigError("branch_length must be >= 1")

    @classmethod
    def from_dict(cls, data: Mapping | None) -> "ExtraConfig":
        data = dict(data or {})
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"extras: unknown keys {sorted(unknown)}")
        return cls(**data)


@dataclass
class ExtraState:
    """Positions, station ids, multipliers and tether parents of the extras.

    ``parents[i]`` is the index of the extra that relays node ``i``, or
    ``ROOT`` when the node is tethered straight to its station.
    """

    positions: np.ndarray
    assignments: np.ndarray
    lambda_conn: np.ndarray
    parents: np.ndarray | None = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        self.assignments = np.asarray(self.assignments, dtype=int).reshape(-1)
        self.lambda_conn = np.asarray(self.lambda_conn, dtype=float).reshape(-1)
        m = len(self.positions)
        if self.parents is None:
            self.parents = np.full(m, ROOT)
        self.parents = np.asarray(self.parents, dtype=int).reshape(-1)
        if not len(self.assignments) == len(self.lambda_conn) == len(self.parents) == m:
            raise ConfigError("extra state arrays must have equal length")
        if np.any(self.lambda_conn < 0):
            raise ConfigError("lambda_conn must be >= 0")
        if np.any((self.parents < ROOT) | (self.parents >= m)):
            raise ConfigError("tether parent out of range")

    def __len__(self):
        return len(self.positions)

    def copy(self) -> "ExtraState":
        return ExtraState(self.positions.copy(), self.assignments.copy(), self.lambda_conn.copy(),
                          self.parents.copy())


def _hosts(stations: Deployment) -> list[SensorNode]:
    hosts = stations.by_role(ANCHOR, STATION)
    if not hosts:
        raise ConfigError("extra nodes need at least one station")
    return hosts


def _host_xy(stations: Deployment) -> np.ndarray:
    return np.array([h.position for h in _hosts(stations)], dtype=float).reshape(-1, 2)


def connectivity(extras, host_xy: np.ndarray, bt_range: float):
    """Breadth-first hop search outward from the hosts.

    Returns ``(connected, parent)``. ``parent[i]`` is ``-1 - h`` for a
    direct link to host ``h``, the index of the relaying extra, or ``None``
    when extra ``i`` cannot be reached.
    """
    extras = np.asarray(extras, dtype=float).reshape(-1, 2)
    m = len(extras)
    parent: list[int | None] = [None] * m
    if m == 0:
        return np.zeros(0, dtype=bool), parent
    d_host = np.linalg.norm(extras[:, None, :] - host_xy[None, :, :], axis=2)
    queue = deque()
    for i in range(m):
        h = int(np.argmin(d_host[i]))
        if d_host[i, h] <= bt_range:
            parent[i] = -1 - h
            queue.append(i)
    tree = cKDTree(extras)
    while queue:
        j = queue.popleft()
        for i in sorted(tree.query_ball_point(extras[j], bt_range)):
            if parent[i] is None:
                parent[i] = j
                queue.append(i)
    return np.array([p is not None for p in parent]), parent


def assign_to_stations(extras, stations: Deployment, bt_range: float):
    """Nearest station id per extra and whether it is connected, directly or over hops."""
    hosts = _hosts(stations)
    host_xy = _host_xy(stations)
    extras = np.asarray(extras, dtype=float).reshape(-1, 2)
    if len(extras) == 0:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=bool)
    d = np.linalg.norm(extras[:, None, :] - host_xy[None, :, :], axis=2)
    ids = np.array([hosts[k].id for k in np.argmin(d, axis=1)])
    connected, _ = connectivity(extras, host_xy, bt_range)
    return ids, connected


def _repulsion(P: np.ndarray, bt_range: float) -> np.ndarray:
    force = np.zeros_like(P)
    pairs = cKDTree(P).query_pairs(REPULSION_CUTOFF * bt_range, output_type="ndarray")
    if len(pairs) == 0:
        return force
    i, j = pairs[:, 0], pairs[:, 1]
    diff = P[i] - P[j]
    dist = np.linalg.norm(diff, axis=1)
    # Coincident pairs separate along a fixed, index-dependent direction.
    same = dist < 1e-9
    if np.any(same):
        ang = 2.0 * np.pi * ((i[same] * 0.618034) % 1.0)
        diff[same] = np.column_stack([np.cos(ang), np.sin(ang)])
        dist[same] = 1e-3
    unit = diff / np.linalg.norm(diff, axis=1)[:, None]
    push = unit * np.minimum((bt_range / dist) ** 2, 100.0)[:, None]
    np.add.at(force, i, push)
    np.add.at(force, j, -push)
    return force


def _station_push(P: np.ndarray, host_xy: np.ndarray, clearance: float) -> np.ndarray:
    if clearance <= 0:
        return np.zeros_like(P)
    diff = P[:, None, :] - host_xy[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    inside = (dist < clearance) & (dist > 1e-9)
    scale = np.where(inside, (clearance - dist) / (clearance * np.maximum(dist, 1e-9)), 0.0)
    return np.einsum("mh,mhk->mk", scale, diff)


def _boundary_push(P: np.ndarray, spec: FieldSpec, reach: float) -> np.ndarray:
    force = np.zeros_like(P)
    for axis, size in ((0, spec.width_m), (1, spec.height_m)):
        lo = P[:, axis]
        hi = size - P[:, axis]
        force[:, axis] += np.where(lo < reach, 1.0 - lo / reach, 0.0)
        force[:, axis] -= np.where(hi < reach, 1.0 - hi / reach, 0.0)
    return force


def force_step(state: ExtraState, cfg: ExtraConfig, spec: FieldSpec, stations: Deployment) -> ExtraState:
    """One synchronous update; every force reads the previous positions only."""
    P = state.positions
    if len(P) == 0:
        return state.copy()
    host_xy = _host_xy(stations)
    by_id = {h.id: np.asarray(h.position, dtype=float) for h in _hosts(stations)}
    own = np.array([by_id[int(s)] for s in state.assignments])

    to_station = own - P
    d_station = np.maximum(np.linalg.norm(to_station, axis=1), 1e-9)
    leash = np.maximum(d_station - cfg.wifi_range, 0.0) / cfg.bt_range
    spring = to_station / d_station[:, None] * leash[:, None]

    linked = state.parents >= 0
    relay = np.where(linked[:, None], P[np.maximum(state.parents, 0)], own)
    to_relay = relay - P
    d_relay = np.linalg.norm(to_relay, axis=1)
    excess = d_relay - LINK_SLACK * cfg.bt_range
    lam = np.maximum(0.0, state.lambda_conn + LAMBDA_STEP * excess)
    tension = cfg.penalty * (lam + PROXIMAL * np.maximum(excess, 0.0))
    pull = to_relay / np.maximum(d_relay, 1e-9)[:, None] * tension[:, None]
    np.add.at(pull, state.parents[linked], -pull[linked])

    force = (cfg.repulsion * (_repulsion(P, cfg.bt_range) + _station_push(P, host_xy, cfg.clearance))
             + cfg.attraction * spring
             + _boundary_push(P, spec, cfg.bt_range)
             + pull)
    step = cfg.learning_rate * force
    cap = MAX_STEP_FRACTION * cfg.bt_range
    norm = np.linalg.norm(step, axis=1)
    step *= np.minimum(1.0, cap / np.maximum(norm, 1e-12))[:, None]
    new_P = P + step
    new_P[:, 0] = np.clip(new_P[:, 0], 0.0, spec.width_m)
    new_P[:, 1] = np.clip(new_P[:, 1], 0.0, spec.height_m)
    return ExtraState(new_P, state.assignments.copy(), lam, state.parents.copy())


def branch_parents(assignments, branch_length: int) -> np.ndarray:
    """Tether each extra to the previous extra of the same station, restarting every ``branch_length``."""
    parents = np.full(len(assignments), ROOT)
    seen: dict[int, int] = {}
    last: dict[int, int] = {}
    for i, s in enumerate(np.asarray(assignments, dtype=int)):
        k = seen.get(s, 0)
        if k % branch_length:
            parents[i] = last[s]
        seen[s] = k + 1
        last[s] = i
    return parents


def initial_state(stations: Deployment, cfg: ExtraConfig) -> ExtraState:
    """Round-robin station assignment and a uniform random start inside each station's Bluetooth disc."""
    targets = stations.by_role(STATION) or _hosts(stations)
    rng = np.random.default_rng(cfg.seed)
    own = [targets[k % len(targets)] for k in range(cfg.count)]
    r = cfg.bt_range * np.sqrt(rng.uniform(size=cfg.count))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=cfg.count)
    centres = np.array([s.position for s in own], dtype=float).reshape(-1, 2)
    P = centres + np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    spec = stations.field
    P[:, 0] = np.clip(P[:, 0], 0.0, spec.width_m)
    P[:, 1] = np.clip(P[:, 1], 0.0, spec.height_m)
    ids = [s.id for s in own]
    return ExtraState(P, ids, np.zeros(cfg.count), branch_parents(ids, cfg.branch_length))


def mean_nearest_neighbour(P) -> float:
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    if len(P) < 2:
        return 0.0
    d, _ = cKDTree(P).query(P, k=2)
    return float(d[:, 1].mean())


def optimize_extras(stations: Deployment, cfg: ExtraConfig, spec: FieldSpec | None = None):
    """Run the force model and merge the extras into the station deployment.

    The trace objective is the connected fraction after each iteration.
    Extras keep their start station during the run. A final pass assigns
    each to its nearest station and links it to its hop-tree parent.
    Unreachable extras stay in the output without a link.
    """
    spec = spec or stations.field
    host_xy = _host_xy(stations)
    if cfg.count == 0:
        return Deployment(stations.field, list(stations.nodes), dict(stations.links), dict(stations.meta)), Trace()
    state = initial_state(stations, cfg)
    start_nn = mean_nearest_neighbour(state.positions)
    trace = Trace()
    for _ in range(cfg.iterations):
        new = force_step(state, cfg, spec, stations)
        delta = float(np.max(np.abs(new.positions - state.positions)))
        state = new
        connected, _ = connectivity(state.positions, host_xy, cfg.bt_range)
        trace.record(connected.mean(), delta, float(np.linalg.norm(state.lambda_conn)))
    return merge_extras(stations, state, cfg, start_nn), trace


def merge_extras(stations: Deployment, state: ExtraState, cfg: ExtraConfig, start_nn: float | None = None) -> Deployment:
    hosts = _hosts(stations)
    assigned, connected = assign_to_stations(state.positions, stations, cfg.bt_range)
    _, parent = connectivity(state.positions, _host_xy(stations), cfg.bt_range)
    first = stations.next_id()
    extras = [SensorNode(first + i, Point2D(float(x), float(y)), EXTRA, BLUETOOTH)
              for i, (x, y) in enumerate(state.positions)]
    links = dict(stations.links)
    for i, p in enumerate(parent):
        if p is not None:
            links[first + i] = hosts[-1 - p].id if p < 0 else first + p
    meta = dict(stations.meta)
    meta["extras"] = {
        "count": len(extras),
        "seed": cfg.seed,
        "iterations": cfg.iterations,
        "connected": int(connected.sum()),
        "assignments": {str(first + i): int(a) for i, a in enumerate(assigned)},
        "mean_nn_start": start_nn,
        "mean_nn_end": mean_nearest_neighbour(state.positions),
    }
    return Deployment(stations.field, list(stations.nodes) + extras, links, meta)


def connected_fraction(dep: Deployment, bt_range: float = 15.0) -> float:
    extras = dep.positions(EXTRA)
    if len(extras) == 0:
        return 1.0
    connected, _ = connectivity(extras, _host_xy(dep), bt_range)
    return float(connected.mean())
