"""Sensor nodes, deployments and the deterministic layout generators.

Node ids start at 1. Parent id 0 is reserved for the field controller, a
virtual sink at the field centre that is not itself a sensor node; grid
layouts without an anchor report to it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Mapping

import numpy as np

from .errors import BoundaryError, ConfigError, DomainError, FeasibilityError, TopologyError
from .field import FieldSpec, Point2D, build_grid
from .radio import WIFI, RadioTech, link_feasible

ANCHOR = "anchor"
STATION = "station"
NORMAL = "normal"
EXTRA = "extra"
ROLES = (ANCHOR, STATION, NORMAL, EXTRA)

CONTROLLER_ID = 0

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class SensorNode:
    id: int
    position: Point2D
    role: str = STATION
    tech: str = WIFI

    def __post_init__(self):
        if self.role not in ROLES:
            raise ConfigError(f"unknown role {self.role!r}")
        if self.id < 1:
            raise ConfigError("node ids start at 1")


@dataclass
class Deployment:
    field: FieldSpec
    nodes: list[SensorNode]
    links: dict[int, int] = dc_field(default_factory=dict)
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ConfigError("node ids must be unique")
        if sum(n.role == ANCHOR for n in self.nodes) > 1:
            raise ConfigError("a deployment holds at most one anchor")
        for n in self.nodes:
            if not self.field.contains(n.position):
                raise BoundaryError(f"node {n.id} at {tuple(n.position)} is outside the field")

    def __len__(self):
        return len(self.nodes)

    @property
    def anchor(self) -> SensorNode | None:
        return next((n for n in self.nodes if n.role == ANCHOR), None)

    def by_role(self, *roles: str) -> list[SensorNode]:
        return [n for n in self.nodes if n.role in roles]

    def node(self, node_id: int) -> SensorNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def positions(self, *roles: str) -> np.ndarray:
        nodes = self.by_role(*roles) if roles else self.nodes
        return np.array([n.position for n in nodes], dtype=float).reshape(-1, 2)

    def parent_position(self, parent_id: int) -> Point2D:
        if parent_id == CONTROLLER_ID:
            return self.field.center
        return self.node(parent_id).position

    def link_lengths(self) -> dict[int, float]:
        index = {n.id: n for n in self.nodes}
        out = {}
        for child, parent in self.links.items():
            if child not in index:
                raise TopologyError(f"link from unknown node {child}")
            if parent != CONTROLLER_ID and parent not in index:
                raise TopologyError(f"node {child} links to missing parent {parent}")
            out[child] = anchor_distance(index[child].position, self.parent_position(parent))
        return out

    def validate(self, radios: Mapping[str, RadioTech]) -> None:
        """Raise if a link exceeds the child's radio range."""
        index = {n.id: n for n in self.nodes}
        for child, length in self.link_lengths().items():
            tech = radios[index[child].tech]
            if not link_feasible(tech, length):
                raise FeasibilityError(
                    f"link {child}->{self.links[child]} is {length:.3f} m, beyond {tech.name} range {tech.range_m} m"
                )

    def next_id(self) -> int:
        return max((n.id for n in self.nodes), default=0) + 1


def star_links(dep: Deployment) -> dict[int, int]:
    """Every non-anchor node reports directly to the anchor, or to the controller if there is none."""
    hub = dep.anchor.id if dep.anchor is not None else CONTROLLER_ID
    return {n.id: hub for n in dep.nodes if n.role != ANCHOR}


def _grid_deployment(spec: FieldSpec, centers: Iterable[Point2D], algorithm: str) -> Deployment:
    nodes = [SensorNode(i, Point2D(*p), STATION, WIFI) for i, p in enumerate(centers, start=1)]
    dep = Deployment(spec, nodes, meta={"algorithm": algorithm, "seed": None, "iterations": 0})
    dep.links = star_links(dep)
    return dep


def uniform_layout(spec: FieldSpec) -> Deployment:
    return _grid_deployment(spec, build_grid(spec).centers, "uniform")


def fibonacci_cells(n_cells: int) -> list[int]:
    """Distinct Fibonacci numbers up to ``n_cells``: 1, 2, 3, 5, 8, ..."""
    if n_cells < 1:
        return []
    out = [1]
    a, b = 1, 2
    while b <= n_cells:
        out.append(b)
        a, b = b, a + b
    return out


def serpentine_cell(spec: FieldSpec, k: int):
    """Cell visited at step ``k`` of a boustrophedon walk (odd rows reversed)."""
    row0, col0 = divmod(k - 1, spec.n_cols)
    if row0 % 2 == 1:
        col0 = spec.n_cols - 1 - col0
    return spec.cell(col0 + 1, row0 + 1)


def fibonacci_layout(spec: FieldSpec, walk: str = "serpentine") -> Deployment:
    """One station at the centre of each Fibonacci-numbered cell.

    ``walk`` chooses how the sequence numbers map onto cells: ``row-major``
    uses the cell index directly, ``serpentine`` counts along a
    boustrophedon path which reverses direction on every other row.
    """
    grid = build_grid(spec)
    if walk == "row-major":
        cells = [grid.cells[k - 1] for k in fibonacci_cells(spec.n_cells)]
    elif walk == "serpentine":
        cells = [serpentine_cell(spec, k) for k in fibonacci_cells(spec.n_cells)]
    else:
        raise ConfigError(f"unknown Fibonacci walk {walk!r}")
    dep = _grid_deployment(spec, [grid.center_of(c) for c in cells], "fibonacci")
    dep.meta["walk"] = walk
    dep.meta["cells"] = [c.index for c in cells]
    return dep


def radial_layout(spec: FieldSpec, anchor: Point2D, n: int, distance: float,
                  phase: float = 0.0) -> Deployment:
    if n < 1:
        raise DomainError("n must be >= 1")
    if distance < 0:
        raise DomainError("distance must be >= 0")
    nodes = [SensorNode(1, Point2D(*anchor), ANCHOR, WIFI)]
    for i in range(n):
        theta = phase + 2.0 * math.pi * i / n
        p = Point2D(anchor[0] + distance * math.cos(theta), anchor[1] + distance * math.sin(theta))
        if not spec.contains(p):
            raise BoundaryError(f"station {i + 1} at ({p.x:.3f}, {p.y:.3f}) falls outside the field")
        nodes.append(SensorNode(i + 2, p, STATION, WIFI))
    dep = Deployment(spec, nodes, meta={"algorithm": "radial", "seed": None, "iterations": 0})
    dep.links = star_links(dep)
    return dep


def sequential_spacing(q: float, d0: float, n: int) -> list[float]:
    """D_i = q * D_{i-1} starting from d0."""
    if q <= 0 or d0 <= 0:
        raise DomainError("q and d0 must be positive")
    return [d0 * q ** i for i in range(n)]


def anchor_distance(node, anchor) -> float:
    return math.hypot(node[0] - anchor[0], node[1] - anchor[1])


def inclined_projection(d: float, psi: float) -> float:
    """Horizontal component d*cos(psi) of a distance inclined by psi."""
    if d < 0:
        raise DomainError("d must be >= 0")
    if not -math.pi / 2 <= psi <= math.pi / 2:
        raise DomainError("psi must lie in [-pi/2, pi/2]")
    return d * math.cos(psi)
