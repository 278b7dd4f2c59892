"""Field geometry: square-cell grid, target lattice, cell lookup and cell weights.

Coordinates are metres with the origin at the bottom-left corner of the
field. Cells are indexed 1-based in row-major order starting from that
corner, so cell 1 is the bottom-left cell and cell ``n_cols`` the
bottom-right one.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .errors import ConfigError, DimensionError, OutOfBoundsError

# Relative tolerance used when checking that the field is a whole number of cells.
_DIVISIBILITY_RTOL = 1e-9


class Point2D(NamedTuple):
    x: float
    y: float


class Cell(NamedTuple):
    col: int
    row: int
    index: int


@dataclass(frozen=True)
class FieldSpec:
    width_m: float = 300.0
    height_m: float = 300.0
    cell_edge_m: float = 50.0
    target_spacing_m: float = 5.0

    def __post_init__(self):
        for name in ("width_m", "height_m", "cell_edge_m", "target_spacing_m"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {value!r}")
        for name in ("width_m", "height_m"):
            ratio = getattr(self, name) / self.cell_edge_m
            if abs(ratio - round(ratio)) > _DIVISIBILITY_RTOL * max(1.0, ratio):
                raise DimensionError(
                    f"{name}={getattr(self, name)} is not a multiple of cell_edge_m={self.cell_edge_m}"
                )

    @property
    def n_cols(self) -> int:
        return int(round(self.width_m / self.cell_edge_m))

    @property
    def n_rows(self) -> int:
        return int(round(self.height_m / self.cell_edge_m))

    @property
    def n_cells(self) -> int:
        return self.n_cols * self.n_rows

    @property
    def area(self) -> float:
        return self.width_m * self.height_m

    @property
    def center(self) -> Point2D:
        return Point2D(self.width_m / 2.0, self.height_m / 2.0)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width_m, self.height_m)

    def contains(self, p, margin: float = 0.0) -> bool:
        x, y = p
        return (margin <= x <= self.width_m - margin) and (margin <= y <= self.height_m - margin)

    def cell(self, col: int, row: int) -> Cell:
        if not (1 <= col <= self.n_cols and 1 <= row <= self.n_rows):
            raise OutOfBoundsError(f"cell ({col}, {row}) outside {self.n_cols}x{self.n_rows} grid")
        return Cell(col, row, (row - 1) * self.n_cols + col)

    def cell_by_index(self, index: int) -> Cell:
        if not 1 <= index <= self.n_cells:
            raise OutOfBoundsError(f"cell index {index} outside 1..{self.n_cells}")
        row, col0 = divmod(index - 1, self.n_cols)
        return Cell(col0 + 1, row + 1, index)

    def cell_center(self, c: Cell) -> Point2D:
        e = self.cell_edge_m
        return Point2D((c.col - 0.5) * e, (c.row - 0.5) * e)

    def to_dict(self) -> dict:
        return {
            "width_m": self.width_m,
            "height_m": self.height_m,
            "cell_edge_m": self.cell_edge_m,
            "target_spacing_m": self.target_spacing_m,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FieldSpec":
        allowed = {"width_m", "height_m", "cell_edge_m", "target_spacing_m"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown field keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class Grid:
    spec: FieldSpec
    cells: tuple[Cell, ...]
    centers: tuple[Point2D, ...]

    def __len__(self):
        return len(self.cells)

    def center_of(self, c: Cell) -> Point2D:
        return self.centers[c.index - 1]

    def center_array(self) -> np.ndarray:
        return np.asarray(self.centers, dtype=float).reshape(-1, 2)


@dataclass(frozen=True)
class TargetSet:
    positions: np.ndarray
    per_cell_counts: dict

    def __len__(self):
        return len(self.positions)


PowerMap = dict  # Cell -> consumption rate


def build_grid(spec: FieldSpec) -> Grid:
    cells = tuple(spec.cell_by_index(i) for i in range(1, spec.n_cells + 1))
    return Grid(spec, cells, tuple(spec.cell_center(c) for c in cells))


def _axis_lattice(length: float, spacing: float) -> np.ndarray:
    n = int(math.floor(length / spacing + 1e-9))
    if n == 0:
        return np.empty(0)
    offset = (length - (n - 1) * spacing) / 2.0
    return offset + spacing * np.arange(n)


def generate_targets(spec: FieldSpec) -> TargetSet:
    """Square lattice of targets, centred so that none sits on the field boundary.

    Returns an empty set (with a warning) when the spacing exceeds a field side.
    """
    xs = _axis_lattice(spec.width_m, spec.target_spacing_m)
    ys = _axis_lattice(spec.height_m, spec.target_spacing_m)
    if xs.size == 0 or ys.size == 0:
        warnings.warn("target spacing larger than the field; no targets generated", stacklevel=2)
        return TargetSet(np.empty((0, 2)), {c: 0 for c in build_grid(spec).cells})
    gx, gy = np.meshgrid(xs, ys)
    positions = np.column_stack([gx.ravel(), gy.ravel()])
    counts = {c: 0 for c in build_grid(spec).cells}
    for x, y in positions:
        counts[cell_of(spec, (x, y))] += 1
    return TargetSet(positions, counts)


def cell_of(spec: FieldSpec, p) -> Cell:
    """Cell whose half-open square contains ``p``; the far edges snap to the last cell."""
    x, y = p
    if not spec.contains((x, y)):
        raise OutOfBoundsError(f"point ({x}, {y}) outside {spec.width_m}x{spec.height_m} field")
    col = min(int(math.floor(x / spec.cell_edge_m)) + 1, spec.n_cols)
    row = min(int(math.floor(y / spec.cell_edge_m)) + 1, spec.n_rows)
    return spec.cell(col, row)


def uniform_power(spec: FieldSpec, rate: float = 1.0) -> PowerMap:
    if rate < 0:
        raise ConfigError("power rate must be non-negative")
    return {c: float(rate) for c in build_grid(spec).cells}


def cell_weight(power: PowerMap, targets: TargetSet, c: Cell) -> float:
    """w(c) = P(c) * T_c(c): consumption rate times coverable target count."""
    try:
        return power[c] * targets.per_cell_counts[c]
    except KeyError:
        raise KeyError(f"cell {c} missing from power map or target counts") from None
