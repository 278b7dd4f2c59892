"""Experiment configuration: one JSON file with a section per component.

Every section is optional and falls back to the shipped defaults. Unknown
keys anywhere are rejected.

    {
      "field":     {"width_m": 300, "height_m": 300, "cell_edge_m": 50, "target_spacing_m": 5},
      "radios":    {"WiFi": {"range_m": 200}},
      "placement": {"fibonacci_walk": "serpentine"},
      "gdl":       {...GdlConfig fields...},
      "alignment": {"enabled": true, "min_overlap": 0.1, "max_overlap": 0.3},
      "extras":    {...ExtraConfig fields...},
      "pso":       {...PsoConfig fields...},
      "fahp":      {"model": null},
      "metrics":   {"r_sense": 40, "extra_r_sense": 15, "resolution": 1.0, "samples": 1000000},
      "seeds":     [0, 1, ...],
      "output_dir": "out"
    }
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field, fields
from pathlib import Path
from typing import Mapping

from .errors import ConfigError
from .extras import ExtraConfig
from .field import FieldSpec
from .gdl import GdlConfig
from .placement import ANCHOR, EXTRA, NORMAL, STATION
from .pso import PsoConfig
from .radio import RadioTech, load_radios

SECTIONS = {"field", "radios", "placement", "gdl", "alignment", "extras", "pso", "fahp", "metrics", "seeds",
            "output_dir"}
DEFAULT_SEEDS = tuple(range(20))


def _strict(cls, data: Mapping | None, section: str):
    data = dict(data or {})
    unknown = set(data) - {f.name for f in fields(cls)}
    if unknown:
        raise ConfigError(f"{section}: unknown keys {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"{section}: {exc}") from None


@dataclass(frozen=True)
class MetricsConfig:
    r_sense: float = 40.0
    extra_r_sense: float = 15.0
    resolution: float = 1.0
    samples: int = 1_000_000

    def __post_init__(self):
        if self.r_sense < 0 or self.extra_r_sense < 0:
            raise ConfigError("sensing radii must be >= 0")
        if self.resolution <= 0 or self.samples < 1:
            raise ConfigError("resolution must be > 0 and samples >= 1")

    def radii(self) -> dict[str, float]:
        r = float(self.r_sense)
        return {ANCHOR: r, STATION: r, NORMAL: r, EXTRA: float(self.extra_r_sense)}


@dataclass(frozen=True)
class AlignmentConfig:
    enabled: bool = True
    min_overlap: float = 0.10
    max_overlap: float = 0.30

    def __post_init__(self):
        if not 0 <= self.min_overlap < self.max_overlap <= 1:
            raise ConfigError("alignment needs 0 <= min_overlap < max_overlap <= 1")


@dataclass(frozen=True)
class PlacementConfig:
    fibonacci_walk: str = "serpentine"

    def __post_init__(self):
        if self.fibonacci_walk not in ("serpentine", "row-major"):
            raise ConfigError(f"unknown Fibonacci walk {self.fibonacci_walk!r}")


@dataclass(frozen=True)
class FahpConfig:
    model: str | None = None


@dataclass
class ExperimentConfig:
    field: FieldSpec = dc_field(default_factory=FieldSpec)
    radios: dict[str, RadioTech] = dc_field(default_factory=lambda: load_radios(None))
    placement: PlacementConfig = dc_field(default_factory=PlacementConfig)
    gdl: GdlConfig = dc_field(default_factory=GdlConfig)
    alignment: AlignmentConfig = dc_field(default_factory=AlignmentConfig)
    extras: ExtraConfig = dc_field(default_factory=ExtraConfig)
    pso: PsoConfig = dc_field(default_factory=PsoConfig)
    fahp: FahpConfig = dc_field(default_factory=FahpConfig)
    metrics: MetricsConfig = dc_field(default_factory=MetricsConfig)
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    output_dir: str = "out"
    base_dir: Path = Path(".")

    def resolve(self, path: str | None) -> Path | None:
        """Interpret a path from the config file relative to that file."""
        if path is None:
            return None
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def config_from_dict(data: Mapping, base_dir: Path = Path(".")) -> ExperimentConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    try:
        spec = FieldSpec.from_dict(data.get("field", {}))
    except TypeError as exc:
        raise ConfigError(f"field: {exc}") from None
    seeds = data.get("seeds", list(DEFAULT_SEEDS))
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) and s >= 0 for s in seeds):
        raise ConfigError("seeds must be a non-empty list of non-negative integers")
    out = data.get("output_dir", "out")
    if not isinstance(out, str):
        raise ConfigError("output_dir must be a string")
    try:
        radios = load_radios(data.get("radios"))
    except TypeError as exc:
        raise ConfigError(f"radios: {exc}") from None
    return ExperimentConfig(
        field=spec,
        radios=radios,
        placement=_strict(PlacementConfig, data.get("placement"), "placement"),
        gdl=_strict(GdlConfig, data.get("gdl"), "gdl"),
        alignment=_strict(AlignmentConfig, data.get("alignment"), "alignment"),
        extras=_strict(ExtraConfig, data.get("extras"), "extras"),
        pso=_strict(PsoConfig, data.get("pso"), "pso"),
        fahp=_strict(FahpConfig, data.get("fahp"), "fahp"),
        metrics=_strict(MetricsConfig, data.get("metrics"), "metrics"),
        seeds=tuple(seeds),
        output_dir=out,
        base_dir=base_dir,
    )


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Read a config file; ``None`` gives the defaults."""
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(data, path.parent)
