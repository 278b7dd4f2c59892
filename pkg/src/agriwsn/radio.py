"""Radio technology profiles and the distance models built on them.

Power on a link of length d is ``kp * d**alpha``; delay is ``kd + cd * d``.
The shipped numbers are illustrative and only meant to be mutually
consistent (Bluetooth short and cheap, LTE long and expensive, ...).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Mapping

from .errors import ConfigError, DomainError

WIFI = "WiFi"
LORA = "LoRa"
BLUETOOTH = "Bluetooth"
ZIGBEE = "Zigbee"
LTE = "LTE"
ZWAVE = "Z-Wave"


@dataclass(frozen=True)
class RadioTech:
    name: str
    range_m: float
    kp: float
    alpha: float
    kd: float
    cd: float
    bandwidth: float  # kbit/s
    unit_cost: float
    capacity: int
    metadata: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.range_m > 0:
            raise ConfigError(f"{self.name}: range_m must be > 0")
        if self.kp < 0 or self.kd < 0 or self.cd < 0:
            raise ConfigError(f"{self.name}: kp, kd and cd must be >= 0")
        if self.alpha < 1:
            raise ConfigError(f"{self.name}: alpha must be >= 1")
        if self.capacity < 1:
            raise ConfigError(f"{self.name}: capacity must be >= 1")
        if self.unit_cost < 0 or self.bandwidth < 0:
            raise ConfigError(f"{self.name}: unit_cost and bandwidth must be >= 0")

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["metadata"] = dict(self.metadata)
        return out


def _check_distance(d: float) -> float:
    if not d >= 0 or math.isnan(d):
        raise DomainError(f"distance must be >= 0, got {d}")
    return d


def link_power(tech: RadioTech, d: float) -> float:
    return tech.kp * _check_distance(d) ** tech.alpha


def link_delay(tech: RadioTech, d: float) -> float:
    return tech.kd + tech.cd * _check_distance(d)


def link_feasible(tech: RadioTech, d: float) -> bool:
    return _check_distance(d) <= tech.range_m


# WiFi range is the cluster side L*M = 50 m * 4 so that a field-centred
# controller reaches every cell centre of the 300 m field.
DEFAULT_RADIOS: dict[str, RadioTech] = {
    WIFI: RadioTech(WIFI, range_m=200.0, kp=0.3, alpha=2.0, kd=2.0, cd=0.05,
                    bandwidth=54_000.0, unit_cost=25.0, capacity=64,
                    metadata={"repetition_M": 4, "deployment_L_m": 50.0}),
    LORA: RadioTech(LORA, range_m=5000.0, kp=0.02, alpha=2.0, kd=60.0, cd=0.01,
                    bandwidth=50.0, unit_cost=30.0, capacity=1000),
    BLUETOOTH: RadioTech(BLUETOOTH, range_m=15.0, kp=0.05, alpha=2.0, kd=5.0, cd=0.1,
                         bandwidth=2_000.0, unit_cost=8.0, capacity=100),
    ZIGBEE: RadioTech(ZIGBEE, range_m=100.0, kp=0.08, alpha=2.0, kd=15.0, cd=0.05,
                      bandwidth=250.0, unit_cost=12.0, capacity=65),
    LTE: RadioTech(LTE, range_m=10_000.0, kp=1.0, alpha=2.0, kd=30.0, cd=0.001,
                   bandwidth=100_000.0, unit_cost=60.0, capacity=1000),
    ZWAVE: RadioTech(ZWAVE, range_m=40.0, kp=0.1, alpha=2.0, kd=20.0, cd=0.1,
                     bandwidth=100.0, unit_cost=20.0, capacity=232),
}

_PROFILE_KEYS = {f.name for f in fields(RadioTech)} - {"name"}


def load_radios(section: Mapping | None) -> dict[str, RadioTech]:
    """Merge a ``radios`` config section over the shipped defaults.

    Each entry either overrides fields of a known profile or, for a new
    name, must give every field. Unknown keys are rejected.
    """
    radios = dict(DEFAULT_RADIOS)
    for name, spec in (section or {}).items():
        if not isinstance(spec, Mapping):
            raise ConfigError(f"radios.{name} must be an object")
        unknown = set(spec) - _PROFILE_KEYS
        if unknown:
            raise ConfigError(f"radios.{name}: unknown keys {sorted(unknown)}")
        if name in radios:
            radios[name] = replace(radios[name], **spec)
        else:
            missing = _PROFILE_KEYS - set(spec) - {"metadata"}
            if missing:
                raise ConfigError(f"radios.{name}: new profile missing {sorted(missing)}")
            radios[name] = RadioTech(name=name, **spec)
    return radios
