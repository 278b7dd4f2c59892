"""Sensor placement for crop-field wireless sensor networks."""

__version__ = "0.1.0"
