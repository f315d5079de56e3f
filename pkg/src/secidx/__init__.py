"""Actuator security indices for linear networked control systems."""

from .model import (
    INF,
    Component,
    ComponentSet,
    ModelError,
    Realization,
    StructuralModel,
    add_actuator,
    add_sensor,
    load_model,
    random_realization,
    save_model,
    u,
    y,
)

__version__ = "0.1.0"

__all__ = [
    "INF",
    "Component",
    "ComponentSet",
    "ModelError",
    "Realization",
    "StructuralModel",
    "add_actuator",
    "add_sensor",
    "load_model",
    "random_realization",
    "save_model",
    "u",
    "y",
]
