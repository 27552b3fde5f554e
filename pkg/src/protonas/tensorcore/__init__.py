"""Minimal float64 forward/backward engine for decoded graphs."""

from .engine import (
    ForwardTrace,
    GradientRecord,
    ParamSet,
    backward,
    cross_entropy,
    forward,
    init_params,
)

__all__ = [
    "ForwardTrace",
    "GradientRecord",
    "ParamSet",
    "backward",
    "cross_entropy",
    "forward",
    "init_params",
]
