"""Static FLOPs / ROM / RAM estimation and budget checking."""

from .model import (
    EXAMPLE_PROFILE,
    CostEstimate,
    Feasibility,
    TargetProfile,
    check,
    count_flops,
    estimate_costs,
    estimate_ram,
    estimate_rom,
)

__all__ = [
    "EXAMPLE_PROFILE",
    "CostEstimate",
    "Feasibility",
    "TargetProfile",
    "check",
    "count_flops",
    "estimate_costs",
    "estimate_ram",
    "estimate_rom",
]
