"""Static deployment cost estimation for int8 targets.

These are planning estimates, not measurements: FLOPs from layer
geometry (1 multiply-accumulate = 2 FLOPs), ROM from int8 weights plus
per-output-channel quantization metadata, RAM from peak live activation
buffers under a produce-to-last-consumer liveness model with an in-order
schedule.  A real runtime's allocator and code size will differ; the
estimates are meant to rank candidates and gate clearly oversized ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..archspace.graph import ArchitectureGraph
from ..errors import ConfigError

MAC_FLOPS = 2  # one multiply-accumulate
WEIGHT_BYTES = 1  # int8 weights
BIAS_BYTES = 4  # int32 accumulators
CHANNEL_META_BYTES = 8  # per-output-channel scale + zero point
ACTIVATION_BYTES = 1  # int8 activations


@dataclass(frozen=True)
class TargetProfile:
    """Deployment budget: peak RAM, ROM image, and per-inference FLOPs."""

    name: str
    ram_max: int
    rom_max: int
    flops_max: int
    rom_code_overhead: int = 0

    def __post_init__(self):
        if min(self.ram_max, self.rom_max, self.flops_max) < 1:
            raise ConfigError(f"profile '{self.name}': limits must be positive")
        if self.rom_code_overhead < 0:
            raise ConfigError(f"profile '{self.name}': rom_code_overhead must be >= 0")


@dataclass(frozen=True)
class CostEstimate:
    flops: int
    rom_bytes: int
    ram_bytes: int


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    violation: float


def _elements(shape: tuple[int, ...]) -> int:
    total = 1
    for v in shape:
        total *= v
    return total


def count_flops(g: ArchitectureGraph) -> int:
    """Total forward FLOPs for one input sample."""
    shapes = g.shapes or g.infer_shapes()
    total = 0
    for i, node in enumerate(g.nodes):
        out = shapes[i]
        out_elems = _elements(out)
        spatial = _elements(out[1:])
        dims = len(out) - 1
        if node.kind == "conv":
            total += MAC_FLOPS * node.in_channels * node.out_channels * node.kernel ** dims * spatial
            if node.bias:
                total += out_elems
        elif node.kind == "depthwise-conv":
            total += MAC_FLOPS * node.out_channels * node.kernel ** dims * spatial
            if node.bias:
                total += out_elems
        elif node.kind == "linear":
            total += MAC_FLOPS * node.in_channels * node.out_channels
            if node.bias:
                total += node.out_channels
        elif node.kind in ("relu", "batchnorm", "maxpool", "global-avg-pool", "add"):
            total += out_elems
        # concat moves bytes but performs no arithmetic
    return total


def estimate_rom(g: ArchitectureGraph, code_overhead: int = 0) -> int:
    """Flash footprint of the parameter image.

    int8 weights, one 8-byte quantization record per output channel,
    int32 biases where present; batchnorm is folded into the preceding
    convolution at deployment and adds nothing.
    """
    shapes = g.shapes or g.infer_shapes()
    total = int(code_overhead)
    for i, node in enumerate(g.nodes):
        dims = len(shapes[i]) - 1
        if node.kind == "conv":
            weights = node.in_channels * node.out_channels * node.kernel ** dims
        elif node.kind == "depthwise-conv":
            weights = node.out_channels * node.kernel ** dims
        elif node.kind == "linear":
            weights = node.in_channels * node.out_channels
        else:
            continue
        total += weights * WEIGHT_BYTES + node.out_channels * CHANNEL_META_BYTES
        if node.bias:
            total += node.out_channels * BIAS_BYTES
    return total


def estimate_ram(g: ArchitectureGraph) -> int:
    """Peak live activation bytes under produce-to-last-consumer liveness.

    Buffers (the network input included) stay resident from the step
    that produces them until their last consumer finishes, so a skip
    connection keeps its source buffer alive across the whole body.
    """
    shapes = g.shapes or g.infer_shapes()
    n = len(g.nodes)
    # buffer ids: 0..n-1 node outputs, n the network input
    sizes = [_elements(s) * ACTIVATION_BYTES for s in shapes]
    sizes.append(_elements(tuple(g.input_shape)) * ACTIVATION_BYTES)
    last_use = [i for i in range(n + 1)]
    last_use[n] = -1
    for i in range(n):
        ps = g.preds[i]
        if not ps:
            last_use[n] = max(last_use[n], i)
        for p in ps:
            last_use[p] = max(last_use[p], i)
    peak = sizes[n]  # the input buffer alone, before any node runs
    for i in range(n):
        live = sizes[i]
        if last_use[n] >= i:
            live += sizes[n]
        for j in range(i):
            if last_use[j] >= i:
                live += sizes[j]
        peak = max(peak, live)
    return peak


def check(c: CostEstimate, t: TargetProfile) -> Feasibility:
    """Budget check; violation sums the relative overshoot per resource."""
    violation = 0.0
    for value, limit in (
        (c.ram_bytes, t.ram_max),
        (c.rom_bytes, t.rom_max),
        (c.flops, t.flops_max),
    ):
        if value > limit:
            violation += (value - limit) / limit
    return Feasibility(feasible=violation == 0.0, violation=violation)


def estimate_costs(g: ArchitectureGraph, profile: TargetProfile | None = None) -> CostEstimate:
    overhead = profile.rom_code_overhead if profile is not None else 0
    return CostEstimate(
        flops=count_flops(g),
        rom_bytes=estimate_rom(g, overhead),
        ram_bytes=estimate_ram(g),
    )


EXAMPLE_PROFILE = TargetProfile(
    name="imxrt1062-like",
    ram_max=1 * 1024 * 1024,
    rom_max=2 * 1024 * 1024,
    flops_max=200_000_000,
)
