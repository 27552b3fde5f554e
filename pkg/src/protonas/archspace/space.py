"""Search space definition and hyperparameter vectors.

A candidate is described by 14 genes: one categorical baseline choice,
four per-group depths, four per-group kernel/stride choices, one global
width multiplier and four per-group pruning sparsities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

GROUP_COUNT = 4
DEFAULT_DEPTH_VALUES = (0, 1, 2, 3)
DEFAULT_KERNEL_STRIDE = ((3, 2), (3, 1), (5, 2), (5, 1), (7, 2), (7, 1))
DEFAULT_WIDTH_RANGE = (0.1, 1.0)
DEFAULT_SPARSITY_RANGE = (0.1, 0.9)


@dataclass(frozen=True)
class TaskSpec:
    """Input tensor layout and class count for decoded networks.

    input_shape is channels-first without the batch axis: (C, H, W) for
    image tasks, (C, L) for time-series tasks.
    """

    input_shape: tuple[int, ...]
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "input_shape", tuple(int(v) for v in self.input_shape))
        if len(self.input_shape) not in (2, 3):
            raise ConfigError("task.input_shape: expected (C, L) or (C, H, W)")
        if any(v < 1 for v in self.input_shape):
            raise ConfigError("task.input_shape: all extents must be >= 1")
        if self.num_classes < 2:
            raise ConfigError("task.num_classes: must be >= 2")

    @property
    def dimensionality(self) -> int:
        return len(self.input_shape) - 1


@dataclass(frozen=True)
class SearchSpaceDef:
    """Gene domains for the 14-gene candidate encoding.

    The defaults are the production domains; tests may narrow them
    (e.g. a single baseline with depth_values=[0]) without changing the
    gene layout, which always assumes four groups.
    """

    baseline_pool: tuple[str, ...]
    depth_values: tuple[int, ...] = DEFAULT_DEPTH_VALUES
    kernel_stride_values: tuple[tuple[int, int], ...] = DEFAULT_KERNEL_STRIDE
    width_range: tuple[float, float] = DEFAULT_WIDTH_RANGE
    sparsity_range: tuple[float, float] = DEFAULT_SPARSITY_RANGE
    group_count: int = GROUP_COUNT

    def __post_init__(self):
        object.__setattr__(self, "baseline_pool", tuple(self.baseline_pool))
        object.__setattr__(self, "depth_values", tuple(int(v) for v in self.depth_values))
        object.__setattr__(
            self,
            "kernel_stride_values",
            tuple((int(k), int(s)) for k, s in self.kernel_stride_values),
        )
        object.__setattr__(self, "width_range", tuple(float(v) for v in self.width_range))
        object.__setattr__(self, "sparsity_range", tuple(float(v) for v in self.sparsity_range))
        if not self.baseline_pool:
            raise ConfigError("space.baseline_pool: must not be empty")
        if self.group_count != GROUP_COUNT:
            raise ConfigError("space.group_count: the gene layout is fixed at 4 groups")
        if not self.depth_values or any(d < 0 for d in self.depth_values):
            raise ConfigError("space.depth_values: need at least one value >= 0")
        if not self.kernel_stride_values:
            raise ConfigError("space.kernel_stride_values: must not be empty")
        for k, s in self.kernel_stride_values:
            if k < 1 or k % 2 == 0:
                raise ConfigError(f"space.kernel_stride_values: kernel {k} must be odd")
            if s not in (1, 2):
                raise ConfigError(f"space.kernel_stride_values: stride {s} must be 1 or 2")
        lo, hi = self.width_range
        if not (0.0 < lo <= hi):
            raise ConfigError("space.width_range: need 0 < lo <= hi")
        lo, hi = self.sparsity_range
        if not (0.0 <= lo <= hi < 1.0):
            raise ConfigError("space.sparsity_range: need 0 <= lo <= hi < 1")

    def gene_count(self) -> int:
        # baseline + depths + kernel/stride choices + width + sparsities
        return 1 + self.group_count + self.group_count + 1 + self.group_count


@dataclass(frozen=True)
class HyperparamVector:
    """One sampled candidate.

    group_depth holds depth values; kernel_stride holds indices into
    SearchSpaceDef.kernel_stride_values.
    """

    architecture: int
    group_depth: tuple[int, int, int, int]
    kernel_stride: tuple[int, int, int, int]
    width_multiplier: float
    pruning_sparsity: tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "group_depth", tuple(int(v) for v in self.group_depth))
        object.__setattr__(self, "kernel_stride", tuple(int(v) for v in self.kernel_stride))
        object.__setattr__(
            self, "pruning_sparsity", tuple(float(v) for v in self.pruning_sparsity)
        )

    def to_genes(self) -> list[float]:
        """Flatten to the canonical 14-gene list."""
        return (
            [float(self.architecture)]
            + [float(v) for v in self.group_depth]
            + [float(v) for v in self.kernel_stride]
            + [float(self.width_multiplier)]
            + [float(v) for v in self.pruning_sparsity]
        )

    @classmethod
    def from_genes(cls, genes) -> "HyperparamVector":
        genes = list(genes)
        if len(genes) != 14:
            raise ConfigError(f"expected 14 genes, got {len(genes)}")
        return cls(
            architecture=int(round(genes[0])),
            group_depth=tuple(int(round(g)) for g in genes[1:5]),
            kernel_stride=tuple(int(round(g)) for g in genes[5:9]),
            width_multiplier=float(genes[9]),
            pruning_sparsity=tuple(float(g) for g in genes[10:14]),
        )

    def in_space(self, space: SearchSpaceDef) -> bool:
        wlo, whi = space.width_range
        slo, shi = space.sparsity_range
        return (
            0 <= self.architecture < len(space.baseline_pool)
            and all(d in space.depth_values for d in self.group_depth)
            and all(0 <= i < len(space.kernel_stride_values) for i in self.kernel_stride)
            and wlo <= self.width_multiplier <= whi
            and all(slo <= s <= shi for s in self.pruning_sparsity)
        )


def sample(rng: np.random.Generator, space: SearchSpaceDef) -> HyperparamVector:
    """Draw one uniform candidate.

    Categorical genes are uniform over their choice lists; width and
    sparsities are uniform over their closed ranges.  The draw order is
    fixed (architecture, depths, kernel/stride, width, sparsities) so a
    seeded generator reproduces the same vector.
    """
    arch = int(rng.integers(len(space.baseline_pool)))
    depth = tuple(
        int(space.depth_values[rng.integers(len(space.depth_values))])
        for _ in range(space.group_count)
    )
    ks = tuple(
        int(rng.integers(len(space.kernel_stride_values))) for _ in range(space.group_count)
    )
    wlo, whi = space.width_range
    width = float(rng.uniform(wlo, whi))
    slo, shi = space.sparsity_range
    sparsity = tuple(float(rng.uniform(slo, shi)) for _ in range(space.group_count))
    return HyperparamVector(arch, depth, ks, width, sparsity)
