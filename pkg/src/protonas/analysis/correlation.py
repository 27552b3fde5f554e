"""Rank agreement between scoring signals (Kendall tau-b)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateSeries, DimensionMismatch


@dataclass(frozen=True)
class RankSeries:
    """A labelled series of scores aligned by observation index."""

    label: str
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass(frozen=True)
class TauMatrix:
    labels: tuple[str, ...]
    values: np.ndarray  # (len(labels), len(labels)), symmetric, unit diagonal


def kendall_tau_b(x, y) -> float:
    """Kendall rank correlation with tie correction.

    tau_b = S / sqrt((n0 - n1) (n0 - n2)) where S counts concordant
    minus discordant pairs and n1, n2 are the tied-pair counts of each
    series.  Raises DegenerateSeries when either series is constant
    (the coefficient is undefined) and DimensionMismatch on unequal
    lengths.
    """
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.ndim != 1 or yv.ndim != 1 or xv.shape != yv.shape:
        raise DimensionMismatch("series must be one-dimensional and equally long")
    n = len(xv)
    if n < 2:
        raise DegenerateSeries("need at least two observations")
    dx = np.sign(xv[:, None] - xv[None, :])
    dy = np.sign(yv[:, None] - yv[None, :])
    iu = np.triu_indices(n, 1)
    s = float((dx[iu] * dy[iu]).sum())
    n0 = n * (n - 1) // 2
    n1 = n0 - int(np.count_nonzero(dx[iu]))
    n2 = n0 - int(np.count_nonzero(dy[iu]))
    if n0 == n1 or n0 == n2:
        raise DegenerateSeries("constant series has no defined rank correlation")
    return s / math.sqrt(float(n0 - n1) * float(n0 - n2))


def tau_matrix(series: list[RankSeries]) -> TauMatrix:
    """Pairwise tau-b over aligned series; diagonal is exactly 1."""
    if len(series) < 2:
        raise DimensionMismatch("need at least two series")
    length = len(series[0].values)
    for s in series:
        if len(s.values) != length:
            raise DimensionMismatch("series lengths disagree")
    k = len(series)
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            t = kendall_tau_b(series[i].values, series[j].values)
            out[i, j] = t
            out[j, i] = t
    return TauMatrix(labels=tuple(s.label for s in series), values=out)
