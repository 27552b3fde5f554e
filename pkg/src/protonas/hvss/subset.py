"""Hypervolume subset selection.

Given a Pareto front P (minimization, typically normalized to [0, 1]
per objective) pick the k points whose joint hypervolume against the
reference point is maximal.  select_subset runs a genetic algorithm
over binary membership genes; exhaustive_subset is the brute-force
oracle for small instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..errors import InfeasibleK
from .hv import hypervolume

DEFAULT_REF_VALUE = 1.1


@dataclass
class HssConfig:
    population: int = 2000
    mutation_rate: float = 0.3
    generations: int = 10000
    stagnation: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if not (0.0 <= self.mutation_rate <= 1.0):
            raise ValueError("mutation_rate must lie in [0, 1]")
        if self.generations < 1 or self.stagnation < 1:
            raise ValueError("generations and stagnation must be >= 1")


@dataclass
class SubsetGene:
    """Binary membership vector over the front; repair enforces sum == k."""

    bits: np.ndarray
    k: int

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool).copy()
        if self.bits.ndim != 1:
            raise ValueError("bits must be one-dimensional")

    def indices(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.bits)]


def default_reference(d: int) -> tuple[float, ...]:
    return (DEFAULT_REF_VALUE,) * d


def normalize_objectives(points) -> np.ndarray:
    """Min-max normalize each objective over the set; constant -> 0."""
    p = np.asarray(points, dtype=float)
    if p.ndim != 2:
        raise ValueError("expected a 2-D array of objective vectors")
    lo = p.min(axis=0)
    span = p.max(axis=0) - lo
    out = np.zeros_like(p)
    nz = span > 0
    out[:, nz] = (p[:, nz] - lo[nz]) / span[nz]
    return out


class _HvCache:
    """Memoized hypervolume of index subsets of a fixed front."""

    def __init__(self, points: np.ndarray, ref: tuple[float, ...]):
        self.rows = [tuple(float(v) for v in row) for row in points]
        self.ref = ref
        self._table: dict[bytes, float] = {}

    def of_indices(self, idx) -> float:
        key = np.sort(np.asarray(idx, dtype=np.int64)).tobytes()
        hit = self._table.get(key)
        if hit is None:
            hit = hypervolume([self.rows[i] for i in idx], self.ref)
            self._table[key] = hit
        return hit

    def of_bits(self, bits: np.ndarray) -> float:
        return self.of_indices(np.flatnonzero(bits))


def _repair_bits(bits: np.ndarray, k: int, cache: _HvCache) -> np.ndarray:
    """Force exactly k set bits, steered by hypervolume.

    Over-full genes keep the k members whose individual removal would
    lose the most hypervolume (ties keep the lower index).  Under-full
    genes greedily add the bit with the largest hypervolume gain (ties
    take the lowest index).
    """
    bits = bits.copy()
    on = [int(i) for i in np.flatnonzero(bits)]
    if len(on) > k:
        on_set = set(on)
        hv_without = {
            b: cache.of_indices(sorted(on_set - {b})) for b in on
        }
        # smaller remainder == larger individual loss == more valuable
        keep = sorted(on, key=lambda b: (hv_without[b], b))[:k]
        bits[:] = False
        bits[keep] = True
        on = sorted(keep)
    while len(on) < k:
        best_bit = -1
        best_hv = -math.inf
        for b in range(bits.size):
            if bits[b]:
                continue
            h = cache.of_indices(on + [b])
            if h > best_hv:
                best_hv = h
                best_bit = b
        bits[best_bit] = True
        on = sorted(on + [best_bit])
    return bits


def repair(gene: SubsetGene, points, ref=None) -> SubsetGene:
    """Return a copy of gene with exactly gene.k bits set.

    Raises InfeasibleK when k exceeds the number of points.
    """
    p = np.asarray(points, dtype=float)
    if gene.bits.size != len(p):
        raise ValueError("gene length does not match the point set")
    if gene.k < 1 or gene.k > len(p):
        raise InfeasibleK(f"cannot select {gene.k} of {len(p)} points")
    ref_t = tuple(ref) if ref is not None else default_reference(p.shape[1])
    cache = _HvCache(p, ref_t)
    return SubsetGene(_repair_bits(gene.bits, gene.k, cache), gene.k)


def select_subset(points, k: int, cfg: HssConfig | None = None, ref=None) -> list[int]:
    """GA-based argmax over k-subsets of the front by hypervolume.

    Returns sorted point indices.  k >= |P| short-circuits to the whole
    front; k < 1 raises InfeasibleK.  Deterministic for a fixed cfg.seed.
    """
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or len(p) == 0:
        raise InfeasibleK("need a non-empty 2-D point set")
    n = len(p)
    if k < 1:
        raise InfeasibleK(f"cannot select {k} points")
    if k >= n:
        return list(range(n))
    cfg = cfg if cfg is not None else HssConfig()
    ref_t = tuple(ref) if ref is not None else default_reference(p.shape[1])
    cache = _HvCache(p, ref_t)
    rng = np.random.default_rng(cfg.seed)

    pop = np.zeros((cfg.population, n), dtype=bool)
    seed_bits = rng.random((cfg.population, n)) < (k / n)
    for i in range(cfg.population):
        pop[i] = _repair_bits(seed_bits[i], k, cache)
    fitness = np.array([cache.of_bits(b) for b in pop])

    best_idx = int(np.argmax(fitness))
    best_bits = pop[best_idx].copy()
    best_hv = float(fitness[best_idx])
    since_improved = 0

    for _ in range(cfg.generations):
        # binary tournaments pick each child's two parents
        cand = rng.integers(cfg.population, size=(cfg.population, 2, 2))
        left = np.where(
            fitness[cand[:, 0, 0]] >= fitness[cand[:, 0, 1]], cand[:, 0, 0], cand[:, 0, 1]
        )
        right = np.where(
            fitness[cand[:, 1, 0]] >= fitness[cand[:, 1, 1]], cand[:, 1, 0], cand[:, 1, 1]
        )
        mask = rng.random((cfg.population, n)) < 0.5
        children = np.where(mask, pop[left], pop[right])
        mutate = rng.random(cfg.population) < cfg.mutation_rate
        flip_at = rng.integers(n, size=cfg.population)
        for i in np.flatnonzero(mutate):
            children[i, flip_at[i]] = ~children[i, flip_at[i]]
        child_fit = np.empty(cfg.population)
        for i in range(cfg.population):
            children[i] = _repair_bits(children[i], k, cache)
            child_fit[i] = cache.of_bits(children[i])

        merged = np.concatenate([pop, children])
        merged_fit = np.concatenate([fitness, child_fit])
        order = np.argsort(-merged_fit, kind="stable")[: cfg.population]
        pop = merged[order]
        fitness = merged_fit[order]

        if fitness[0] > best_hv:
            best_hv = float(fitness[0])
            best_bits = pop[0].copy()
            since_improved = 0
        else:
            since_improved += 1
            if since_improved >= cfg.stagnation:
                break
    return [int(i) for i in np.flatnonzero(best_bits)]


def exhaustive_subset(points, k: int, ref=None, limit: int = 2_000_000) -> list[int]:
    """Brute-force optimal k-subset; oracle for small instances."""
    p = np.asarray(points, dtype=float)
    n = len(p)
    if k < 1 or n == 0:
        raise InfeasibleK(f"cannot select {k} of {n} points")
    if k >= n:
        return list(range(n))
    if math.comb(n, k) > limit:
        raise ValueError(f"C({n},{k}) exceeds the exhaustive search limit")
    ref_t = tuple(ref) if ref is not None else default_reference(p.shape[1])
    cache = _HvCache(p, ref_t)
    best = None
    best_hv = -math.inf
    for combo in itertools.combinations(range(n), k):
        h = cache.of_indices(list(combo))
        if h > best_hv:
            best_hv = h
            best = combo
    return list(best)


def subset_hypervolume(points, indices, ref=None) -> float:
    """Hypervolume of the chosen subset (convenience for reports)."""
    p = np.asarray(points, dtype=float)
    ref_t = tuple(ref) if ref is not None else default_reference(p.shape[1])
    return hypervolume([tuple(p[i]) for i in indices], ref_t)
