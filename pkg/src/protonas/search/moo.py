"""Constrained dominance, non-dominated sorting, crowding distance."""

from __future__ import annotations

import math


def constrained_dominates(a, b) -> bool:
    """Feasibility-first dominance.

    A feasible record beats any infeasible one; two infeasible records
    compare by total violation (lower wins); two feasible records
    compare by Pareto dominance on their objective vectors (all <=,
    at least one <).
    """
    fa, fb = a.feasibility.feasible, b.feasibility.feasible
    if fa and not fb:
        return True
    if fb and not fa:
        return False
    if not fa:
        return a.feasibility.violation < b.feasibility.violation
    le = all(x <= y for x, y in zip(a.objectives, b.objectives))
    lt = any(x < y for x, y in zip(a.objectives, b.objectives))
    return le and lt


def nondominated_sort(records, dominates=constrained_dominates) -> list[list[int]]:
    """Indices grouped into fronts; front 0 is non-dominated."""
    n = len(records)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    count = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(records[i], records[j]):
                dominated_by[i].append(j)
                count[j] += 1
            elif dominates(records[j], records[i]):
                dominated_by[j].append(i)
                count[i] += 1
    fronts: list[list[int]] = []
    current = [i for i in range(n) if count[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                count[j] -= 1
                if count[j] == 0:
                    nxt.append(j)
        current = nxt
    return fronts


def crowding_distance(objectives) -> list[float]:
    """NSGA-style crowding distance for one front of objective vectors.

    Boundary points get inf; an objective with zero or non-finite
    spread contributes nothing to interior points.
    """
    n = len(objectives)
    if n == 0:
        return []
    d = len(objectives[0])
    dist = [0.0] * n
    for m in range(d):
        order = sorted(range(n), key=lambda i: objectives[i][m])
        dist[order[0]] = math.inf
        dist[order[-1]] = math.inf
        span = objectives[order[-1]][m] - objectives[order[0]][m]
        if not math.isfinite(span) or span == 0.0:
            continue
        for pos in range(1, n - 1):
            i = order[pos]
            if math.isinf(dist[i]):
                continue
            gap = objectives[order[pos + 1]][m] - objectives[order[pos - 1]][m]
            dist[i] += gap / span
    return dist
