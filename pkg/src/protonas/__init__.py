"""protonas: hardware-constrained architecture exploration.

Explores a 14-gene backbone space under RAM/ROM/FLOPs budgets, scores
feasible candidates with four training-free proxies, and distills the
resulting Pareto front to k representatives by hypervolume subset
selection.
"""

__version__ = "0.1.0"
