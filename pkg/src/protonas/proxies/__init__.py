"""Training-free proxy scores."""

from .ensemble import (
    ProxyBatchConfig,
    ProxyScores,
    correlation_min_eigenvalue,
    evaluate_ensemble,
    meco,
    naswot,
    naswot_from_codes,
    snip,
    zico,
    zico_from_sample_grads,
)

__all__ = [
    "ProxyBatchConfig",
    "ProxyScores",
    "correlation_min_eigenvalue",
    "evaluate_ensemble",
    "meco",
    "naswot",
    "naswot_from_codes",
    "snip",
    "zico",
    "zico_from_sample_grads",
]
