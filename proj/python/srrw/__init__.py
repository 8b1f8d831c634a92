"""Step-reinforced random walks: simulation, exact small-n laws and diagnostics."""

from ._core import (
    beta_closed_form,
    beta_scaled,
    beta_scaling_limit,
    canonical_distribution,
    certify,
    escape_exponent,
    exact_pmf,
    find_constants,
    forest_clusters,
    forest_pmf,
    second_moment_oracle,
    simulate,
    taylor_radius,
)

__all__ = [
    "beta_closed_form",
    "beta_scaled",
    "beta_scaling_limit",
    "canonical_distribution",
    "certify",
    "escape_exponent",
    "exact_pmf",
    "find_constants",
    "forest_clusters",
    "forest_pmf",
    "second_moment_oracle",
    "simulate",
    "taylor_radius",
]
