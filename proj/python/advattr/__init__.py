"""Python bindings for the advattr experiment library."""

from ._core import (
    ConfigError,
    NumericError,
    ShapeError,
    World,
    WorldConfig,
    attack_success_rate,
    brute_force_weights,
    config_hash,
    config_keys,
    cosine_similarity,
    far_threshold,
    make_world,
    mse,
    parse_config,
    pareto_objective,
    pareto_weights,
    run_arms,
    run_experiment,
    select_attribute,
    self_check,
)

__all__ = [
    "ConfigError",
    "NumericError",
    "ShapeError",
    "World",
    "WorldConfig",
    "attack_success_rate",
    "brute_force_weights",
    "config_hash",
    "config_keys",
    "cosine_similarity",
    "far_threshold",
    "make_world",
    "mse",
    "parse_config",
    "pareto_objective",
    "pareto_weights",
    "run_arms",
    "run_experiment",
    "select_attribute",
    "self_check",
]
