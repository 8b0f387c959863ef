"""Learned artificial potential fields for local path planning."""

from ._core import (
    InputError,
    Model,
    NumericError,
    attractive_potential,
    generate_suite,
    ideal_field,
    metrics,
    plan,
    rasterize,
    repulsive_potential,
    run_command,
    split_suite,
    total_potential,
    train,
)

__all__ = [
    "InputError",
    "Model",
    "NumericError",
    "attractive_potential",
    "generate_suite",
    "ideal_field",
    "metrics",
    "plan",
    "rasterize",
    "repulsive_potential",
    "run_command",
    "split_suite",
    "total_potential",
    "train",
]
