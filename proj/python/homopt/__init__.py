"""Homogeneous inverse-optimal ISS controller synthesis and verification."""

from homopt._core import (
    ConfigError,
    Controller,
    DomainError,
    Error,
    ParseError,
    SynthesisError,
    __version__,
    criteria_for,
    dilate,
    hom_norm,
    lf_transform,
    parse_expr,
    run_cli,
    run_criterion,
    simulate_worst_case,
    synthesize_config,
    synthesize_example,
)

__all__ = [
    "ConfigError",
    "Controller",
    "DomainError",
    "Error",
    "ParseError",
    "SynthesisError",
    "__version__",
    "criteria_for",
    "dilate",
    "hom_norm",
    "lf_transform",
    "parse_expr",
    "run_cli",
    "run_criterion",
    "simulate_worst_case",
    "synthesize_config",
    "synthesize_example",
]
