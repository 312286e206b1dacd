"""Multi-camera vehicle tracking toolkit."""

from ._core import (
    ConfigError,
    DimensionError,
    Error,
    ParseError,
    StageError,
    evaluate,
    generate_world,
    min_cost_assignment,
    rerank,
    run_ablation,
    run_pipeline,
    similarity_matrix,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "Error",
    "ParseError",
    "StageError",
    "evaluate",
    "generate_world",
    "min_cost_assignment",
    "rerank",
    "run_ablation",
    "run_pipeline",
    "similarity_matrix",
]
