"""Distributed stochastic AUC maximization with periodic model averaging."""

from ._core import (
    CodaError,
    Dataset,
    ParseError,
    ScorerKind,
    ScorerSpec,
    StageSchedule,
    auc,
    build_schedule,
    config_hash,
    derive_seed,
    dual_argmax,
    eval_F,
    eval_phi,
    grad_F,
    initial_params,
    load_dataset,
    parse_config,
    rebalance,
    run_experiment,
    score,
    shard,
    synth_gaussians,
)

__all__ = [
    "CodaError",
    "Dataset",
    "ParseError",
    "ScorerKind",
    "ScorerSpec",
    "StageSchedule",
    "auc",
    "build_schedule",
    "config_hash",
    "derive_seed",
    "dual_argmax",
    "eval_F",
    "eval_phi",
    "grad_F",
    "initial_params",
    "load_dataset",
    "parse_config",
    "rebalance",
    "run_experiment",
    "score",
    "shard",
    "synth_gaussians",
]
