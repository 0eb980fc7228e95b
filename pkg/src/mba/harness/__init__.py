"""Execution loop, evaluation protocol, reporting and the CLI."""

from .config import ConfigError, RunConfig, load_config, parse_config
from .evaluate import EvalReport, SeedStats, TooFewCheckpoints, evaluate, top5_stats
from .report import write_report
from .rollout import EpisodeRecord, PredictedMotion, rollout

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "parse_config",
    "EvalReport",
    "SeedStats",
    "TooFewCheckpoints",
    "evaluate",
    "top5_stats",
    "write_report",
    "EpisodeRecord",
    "PredictedMotion",
    "rollout",
]
