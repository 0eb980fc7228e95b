"""Run configuration: flat ``key = value`` text files plus validation.

Recognized keys are exactly the RunConfig fields. Lines starting with '#'
and blank lines are ignored. ``seeds`` is a comma-separated integer list.
The environment variable MBA_SEED, when set, overrides the seed list with
that single seed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

from ..policy import VARIANTS
from ..sim_env import TASKS


class ConfigError(ValueError):
    """Invalid, unknown or inconsistent configuration entry."""


@dataclass(frozen=True)
class RunConfig:
    task: str = "PickPlace"
    variant: str = "mba"
    t_m: int = 16
    t_a: int = 16
    t_a_prime: int = 8
    diffusion_k: int = 100
    training_steps: int = 3000
    batch_size: int = 16
    eval_every: int = 300
    eval_episodes: int = 20
    seeds: tuple[int, ...] = (0, 1, 2)
    learning_rate: float = 1e-3
    demos_path: str = "demos.mbad"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if not self.t_m >= self.t_a >= self.t_a_prime >= 1:
            raise ConfigError(
                f"need t_m >= t_a >= t_a_prime >= 1, got {self.t_m} / {self.t_a} / {self.t_a_prime}"
            )
        if self.diffusion_k < 2:
            raise ConfigError("diffusion_k must be >= 2")
        if self.training_steps < 1 or self.batch_size < 1:
            raise ConfigError("training_steps and batch_size must be >= 1")
        if self.eval_every < 1 or self.training_steps % self.eval_every != 0:
            raise ConfigError(
                f"eval_every ({self.eval_every}) must divide training_steps ({self.training_steps})"
            )
        if self.eval_episodes < 1:
            raise ConfigError("eval_episodes must be >= 1")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")


_INT_FIELDS = {"t_m", "t_a", "t_a_prime", "diffusion_k", "training_steps", "batch_size", "eval_every", "eval_episodes"}
_FLOAT_FIELDS = {"learning_rate"}
_STR_FIELDS = {"task", "variant", "demos_path"}


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    values: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _INT_FIELDS:
                values[key] = int(value)
            elif key in _FLOAT_FIELDS:
                values[key] = float(value)
            elif key == "seeds":
                values[key] = tuple(int(s) for s in value.split(",") if s.strip())
            else:
                values[key] = value
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def load_config(path: str | Path, overrides: dict | None = None, env: dict | None = None) -> RunConfig:
    env = os.environ if env is None else env
    cfg = parse_config(Path(path).read_text(), overrides)
    seed_override = env.get("MBA_SEED")
    if seed_override is not None:
        try:
            cfg = parse_config("", {**_as_dict(cfg), "seeds": (int(seed_override),)})
        except ValueError as exc:
            raise ConfigError(f"MBA_SEED must be an integer, got {seed_override!r}") from exc
    return cfg


def _as_dict(cfg: RunConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(RunConfig)}
