"""Multi-seed evaluation protocol and its CSV output.

For every training seed and checkpoint, a fixed panel of evaluation
episodes (seeds disjoint from any demo-collection seed) is rolled out; the
per-seed statistic is the mean of the five best checkpoint success rates,
and the headline number is the mean and standard deviation of that
statistic across training seeds.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..policy import PolicyParams
from ..sim_env import TaskSpec
from .rollout import rollout

EVAL_CSV_HEADER = ("seed", "checkpoint_step", "success_rate")

_EVAL_SEED_BASE = 1_000_000
_EVAL_SEED_STRIDE = 10_000


class TooFewCheckpoints(ValueError):
    """Top-5 statistic requested over fewer than 5 checkpoints."""


@dataclass(frozen=True)
class SeedStats:
    seed: int
    rates: tuple[tuple[int, float], ...]  # (checkpoint_step, success_rate)
    top5_mean: float
    top5_std: float


@dataclass(frozen=True)
class EvalReport:
    variant: str
    seed_stats: tuple[SeedStats, ...]
    mean: float
    std: float
    eval_episodes: int
    wall_clock_seconds: float
    created_at: str

    def rows(self) -> list[tuple[int, int, float]]:
        out = []
        for stats in self.seed_stats:
            for step, rate in stats.rates:
                out.append((stats.seed, step, rate))
        return out


def top5_stats(rates: Sequence[float]) -> tuple[float, float]:
    """Mean and population std of the five best rates."""
    if len(rates) < 5:
        raise TooFewCheckpoints(f"need at least 5 checkpoints, got {len(rates)}")
    best = np.sort(np.asarray(rates, dtype=np.float64))[-5:]
    return float(best.mean()), float(best.std())


def evaluation_seed(train_seed: int, episode: int) -> int:
    """Evaluation episode seeds; disjoint from demo-collection seed ranges."""
    return _EVAL_SEED_BASE + train_seed * _EVAL_SEED_STRIDE + episode


def success_rate(
    params: PolicyParams,
    spec: TaskSpec,
    train_seed: int,
    checkpoint_step: int,
    episodes: int,
    t_a_prime: int,
) -> float:
    wins = 0
    for episode in range(episodes):
        rng = np.random.default_rng([train_seed, checkpoint_step, episode])
        record = rollout(params, spec, evaluation_seed(train_seed, episode), t_a_prime, rng)
        wins += int(record.success)
    return wins / episodes


def evaluate(
    checkpoints: Mapping[int, Sequence[tuple[int, PolicyParams]]],
    spec: TaskSpec,
    eval_episodes: int,
    t_a_prime: int,
) -> EvalReport:
    """Run the full protocol over {train_seed: [(step, params), ...]}."""
    started = time.monotonic()
    variants = {series[0][1].variant for series in checkpoints.values() if series}
    if len(variants) != 1:
        raise ValueError(f"checkpoints must share one variant, got {sorted(variants)}")
    (variant,) = variants
    seed_stats = []
    for train_seed in sorted(checkpoints):
        series = sorted(checkpoints[train_seed], key=lambda item: item[0])
        if len(series) < 5:
            raise TooFewCheckpoints(f"seed {train_seed}: need at least 5 checkpoints, got {len(series)}")
        rates = tuple(
            (step, success_rate(params, spec, train_seed, step, eval_episodes, t_a_prime))
            for step, params in series
        )
        mean, std = top5_stats([rate for _, rate in rates])
        seed_stats.append(SeedStats(seed=train_seed, rates=rates, top5_mean=mean, top5_std=std))
    means = np.array([s.top5_mean for s in seed_stats])
    return EvalReport(
        variant=variant,
        seed_stats=tuple(seed_stats),
        mean=float(means.mean()),
        std=float(means.std()),
        eval_episodes=eval_episodes,
        wall_clock_seconds=time.monotonic() - started,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def eval_rows_to_csv(rows: Sequence[tuple[int, int, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EVAL_CSV_HEADER)
    for seed, step, rate in rows:
        writer.writerow([seed, step, repr(float(rate))])
    return buf.getvalue()


def read_eval_csv(path: str | Path) -> list[tuple[int, int, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != EVAL_CSV_HEADER:
            raise ValueError(f"{path}: expected header {EVAL_CSV_HEADER}, got {header}")
        return [(int(seed), int(step), float(rate)) for seed, step, rate in reader]
