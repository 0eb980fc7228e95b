"""Receding-horizon execution loop.

Each cycle encodes the current observation, samples a motion chunk (mba
variant only), encodes it, samples an action chunk conditioned on the
features, executes a prefix of the chunk, then re-observes. The policy
inputs are built exclusively from the raw state vector the environment
exposes; recorded training data is never available on this path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import MotionChunk, pack_action, pack_pose
from ..policy import (
    VARIANT_MBA,
    PolicyParams,
    VariantMismatch,
    encode_motion_normalized,
    encode_observation,
    sample_actions,
    sample_motion,
)
from ..sim_env import EnvState, TaskSpec, is_success, reset, state_vector, step


@dataclass(frozen=True)
class PredictedMotion:
    """Motion chunk sampled at the start of one replanning cycle."""

    start_step: int
    chunk: MotionChunk
    normalized: np.ndarray


@dataclass
class EpisodeRecord:
    success: bool
    steps: int
    executed_actions: np.ndarray  # (steps, 10)
    predicted_motions: list[PredictedMotion] = field(default_factory=list)
    object_trace: np.ndarray | None = None  # (steps + 1, 9) poses observed over the episode


def rollout(
    params: PolicyParams,
    spec: TaskSpec,
    seed: int,
    t_a_prime: int,
    rng: np.random.Generator,
    expected_variant: str | None = None,
) -> EpisodeRecord:
    """Run one episode from reset(seed) until success or the step budget."""
    if expected_variant is not None and expected_variant != params.variant:
        raise VariantMismatch(f"policy variant {params.variant!r}, expected {expected_variant!r}")
    if not 1 <= t_a_prime <= params.t_a:
        raise ValueError(f"t_a_prime must lie in [1, {params.t_a}], got {t_a_prime}")

    state: EnvState = reset(spec, seed)
    executed: list[np.ndarray] = []
    trace: list[np.ndarray] = [pack_pose(state.object_pose)]
    predicted: list[PredictedMotion] = []
    success = False

    while not success and state.step_index < spec.max_steps:
        obs_feature = encode_observation(params, state_vector(state))
        motion_feature = None
        if params.variant == VARIANT_MBA:
            sampled = sample_motion(params, obs_feature, rng)
            predicted.append(
                PredictedMotion(start_step=state.step_index, chunk=sampled.chunk, normalized=sampled.normalized)
            )
            motion_feature = encode_motion_normalized(params, sampled.normalized)
        chunk = sample_actions(params, obs_feature, motion_feature, rng)

        for action in chunk.actions[:t_a_prime]:
            state = step(state, action, spec)
            executed.append(pack_action(action))
            trace.append(pack_pose(state.object_pose))
            if is_success(state, spec):
                success = True
                break
            if state.step_index >= spec.max_steps:
                break

    return EpisodeRecord(
        success=success,
        steps=state.step_index,
        executed_actions=np.array(executed) if executed else np.zeros((0, 10)),
        predicted_motions=predicted,
        object_trace=np.array(trace),
    )
