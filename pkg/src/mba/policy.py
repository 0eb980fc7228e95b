"""Cascaded motion-then-action diffusion policy, plus its single-stage ablation.

Two conditional denoisers share one observation encoder. The motion head
denoises future object-pose chunks conditioned on observation features;
the action head denoises robot-action chunks conditioned on the motion
feature concatenated with the observation features. The baseline variant
drops the motion head entirely and conditions the action head on
observations alone.

Training teacher-forces the action head with ground-truth motion chunks;
inference conditions it on chunks sampled from the motion head, so the
executed policy never touches recorded object poses.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import diffusion
from .geometry import ACTION_WIDTH, POSE_WIDTH, ActionChunk, MotionChunk, RobotAction, decode_rot6d, encode_rot6d, unpack_pose
from .numcore import (
    MlpSpec,
    Tensor,
    adam_step,
    add,
    backward,
    concat,
    init_adam,
    init_mlp_params,
    load_arrays,
    mlp_forward,
    mlp_infer,
    mse,
    save_arrays,
)
from .sim_env import Demonstration

VARIANT_BASELINE = "baseline"
VARIANT_MBA = "mba"
VARIANTS = (VARIANT_BASELINE, VARIANT_MBA)

STEP_EMBED_WIDTH = 32
MOTION_FEATURE_WIDTH = 32
DEFAULT_OBS_FEATURE_WIDTH = 64
DEFAULT_DENOISER_HIDDEN = 256
_OBS_ENCODER_HIDDEN = 64

_NET_OBS = "obs_enc"
_NET_MOTION_ENC = "motion_enc"
_NET_MOTION_DEN = "motion_den"
_NET_ACTION_DEN = "action_den"


class VariantMismatch(ValueError):
    """Motion conditioning used where the variant forbids it, or vice versa."""


class EmptyDataset(ValueError):
    """Training requested on an empty demonstration list."""


# --- normalization ------------------------------------------------------------


@dataclass(frozen=True)
class NormStats:
    """Per-dimension min/max maps onto [-1, 1]; constant dimensions pass through."""

    pose_min: np.ndarray
    pose_max: np.ndarray
    action_min: np.ndarray
    action_max: np.ndarray

    def __post_init__(self):
        for name in ("pose_min", "pose_max", "action_min", "action_max"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.pose_min.shape != (POSE_WIDTH,) or self.pose_max.shape != (POSE_WIDTH,):
            raise ValueError("pose stats must have width 9")
        if self.action_min.shape != (ACTION_WIDTH,) or self.action_max.shape != (ACTION_WIDTH,):
            raise ValueError("action stats must have width 10")
        if np.any(self.pose_max < self.pose_min) or np.any(self.action_max < self.action_min):
            raise ValueError("max must be >= min per dimension")
        object.__setattr__(self, "_pose_center", (self.pose_min + self.pose_max) / 2.0)
        object.__setattr__(self, "_action_center", (self.action_min + self.action_max) / 2.0)
        pose_half = (self.pose_max - self.pose_min) / 2.0
        action_half = (self.action_max - self.action_min) / 2.0
        # constant dimensions are pinned to the identity map
        pose_const = pose_half < 1e-12
        action_const = action_half < 1e-12
        object.__setattr__(self, "_pose_half", np.where(pose_const, 1.0, pose_half))
        object.__setattr__(self, "_action_half", np.where(action_const, 1.0, action_half))
        object.__setattr__(self, "_pose_center", np.where(pose_const, 0.0, self._pose_center))
        object.__setattr__(self, "_action_center", np.where(action_const, 0.0, self._action_center))

    @classmethod
    def from_demos(cls, demos: Sequence[Demonstration]) -> "NormStats":
        poses = np.concatenate([d.object_poses for d in demos], axis=0)
        actions = np.concatenate([d.actions for d in demos], axis=0)
        return cls(poses.min(axis=0), poses.max(axis=0), actions.min(axis=0), actions.max(axis=0))

    def normalize_poses(self, arr: np.ndarray) -> np.ndarray:
        return (np.asarray(arr, dtype=np.float64) - self._pose_center) / self._pose_half

    def denormalize_poses(self, arr: np.ndarray) -> np.ndarray:
        return np.asarray(arr, dtype=np.float64) * self._pose_half + self._pose_center

    def normalize_actions(self, arr: np.ndarray) -> np.ndarray:
        return (np.asarray(arr, dtype=np.float64) - self._action_center) / self._action_half

    def denormalize_actions(self, arr: np.ndarray) -> np.ndarray:
        return np.asarray(arr, dtype=np.float64) * self._action_half + self._action_center


# --- parameters ---------------------------------------------------------------


def _obs_encoder_spec(obs_width: int, feature_width: int) -> MlpSpec:
    return MlpSpec((obs_width, _OBS_ENCODER_HIDDEN, feature_width), activation="tanh")


def _motion_encoder_spec(t_m: int) -> MlpSpec:
    return MlpSpec((t_m * POSE_WIDTH, MOTION_FEATURE_WIDTH, MOTION_FEATURE_WIDTH), activation="tanh")


def _motion_denoiser_spec(t_m: int, obs_feature_width: int, hidden: int) -> MlpSpec:
    dim = t_m * POSE_WIDTH
    return MlpSpec((dim + obs_feature_width + STEP_EMBED_WIDTH, hidden, hidden, dim), activation="mish")


def _action_denoiser_spec(t_a: int, condition_width: int, hidden: int) -> MlpSpec:
    dim = t_a * ACTION_WIDTH
    return MlpSpec((dim + condition_width + STEP_EMBED_WIDTH, hidden, hidden, dim), activation="mish")


@dataclass(frozen=True)
class PolicyParams:
    """Trained policy state: network weights, normalization, horizons, schedule."""

    variant: str
    t_m: int
    t_a: int
    obs_width: int
    obs_feature_width: int
    denoiser_hidden: int
    schedule_k: int
    schedule_kind: str
    norm: NormStats
    arrays: dict[str, np.ndarray]

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.t_m < self.t_a:
            raise ValueError(f"motion horizon {self.t_m} must be >= action horizon {self.t_a}")
        if self.t_a < 1:
            raise ValueError("action horizon must be >= 1")
        has_motion_nets = any(k.startswith((_NET_MOTION_ENC, _NET_MOTION_DEN)) for k in self.arrays)
        if self.variant == VARIANT_BASELINE and has_motion_nets:
            raise VariantMismatch("baseline params must not contain motion networks")
        if self.variant == VARIANT_MBA and not has_motion_nets:
            raise VariantMismatch("mba params are missing the motion networks")
        # cascade contract: the action denoiser's condition width is D_O plus,
        # with motion guidance, the 32-wide motion feature
        expected = self.action_denoiser_spec().layer_widths[0]
        got = self.arrays[f"{_NET_ACTION_DEN}/W0"].shape[0]
        if got != expected:
            raise VariantMismatch(f"action denoiser input width {got}, expected {expected}")

    @property
    def condition_width(self) -> int:
        width = self.obs_feature_width
        if self.variant == VARIANT_MBA:
            width += MOTION_FEATURE_WIDTH
        return width

    def obs_encoder_spec(self) -> MlpSpec:
        return _obs_encoder_spec(self.obs_width, self.obs_feature_width)

    def motion_encoder_spec(self) -> MlpSpec:
        return _motion_encoder_spec(self.t_m)

    def motion_denoiser_spec(self) -> MlpSpec:
        return _motion_denoiser_spec(self.t_m, self.obs_feature_width, self.denoiser_hidden)

    def action_denoiser_spec(self) -> MlpSpec:
        return _action_denoiser_spec(self.t_a, self.condition_width, self.denoiser_hidden)

    def schedule(self) -> diffusion.NoiseSchedule:
        return _cached_schedule(self.schedule_k, self.schedule_kind)

    def net_arrays(self, net: str) -> dict[str, np.ndarray]:
        prefix = net + "/"
        return {k[len(prefix) :]: v for k, v in self.arrays.items() if k.startswith(prefix)}


_SCHEDULE_CACHE: dict[tuple[int, str], diffusion.NoiseSchedule] = {}


def _cached_schedule(k: int, kind: str) -> diffusion.NoiseSchedule:
    key = (k, kind)
    if key not in _SCHEDULE_CACHE:
        _SCHEDULE_CACHE[key] = diffusion.make_schedule(k, kind)
    return _SCHEDULE_CACHE[key]


@dataclass(frozen=True)
class TrainSettings:
    variant: str = VARIANT_MBA
    t_m: int = 16
    t_a: int = 16
    diffusion_steps: int = 100
    schedule_kind: str = "squared_cosine"
    training_steps: int = 3000
    batch_size: int = 16
    learning_rate: float = 1e-3
    obs_feature_width: int = DEFAULT_OBS_FEATURE_WIDTH
    denoiser_hidden: int = DEFAULT_DENOISER_HIDDEN
    checkpoint_every: int = 0  # 0 disables parameter snapshots

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not self.t_m >= self.t_a >= 1:
            raise ValueError(f"need t_m >= t_a >= 1, got {self.t_m}, {self.t_a}")
        if self.training_steps < 1 or self.batch_size < 1:
            raise ValueError("training_steps and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def init_policy_params(
    settings: TrainSettings, obs_width: int, norm: NormStats, rng: np.random.Generator
) -> PolicyParams:
    arrays: dict[str, np.ndarray] = {}

    def put(net: str, spec: MlpSpec) -> None:
        for name, arr in init_mlp_params(spec, rng).items():
            arrays[f"{net}/{name}"] = arr

    put(_NET_OBS, _obs_encoder_spec(obs_width, settings.obs_feature_width))
    condition = settings.obs_feature_width
    if settings.variant == VARIANT_MBA:
        put(_NET_MOTION_ENC, _motion_encoder_spec(settings.t_m))
        put(_NET_MOTION_DEN, _motion_denoiser_spec(settings.t_m, settings.obs_feature_width, settings.denoiser_hidden))
        condition += MOTION_FEATURE_WIDTH
    put(_NET_ACTION_DEN, _action_denoiser_spec(settings.t_a, condition, settings.denoiser_hidden))
    return PolicyParams(
        variant=settings.variant,
        t_m=settings.t_m,
        t_a=settings.t_a,
        obs_width=obs_width,
        obs_feature_width=settings.obs_feature_width,
        denoiser_hidden=settings.denoiser_hidden,
        schedule_k=settings.diffusion_steps,
        schedule_kind=settings.schedule_kind,
        norm=norm,
        arrays=arrays,
    )


def step_embedding(k) -> np.ndarray:
    """Sinusoidal embedding of the diffusion step; accepts an int or an int array."""
    half = STEP_EMBED_WIDTH // 2
    freqs = 10000.0 ** (-np.arange(half) / half)
    ang = np.multiply.outer(np.asarray(k, dtype=np.float64), freqs)
    return np.concatenate([np.sin(ang), np.cos(ang)], axis=-1)


# --- inference ----------------------------------------------------------------


def encode_observation(params: PolicyParams, raw_state: np.ndarray) -> np.ndarray:
    """Observation features F_O(raw state); deterministic."""
    return mlp_infer(params.obs_encoder_spec(), params.net_arrays(_NET_OBS), raw_state)


def encode_motion_normalized(params: PolicyParams, flat_normalized: np.ndarray) -> np.ndarray:
    """Motion feature from an already-normalized flattened pose chunk."""
    if params.variant != VARIANT_MBA:
        raise VariantMismatch("baseline policy has no motion encoder")
    return mlp_infer(params.motion_encoder_spec(), params.net_arrays(_NET_MOTION_ENC), flat_normalized)


def encode_motion(params: PolicyParams, chunk: MotionChunk) -> np.ndarray:
    """Motion feature from a pose chunk in workspace coordinates."""
    flat = params.norm.normalize_poses(chunk.flatten().reshape(-1, POSE_WIDTH)).ravel()
    return encode_motion_normalized(params, flat)


def _denoiser_fn(params: PolicyParams, net: str, spec: MlpSpec) -> Callable:
    arrays = params.net_arrays(net)
    emb = step_embedding(np.arange(params.schedule_k + 1))

    def fn(xk: np.ndarray, k: int, condition: np.ndarray) -> np.ndarray:
        return mlp_infer(spec, arrays, np.concatenate([xk, condition, emb[k]]))

    return fn


@dataclass(frozen=True)
class SampledMotion:
    """Sampled pose chunk in both normalized and workspace coordinates."""

    normalized: np.ndarray  # (t_m * 9,)
    chunk: MotionChunk


def _reproject_rot6d(rot_rows: np.ndarray) -> np.ndarray:
    """Snap each (N, 6) rotation fragment back onto SO(3)."""
    out = rot_rows.copy()
    for i in range(out.shape[0]):
        out[i] = encode_rot6d(decode_rot6d(out[i]))
    return out


def sample_motion(
    params: PolicyParams,
    obs_feature: np.ndarray,
    rng: np.random.Generator,
    deterministic: bool = False,
) -> SampledMotion:
    """Ancestral sampling of a pose chunk conditioned on observation features."""
    if params.variant != VARIANT_MBA:
        raise VariantMismatch("baseline policy cannot sample motion")
    denoiser = _denoiser_fn(params, _NET_MOTION_DEN, params.motion_denoiser_spec())
    flat = diffusion.sample(
        denoiser, np.asarray(obs_feature, dtype=np.float64), params.t_m * POSE_WIDTH,
        params.schedule(), rng, deterministic=deterministic,
    )
    rows = params.norm.denormalize_poses(flat.reshape(params.t_m, POSE_WIDTH))
    rows[:, 3:9] = _reproject_rot6d(rows[:, 3:9])
    chunk = MotionChunk(tuple(unpack_pose(row) for row in rows))
    return SampledMotion(normalized=flat, chunk=chunk)


def sample_actions(
    params: PolicyParams,
    obs_feature: np.ndarray,
    motion_feature: np.ndarray | None,
    rng: np.random.Generator,
    deterministic: bool = False,
) -> ActionChunk:
    """Ancestral sampling of an action chunk; motion_feature iff variant is mba."""
    if params.variant == VARIANT_MBA:
        if motion_feature is None:
            raise VariantMismatch("mba policy requires a motion feature")
        condition = np.concatenate([motion_feature, obs_feature])
    else:
        if motion_feature is not None:
            raise VariantMismatch("baseline policy must not receive a motion feature")
        condition = np.asarray(obs_feature, dtype=np.float64)
    denoiser = _denoiser_fn(params, _NET_ACTION_DEN, params.action_denoiser_spec())
    flat = diffusion.sample(
        denoiser, condition, params.t_a * ACTION_WIDTH, params.schedule(), rng,
        deterministic=deterministic,
    )
    rows = params.norm.denormalize_actions(flat.reshape(params.t_a, ACTION_WIDTH))
    rows[:, 3:9] = _reproject_rot6d(rows[:, 3:9])
    actions = tuple(RobotAction(row[:3], row[3:9], row[9]) for row in rows)
    return ActionChunk(actions)


# --- training -----------------------------------------------------------------


@dataclass(frozen=True)
class TrainingWindow:
    """One (or a batch of) aligned training slices, chunks already normalized."""

    observation: np.ndarray  # (w,) or (B, w) raw state
    motion: np.ndarray  # (t_m * 9,) or (B, t_m * 9)
    actions: np.ndarray  # (t_a * 10,) or (B, t_a * 10)


def extract_window(
    demo: Demonstration, norm: NormStats, start: int, t_m: int, t_a: int
) -> TrainingWindow:
    """Window at a start frame; terminal windows repeat the last frame."""
    n = len(demo)
    if not 0 <= start < n:
        raise IndexError(f"start {start} outside demo of length {n}")
    idx_m = np.minimum(start + np.arange(t_m), n - 1)
    idx_a = np.minimum(start + np.arange(t_a), n - 1)
    return TrainingWindow(
        observation=demo.states[start],
        motion=norm.normalize_poses(demo.object_poses[idx_m]).ravel(),
        actions=norm.normalize_actions(demo.actions[idx_a]).ravel(),
    )


def _leaves(arrays: Mapping[str, np.ndarray]) -> dict[str, Tensor]:
    return {k: Tensor(v, requires_grad=True) for k, v in arrays.items()}


def _net_leaves(leaves: Mapping[str, Tensor], net: str) -> dict[str, Tensor]:
    prefix = net + "/"
    return {k[len(prefix) :]: v for k, v in leaves.items() if k.startswith(prefix)}


def _as_batch(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64)
    return arr[None, :] if arr.ndim == 1 else arr


def _noise_targets(
    x0: np.ndarray, sched: diffusion.NoiseSchedule, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Random steps, injected noise, and the noised batch via the forward marginal."""
    b = x0.shape[0]
    ks = rng.integers(1, sched.K + 1, size=b)
    eps = rng.standard_normal(x0.shape)
    abar = sched.abar[ks - 1][:, None]
    xk = np.sqrt(abar) * x0 + np.sqrt(1.0 - abar) * eps
    return ks, eps, xk


def apply_motion_denoiser(
    params: PolicyParams, leaves: Mapping[str, Tensor], xk: np.ndarray, ks: np.ndarray, obs_feat: Tensor
) -> Tensor:
    inp = concat([Tensor(xk), obs_feat, Tensor(step_embedding(ks))])
    return mlp_forward(params.motion_denoiser_spec(), _net_leaves(leaves, _NET_MOTION_DEN), inp)


def apply_action_denoiser(
    params: PolicyParams, leaves: Mapping[str, Tensor], xk: np.ndarray, ks: np.ndarray, condition: Tensor
) -> Tensor:
    inp = concat([Tensor(xk), condition, Tensor(step_embedding(ks))])
    return mlp_forward(params.action_denoiser_spec(), _net_leaves(leaves, _NET_ACTION_DEN), inp)


def _encode_obs_tensor(params: PolicyParams, leaves: Mapping[str, Tensor], obs: np.ndarray) -> Tensor:
    return mlp_forward(params.obs_encoder_spec(), _net_leaves(leaves, _NET_OBS), Tensor(obs))


def motion_training_loss(
    params: PolicyParams,
    window: TrainingWindow,
    rng: np.random.Generator,
    leaves: Mapping[str, Tensor] | None = None,
) -> Tensor:
    """Noise-prediction MSE for the motion head at a random diffusion step."""
    if params.variant != VARIANT_MBA:
        raise VariantMismatch("baseline policy has no motion head")
    if leaves is None:
        leaves = _leaves(params.arrays)
    x0 = _as_batch(window.motion)
    ks, eps, xk = _noise_targets(x0, params.schedule(), rng)
    obs_feat = _encode_obs_tensor(params, leaves, _as_batch(window.observation))
    pred = apply_motion_denoiser(params, leaves, xk, ks, obs_feat)
    return mse(pred, Tensor(eps))


def action_training_loss(
    params: PolicyParams,
    window: TrainingWindow,
    rng: np.random.Generator,
    motion_feature_source: str = "ground_truth",
    leaves: Mapping[str, Tensor] | None = None,
) -> Tensor:
    """Noise-prediction MSE for the action head.

    With motion guidance the condition is concat(motion feature, observation
    feature); the motion feature comes from the recorded chunk (teacher
    forcing) or, with motion_feature_source="sampled", from the motion head.
    """
    if motion_feature_source not in ("ground_truth", "sampled"):
        raise ValueError(f"unknown motion_feature_source {motion_feature_source!r}")
    if leaves is None:
        leaves = _leaves(params.arrays)
    x0 = _as_batch(window.actions)
    ks, eps, xk = _noise_targets(x0, params.schedule(), rng)
    obs_feat = _encode_obs_tensor(params, leaves, _as_batch(window.observation))
    if params.variant == VARIANT_MBA:
        if motion_feature_source == "ground_truth":
            motion_flat = _as_batch(window.motion)
        else:
            obs_np = _as_batch(window.observation)
            feats = encode_observation(params, obs_np)
            motion_flat = np.stack([sample_motion(params, f, rng).normalized for f in feats])
        m_feat = mlp_forward(params.motion_encoder_spec(), _net_leaves(leaves, _NET_MOTION_ENC), Tensor(motion_flat))
        condition = concat([m_feat, obs_feat])
    else:
        condition = obs_feat
    pred = apply_action_denoiser(params, leaves, xk, ks, condition)
    return mse(pred, Tensor(eps))


@dataclass
class TrainResult:
    params: PolicyParams
    history: list[dict]  # per-step {step, motion_loss, action_loss, total_loss}
    snapshots: list[tuple[int, PolicyParams]] = field(default_factory=list)


def _sample_batch(
    demos: Sequence[Demonstration], norm: NormStats, t_m: int, t_a: int, batch: int, rng: np.random.Generator
) -> TrainingWindow:
    obs, motions, actions = [], [], []
    for _ in range(batch):
        demo = demos[int(rng.integers(len(demos)))]
        start = int(rng.integers(len(demo)))
        w = extract_window(demo, norm, start, t_m, t_a)
        obs.append(w.observation)
        motions.append(w.motion)
        actions.append(w.actions)
    return TrainingWindow(np.stack(obs), np.stack(motions), np.stack(actions))


def train(
    dataset: Sequence[Demonstration],
    settings: TrainSettings,
    rng: np.random.Generator,
) -> TrainResult:
    """Joint single-optimizer loop over both heads (or the action head alone)."""
    demos = list(dataset)
    if not demos:
        raise EmptyDataset("cannot train on an empty dataset")
    norm = NormStats.from_demos(demos)
    obs_width = demos[0].states.shape[1]
    params = init_policy_params(settings, obs_width, norm, rng)
    state = init_adam(params.arrays, learning_rate=settings.learning_rate)
    history: list[dict] = []
    snapshots: list[tuple[int, PolicyParams]] = []
    with_motion = settings.variant == VARIANT_MBA
    for step_idx in range(1, settings.training_steps + 1):
        window = _sample_batch(demos, norm, settings.t_m, settings.t_a, settings.batch_size, rng)
        leaves = _leaves(params.arrays)
        if with_motion:
            loss_m = motion_training_loss(params, window, rng, leaves=leaves)
            loss_a = action_training_loss(params, window, rng, leaves=leaves)
            total = add(loss_m, loss_a)
            motion_value = loss_m.item()
        else:
            loss_a = action_training_loss(params, window, rng, leaves=leaves)
            total = loss_a
            motion_value = None
        backward(total)
        grads = {k: t.grad if t.grad is not None else np.zeros_like(t.data) for k, t in leaves.items()}
        new_arrays, state = adam_step(params.arrays, grads, state)
        params = dataclasses.replace(params, arrays=new_arrays)
        history.append(
            {
                "step": step_idx,
                "motion_loss": motion_value,
                "action_loss": loss_a.item(),
                "total_loss": total.item(),
            }
        )
        if settings.checkpoint_every > 0 and step_idx % settings.checkpoint_every == 0:
            snapshots.append((step_idx, params))
    return TrainResult(params=params, history=history, snapshots=snapshots)


# --- checkpoint packing -------------------------------------------------------

_VARIANT_CODES = {VARIANT_BASELINE: 0.0, VARIANT_MBA: 1.0}
_KIND_CODES = {"linear": 0.0, "squared_cosine": 1.0}


def save_policy(path, params: PolicyParams) -> None:
    """Pack nets, normalization, horizons and schedule into one array container."""
    arrays: dict[str, np.ndarray] = {
        "meta/variant": np.array([_VARIANT_CODES[params.variant]]),
        "meta/horizons": np.array([params.t_m, params.t_a], dtype=np.float64),
        "meta/widths": np.array(
            [params.obs_width, params.obs_feature_width, params.denoiser_hidden], dtype=np.float64
        ),
        "meta/schedule": np.array([params.schedule_k, _KIND_CODES[params.schedule_kind]]),
        "norm/pose_min": params.norm.pose_min,
        "norm/pose_max": params.norm.pose_max,
        "norm/action_min": params.norm.action_min,
        "norm/action_max": params.norm.action_max,
    }
    for k, v in params.arrays.items():
        arrays[f"net/{k}"] = v
    save_arrays(path, arrays)


def load_policy(path) -> PolicyParams:
    arrays = load_arrays(path)
    try:
        variant = {v: k for k, v in _VARIANT_CODES.items()}[float(arrays["meta/variant"][0])]
        kind = {v: k for k, v in _KIND_CODES.items()}[float(arrays["meta/schedule"][1])]
        t_m, t_a = (int(x) for x in arrays["meta/horizons"])
        obs_width, obs_feature_width, hidden = (int(x) for x in arrays["meta/widths"])
        norm = NormStats(
            arrays["norm/pose_min"],
            arrays["norm/pose_max"],
            arrays["norm/action_min"],
            arrays["norm/action_max"],
        )
    except KeyError as exc:
        raise ValueError(f"{path}: checkpoint is missing {exc}") from exc
    nets = {k[len("net/") :]: v for k, v in arrays.items() if k.startswith("net/")}
    return PolicyParams(
        variant=variant,
        t_m=t_m,
        t_a=t_a,
        obs_width=obs_width,
        obs_feature_width=obs_feature_width,
        denoiser_hidden=hidden,
        schedule_k=int(arrays["meta/schedule"][0]),
        schedule_kind=kind,
        norm=norm,
        arrays=nets,
    )
