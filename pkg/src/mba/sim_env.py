"""Deterministic planar manipulation environments with exact pose ground truth.

The world is quasi-static and kinematic: a point effector moves in the
z = 0 plane under per-step displacement clamps, a gripper width slews
toward its command, and the single object follows the effector rigidly
while attached. Every state field is a pure function of (seed, action
sequence), which is what makes the recorded object poses usable as exact
motion supervision.

Raw state vector layout (width 28, fixed and versioned):
[effector pose 9, gripper width 1, object pose 9, goal pose 9].
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import (
    ACTION_WIDTH,
    POSE_WIDTH,
    DegenerateRotation,
    ObjectPose,
    RobotAction,
    Rotation,
    compose,
    encode_rot6d,
    geodesic_distance,
    identity_pose,
    inverse_pose,
    pack_action,
    pack_pose,
    relative_pose,
    rotation_about_z,
)

TASK_PICK_PLACE = "PickPlace"
TASK_PICK_ROTATE = "PickRotate"
TASKS = (TASK_PICK_PLACE, TASK_PICK_ROTATE)

STATE_WIDTH = 28

MOVE_CLAMP = 0.05  # max translation per step, workspace units
ROTATION_CLAMP = 0.2  # max rotation per step, radians
GRIPPER_SLEW = 0.2  # max gripper width change per step
WORKSPACE_PAD = 0.05
GRIPPER_OPEN = 1.0

_HOME_TRANSLATION = np.array([0.5, 0.5, 0.0])
_SPAWN_LO, _SPAWN_HI = 0.1, 0.9
_MIN_SEPARATION = 0.2


class ExpertExhausted(RuntimeError):
    """Demo collection ran out of seeds before reaching the requested count."""


class DatasetError(ValueError):
    """Malformed or wrong-version demonstration dataset file."""


@dataclass(frozen=True)
class TaskSpec:
    task: str = TASK_PICK_PLACE
    eps_pos: float = 0.02
    eps_rot: float = 0.1
    max_steps: int = 200
    grasp_radius: float = 0.03
    grasp_close_threshold: float = 0.2

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.eps_pos <= 0 or self.eps_rot <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class EnvState:
    effector_pose: ObjectPose
    gripper_width: float
    object_pose: ObjectPose
    goal_pose: ObjectPose
    attached: bool
    grasp_offset: ObjectPose | None
    step_index: int


@dataclass(frozen=True)
class Demonstration:
    """Time-aligned (raw state, object pose, action) frames for one episode."""

    task: str
    seed: int
    success: bool
    states: np.ndarray  # (N, 28)
    object_poses: np.ndarray  # (N, 9)
    actions: np.ndarray  # (N, 10)

    def __len__(self) -> int:
        return self.states.shape[0]


def state_vector(state: EnvState) -> np.ndarray:
    return np.concatenate(
        [
            pack_pose(state.effector_pose),
            [state.gripper_width],
            pack_pose(state.object_pose),
            pack_pose(state.goal_pose),
        ]
    )


def reset(spec: TaskSpec, seed: int) -> EnvState:
    """Sample object/goal poses at least 0.2 apart; effector starts at home."""
    rng = np.random.default_rng(seed)
    obj_xy = rng.uniform(_SPAWN_LO, _SPAWN_HI, size=2)
    obj_rot = identity_pose().rot6d
    if spec.task == TASK_PICK_ROTATE:
        obj_rot = encode_rot6d(rotation_about_z(rng.uniform(-np.pi, np.pi)))
    while True:
        goal_xy = rng.uniform(_SPAWN_LO, _SPAWN_HI, size=2)
        if np.linalg.norm(goal_xy - obj_xy) >= _MIN_SEPARATION:
            break
    goal_rot = identity_pose().rot6d
    if spec.task == TASK_PICK_ROTATE:
        goal_rot = encode_rot6d(rotation_about_z(rng.uniform(-np.pi, np.pi)))
    return EnvState(
        effector_pose=ObjectPose(_HOME_TRANSLATION.copy(), identity_pose().rot6d),
        gripper_width=GRIPPER_OPEN,
        object_pose=ObjectPose(np.array([obj_xy[0], obj_xy[1], 0.0]), obj_rot),
        goal_pose=ObjectPose(np.array([goal_xy[0], goal_xy[1], 0.0]), goal_rot),
        attached=False,
        grasp_offset=None,
        step_index=0,
    )


def _so3_exp(axis: np.ndarray, angle: float) -> np.ndarray:
    x, y, z = axis
    w = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * w + (1.0 - np.cos(angle)) * (w @ w)


def _rotate_toward(current: Rotation, target: Rotation, max_angle: float) -> Rotation:
    angle = geodesic_distance(current, target)
    if angle <= max_angle:
        return target
    rel = current.matrix.T @ target.matrix
    axis = np.array([rel[2, 1] - rel[1, 2], rel[0, 2] - rel[2, 0], rel[1, 0] - rel[0, 1]])
    axis = axis / (2.0 * np.sin(angle))
    return Rotation(current.matrix @ _so3_exp(axis, max_angle))


def _translate_toward(current: np.ndarray, target: np.ndarray, max_dist: float) -> np.ndarray:
    delta = target - current
    dist = np.linalg.norm(delta)
    if dist <= max_dist:
        return target.copy()
    return current + delta * (max_dist / dist)


def _pose_step_toward(current: ObjectPose, target: ObjectPose) -> ObjectPose:
    t = _translate_toward(current.translation, target.translation, MOVE_CLAMP)
    r = _rotate_toward(current.rotation(), target.rotation(), ROTATION_CLAMP)
    return ObjectPose(t, encode_rot6d(r))


def step(state: EnvState, action: RobotAction, spec: TaskSpec) -> EnvState:
    """Advance one step. Commands are clamped, never rejected."""
    eff = state.effector_pose
    try:
        cmd_rot = action.rotation()
    except DegenerateRotation:
        cmd_rot = eff.rotation()  # undecodable rotation command: hold orientation
    cmd_t = np.array([action.translation[0], action.translation[1], 0.0])

    new_t = _translate_toward(eff.translation, cmd_t, MOVE_CLAMP)
    # inset by the grasp radius so an attached object can never leave the padded box
    lo, hi = -WORKSPACE_PAD + spec.grasp_radius, 1.0 + WORKSPACE_PAD - spec.grasp_radius
    new_t[:2] = np.clip(new_t[:2], lo, hi)
    new_t[2] = 0.0
    new_rot = _rotate_toward(eff.rotation(), cmd_rot, ROTATION_CLAMP)
    new_eff = ObjectPose(new_t, encode_rot6d(new_rot))

    obj = state.object_pose
    attached = state.attached
    offset = state.grasp_offset
    if attached:
        obj = compose(new_eff, offset)

    gw = state.gripper_width
    gw = float(np.clip(gw + np.clip(action.gripper_width - gw, -GRIPPER_SLEW, GRIPPER_SLEW), 0.0, 1.0))

    if attached and gw > spec.grasp_close_threshold:
        attached = False
        offset = None
    elif (
        not attached
        and gw < spec.grasp_close_threshold
        and np.linalg.norm(obj.translation - new_eff.translation) <= spec.grasp_radius
    ):
        attached = True
        offset = relative_pose(new_eff, obj)

    return EnvState(
        effector_pose=new_eff,
        gripper_width=gw,
        object_pose=obj,
        goal_pose=state.goal_pose,
        attached=attached,
        grasp_offset=offset,
        step_index=state.step_index + 1,
    )


def is_success(state: EnvState, spec: TaskSpec) -> bool:
    """Object strictly within tolerance of the goal and released."""
    if state.attached:
        return False
    dist = np.linalg.norm(state.object_pose.translation - state.goal_pose.translation)
    if dist >= spec.eps_pos:
        return False
    if spec.task == TASK_PICK_ROTATE:
        ang = geodesic_distance(state.object_pose.rotation(), state.goal_pose.rotation())
        if ang >= spec.eps_rot:
            return False
    return True


def _object_placed(state: EnvState, spec: TaskSpec, slack: float) -> bool:
    dist = np.linalg.norm(state.object_pose.translation - state.goal_pose.translation)
    if dist >= spec.eps_pos * slack:
        return False
    if spec.task == TASK_PICK_ROTATE:
        ang = geodesic_distance(state.object_pose.rotation(), state.goal_pose.rotation())
        if ang >= spec.eps_rot * slack:
            return False
    return True


def scripted_expert(state: EnvState, spec: TaskSpec) -> RobotAction:
    """Phase machine inferred from state: approach, close, transport, open, hold.

    Every emitted command is already within the per-step clamps, so the
    recorded action equals the realized next effector pose.
    """
    eff = state.effector_pose
    obj = state.object_pose
    placed = _object_placed(state, spec, slack=0.5)

    if state.attached:
        if placed:
            return RobotAction(eff.translation, eff.rot6d, GRIPPER_OPEN)  # release in place
        # move so that the carried object lands exactly on the goal
        offset = relative_pose(eff, obj)
        target = compose(state.goal_pose, inverse_pose(offset))
        nxt = _pose_step_toward(eff, target)
        return RobotAction(nxt.translation, nxt.rot6d, 0.0)

    if placed:
        return RobotAction(eff.translation, eff.rot6d, GRIPPER_OPEN)  # hold clear

    if np.linalg.norm(obj.translation - eff.translation) > spec.grasp_radius * 0.5:
        nxt = _pose_step_toward(eff, ObjectPose(obj.translation, eff.rot6d))
        return RobotAction(nxt.translation, nxt.rot6d, GRIPPER_OPEN)

    return RobotAction(eff.translation, eff.rot6d, 0.0)  # close over the object


def run_expert_episode(spec: TaskSpec, seed: int) -> Demonstration:
    """Roll the scripted expert from reset(seed) and record every frame."""
    state = reset(spec, seed)
    states: list[np.ndarray] = []
    poses: list[np.ndarray] = []
    actions: list[np.ndarray] = []
    success = False
    while state.step_index < spec.max_steps:
        action = scripted_expert(state, spec)
        states.append(state_vector(state))
        poses.append(pack_pose(state.object_pose))
        actions.append(pack_action(action))
        state = step(state, action, spec)
        if is_success(state, spec):
            success = True
            break
    if len(states) < spec.max_steps:
        # terminal hold frame: an absorbing fixed point for window padding
        hold = RobotAction(state.effector_pose.translation, state.effector_pose.rot6d, state.gripper_width)
        states.append(state_vector(state))
        poses.append(pack_pose(state.object_pose))
        actions.append(pack_action(hold))
    return Demonstration(
        task=spec.task,
        seed=seed,
        success=success,
        states=np.array(states),
        object_poses=np.array(poses),
        actions=np.array(actions),
    )


def collect_demos(spec: TaskSpec, n: int, seed: int) -> list[Demonstration]:
    """Collect n successful expert episodes, skipping failed seeds."""
    if n < 1:
        raise ValueError("need n >= 1 demonstrations")
    demos: list[Demonstration] = []
    for offset in range(10 * n):
        demo = run_expert_episode(spec, seed + offset)
        if demo.success:
            demos.append(demo)
            if len(demos) == n:
                return demos
    raise ExpertExhausted(f"only {len(demos)}/{n} successes within {10 * n} seeds from {seed}")


# --- dataset file format -----------------------------------------------------
#
# magic    4 bytes  b"MBAD"
# version  uint32   1
# task     uint32 task code, f64 eps_pos, f64 eps_rot, uint32 max_steps,
#          f64 grasp_radius, f64 grasp_close_threshold
# layout   uint32 state width, uint32 pose width, uint32 action width
# count    uint32 number of episodes
# episode  int64 seed, uint8 success, uint32 n_frames,
#          n_frames * (state + pose + action) float64 LE
#
# Episode blocks are self-delimiting, so the format is append-friendly:
# write new blocks at the end and patch the count.

DATASET_MAGIC = b"MBAD"
DATASET_VERSION = 1

_TASK_CODES = {TASK_PICK_PLACE: 0, TASK_PICK_ROTATE: 1}
_TASK_NAMES = {v: k for k, v in _TASK_CODES.items()}


def save_demos(path: str | Path, spec: TaskSpec, demos: list[Demonstration]) -> None:
    """Write a demonstration dataset; the file is written atomically."""
    blob = bytearray()
    blob += DATASET_MAGIC
    blob += struct.pack("<I", DATASET_VERSION)
    blob += struct.pack(
        "<IddIdd",
        _TASK_CODES[spec.task],
        spec.eps_pos,
        spec.eps_rot,
        spec.max_steps,
        spec.grasp_radius,
        spec.grasp_close_threshold,
    )
    blob += struct.pack("<III", STATE_WIDTH, POSE_WIDTH, ACTION_WIDTH)
    blob += struct.pack("<I", len(demos))
    for demo in demos:
        if demo.task != spec.task:
            raise DatasetError(f"demo task {demo.task!r} != dataset task {spec.task!r}")
        frames = np.concatenate([demo.states, demo.object_poses, demo.actions], axis=1)
        blob += struct.pack("<qBI", demo.seed, int(demo.success), frames.shape[0])
        blob += frames.astype("<f8").tobytes()
    from .numcore.checkpoint import _atomic_write_bytes

    _atomic_write_bytes(Path(path), bytes(blob))


def load_demos(path: str | Path) -> tuple[TaskSpec, list[Demonstration]]:
    raw = Path(path).read_bytes()
    if len(raw) < 8 or raw[:4] != DATASET_MAGIC:
        raise DatasetError(f"{path}: bad magic (expected {DATASET_MAGIC!r}, got {raw[:4]!r})")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != DATASET_VERSION:
        raise DatasetError(f"{path}: unsupported dataset version {version}")
    offset = 8
    task_code, eps_pos, eps_rot, max_steps, grasp_radius, close_thr = struct.unpack_from("<IddIdd", raw, offset)
    offset += struct.calcsize("<IddIdd")
    if task_code not in _TASK_NAMES:
        raise DatasetError(f"{path}: unknown task code {task_code}")
    spec = TaskSpec(
        task=_TASK_NAMES[task_code],
        eps_pos=eps_pos,
        eps_rot=eps_rot,
        max_steps=max_steps,
        grasp_radius=grasp_radius,
        grasp_close_threshold=close_thr,
    )
    state_w, pose_w, action_w = struct.unpack_from("<III", raw, offset)
    offset += 12
    if (state_w, pose_w, action_w) != (STATE_WIDTH, POSE_WIDTH, ACTION_WIDTH):
        raise DatasetError(f"{path}: unexpected frame layout {(state_w, pose_w, action_w)}")
    (count,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    row = state_w + pose_w + action_w
    demos: list[Demonstration] = []
    try:
        for _ in range(count):
            seed, success, n_frames = struct.unpack_from("<qBI", raw, offset)
            offset += struct.calcsize("<qBI")
            frames = np.frombuffer(raw, dtype="<f8", count=n_frames * row, offset=offset)
            frames = frames.reshape(n_frames, row).astype(np.float64)
            offset += 8 * n_frames * row
            demos.append(
                Demonstration(
                    task=spec.task,
                    seed=seed,
                    success=bool(success),
                    states=frames[:, :state_w],
                    object_poses=frames[:, state_w : state_w + pose_w],
                    actions=frames[:, state_w + pose_w :],
                )
            )
    except (struct.error, ValueError) as exc:
        raise DatasetError(f"{path}: truncated or corrupt dataset ({exc})") from exc
    if offset != len(raw):
        raise DatasetError(f"{path}: trailing bytes after {count} episodes")
    return spec, demos
