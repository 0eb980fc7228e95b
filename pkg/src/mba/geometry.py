"""SE(3) pose utilities shared by the policy heads and the simulator.

Rotations travel as 6D vectors (the first two columns of the rotation
matrix, column major) and are re-orthonormalized with Gram-Schmidt on
decode, so a noisy vector coming out of a sampler still maps to a valid
rotation. Object poses are 9D (translation + rot6d), robot actions are
10D (translation + rot6d + gripper width).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

POSE_WIDTH = 9
ACTION_WIDTH = 10

_NORM_EPS = 1e-9
_PARALLEL_EPS = 1e-6  # residual angle below which the two axes are degenerate


class DegenerateRotation(ValueError):
    """A 6D rotation vector that cannot be orthonormalized."""


class WrongLength(ValueError):
    """A packed pose/action vector with the wrong number of entries."""


def _as_vector(v, n: int, what: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape != (n,):
        raise WrongLength(f"{what} must have length {n}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class Rotation:
    """Proper rotation matrix; orthonormality and det(+1) checked on construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError(f"rotation matrix must be 3x3, got {m.shape}")
        if np.abs(m.T @ m - np.eye(3)).max() >= 1e-6:
            raise ValueError("rotation matrix columns are not orthonormal")
        if abs(np.linalg.det(m) - 1.0) >= 1e-6:
            raise ValueError("rotation matrix determinant is not +1")
        object.__setattr__(self, "matrix", m)


def identity_rotation() -> Rotation:
    return Rotation(np.eye(3))


def rotation_about_z(angle: float) -> Rotation:
    c, s = np.cos(angle), np.sin(angle)
    return Rotation(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]))


def random_rotation(rng: np.random.Generator) -> Rotation:
    """Uniform random rotation via a normalized Gaussian quaternion."""
    q = rng.standard_normal(4)
    w, x, y, z = q / np.linalg.norm(q)
    return Rotation(
        np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )
    )


def encode_rot6d(r: Rotation) -> np.ndarray:
    """First two columns of the rotation matrix, column major."""
    m = r.matrix
    return np.concatenate([m[:, 0], m[:, 1]])


def decode_rot6d(v) -> Rotation:
    """Gram-Schmidt a 6-vector back onto SO(3).

    Works for any non-degenerate input, not just exact rotation fragments;
    raises DegenerateRotation when the first axis is (near-)zero or the
    second is (near-)parallel to the first.
    """
    arr = _as_vector(v, 6, "rot6d vector")
    x, y = arr[:3], arr[3:]
    nx = np.linalg.norm(x)
    if nx <= _NORM_EPS:
        raise DegenerateRotation("first rot6d axis is (near-)zero")
    c1 = x / nx
    ny = np.linalg.norm(y)
    if ny <= _NORM_EPS:
        raise DegenerateRotation("second rot6d axis is (near-)zero")
    resid = y - (c1 @ y) * c1
    nr = np.linalg.norm(resid)
    if nr < _PARALLEL_EPS * ny:
        raise DegenerateRotation("rot6d axes are (near-)parallel")
    c2 = resid / nr
    c3 = np.cross(c1, c2)
    return Rotation(np.column_stack([c1, c2, c3]))


def geodesic_distance(a: Rotation, b: Rotation) -> float:
    """Rotation angle of a^T b, in radians."""
    cos = (np.trace(a.matrix.T @ b.matrix) - 1.0) / 2.0
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


@dataclass(frozen=True, eq=False)
class ObjectPose:
    """9D pose: 3D translation plus rot6d."""

    translation: np.ndarray
    rot6d: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "translation", _as_vector(self.translation, 3, "translation"))
        object.__setattr__(self, "rot6d", _as_vector(self.rot6d, 6, "rot6d"))

    def rotation(self) -> Rotation:
        return decode_rot6d(self.rot6d)


@dataclass(frozen=True, eq=False)
class RobotAction:
    """10D action: 3D translation, rot6d, gripper width clamped to [0, 1]."""

    translation: np.ndarray
    rot6d: np.ndarray
    gripper_width: float

    def __post_init__(self):
        object.__setattr__(self, "translation", _as_vector(self.translation, 3, "translation"))
        object.__setattr__(self, "rot6d", _as_vector(self.rot6d, 6, "rot6d"))
        object.__setattr__(self, "gripper_width", float(np.clip(self.gripper_width, 0.0, 1.0)))

    def rotation(self) -> Rotation:
        return decode_rot6d(self.rot6d)


def identity_pose() -> ObjectPose:
    return ObjectPose(np.zeros(3), np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0]))


def pose_from(translation, rotation: Rotation) -> ObjectPose:
    return ObjectPose(np.asarray(translation, dtype=np.float64), encode_rot6d(rotation))


def pack_pose(p: ObjectPose) -> np.ndarray:
    return np.concatenate([p.translation, p.rot6d])


def unpack_pose(v) -> ObjectPose:
    arr = _as_vector(v, POSE_WIDTH, "packed pose")
    return ObjectPose(arr[:3], arr[3:])


def pack_action(a: RobotAction) -> np.ndarray:
    return np.concatenate([a.translation, a.rot6d, [a.gripper_width]])


def unpack_action(v) -> RobotAction:
    arr = _as_vector(v, ACTION_WIDTH, "packed action")
    return RobotAction(arr[:3], arr[3:9], arr[9])


def compose(a: ObjectPose, b: ObjectPose) -> ObjectPose:
    """SE(3) composition a ∘ b."""
    ra = a.rotation().matrix
    rb = b.rotation().matrix
    return ObjectPose(a.translation + ra @ b.translation, encode_rot6d(Rotation(ra @ rb)))


def relative_pose(a: ObjectPose, b: ObjectPose) -> ObjectPose:
    """a^-1 ∘ b, so compose(a, relative_pose(a, b)) == b."""
    ra = a.rotation().matrix
    rb = b.rotation().matrix
    return ObjectPose(ra.T @ (b.translation - a.translation), encode_rot6d(Rotation(ra.T @ rb)))


def inverse_pose(p: ObjectPose) -> ObjectPose:
    return relative_pose(p, identity_pose())


@dataclass(frozen=True, eq=False)
class MotionChunk:
    """Fixed-length sequence of object poses."""

    poses: tuple[ObjectPose, ...]

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))

    def __len__(self) -> int:
        return len(self.poses)

    def flatten(self) -> np.ndarray:
        return np.concatenate([pack_pose(p) for p in self.poses])

    @classmethod
    def from_flat(cls, v) -> "MotionChunk":
        arr = np.asarray(v, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0 or arr.size % POSE_WIDTH != 0:
            raise WrongLength(f"flat motion chunk size must be a positive multiple of {POSE_WIDTH}")
        rows = arr.reshape(-1, POSE_WIDTH)
        return cls(tuple(unpack_pose(row) for row in rows))


@dataclass(frozen=True, eq=False)
class ActionChunk:
    """Fixed-length sequence of robot actions."""

    actions: tuple[RobotAction, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))

    def __len__(self) -> int:
        return len(self.actions)

    def flatten(self) -> np.ndarray:
        return np.concatenate([pack_action(a) for a in self.actions])

    @classmethod
    def from_flat(cls, v) -> "ActionChunk":
        arr = np.asarray(v, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0 or arr.size % ACTION_WIDTH != 0:
            raise WrongLength(f"flat action chunk size must be a positive multiple of {ACTION_WIDTH}")
        rows = arr.reshape(-1, ACTION_WIDTH)
        return cls(tuple(unpack_action(row) for row in rows))
