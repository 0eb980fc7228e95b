"""Feed-forward layers on top of the tensor engine.

``mlp_forward`` is the differentiable path used during training;
``mlp_infer`` is the same arithmetic on plain arrays for the hot sampling
loops, where no gradients are needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .tensor import ShapeMismatch, Tensor, add, matmul, mish, mish_np, relu, tanh

_ACTIVATIONS = ("relu", "tanh", "mish")
_FINAL_ACTIVATIONS = ("none", "tanh")


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths plus activation choices for a fully-connected network."""

    layer_widths: tuple[int, ...]
    activation: str = "relu"
    final_activation: str = "none"

    def __post_init__(self):
        object.__setattr__(self, "layer_widths", tuple(int(w) for w in self.layer_widths))
        if len(self.layer_widths) < 2:
            raise ValueError("MlpSpec needs at least input and output widths")
        if any(w <= 0 for w in self.layer_widths):
            raise ValueError(f"layer widths must be positive, got {self.layer_widths}")
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.final_activation not in _FINAL_ACTIVATIONS:
            raise ValueError(f"unknown final activation {self.final_activation!r}")

    @property
    def n_layers(self) -> int:
        return len(self.layer_widths) - 1


def init_mlp_params(spec: MlpSpec, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init for weights and biases."""
    params: dict[str, np.ndarray] = {}
    widths = spec.layer_widths
    for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        bound = 1.0 / np.sqrt(fan_in)
        params[f"W{i}"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        params[f"b{i}"] = rng.uniform(-bound, bound, size=fan_out)
    return params


def _act_tensor(name: str, x: Tensor) -> Tensor:
    if name == "relu":
        return relu(x)
    if name == "tanh":
        return tanh(x)
    return mish(x)


def mlp_forward(spec: MlpSpec, params: Mapping[str, Tensor], x: Tensor) -> Tensor:
    if x.shape[-1] != spec.layer_widths[0]:
        raise ShapeMismatch(f"mlp input width {x.shape[-1]} != spec width {spec.layer_widths[0]}")
    h = x
    last = spec.n_layers - 1
    for i in range(spec.n_layers):
        h = add(matmul(h, params[f"W{i}"]), params[f"b{i}"])
        if i < last:
            h = _act_tensor(spec.activation, h)
        elif spec.final_activation == "tanh":
            h = tanh(h)
    return h


def _act_np(name: str, x: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(x, 0.0)
    if name == "tanh":
        return np.tanh(x)
    return mish_np(x)


def mlp_infer(spec: MlpSpec, arrays: Mapping[str, np.ndarray], x: np.ndarray) -> np.ndarray:
    """Gradient-free forward pass, numerically identical to mlp_forward."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != spec.layer_widths[0]:
        raise ShapeMismatch(f"mlp input width {x.shape[-1]} != spec width {spec.layer_widths[0]}")
    h = x
    last = spec.n_layers - 1
    for i in range(spec.n_layers):
        h = h @ arrays[f"W{i}"] + arrays[f"b{i}"]
        if i < last:
            h = _act_np(spec.activation, h)
        elif spec.final_activation == "tanh":
            h = np.tanh(h)
    return h
