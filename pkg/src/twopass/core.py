"""Dense feed-forward networks: activations, weight init, and the forward pass.

Arrays follow a column convention throughout the package: a single sample is a
1-D vector of length ``d`` and a batch is a ``(d, B)`` matrix whose columns are
samples, so ``W @ x`` covers both cases unchanged.  All public operations
validate that their inputs and outputs are finite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Activation",
    "LayerSpec",
    "Layer",
    "Network",
    "ForwardTrace",
    "activation_apply",
    "activation_derivative",
    "forward",
    "init_weights",
    "build_network",
]


class Activation(str, Enum):
    """Layer nonlinearities.

    SQUARE is the elementwise ``z * z`` measured by an ideal photodetector on a
    real field; SOFTMAX acts along the feature axis (axis 0) and is the only
    non-elementwise kind.
    """

    IDENTITY = "identity"
    RELU = "relu"
    SQUARE = "square"
    SIGMOID = "sigmoid"
    SOFTMAX = "softmax"


def _require_finite(name: str, arr: np.ndarray) -> None:
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")


def activation_apply(kind: Activation, z: np.ndarray) -> np.ndarray:
    """Apply ``kind`` to pre-activations ``z`` ((d,) vector or (d, B) batch)."""
    z = np.asarray(z, dtype=float)
    _require_finite("activation input", z)
    if kind is Activation.IDENTITY:
        return z
    if kind is Activation.RELU:
        return np.maximum(z, 0.0)
    if kind is Activation.SQUARE:
        return z * z
    if kind is Activation.SIGMOID:
        e = np.exp(-np.abs(z))
        return np.where(z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
    if kind is Activation.SOFTMAX:
        e = np.exp(z - z.max(axis=0, keepdims=True))
        return e / e.sum(axis=0, keepdims=True)
    raise ValueError(f"unknown activation kind: {kind!r}")


def activation_derivative(kind: Activation, z: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Elementwise derivative f'(z), given z and x = f(z).

    ReLU uses subgradient 0 at z = 0.  SOFTMAX has a full Jacobian rather than
    an elementwise derivative; use :func:`softmax_backward` for it.
    """
    if kind is Activation.IDENTITY:
        return np.ones_like(z)
    if kind is Activation.RELU:
        return (z > 0.0).astype(float)
    if kind is Activation.SQUARE:
        return 2.0 * z
    if kind is Activation.SIGMOID:
        return x * (1.0 - x)
    raise ValueError(f"{kind!r} has no elementwise derivative")


def softmax_backward(x: np.ndarray, grad_x: np.ndarray) -> np.ndarray:
    """Jacobian-vector product of softmax: dL/dz from x = softmax(z), dL/dx."""
    return x * (grad_x - (grad_x * x).sum(axis=0, keepdims=True))


@dataclass(frozen=True)
class LayerSpec:
    """Shape and nonlinearity of one dense layer."""

    in_dim: int
    out_dim: int
    activation: Activation

    def __post_init__(self) -> None:
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError(f"layer dims must be >= 1, got {self.in_dim}x{self.out_dim}")


@dataclass(frozen=True)
class Layer:
    """One dense layer: weight of shape (out_dim, in_dim), no bias.

    ``mask`` optionally pins a sparsity pattern (1 = trainable, 0 = frozen
    zero).  Construction rejects weights with nonzeros outside the mask, and
    the trainer zeroes masked entries of every update, so masked positions
    stay exactly 0 forever.
    """

    weight: np.ndarray
    activation: Activation
    mask: np.ndarray | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.weight, dtype=float)
        if w.ndim != 2:
            raise ValueError(f"layer weight must be 2-D, got shape {w.shape}")
        _require_finite("layer weight", w)
        object.__setattr__(self, "weight", w)
        if self.mask is not None:
            m = np.asarray(self.mask, dtype=float)
            if m.shape != w.shape:
                raise ValueError(f"mask shape {m.shape} != weight shape {w.shape}")
            if np.any(w[m == 0.0] != 0.0):
                raise ValueError("weight has nonzero entries outside its mask")
            object.__setattr__(self, "mask", m)

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]


@dataclass(frozen=True)
class Network:
    """Ordered dense layers; adjacent layers must be dimension compatible."""

    layers: tuple[Layer, ...]

    def __post_init__(self) -> None:
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("network needs at least one layer")
        for prev, cur in zip(layers, layers[1:]):
            if cur.in_dim != prev.out_dim:
                raise ValueError(
                    f"layer dims incompatible: {prev.out_dim} -> {cur.in_dim}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def to_json(self) -> str:
        """Serialize shapes, activation names, and row-major weights."""
        doc = {
            "layers": [
                {
                    "in_dim": layer.in_dim,
                    "out_dim": layer.out_dim,
                    "activation": layer.activation.value,
                    "weights": layer.weight.ravel().tolist(),
                }
                for layer in self.layers
            ]
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Network":
        doc = json.loads(text)
        layers = []
        for entry in doc["layers"]:
            w = np.asarray(entry["weights"], dtype=float).reshape(
                entry["out_dim"], entry["in_dim"]
            )
            layers.append(Layer(w, Activation(entry["activation"])))
        return cls(tuple(layers))


@dataclass(frozen=True)
class ForwardTrace:
    """Input plus per-layer pre-activations and activations of one pass."""

    x0: np.ndarray
    zs: tuple[np.ndarray, ...]
    xs: tuple[np.ndarray, ...]

    @property
    def depth(self) -> int:
        return len(self.zs)

    @property
    def output(self) -> np.ndarray:
        return self.xs[-1]

    def activation(self, layer: int) -> np.ndarray:
        """Activation entering layer ``layer + 1``; layer 0 is the input."""
        return self.x0 if layer == 0 else self.xs[layer - 1]


def forward(net: Network, x0: np.ndarray) -> ForwardTrace:
    """Run the clean forward pass z_l = W_l x_{l-1}, x_l = f_l(z_l).

    Pure: the network is unchanged and repeated calls give bit-identical
    traces.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape[0] != net.in_dim:
        raise ValueError(f"input length {x0.shape[0]} != network in_dim {net.in_dim}")
    _require_finite("forward input", x0)
    zs, xs = [], []
    x = x0
    for layer in net.layers:
        z = layer.weight @ x
        x = activation_apply(layer.activation, z)
        zs.append(z)
        xs.append(x)
    return ForwardTrace(x0=x0, zs=tuple(zs), xs=tuple(xs))


def init_weights(spec: LayerSpec, seed: int) -> np.ndarray:
    """Glorot-uniform init: entries i.i.d. uniform on +-sqrt(6/(in+out))."""
    bound = np.sqrt(6.0 / (spec.in_dim + spec.out_dim))
    rng = np.random.default_rng(seed)
    return rng.uniform(-bound, bound, size=(spec.out_dim, spec.in_dim))


def build_network(specs: list[LayerSpec], seed: int) -> Network:
    """Build a network from layer specs with per-layer seeds derived from ``seed``."""
    for prev, cur in zip(specs, specs[1:]):
        if cur.in_dim != prev.out_dim:
            raise ValueError(f"layer specs incompatible: {prev.out_dim} -> {cur.in_dim}")
    child_seeds = np.random.SeedSequence(seed).generate_state(len(specs))
    layers = tuple(
        Layer(init_weights(spec, int(child_seeds[i])), spec.activation)
        for i, spec in enumerate(specs)
    )
    return Network(layers)
