"""Two-pass forward training loop and a backpropagation baseline.

One training step: clean forward pass, output error, error projected into
input space and added to the input, second forward pass under the *same*
(frozen) weights, then per-layer updates from activation differences between
the two passes.  Updates are batch-averaged and applied once, only after both
passes complete.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    Activation,
    ForwardTrace,
    Layer,
    Network,
    activation_derivative,
    forward,
    softmax_backward,
)
from .data import Dataset
from .modulation import ProjectionMatrix, modulate_input, output_error

__all__ = [
    "Algorithm",
    "Loss",
    "TrainConfig",
    "UpdateSet",
    "MetricRecord",
    "MetricsHistory",
    "EvalResult",
    "DivergenceError",
    "modulated_forward",
    "two_pass_updates",
    "backprop_updates",
    "apply_updates",
    "train",
    "evaluate",
]


class Algorithm(str, Enum):
    TWO_PASS = "two_pass"
    BACKPROP = "backprop"


class Loss(str, Enum):
    """MSE on raw outputs, or MSE behind a softmax output layer.

    Both report mse = mean(gamma**2) and use gamma = x_L - target; the
    backprop baseline differentiates 0.5*sum(gamma**2) through whatever the
    output activation is, so the softmax variant only adds the requirement
    that the last layer actually is softmax.
    """

    MSE = "mse"
    SOFTMAX_MSE = "softmax_mse"


class DivergenceError(RuntimeError):
    """Training produced non-finite values."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 1
    batch_size: int = 64
    seed: int = 0
    algorithm: Algorithm = Algorithm.TWO_PASS
    loss: Loss = Loss.MSE
    lr_decay: float = 0.1
    lr_decay_at: float = 2.0 / 3.0
    shuffle: bool = True

    def __post_init__(self) -> None:
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ValueError("lr_decay must be in (0, 1]")
        if not 0.0 < self.lr_decay_at <= 1.0:
            raise ValueError("lr_decay_at must be in (0, 1]")


@dataclass(frozen=True)
class UpdateSet:
    """Per-layer weight updates, shapes matching the network's weights."""

    deltas: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        for i, d in enumerate(self.deltas):
            if not np.isfinite(d).all():
                raise ValueError(f"update for layer {i + 1} contains non-finite values")


@dataclass(frozen=True)
class MetricRecord:
    iteration: int
    mse: float
    accuracy: float | None


@dataclass(frozen=True)
class MetricsHistory:
    """Per-iteration training metrics, iteration index strictly increasing."""

    records: tuple[MetricRecord, ...]

    def __post_init__(self) -> None:
        its = [r.iteration for r in self.records]
        if any(b <= a for a, b in zip(its, its[1:])):
            raise ValueError("iteration indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final(self) -> MetricRecord:
        return self.records[-1]


@dataclass(frozen=True)
class EvalResult:
    mse: float
    accuracy: float | None
    predictions: np.ndarray


def modulated_forward(net: Network, x_err0: np.ndarray) -> ForwardTrace:
    """Second pass over the modulated input, under the same frozen weights.

    Identical to :func:`forward`; the name marks the contract that the caller
    must not apply any updates between the clean and modulated passes.
    """
    return forward(net, x_err0)


def _batch_width(arr: np.ndarray) -> int:
    return 1 if arr.ndim == 1 else arr.shape[1]


def _avg_outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Mean over the batch of per-sample outer products a_i b_i^T."""
    if a.ndim == 1:
        return np.outer(a, b)
    return (a @ b.T) / a.shape[1]


def two_pass_updates(
    clean: ForwardTrace, modulated: ForwardTrace, gamma: np.ndarray
) -> UpdateSet:
    """Per-layer updates from the activation differences of the two passes.

    Layers 1..L-1 use (x_l - x_err,l) outer the modulated presynaptic
    activation (for layer 1 that presynaptic term is the modulated input
    itself); the last layer uses the output error gamma.  Batched traces
    yield batch-averaged updates.
    """
    if clean.depth != modulated.depth:
        raise ValueError(f"trace depth mismatch: {clean.depth} != {modulated.depth}")
    if _batch_width(clean.x0) != _batch_width(modulated.x0):
        raise ValueError("clean and modulated traces have different batch widths")
    depth = clean.depth
    deltas = []
    for l in range(1, depth):
        diff = clean.xs[l - 1] - modulated.xs[l - 1]
        deltas.append(_avg_outer(diff, modulated.activation(l - 1)))
    deltas.append(_avg_outer(gamma, modulated.activation(depth - 1)))
    return UpdateSet(tuple(deltas))


def backprop_updates(net: Network, clean: ForwardTrace, gamma: np.ndarray) -> UpdateSet:
    """Exact gradient of the loss 0.5*sum((x_L - target)^2), batch-averaged.

    gamma is x_L - target; the chain rule runs through every activation
    (ReLU subgradient 0 at 0, softmax via its full Jacobian).
    """
    if clean.depth != net.depth:
        raise ValueError(f"trace depth {clean.depth} != network depth {net.depth}")
    deltas: list[np.ndarray] = [np.empty(0)] * net.depth
    grad_x = gamma
    for l in reversed(range(net.depth)):
        layer = net.layers[l]
        z, x = clean.zs[l], clean.xs[l]
        if layer.activation is Activation.SOFTMAX:
            delta = softmax_backward(x, grad_x)
        else:
            delta = grad_x * activation_derivative(layer.activation, z, x)
        deltas[l] = _avg_outer(delta, clean.activation(l))
        if l > 0:
            grad_x = layer.weight.T @ delta
    return UpdateSet(tuple(deltas))


def apply_updates(net: Network, updates: UpdateSet, learning_rate: float) -> Network:
    """W_l(t+1) = W_l(t) - eta * dW_l; masked entries of dW are zeroed."""
    if len(updates.deltas) != net.depth:
        raise ValueError(f"{len(updates.deltas)} updates for {net.depth} layers")
    layers = []
    for layer, dw in zip(net.layers, updates.deltas):
        if dw.shape != layer.weight.shape:
            raise ValueError(f"update shape {dw.shape} != weight shape {layer.weight.shape}")
        if layer.mask is not None:
            dw = dw * layer.mask
        layers.append(Layer(layer.weight - learning_rate * dw, layer.activation, layer.mask))
    return Network(tuple(layers))


def _validate_setup(net: Network, data: Dataset, proj: ProjectionMatrix, cfg: TrainConfig) -> None:
    if data.inputs.shape[0] == 0:
        raise ValueError("dataset is empty")
    if data.inputs.shape[1] != net.in_dim:
        raise ValueError(f"data dim {data.inputs.shape[1]} != network in_dim {net.in_dim}")
    if data.targets.shape[1] != net.out_dim:
        raise ValueError(f"target dim {data.targets.shape[1]} != network out_dim {net.out_dim}")
    if proj.input_dim != net.in_dim or proj.output_dim != net.out_dim:
        raise ValueError(
            f"projection shape {proj.input_dim}x{proj.output_dim} does not match "
            f"network {net.in_dim}->{net.out_dim}"
        )
    if cfg.loss is Loss.SOFTMAX_MSE and net.layers[-1].activation is not Activation.SOFTMAX:
        raise ValueError("softmax_mse loss requires a softmax output layer")


def train(
    net: Network,
    data: Dataset,
    proj: ProjectionMatrix,
    cfg: TrainConfig,
    backend=None,
) -> tuple[Network, MetricsHistory]:
    """Train ``net`` on ``data``; returns the trained network and metrics.

    Deterministic for a fixed config: shuffling uses cfg.seed, batches are
    processed in a fixed order, and each update is applied only after both
    passes of its batch complete.  ``backend``, when given, must provide
    ``forward(x) -> ForwardTrace`` and ``refresh(net)`` and is used in place
    of the dense forward pass (weights are re-realized after every update).
    """
    _validate_setup(net, data, proj, cfg)
    if backend is not None:
        backend.refresh(net)

    x_all = data.inputs.T
    t_all = data.targets.T
    labels = data.labels
    classification = data.targets.shape[1] >= 2
    n = data.inputs.shape[0]
    rng = np.random.default_rng(cfg.seed)
    decay_epoch = max(1, int(np.floor(cfg.epochs * cfg.lr_decay_at)))

    records = []
    iteration = 0
    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate * (cfg.lr_decay if epoch >= decay_epoch else 1.0)
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            # Fix the batch's memory layout: the modulated input (xb + F gamma)
            # comes out C-contiguous, and matmul rounding depends on layout, so
            # a C-contiguous clean batch makes both passes bitwise identical
            # whenever gamma is zero (exact fixed point at zero error).
            xb = np.ascontiguousarray(x_all[:, idx])
            tb = t_all[:, idx]
            iteration += 1
            # Divergence shows up as non-finite values; those are detected and
            # reported, so the intermediate overflow warnings are just noise.
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    clean = backend.forward(xb) if backend is not None else forward(net, xb)
                    gamma = output_error(clean.output, tb)
                    mse = float(np.mean(gamma * gamma))
                    if not np.isfinite(mse):
                        raise ValueError("non-finite loss")
                    if cfg.algorithm is Algorithm.TWO_PASS:
                        x_err0 = modulate_input(xb, proj, gamma)
                        modulated = (
                            backend.forward(x_err0)
                            if backend is not None
                            else modulated_forward(net, x_err0)
                        )
                        updates = two_pass_updates(clean, modulated, gamma)
                    else:
                        updates = backprop_updates(net, clean, gamma)
                    # Applying the update is validated here too: on the run's
                    # last batch there is no later forward pass to trip on an
                    # overflowed weight subtraction.
                    net = apply_updates(net, updates, lr)
            except ValueError as exc:
                raise DivergenceError(
                    f"training diverged (non-finite values) at iteration {iteration}"
                ) from exc
            accuracy = (
                float(np.mean(np.argmax(clean.output, axis=0) == labels[idx]))
                if classification
                else None
            )
            if backend is not None:
                backend.refresh(net)
            records.append(MetricRecord(iteration, mse, accuracy))
    return net, MetricsHistory(tuple(records))


def evaluate(
    net: Network, data: Dataset, backend=None, batch_size: int = 2000
) -> EvalResult:
    """Mean squared error, accuracy (classification only), and predictions.

    Samples are evaluated in dataset order, in fixed-size chunks.
    """
    n = data.inputs.shape[0]
    classification = data.targets.shape[1] >= 2
    sq_sum = 0.0
    count = 0
    preds = np.empty(n, dtype=int)
    for start in range(0, n, batch_size):
        xb = data.inputs[start : start + batch_size].T
        tb = data.targets[start : start + batch_size].T
        trace = backend.forward(xb) if backend is not None else forward(net, xb)
        gamma = output_error(trace.output, tb)
        sq_sum += float(np.sum(gamma * gamma))
        count += gamma.size
        preds[start : start + batch_size] = np.argmax(trace.output, axis=0)
    mse = sq_sum / count
    accuracy = float(np.mean(preds == data.labels)) if classification else None
    return EvalResult(mse=mse, accuracy=accuracy, predictions=preds)
