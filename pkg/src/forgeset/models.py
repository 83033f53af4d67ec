"""Small differentiable classifiers with explicit forward/backward passes.

Two architectures are supported: a linear softmax classifier (one dense
layer) and a one-hidden-layer MLP. That is enough to exercise every
optimizer and unlearning routine in the package while keeping brute
force oracles tractable. Losses are averaged (not summed) over the
batch so learning rates are batch-size independent.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import BadSpec, LabelOutOfRange, ShapeError
from .numcore import RngStream, as_matrix

__all__ = [
    "Activation",
    "Scope",
    "ModelParams",
    "GradParams",
    "LossValue",
    "init_params",
    "forward",
    "loss_and_grad",
    "per_sample_loss",
    "params_equal",
    "save_checkpoint",
    "load_checkpoint",
]


class Activation(enum.Enum):
    RELU = "relu"
    IDENTITY = "identity"


class Scope(enum.Enum):
    """Which parameters an update may touch."""

    ALL = "all"
    LAST_LAYER = "last_layer"


@dataclass
class ModelParams:
    """Dense layer stack: ``layers[i] = (weight, bias)``.

    Weights are (fan_in, fan_out) float64, biases (fan_out,). Treat
    instances as immutable; routines that update parameters work on
    copies.
    """

    layers: list[tuple[np.ndarray, np.ndarray]]
    activation: Activation = Activation.RELU

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[0]

    @property
    def class_count(self) -> int:
        return self.layers[-1][0].shape[1]

    def sizes(self) -> list[int]:
        """Layer-size list, input width first."""
        return [self.input_dim] + [w.shape[1] for w, _ in self.layers]

    def copy(self) -> "ModelParams":
        return ModelParams([(w.copy(), b.copy()) for w, b in self.layers], self.activation)

    def flat(self) -> np.ndarray:
        """All parameters concatenated, layer by layer, weights then bias."""
        return np.concatenate([np.concatenate((w.ravel(), b)) for w, b in self.layers])

    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.flat())))


# Gradients mirror the parameter structure exactly.
GradParams = ModelParams


@dataclass
class LossValue:
    """Weighted-mean loss; ``total == per_sample.mean()`` by construction."""

    total: float
    per_sample: np.ndarray


def _validated_spec(spec) -> list[int]:
    sizes = list(spec)
    if len(sizes) < 2:
        raise BadSpec(f"layer spec needs at least [input, output], got {sizes}")
    if any((not isinstance(s, (int, np.integer))) or s <= 0 for s in sizes):
        raise BadSpec(f"layer sizes must be positive integers, got {sizes}")
    if len(sizes) > 3:
        raise BadSpec("only 1- and 2-layer architectures are supported")
    return [int(s) for s in sizes]


def init_params(spec, rng: RngStream, activation: Activation = Activation.RELU) -> ModelParams:
    """Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases."""
    sizes = _validated_spec(spec)
    gen = rng.generator()
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        w = gen.uniform(-bound, bound, size=(fan_in, fan_out))
        layers.append((np.ascontiguousarray(w), np.zeros(fan_out)))
    return ModelParams(layers, activation)


def forward(params: ModelParams, X) -> np.ndarray:
    """Logits for a batch; rows = samples, cols = classes."""
    X = as_matrix(X, cols=params.input_dim)
    if len(params.layers) == 1:
        (w0, b0) = params.layers[0]
        return kernels.forward_1(w0, b0, X)
    (w0, b0), (w1, b1) = params.layers
    return kernels.forward_2(w0, b0, w1, b1, X, params.activation is Activation.RELU)


def _validated_labels(y, n: int, classes: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if y.ndim != 1 or y.shape[0] != n:
        raise ShapeError(f"labels must be 1-D of length {n}, got shape {y.shape}")
    if y.size and (y.min() < 0 or y.max() >= classes):
        raise LabelOutOfRange(f"labels must lie in [0, {classes})")
    return y


def loss_and_grad(
    params: ModelParams,
    X,
    y,
    weights=None,
    scope: Scope = Scope.ALL,
) -> tuple[LossValue, GradParams]:
    """Weighted-mean cross-entropy and its exact gradient.

    ``weights`` are per-sample loss multipliers (default 1; negative
    values are allowed and flip a sample's loss into an ascent term).
    With ``scope=Scope.LAST_LAYER`` the gradient blocks of every layer
    but the last are exactly zero.
    """
    X = as_matrix(X, cols=params.input_dim)
    n = X.shape[0]
    y = _validated_labels(y, n, params.class_count)
    if weights is None:
        sw = np.ones(n)
    else:
        sw = np.asarray(weights, dtype=np.float64)
        if sw.shape != (n,):
            raise ShapeError(f"weights must have shape ({n},), got {sw.shape}")
        if not np.all(np.isfinite(sw)):
            raise ShapeError("weights must be finite")

    last_only = scope is Scope.LAST_LAYER
    if len(params.layers) == 1:
        (w0, b0) = params.layers[0]
        total, per, dw0, db0 = kernels.loss_grad_1(w0, b0, X, y, sw)
        grads = [(dw0, db0)]
    else:
        (w0, b0), (w1, b1) = params.layers
        total, per, dw0, db0, dw1, db1 = kernels.loss_grad_2(
            w0, b0, w1, b1, X, y, sw, params.activation is Activation.RELU, last_only
        )
        grads = [(dw0, db0), (dw1, db1)]
    return LossValue(float(total), per), GradParams(grads, params.activation)


def per_sample_loss(params: ModelParams, X, y) -> np.ndarray:
    """Unweighted cross-entropy of each sample under ``params``."""
    logits = forward(params, X)
    y = _validated_labels(y, logits.shape[0], params.class_count)
    return np.asarray(kernels.ce_per_sample(logits, y))


def params_equal(a: ModelParams, b: ModelParams) -> bool:
    """Bitwise equality of two parameter sets."""
    if len(a.layers) != len(b.layers) or a.activation is not b.activation:
        return False
    return all(
        np.array_equal(wa, wb) and np.array_equal(ba, bb)
        for (wa, ba), (wb, bb) in zip(a.layers, b.layers)
    )


def save_checkpoint(params: ModelParams, path) -> None:
    """Write a model to ``path`` as an .npz archive.

    Keys: ``sizes`` (layer-size list), ``activation`` (enum value), and
    ``w{i}``/``b{i}`` per layer, stored row-major float64. Loading gives
    back bit-identical parameters.
    """
    arrays = {
        "sizes": np.asarray(params.sizes(), dtype=np.int64),
        "activation": np.asarray(params.activation.value),
    }
    for i, (w, b) in enumerate(params.layers):
        arrays[f"w{i}"] = w
        arrays[f"b{i}"] = b
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> ModelParams:
    path = Path(path)
    with np.load(path, allow_pickle=False) as data:
        sizes = data["sizes"]
        activation = Activation(str(data["activation"]))
        layers = []
        for i in range(len(sizes) - 1):
            layers.append(
                (
                    np.ascontiguousarray(data[f"w{i}"], dtype=np.float64),
                    np.ascontiguousarray(data[f"b{i}"], dtype=np.float64),
                )
            )
    return ModelParams(layers, activation)
