"""Unlearning procedures: produce an unlearned model from (model, data, mask).

All methods run deterministic full-batch descent, so identical inputs
and seeds give identical results and independent runs can safely share
inputs across threads. The retain/forget trade-off follows the weighted
objective ``retain_loss + lambda_reg * forget_loss`` with the forget
loss being the negated training loss; fine-tuning corresponds to
``lambda_reg = 0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data import Dataset, ForgetMask, subset
from .errors import DivergenceError, EmptyRetainSet, ShapeError, SingleClassError
from .models import Activation, ModelParams, Scope, init_params
from .numcore import RngStream

__all__ = [
    "Method",
    "UnlearnConfig",
    "mu_sample_weights",
    "train",
    "retrain",
    "finetune",
    "gradient_ascent_mu",
    "random_label",
    "l1_sparse",
    "apply_method",
]


class Method(enum.Enum):
    RETRAIN = "retrain"
    FT = "ft"
    GA = "ga"
    RL = "rl"
    L1_SPARSE = "l1_sparse"


@dataclass
class UnlearnConfig:
    method: Method = Method.RETRAIN
    lambda_reg: float = 0.0  # retain-vs-forget trade-off; 0 = retain-only
    lr: float = 0.1
    epochs: int = 10
    l1_coef: float = 0.0  # used by L1_SPARSE only
    scope: Scope = Scope.ALL
    rng: RngStream = field(default_factory=lambda: RngStream(0))


def mu_sample_weights(w) -> np.ndarray:
    """Per-sample loss weights induced by selection scores w in [0,1].

    With the forget loss equal to the negated training loss, a sample
    weighted w_i contributes w_i * (-loss) + (1 - w_i) * loss, i.e. an
    effective weight of 1 - 2 w_i: +1 on pure retain, -1 on pure forget.
    """
    w = np.asarray(w, dtype=np.float64)
    return 1.0 - 2.0 * w


def _descend(
    params: ModelParams,
    X: np.ndarray,
    y: np.ndarray,
    sw: np.ndarray,
    epochs: int,
    lr: float,
    l1_coef: float = 0.0,
    scope: Scope = Scope.ALL,
    sign_mode: bool = False,
) -> ModelParams:
    """Full-batch (sign-)descent from a copy of ``params``; guards divergence."""
    out = params.copy()
    last_only = scope is Scope.LAST_LAYER
    if len(out.layers) == 1:
        w0, b0 = out.layers[0]
        loss = kernels.descent_1(w0, b0, X, y, sw, epochs, lr, l1_coef, sign_mode)
    else:
        (w0, b0), (w1, b1) = out.layers
        loss = kernels.descent_2(
            w0,
            b0,
            w1,
            b1,
            X,
            y,
            sw,
            epochs,
            lr,
            l1_coef,
            sign_mode,
            out.activation is Activation.RELU,
            last_only,
        )
    if epochs > 0 and (not np.isfinite(loss) or abs(loss) > kernels.LOSS_GUARD):
        raise DivergenceError(f"training loss {loss} breached the divergence guard")
    return out


def train(
    dataset: Dataset,
    spec,
    epochs: int,
    lr: float,
    rng: RngStream,
    activation: Activation = Activation.RELU,
) -> ModelParams:
    """Full-batch gradient-descent training from a fresh seeded init."""
    params = init_params(spec, rng, activation)
    sw = np.ones(dataset.n)
    return _descend(params, dataset.X, dataset.y, sw, epochs, lr)


def retrain(
    dataset: Dataset,
    mask: ForgetMask,
    spec,
    config: UnlearnConfig,
    theta_o: ModelParams | None = None,
    activation: Activation = Activation.RELU,
) -> ModelParams:
    """Train from scratch on the retain set (the exact-unlearning reference).

    With ``scope=LAST_LAYER`` only the last layer is re-initialized and
    trained; every other layer is frozen at ``theta_o``.
    """
    retain = mask.complement(dataset.n)
    if retain.size == 0:
        raise EmptyRetainSet("mask covers the whole training set")
    retain_ds = subset(dataset, retain)
    if config.scope is Scope.ALL:
        return train(retain_ds, spec, config.epochs, config.lr, config.rng, activation)
    if theta_o is None:
        raise ShapeError("last-layer retrain needs the pretrained model to freeze against")
    fresh = init_params(spec, config.rng, activation)
    params = theta_o.copy()
    params.layers[-1] = fresh.layers[-1]
    sw = np.ones(retain_ds.n)
    return _descend(params, retain_ds.X, retain_ds.y, sw, config.epochs, config.lr, scope=Scope.LAST_LAYER)


def _retain_forget_weights(n: int, mask: ForgetMask, lambda_reg: float) -> np.ndarray:
    """Weights realizing retain-mean CE plus lambda_reg times negated forget-mean CE."""
    retain = mask.complement(n)
    if retain.size == 0:
        raise EmptyRetainSet("mask covers the whole training set")
    sw = np.zeros(n)
    sw[retain] = n / retain.size
    if lambda_reg != 0.0 and mask.m > 0:
        sw[mask.indices] = -lambda_reg * n / mask.m
    return sw


def finetune(
    theta_o: ModelParams,
    dataset: Dataset,
    mask: ForgetMask,
    config: UnlearnConfig,
) -> ModelParams:
    """Continue training theta_o on the retain set (catastrophic forgetting)."""
    sw = _retain_forget_weights(dataset.n, mask, config.lambda_reg)
    return _descend(theta_o, dataset.X, dataset.y, sw, config.epochs, config.lr, scope=config.scope)


def gradient_ascent_mu(
    theta_o: ModelParams,
    dataset: Dataset,
    w,
    config: UnlearnConfig,
) -> ModelParams:
    """Descend the selection-weighted objective with weights (1 - 2 w_i).

    Samples with w_i > 0.5 contribute negated loss, i.e. gradient
    ascent; w_i = 0.5 cancels a sample entirely.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (dataset.n,):
        raise ShapeError(f"selection weights must have shape ({dataset.n},)")
    sw = mu_sample_weights(w)
    return _descend(theta_o, dataset.X, dataset.y, sw, config.epochs, config.lr, scope=config.scope)


def random_label(
    theta_o: ModelParams,
    dataset: Dataset,
    mask: ForgetMask,
    config: UnlearnConfig,
) -> ModelParams:
    """Relabel forget samples to a random wrong class, then fine-tune on everything.

    Labels are drawn once (seeded) before descent so runs are exactly
    reproducible.
    """
    if dataset.classes < 2:
        raise SingleClassError("relabeling needs at least two classes")
    y = dataset.y.copy()
    if mask.m > 0:
        gen = config.rng.generator()
        draws = gen.integers(0, dataset.classes - 1, size=mask.m)
        originals = y[mask.indices]
        y[mask.indices] = np.where(draws < originals, draws, draws + 1)
    sw = np.ones(dataset.n)
    return _descend(theta_o, dataset.X, y, sw, config.epochs, config.lr, scope=config.scope)


def l1_sparse(
    theta_o: ModelParams,
    dataset: Dataset,
    mask: ForgetMask,
    config: UnlearnConfig,
) -> ModelParams:
    """Fine-tune on the retain set with an L1 penalty on all parameters.

    The subgradient of |.| at 0 is taken as 0; l1_coef = 0 reproduces
    finetune exactly.
    """
    sw = _retain_forget_weights(dataset.n, mask, config.lambda_reg)
    return _descend(
        theta_o,
        dataset.X,
        dataset.y,
        sw,
        config.epochs,
        config.lr,
        l1_coef=config.l1_coef,
        scope=config.scope,
    )


def apply_method(
    theta_o: ModelParams | None,
    dataset: Dataset,
    mask: ForgetMask,
    spec,
    config: UnlearnConfig,
    activation: Activation = Activation.RELU,
) -> ModelParams:
    """Dispatch one catalog method on a (model, dataset, mask) triple.

    ``theta_o`` may be None only for all-layer retrain, which starts
    from scratch anyway.
    """
    if config.method is not Method.RETRAIN and theta_o is None:
        raise ShapeError(f"{config.method.value} needs the pretrained model")
    if config.method is Method.RETRAIN:
        return retrain(dataset, mask, spec, config, theta_o, activation)
    if config.method is Method.FT:
        return finetune(theta_o, dataset, mask, config)
    if config.method is Method.GA:
        w = np.zeros(dataset.n)
        w[mask.indices] = 1.0
        return gradient_ascent_mu(theta_o, dataset, w, config)
    if config.method is Method.RL:
        return random_label(theta_o, dataset, mask, config)
    if config.method is Method.L1_SPARSE:
        return l1_sparse(theta_o, dataset, mask, config)
    raise ValueError(f"unknown method {config.method}")
