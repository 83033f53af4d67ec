"""Experiment configuration: JSON in, fully-resolved JSON out.

A config file describes one experiment end to end (data, model,
pretraining, selection, unlearning methods, evaluation seeds). Every
default is made explicit in the resolved config that commands write
next to their outputs, so a run directory is self-describing and can be
reproduced byte-for-byte from it.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

from .errors import ConfigError

__all__ = ["load_config", "resolve", "resolved_json", "config_hash", "DEFAULTS"]

DEFAULTS: dict = {
    "seed": 0,
    "out": "runs/experiment",
    "dataset": {
        "kind": "blobs",
        "n_per_class": 200,
        "classes": 2,
        "dim": 2,
        "spread": 0.55,
        "test_n_per_class": 200,
        "n": 2000,
        "correlation": 0.9,
        "test_n": 1000,
        "train_path": "",
        "test_path": "",
    },
    "model": {"sizes": [2, 2], "activation": "relu"},
    "pretrain": {"epochs": 300, "lr": 0.5},
    "forget": {"ratio": 0.1, "m": None},
    "selection": {
        "gamma": 1e-4,
        "alpha": 1e-3,
        "beta": 0.01,
        "outer_iters": 20,
        "inner_epochs": 10,
        "granularity": "sample",
        "directions": ["worst"],
        "lower_init": "pretrained",
        "init_random_binary": False,
    },
    "unlearn": [
        {"method": "retrain", "epochs": 300, "lr": 0.5, "lambda_reg": 0.0, "l1_coef": 0.0, "scope": "all"}
    ],
    "eval_seeds": [0],
    "oracle": {"epochs": 60, "lr": 0.5, "limit": 10000},
    "mixture": {"grid": [0.0, 0.25, 0.5, 0.75, 1.0]},
    "transfer": {"models": []},
}

_UNLEARN_DEFAULTS = {
    "method": "retrain",
    "epochs": 10,
    "lr": 0.1,
    "lambda_reg": 0.0,
    "l1_coef": 0.0,
    "scope": "all",
}


def _merge(defaults, value, path):
    if isinstance(defaults, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object, got {type(value).__name__}")
        unknown = set(value) - set(defaults)
        if unknown:
            raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
        merged = copy.deepcopy(defaults)
        for key, sub in value.items():
            merged[key] = _merge(defaults[key], sub, f"{path}.{key}")
        return merged
    return copy.deepcopy(value)


def resolve(user: dict) -> dict:
    """Fill defaults, validate, and return the fully-explicit config."""
    if not isinstance(user, dict):
        raise ConfigError("config root must be a JSON object")
    user = copy.deepcopy(user)
    methods = user.pop("unlearn", None)
    cfg = _merge(DEFAULTS, user, "config")
    if methods is not None:
        if not isinstance(methods, list) or not methods:
            raise ConfigError("config.unlearn must be a non-empty list of method objects")
        cfg["unlearn"] = [_merge(_UNLEARN_DEFAULTS, mth, f"config.unlearn[{i}]") for i, mth in enumerate(methods)]
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    ds = cfg["dataset"]
    if ds["kind"] not in ("blobs", "biased", "csv"):
        raise ConfigError(f"dataset.kind must be blobs, biased, or csv, got {ds['kind']!r}")
    if ds["kind"] == "csv" and (not ds["train_path"] or not ds["test_path"]):
        raise ConfigError("dataset.kind=csv needs train_path and test_path")
    forget = cfg["forget"]
    if forget["m"] is None:
        if not 0.0 < forget["ratio"] <= 1.0:
            raise ConfigError("forget.ratio must lie in (0, 1]")
    elif forget["m"] < 0:
        raise ConfigError("forget.m must be non-negative")
    sel = cfg["selection"]
    if sel["granularity"] not in ("sample", "class"):
        raise ConfigError("selection.granularity must be 'sample' or 'class'")
    if sel["lower_init"] not in ("pretrained", "random"):
        raise ConfigError("selection.lower_init must be 'pretrained' or 'random'")
    for d in sel["directions"]:
        if d not in ("worst", "easiest"):
            raise ConfigError(f"selection.directions entries must be 'worst' or 'easiest', got {d!r}")
    names = [mth["method"] for mth in cfg["unlearn"]]
    if len(set(names)) != len(names):
        raise ConfigError("config.unlearn method names must be unique (they key report rows)")
    for i, mth in enumerate(cfg["unlearn"]):
        if mth["method"] not in ("retrain", "ft", "ga", "rl", "l1_sparse"):
            raise ConfigError(f"config.unlearn[{i}].method unknown: {mth['method']!r}")
        if mth["scope"] not in ("all", "last_layer"):
            raise ConfigError(f"config.unlearn[{i}].scope must be 'all' or 'last_layer'")
    if not isinstance(cfg["eval_seeds"], list) or not cfg["eval_seeds"]:
        raise ConfigError("eval_seeds must be a non-empty list of integers")
    sizes = cfg["model"]["sizes"]
    if not isinstance(sizes, list) or len(sizes) < 2:
        raise ConfigError("model.sizes must list at least [input, output]")


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        user = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    return resolve(user)


def resolved_json(cfg: dict) -> str:
    return json.dumps(cfg, indent=2, sort_keys=True) + "\n"


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(resolved_json(cfg).encode()).hexdigest()


def forget_size(cfg: dict, n: int) -> int:
    m = cfg["forget"]["m"]
    if m is not None:
        return m
    return max(1, round(cfg["forget"]["ratio"] * n))
