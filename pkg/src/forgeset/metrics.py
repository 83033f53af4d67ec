"""Evaluation metrics: UA, MIA, RA, TA, gap-vs-reference, class entropy.

UA is 100 minus the unlearned model's accuracy on the forget set, so
higher means more thoroughly forgotten. The membership attack is a
single loss threshold calibrated for balanced accuracy on retain
(member) versus test (non-member) samples; MIA is the percentage of
forget samples the calibrated attack flags as non-members. Values are
kept at full precision internally and rounded to two decimals only in
output files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import EmptyBatch
from .models import ModelParams, forward, per_sample_loss

__all__ = [
    "EvalReport",
    "GapReport",
    "accuracy",
    "compute_ua",
    "compute_mia",
    "mia_threshold",
    "avg_gap",
    "class_entropy",
    "evaluate",
    "CSV_HEADER",
    "format_csv_row",
]

CSV_HEADER = "method,set_kind,ua,mia,ra,ta,avg_gap"


@dataclass
class EvalReport:
    ua: float
    mia: float
    ra: float
    ta: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.ua, self.mia, self.ra, self.ta)


@dataclass
class GapReport:
    ua: float
    mia: float
    ra: float
    ta: float
    avg_gap: float


def _xy(batch) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(batch, Dataset):
        return batch.X, batch.y
    X, y = batch
    return np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64)


def accuracy(theta: ModelParams, X, y) -> float:
    """Percent of argmax predictions matching y; argmax ties go to the lowest class."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyBatch("cannot score an empty batch")
    preds = np.argmax(forward(theta, X), axis=1)
    return 100.0 * float(np.mean(preds == y))


def compute_ua(theta_u: ModelParams, forget_X, forget_y) -> float:
    """100 minus forget-set accuracy."""
    return 100.0 - accuracy(theta_u, forget_X, forget_y)


def mia_threshold(member_losses, nonmember_losses) -> float:
    """Loss threshold maximizing balanced accuracy; smallest maximizer wins.

    A sample is called a member when its loss is strictly below the
    threshold. Candidate thresholds are every distinct calibration loss
    plus +inf (call everything a member); any other threshold splits
    the calibration losses identically to one of these.
    """
    member = np.asarray(member_losses, dtype=np.float64)
    non = np.asarray(nonmember_losses, dtype=np.float64)
    if member.size == 0 or non.size == 0:
        raise EmptyBatch("membership calibration needs both member and non-member losses")
    candidates = np.unique(np.concatenate((member, non, [np.inf])))
    tpr = np.array([(member < t).mean() for t in candidates])
    tnr = np.array([(non >= t).mean() for t in candidates])
    balanced = 0.5 * (tpr + tnr)
    return float(candidates[int(np.argmax(balanced))])


def compute_mia(theta_u: ModelParams, forget, retain, test) -> float:
    """Percent of forget samples flagged non-member by the calibrated attack."""
    fx, fy = _xy(forget)
    rx, ry = _xy(retain)
    tx, ty = _xy(test)
    if fx.shape[0] == 0 or rx.shape[0] == 0 or tx.shape[0] == 0:
        raise EmptyBatch("MIA needs non-empty forget, retain, and test sets")
    threshold = mia_threshold(
        per_sample_loss(theta_u, rx, ry), per_sample_loss(theta_u, tx, ty)
    )
    forget_losses = per_sample_loss(theta_u, fx, fy)
    return 100.0 * float(np.mean(forget_losses >= threshold))


def avg_gap(report: EvalReport, reference: EvalReport) -> GapReport:
    """Absolute per-metric gaps against a reference report, and their mean."""
    gaps = [abs(a - b) for a, b in zip(report.as_tuple(), reference.as_tuple())]
    return GapReport(*gaps, avg_gap=float(np.mean(gaps)))


def class_entropy(theta: ModelParams, dataset: Dataset) -> np.ndarray:
    """Mean Shannon entropy (nats) of the softmax output per ground-truth class."""
    from . import kernels

    probs = np.asarray(kernels.softmax_rows(forward(theta, dataset.X)))
    logp = np.log(np.where(probs > 0.0, probs, 1.0))  # p log p -> 0 as p -> 0
    ent = -np.sum(probs * logp, axis=1)
    sums = np.bincount(dataset.y, weights=ent, minlength=dataset.classes)
    counts = np.bincount(dataset.y, minlength=dataset.classes)
    out = np.full(dataset.classes, np.nan)
    present = counts > 0
    out[present] = sums[present] / counts[present]
    return out


def evaluate(
    theta_u: ModelParams,
    train_ds: Dataset,
    test_ds: Dataset,
    forget_idx,
    retain_idx,
) -> EvalReport:
    """Full report for one unlearned model against one forget/retain split."""
    forget_idx = np.asarray(forget_idx, dtype=np.int64)
    retain_idx = np.asarray(retain_idx, dtype=np.int64)
    fx, fy = train_ds.X[forget_idx], train_ds.y[forget_idx]
    rx, ry = train_ds.X[retain_idx], train_ds.y[retain_idx]
    return EvalReport(
        ua=compute_ua(theta_u, fx, fy),
        mia=compute_mia(theta_u, (fx, fy), (rx, ry), (test_ds.X, test_ds.y)),
        ra=accuracy(theta_u, rx, ry),
        ta=accuracy(theta_u, test_ds.X, test_ds.y),
    )


def format_csv_row(method: str, set_kind: str, report: EvalReport, gap: GapReport | None) -> str:
    gap_cell = f"{gap.avg_gap:.2f}" if gap is not None else ""
    return (
        f"{method},{set_kind},{report.ua:.2f},{report.mia:.2f},"
        f"{report.ra:.2f},{report.ta:.2f},{gap_cell}"
    )
