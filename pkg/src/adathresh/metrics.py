"""Confusion counts, threshold metrics, and ROC/AUC over similarity samples."""

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InputContractError
from .similarity import SimilarityDistributions

TprDenominator = Literal["standard", "paper"]

# Margin added beyond the observed sample range when sweeping thresholds.
_SWEEP_MARGIN = 1e-6


@dataclass(frozen=True)
class ConfusionCounts:
    """TP/FP/FN/TN at one threshold; equality counts as a positive prediction."""

    tp: int
    fp: int
    fn: int
    tn: int
    threshold: float


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    tpr: float
    fpr: float
    counts: ConfusionCounts


@dataclass(frozen=True)
class RocCurve:
    """(fpr, tpr, threshold) points in descending-threshold order, plus AUC."""

    points: list[tuple[float, float, float]]
    auc: float


def _require_samples(dist: SimilarityDistributions) -> None:
    if dist.auto_samples.size == 0 or dist.cross_samples.size == 0:
        raise InputContractError("need at least one auto and one cross sample")


def confusion_at(dist: SimilarityDistributions, threshold: float) -> ConfusionCounts:
    """Count predictions at ``threshold``; samples equal to it predict positive."""
    _require_samples(dist)
    na = int(dist.auto_samples.size)
    nc = int(dist.cross_samples.size)
    tp = int(np.count_nonzero(dist.auto_samples >= threshold))
    fp = int(np.count_nonzero(dist.cross_samples >= threshold))
    return ConfusionCounts(tp=tp, fp=fp, fn=na - tp, tn=nc - fp, threshold=float(threshold))


def metrics_at(
    dist: SimilarityDistributions,
    threshold: float,
    epsilon: float = 1e-9,
    tpr_denominator: TprDenominator = "standard",
) -> MetricsReport:
    """Precision/recall/f1/accuracy plus ROC rates at one threshold.

    Precision and recall are exact ratios, defined as 0 when their denominator
    vanishes. The ROC rates keep ``epsilon`` in the denominator as a division
    guard. ``tpr_denominator="paper"`` switches TPR to tp/(tp+fp+eps), the
    literal reading of the source formula; the standard tp/(tp+fn+eps) is the
    default because the paper form degenerates the ROC into
    precision-vs-fallout.
    """
    if epsilon < 0.0:
        raise InputContractError("epsilon must be >= 0")
    if tpr_denominator not in ("standard", "paper"):
        raise InputContractError(f"unknown tpr_denominator {tpr_denominator!r}")
    c = confusion_at(dist, threshold)
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp > 0 else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn > 0 else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0.0
        else 0.0
    )
    accuracy = (c.tp + c.tn) / (c.tp + c.tn + c.fp + c.fn)
    if tpr_denominator == "paper":
        tpr_den = c.tp + c.fp + epsilon
    else:
        tpr_den = c.tp + c.fn + epsilon
    fpr_den = c.fp + c.tn + epsilon
    tpr = c.tp / tpr_den if tpr_den > 0.0 else 0.0
    fpr = c.fp / fpr_den if fpr_den > 0.0 else 0.0
    return MetricsReport(
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=accuracy,
        tpr=tpr,
        fpr=fpr,
        counts=c,
    )


def _trapezoid_auc(points) -> float:
    # stable sort keeps the along-curve order at equal fpr; zero-width
    # duplicates then contribute nothing, so the staircase integrates exactly
    ordered = sorted(points, key=lambda p: p[0])
    xs = [p[0] for p in ordered]
    ys = [p[1] for p in ordered]
    return float(min(1.0, max(0.0, np.trapezoid(ys, xs))))


def roc_sweep(
    dist: SimilarityDistributions,
    num_points: int,
    epsilon: float = 1e-9,
) -> RocCurve:
    """ROC curve over a threshold grid spanning the observed sample range.

    The sweep interval runs a hair beyond the extreme samples; its endpoints
    are the exact (0,0) and (1,1) anchors and ``num_points`` evenly spaced
    interior thresholds fill it. AUC is the trapezoidal area over the points
    sorted by FPR. Counting uses one sort plus binary search per threshold,
    which is exactly equivalent to a direct scan.
    """
    _require_samples(dist)
    if num_points < 2:
        raise InputContractError("num_points must be >= 2")
    samples = np.concatenate([dist.auto_samples, dist.cross_samples])
    lo = float(samples.min()) - _SWEEP_MARGIN
    hi = float(samples.max()) + _SWEEP_MARGIN
    full = np.linspace(hi, lo, num_points + 2)
    grid = full[1:-1]

    auto_sorted = np.sort(dist.auto_samples)
    cross_sorted = np.sort(dist.cross_samples)
    na, nc = auto_sorted.size, cross_sorted.size
    tp = na - np.searchsorted(auto_sorted, grid, side="left")
    fp = nc - np.searchsorted(cross_sorted, grid, side="left")
    fn = na - tp
    tn = nc - fp
    tpr = tp / (tp + fn + epsilon)
    fpr = fp / (fp + tn + epsilon)

    points: list[tuple[float, float, float]] = [(0.0, 0.0, float(full[0]))]
    points.extend(zip(fpr.tolist(), tpr.tolist(), grid.tolist()))
    points.append((1.0, 1.0, float(full[-1])))
    return RocCurve(points=points, auc=_trapezoid_auc(points))
