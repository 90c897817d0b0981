"""Evaluation metrics: match-level precision/recall/F1 and pose-error AUC.

Pose errors are consumed as precomputed lists of degrees, with failures
encoded as inf; no pose estimation happens here. recall(x) uses a closed
comparison: errors exactly at the threshold count as successes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EvalReport:
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    f1: float

    def lines(self) -> str:
        """Line-oriented key=value text block."""
        return "".join(
            f"{k}={v:.9g}\n" if isinstance(v, float) else f"{k}={v}\n"
            for k, v in (
                ("true_positives", self.true_positives),
                ("false_positives", self.false_positives),
                ("false_negatives", self.false_negatives),
                ("precision", self.precision),
                ("recall", self.recall),
                ("f1", self.f1),
            )
        )


def match_prf(selected, gt_inlier) -> EvalReport:
    """Precision/recall/F1 of a selected match-index set against labels."""
    gt = np.asarray(gt_inlier, dtype=bool)
    sel = np.asarray(selected, dtype=np.int64)
    if sel.size and (sel.min() < 0 or sel.max() >= gt.shape[0]):
        raise ValueError("match_prf: selected index out of range")
    mask = np.zeros(gt.shape[0], dtype=bool)
    mask[sel] = True
    tp = int(np.count_nonzero(mask & gt))
    fp = int(np.count_nonzero(mask & ~gt))
    fn = int(np.count_nonzero(~mask & gt))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalReport(tp, fp, fn, precision, recall, f1)


def _check_errors(errors) -> np.ndarray:
    e = np.asarray(errors, dtype=np.float64)
    if e.ndim != 1 or e.size == 0:
        raise ValueError("error list must be a nonempty 1-d array")
    if np.any(np.isnan(e)) or np.any(e < 0):
        raise ValueError("errors must be nonnegative (inf marks failure)")
    return e


def exact_auc(errors, threshold: float) -> float:
    """Mean recall over [0, threshold]: (1/t) * integral of recall(x) dx.

    recall(x) is the fraction of errors <= x; the integral has closed form
    as the average clipped margin (t - e)/t over all errors.
    """
    if threshold <= 0:
        raise ValueError("exact_auc: threshold must be > 0")
    e = _check_errors(errors)
    margin = np.clip(threshold - e, 0.0, threshold)
    return float(margin.mean() / threshold)


def hist_auc(errors, threshold: float, bin_width: float = 5.0) -> float:
    """Cumulative-histogram approximation of exact_auc with fixed-width bins.

    Averages recall at the right edge of each bin; threshold must be a
    positive multiple of bin_width.
    """
    if bin_width <= 0:
        raise ValueError("hist_auc: bin_width must be > 0")
    nbins = threshold / bin_width
    if threshold <= 0 or abs(nbins - round(nbins)) > 1e-9 * max(1.0, nbins):
        raise ValueError("hist_auc: threshold must be a positive multiple of bin_width")
    nbins = int(round(nbins))
    e = _check_errors(errors)
    edges = bin_width * np.arange(1, nbins + 1)
    recall = (e[None, :] <= edges[:, None]).mean(axis=1)
    return float(recall.mean())


def map_at(errors, threshold: float) -> float:
    """Fraction of errors at or below the threshold."""
    if threshold <= 0:
        raise ValueError("map_at: threshold must be > 0")
    e = _check_errors(errors)
    return float((e <= threshold).mean())
