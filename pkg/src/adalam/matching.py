"""Nearest-neighbor descriptor matching and the simple baseline filters.

Search is exact brute force over Euclidean distances. Candidate screening
runs in float32 for speed; the final top-2 decision is refined in float64,
with distance ties broken by the smaller second-image index.
"""
from __future__ import annotations

import numpy as np

from .core import KeypointSet, MatchSet

_CHUNK = 1024


def _check_pair(k1: KeypointSet, k2: KeypointSet):
    if k1.dim != k2.dim:
        raise ValueError(
            f"descriptor dimension mismatch: {k1.dim} vs {k2.dim}"
        )


def nn_match(k1: KeypointSet, k2: KeypointSet) -> MatchSet:
    """Match every keypoint of k1 to its nearest neighbor in k2.

    Returns one match per k1 keypoint with the nearest descriptor distance
    and the ratio to the second-nearest distance (1 when they coincide).
    """
    _check_pair(k1, k2)
    if len(k2) < 2:
        raise ValueError("nn_match: need at least 2 keypoints in the second set")
    n1, n2 = len(k1), len(k2)
    d1 = k1.desc
    d2 = k2.desc
    sq2 = np.einsum("ij,ij->i", d2, d2)

    idx2 = np.empty(n1, dtype=np.int64)
    dist = np.empty(n1, dtype=np.float64)
    ratio = np.empty(n1, dtype=np.float64)
    ncand = min(3, n2)

    for lo in range(0, n1, _CHUNK):
        hi = min(lo + _CHUNK, n1)
        block = d1[lo:hi]
        gram = block @ d2.T                       # (b, n2) float64
        sq1 = np.einsum("ij,ij->i", block, block)
        # Screen candidates on similarity in float32: maximizing
        # gram - sq2/2 minimizes the squared distance.
        score = (gram - 0.5 * sq2).astype(np.float32)
        rows = np.arange(hi - lo)
        cand = np.empty((hi - lo, ncand), dtype=np.int64)
        for c in range(ncand):
            cand[:, c] = score.argmax(axis=1)
            score[rows, cand[:, c]] = -np.inf
        # Exact squared distances of the candidates, from the f64 gram.
        d2cand = sq1[:, None] + sq2[cand] - 2.0 * gram[rows[:, None], cand]
        np.maximum(d2cand, 0.0, out=d2cand)
        # Candidates with equal score come out in increasing index order,
        # so a stable sort on distance preserves the index tie-break.
        order = np.argsort(d2cand, axis=1, kind="stable")
        best = np.take_along_axis(cand, order, axis=1)
        dbest = np.sqrt(np.take_along_axis(d2cand, order, axis=1))
        idx2[lo:hi] = best[:, 0]
        dist[lo:hi] = dbest[:, 0]
        second = dbest[:, 1]
        r = np.where(second > 0.0, dbest[:, 0] / np.where(second > 0, second, 1.0), 1.0)
        ratio[lo:hi] = np.clip(r, 0.0, 1.0)

    return MatchSet(np.arange(n1, dtype=np.int64), idx2, dist, ratio)


def ratio_test_filter(matches: MatchSet, threshold: float) -> MatchSet:
    """Keep matches with ratio <= threshold, preserving input order."""
    if not (0.0 < threshold <= 1.0):
        raise ValueError("ratio_test_filter: threshold must lie in (0, 1]")
    return matches.take(matches.ratio <= threshold)


def mutual_nn_filter(k1: KeypointSet, k2: KeypointSet, matches: MatchSet) -> MatchSet:
    """Keep match (i -> j) iff i is also the nearest neighbor of j in k1.

    Expects matches produced by nn_match(k1, k2). Ties in the reverse
    search are broken by the smaller k1 index.
    """
    _check_pair(k1, k2)
    if len(matches) == 0:
        return matches
    d1 = k1.desc
    d2 = k2.desc
    sq1 = np.einsum("ij,ij->i", d1, d1)
    nn21 = np.empty(len(k2), dtype=np.int64)
    for lo in range(0, len(k2), _CHUNK):
        hi = min(lo + _CHUNK, len(k2))
        score = d2[lo:hi] @ d1.T - 0.5 * sq1
        nn21[lo:hi] = score.argmax(axis=1)
    keep = nn21[matches.idx2] == matches.idx1
    return matches.take(keep)
