"""Hierarchical adaptive locally-affine match filtering.

Pipeline: select well-spread confident seed matches by score NMS, gather a
neighborhood of compatible correspondences around each seed, then verify
each neighborhood with a deterministic fixed-budget RANSAC over centered
2x2 affine models, marking inliers by statistical significance against a
uniform-outlier null model instead of a fixed pixel threshold.

All stages are pure functions of immutable inputs. Seed verification is an
independent work item per seed; results are identical for any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .core import (
    AdalamParams,
    AffineModel,
    FilterResult,
    ImageSize,
    KeypointSet,
    MatchSet,
    Neighborhood,
    Seed,
    SeedReport,
    wrap_angle,
)

_DEGEN_REL = 1e-9      # minimal-sample degeneracy: |det| vs max source norm^2
_SCATTER_REL = 1e-12   # least-squares scatter rank test: det vs trace^2


@dataclass(frozen=True)
class IterationOutcome:
    """Best verification iteration of one seed."""

    iteration_index: int
    model: AffineModel
    inlier_member_indices: np.ndarray  # indices into the neighborhood member list
    confidence_of_worst_inlier: float


def compute_radius(size: ImageSize, area_ratio: float) -> float:
    """Suppression radius R with R^2 * pi * area_ratio = image area."""
    if area_ratio <= 0:
        raise ValueError("compute_radius: area_ratio must be > 0")
    return math.sqrt(size.area / (math.pi * area_ratio))


def select_seeds(matches: MatchSet, k1: KeypointSet, r1: float) -> np.ndarray:
    """Non-maximum suppression of matches by confidence over image-1 positions.

    A match survives iff no other match within radius r1 (inclusive) has
    strictly higher confidence 1 - ratio, with score ties won by the lower
    match index. Returns the surviving match indices, sorted ascending.
    """
    if r1 <= 0:
        raise ValueError("select_seeds: r1 must be > 0")
    m = len(matches)
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    pos = k1.xy[matches.idx1]
    conf = 1.0 - matches.ratio
    pairs = cKDTree(pos).query_pairs(r1, output_type="ndarray")
    suppressed = np.zeros(m, dtype=bool)
    if pairs.size:
        i, j = pairs[:, 0], pairs[:, 1]   # i < j
        ci, cj = conf[i], conf[j]
        suppressed[j[ci >= cj]] = True
        suppressed[i[cj > ci]] = True
    return np.nonzero(~suppressed)[0].astype(np.int64)


def _member_mask(cand, x1, x2, alpha_t, logsig_t, seed_idx, lam_r1, lam_r2, params):
    """Boolean mask over cand for neighborhood membership around seed_idx."""
    d1 = x1[cand] - x1[seed_idx]
    d2 = x2[cand] - x2[seed_idx]
    ok = (np.einsum("ij,ij->i", d1, d1) <= lam_r1 * lam_r1) & (
        np.einsum("ij,ij->i", d2, d2) <= lam_r2 * lam_r2
    )
    if params.use_side_info:
        da = np.abs(wrap_angle(alpha_t[seed_idx] - alpha_t[cand]))
        ds = np.abs(logsig_t[seed_idx] - logsig_t[cand])
        ok &= (da <= params.t_alpha) & (ds <= params.t_sigma)
    return ok


def _transform_arrays(matches: MatchSet, k1: KeypointSet, k2: KeypointSet):
    """Per-match positions and induced similarity transform components."""
    x1 = k1.xy[matches.idx1]
    x2 = k2.xy[matches.idx2]
    alpha_t = wrap_angle(k2.alpha[matches.idx2] - k1.alpha[matches.idx1])
    logsig_t = np.log(k2.sigma[matches.idx2]) - np.log(k1.sigma[matches.idx1])
    return x1, x2, alpha_t, logsig_t


def _build_neighborhood(seed, matches, x1, x2, cand_members):
    """Assemble a Neighborhood from already-filtered member match indices."""
    order = np.lexsort((cand_members, matches.ratio[cand_members]))
    members = cand_members[order]
    si = seed.match_index
    return Neighborhood(
        seed=seed,
        members=members,
        centered1=x1[members] - x1[si],
        centered2=x2[members] - x2[si],
    )


def assemble_neighborhood(
    seed: Seed,
    matches: MatchSet,
    k1: KeypointSet,
    k2: KeypointSet,
    params: AdalamParams,
) -> Neighborhood:
    """Collect the matches compatible with a seed correspondence.

    A match joins the neighborhood when it lies within lam * r1 of the seed
    in image 1 and lam * r2 in image 2, and (unless side information is
    disabled) when its induced orientation offset and log scale ratio agree
    with the seed's within t_alpha and t_sigma. Members come out sorted by
    ratio ascending, ties by match index; the seed is always a member.
    """
    si = int(seed.match_index)
    if not (0 <= si < len(matches)):
        raise ValueError("assemble_neighborhood: seed match index out of range")
    x1, x2, alpha_t, logsig_t = _transform_arrays(matches, k1, k2)
    cand = np.arange(len(matches), dtype=np.int64)
    ok = _member_mask(
        cand, x1, x2, alpha_t, logsig_t, si,
        params.lam * seed.r1, params.lam * seed.r2, params,
    )
    ok[si] = True
    return _build_neighborhood(seed, matches, x1, x2, cand[ok])


def fit_affine_minimal(u_p, v_p, u_q, v_q) -> Optional[AffineModel]:
    """Fit the 2x2 map sending u_p -> v_p and u_q -> v_q.

    Points are seed-centered. Returns None when the source points are
    (nearly) collinear with the origin and no unique model exists.
    """
    u_p = np.asarray(u_p, dtype=np.float64)
    u_q = np.asarray(u_q, dtype=np.float64)
    v_p = np.asarray(v_p, dtype=np.float64)
    v_q = np.asarray(v_q, dtype=np.float64)
    det = u_p[0] * u_q[1] - u_p[1] * u_q[0]
    lim = _DEGEN_REL * max(u_p @ u_p, u_q @ u_q)
    if abs(det) < lim or det == 0.0:
        return None
    # A = [v_p v_q] [u_p u_q]^-1 in column form.
    inv = np.array([[u_q[1], -u_q[0]], [-u_p[1], u_p[0]]]) / det
    a = np.column_stack([v_p, v_q]) @ inv
    return AffineModel.from_matrix(a)


def fit_affine_lsq(u, v) -> Optional[AffineModel]:
    """Least-squares 2x2 map minimizing sum ||A u_k - v_k||^2.

    Solved through the 2x2 normal equations of the source scatter matrix.
    Returns None when the scatter matrix is rank deficient.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 2 or u.shape[1] != 2 or u.shape != v.shape or u.shape[0] < 2:
        raise ValueError("fit_affine_lsq: need matching (m, 2) arrays with m >= 2")
    sxx = float(u[:, 0] @ u[:, 0])
    sxy = float(u[:, 0] @ u[:, 1])
    syy = float(u[:, 1] @ u[:, 1])
    det = sxx * syy - sxy * sxy
    if det <= _SCATTER_REL * (sxx + syy) ** 2:
        return None
    b = v.T @ u  # 2x2, rows are target coords
    inv = np.array([[syy, -sxy], [-sxy, sxx]]) / det
    return AffineModel.from_matrix(b @ inv)


def residuals(model: AffineModel, neighborhood: Neighborhood) -> np.ndarray:
    """Per-member reprojection residual ||A u_k - v_k|| in pixels."""
    a = model.as_matrix()
    pred = neighborhood.centered1 @ a.T
    diff = pred - neighborhood.centered2
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def confidences(resid, r2: float, eps_residual: float = 1e-6):
    """Rank members by residual and score each against the uniform null.

    Returns (order, conf): member indices sorted by residual ascending
    (stable, ties by index) and, per rank k, the ratio between the observed
    inlier count k+1 and the count expected from uniformly scattered
    outliers within radius r2 at the same residual. Residuals are clamped
    below at eps_residual * r2 before squaring.
    """
    if r2 <= 0:
        raise ValueError("confidences: r2 must be > 0")
    resid = np.asarray(resid, dtype=np.float64)
    m = resid.shape[0]
    order = np.argsort(resid, kind="stable")
    rs = np.maximum(resid[order], eps_residual * r2)
    conf = (np.arange(1, m + 1) * r2 * r2) / (m * rs * rs)
    return order, conf


def select_inliers(order, conf, resid, t_c: float, fixed_threshold=None) -> np.ndarray:
    """Pick the inlier prefix of the residual-sorted member order.

    Adaptive mode: the prefix runs through the largest rank whose confidence
    reaches t_c (empty when none qualifies). Fixed mode: all members with
    residual <= fixed_threshold. Returns member indices in rank order.
    """
    order = np.asarray(order)
    conf = np.asarray(conf, dtype=np.float64)
    resid = np.asarray(resid, dtype=np.float64)
    if fixed_threshold is not None:
        count = int(np.searchsorted(resid[order], fixed_threshold, side="right"))
    else:
        qual = np.nonzero(conf >= t_c)[0]
        count = int(qual[-1]) + 1 if qual.size else 0
    return order[:count]


def _prosac_pairs(u, budget):
    """First `budget` non-degenerate minimal samples in deterministic order.

    Members are assumed sorted by confidence descending (ratio ascending).
    Pairs are enumerated as (i, n) for n = 1, 2, ... and i = 0 .. n-1, so
    the most confident samples are explored first. Degenerate pairs are
    skipped without consuming budget. Returns (p_idx, q_idx) arrays.
    """
    m = u.shape[0]
    norms2 = np.einsum("ij,ij->i", u, u)
    keep_i = []
    keep_j = []
    got = 0
    n_lo = 1
    while n_lo < m and got < budget:
        # Candidate block: enough n values to likely cover the deficit.
        need = budget - got
        n_hi = n_lo
        total = 0
        while n_hi < m and total < 2 * need + 8:
            total += n_hi
            n_hi += 1
        ns = np.arange(n_lo, n_hi)
        j = np.repeat(ns, ns)
        offsets = np.concatenate([[0], np.cumsum(ns)[:-1]])
        i = np.arange(j.shape[0]) - np.repeat(offsets, ns)
        det = u[i, 0] * u[j, 1] - u[i, 1] * u[j, 0]
        lim = _DEGEN_REL * np.maximum(norms2[i], norms2[j])
        ok = (np.abs(det) >= lim) & (det != 0.0)
        ki, kj = i[ok], j[ok]
        if ki.shape[0] > need:
            ki, kj = ki[:need], kj[:need]
        keep_i.append(ki)
        keep_j.append(kj)
        got += ki.shape[0]
        n_lo = n_hi
    if not keep_i:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(keep_i), np.concatenate(keep_j)


def _score_models(a, u, v, r2, eps_residual):
    """Residual-rank and confidence tables for a batch of models.

    a: (t, 2, 2) models; returns (resid (t, m), order (t, m), conf (t, m)).
    """
    pred = np.einsum("tab,mb->tma", a, u)
    diff = pred - v[None, :, :]
    resid = np.sqrt(np.einsum("tmi,tmi->tm", diff, diff))
    order = np.argsort(resid, axis=1, kind="stable")
    rs = np.maximum(np.take_along_axis(resid, order, axis=1), eps_residual * r2)
    m = u.shape[0]
    conf = (np.arange(1, m + 1)[None, :] * r2 * r2) / (m * rs * rs)
    return resid, order, conf


def _counts_from_scores(order, conf, resid, t_c, fixed_threshold):
    """Per-iteration inlier prefix lengths."""
    if fixed_threshold is not None:
        rs = np.take_along_axis(resid, order, axis=1)
        return (rs <= fixed_threshold).sum(axis=1)
    qual = conf >= t_c
    has = qual.any(axis=1)
    m = conf.shape[1]
    last = m - np.argmax(qual[:, ::-1], axis=1)
    return np.where(has, last, 0)


def _refit_models(a, u, v, order, counts):
    """One least-squares refit per iteration on its current inlier prefix.

    Iterations whose inlier scatter is rank deficient (or with fewer than
    two inliers) keep their minimal-sample model. Returns the new model
    batch and a mask of the iterations actually refit.
    """
    t, m = order.shape
    mask_sorted = np.arange(m)[None, :] < counts[:, None]
    mask = np.zeros((t, m))
    np.put_along_axis(mask, order, mask_sorted.astype(np.float64), axis=1)
    prods = np.empty((m, 7))
    prods[:, 0] = u[:, 0] * u[:, 0]
    prods[:, 1] = u[:, 0] * u[:, 1]
    prods[:, 2] = u[:, 1] * u[:, 1]
    prods[:, 3] = v[:, 0] * u[:, 0]
    prods[:, 4] = v[:, 0] * u[:, 1]
    prods[:, 5] = v[:, 1] * u[:, 0]
    prods[:, 6] = v[:, 1] * u[:, 1]
    s = mask @ prods
    sxx, sxy, syy = s[:, 0], s[:, 1], s[:, 2]
    det = sxx * syy - sxy * sxy
    ok = (counts >= 2) & (det > _SCATTER_REL * (sxx + syy) ** 2)
    if not ok.any():
        return a, ok
    d = det[ok]
    new = np.empty((int(ok.sum()), 2, 2))
    new[:, 0, 0] = (s[ok, 3] * syy[ok] - s[ok, 4] * sxy[ok]) / d
    new[:, 0, 1] = (s[ok, 4] * sxx[ok] - s[ok, 3] * sxy[ok]) / d
    new[:, 1, 0] = (s[ok, 5] * syy[ok] - s[ok, 6] * sxy[ok]) / d
    new[:, 1, 1] = (s[ok, 6] * sxx[ok] - s[ok, 5] * sxy[ok]) / d
    a = a.copy()
    a[ok] = new
    return a, ok


def _verify(neighborhood: Neighborhood, params: AdalamParams):
    """Run the deterministic verification on one neighborhood.

    Returns (outcome, best_iteration, best_count); outcome is None when the
    seed is rejected. best_iteration is -1 when no minimal sample existed.
    """
    u = neighborhood.centered1
    v = neighborhood.centered2
    m = u.shape[0]
    if m < 2:
        return None, -1, 0
    p_idx, q_idx = _prosac_pairs(u, params.iterations)
    t = p_idx.shape[0]
    if t == 0:
        return None, -1, 0
    det = u[p_idx, 0] * u[q_idx, 1] - u[p_idx, 1] * u[q_idx, 0]
    a = np.empty((t, 2, 2))
    # A = [v_p v_q] [u_p u_q]^-1, expanded componentwise.
    a[:, 0, 0] = (v[p_idx, 0] * u[q_idx, 1] - v[q_idx, 0] * u[p_idx, 1]) / det
    a[:, 0, 1] = (v[q_idx, 0] * u[p_idx, 0] - v[p_idx, 0] * u[q_idx, 0]) / det
    a[:, 1, 0] = (v[p_idx, 1] * u[q_idx, 1] - v[q_idx, 1] * u[p_idx, 1]) / det
    a[:, 1, 1] = (v[q_idx, 1] * u[p_idx, 0] - v[p_idx, 1] * u[q_idx, 0]) / det

    r2 = neighborhood.seed.r2
    resid, order, conf = _score_models(a, u, v, r2, params.eps_residual)
    counts = _counts_from_scores(order, conf, resid, params.t_c, params.fixed_threshold)

    if params.use_refit:
        a2, refit_mask = _refit_models(a, u, v, order, counts)
        if refit_mask.any():
            r_r, o_r, c_r = _score_models(a2[refit_mask], u, v, r2, params.eps_residual)
            n_r = _counts_from_scores(o_r, c_r, r_r, params.t_c, params.fixed_threshold)
            a[refit_mask] = a2[refit_mask]
            resid[refit_mask] = r_r
            order[refit_mask] = o_r
            conf[refit_mask] = c_r
            counts = counts.copy()
            counts[refit_mask] = n_r

    best = int(np.argmax(counts))
    best_count = int(counts[best])
    if best_count < params.t_n:
        return None, best, best_count
    inliers = order[best, :best_count]
    worst_conf = float(conf[best, best_count - 1])
    outcome = IterationOutcome(
        iteration_index=best,
        model=AffineModel.from_matrix(a[best]),
        inlier_member_indices=np.sort(inliers).astype(np.int64),
        confidence_of_worst_inlier=worst_conf,
    )
    return outcome, best, best_count


def verify_seed(neighborhood: Neighborhood, params: AdalamParams) -> Optional[IterationOutcome]:
    """Verify one neighborhood; None means the seed is rejected.

    Minimal samples are drawn in a deterministic confidence-first order over
    the ratio-sorted members, up to params.iterations non-degenerate pairs.
    Each sample is scored by its adaptive inlier prefix, optionally refit
    once by least squares on the inliers, and the iteration with the highest
    final inlier count wins (ties to the earlier iteration). Seeds are
    rejected below t_n final inliers or with fewer than two members.
    """
    outcome, _, _ = _verify(neighborhood, params)
    return outcome


def adalam_filter(
    k1: KeypointSet,
    k2: KeypointSet,
    size1: ImageSize,
    size2: ImageSize,
    matches: MatchSet,
    params: Optional[AdalamParams] = None,
    n_workers: int = 1,
) -> FilterResult:
    """Filter putative matches by hierarchical adaptive affine verification.

    Returns the sorted union of the inliers of all accepted seeds, plus one
    diagnostic record per seed. Deterministic for any n_workers.
    """
    if params is None:
        params = AdalamParams()
    if len(matches) == 0:
        return FilterResult(np.zeros(0, dtype=np.int64), ())
    if np.any(matches.idx1 >= len(k1)) or np.any(matches.idx2 >= len(k2)):
        raise ValueError("adalam_filter: match indices out of keypoint range")

    r1 = compute_radius(size1, params.area_ratio)
    r2 = compute_radius(size2, params.area_ratio)
    seed_indices = select_seeds(matches, k1, r1)

    x1, x2, alpha_t, logsig_t = _transform_arrays(matches, k1, k2)
    tree1 = cKDTree(x1)
    lam_r1 = params.lam * r1
    lam_r2 = params.lam * r2

    def run_seed(si: int):
        cand = np.asarray(
            tree1.query_ball_point(x1[si], lam_r1), dtype=np.int64
        )
        ok = _member_mask(cand, x1, x2, alpha_t, logsig_t, si, lam_r1, lam_r2, params)
        ok[cand == si] = True
        seed = Seed(match_index=int(si), r1=r1, r2=r2)
        nb = _build_neighborhood(seed, matches, x1, x2, cand[ok])
        outcome, best_it, best_count = _verify(nb, params)
        report = SeedReport(
            seed_match_index=int(si),
            best_iteration=best_it,
            best_inlier_count=best_count,
            accepted=outcome is not None,
        )
        inliers = (
            nb.members[outcome.inlier_member_indices]
            if outcome is not None
            else np.zeros(0, dtype=np.int64)
        )
        return report, inliers

    if n_workers > 1 and seed_indices.size > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run_seed, seed_indices))
    else:
        results = [run_seed(si) for si in seed_indices]

    reports = tuple(rep for rep, _ in results)
    if results:
        union = np.unique(np.concatenate([inl for _, inl in results]))
    else:
        union = np.zeros(0, dtype=np.int64)
    return FilterResult(selected=union.astype(np.int64), seed_reports=reports)
