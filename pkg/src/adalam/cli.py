"""Command-line pipeline: synth -> match -> filter -> eval, plus bench.

Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
standard error; data goes to files or standard output only.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .core import AdalamParams, ImageSize, MatchSet
from .fileio import (
    ParseError,
    _atomic_write,
    read_errors,
    read_keypoints,
    read_matches,
    write_keypoints,
    write_matches,
)
from .filtering import adalam_filter
from .matching import mutual_nn_filter, nn_match, ratio_test_filter
from .metrics import exact_auc, hist_auc, map_at, match_prf
from .synth import SynthConfig, generate_scene

_DEFAULTS = AdalamParams()


def _add_adalam_flags(p: argparse.ArgumentParser):
    p.add_argument("--area-ratio", type=float, default=_DEFAULTS.area_ratio,
                   help="image area / suppression circle area")
    p.add_argument("--lambda", dest="lam", type=float, default=_DEFAULTS.lam,
                   help="neighborhood radius expansion factor")
    p.add_argument("--iterations", type=int, default=_DEFAULTS.iterations,
                   help="verification iterations per seed")
    p.add_argument("--t-alpha", type=float, default=_DEFAULTS.t_alpha,
                   help="orientation agreement threshold in radians")
    p.add_argument("--t-sigma", type=float, default=_DEFAULTS.t_sigma,
                   help="log scale-ratio agreement threshold")
    p.add_argument("--t-c", type=float, default=_DEFAULTS.t_c,
                   help="adaptive confidence threshold")
    p.add_argument("--t-n", type=int, default=_DEFAULTS.t_n,
                   help="minimum inliers for an accepted seed")
    p.add_argument("--no-side-info", action="store_true",
                   help="disable orientation/scale neighborhood filtering")
    p.add_argument("--no-refit", action="store_true",
                   help="disable the least-squares refit on inliers")
    p.add_argument("--fixed-threshold", type=float, default=_DEFAULTS.fixed_threshold,
                   help="fixed residual threshold in pixels, replaces the "
                        "adaptive confidence test")
    p.add_argument("--eps-residual", type=float, default=_DEFAULTS.eps_residual,
                   help="residual clamp fraction of the image-2 radius")
    p.add_argument("--workers", type=int, default=1,
                   help="seed verification worker threads")


def _params_from_args(args) -> AdalamParams:
    return AdalamParams(
        area_ratio=args.area_ratio,
        lam=args.lam,
        iterations=args.iterations,
        t_alpha=args.t_alpha,
        t_sigma=args.t_sigma,
        t_c=args.t_c,
        t_n=args.t_n,
        use_side_info=not args.no_side_info,
        use_refit=not args.no_refit,
        fixed_threshold=args.fixed_threshold,
        eps_residual=args.eps_residual,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adalam",
        description="Locally-affine outlier filtering for feature matches.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled scene")
    p.add_argument("--width1", type=int, default=1000)
    p.add_argument("--height1", type=int, default=1000)
    p.add_argument("--width2", type=int, default=1000)
    p.add_argument("--height2", type=int, default=1000)
    p.add_argument("--patches", type=int, default=5)
    p.add_argument("--keypoints-per-patch", type=int, default=20)
    p.add_argument("--outliers", type=int, default=233)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--descriptor-dim", type=int, default=32)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--no-frame-consistent", action="store_true")
    p.add_argument("--patch-rotation", type=float, default=None,
                   help="fix every patch affine rotation angle (radians)")
    p.add_argument("--out-keypoints1", required=True)
    p.add_argument("--out-keypoints2", required=True)
    p.add_argument("--out-matches", required=True)

    p = sub.add_parser("match", help="brute-force nearest-neighbor matching")
    p.add_argument("--keypoints1", required=True)
    p.add_argument("--keypoints2", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("filter", help="filter a match file")
    p.add_argument("--keypoints1", required=True)
    p.add_argument("--keypoints2", required=True)
    p.add_argument("--matches", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=["adalam", "ratio", "mutual"],
                   default="adalam")
    p.add_argument("--ratio-threshold", type=float, default=0.8,
                   help="threshold for --method ratio")
    p.add_argument("--report", default=None,
                   help="write per-seed diagnostics here (adalam only)")
    _add_adalam_flags(p)

    p = sub.add_parser("eval", help="score matches or pose-error lists")
    p.add_argument("--selected", help="filtered match file")
    p.add_argument("--matches", help="match file with ground-truth column")
    p.add_argument("--errors", help="pose-error list, one value per line")
    p.add_argument("--auc", default=None, help="comma-separated thresholds")
    p.add_argument("--hist-auc", default=None, help="comma-separated thresholds")
    p.add_argument("--map", default=None, help="comma-separated thresholds")
    p.add_argument("--bin-width", type=float, default=5.0)

    p = sub.add_parser("bench", help="F1/wall-time sweep on synthetic scenes")
    p.add_argument("--scenes", type=int, default=5)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--patches", type=int, default=5)
    p.add_argument("--keypoints-per-patch", type=int, default=20)
    p.add_argument("--outliers", type=int, default=233)
    p.add_argument("--noise-sigma", type=float, default=0.5)
    p.add_argument("--lam-threshold", type=float, default=1.0,
                   help="fixed residual threshold for the LAM variant")
    return parser


def _cmd_synth(args) -> int:
    config = SynthConfig(
        size1=ImageSize(args.width1, args.height1),
        size2=ImageSize(args.width2, args.height2),
        n_patches=args.patches,
        keypoints_per_patch=args.keypoints_per_patch,
        n_outliers=args.outliers,
        noise_sigma=args.noise_sigma,
        descriptor_dim=args.descriptor_dim,
        rng_seed=args.rng_seed,
        frame_consistent=not args.no_frame_consistent,
        patch_rotation=args.patch_rotation,
    )
    scene = generate_scene(config)
    write_keypoints(args.out_keypoints1, config.size1, scene.k1)
    write_keypoints(args.out_keypoints2, config.size2, scene.k2)
    write_matches(args.out_matches, scene.matches, gt=scene.gt_inlier)
    return 0


def _cmd_match(args) -> int:
    _, k1 = read_keypoints(args.keypoints1)
    _, k2 = read_keypoints(args.keypoints2)
    write_matches(args.out, nn_match(k1, k2))
    return 0


def _cmd_filter(args) -> int:
    size1, k1 = read_keypoints(args.keypoints1)
    size2, k2 = read_keypoints(args.keypoints2)
    matches, gt = read_matches(args.matches)
    if args.method == "ratio":
        kept = ratio_test_filter(matches, args.ratio_threshold)
        sel = np.nonzero(matches.ratio <= args.ratio_threshold)[0]
    elif args.method == "mutual":
        kept = mutual_nn_filter(k1, k2, matches)
        sel = np.nonzero(np.isin(matches.idx1, kept.idx1))[0]
    else:
        params = _params_from_args(args)
        result = adalam_filter(k1, k2, size1, size2, matches, params,
                               n_workers=args.workers)
        sel = result.selected
        kept = matches.take(sel)
        if args.report:
            lines = ["# seed_match_index best_iteration best_inliers accepted"]
            lines.extend(
                f"{r.seed_match_index} {r.best_iteration} "
                f"{r.best_inlier_count} {int(r.accepted)}"
                for r in result.seed_reports
            )
            _atomic_write(args.report, "\n".join(lines) + "\n")
    write_matches(args.out, kept, gt=gt[sel] if gt is not None else None)
    return 0


def _parse_thresholds(text: str):
    return [float(v) for v in text.split(",") if v.strip()]


def _cmd_eval(args) -> int:
    out = []
    if args.errors:
        errors = read_errors(args.errors)
        for t in _parse_thresholds(args.auc) if args.auc else []:
            out.append(f"auc{t:g}={exact_auc(errors, t):.9g}")
        for t in _parse_thresholds(args.hist_auc) if args.hist_auc else []:
            out.append(f"auc{t:g}*={hist_auc(errors, t, args.bin_width):.9g}")
        for t in _parse_thresholds(args.map) if args.map else []:
            out.append(f"map{t:g}={map_at(errors, t):.9g}")
    elif args.selected and args.matches:
        matches, gt = read_matches(args.matches)
        if gt is None:
            raise ValueError("eval: --matches file must carry a gt column")
        selected, _ = read_matches(args.selected)
        pairs = {(int(a), int(b)) for a, b in zip(selected.idx1, selected.idx2)}
        sel = np.array(
            [k for k in range(len(matches))
             if (int(matches.idx1[k]), int(matches.idx2[k])) in pairs],
            dtype=np.int64,
        )
        report = match_prf(sel, gt)
        out.append(report.lines().rstrip("\n"))
    else:
        raise ValueError("eval: need either --errors or --selected with --matches")
    sys.stdout.write("\n".join(out) + "\n")
    return 0


_BENCH_VARIANTS = (
    ("adalam", {}),
    ("no-side", {"use_side_info": False}),
    ("no-refit", {"use_refit": False}),
    ("lam", {"use_refit": False}),  # fixed threshold filled in per run
    ("ratio-test", None),
)


def _cmd_bench(args) -> int:
    size = ImageSize(1000, 1000)
    scenes = [
        generate_scene(SynthConfig(
            size1=size, size2=size,
            n_patches=args.patches,
            keypoints_per_patch=args.keypoints_per_patch,
            n_outliers=args.outliers,
            noise_sigma=args.noise_sigma,
            rng_seed=args.rng_seed + k,
        ))
        for k in range(args.scenes)
    ]
    sys.stdout.write(f"{'method':<12} {'mean_f1':>9} {'time_s':>9}\n")
    for name, overrides in _BENCH_VARIANTS:
        f1s = []
        start = time.perf_counter()
        for scene in scenes:
            if overrides is None:
                sel = np.nonzero(scene.matches.ratio <= 0.8)[0]
            else:
                kw = dict(overrides)
                if name == "lam":
                    kw["fixed_threshold"] = args.lam_threshold
                result = adalam_filter(
                    scene.k1, scene.k2, size, size, scene.matches,
                    AdalamParams(**kw),
                )
                sel = result.selected
            f1s.append(match_prf(sel, scene.gt_inlier).f1)
        elapsed = time.perf_counter() - start
        sys.stdout.write(f"{name:<12} {np.mean(f1s):>9.4f} {elapsed:>9.3f}\n")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    handlers = {
        "synth": _cmd_synth,
        "match": _cmd_match,
        "filter": _cmd_filter,
        "eval": _cmd_eval,
        "bench": _cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except (ParseError, OSError, ValueError) as exc:
        print(f"adalam {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
