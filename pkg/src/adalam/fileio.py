"""Text file formats for keypoints and matches.

Both formats are one header line followed by one whitespace-separated
record per line, floats written with 9 significant digits. Keypoint rows
are `x y sigma alpha d0 ... d{dim-1}`; match rows are
`idx1 idx2 dist ratio [gt]`. Angles are wrapped into (-pi, pi] on write.
Files are written atomically: no partial output remains on failure.
"""
from __future__ import annotations

import os
import tempfile
from typing import Optional, Tuple

import numpy as np

from .core import ImageSize, KeypointSet, MatchSet, wrap_angle

KEYPOINT_MAGIC = "ADALAM-KP"
MATCH_MAGIC = "ADALAM-MT"
FORMAT_VERSION = "1"


class ParseError(ValueError):
    """Malformed input file; message names the file and line number."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _atomic_write(path, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_keypoints(path, size: ImageSize, kps: KeypointSet):
    rows = [f"{KEYPOINT_MAGIC} {FORMAT_VERSION} {len(kps)} {kps.dim} "
            f"{size.width} {size.height}"]
    alpha = wrap_angle(kps.alpha) if len(kps) else kps.alpha
    for k in range(len(kps)):
        fields = [
            _fmt(kps.xy[k, 0]), _fmt(kps.xy[k, 1]),
            _fmt(kps.sigma[k]), _fmt(alpha[k]),
        ]
        fields.extend(_fmt(v) for v in kps.desc[k])
        rows.append(" ".join(fields))
    _atomic_write(path, "\n".join(rows) + "\n")


def _read_lines(path):
    with open(path, "r") as fh:
        return fh.read().splitlines()


def read_keypoints(path) -> Tuple[ImageSize, KeypointSet]:
    lines = _read_lines(path)
    if not lines or not lines[0].strip():
        raise ParseError(path, 1, "missing header")
    head = lines[0].split()
    if len(head) != 6 or head[0] != KEYPOINT_MAGIC:
        raise ParseError(path, 1, f"expected header '{KEYPOINT_MAGIC} 1 count dim w h'")
    if head[1] != FORMAT_VERSION:
        raise ParseError(path, 1, f"unsupported version {head[1]!r}")
    try:
        count, dim, width, height = (int(v) for v in head[2:])
    except ValueError:
        raise ParseError(path, 1, "header fields must be integers") from None
    if count < 0 or dim < 1:
        raise ParseError(path, 1, "invalid count or descriptor dimension")
    size = ImageSize(width, height)

    data = np.empty((count, 4 + dim))
    body = [ln for ln in lines[1:]]
    row = 0
    for offset, ln in enumerate(body, start=2):
        if not ln.strip():
            continue
        if row >= count:
            raise ParseError(path, offset, f"more rows than declared count {count}")
        fields = ln.split()
        if len(fields) != 4 + dim:
            raise ParseError(path, offset, f"expected {4 + dim} fields, got {len(fields)}")
        try:
            data[row] = [float(v) for v in fields]
        except ValueError:
            raise ParseError(path, offset, "non-numeric field") from None
        if not np.all(np.isfinite(data[row])):
            raise ParseError(path, offset, "non-finite value")
        row += 1
    if row != count:
        raise ParseError(path, len(lines) + 1, f"expected {count} rows, found {row}")
    kps = KeypointSet(
        xy=data[:, 0:2], sigma=data[:, 2], alpha=data[:, 3], desc=data[:, 4:]
    )
    return size, kps


def write_matches(path, matches: MatchSet, gt: Optional[np.ndarray] = None):
    has_gt = gt is not None
    if has_gt:
        gt = np.asarray(gt, dtype=bool)
        if gt.shape != (len(matches),):
            raise ValueError("write_matches: gt length must equal match count")
    rows = [f"{MATCH_MAGIC} {FORMAT_VERSION} {len(matches)} {int(has_gt)}"]
    for k in range(len(matches)):
        fields = [
            str(matches.idx1[k]), str(matches.idx2[k]),
            _fmt(matches.dist[k]), _fmt(matches.ratio[k]),
        ]
        if has_gt:
            fields.append(str(int(gt[k])))
        rows.append(" ".join(fields))
    _atomic_write(path, "\n".join(rows) + "\n")


def read_matches(path) -> Tuple[MatchSet, Optional[np.ndarray]]:
    """Read a match file; index-vs-keypoint range checks happen downstream."""
    lines = _read_lines(path)
    if not lines or not lines[0].strip():
        raise ParseError(path, 1, "missing header")
    head = lines[0].split()
    if len(head) != 4 or head[0] != MATCH_MAGIC:
        raise ParseError(path, 1, f"expected header '{MATCH_MAGIC} 1 count has_gt'")
    if head[1] != FORMAT_VERSION:
        raise ParseError(path, 1, f"unsupported version {head[1]!r}")
    try:
        count = int(head[2])
        has_gt = int(head[3])
    except ValueError:
        raise ParseError(path, 1, "header fields must be integers") from None
    if count < 0 or has_gt not in (0, 1):
        raise ParseError(path, 1, "invalid count or gt flag")
    ncol = 4 + has_gt

    idx1 = np.empty(count, dtype=np.int64)
    idx2 = np.empty(count, dtype=np.int64)
    dist = np.empty(count)
    ratio = np.empty(count)
    gt = np.empty(count, dtype=bool) if has_gt else None
    row = 0
    for offset, ln in enumerate(lines[1:], start=2):
        if not ln.strip():
            continue
        if row >= count:
            raise ParseError(path, offset, f"more rows than declared count {count}")
        fields = ln.split()
        if len(fields) != ncol:
            raise ParseError(path, offset, f"expected {ncol} fields, got {len(fields)}")
        try:
            idx1[row] = int(fields[0])
            idx2[row] = int(fields[1])
            dist[row] = float(fields[2])
            ratio[row] = float(fields[3])
            if has_gt:
                flag = int(fields[4])
                if flag not in (0, 1):
                    raise ParseError(path, offset, "gt flag must be 0 or 1")
                gt[row] = bool(flag)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(path, offset, "malformed field") from None
        if not (np.isfinite(dist[row]) and np.isfinite(ratio[row])):
            raise ParseError(path, offset, "non-finite value")
        row += 1
    if row != count:
        raise ParseError(path, len(lines) + 1, f"expected {count} rows, found {row}")
    try:
        matches = MatchSet(idx1=idx1, idx2=idx2, dist=dist, ratio=ratio)
    except ValueError as exc:
        raise ParseError(path, 1, str(exc)) from None
    return matches, gt


def read_errors(path) -> np.ndarray:
    """Read a pose-error list: one value per line, 'inf' marks failure."""
    lines = _read_lines(path)
    vals = []
    for offset, ln in enumerate(lines, start=1):
        s = ln.strip()
        if not s:
            continue
        try:
            vals.append(float(s))
        except ValueError:
            raise ParseError(path, offset, "non-numeric error value") from None
    if not vals:
        raise ParseError(path, 1, "empty error list")
    return np.asarray(vals, dtype=np.float64)
