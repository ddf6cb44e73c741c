"""Hot numeric kernels with numba-accelerated and pure-numpy paths.

Every kernel has a pure-numpy reference implementation (suffix ``_np``)
and a numba ``@njit`` loop implementation (suffix ``_nb``). The public
names dispatch to the numba path unless the environment variable
``IMGRAPH_NUMBA`` is set to ``0``/``false``/``off`` (or numba is not
importable), in which case the numpy path is used. Both paths compute
bit-identical results; ``benchmarks/kernel_bench.py`` compares their
speed.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "NUMBA_ENABLED",
    "rasterize_segments",
    "sample_segment_points",
    "pairwise_sqdist",
    "rasterize_segments_np",
    "sample_segment_points_np",
    "pairwise_sqdist_np",
]


def _numba_wanted() -> bool:
    return os.environ.get("IMGRAPH_NUMBA", "1").strip().lower() not in ("0", "false", "off")


# ---------------------------------------------------------------------------
# pure-numpy reference implementations
# ---------------------------------------------------------------------------

def rasterize_segments_np(image: np.ndarray, segments: np.ndarray, thickness: int = 1) -> None:
    """Draw line segments into a 2D float image (in place, value 1.0).

    segments: [E, 4] array of (r0, c0, r1, c1) endpoints in pixel
    coordinates. The center line steps along the major axis with
    round-half-up nearest-pixel interpolation; thickness stamps a square
    of the given side length around each center pixel.
    """
    h, w = image.shape
    off_lo = -(thickness - 1) // 2
    off_hi = thickness // 2
    for r0, c0, r1, c1 in np.asarray(segments, dtype=np.float64):
        n_steps = int(np.floor(max(abs(r1 - r0), abs(c1 - c0)) + 0.5))
        t = np.arange(n_steps + 1, dtype=np.float64) / max(n_steps, 1)
        rows = np.floor(r0 + t * (r1 - r0) + 0.5).astype(np.int64)
        cols = np.floor(c0 + t * (c1 - c0) + 0.5).astype(np.int64)
        for dr in range(off_lo, off_hi + 1):
            for dc in range(off_lo, off_hi + 1):
                rr = rows + dr
                cc = cols + dc
                keep = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
                image[rr[keep], cc[keep]] = 1.0


def sample_segment_points_np(starts: np.ndarray, ends: np.ndarray, n_points: int) -> np.ndarray:
    """Sample n_points uniformly by arc length along a set of segments.

    Points sit at arc positions (i + 0.5)/n of the total length, so the
    sampling is deterministic. Zero-length segments contribute nothing.
    Returns [n_points, d]; raises if the total length is zero.
    """
    starts = np.asarray(starts, dtype=np.float64)
    ends = np.asarray(ends, dtype=np.float64)
    lengths = np.sqrt(((ends - starts) ** 2).sum(axis=1))
    keep = lengths > 0.0
    starts, ends, lengths = starts[keep], ends[keep], lengths[keep]
    total = lengths.sum()
    if total <= 0.0:
        raise ValueError("cannot sample points: total segment length is zero")
    cum = np.cumsum(lengths)
    s = (np.arange(n_points, dtype=np.float64) + 0.5) / n_points * total
    idx = np.searchsorted(cum, s, side="left")
    idx = np.minimum(idx, len(lengths) - 1)
    prev = cum[idx] - lengths[idx]
    t = (s - prev) / lengths[idx]
    return starts[idx] + t[:, None] * (ends[idx] - starts[idx])


def pairwise_sqdist_np(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared euclidean distance matrix [len(a), len(b)]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    diff = a[:, None, :] - b[None, :, :]
    return (diff * diff).sum(axis=2)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

NUMBA_ENABLED = False
if _numba_wanted():
    try:
        from numba import njit

        @njit(cache=True)
        def _rasterize_segments_nb(image, segments, thickness):
            h, w = image.shape
            off_lo = -(thickness - 1) // 2
            off_hi = thickness // 2
            for e in range(segments.shape[0]):
                r0, c0, r1, c1 = segments[e, 0], segments[e, 1], segments[e, 2], segments[e, 3]
                span = max(abs(r1 - r0), abs(c1 - c0))
                n_steps = int(np.floor(span + 0.5))
                denom = n_steps if n_steps > 0 else 1
                for i in range(n_steps + 1):
                    t = i / denom
                    r = int(np.floor(r0 + t * (r1 - r0) + 0.5))
                    c = int(np.floor(c0 + t * (c1 - c0) + 0.5))
                    for dr in range(off_lo, off_hi + 1):
                        for dc in range(off_lo, off_hi + 1):
                            rr = r + dr
                            cc = c + dc
                            if 0 <= rr < h and 0 <= cc < w:
                                image[rr, cc] = 1.0

        @njit(cache=True)
        def _sample_segment_points_nb(starts, ends, lengths, total, n_points):
            n_seg, d = starts.shape
            out = np.empty((n_points, d), dtype=np.float64)
            cum_prev = 0.0
            seg = 0
            cum = cum_prev + lengths[0]
            for i in range(n_points):
                s = (i + 0.5) / n_points * total
                while s > cum and seg < n_seg - 1:
                    cum_prev = cum
                    seg += 1
                    cum += lengths[seg]
                t = (s - cum_prev) / lengths[seg]
                for k in range(d):
                    out[i, k] = starts[seg, k] + t * (ends[seg, k] - starts[seg, k])
            return out

        @njit(cache=True)
        def _pairwise_sqdist_nb(a, b):
            n, d = a.shape
            m = b.shape[0]
            out = np.empty((n, m), dtype=np.float64)
            for i in range(n):
                for j in range(m):
                    acc = 0.0
                    for k in range(d):
                        diff = a[i, k] - b[j, k]
                        acc += diff * diff
                    out[i, j] = acc
            return out

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False


if NUMBA_ENABLED:

    def rasterize_segments(image, segments, thickness=1):
        segments = np.ascontiguousarray(segments, dtype=np.float64).reshape(-1, 4)
        if segments.shape[0]:
            _rasterize_segments_nb(image, segments, thickness)

    def sample_segment_points(starts, ends, n_points):
        starts = np.ascontiguousarray(starts, dtype=np.float64)
        ends = np.ascontiguousarray(ends, dtype=np.float64)
        lengths = np.sqrt(((ends - starts) ** 2).sum(axis=1))
        keep = lengths > 0.0
        starts, ends, lengths = starts[keep], ends[keep], lengths[keep]
        total = lengths.sum()
        if total <= 0.0:
            raise ValueError("cannot sample points: total segment length is zero")
        return _sample_segment_points_nb(starts, ends, lengths, total, n_points)

    def pairwise_sqdist(a, b):
        a = np.ascontiguousarray(a, dtype=np.float64)
        b = np.ascontiguousarray(b, dtype=np.float64)
        return _pairwise_sqdist_nb(a, b)

    rasterize_segments.__doc__ = rasterize_segments_np.__doc__
    sample_segment_points.__doc__ = sample_segment_points_np.__doc__
    pairwise_sqdist.__doc__ = pairwise_sqdist_np.__doc__
else:
    rasterize_segments = rasterize_segments_np
    sample_segment_points = sample_segment_points_np
    pairwise_sqdist = pairwise_sqdist_np
