"""Deterministic block-matching stereo correspondence along image rows.

Sum-of-absolute-differences over a square window, full disparity sweep,
parabola subpixel refinement, and three validity tests (texture,
uniqueness, left-right consistency). Disparities are stored in 1/16-pixel
fixed point with INVALID as the sentinel. Output is bit-identical for
identical inputs regardless of the numba thread count: work is split into
a fixed number of row bands and every pixel is computed independently.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .errors import InvalidArgumentError

INVALID = np.int16(np.iinfo(np.int16).max)  # 32767
_NBANDS = 8
_BIG = 1 << 30


@dataclass(frozen=True)
class MatchConfig:
    """Block-matcher settings.

    ``texture_threshold`` is the minimum sum of absolute horizontal
    gradients over the block; None selects 10x the block pixel count.
    """

    block_radius: int = 4
    max_disparity: int = 128
    uniqueness_ratio: float = 1.15
    lr_threshold: int = 1
    texture_threshold: float | None = None

    def __post_init__(self):
        if self.block_radius < 1:
            raise InvalidArgumentError("block_radius must be >= 1")
        if self.max_disparity < 1:
            raise InvalidArgumentError("max_disparity must be >= 1")
        if self.uniqueness_ratio < 1.0:
            raise InvalidArgumentError("uniqueness_ratio must be >= 1.0")
        if self.lr_threshold < 0:
            raise InvalidArgumentError("lr_threshold must be >= 0")

    @property
    def window_pixels(self) -> int:
        side = 2 * self.block_radius + 1
        return side * side

    @property
    def effective_texture_threshold(self) -> float:
        if self.texture_threshold is None:
            return 10.0 * self.window_pixels
        return self.texture_threshold


@dataclass(frozen=True)
class DisparityMap:
    """Subpixel disparities in 1/16-pixel units; INVALID marks no match."""

    values: np.ndarray
    max_disparity: int

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def valid_mask(self) -> np.ndarray:
        return self.values != INVALID

    def to_pixels(self) -> np.ndarray:
        """Disparities in pixels as float32, NaN where invalid."""
        out = self.values.astype(np.float32) / 16.0
        out[self.values == INVALID] = np.nan
        return out


@njit(cache=True, parallel=True)
def _match_kernel(left, right, radius, max_disp, uniq_ratio, lr_thresh,
                  grad_ok, out, nbands):
    h, w = left.shape
    nd = max_disp + 1
    y_lo = radius
    y_hi = h - radius
    x_hi = w - radius
    rows_per = (y_hi - y_lo + nbands - 1) // nbands
    for band in prange(nbands):
        ys = y_lo + band * rows_per
        ye = min(ys + rows_per, y_hi)
        if ys >= ye:
            continue
        colsum = np.zeros((nd, w), np.int32)
        cost = np.empty((nd, w), np.int32)   # aggregated SAD for this row
        prefix = np.empty(w + 1, np.int32)
        bc = np.empty(w, np.int32)           # best left cost / disparity
        bd = np.empty(w, np.int32)
        sc = np.empty(w, np.int32)           # best cost outside bd +- 1
        bcr = np.empty(w, np.int32)          # best right cost / disparity
        bdr = np.empty(w, np.int32)
        # column sums of |L - R| for the first window of this band
        for yy in range(ys - radius, ys + radius + 1):
            for d in range(nd):
                cs = colsum[d]
                la = left[yy]
                ra = right[yy]
                for x in range(d, w):
                    cs[x] += abs(la[x] - ra[x - d])
        for yc in range(ys, ye):
            if yc > ys:
                ya = yc + radius
                yb = yc - radius - 1
                for d in range(nd):
                    cs = colsum[d]
                    la = left[ya]
                    ra = right[ya]
                    lb = left[yb]
                    rb = right[yb]
                    for x in range(d, w):
                        cs[x] += (abs(la[x] - ra[x - d])
                                  - abs(lb[x] - rb[x - d]))
            for x in range(radius, x_hi):
                bc[x] = _BIG
                bd[x] = 0
                sc[x] = _BIG
                bcr[x] = _BIG
                bdr[x] = 0
            # window sums per disparity, then vector best/uniqueness scans
            for d in range(nd):
                x0 = radius + d
                if x0 >= x_hi:
                    break
                cs = colsum[d]
                s = np.int32(0)
                prefix[d] = 0
                for x in range(d, w):
                    s += cs[x]
                    prefix[x + 1] = s
                cd = cost[d]
                for x in range(x0, x_hi):
                    cd[x] = prefix[x + radius + 1] - prefix[x - radius]
                for x in range(x0, x_hi):
                    if cd[x] < bc[x]:
                        bc[x] = cd[x]
                        bd[x] = d
                for xr in range(radius, x_hi - d):
                    c = cd[xr + d]
                    if c < bcr[xr]:
                        bcr[xr] = c
                        bdr[xr] = d
            # second-best cost at least 2 disparities away from the best
            for d in range(nd):
                x0 = radius + d
                if x0 >= x_hi:
                    break
                cd = cost[d]
                for x in range(x0, x_hi):
                    if (d < bd[x] - 1 or d > bd[x] + 1) and cd[x] < sc[x]:
                        sc[x] = cd[x]
            # per-pixel decision
            for x in range(radius, x_hi):
                if not grad_ok[yc, x]:
                    continue
                b = bd[x]
                c0 = bc[x]
                if sc[x] < _BIG and sc[x] < uniq_ratio * c0:
                    continue
                if abs(bdr[x - b] - b) > lr_thresh:
                    continue
                off = 0.0
                dmax = min(max_disp, x - radius)
                if c0 > 0 and 0 < b < dmax:
                    cm = cost[b - 1, x]
                    cp = cost[b + 1, x]
                    den = cm - 2 * c0 + cp
                    if den > 0:
                        off = (cm - cp) / (2.0 * den)
                out[yc, x] = np.int16(int(math.floor((b + off) * 16.0 + 0.5)))


def _texture_mask(left16, cfg: MatchConfig):
    h, w = left16.shape
    r = cfg.block_radius
    g = np.zeros((h, w), np.int64)
    g[:, :-1] = np.abs(np.diff(left16.astype(np.int64), axis=1))
    ii = np.zeros((h + 1, w + 1), np.int64)
    np.cumsum(np.cumsum(g, axis=0), axis=1, out=ii[1:, 1:])
    side = 2 * r + 1
    wins = (ii[side:, side:] - ii[:-side, side:]
            - ii[side:, :-side] + ii[:-side, :-side])
    ok = np.zeros((h, w), bool)
    ok[r:h - r, r:w - r] = wins >= cfg.effective_texture_threshold
    return ok


def compute_disparity(left, right, cfg: MatchConfig) -> DisparityMap:
    """Match ``left`` against ``right`` along rows; see module docstring.

    Inputs must be equally sized 2D uint8 images with
    ``width > 2*block_radius + max_disparity`` and ``height > 2*block_radius``.
    """
    left = np.asarray(left)
    right = np.asarray(right)
    if left.ndim != 2 or right.ndim != 2:
        raise InvalidArgumentError("images must be 2D grayscale")
    if left.shape != right.shape:
        raise InvalidArgumentError(
            f"image dimensions differ: {left.shape} vs {right.shape}")
    h, w = left.shape
    if w <= 2 * cfg.block_radius + cfg.max_disparity or h <= 2 * cfg.block_radius:
        raise InvalidArgumentError(
            "images too small for block radius and disparity range")
    l16 = np.ascontiguousarray(left, dtype=np.int16)
    r16 = np.ascontiguousarray(right, dtype=np.int16)
    grad_ok = _texture_mask(l16, cfg)
    out = np.full((h, w), INVALID, np.int16)
    _match_kernel(l16, r16, cfg.block_radius, cfg.max_disparity,
                  float(cfg.uniqueness_ratio), int(cfg.lr_threshold),
                  grad_ok, out, _NBANDS)
    return DisparityMap(values=out, max_disparity=cfg.max_disparity)


def count_valid(d: DisparityMap) -> int:
    """Number of pixels carrying a valid disparity."""
    return int(np.count_nonzero(d.values != INVALID))
