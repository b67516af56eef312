"""Rectifying transforms: make epipolar lines horizontal and row-aligned.

Images are plain 2D uint8 numpy arrays. The rectified pair is produced by
two virtual distortion-free cameras sharing one orientation, built by
splitting the inter-camera rotation equally and aligning the new x axis
with the baseline direction. Rectified intrinsics depend only on the two
cameras' intrinsics, never on the extrinsics, so scores stay comparable
across candidate extrinsics.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import InvalidArgumentError, InvalidRigError
from .geometry import Intrinsics, StereoRig, distort_normalized, euler_to_rotation

MAX_RIG_ROTATION = np.pi / 4.0  # rectification contract: total rotation < 45 deg


@dataclass(frozen=True)
class RectifyMaps:
    """Per-pixel inverse maps from rectified pixels to source subpixels.

    ``rot_left``/``rot_right`` rotate directions from each original camera
    frame into the common rectified frame. ``bounds_*`` are the bounding
    boxes (x0, y0, x1, y1), end-exclusive, of rectified pixels whose source
    sample falls inside the original image.
    """

    left_x: np.ndarray
    left_y: np.ndarray
    right_x: np.ndarray
    right_y: np.ndarray
    rect: Intrinsics
    baseline_mm: float
    rot_left: np.ndarray
    rot_right: np.ndarray
    bounds_left: tuple[int, int, int, int]
    bounds_right: tuple[int, int, int, int]


def _alignment_rotation(baseline_dir):
    """Rows of the rotation that takes the baseline direction to +x."""
    e1 = baseline_dir / np.linalg.norm(baseline_dir)
    e2 = np.cross([0.0, 0.0, 1.0], e1)
    n2 = np.linalg.norm(e2)
    if n2 < 1e-12:
        raise InvalidRigError("baseline parallel to the optical axis")
    e2 /= n2
    e3 = np.cross(e1, e2)
    return np.stack([e1, e2, e3])


def _build_map(intr: Intrinsics, rect: Intrinsics, rot_cam_to_rect, width, height):
    u, v = np.meshgrid(np.arange(width, dtype=np.float64),
                       np.arange(height, dtype=np.float64))
    x = (u - rect.cx) / rect.fx
    y = (v - rect.cy) / rect.fy
    dirs = np.stack([x, y, np.ones_like(x)], axis=-1)
    cam = dirs @ rot_cam_to_rect  # == (rot.T @ dir) per pixel
    z = cam[..., 2]
    front = z > 1e-9
    zs = np.where(front, z, 1.0)
    xd, yd = distort_normalized(cam[..., 0] / zs, cam[..., 1] / zs, intr)
    map_x = intr.cx + intr.fx * xd
    map_y = intr.cy + intr.fy * yd
    map_x[~front] = -1e12
    map_y[~front] = -1e12
    return map_x, map_y


def _bounds(map_x, map_y, width, height):
    ok = (map_x >= 0) & (map_x <= width - 1) & (map_y >= 0) & (map_y <= height - 1)
    if not ok.any():
        return (0, 0, 0, 0)
    rows = np.flatnonzero(ok.any(axis=1))
    cols = np.flatnonzero(ok.any(axis=0))
    return (int(cols[0]), int(rows[0]), int(cols[-1]) + 1, int(rows[-1]) + 1)


def compute_rectification(rig: StereoRig) -> RectifyMaps:
    """Build rectification maps for a rig.

    The virtual rectified cameras share intrinsics (averaged focal lengths
    and principal points of the two cameras, no distortion). For any 3D
    point seen by both virtual cameras the rectified rows coincide exactly
    by construction.
    """
    e = rig.extrinsics
    r_rel = euler_to_rotation(e.pitch, e.yaw, e.roll)
    t = e.translation()
    if np.linalg.norm(t) < 1e-9:
        raise InvalidRigError("zero baseline")
    rotvec = Rotation.from_matrix(r_rel).as_rotvec()
    if np.linalg.norm(rotvec) >= MAX_RIG_ROTATION:
        raise InvalidRigError("inter-camera rotation exceeds 45 degrees")

    center_right = -r_rel.T @ t
    half = Rotation.from_rotvec(0.5 * rotvec).as_matrix()
    align = _alignment_rotation(half @ center_right)
    rot_left = align @ half          # left cam frame  -> rectified frame
    rot_right = align @ half.T       # right cam frame -> rectified frame
    baseline = float(np.linalg.norm(center_right))

    rect = Intrinsics(
        fx=0.5 * (rig.left.fx + rig.right.fx),
        fy=0.5 * (rig.left.fy + rig.right.fy),
        cx=0.5 * (rig.left.cx + rig.right.cx),
        cy=0.5 * (rig.left.cy + rig.right.cy),
    )

    w, h = rig.image_width, rig.image_height
    lx, ly = _build_map(rig.left, rect, rot_left, w, h)
    rx, ry = _build_map(rig.right, rect, rot_right, w, h)
    return RectifyMaps(
        left_x=lx, left_y=ly, right_x=rx, right_y=ry,
        rect=rect, baseline_mm=baseline,
        rot_left=rot_left, rot_right=rot_right,
        bounds_left=_bounds(lx, ly, w, h),
        bounds_right=_bounds(rx, ry, w, h),
    )


def remap(img: np.ndarray, map_x: np.ndarray, map_y: np.ndarray):
    """Resample ``img`` at the given source coordinates, bilinearly.

    Returns ``(out, oob)`` where ``oob`` marks output pixels whose source
    coordinate fell outside the image; those are filled with 0.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise InvalidArgumentError("image must be 2D grayscale")
    if map_x.shape != map_y.shape:
        raise InvalidArgumentError("map component shapes differ")
    h, w = img.shape
    inside = (map_x >= 0) & (map_x <= w - 1) & (map_y >= 0) & (map_y <= h - 1)
    x0 = np.clip(np.floor(map_x), 0, w - 2).astype(np.intp)
    y0 = np.clip(np.floor(map_y), 0, h - 2).astype(np.intp)
    tx = np.clip(map_x - x0, 0.0, 1.0)
    ty = np.clip(map_y - y0, 0.0, 1.0)
    f = img.astype(np.float64)
    top = (1.0 - tx) * f[y0, x0] + tx * f[y0, x0 + 1]
    bot = (1.0 - tx) * f[y0 + 1, x0] + tx * f[y0 + 1, x0 + 1]
    vals = (1.0 - ty) * top + ty * bot
    out = np.rint(np.clip(vals, 0.0, 255.0)).astype(np.uint8)
    out[~inside] = 0
    return out, ~inside
