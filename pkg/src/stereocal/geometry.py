"""Pinhole camera model, Brown-Conrady distortion and Euler-angle rotations.

Conventions used throughout the library:

* camera axes: x right, y down, z forward (optical axis);
* rotations: ``R = Rz(roll) @ Ry(yaw) @ Rx(pitch)``, angles in radians;
* rig transform: a point in the left camera frame maps to the right frame
  via ``X_r = R @ X_l + T`` with ``T = (tx, ty, tz)`` in millimeters, so a
  standard rig with the right camera displaced to the right has ``tx < 0``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BehindCameraError,
    DegenerateOrientationError,
    InvalidArgumentError,
    InvalidRigError,
    NumericFailureError,
)

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    w = math.remainder(a, TWO_PI)
    if w <= -math.pi:
        w += TWO_PI
    return w


def _require_finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise InvalidArgumentError(f"{name}: non-finite value {v!r}")


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics with radial (k1,k2,k3) and tangential (p1,p2) terms."""

    fx: float
    fy: float
    cx: float
    cy: float
    k1: float = 0.0
    k2: float = 0.0
    p1: float = 0.0
    p2: float = 0.0
    k3: float = 0.0

    def __post_init__(self):
        _require_finite(
            "Intrinsics",
            self.fx, self.fy, self.cx, self.cy,
            self.k1, self.k2, self.p1, self.p2, self.k3,
        )
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidArgumentError("focal lengths must be positive")

    @property
    def has_distortion(self) -> bool:
        return any(abs(c) > 0 for c in (self.k1, self.k2, self.p1, self.p2, self.k3))


@dataclass(frozen=True)
class ExtrinsicParams:
    """Six-parameter relative pose of the right camera w.r.t. the left.

    Angles in radians, each within (-pi, pi]; translations in millimeters.
    """

    pitch: float
    yaw: float
    roll: float
    tx: float
    ty: float
    tz: float

    def __post_init__(self):
        _require_finite(
            "ExtrinsicParams",
            self.pitch, self.yaw, self.roll, self.tx, self.ty, self.tz,
        )
        for name in ("pitch", "yaw", "roll"):
            a = getattr(self, name)
            if not (-math.pi < a <= math.pi):
                raise InvalidArgumentError(f"{name}={a} outside (-pi, pi]")

    def to_array(self) -> np.ndarray:
        return np.array(
            [self.pitch, self.yaw, self.roll, self.tx, self.ty, self.tz],
            dtype=np.float64,
        )

    @classmethod
    def from_array(cls, a) -> "ExtrinsicParams":
        a = np.asarray(a, dtype=np.float64)
        if a.shape != (6,):
            raise InvalidArgumentError(f"expected 6 parameters, got shape {a.shape}")
        return cls(*(float(v) for v in a))

    def translation(self) -> np.ndarray:
        return np.array([self.tx, self.ty, self.tz], dtype=np.float64)


@dataclass(frozen=True)
class StereoRig:
    """A full stereo calibration: two intrinsics, extrinsics and image size."""

    left: Intrinsics
    right: Intrinsics
    extrinsics: ExtrinsicParams
    image_width: int
    image_height: int

    def __post_init__(self):
        if self.image_width <= 0 or self.image_height <= 0:
            raise InvalidArgumentError("image dimensions must be positive")
        for side, intr in (("left", self.left), ("right", self.right)):
            if not (0 <= intr.cx < self.image_width):
                raise InvalidArgumentError(f"{side} cx outside [0, width)")
            if not (0 <= intr.cy < self.image_height):
                raise InvalidArgumentError(f"{side} cy outside [0, height)")
        if self.extrinsics.tx == 0.0:
            raise InvalidRigError("zero baseline: cameras coincide along x")

    def with_extrinsics(self, extrinsics: ExtrinsicParams) -> "StereoRig":
        return StereoRig(self.left, self.right, extrinsics,
                         self.image_width, self.image_height)


def _rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _rot_y(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_to_rotation(pitch: float, yaw: float, roll: float) -> np.ndarray:
    """Rotation matrix ``Rz(roll) @ Ry(yaw) @ Rx(pitch)``."""
    _require_finite("euler_to_rotation", pitch, yaw, roll)
    return _rot_z(roll) @ _rot_y(yaw) @ _rot_x(pitch)


def rotation_to_euler(r) -> tuple[float, float, float]:
    """Invert :func:`euler_to_rotation`; returns (pitch, yaw, roll).

    Requires |yaw| < pi/2 - 1e-6; closer to gimbal lock the decomposition
    is not unique and a DegenerateOrientationError is raised.
    """
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        raise InvalidArgumentError(f"rotation must be 3x3, got {r.shape}")
    if not np.all(np.isfinite(r)):
        raise InvalidArgumentError("rotation contains non-finite entries")
    if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-6:
        raise InvalidArgumentError("matrix is not orthonormal")
    sy = -r[2, 0]
    if abs(sy) >= math.cos(1e-6):
        raise DegenerateOrientationError("yaw within 1e-6 of +/- pi/2")
    yaw = math.asin(sy)
    pitch = math.atan2(r[2, 1], r[2, 2])
    roll = math.atan2(r[1, 0], r[0, 0])
    return pitch, yaw, roll


def distort_normalized(xn, yn, intr: Intrinsics):
    """Apply Brown-Conrady distortion to normalized coordinates (vectorized)."""
    xn = np.asarray(xn, dtype=np.float64)
    yn = np.asarray(yn, dtype=np.float64)
    r2 = xn * xn + yn * yn
    radial = 1.0 + r2 * (intr.k1 + r2 * (intr.k2 + r2 * intr.k3))
    xd = xn * radial + 2.0 * intr.p1 * xn * yn + intr.p2 * (r2 + 2.0 * xn * xn)
    yd = yn * radial + intr.p1 * (r2 + 2.0 * yn * yn) + 2.0 * intr.p2 * xn * yn
    return xd, yd


def project(point, intr: Intrinsics):
    """Project camera-frame points (mm) to pixel coordinates.

    Accepts a single point of shape (3,) or a batch of shape (N, 3) and
    returns (2,) or (N, 2) respectively. All depths must be positive.
    """
    p = np.asarray(point, dtype=np.float64)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    if p.shape[-1] != 3:
        raise InvalidArgumentError(f"points must have 3 components, got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise InvalidArgumentError("non-finite point")
    z = p[:, 2]
    if np.any(z <= 0):
        raise BehindCameraError("point depth must be positive")
    xd, yd = distort_normalized(p[:, 0] / z, p[:, 1] / z, intr)
    uv = np.stack([intr.cx + intr.fx * xd, intr.cy + intr.fy * yd], axis=-1)
    return uv[0] if single else uv


def undistort(pixel, intr: Intrinsics, max_iter: int = 20, tol: float = 1e-8,
              damping: float = 1.0):
    """Invert distortion: pixel coordinates to normalized undistorted coords.

    Damped fixed-point iteration; raises NumericFailureError if the update
    is still above ``tol`` (normalized units) after ``max_iter`` rounds.
    Accepts (2,) or (N, 2); returns matching shape.
    """
    q = np.asarray(pixel, dtype=np.float64)
    single = q.ndim == 1
    q = np.atleast_2d(q)
    if q.shape[-1] != 2:
        raise InvalidArgumentError(f"pixels must have 2 components, got {q.shape}")
    if not np.all(np.isfinite(q)):
        raise InvalidArgumentError("non-finite pixel")
    xd = (q[:, 0] - intr.cx) / intr.fx
    yd = (q[:, 1] - intr.cy) / intr.fy
    x, y = xd.copy(), yd.copy()
    if intr.has_distortion:
        delta = math.inf
        for _ in range(max_iter):
            r2 = x * x + y * y
            radial = 1.0 + r2 * (intr.k1 + r2 * (intr.k2 + r2 * intr.k3))
            tang_x = 2.0 * intr.p1 * x * y + intr.p2 * (r2 + 2.0 * x * x)
            tang_y = intr.p1 * (r2 + 2.0 * y * y) + 2.0 * intr.p2 * x * y
            nx = (xd - tang_x) / radial
            ny = (yd - tang_y) / radial
            nx = x + damping * (nx - x)
            ny = y + damping * (ny - y)
            delta = max(np.max(np.abs(nx - x)), np.max(np.abs(ny - y)))
            x, y = nx, ny
            if delta < tol:
                break
        else:
            raise NumericFailureError(
                f"undistortion did not converge: last update {delta:.3g}")
    out = np.stack([x, y], axis=-1)
    return out[0] if single else out
