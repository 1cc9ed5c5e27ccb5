"""Anisotropic Gaussian primitives, camera views, and the covariance math they share.

Conventions used throughout the package:
  * quaternions are w-first (w, x, y, z) with Hamilton products,
  * pixel (row r, col c) has its center at image coordinates (x=c, y=r),
  * all in-memory numeric state is float64; bitstreams store float32.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BehindCameraError, InvalidInputError

NEAR_PLANE = 0.01

# real spherical-harmonic basis constants (degree 0 and 1)
SH_C0 = 0.28209479177387814
SH_C1 = 0.4886025119029199


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")


def quat_normalize(q):
    """Return q / |q| along the last axis; raises on zero quaternions."""
    q = np.asarray(q, dtype=np.float64)
    _check_finite("quaternion", q)
    norm = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(norm == 0.0):
        raise InvalidInputError("zero quaternion cannot be normalized")
    return q / norm


def quat_multiply(a, b):
    """Hamilton product a ⊗ b, w-first, broadcasting over leading axes."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    aw, ax, ay, az = (a[..., i] for i in range(4))
    bw, bx, by, bz = (b[..., i] for i in range(4))
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_to_rotation(q):
    """Rotation matrix of a (batch of) quaternion(s); normalizes internally.

    Accepts shape (..., 4) and returns (..., 3, 3) with determinant +1.
    """
    qn = quat_normalize(q)
    w, x, y, z = (qn[..., i] for i in range(4))
    r = np.empty(qn.shape[:-1] + (3, 3), dtype=np.float64)
    r[..., 0, 0] = 1 - 2 * (y * y + z * z)
    r[..., 0, 1] = 2 * (x * y - w * z)
    r[..., 0, 2] = 2 * (x * z + w * y)
    r[..., 1, 0] = 2 * (x * y + w * z)
    r[..., 1, 1] = 1 - 2 * (x * x + z * z)
    r[..., 1, 2] = 2 * (y * z - w * x)
    r[..., 2, 0] = 2 * (x * z - w * y)
    r[..., 2, 1] = 2 * (y * z + w * x)
    r[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return r


def quat_rotation_angle(q):
    """Rotation angle in radians of a unit quaternion, insensitive to sign."""
    q = np.asarray(q, dtype=np.float64)
    w = np.clip(np.abs(q[..., 0]) / np.linalg.norm(q, axis=-1), 0.0, 1.0)
    return 2.0 * np.arccos(w)


def covariance_from_rs(rotation, scale):
    """3x3 covariance R·diag(s)²·Rᵀ from quaternion rotation and per-axis scales.

    Batched: rotation (..., 4) and scale (..., 3) give (..., 3, 3).
    """
    rotation = np.asarray(rotation, dtype=np.float64)
    scale = np.asarray(scale, dtype=np.float64)
    _check_finite("rotation", rotation)
    _check_finite("scale", scale)
    if np.any(scale <= 0):
        raise InvalidInputError("scales must be strictly positive")
    r = quat_to_rotation(rotation)
    rs = r * (scale[..., None, :] ** 2)
    return rs @ np.swapaxes(r, -1, -2)


@dataclass(frozen=True)
class CameraView:
    """Pinhole camera: rigid world-to-camera transform plus intrinsics in pixels."""

    world_to_camera: np.ndarray  # (4, 4)
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        w2c = np.asarray(self.world_to_camera, dtype=np.float64)
        if w2c.shape != (4, 4):
            raise InvalidInputError("world_to_camera must be 4x4")
        _check_finite("world_to_camera", w2c)
        rot = w2c[:3, :3]
        if np.max(np.abs(rot @ rot.T - np.eye(3))) > 1e-9:
            raise InvalidInputError("rotation block of world_to_camera is not orthonormal")
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidInputError("focal lengths must be positive")
        object.__setattr__(self, "world_to_camera", w2c)

    @property
    def rotation(self):
        return self.world_to_camera[:3, :3]

    @property
    def translation(self):
        return self.world_to_camera[:3, 3]

    @property
    def camera_center(self):
        """Camera position in world coordinates."""
        return -self.rotation.T @ self.translation

    def to_camera(self, points):
        """World points (..., 3) into camera space."""
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation.T + self.translation

    def project(self, points):
        """Project world points; returns (pixel xy (..., 2), camera-space depth)."""
        p = self.to_camera(points)
        z = p[..., 2]
        xy = np.stack(
            [self.fx * p[..., 0] / z + self.cx, self.fy * p[..., 1] / z + self.cy],
            axis=-1,
        )
        return xy, z


def projection_jacobian(view: CameraView, cam_points):
    """Jacobian of the pixel projection evaluated at camera-space points (..., 3)."""
    p = np.asarray(cam_points, dtype=np.float64)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    j = np.zeros(p.shape[:-1] + (2, 3), dtype=np.float64)
    j[..., 0, 0] = view.fx / z
    j[..., 0, 2] = -view.fx * x / z**2
    j[..., 1, 1] = view.fy / z
    j[..., 1, 2] = -view.fy * y / z**2
    return j


def project_covariance(cov, view: CameraView, center, near: float = NEAR_PLANE):
    """Projected 2x2 covariance J·W·Σ·Wᵀ·Jᵀ at a world-space center.

    J is the perspective Jacobian at the camera-space center and W the rotation
    block of the view transform. Batched over leading axes.
    """
    cov = np.asarray(cov, dtype=np.float64)
    _check_finite("covariance", cov)
    p = view.to_camera(center)
    z = np.asarray(p)[..., 2]
    if np.any(z <= near):
        raise BehindCameraError(f"center depth {np.min(z):.4g} is at or behind the near plane")
    j = projection_jacobian(view, p)
    v = j @ view.rotation
    return v @ cov @ np.swapaxes(v, -1, -2)


@dataclass
class GaussianPrimitive:
    """A single anisotropic Gaussian: center, rotation, scales, SH appearance, opacity."""

    center: np.ndarray      # (3,)
    rotation: np.ndarray    # (4,) unit quaternion, w-first
    scale: np.ndarray       # (3,) strictly positive
    appearance: np.ndarray  # (3, n_coeffs) SH coefficients per color channel
    opacity: float          # in [0, 1]

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64).reshape(3)
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(4)
        self.scale = np.asarray(self.scale, dtype=np.float64).reshape(3)
        self.appearance = np.atleast_2d(np.asarray(self.appearance, dtype=np.float64))
        for name in ("center", "rotation", "scale", "appearance"):
            _check_finite(name, getattr(self, name))
        if abs(np.linalg.norm(self.rotation) - 1.0) > 1e-9:
            self.rotation = quat_normalize(self.rotation)
        if np.any(self.scale <= 0):
            raise InvalidInputError("scales must be strictly positive")
        if not 0.0 <= self.opacity <= 1.0:
            raise InvalidInputError("opacity must lie in [0, 1]")


class GaussianSet:
    """An ordered collection of Gaussians stored as arrays, with stable integer ids.

    Array layout (all float64): centers (n,3), rotations (n,4), scales (n,3),
    appearance (n,3,k), opacities (n,), ids (n,) int64. Instances are treated as
    immutable values; operations return new sets.
    """

    __slots__ = ("centers", "rotations", "scales", "appearance", "opacities", "ids")

    def __init__(self, centers, rotations, scales, appearance, opacities, ids=None):
        self.centers = np.ascontiguousarray(centers, dtype=np.float64)
        self.rotations = np.ascontiguousarray(rotations, dtype=np.float64)
        self.scales = np.ascontiguousarray(scales, dtype=np.float64)
        self.appearance = np.ascontiguousarray(appearance, dtype=np.float64)
        self.opacities = np.ascontiguousarray(opacities, dtype=np.float64)
        n = self.centers.shape[0]
        if ids is None:
            ids = np.arange(n, dtype=np.int64)
        self.ids = np.ascontiguousarray(ids, dtype=np.int64)
        if not (
            self.centers.shape == (n, 3)
            and self.rotations.shape == (n, 4)
            and self.scales.shape == (n, 3)
            and self.appearance.ndim == 3
            and self.appearance.shape[:2] == (n, 3)
            and self.opacities.shape == (n,)
            and self.ids.shape == (n,)
        ):
            raise InvalidInputError("inconsistent array shapes in GaussianSet")
        if len(np.unique(self.ids)) != n:
            raise InvalidInputError("ids must be unique within a set")

    def __len__(self):
        return self.centers.shape[0]

    @property
    def n_coeffs(self):
        return self.appearance.shape[2]

    @property
    def primitives(self):
        return [self.primitive(i) for i in range(len(self))]

    def primitive(self, i) -> GaussianPrimitive:
        return GaussianPrimitive(
            center=self.centers[i].copy(),
            rotation=self.rotations[i].copy(),
            scale=self.scales[i].copy(),
            appearance=self.appearance[i].copy(),
            opacity=float(self.opacities[i]),
        )

    def validate(self):
        for name in ("centers", "rotations", "scales", "appearance", "opacities"):
            _check_finite(name, getattr(self, name))
        if len(self) and np.max(np.abs(np.linalg.norm(self.rotations, axis=1) - 1.0)) > 1e-9:
            raise InvalidInputError("rotations must be unit quaternions")
        if np.any(self.scales <= 0):
            raise InvalidInputError("scales must be strictly positive")
        if np.any((self.opacities < 0) | (self.opacities > 1)):
            raise InvalidInputError("opacities must lie in [0, 1]")
        return self

    def copy(self) -> "GaussianSet":
        return GaussianSet(
            self.centers.copy(),
            self.rotations.copy(),
            self.scales.copy(),
            self.appearance.copy(),
            self.opacities.copy(),
            self.ids.copy(),
        )

    def subset(self, mask_or_index) -> "GaussianSet":
        idx = np.asarray(mask_or_index)
        return GaussianSet(
            self.centers[idx],
            self.rotations[idx],
            self.scales[idx],
            self.appearance[idx],
            self.opacities[idx],
            self.ids[idx],
        )

    def with_arrays(self, **kwargs) -> "GaussianSet":
        """Copy with some arrays replaced (centers=, rotations=, ...)."""
        parts = {
            "centers": self.centers,
            "rotations": self.rotations,
            "scales": self.scales,
            "appearance": self.appearance,
            "opacities": self.opacities,
            "ids": self.ids,
        }
        parts.update(kwargs)
        return GaussianSet(**parts)

    @staticmethod
    def empty(n_coeffs=4) -> "GaussianSet":
        return GaussianSet(
            np.zeros((0, 3)),
            np.zeros((0, 4)),
            np.zeros((0, 3)),
            np.zeros((0, 3, n_coeffs)),
            np.zeros((0,)),
            np.zeros((0,), dtype=np.int64),
        )

    @staticmethod
    def concatenate(sets) -> "GaussianSet":
        sets = [s for s in sets if len(s)]
        if not sets:
            return GaussianSet.empty()
        return GaussianSet(
            np.concatenate([s.centers for s in sets]),
            np.concatenate([s.rotations for s in sets]),
            np.concatenate([s.scales for s in sets]),
            np.concatenate([s.appearance for s in sets]),
            np.concatenate([s.opacities for s in sets]),
            np.concatenate([s.ids for s in sets]),
        )

    def aabb(self, expand: float = 0.0):
        """Axis-aligned bounds of the centers, optionally expanded by a fraction."""
        lo = self.centers.min(axis=0)
        hi = self.centers.max(axis=0)
        pad = (hi - lo) * expand
        pad = np.maximum(pad, 1e-6)
        return np.stack([lo - pad, hi + pad])


def sh_basis(dirs, n_coeffs):
    """Real SH basis values for unit directions (..., 3); degree 0 or 1."""
    dirs = np.asarray(dirs, dtype=np.float64)
    out = np.empty(dirs.shape[:-1] + (n_coeffs,), dtype=np.float64)
    out[..., 0] = SH_C0
    if n_coeffs > 1:
        out[..., 1] = -SH_C1 * dirs[..., 1]
        out[..., 2] = SH_C1 * dirs[..., 2]
        out[..., 3] = -SH_C1 * dirs[..., 0]
    return out


def sh_color(appearance, dirs):
    """Raw (unclipped) RGB from SH coefficients (n,3,k) and directions (n,3)."""
    basis = sh_basis(dirs, appearance.shape[2])
    return np.einsum("nck,nk->nc", appearance, basis)


def color_to_sh_dc(color):
    """Degree-0 coefficient that reproduces a given color head-on."""
    return np.asarray(color, dtype=np.float64) / SH_C0
