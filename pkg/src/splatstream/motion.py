"""Multi-resolution motion grid and shared MLP predicting per-Gaussian rigid updates.

Each frame's motion lives in a stack of dense 3D feature grids sampled by
trilinear interpolation at (previous-frame) Gaussian centers; a small shared
tanh MLP maps the concatenated features to a translation and a rotation
quaternion increment. Forward and backward passes are hand-rolled so the grid
gradient stays sparse and deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .gaussians import GaussianSet, quat_multiply

DEFAULT_RESOLUTIONS = (32, 64, 128)
DEFAULT_CHANNELS = (4, 4, 2)
IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


@dataclass
class MotionGrid:
    """Dense feature grids of strictly increasing resolution over a shared AABB."""

    levels: list  # level l: (r_l, r_l, r_l, c_l) float64
    aabb: np.ndarray  # (2, 3) lower/upper corners

    def __post_init__(self):
        self.aabb = np.asarray(self.aabb, dtype=np.float64).reshape(2, 3)
        if np.any(self.aabb[1] <= self.aabb[0]):
            raise InvalidInputError("aabb must have positive extent on every axis")
        if not self.levels:
            raise InvalidInputError("at least one grid level required")
        res = [lv.shape[0] for lv in self.levels]
        if any(b <= a for a, b in zip(res, res[1:])):
            raise InvalidInputError("level resolutions must be strictly increasing")
        for lv in self.levels:
            if lv.ndim != 4 or lv.shape[0] != lv.shape[1] or lv.shape[1] != lv.shape[2]:
                raise InvalidInputError("grid levels must be cubic (r, r, r, c)")
            if not np.all(np.isfinite(lv)):
                raise InvalidInputError("grid features must be finite")

    @property
    def resolutions(self):
        return [lv.shape[0] for lv in self.levels]

    @property
    def channels(self):
        return [lv.shape[3] for lv in self.levels]

    @property
    def feature_dim(self):
        return sum(self.channels)

    @property
    def n_values(self):
        return sum(lv.size for lv in self.levels)

    def copy(self):
        return MotionGrid([lv.copy() for lv in self.levels], self.aabb.copy())

    @staticmethod
    def zeros(aabb, resolutions=DEFAULT_RESOLUTIONS, channels=DEFAULT_CHANNELS):
        levels = [np.zeros((r, r, r, c)) for r, c in zip(resolutions, channels)]
        return MotionGrid(levels, aabb)


def normalize_coord(centers, aabb):
    """Map world positions into the grid's [0, 1]^3 frame, clamping outsiders.

    Returns (unit coords, bool mask of clamped points).
    """
    aabb = np.asarray(aabb, dtype=np.float64)
    extent = aabb[1] - aabb[0]
    if np.any(extent <= 0):
        raise InvalidInputError("aabb must have positive extent on every axis")
    u = (np.asarray(centers, dtype=np.float64) - aabb[0]) / extent
    clamped = np.any((u < 0.0) | (u > 1.0), axis=-1)
    return np.clip(u, 0.0, 1.0), clamped


def _trilinear_cache(grid: MotionGrid, centers):
    """Corner indices / weights per level for a batch of query points."""
    u, clamped = normalize_coord(centers, grid.aabb)
    cache = []
    for lv in grid.levels:
        r = lv.shape[0]
        pos = u * (r - 1)
        i0 = np.minimum(np.floor(pos).astype(np.int64), r - 2) if r > 1 else np.zeros_like(pos, dtype=np.int64)
        frac = pos - i0
        cache.append((i0, frac))
    return u, clamped, cache


_CORNERS = np.array([(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)])


def _corner_weights(frac):
    w = np.ones((frac.shape[0], 8))
    for k, (a, b, c) in enumerate(_CORNERS):
        w[:, k] = (
            (frac[:, 0] if a else 1 - frac[:, 0])
            * (frac[:, 1] if b else 1 - frac[:, 1])
            * (frac[:, 2] if c else 1 - frac[:, 2])
        )
    return w


def sample_motion(grid: MotionGrid, centers):
    """Trilinear features at each center, levels concatenated coarse to fine."""
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    _, _, cache = _trilinear_cache(grid, centers)
    feats = []
    for lv, (i0, frac) in zip(grid.levels, cache):
        w = _corner_weights(frac)
        acc = np.zeros((centers.shape[0], lv.shape[3]))
        for k, (a, b, c) in enumerate(_CORNERS):
            acc += w[:, k, None] * lv[i0[:, 0] + a, i0[:, 1] + b, i0[:, 2] + c]
        feats.append(acc)
    return np.concatenate(feats, axis=1)


def sample_motion_backward(grid: MotionGrid, centers, d_features):
    """Scatter feature gradients back onto the touched grid cells."""
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    _, _, cache = _trilinear_cache(grid, centers)
    grads = [np.zeros_like(lv) for lv in grid.levels]
    offset = 0
    for lv, g, (i0, frac) in zip(grid.levels, grads, cache):
        c = lv.shape[3]
        d_feat = d_features[:, offset : offset + c]
        offset += c
        w = _corner_weights(frac)
        for k, (a, b, c_) in enumerate(_CORNERS):
            np.add.at(g, (i0[:, 0] + a, i0[:, 1] + b, i0[:, 2] + c_), w[:, k, None] * d_feat)
    return grads


@dataclass
class MotionMlp:
    """Two-hidden-layer tanh network: features -> (translation, quaternion delta).

    The output head is zero-initialized and the quaternion channel carries an
    identity bias, so an untrained network predicts no motion.
    """

    weights: list  # [(W1, b1), (W2, b2), (W3, b3)]

    @property
    def input_dim(self):
        return self.weights[0][0].shape[1]

    @staticmethod
    def create(input_dim, hidden=64, rng=None):
        rng = rng or np.random.default_rng(0)
        dims = [input_dim, hidden, hidden]
        weights = []
        for din, dout in zip(dims, dims[1:]):
            scale = np.sqrt(2.0 / (din + dout))
            weights.append((rng.normal(0.0, scale, (dout, din)), np.zeros(dout)))
        weights.append((np.zeros((7, hidden)), np.zeros(7)))
        return MotionMlp(weights)

    def copy(self):
        return MotionMlp([(w.copy(), b.copy()) for w, b in self.weights])

    def param_list(self):
        out = []
        for i, (w, b) in enumerate(self.weights):
            out.append((f"w{i}", w))
            out.append((f"b{i}", b))
        return out


@dataclass
class MotionIncrement:
    """Batched rigid increments: translations (n,3) and unit quaternions (n,4)."""

    d_center: np.ndarray
    d_rotation: np.ndarray


def _mlp_forward(mlp: MotionMlp, features):
    (w1, b1), (w2, b2), (w3, b3) = mlp.weights
    if features.shape[1] != w1.shape[1]:
        raise InvalidInputError(
            f"feature dim {features.shape[1]} does not match MLP input {w1.shape[1]}"
        )
    h1 = np.tanh(features @ w1.T + b1)
    h2 = np.tanh(h1 @ w2.T + b2)
    out = h2 @ w3.T + b3
    return out, (h1, h2)


def predict_increment(mlp: MotionMlp, features) -> MotionIncrement:
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    out, _ = _mlp_forward(mlp, features)
    raw_q = out[:, 3:7] + IDENTITY_QUAT
    norm = np.linalg.norm(raw_q, axis=1, keepdims=True)
    return MotionIncrement(d_center=out[:, :3].copy(), d_rotation=raw_q / norm)


def apply_motion(prev_dyn: GaussianSet, grid: MotionGrid, mlp: MotionMlp) -> GaussianSet:
    """Move a dynamic set by one frame: centers translated, rotations pre-composed.

    Scale, appearance, opacity, and ids are copied unchanged.
    """
    if len(prev_dyn) == 0:
        return prev_dyn.copy()
    inc = predict_increment(mlp, sample_motion(grid, prev_dyn.centers))
    new_q = quat_multiply(inc.d_rotation, prev_dyn.rotations)
    norm = np.linalg.norm(new_q, axis=1, keepdims=True)
    # unit ⊗ unit is already unit to machine precision; dividing then would only
    # perturb the last bit, so renormalize only when actually off
    if np.any(np.abs(norm - 1.0) > 1e-12):
        new_q = new_q / norm
    return prev_dyn.with_arrays(centers=prev_dyn.centers + inc.d_center, rotations=new_q)


@dataclass
class MlpGrads:
    weights: list  # same structure as MotionMlp.weights


def _quat_norm_backward(raw, d_unit):
    norm = np.linalg.norm(raw, axis=1, keepdims=True)
    unit = raw / norm
    return (d_unit - unit * np.einsum("na,na->n", d_unit, unit)[:, None]) / norm


def _right_mul_jacobian(q):
    """d(dq ⊗ q)/d(dq) as a (n, 4, 4) matrix for fixed right factor q."""
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    j = np.empty((q.shape[0], 4, 4))
    j[:, 0] = np.stack([w, -x, -y, -z], axis=-1)
    j[:, 1] = np.stack([x, w, z, -y], axis=-1)
    j[:, 2] = np.stack([y, -z, w, x], axis=-1)
    j[:, 3] = np.stack([z, y, -x, w], axis=-1)
    return j


def motion_backward(prev_dyn: GaussianSet, grid: MotionGrid, mlp: MotionMlp, d_center, d_rotation):
    """Gradients of a loss on the moved set w.r.t. grid features and MLP parameters.

    d_center/d_rotation are the upstream gradients for the moved primitives (in
    prev_dyn order). Returns (per-level grid gradients, MlpGrads).
    """
    features = sample_motion(grid, prev_dyn.centers)
    out, (h1, h2) = _mlp_forward(mlp, features)
    raw_q = out[:, 3:7] + IDENTITY_QUAT
    norm = np.linalg.norm(raw_q, axis=1, keepdims=True)
    dq_unit = raw_q / norm

    # new rotation = normalize(dq ⊗ q_old); chain through both normalizations
    prod = quat_multiply(dq_unit, prev_dyn.rotations)
    d_prod = _quat_norm_backward(prod, np.asarray(d_rotation, dtype=np.float64))
    jac = _right_mul_jacobian(prev_dyn.rotations)
    d_dq_unit = np.einsum("nab,na->nb", jac, d_prod)
    d_raw_q = _quat_norm_backward(raw_q, d_dq_unit)

    d_out = np.concatenate([np.asarray(d_center, dtype=np.float64), d_raw_q], axis=1)

    (w1, b1), (w2, b2), (w3, b3) = mlp.weights
    d_w3 = d_out.T @ h2
    d_b3 = d_out.sum(axis=0)
    d_h2 = (d_out @ w3) * (1 - h2 * h2)
    d_w2 = d_h2.T @ h1
    d_b2 = d_h2.sum(axis=0)
    d_h1 = (d_h2 @ w2) * (1 - h1 * h1)
    d_w1 = d_h1.T @ features
    d_b1 = d_h1.sum(axis=0)
    d_features = d_h1 @ w1

    grid_grads = sample_motion_backward(grid, prev_dyn.centers, d_features)
    return grid_grads, MlpGrads([(d_w1, d_b1), (d_w2, d_b2), (d_w3, d_b3)])
