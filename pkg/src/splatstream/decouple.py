"""Lookahead motion decoupling: split a keyframe set into static and dynamic parts.

A converged keyframe model is briefly re-fit against a later frame with only
centers and scales free; the resulting displacement and scale evidence drives
an initial static/dynamic classification, a rendering-error refinement demotes
poorly-fitting dynamic points, and KNN majority voting smooths the labels.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError
from .gaussians import GaussianSet
from .optim import Adam
from .render import (
    DEFAULT_CONFIG,
    RenderConfig,
    color_loss,
    render_arrays,
    render_backward_cached,
    render_cached,
)


@dataclass
class DecoupleConfig:
    tau_delta: float = 4.5      # threshold on depth-normalized projected displacement
    tau_scale: float = 0.1      # threshold on the L2 norm of the scale change
    tau_err: float = 0.02       # rendering-error threshold for demoting dynamic points
    knn_k: int = 5
    lookahead_frame: int = 30   # frame index used as the motion probe
    finetune_iters: int = 300
    finetune_lr: float = 0.01   # pilot-calibrated; positions must traverse scene-scale motion
    l1_weight: float = 0.2

    def __post_init__(self):
        if min(self.tau_delta, self.tau_scale, self.tau_err) <= 0:
            raise InvalidInputError("decoupling thresholds must be positive")
        if self.knn_k < 1:
            raise InvalidInputError("knn_k must be at least 1")
        if self.lookahead_frame < 2:
            raise InvalidInputError("lookahead frame must be at least 2")


@dataclass
class MotionLabels:
    ids: np.ndarray         # (n,)
    dynamic: np.ndarray     # (n,) bool
    delta: np.ndarray       # (n,) depth-normalized projected displacement
    scale_change: np.ndarray  # (n,)
    err: np.ndarray         # (n,) weighted rendering-error contribution

    def copy(self):
        return MotionLabels(
            self.ids.copy(), self.dynamic.copy(), self.delta.copy(),
            self.scale_change.copy(), self.err.copy(),
        )


def finetune_mu_s(keyframe_model: GaussianSet, lookahead_views, cfg: DecoupleConfig,
                  render_cfg: RenderConfig = DEFAULT_CONFIG) -> GaussianSet:
    """Re-fit only centers and scales against the lookahead views.

    Rotation, appearance, opacity, and the primitive count stay bit-identical.
    """
    if not lookahead_views:
        raise InvalidInputError("at least one lookahead view is required")
    if cfg.finetune_iters == 0 or len(keyframe_model) == 0:
        return keyframe_model.copy()

    centers = keyframe_model.centers.copy()
    log_scales = np.log(keyframe_model.scales)
    params = {"centers": centers, "log_scales": log_scales}
    opt = Adam(params, lr=cfg.finetune_lr)

    # full-batch steps: summing all views keeps barely-visible primitives anchored
    # by consistent multi-view signal instead of per-view drift
    total = max(cfg.finetune_iters - 1, 1)
    for it in range(cfg.finetune_iters):
        # three-phase schedule: anneal to 10% while the movers travel, hold warm so
        # occlusion-churned bystanders glide back, then freeze for a crisp fit
        frac = it / total
        if frac < 0.5:
            opt.lr = cfg.finetune_lr * 0.1 ** (frac / 0.5)
        elif frac < 0.8:
            opt.lr = cfg.finetune_lr * 0.1
        else:
            opt.lr = cfg.finetune_lr * 0.1 * 0.01 ** ((frac - 0.8) / 0.2)
        scales = np.exp(log_scales)
        d_center = np.zeros_like(centers)
        d_scale = np.zeros_like(scales)
        for view, target in lookahead_views:
            out, cache = render_cached(
                centers, keyframe_model.rotations, scales,
                keyframe_model.appearance, keyframe_model.opacities, view, render_cfg,
            )
            _, d_image = color_loss(out.image, target, cfg.l1_weight)
            grad = render_backward_cached(cache, d_image, render_cfg, attrs=("center", "scale"))
            d_center += grad.d_center
            d_scale += grad.d_scale
        opt.step({"centers": d_center, "log_scales": d_scale * scales})

    return keyframe_model.with_arrays(centers=centers, scales=np.exp(log_scales))


def classify_initial(before: GaussianSet, after: GaussianSet, views, cfg: DecoupleConfig) -> MotionLabels:
    """Threshold projected displacement (averaged over views) and scale change."""
    if not np.array_equal(before.ids, after.ids):
        raise InvalidInputError("before/after sets must share ids in order")
    n = len(before)
    delta = np.zeros(n)
    n_used = np.zeros(n)
    for view, _ in views:
        xy_b, z_b = view.project(before.centers)
        xy_a, _ = view.project(after.centers)
        ok = z_b > 0
        disp = np.linalg.norm(xy_a - xy_b, axis=1)
        delta[ok] += disp[ok] / z_b[ok]
        n_used[ok] += 1
    delta = np.where(n_used > 0, delta / np.maximum(n_used, 1), np.inf)
    scale_change = np.linalg.norm(after.scales - before.scales, axis=1)
    dynamic = (delta > cfg.tau_delta) | (scale_change > cfg.tau_scale)
    return MotionLabels(before.ids.copy(), dynamic, delta, scale_change, np.zeros(n))


def weighted_error_per_gaussian(labels_ids, render_outputs_and_targets):
    """Blend-weighted per-pixel L1 error attributed to each Gaussian.

    The per-pixel error is the channel-mean absolute difference. Primitives
    with no blend weight anywhere get an error of zero.
    """
    id_to_row = {int(g): i for i, g in enumerate(labels_ids)}
    num = np.zeros(len(labels_ids))
    den = np.zeros(len(labels_ids))
    for out, target in render_outputs_and_targets:
        pix_err = np.abs(out.image - np.asarray(target, dtype=np.float64)).mean(axis=2).ravel()
        sw = out.blend_weights
        rows = np.array([id_to_row[int(g)] for g in sw.gaussian_ids], dtype=np.int64)
        np.add.at(num, rows, sw.weights * pix_err[sw.pixels])
        np.add.at(den, rows, sw.weights)
    return np.where(den > 0, num / np.maximum(den, 1e-300), 0.0)


def refine_by_error(labels: MotionLabels, render_outputs_and_targets, cfg: DecoupleConfig) -> MotionLabels:
    """Demote dynamic-labeled primitives whose error contribution exceeds tau_err."""
    out = labels.copy()
    out.err = weighted_error_per_gaussian(labels.ids, render_outputs_and_targets)
    out.dynamic = labels.dynamic & ~(labels.dynamic & (out.err > cfg.tau_err))
    return out


def knn_smooth(labels: MotionLabels, centers, k: int) -> MotionLabels:
    """One simultaneous pass of k-nearest-neighbor majority voting; ties go static."""
    n = centers.shape[0]
    if k < 1:
        raise InvalidInputError("k must be at least 1")
    if n < k + 1:
        raise InvalidInputError(f"need more than {k} primitives for {k}-NN voting")
    tree = cKDTree(centers)
    _, idx = tree.query(centers, k=k + 1)
    neighbors = idx[:, 1:]  # drop self
    votes = labels.dynamic[neighbors].sum(axis=1)
    out = labels.copy()
    out.dynamic = votes * 2 > k
    return out


def decouple(keyframe_model: GaussianSet, lookahead_views, cfg: DecoupleConfig,
             render_cfg: RenderConfig = DEFAULT_CONFIG):
    """Full pipeline; partitions the ORIGINAL keyframe attributes by the final labels.

    Returns (static set, dynamic set, labels).
    """
    tuned = finetune_mu_s(keyframe_model, lookahead_views, cfg, render_cfg)
    labels = classify_initial(keyframe_model, tuned, lookahead_views, cfg)
    renders = [
        (render_arrays(tuned.centers, tuned.rotations, tuned.scales,
                       tuned.appearance, tuned.opacities, view, render_cfg,
                       ids=tuned.ids), target)
        for view, target in lookahead_views
    ]
    labels = refine_by_error(labels, renders, cfg)
    labels = knn_smooth(labels, keyframe_model.centers, cfg.knn_k)
    static = keyframe_model.subset(~labels.dynamic)
    dynamic = keyframe_model.subset(labels.dynamic)
    return static, dynamic, labels


def write_debug_csv(labels: MotionLabels, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "delta", "scale_change", "err", "label"])
        for i in range(labels.ids.size):
            writer.writerow([
                int(labels.ids[i]),
                f"{labels.delta[i]:.6g}",
                f"{labels.scale_change[i]:.6g}",
                f"{labels.err[i]:.6g}",
                "dynamic" if labels.dynamic[i] else "static",
            ])
