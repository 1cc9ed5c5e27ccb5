"""Differentiable splat renderer: depth-sorted alpha compositing with analytic gradients.

The forward pass projects every Gaussian to a 2D footprint (truncated at the
3-sigma ellipse), sorts contributions per pixel by camera-space depth (ties by
id), and composites front to back. The backward pass returns per-primitive
gradients for any subset of {center, scale, rotation, appearance, opacity}.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidInputError
from .gaussians import (
    CameraView,
    GaussianSet,
    SH_C1,
    covariance_from_rs,
    projection_jacobian,
    quat_normalize,
    quat_to_rotation,
    sh_basis,
)

LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class RenderConfig:
    background: tuple = (0.0, 0.0, 0.0)
    near: float = 0.01
    truncation_sigma: float = 3.0  # footprint cutoff (Mahalanobis radius)
    alpha_stop: float = 0.9999     # stop compositing once accumulated alpha exceeds this
    min_weight: float = 1e-12      # drop contributions below this splat weight


DEFAULT_CONFIG = RenderConfig()

ALL_ATTRS = ("center", "scale", "rotation", "appearance", "opacity")


@dataclass
class SparseWeights:
    """Per-(gaussian, pixel) blend weights, stored front-to-back within each pixel."""

    gaussian_ids: np.ndarray  # (m,)
    pixels: np.ndarray        # (m,) flat pixel index, row-major
    weights: np.ndarray       # (m,) actual compositing weight in [0, 1]

    def sum_per_pixel(self, n_pixels):
        out = np.zeros(n_pixels)
        np.add.at(out, self.pixels, self.weights)
        return out

    def sum_per_gaussian(self):
        totals = {}
        for gid in np.unique(self.gaussian_ids):
            totals[int(gid)] = float(self.weights[self.gaussian_ids == gid].sum())
        return totals


@dataclass
class RenderOutput:
    image: np.ndarray          # (H, W, 3) in [0, 1]
    blend_weights: SparseWeights
    alpha: np.ndarray          # (H, W) accumulated alpha

    @property
    def depth_order(self):
        """Front-to-back contributing ids per pixel, as {flat pixel: [ids]}."""
        order = {}
        for pix, gid in zip(self.blend_weights.pixels, self.blend_weights.gaussian_ids):
            order.setdefault(int(pix), []).append(int(gid))
        return order


@dataclass
class RenderGrad:
    d_center: np.ndarray      # (n, 3)
    d_scale: np.ndarray       # (n, 3)
    d_rotation: np.ndarray    # (n, 4)
    d_appearance: np.ndarray  # (n, 3, k)
    d_opacity: np.ndarray     # (n,)


def _splat_geometry(centers, rotations, scales, appearance, opacities, view, cfg):
    """Project all primitives; returns per-gaussian quantities for the live subset."""
    n = centers.shape[0]
    cam = view.to_camera(centers)
    z = cam[:, 2]
    live = z > cfg.near
    idx = np.nonzero(live)[0]
    cam = cam[idx]
    z = z[idx]

    proj = np.stack(
        [view.fx * cam[:, 0] / z + view.cx, view.fy * cam[:, 1] / z + view.cy], axis=-1
    )
    rot = quat_to_rotation(rotations[idx])
    cov3 = (rot * scales[idx][:, None, :] ** 2) @ np.swapaxes(rot, 1, 2)
    cam_cov = np.einsum("ab,nbc,dc->nad", view.rotation, cov3, view.rotation)
    jac = projection_jacobian(view, cam)
    cov2 = np.einsum("nab,nbc,ndc->nad", jac, cam_cov, jac)

    # per-gaussian view direction and SH color (clipped to [0, 1])
    rel = centers[idx] - view.camera_center
    dist = np.linalg.norm(rel, axis=1)
    dirs = rel / dist[:, None]
    basis = sh_basis(dirs, appearance.shape[2])
    raw_color = np.einsum("nck,nk->nc", appearance[idx], basis)
    color = np.clip(raw_color, 0.0, 1.0)

    return {
        "idx": idx,
        "cam": cam,
        "z": z,
        "proj": proj,
        "rot": rot,
        "cam_cov": cam_cov,
        "jac": jac,
        "cov2": cov2,
        "dirs": dirs,
        "dist": dist,
        "basis": basis,
        "raw_color": raw_color,
        "color": color,
    }


def _gather_contributions(geom, opacities, view, cfg):
    """Enumerate (gaussian, pixel) pairs inside the truncation ellipse.

    Returns flat arrays sorted by (pixel, depth, id) plus cached per-pair values.
    """
    cov2 = geom["cov2"]
    proj = geom["proj"]
    n = cov2.shape[0]
    if n == 0:
        return None

    a = cov2[:, 0, 0]
    b = cov2[:, 0, 1]
    c = cov2[:, 1, 1]
    det = a * c - b * b
    tr = a + c
    lam_max = 0.5 * tr + np.sqrt(np.maximum(0.25 * tr * tr - det, 0.0))
    radius = cfg.truncation_sigma * np.sqrt(np.maximum(lam_max, 0.0))

    x0 = np.maximum(np.ceil(proj[:, 0] - radius), 0).astype(np.int64)
    x1 = np.minimum(np.floor(proj[:, 0] + radius), view.width - 1).astype(np.int64)
    y0 = np.maximum(np.ceil(proj[:, 1] - radius), 0).astype(np.int64)
    y1 = np.minimum(np.floor(proj[:, 1] + radius), view.height - 1).astype(np.int64)
    w_box = x1 - x0 + 1
    h_box = y1 - y0 + 1
    ok = (w_box > 0) & (h_box > 0) & (det > 0)
    area = np.where(ok, w_box * h_box, 0)
    total = int(area.sum())
    if total == 0:
        return None

    gi = np.repeat(np.arange(n), area)
    offsets = np.concatenate([[0], np.cumsum(area)[:-1]])
    within = np.arange(total) - np.repeat(offsets, area)
    px = x0[gi] + within % w_box[gi]
    py = y0[gi] + within // w_box[gi]

    dx = px - proj[gi, 0]
    dy = py - proj[gi, 1]
    inv_det = 1.0 / det
    qa = (c * inv_det)[gi]
    qb = (-b * inv_det)[gi]
    qc = (a * inv_det)[gi]
    maha = qa * dx * dx + 2 * qb * dx * dy + qc * dy * dy
    g = np.exp(-0.5 * maha)
    alpha_eff = opacities[geom["idx"][gi]] * g

    keep = (maha <= cfg.truncation_sigma**2) & (alpha_eff >= cfg.min_weight)
    gi = gi[keep]
    px = px[keep]
    py = py[keep]
    dx = dx[keep]
    dy = dy[keep]
    g = g[keep]
    alpha_eff = alpha_eff[keep]
    if gi.size == 0:
        return None

    pix = py * view.width + px
    order = np.lexsort((geom["idx"][gi], geom["z"][gi], pix))
    gi = gi[order]
    pix = pix[order]
    dx = dx[order]
    dy = dy[order]
    g = g[order]
    alpha_eff = alpha_eff[order]

    # rank of each contribution within its pixel (0 = front)
    starts = np.concatenate([[True], pix[1:] != pix[:-1]])
    seg_start = np.repeat(np.nonzero(starts)[0], np.diff(np.concatenate([np.nonzero(starts)[0], [pix.size]])))
    rank = np.arange(pix.size) - seg_start

    return {
        "gi": gi,
        "pix": pix,
        "dx": dx,
        "dy": dy,
        "g": g,
        "w": alpha_eff,
        "rank": rank,
    }


def _composite(contrib, geom, view, cfg):
    """Front-to-back compositing; returns image, transmittance, per-pair weights."""
    n_pix = view.width * view.height
    image = np.zeros((n_pix, 3))
    trans = np.ones(n_pix)
    bg = np.asarray(cfg.background, dtype=np.float64)

    if contrib is None:
        image += bg
        return image, trans, None, None

    rank = contrib["rank"]
    by_rank = np.argsort(rank, kind="stable")
    bounds = np.searchsorted(rank[by_rank], np.arange(rank.max() + 2))
    t_before = np.zeros(rank.size)
    colors = geom["color"][contrib["gi"]]

    for r in range(rank.max() + 1):
        sel = by_rank[bounds[r] : bounds[r + 1]]
        p = contrib["pix"][sel]
        tb = trans[p]
        t_before[sel] = tb
        w = contrib["w"][sel]
        kept = tb > 1.0 - cfg.alpha_stop
        cw = np.where(kept, tb * w, 0.0)
        image[p] += cw[:, None] * colors[sel]
        trans[p] = tb * (1.0 - w)

    weight = t_before * contrib["w"]
    weight[t_before <= 1.0 - cfg.alpha_stop] = 0.0
    image += trans[:, None] * bg
    return image, trans, t_before, weight


def render(gaussians: GaussianSet, view: CameraView, cfg: RenderConfig = DEFAULT_CONFIG) -> RenderOutput:
    """Render a Gaussian set; deterministic in the set contents (not their order)."""
    return render_arrays(
        gaussians.centers,
        gaussians.rotations,
        gaussians.scales,
        gaussians.appearance,
        gaussians.opacities,
        view,
        cfg,
        ids=gaussians.ids,
    )


def render_cached(centers, rotations, scales, appearance, opacities, view, cfg=DEFAULT_CONFIG, ids=None):
    """Forward pass returning (RenderOutput, cache) so a backward pass can reuse it."""
    if view.width < 8 or view.height < 8:
        raise InvalidInputError("resolution must be at least 8x8")
    n = centers.shape[0]
    if ids is None:
        ids = np.arange(n, dtype=np.int64)
    geom = _splat_geometry(centers, rotations, scales, appearance, opacities, view, cfg)
    contrib = _gather_contributions(geom, opacities, view, cfg)
    image, trans, t_before, weight = _composite(contrib, geom, view, cfg)

    if contrib is None:
        sparse = SparseWeights(
            np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0)
        )
    else:
        visible = weight > 0
        sparse = SparseWeights(
            ids[geom["idx"][contrib["gi"][visible]]],
            contrib["pix"][visible],
            weight[visible],
        )
    out = RenderOutput(
        image=image.reshape(view.height, view.width, 3),
        blend_weights=sparse,
        alpha=(1.0 - trans).reshape(view.height, view.width),
    )
    cache = {
        "geom": geom,
        "contrib": contrib,
        "t_before": t_before,
        "n": n,
        "view": view,
        "arrays": (centers, rotations, scales, appearance, opacities),
    }
    return out, cache


def render_arrays(centers, rotations, scales, appearance, opacities, view, cfg=DEFAULT_CONFIG, ids=None):
    return render_cached(centers, rotations, scales, appearance, opacities, view, cfg, ids)[0]


def render_backward(
    gaussians: GaussianSet,
    view: CameraView,
    d_image: np.ndarray,
    cfg: RenderConfig = DEFAULT_CONFIG,
    attrs=ALL_ATTRS,
) -> RenderGrad:
    """Analytic gradients of sum(d_image * image) w.r.t. the enabled attributes."""
    return render_backward_arrays(
        gaussians.centers,
        gaussians.rotations,
        gaussians.scales,
        gaussians.appearance,
        gaussians.opacities,
        view,
        d_image,
        cfg,
        attrs,
    )


def render_backward_arrays(
    centers, rotations, scales, appearance, opacities, view, d_image, cfg=DEFAULT_CONFIG, attrs=ALL_ATTRS
):
    _, cache = render_cached(centers, rotations, scales, appearance, opacities, view, cfg)
    return render_backward_cached(cache, d_image, cfg, attrs)


def render_backward_cached(cache, d_image, cfg=DEFAULT_CONFIG, attrs=ALL_ATTRS):
    """Backward pass reusing the forward cache from render_cached."""
    view = cache["view"]
    centers, rotations, scales, appearance, opacities = cache["arrays"]
    n = cache["n"]
    d_image = np.asarray(d_image, dtype=np.float64)
    if d_image.shape != (view.height, view.width, 3):
        raise InvalidInputError("d_image shape does not match the view resolution")

    grad = RenderGrad(
        d_center=np.zeros((n, 3)),
        d_scale=np.zeros((n, 3)),
        d_rotation=np.zeros((n, 4)),
        d_appearance=np.zeros_like(appearance),
        d_opacity=np.zeros(n),
    )
    geom = cache["geom"]
    contrib = cache["contrib"]
    t_before = cache["t_before"]
    if contrib is None or not np.any(d_image):
        return grad

    gi = contrib["gi"]
    pix = contrib["pix"]
    w = contrib["w"]
    g = contrib["g"]
    rank = contrib["rank"]
    colors = geom["color"][gi]
    kept = t_before > 1.0 - cfg.alpha_stop

    # suffix composite: color rendered behind each contribution, background included
    bg = np.asarray(cfg.background, dtype=np.float64)
    n_pix = view.width * view.height
    behind_acc = np.tile(bg, (n_pix, 1))
    behind = np.zeros((rank.size, 3))
    by_rank = np.argsort(rank, kind="stable")
    bounds = np.searchsorted(rank[by_rank], np.arange(rank.max() + 2))
    for r in range(rank.max(), -1, -1):
        sel = by_rank[bounds[r] : bounds[r + 1]]
        sel = sel[kept[sel]]
        p = pix[sel]
        behind[sel] = behind_acc[p]
        behind_acc[p] = (
            w[sel, None] * colors[sel] + (1.0 - w[sel, None]) * behind_acc[p]
        )

    d_flat = d_image.reshape(n_pix, 3)
    d_pix = d_flat[pix]
    cw = np.where(kept, t_before * w, 0.0)

    # color path
    d_color_pairs = cw[:, None] * d_pix
    n_live = geom["idx"].size
    d_color = np.zeros((n_live, 3))
    np.add.at(d_color, gi, d_color_pairs)

    # weight path: dI/dw = T_before * (color - behind)
    d_w = np.where(kept, t_before * np.einsum("mc,mc->m", d_pix, colors - behind), 0.0)
    d_alpha_eff = d_w  # alias for clarity below
    d_g = d_alpha_eff * opacities[geom["idx"][gi]]
    d_opacity_pairs = d_alpha_eff * g
    d_maha = -0.5 * g * d_g

    cov2 = geom["cov2"]
    a = cov2[:, 0, 0][gi]
    b = cov2[:, 0, 1][gi]
    c = cov2[:, 1, 1][gi]
    det = (a * c - b * b)
    qa = c / det
    qb = -b / det
    qc = a / det
    dx = contrib["dx"]
    dy = contrib["dy"]
    qd_x = qa * dx + qb * dy
    qd_y = qb * dx + qc * dy

    # maha = d^T Q d;  d = pixel - proj_center
    d_proj_pairs = np.stack([-2.0 * d_maha * qd_x, -2.0 * d_maha * qd_y], axis=-1)
    # dL/dSigma' = -d_maha * (Q d)(Q d)^T
    d_cov2_pairs = np.empty((rank.size, 2, 2))
    d_cov2_pairs[:, 0, 0] = -d_maha * qd_x * qd_x
    d_cov2_pairs[:, 0, 1] = -d_maha * qd_x * qd_y
    d_cov2_pairs[:, 1, 0] = d_cov2_pairs[:, 0, 1]
    d_cov2_pairs[:, 1, 1] = -d_maha * qd_y * qd_y

    d_proj = np.zeros((n_live, 2))
    d_cov2 = np.zeros((n_live, 2, 2))
    d_opac_live = np.zeros(n_live)
    np.add.at(d_proj, gi, d_proj_pairs)
    np.add.at(d_cov2, gi, d_cov2_pairs)
    np.add.at(d_opac_live, gi, d_opacity_pairs)

    idx = geom["idx"]
    cam = geom["cam"]
    jac = geom["jac"]
    z = geom["z"]

    # center path through the projection and the Jacobian inside Sigma'
    d_cam = np.einsum("nab,na->nb", jac, d_proj)
    jb = jac @ geom["cam_cov"]  # (n, 2, 3)
    d_jac = 2.0 * np.einsum("nab,nbc->nac", d_cov2, jb)
    fx, fy = view.fx, view.fy
    x, y = cam[:, 0], cam[:, 1]
    d_cam[:, 0] += d_jac[:, 0, 2] * (-fx / z**2)
    d_cam[:, 1] += d_jac[:, 1, 2] * (-fy / z**2)
    d_cam[:, 2] += (
        d_jac[:, 0, 0] * (-fx / z**2)
        + d_jac[:, 1, 1] * (-fy / z**2)
        + d_jac[:, 0, 2] * (2 * fx * x / z**3)
        + d_jac[:, 1, 2] * (2 * fy * y / z**3)
    )
    d_center_live = d_cam @ view.rotation

    # appearance path (clip subgradient) and its view-direction dependence
    raw = geom["raw_color"]
    clip_mask = ((raw > 0.0) & (raw < 1.0)).astype(np.float64)
    d_raw = d_color * clip_mask
    d_appearance_live = np.einsum("nc,nk->nck", d_raw, geom["basis"])
    k = appearance.shape[2]
    if k > 1:
        f = appearance[idx]
        d_dir = np.stack(
            [
                -SH_C1 * np.einsum("nc,nc->n", d_raw, f[:, :, 3]),
                -SH_C1 * np.einsum("nc,nc->n", d_raw, f[:, :, 1]),
                SH_C1 * np.einsum("nc,nc->n", d_raw, f[:, :, 2]),
            ],
            axis=-1,
        )
        dirs = geom["dirs"]
        proj_perp = d_dir - dirs * np.einsum("nc,nc->n", d_dir, dirs)[:, None]
        d_center_live += proj_perp / geom["dist"][:, None]

    # covariance path back to world space: Sigma' = J W Sigma W^T J^T
    d_cam_cov = np.einsum("nba,nbc,ncd->nad", jac, d_cov2, jac)
    d_cov3 = np.einsum("ba,nbc,cd->nad", view.rotation, d_cam_cov, view.rotation)

    # Sigma = R D R^T with D = diag(s^2)
    rot = geom["rot"]
    s = scales[idx]
    sym = d_cov3 + np.swapaxes(d_cov3, 1, 2)
    rtgr = np.einsum("nba,nbc,ncd->nad", rot, 0.5 * sym, rot)
    d_scale_live = 2.0 * s * np.einsum("naa->na", rtgr)
    d_rot_mat = np.einsum("nab,nbc->nac", sym, rot * (s[:, None, :] ** 2))

    d_rotation_live = _rotation_matrix_grad_to_quat(rotations[idx], d_rot_mat)

    if "center" in attrs:
        grad.d_center[idx] = d_center_live
    if "scale" in attrs:
        grad.d_scale[idx] = d_scale_live
    if "rotation" in attrs:
        grad.d_rotation[idx] = d_rotation_live
    if "appearance" in attrs:
        grad.d_appearance[idx] = d_appearance_live
    if "opacity" in attrs:
        grad.d_opacity[idx] = d_opac_live
    return grad


def _rotation_matrix_grad_to_quat(quats, d_rot):
    """Chain dL/dR back to raw quaternion components, normalization included."""
    norm = np.linalg.norm(quats, axis=1, keepdims=True)
    qh = quats / norm
    w, x, y, z = qh[:, 0], qh[:, 1], qh[:, 2], qh[:, 3]
    zeros = np.zeros_like(w)

    def m(rows):
        return 2.0 * np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)

    d_r_dw = m([[zeros, -z, y], [z, zeros, -x], [-y, x, zeros]])
    d_r_dx = m([[zeros, y, z], [y, -2 * x, -w], [z, w, -2 * x]])
    d_r_dy = m([[-2 * y, x, w], [x, zeros, z], [-w, z, -2 * y]])
    d_r_dz = m([[-2 * z, -w, x], [w, -2 * z, y], [x, y, zeros]])

    d_qh = np.stack(
        [np.einsum("nab,nab->n", d_rot, d) for d in (d_r_dw, d_r_dx, d_r_dy, d_r_dz)],
        axis=-1,
    )
    # through normalization: dqh/dq = (I - qh qh^T) / |q|
    return (d_qh - qh * np.einsum("na,na->n", d_qh, qh)[:, None]) / norm


def _ssim_window(size=11, sigma=1.5):
    r = np.arange(size) - (size - 1) / 2
    k = np.exp(-0.5 * (r / sigma) ** 2)
    k /= k.sum()
    return np.outer(k, k)


def _valid_corr(x, w):
    return np.einsum("hwij,ij->hw", sliding_window_view(x, w.shape), w)


def _valid_corr_adjoint(d, w, shape):
    pad = w.shape[0] - 1
    padded = np.pad(d, pad)
    return np.einsum("hwij,ij->hw", sliding_window_view(padded, w.shape), w[::-1, ::-1])


def ssim_with_grad(image, target, data_range=1.0, k1=0.01, k2=0.03):
    """Mean SSIM over valid 11x11 Gaussian windows (sigma 1.5) and d(mssim)/d(image).

    Channels are scored independently and averaged. For images smaller than the
    window, the window shrinks to the largest odd size that fits.
    """
    image = np.asarray(image, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    size = min(11, image.shape[0], image.shape[1])
    if size % 2 == 0:
        size -= 1
    w = _ssim_window(size)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2

    total = 0.0
    grad = np.zeros_like(image)
    n_ch = image.shape[2]
    for ch in range(n_ch):
        x = image[:, :, ch]
        y = target[:, :, ch]
        ux = _valid_corr(x, w)
        uy = _valid_corr(y, w)
        uxx = _valid_corr(x * x, w)
        uyy = _valid_corr(y * y, w)
        uxy = _valid_corr(x * y, w)
        vx = uxx - ux * ux
        vy = uyy - uy * uy
        vxy = uxy - ux * uy
        a1 = 2 * ux * uy + c1
        a2 = 2 * vxy + c2
        b1 = ux * ux + uy * uy + c1
        b2 = vx + vy + c2
        d = b1 * b2
        s = a1 * a2 / d
        total += s.mean()

        scale = 1.0 / (s.size * n_ch)
        d_s = np.full_like(s, scale)
        d_ux = d_s * (2 * uy * a2 / d - 2 * uy * a1 / d - s * (2 * ux / b1) + s * (2 * ux / b2))
        d_uxx = d_s * (-s / b2)
        d_uxy = d_s * (2 * a1 / d)
        grad[:, :, ch] = (
            _valid_corr_adjoint(d_ux, w, x.shape)
            + _valid_corr_adjoint(d_uxx, w, x.shape) * 2 * x
            + _valid_corr_adjoint(d_uxy, w, x.shape) * y
        )
    return total / n_ch, grad


def d_ssim(image, target, data_range=1.0):
    """(1 - SSIM)/2 and its gradient w.r.t. image."""
    score, grad = ssim_with_grad(image, target, data_range)
    return 0.5 * (1.0 - score), -0.5 * grad


def ssim(image, target, data_range=1.0):
    return ssim_with_grad(image, target, data_range)[0]


def color_loss(image, target, l1_weight: float = 0.2):
    """Photometric loss: l1_weight * mean-L1 + (1 - l1_weight) * D-SSIM.

    Returns (loss, gradient w.r.t. image).
    """
    image = np.asarray(image, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if image.shape != target.shape:
        raise InvalidInputError("image and target shapes differ")
    if not 0.0 <= l1_weight <= 1.0:
        raise InvalidInputError("l1_weight must lie in [0, 1]")
    diff = image - target
    l1 = np.mean(np.abs(diff))
    d_l1 = np.sign(diff) / diff.size
    if l1_weight == 1.0:
        return l1, d_l1
    dssim_val, d_dssim = d_ssim(image, target)
    loss = l1_weight * l1 + (1.0 - l1_weight) * dssim_val
    d = l1_weight * d_l1 + (1.0 - l1_weight) * d_dssim
    return loss, d


def image_gradient_magnitude(image):
    """Per-pixel luminance gradient magnitude via central differences, edges replicated."""
    image = np.asarray(image, dtype=np.float64)
    luma = image @ LUMA if image.ndim == 3 else image
    padded = np.pad(luma, 1, mode="edge")
    gx = 0.5 * (padded[1:-1, 2:] - padded[1:-1, :-2])
    gy = 0.5 * (padded[2:, 1:-1] - padded[:-2, 1:-1])
    return np.sqrt(gx * gx + gy * gy)


def psnr(image, target, data_range=1.0):
    mse = np.mean((np.asarray(image, dtype=np.float64) - np.asarray(target, dtype=np.float64)) ** 2)
    if mse == 0:
        return np.inf
    return 10.0 * np.log10(data_range**2 / mse)
