"""Synthetic desk-scale scenes with labeled motion, rendered by the package renderer.

Every oracle test draws its ground truth from here: cluster membership gives
static/dynamic labels, trajectories are closed-form rigid motions (no
accumulated drift), and target images come from the same renderer the codec
optimizes against, so reconstruction error isolates the pipeline under test.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .gaussians import CameraView, GaussianSet, color_to_sh_dc, quat_multiply, quat_normalize
from .images import write_f32
from .render import DEFAULT_CONFIG, RenderConfig, render


@dataclass(frozen=True)
class ClusterSpec:
    count: int
    center: tuple
    extent: float = 0.25
    color: tuple = (0.7, 0.3, 0.3)
    splat_scale: float = 0.06
    opacity: float = 0.85
    shell: float = 0.6  # inner radius fraction; splats sit near the surface like real reconstructions


@dataclass(frozen=True)
class Trajectory:
    velocity: tuple = (0.0, 0.0, 0.0)  # world units per frame step
    spin_axis: tuple = (0.0, 0.0, 1.0)
    spin_rate: float = 0.0             # radians per frame step about the cluster centroid

    @property
    def is_identity(self):
        return float(np.linalg.norm(self.velocity)) == 0.0 and self.spin_rate == 0.0


@dataclass(frozen=True)
class EmergenceEvent:
    frame: int  # 1-based frame at which the cluster first appears
    cluster: ClusterSpec


@dataclass(frozen=True)
class SynthSpec:
    static_clusters: tuple = ()
    dynamic_clusters: tuple = ()   # (ClusterSpec, Trajectory) pairs
    emergence: tuple = ()
    n_frames: int = 2
    n_cameras: int = 4
    camera_radius: float = 3.2
    camera_heights: tuple = (0.8,)  # cycled over ring positions
    focal: float = 70.0
    width: int = 64
    height: int = 64
    n_coeffs: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.n_frames < 2:
            raise InvalidInputError("a scene needs at least 2 frames")


@dataclass
class SynthScene:
    spec: SynthSpec
    cameras: list                 # CameraView per ring position
    frames: list                  # per frame: ground-truth GaussianSet
    images: list                  # per frame: list of (H, W, 3) arrays, one per camera
    dynamic_label: np.ndarray     # per keyframe primitive, True if its cluster moves
    aabb: np.ndarray              # (2, 3) covering all frames

    @property
    def keyframe(self) -> GaussianSet:
        return self.frames[0]

    def views(self, frame_index):
        """(camera, target image) pairs for a 1-based frame index."""
        return list(zip(self.cameras, self.images[frame_index - 1]))


def look_at_camera(position, target, focal, width, height, up=(0.0, 0.0, 1.0)):
    position = np.asarray(position, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - position
    forward /= np.linalg.norm(forward)
    right = np.cross(up, forward)
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    w2c = np.eye(4)
    w2c[:3, :3] = np.stack([right, down, forward])
    w2c[:3, 3] = -w2c[:3, :3] @ position
    return CameraView(w2c, fx=focal, fy=focal, cx=(width - 1) / 2.0,
                      cy=(height - 1) / 2.0, width=width, height=height)


def camera_ring(spec: SynthSpec):
    cams = []
    for i in range(spec.n_cameras):
        theta = 2.0 * np.pi * i / spec.n_cameras
        pos = (
            spec.camera_radius * np.cos(theta),
            spec.camera_radius * np.sin(theta),
            spec.camera_heights[i % len(spec.camera_heights)],
        )
        cams.append(look_at_camera(pos, (0.0, 0.0, 0.0), spec.focal, spec.width, spec.height))
    return cams


def _axis_angle_quat(axis, angle):
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    half = angle / 2.0
    return np.concatenate([[np.cos(half)], np.sin(half) * axis])


def _make_cluster(spec: ClusterSpec, rng, n_coeffs):
    # compactly supported shell: neighborhoods never straddle clusters with
    # different motion, and every splat stays visible from some view
    raw = rng.normal(size=(spec.count, 3))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    radius = spec.extent * rng.uniform(spec.shell, 1.0, (spec.count, 1))
    centers = np.asarray(spec.center) + raw * radius
    rotations = quat_normalize(rng.normal(size=(spec.count, 4)))
    scales = spec.splat_scale * rng.uniform(0.7, 1.4, (spec.count, 3))
    colors = np.clip(np.asarray(spec.color) + rng.uniform(-0.15, 0.15, (spec.count, 3)), 0.05, 0.95)
    appearance = np.zeros((spec.count, 3, n_coeffs))
    appearance[:, :, 0] = color_to_sh_dc(colors)
    if n_coeffs > 1:
        appearance[:, :, 1:] = rng.normal(0.0, 0.02, (spec.count, 3, n_coeffs - 1))
    opacities = np.clip(spec.opacity + rng.uniform(-0.1, 0.1, spec.count), 0.05, 0.98)
    return centers, rotations, scales, appearance, opacities


def _rigid_pose(base_centers, base_rotations, centroid, traj: Trajectory, steps: int):
    if steps == 0 or traj.is_identity:
        return base_centers.copy(), base_rotations.copy()
    dq = _axis_angle_quat(traj.spin_axis, traj.spin_rate * steps)
    rot = np.array(
        [
            [1 - 2 * (dq[2] ** 2 + dq[3] ** 2), 2 * (dq[1] * dq[2] - dq[0] * dq[3]), 2 * (dq[1] * dq[3] + dq[0] * dq[2])],
            [2 * (dq[1] * dq[2] + dq[0] * dq[3]), 1 - 2 * (dq[1] ** 2 + dq[3] ** 2), 2 * (dq[2] * dq[3] - dq[0] * dq[1])],
            [2 * (dq[1] * dq[3] - dq[0] * dq[2]), 2 * (dq[2] * dq[3] + dq[0] * dq[1]), 1 - 2 * (dq[1] ** 2 + dq[2] ** 2)],
        ]
    )
    offset = np.asarray(traj.velocity) * steps
    centers = centroid + (base_centers - centroid) @ rot.T + offset
    rotations = quat_multiply(dq, base_rotations)
    return centers, rotations


def generate(spec: SynthSpec, render_cfg: RenderConfig = DEFAULT_CONFIG) -> SynthScene:
    rng = np.random.default_rng(spec.seed)
    cams = camera_ring(spec)

    clusters = []  # (arrays..., trajectory or None, first_frame)
    labels = []
    for cs in spec.static_clusters:
        clusters.append((_make_cluster(cs, rng, spec.n_coeffs), None, 1))
        labels.extend([False] * cs.count)
    for cs, traj in spec.dynamic_clusters:
        clusters.append((_make_cluster(cs, rng, spec.n_coeffs), traj, 1))
        labels.extend([not traj.is_identity] * cs.count)
    for ev in spec.emergence:
        clusters.append((_make_cluster(ev.cluster, rng, spec.n_coeffs), None, ev.frame))

    frames = []
    for t in range(1, spec.n_frames + 1):
        parts = []
        next_id = 0
        for (arrays, traj, first_frame) in clusters:
            centers, rotations, scales, appearance, opacities = arrays
            if t < first_frame:
                next_id += centers.shape[0]
                continue
            if traj is not None:
                centroid = centers.mean(axis=0)
                centers, rotations = _rigid_pose(centers, rotations, centroid, traj, t - 1)
            ids = np.arange(next_id, next_id + centers.shape[0], dtype=np.int64)
            next_id += centers.shape[0]
            parts.append(GaussianSet(centers, rotations, scales, appearance, opacities, ids))
        frames.append(GaussianSet.concatenate(parts))

    images = [[render(fr, cam, render_cfg).image for cam in cams] for fr in frames]

    all_centers = np.concatenate([fr.centers for fr in frames])
    lo = all_centers.min(axis=0)
    hi = all_centers.max(axis=0)
    pad = np.maximum((hi - lo) * 0.1, 0.05)
    aabb = np.stack([lo - pad, hi + pad])

    return SynthScene(
        spec=spec,
        cameras=cams,
        frames=frames,
        images=images,
        dynamic_label=np.asarray(labels, dtype=bool),
        aabb=aabb,
    )


def noisy_init_set(scene: SynthScene, rng, center_noise=0.01, scale_jitter=0.1) -> GaussianSet:
    """A perturbed copy of the keyframe, the 'sparse reconstruction' style seed."""
    kf = scene.keyframe
    centers = kf.centers + rng.normal(0.0, center_noise, kf.centers.shape)
    scales = kf.scales * np.exp(rng.normal(0.0, scale_jitter, kf.scales.shape))
    return kf.with_arrays(centers=centers, scales=scales)


def write_manifest(scene: SynthScene, out_dir) -> Path:
    """Persist a scene as the codec's input layout: manifest.json + raw images."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = scene.spec
    frames_meta = []
    for t, per_cam in enumerate(scene.images, start=1):
        views = []
        for ci, (cam, img) in enumerate(zip(scene.cameras, per_cam)):
            name = f"frame{t:04d}_cam{ci}.f32"
            write_f32(out_dir / name, img)
            views.append(
                {
                    "image": name,
                    "world_to_camera": cam.world_to_camera.ravel().tolist(),
                    "fx": cam.fx,
                    "fy": cam.fy,
                    "cx": cam.cx,
                    "cy": cam.cy,
                    "width": cam.width,
                    "height": cam.height,
                }
            )
        frames_meta.append({"views": views})

    kf = scene.keyframe
    np.savez(
        out_dir / "init_points.npz",
        centers=kf.centers,
        rotations=kf.rotations,
        scales=kf.scales,
        appearance=kf.appearance,
        opacities=kf.opacities,
    )
    manifest = {
        "frames": frames_meta,
        "init_points": "init_points.npz",
        "aabb": scene.aabb.tolist(),
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1))
    return path
