# pilot harness for the labeled decoupling scenes (not shipped; mirrored in tests once final)
import time

import numpy as np

from splatstream.decouple import DecoupleConfig, decouple
from splatstream.synth import ClusterSpec, SynthSpec, Trajectory, generate

OP = 0.7


def scene_specs():
    return {
        "translate": SynthSpec(
            static_clusters=(ClusterSpec(100, (0.0, 0.0, -0.04), 0.2, (0.25, 0.5, 0.75), 0.028, OP),
                             ClusterSpec(50, (0.2, -0.15, 0.05), 0.09, (0.8, 0.6, 0.2), 0.028, OP)),
            dynamic_clusters=((ClusterSpec(50, (-0.16, 0.13, 0.3), 0.1, (0.85, 0.3, 0.3), 0.055, OP),
                               Trajectory(velocity=(0.055, -0.024, 0.014))),),
            n_frames=2, seed=5, camera_radius=0.8, camera_heights=(0.15, 0.45, 0.15, 0.75), focal=70.0,
        ),
        "two_movers": SynthSpec(
            static_clusters=(ClusterSpec(110, (0.02, -0.02, -0.05), 0.21, (0.3, 0.45, 0.7), 0.028, OP),),
            dynamic_clusters=(
                (ClusterSpec(40, (-0.18, 0.1, 0.3), 0.09, (0.85, 0.35, 0.3), 0.055, OP),
                 Trajectory(velocity=(0.075, -0.045, 0.015))),
                (ClusterSpec(40, (0.2, 0.14, 0.28), 0.09, (0.3, 0.8, 0.4), 0.055, OP),
                 Trajectory(velocity=(-0.068, 0.03, 0.03))),
            ),
            n_frames=2, seed=11, camera_radius=0.8, camera_heights=(0.2, 0.5, 0.2, 0.7), focal=70.0,
        ),
        "descent": SynthSpec(
            static_clusters=(ClusterSpec(90, (0.0, 0.05, -0.06), 0.19, (0.25, 0.5, 0.75), 0.03, OP),
                             ClusterSpec(45, (-0.22, -0.16, 0.08), 0.08, (0.75, 0.65, 0.25), 0.03, OP)),
            dynamic_clusters=((ClusterSpec(55, (0.16, 0.12, 0.34), 0.11, (0.85, 0.3, 0.35), 0.055, OP),
                               Trajectory(velocity=(0.05, -0.04, -0.03), spin_axis=(0, 0, 1), spin_rate=0.12)),),
            n_frames=2, seed=17, camera_radius=0.8, camera_heights=(0.15, 0.45, 0.15, 0.75), focal=70.0,
        ),
        "static_heavy": SynthSpec(
            static_clusters=(ClusterSpec(70, (0.0, 0.0, -0.06), 0.16, (0.25, 0.5, 0.75), 0.032, OP),
                             ClusterSpec(50, (0.24, -0.16, 0.04), 0.08, (0.8, 0.6, 0.2), 0.032, OP),
                             ClusterSpec(50, (-0.24, -0.16, 0.04), 0.08, (0.4, 0.7, 0.5), 0.032, OP)),
            dynamic_clusters=((ClusterSpec(35, (0.0, 0.22, 0.44), 0.08, (0.9, 0.35, 0.3), 0.05, OP),
                               Trajectory(velocity=(-0.08, 0.036, 0.03))),),
            n_frames=2, seed=23, camera_radius=0.95, camera_heights=(0.25, 0.5, 0.35, 0.6), focal=70.0,
        ),
        "diagonal": SynthSpec(
            static_clusters=(ClusterSpec(95, (-0.05, -0.05, -0.02), 0.2, (0.3, 0.5, 0.7), 0.03, OP),
                             ClusterSpec(45, (0.24, 0.12, 0.02), 0.08, (0.75, 0.6, 0.25), 0.03, OP)),
            dynamic_clusters=((ClusterSpec(45, (-0.05, 0.16, 0.3), 0.09, (0.85, 0.4, 0.3), 0.055, OP),
                               Trajectory(velocity=(0.04, -0.04, 0.02))),),
            n_frames=2, seed=29, camera_radius=0.8, camera_heights=(0.15, 0.5, 0.3, 0.7), focal=70.0,
        ),
    }


def main():
    cfg = DecoupleConfig(lookahead_frame=2, finetune_iters=450, finetune_lr=0.005)
    n_pass = 0
    for name, spec in scene_specs().items():
        scene = generate(spec)
        t0 = time.time()
        _, _, labels = decouple(scene.keyframe, scene.views(2), cfg)
        gt = scene.dynamic_label
        pred = labels.dynamic
        tp = (pred & gt).sum()
        fp = (pred & ~gt).sum()
        fn = (~pred & gt).sum()
        prec = tp / max(tp + fp, 1)
        rec = tp / max(tp + fn, 1)
        ok = prec >= 0.95 and rec >= 0.95
        n_pass += ok
        print(f"{name:13s}: P {prec:.3f} R {rec:.3f} (tp={tp} fp={fp} fn={fn}) "
              f"{'PASS' if ok else 'FAIL'} | {time.time()-t0:.0f}s", flush=True)
    print(f"{n_pass}/5 pass")


if __name__ == "__main__":
    main()
