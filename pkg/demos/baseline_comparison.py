"""Sweep solver against RANSAC and Hough on short, streak-cluttered scenes.

    python demos/baseline_comparison.py [n_scenes]
"""

import sys
import time

from tracksweep import DetectorConfig, SceneConfig, Threshold, find_all_tracks_with_vertical, generate_scene
from tracksweep.detection import HoughConfig, RansacConfig
from tracksweep.evaluation import aggregate, score

n = int(sys.argv[1]) if len(sys.argv) > 1 else 10
scenes = [generate_scene(SceneConfig(frames=5, targets=4, clutter_per_frame=100, dropout_prob=0.05,
                                     clutter_mode="streak", seed=s)) for s in range(n)]
configs = {
    "ts": DetectorConfig(eps1=1.5, eps2=1.5, selection=Threshold(3)),
    "ransac": DetectorConfig(method="ransac", selection=Threshold(3), ransac=RansacConfig(2000, None, 4, 0)),
    "hough": DetectorConfig(method="hough", selection=Threshold(3), hough=HoughConfig(1024, 180, 100, None)),
}
for name, cfg in configs.items():
    t0 = time.perf_counter()
    m = aggregate(score(sc.gt, find_all_tracks_with_vertical(sc.points, cfg), sc.points) for sc in scenes)
    print(f"{name:7s} F1_tau {m.f1_tau:.3f}  recall {m.recall_tau:.3f}  precision {m.precision_tau:.3f}"
          f"  ({time.perf_counter() - t0:.1f}s)")
