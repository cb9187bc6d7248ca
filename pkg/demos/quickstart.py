"""Generate a cluttered scene, find its tracks and score them.

    python demos/quickstart.py [seed]
"""

import sys

from tracksweep import DetectorConfig, SceneConfig, TopK, find_all_tracks_with_vertical, generate_scene, score

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
scene = generate_scene(SceneConfig(frames=5, targets=4, clutter_per_frame=200, seed=seed))
print(f"{len(scene.points)} points over {scene.points.frame_count} frames, {len(scene.gt)} planted targets")

every = find_all_tracks_with_vertical(scene.points, DetectorConfig())
print(f"{len(every)} maximal feasible tracks in total")

best = find_all_tracks_with_vertical(scene.points, DetectorConfig(selection=TopK(4)))
for tr in best:
    print(f"  {len(tr)} points {tr.point_ids}  xy residual {tr.residual_xy:.2f}  tx residual {tr.residual_tx:.2f}"
          f"{'  (swapped axes)' if tr.axis_swapped else ''}")

m = score(scene.gt, best, scene.points)
print(f"track level: recall {m.recall_tau:.3f} precision {m.precision_tau:.3f} F1 {m.f1_tau:.3f}")
print(f"point level: recall {m.recall_d:.3f} precision {m.precision_d:.3f} F1 {m.f1_d:.3f}")
