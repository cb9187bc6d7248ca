"""Step through the dual-line sweep on a tiny input and print each report.

Three points lie near the line y = 2x + 1 in frames 1..3; a fourth point in
frame 2 is off the line.  Every point becomes a strip between two parallel
dual lines, and the sweep visits each crossing once.
"""

import numpy as np

from tracksweep.arrangement import (build_offset_arrangement, cell_witness, elementary_step,
                                    init_sweep, is_report, update_consensus)
from tracksweep.geometry import PointSet, dual_point_to_line

ps = PointSet([0.0, 1.0, 2.0, 1.5], [1.1, 2.9, 5.0, 9.0], [1, 2, 3, 2])
eps = 0.5
lines = build_offset_arrangement(ps, eps=eps)
for k, l in enumerate(lines):
    print(f"line {k}: point {l.source_id} {l.kind.name:5s} c = {l.line.m:g} * p + {l.line.c:g}")

m = np.array([l.line.m for l in lines])
c = np.array([l.line.c for l in lines])
state, cs = init_sweep(lines)
print("initial frame counts per row:", [int(z) for z in cs.Z])
while (ev := elementary_step(state)) is not None:
    update_consensus(cs, lines, ev)
    if is_report(lines, ev, cs):
        line = dual_point_to_line(cell_witness(m, c, ev.p, ev.q))
        print(f"step {state.step_count:2d}: cell holds points {cs.members(ev.n)}, "
              f"e.g. y = {line.m:.3f} x + {line.c:.3f}")
print(f"{state.step_count} steps for {len(ps)} points (2N^2 - 2N = {2 * len(ps) ** 2 - 2 * len(ps)})")
