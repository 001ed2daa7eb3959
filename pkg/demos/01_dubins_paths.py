#!/usr/bin/env python3
"""Plan and plot bounded-curvature paths in 2D and 3D.

Walks through the path primitives: the six-word planar solver, the
constant-pitch shortcut that can violate pitch limits, and the decoupled
3D path that respects them.  Writes dubins_paths.png next to this script.
"""

import math
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from viewplan import Configuration, VehicleParams, plan_2d, plan_3d, \
    plan_modified_2d, sample_path

HERE = pathlib.Path(__file__).parent
vehicle = VehicleParams(rho_min=40.0, gamma_min=-math.pi / 12, gamma_max=math.pi / 9)

# A planar path between two poses: the solver picks the cheapest of the
# six turn/straight words.
start, goal = (0.0, 0.0, math.pi / 2), (300.0, 120.0, 0.0)
planar = plan_2d(start, goal, vehicle.rho_min)
print(f"planar {start} -> {goal}: word {planar.word}, length {planar.length:.1f} m")

# The same climb connected two ways.  The constant-pitch variant is far
# shorter here but demands a 50-degree climb; the decoupled 3D path stays
# inside the pitch envelope by spending length.
q1 = Configuration(0, 0, 0, math.pi / 6, 0)
q2 = Configuration(0, 300, 400, 0, 0)
shortcut = plan_modified_2d(q1, q2, vehicle)
full3d = plan_3d(q1, q2, vehicle)
print(f"constant-pitch length {shortcut.length:.0f} m at "
      f"{math.degrees(shortcut.gamma_c):.1f} deg pitch "
      f"(feasible: {shortcut.feasible})")
print(f"3D path length {full3d.length:.0f} m with pitch kept in "
      f"[{math.degrees(vehicle.gamma_min):.0f}, "
      f"{math.degrees(vehicle.gamma_max):.0f}] deg")

fig = plt.figure(figsize=(11, 4.5))
ax = fig.add_subplot(1, 2, 1)
pts = np.array([[c.x, c.y] for c in sample_path(planar, 2.0)])
ax.plot(pts[:, 0], pts[:, 1], "b-")
ax.plot(*start[:2], "go")
ax.plot(*goal[:2], "rs")
ax.set_aspect("equal")
ax.set_title(f"planar {planar.word}, {planar.length:.0f} m")
ax.set_xlabel("east (m)")
ax.set_ylabel("north (m)")

ax = fig.add_subplot(1, 2, 2, projection="3d")
samples = sample_path(full3d, 5.0)
xyz = np.array([[c.x, c.y, c.z] for c in samples])
ax.plot(xyz[:, 0], xyz[:, 1], xyz[:, 2], "g-", label=f"3D, {full3d.length:.0f} m")
flat = sample_path(shortcut.path2, 5.0)
frac = np.linspace(0, 1, len(flat))
ax.plot([c.x for c in flat], [c.y for c in flat],
        frac * (q2.z - q1.z),
        "r--", label=f"constant pitch, {shortcut.length:.0f} m (infeasible)")
ax.legend()
ax.set_title("climbing connection")

fig.tight_layout()
out = HERE / "dubins_paths.png"
fig.savefig(out, dpi=110)
print(f"wrote {out}")
