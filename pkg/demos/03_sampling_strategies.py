#!/usr/bin/env python3
"""Compare the four configuration-sampling strategies on one scene.

Shows where each strategy puts its candidate configurations: overhead
points at the shared best altitude, boundary points of the optimized
cross-section, surface-uniform random points, floor-perimeter points, and
perimeter points spread over a global altitude grid.  Writes
sampling_strategies.png.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from viewplan import (SamplingParams, ScenarioParams, build_visibility_mesh,
                      generate_city, optimized_altitude, place_targets,
                      sample_edge_3d, sample_global_weighted_face,
                      sample_overhead, sample_random_face)
from viewplan.sampling import sample_entry_pose_all

HERE = pathlib.Path(__file__).parent

scen = ScenarioParams(n_targets=3, seed=11)
env = generate_city(scen)
targets = place_targets(env, scen)
volumes = [build_visibility_mesh(t, env, scen.sensor) for t in targets]
print(f"scene: {len(env.objects)} buildings, altitude band "
      f"[{env.z_min:.0f}, {env.z_max:.0f}] m")

z_star = optimized_altitude(volumes, n_slice=8)
print(f"optimized shared altitude: {z_star:.1f} m")

params = SamplingParams(n_pts=12, n_psi=1, n_gamma=1, n_slice=6, seed=2)
strategies = {
    "overhead": sample_overhead(targets, z_star, 4),
    "entry pose @ z*": sample_entry_pose_all(volumes, z_star, 12, 1),
    "random face": sample_random_face(volumes, params),
    "floor edge": sample_edge_3d(volumes, params),
    "global weighted": sample_global_weighted_face(volumes, params),
}

fig = plt.figure(figsize=(15, 3.4))
for k, (name, samples) in enumerate(strategies.items()):
    ax = fig.add_subplot(1, 5, k + 1, projection="3d")
    for ci, cluster in enumerate(samples.clusters):
        pts = np.array([[c.x, c.y, c.z] for c in cluster])
        ax.scatter(pts[:, 0], pts[:, 1], pts[:, 2], s=6)
        print(f"  {name}: cluster {ci} has {len(cluster)} configurations, "
              f"z span [{pts[:, 2].min():.0f}, {pts[:, 2].max():.0f}] m")
    for t in targets:
        ax.scatter(*t.position, marker="*", s=60, color="k")
    ax.set_title(name, fontsize=9)
    ax.set_zlim(0, env.z_max)

fig.tight_layout()
out = HERE / "sampling_strategies.png"
fig.savefig(out, dpi=110)
print(f"wrote {out}")
