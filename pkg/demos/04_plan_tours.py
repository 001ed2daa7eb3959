#!/usr/bin/env python3
"""Plan complete inspection tours with several algorithms and compare.

Runs the constant-altitude overhead tour, the constant-altitude boundary
tour, the full 3D pipeline with exact path costs, and the lower-bound
heuristic, then renders them side by side in plan_tours.png.
"""

import pathlib
import time

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from viewplan import (ScenarioParams, VehicleParams, build_visibility_mesh,
                      generate_city, place_targets, plan_with_algorithm,
                      sample_path)

HERE = pathlib.Path(__file__).parent

scen = ScenarioParams(n_targets=4, seed=5)
vehicle = VehicleParams(rho_min=scen.rho_min, gamma_min=-np.pi / 12,
                        gamma_max=np.pi / 9)
env = generate_city(scen)
targets = place_targets(env, scen)
volumes = [build_visibility_mesh(t, env, scen.sensor) for t in targets]

algorithms = ["2D-DTSP-8", "2D-DTSPN-ETRY-8-12",
              "3D-DTSPN-RFAC-8-12", "3D-METSPN-RFAC-8-12"]
fig = plt.figure(figsize=(14, 3.8))
for k, alg in enumerate(algorithms):
    t0 = time.perf_counter()
    tour, _ = plan_with_algorithm(alg, volumes, targets, vehicle, seed=1)
    dt = time.perf_counter() - t0
    print(f"{alg:22s} length {tour.total_length:7.1f} m "
          f"(normalized {tour.normalized_cost:6.2f}) in {dt:5.2f}s")
    ax = fig.add_subplot(1, 4, k + 1, projection="3d")
    for leg in tour.legs:
        pts = np.array([[c.x, c.y, c.z] for c in sample_path(leg, 10.0)])
        ax.plot(pts[:, 0], pts[:, 1], pts[:, 2], lw=1.0)
    for t in targets:
        ax.scatter(*t.position, marker="*", s=50, color="k")
    for obj in env.objects:
        fp = obj.footprint.vertices
        for z in (0.0, obj.height):
            loop = np.vstack([fp, fp[:1]])
            ax.plot(loop[:, 0], loop[:, 1], z, color="0.6", lw=0.5)
    ax.set_title(f"{alg}\n{tour.total_length:.0f} m", fontsize=8)
    ax.set_zlim(0, env.z_max)

fig.tight_layout()
out = HERE / "plan_tours.png"
fig.savefig(out, dpi=110)
print(f"wrote {out}")
