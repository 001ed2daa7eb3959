#!/usr/bin/env python3
"""Build visibility volumes in a small scene and inspect their shape.

An unobstructed ground target grows a spherical dome clipped to the
altitude band; a target tucked beside a building loses the shadowed
wedge.  The script reports mesh statistics, slices the volumes at a few
altitudes, and renders cross-sections to visibility_volumes.png.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from viewplan import (Environment, ExtrudedObject, Polygon2, SensorParams,
                      Target, build_visibility_mesh, polygon_area, save_obj,
                      slice_mesh)

HERE = pathlib.Path(__file__).parent

region = Polygon2(np.array([[-800.0, -800.0], [800.0, -800.0],
                            [800.0, 800.0], [-800.0, 800.0]]))
tower = ExtrudedObject(
    Polygon2(np.array([[60.0, -40.0], [140.0, -40.0], [140.0, 40.0], [60.0, 40.0]])),
    height=120.0)
env = Environment(region, [tower], z_min=170.0, z_max=420.0)
sensor = SensorParams(d_max=400.0, h_view=60.0)

open_target = Target((-350.0, 0.0, 0.0), "ground")
shadowed = Target((30.0, 0.0, 0.0), "ground")  # right beside the tower

for name, target in (("open", open_target), ("shadowed", shadowed)):
    mesh = build_visibility_mesh(target, env, sensor)
    z_lo, z_hi = mesh.z_extent()
    print(f"{name}: {mesh.n_faces} faces, volume {mesh.volume() / 1e6:.2f}e6 m^3, "
          f"z in [{z_lo:.0f}, {z_hi:.0f}] m")
    save_obj(mesh, HERE / f"volume_{name}.obj")

fig, axes = plt.subplots(1, 3, figsize=(13, 4.2), sharex=True, sharey=True)
for ax, z in zip(axes, (175.0, 250.0, 330.0)):
    for name, target, color in (("open", open_target, "tab:green"),
                                ("shadowed", shadowed, "tab:red")):
        mesh = build_visibility_mesh(target, env, sensor)
        for poly in slice_mesh(mesh, z):
            closed = np.vstack([poly.vertices, poly.vertices[:1]])
            ax.plot(closed[:, 0], closed[:, 1], color=color,
                    label=f"{name} ({polygon_area(poly) / 1e3:.0f}e3 m^2)")
    fp = np.vstack([tower.footprint.vertices, tower.footprint.vertices[:1]])
    ax.fill(fp[:, 0], fp[:, 1], color="0.7")
    ax.plot(*open_target.position[:2], "g^")
    ax.plot(*shadowed.position[:2], "r^")
    ax.set_aspect("equal")
    ax.set_title(f"cross-sections at z = {z:.0f} m")
    ax.legend(fontsize=7)

fig.tight_layout()
out = HERE / "visibility_volumes.png"
fig.savefig(out, dpi=110)
print(f"wrote {out}")
