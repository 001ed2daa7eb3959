#!/usr/bin/env python3
"""A small Monte-Carlo sweep over seeds and sample counts.

Reproduces the shape of the full study at desk scale: tour cost falls as
the per-volume sample budget grows, and the lower-bound heuristic tracks
the exact-cost pipeline at a fraction of the planning time.  Writes
monte_carlo.csv and monte_carlo.png.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from viewplan import ExperimentConfig, ScenarioParams, run_experiment

HERE = pathlib.Path(__file__).parent

config = ExperimentConfig(
    seeds=tuple(range(6)),
    algorithms=(
        "3D-DTSPN-RFAC-4-2",
        "3D-DTSPN-RFAC-4-8",
        "3D-METSPN-RFAC-4-8",
        "2D-DTSPN-ETRY-4-8",
    ),
    scenario=ScenarioParams(n_targets=4),
    output=str(HERE / "monte_carlo.csv"),
)
records = run_experiment(config, progress=lambda r: print(
    f"  seed {r.seed} {r.algorithm:22s} {r.status:4s} "
    f"{r.normalized_cost:7.2f} in {r.wall_clock_s:5.2f}s"))

by_alg = {}
for r in records:
    if r.status == "ok":
        by_alg.setdefault(r.algorithm, []).append(r)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
labels = list(by_alg)
ax1.boxplot([[r.normalized_cost for r in rs] for rs in by_alg.values()],
            tick_labels=[l.replace("3D-", "").replace("2D-", "")
                         for l in labels])
ax1.set_ylabel("tour length / turn radius")
ax1.set_title("normalized tour cost")
ax1.tick_params(axis="x", rotation=20)

ax2.bar(range(len(labels)),
        [np.median([r.wall_clock_s for r in rs]) for rs in by_alg.values()])
ax2.set_xticks(range(len(labels)))
ax2.set_xticklabels([l.replace("3D-", "").replace("2D-", "") for l in labels],
                    rotation=20)
ax2.set_ylabel("median planning time (s)")
ax2.set_yscale("log")
ax2.set_title("planning time")

fig.tight_layout()
out = HERE / "monte_carlo.png"
fig.savefig(out, dpi=110)
print(f"wrote {out} and {config.output}")
