"""Synthetic scenes, feasibility validation, and the sweep harness.

Scenes are rectangular regions holding non-overlapping axis-aligned
rectangular buildings with random heights; the minimum operating altitude
clears the tallest building by two turn radii plus a margin so the
airspace is obstacle free.  Target placement and parameter sets are
checked against named feasibility constraints:

* ``airspace-clearance``: z_min > h_max + 2*rho_min;
* ``altitude-window``: z_min <= h_view + h_max <= z_max, so roof targets on
  the tallest building have a legal viewing altitude;
* ``ground-range``: z_min <= d_max, so ground targets can be seen from the
  lowest legal altitude;
* ``separation``: pairwise target distance > 2*d_max, which keeps
  visibility volumes disjoint;
* ``common-altitude``: h_max + h_view <= d_max, required only by the
  constant-altitude pipelines.

The sweep harness runs (scene seed x algorithm) trials, reusing the
visibility meshes across algorithms within a scene, and records lengths
and per-algorithm planning wall-clock to CSV.  Everything is deterministic
given the configured seeds.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dubins import VehicleParams
from .errors import ValidationError
from .geom import Polygon2, TriMesh, point_in_polygon
from .sampling import (ClusterSamples, SamplingParams, optimized_altitude,
                       sample_edge_3d, sample_entry_pose_all,
                       sample_global_weighted_face, sample_overhead,
                       sample_random_face)
from .tour import Tour, plan_metspn, solve_dtspn
from .visibility import (Environment, ExtrudedObject, SensorParams, Target,
                         build_visibility_mesh)

OBJECT_RETRY_BUDGET = 10_000
TARGET_RETRY_BUDGET = 10_000
PLACEMENT_RESTARTS = 50


@dataclass(frozen=True)
class ScenarioParams:
    """Knobs for synthetic scene generation and target placement."""

    region_width: float = 2000.0
    region_depth: float = 2000.0
    n_objects: int = 8
    h_cap: float = 150.0
    n_targets: int = 5
    placement: tuple[float, float, float] = (0.4, 0.3, 0.3)  # ground, wall, roof
    d_max: float = 400.0
    h_view: float = 90.0
    rho_min: float = 40.0
    seed: int = 0

    def __post_init__(self):
        if self.n_targets < 1:
            raise ValueError("need at least one target")
        if min(self.placement) < 0 or sum(self.placement) <= 0:
            raise ValueError("placement weights must be nonnegative, not all zero")

    @property
    def separation(self) -> float:
        return 2.0 * self.d_max

    @property
    def sensor(self) -> SensorParams:
        return SensorParams(self.d_max, self.h_view)


@dataclass
class TrialRecord:
    """One sweep trial: scene seed, algorithm, and outcome."""

    seed: int
    n_targets: int
    algorithm: str
    n_pts: int
    n_psi: int
    n_gamma: int
    length_m: float
    normalized_cost: float
    wall_clock_s: float
    status: str

    CSV_COLUMNS = ("seed", "M", "algorithm", "n_pts", "n_psi", "n_gamma",
                   "length_m", "normalized_cost", "wall_clock_s", "status")

    def key(self) -> tuple:
        return (self.seed, self.n_targets, self.algorithm,
                self.n_pts, self.n_psi, self.n_gamma)

    def as_row(self) -> list[str]:
        return [str(self.seed), str(self.n_targets), self.algorithm,
                str(self.n_pts), str(self.n_psi), str(self.n_gamma),
                format(self.length_m, ".9g"), format(self.normalized_cost, ".9g"),
                format(self.wall_clock_s, ".9g"), self.status]


def validate_scenario(env: Environment, sensor: SensorParams, rho_min: float,
                      targets: list[Target] | None = None,
                      require_common_altitude: bool = False) -> None:
    """Raise :class:`ValidationError` naming the first violated constraint."""
    h_max = env.h_max
    if env.z_min <= h_max + 2.0 * rho_min:
        raise ValidationError(
            "airspace-clearance",
            f"z_min={env.z_min:g} must exceed h_max + 2*rho_min = "
            f"{h_max + 2.0 * rho_min:g}")
    if not env.z_min <= sensor.h_view + h_max:
        raise ValidationError(
            "altitude-window",
            f"z_min={env.z_min:g} exceeds h_view + h_max = {sensor.h_view + h_max:g}; "
            "roof targets on the tallest object have no legal viewing altitude")
    if not sensor.h_view + h_max <= env.z_max:
        raise ValidationError(
            "altitude-window",
            f"h_view + h_max = {sensor.h_view + h_max:g} exceeds z_max={env.z_max:g}")
    if not env.z_min <= sensor.d_max:
        raise ValidationError(
            "ground-range",
            f"z_min={env.z_min:g} exceeds d_max={sensor.d_max:g}; "
            "ground targets cannot be seen from the lowest altitude")
    if require_common_altitude and not h_max + sensor.h_view <= sensor.d_max:
        raise ValidationError(
            "common-altitude",
            f"h_max + h_view = {h_max + sensor.h_view:g} exceeds d_max="
            f"{sensor.d_max:g}; no altitude can serve every target")
    if targets is not None:
        pos = np.array([t.p for t in targets])
        for i in range(len(pos)):
            for j in range(i + 1, len(pos)):
                dist = float(np.linalg.norm(pos[i] - pos[j]))
                if dist <= 2.0 * sensor.d_max:
                    raise ValidationError(
                        "separation",
                        f"targets {i} and {j} are {dist:.1f} m apart; "
                        f"need more than {2.0 * sensor.d_max:g} m")


def generate_city(params: ScenarioParams) -> Environment:
    """Deterministic scene: rejection-placed rectangular buildings.

    The altitude band is derived from the tallest generated building:
    z_min clears it by two turn radii plus one meter, z_max leaves room for
    the full sensor range.  The result always passes the scenario
    validator or a :class:`ValidationError` explains why the parameter set
    cannot work.
    """
    rng = np.random.default_rng([params.seed, 0])
    W, D = params.region_width, params.region_depth
    rects: list[tuple[float, float, float, float]] = []
    side_hi = min(120.0, W / 3.0, D / 3.0)
    side_lo = min(30.0, side_hi)
    for _ in range(params.n_objects):
        for attempt in range(OBJECT_RETRY_BUDGET):
            w = rng.uniform(side_lo, side_hi)
            d = rng.uniform(side_lo, side_hi)
            x0 = rng.uniform(0.0, W - w)
            y0 = rng.uniform(0.0, D - d)
            cand = (x0, y0, x0 + w, y0 + d)
            if all(cand[2] <= r[0] or cand[0] >= r[2] or
                   cand[3] <= r[1] or cand[1] >= r[3] for r in rects):
                rects.append(cand)
                break
        else:
            raise ValidationError(
                "object-density",
                f"could not place object {len(rects)} of {params.n_objects} "
                f"within {OBJECT_RETRY_BUDGET} tries")
    heights = rng.uniform(0.25 * params.h_cap, params.h_cap, size=len(rects))
    heights = np.minimum(heights, params.h_cap)
    objects = [
        ExtrudedObject(Polygon2(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])),
                       float(h))
        for (x0, y0, x1, y1), h in zip(rects, heights)
    ]
    h_max = max((o.height for o in objects), default=0.0)
    z_min = h_max + 2.0 * params.rho_min + 1.0
    z_max = h_max + params.d_max
    region = Polygon2(np.array([[0.0, 0.0], [W, 0.0], [W, D], [0.0, D]]))
    env = Environment(region, objects, z_min, z_max)
    validate_scenario(env, params.sensor, params.rho_min)
    return env


def place_targets(env: Environment, params: ScenarioParams) -> list[Target]:
    """Targets drawn per the placement distribution, pairwise separated.

    Rejection sampling with whole-set restarts; raises a ``separation``
    :class:`ValidationError` when the region cannot hold the requested
    number of targets that far apart.
    """
    rng = np.random.default_rng([params.seed, 1])
    weights = np.asarray(params.placement, dtype=float)
    if not env.objects:
        if weights[1] + weights[2] > 0:
            raise ValidationError(
                "target-placement",
                "wall/roof placement requested but the scene has no objects")
    weights = weights / weights.sum()
    min_sep = params.separation
    for _ in range(PLACEMENT_RESTARTS):
        targets: list[Target] = []
        failed = False
        for _ in range(params.n_targets):
            placed = False
            for _ in range(TARGET_RETRY_BUDGET // PLACEMENT_RESTARTS):
                cls = ("ground", "wall", "roof")[int(rng.choice(3, p=weights))]
                pos = _draw_target_position(rng, env, cls, params)
                if pos is None:
                    continue
                if all(np.linalg.norm(np.asarray(pos) - t.p) > min_sep for t in targets):
                    targets.append(Target(pos, cls))
                    placed = True
                    break
            if not placed:
                failed = True
                break
        if not failed:
            return targets
    raise ValidationError(
        "separation",
        f"could not place {params.n_targets} targets more than "
        f"{min_sep:g} m apart in a {params.region_width:g} x "
        f"{params.region_depth:g} m region")


def _draw_target_position(rng, env: Environment, cls: str,
                          params: ScenarioParams):
    W, D = params.region_width, params.region_depth
    if cls == "ground":
        x = rng.uniform(0.0, W)
        y = rng.uniform(0.0, D)
        for obj in env.objects:
            if point_in_polygon((x, y), obj.footprint, include_boundary=True):
                return None
        return (float(x), float(y), 0.0)
    if not env.objects:
        return None
    obj = env.objects[int(rng.integers(len(env.objects)))]
    if cls == "wall":
        lam = _point_at_arclength(obj.footprint, rng.uniform())
        z = rng.uniform(0.0, obj.height)
        return (float(lam[0]), float(lam[1]), float(z))
    # roof: strictly interior point
    bx0, by0, bx1, by1 = obj.footprint.bounds
    for _ in range(64):
        x = rng.uniform(bx0, bx1)
        y = rng.uniform(by0, by1)
        if point_in_polygon((x, y), obj.footprint, include_boundary=False):
            return (float(x), float(y), float(obj.height))
    return None


def _point_at_arclength(poly: Polygon2, frac: float) -> np.ndarray:
    """Boundary point at a fraction of the total perimeter from vertex 0."""
    v = poly.vertices
    edges = np.roll(v, -1, axis=0) - v
    lengths = np.linalg.norm(edges, axis=1)
    cum = np.concatenate(([0.0], np.cumsum(lengths)))
    s = (frac % 1.0) * cum[-1]
    k = int(np.searchsorted(cum, s, side="right")) - 1
    k = min(max(k, 0), len(v) - 1)
    t = (s - cum[k]) / lengths[k] if lengths[k] > 0 else 0.0
    return v[k] + t * edges[k]


@dataclass(frozen=True)
class AlgorithmSpec:
    """Parsed algorithm identifier."""

    algorithm_id: str
    pipeline: str          # "2d-dtsp" | "2d-dtspn" | "3d-dtspn" | "3d-metspn"
    sampler: str | None    # "ETRY" | "RFAC" | "E3D" | "GWF"
    n_psi: int
    n_pts: int


def parse_algorithm(alg_id: str) -> AlgorithmSpec:
    """Parse identifiers like 2D-DTSP-8, 2D-DTSPN-ETRY-4-16,
    3D-DTSPN-RFAC-8-32, or 3D-METSPN-GWF-8-32."""
    parts = alg_id.upper().split("-")
    try:
        if parts[:2] == ["2D", "DTSP"] and len(parts) == 3:
            return AlgorithmSpec(alg_id, "2d-dtsp", None, int(parts[2]), 1)
        if parts[:2] == ["2D", "DTSPN"] and len(parts) == 5 and parts[2] == "ETRY":
            return AlgorithmSpec(alg_id, "2d-dtspn", "ETRY",
                                 int(parts[3]), int(parts[4]))
        if parts[:2] == ["3D", "DTSPN"] and len(parts) == 5 and \
                parts[2] in ("RFAC", "E3D", "GWF"):
            return AlgorithmSpec(alg_id, "3d-dtspn", parts[2],
                                 int(parts[3]), int(parts[4]))
        if parts[:2] == ["3D", "METSPN"] and len(parts) == 5 and \
                parts[2] in ("RFAC", "E3D", "GWF"):
            return AlgorithmSpec(alg_id, "3d-metspn", parts[2],
                                 int(parts[3]), int(parts[4]))
    except ValueError:
        pass
    raise ValueError(f"unrecognized algorithm id {alg_id!r}")


_SAMPLERS = {
    "RFAC": sample_random_face,
    "E3D": sample_edge_3d,
    "GWF": sample_global_weighted_face,
}


def plan_with_algorithm(alg_id: str, volumes: list[TriMesh],
                        targets: list[Target], vehicle: VehicleParams,
                        n_gamma: int = 1,
                        sample_gamma: tuple[float, float] = (0.0, 0.0),
                        n_slice: int = 8, seed: int = 0,
                        solver: str = "heuristic") -> tuple[Tour, ClusterSamples]:
    """Sample the volumes and solve one tour with the named algorithm.

    ``sample_gamma`` bounds the pitches assigned to sampled configurations
    (the vehicle's own pitch envelope still governs path planning).
    """
    spec = parse_algorithm(alg_id)
    if spec.pipeline == "2d-dtsp":
        z_star = optimized_altitude(volumes, n_slice)
        samples = sample_overhead(targets, z_star, spec.n_psi)
        return solve_dtspn(samples, "2D-dubins-at-z*", vehicle, solver, seed), samples
    if spec.pipeline == "2d-dtspn":
        z_star = optimized_altitude(volumes, n_slice)
        samples = sample_entry_pose_all(volumes, z_star, spec.n_pts, spec.n_psi)
        return solve_dtspn(samples, "2D-dubins-at-z*", vehicle, solver, seed), samples
    sampling = SamplingParams(spec.n_pts, spec.n_psi, n_gamma, n_slice,
                              sample_gamma[0], sample_gamma[1], seed)
    samples = _SAMPLERS[spec.sampler](volumes, sampling)
    if spec.pipeline == "3d-dtspn":
        return solve_dtspn(samples, "exact-3D-dubins", vehicle, solver, seed), samples
    return plan_metspn(samples, vehicle, solver, seed), samples


@dataclass(frozen=True)
class ExperimentConfig:
    """A sweep: scene seeds crossed with algorithm identifiers."""

    seeds: tuple[int, ...]
    algorithms: tuple[str, ...]
    scenario: ScenarioParams = ScenarioParams()
    vehicle: VehicleParams = VehicleParams(40.0, -math.pi / 12.0, math.pi / 9.0)
    n_gamma: int = 1
    sample_gamma: tuple[float, float] = (0.0, 0.0)
    n_slice: int = 8
    resolution: float | None = None
    solver: str = "heuristic"
    output: str = "experiment.csv"

    @staticmethod
    def from_dict(doc: dict) -> "ExperimentConfig":
        scen = ScenarioParams(**{k: (tuple(v) if k == "placement" else v)
                                 for k, v in doc.get("scenario", {}).items()})
        veh = VehicleParams(**doc.get("vehicle", {})) if "vehicle" in doc else \
            ExperimentConfig.__dataclass_fields__["vehicle"].default
        return ExperimentConfig(
            seeds=tuple(doc["seeds"]),
            algorithms=tuple(doc["algorithms"]),
            scenario=scen,
            vehicle=veh,
            n_gamma=doc.get("n_gamma", 1),
            sample_gamma=tuple(doc.get("sample_gamma", (0.0, 0.0))),
            n_slice=doc.get("n_slice", 8),
            resolution=doc.get("resolution"),
            solver=doc.get("solver", "heuristic"),
            output=doc.get("output", "experiment.csv"),
        )


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("VIEWPLAN_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(config: ExperimentConfig, resume: bool = False,
                   progress=None, on_tour=None) -> list[TrialRecord]:
    """Run the sweep and write records to CSV.

    Visibility meshes are built once per scene seed and shared by all
    algorithms; the recorded wall clock covers sampling, cost matrix,
    solve, and stitching (the per-algorithm work).  With ``resume`` the
    existing CSV is loaded and completed trial keys are skipped.  Failures
    are recorded with the exception class name in the status column.
    ``on_tour(seed, algorithm, tour)`` is invoked for every solved tour
    (validation instrumentation; timings exclude it).
    """
    done: set[tuple] = set()
    existing: list[TrialRecord] = []
    if resume and os.path.exists(config.output):
        existing = read_records(config.output)
        done = {r.key() for r in existing}

    def run_seed(seed: int) -> list[TrialRecord]:
        records: list[TrialRecord] = []
        todo = []
        for ai, alg in enumerate(config.algorithms):
            spec = parse_algorithm(alg)
            key = (seed, config.scenario.n_targets, alg,
                   spec.n_pts, spec.n_psi, config.n_gamma)
            if key not in done:
                todo.append((ai, alg, spec))
        if not todo:
            return records
        scen = replace(config.scenario, seed=seed)
        try:
            env = generate_city(scen)
            targets = place_targets(env, scen)
            validate_scenario(env, scen.sensor, scen.rho_min, targets)
            volumes = [build_visibility_mesh(t, env, scen.sensor, config.resolution)
                       for t in targets]
        except Exception as exc:
            for ai, alg, spec in todo:
                records.append(TrialRecord(seed, scen.n_targets, alg, spec.n_pts,
                                           spec.n_psi, config.n_gamma,
                                           math.nan, math.nan, 0.0,
                                           type(exc).__name__))
            return records
        for ai, alg, spec in todo:
            trial_seed = (seed << 8) + ai
            t0 = time.perf_counter()
            try:
                tour, _ = plan_with_algorithm(
                    alg, volumes, targets, config.vehicle,
                    n_gamma=config.n_gamma, sample_gamma=config.sample_gamma,
                    n_slice=config.n_slice, seed=trial_seed, solver=config.solver)
                dt = time.perf_counter() - t0
                if on_tour is not None:
                    on_tour(seed, alg, tour)
                records.append(TrialRecord(seed, scen.n_targets, alg, spec.n_pts,
                                           spec.n_psi, config.n_gamma,
                                           tour.total_length, tour.normalized_cost,
                                           dt, "ok"))
            except Exception as exc:
                dt = time.perf_counter() - t0
                records.append(TrialRecord(seed, scen.n_targets, alg, spec.n_pts,
                                           spec.n_psi, config.n_gamma,
                                           math.nan, math.nan, dt,
                                           type(exc).__name__))
            if progress is not None:
                progress(records[-1])
        return records

    workers = _worker_count()
    new_records: list[TrialRecord] = []
    if workers == 1:
        for seed in config.seeds:
            new_records.extend(run_seed(seed))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for recs in pool.map(run_seed, config.seeds):
                new_records.extend(recs)
    seed_index = {s: i for i, s in enumerate(config.seeds)}
    alg_index = {a: i for i, a in enumerate(config.algorithms)}
    new_records.sort(key=lambda r: (seed_index.get(r.seed, -1),
                                    alg_index.get(r.algorithm, -1)))
    all_records = existing + new_records
    write_records(config.output, all_records)
    return all_records


def write_records(path: str, records: list[TrialRecord]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(TrialRecord.CSV_COLUMNS)
        for r in records:
            writer.writerow(r.as_row())


def read_records(path: str) -> list[TrialRecord]:
    out: list[TrialRecord] = []
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(TrialRecord(
                seed=int(row["seed"]), n_targets=int(row["M"]),
                algorithm=row["algorithm"], n_pts=int(row["n_pts"]),
                n_psi=int(row["n_psi"]), n_gamma=int(row["n_gamma"]),
                length_m=float(row["length_m"]),
                normalized_cost=float(row["normalized_cost"]),
                wall_clock_s=float(row["wall_clock_s"]), status=row["status"]))
    return out
