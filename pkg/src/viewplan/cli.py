"""Command-line pipeline: scene generation, tour planning, sweeps.

Subcommands
-----------
``viewplan gen``         write a synthetic scene JSON
``viewplan plan``        plan one tour for a scene and write tour JSON
``viewplan experiment``  run a sweep config and write the trial CSV

Exit codes: 0 success, 2 validation failure, 3 infeasible planning,
4 I/O failure.  All numbers in JSON outputs are serialized with 9
significant digits, and every command is deterministic given its flags
and seeds.

Scene JSON schema::

    {
      "region": [[x, y], ...],
      "z_min": float, "z_max": float,
      "objects": [{"footprint": [[x, y], ...], "height": float}, ...],
      "targets": [{"x": float, "y": float, "z": float, "class": str}, ...],
      "sensor": {"d_max": float, "h_view": float},
      "vehicle": {"rho_min": float, "gamma_min": float,
                  "gamma_max": float, "v": float}
    }
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .dubins import VehicleParams, sample_path
from .errors import InfeasibleError, ValidationError
from .geom import Polygon2, polygon_is_simple, save_obj
from .scenario import (ExperimentConfig, ScenarioParams, generate_city,
                       place_targets, plan_with_algorithm, run_experiment,
                       validate_scenario)
from .visibility import (Environment, ExtrudedObject, SensorParams, Target,
                         build_visibility_mesh, validate_target)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

# tolerance for placement checks after 9-significant-digit serialization
LOAD_TOL = 1e-3


def dump_json(obj) -> str:
    """Deterministic JSON with floats at 9 significant digits."""
    out: list[str] = []
    _dump(obj, out)
    return "".join(out) + "\n"


def _dump(obj, out: list[str]) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _dump(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)) or isinstance(obj, np.ndarray):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _dump(v, out)
        out.append("]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (float, np.floating)):
        out.append(format(float(obj), ".9g"))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif obj is None:
        out.append("null")
    else:
        out.append(json.dumps(obj))


def scene_to_dict(env: Environment, targets: list[Target],
                  sensor: SensorParams, vehicle: VehicleParams) -> dict:
    return {
        "region": env.region.vertices,
        "z_min": env.z_min,
        "z_max": env.z_max,
        "objects": [{"footprint": o.footprint.vertices, "height": o.height}
                    for o in env.objects],
        "targets": [{"x": t.position[0], "y": t.position[1],
                     "z": t.position[2], "class": t.placement}
                    for t in targets],
        "sensor": {"d_max": sensor.d_max, "h_view": sensor.h_view},
        "vehicle": {"rho_min": vehicle.rho_min, "gamma_min": vehicle.gamma_min,
                    "gamma_max": vehicle.gamma_max, "v": vehicle.speed},
    }


def scene_from_dict(doc: dict) -> tuple[Environment, list[Target],
                                        SensorParams, VehicleParams]:
    """Parse and validate a scene document; raises ValidationError on a
    scene that fails the feasibility or placement checks."""
    try:
        region = Polygon2(np.asarray(doc["region"], dtype=float))
        objects = [ExtrudedObject(Polygon2(np.asarray(o["footprint"], dtype=float)),
                                  float(o["height"]))
                   for o in doc["objects"]]
        env = Environment(region, objects, float(doc["z_min"]), float(doc["z_max"]))
        targets = [Target((float(t["x"]), float(t["y"]), float(t["z"])),
                          str(t["class"])) for t in doc["targets"]]
        sensor = SensorParams(float(doc["sensor"]["d_max"]),
                              float(doc["sensor"]["h_view"]))
        veh = doc["vehicle"]
        vehicle = VehicleParams(float(veh["rho_min"]), float(veh["gamma_min"]),
                                float(veh["gamma_max"]), float(veh.get("v", 20.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("scene-schema", f"malformed scene document: {exc}")
    if not polygon_is_simple(region):
        raise ValidationError("scene-schema", "region polygon is not simple")
    for i, obj in enumerate(objects):
        if not polygon_is_simple(obj.footprint):
            raise ValidationError("scene-schema", f"object {i} footprint is not simple")
    validate_scenario(env, sensor, vehicle.rho_min, targets)
    for t in targets:
        validate_target(t, env, tol=LOAD_TOL)
    return env, targets, sensor, vehicle


def cmd_gen(args) -> int:
    placement = tuple(float(x) for x in args.placement.split(","))
    if len(placement) != 3:
        raise ValidationError("target-placement",
                              "placement must be three comma-separated weights")
    params = ScenarioParams(
        region_width=args.width, region_depth=args.depth,
        n_objects=args.objects, h_cap=args.h_cap, n_targets=args.targets,
        placement=placement, d_max=args.d_max, h_view=args.h_view,
        rho_min=args.rho_min, seed=args.seed)
    vehicle = VehicleParams(args.rho_min, args.gamma_min, args.gamma_max, args.speed)
    env = generate_city(params)
    targets = place_targets(env, params)
    validate_scenario(env, params.sensor, params.rho_min, targets)
    doc = scene_to_dict(env, targets, params.sensor, vehicle)
    with open(args.out, "w", encoding="ascii") as fh:
        fh.write(dump_json(doc))
    print(f"wrote {args.out}: {len(env.objects)} objects, {len(targets)} targets")
    return EXIT_OK


def cmd_plan(args) -> int:
    with open(args.scene, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    env, targets, sensor, vehicle = scene_from_dict(doc)
    volumes = [build_visibility_mesh(t, env, sensor, args.resolution)
               for t in targets]
    if args.export_meshes:
        os.makedirs(args.export_meshes, exist_ok=True)
        for i, mesh in enumerate(volumes):
            save_obj(mesh, os.path.join(args.export_meshes, f"volume_{i:03d}.obj"))
    tour, _ = plan_with_algorithm(
        args.alg, volumes, targets, vehicle,
        n_gamma=args.n_gamma,
        sample_gamma=(args.sample_gamma_min, args.sample_gamma_max),
        n_slice=args.n_slice, seed=args.seed, solver=args.solver)
    doc_out = tour.to_dict()
    doc_out["algorithm"] = args.alg
    doc_out["seed"] = args.seed
    with open(args.out, "w", encoding="ascii") as fh:
        fh.write(dump_json(doc_out))
    if args.export_polyline:
        step = vehicle.rho_min / 10.0
        lines = [[[c.x, c.y, c.z, c.psi, c.gamma] for c in sample_path(leg, step)]
                 for leg in tour.legs]
        with open(args.export_polyline, "w", encoding="ascii") as fh:
            fh.write(dump_json({"legs": lines}))
    print(f"{args.alg}: length {tour.total_length:.1f} m, "
          f"normalized {tour.normalized_cost:.2f}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    with open(args.config, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    config = ExperimentConfig.from_dict(doc)
    records = run_experiment(config, resume=args.resume,
                             progress=lambda r: print(
                                 f"  {r.seed} {r.algorithm}: {r.status} "
                                 f"{r.length_m:.1f} m in {r.wall_clock_s:.2f}s"))
    n_ok = sum(1 for r in records if r.status == "ok")
    print(f"wrote {config.output}: {len(records)} records, {n_ok} ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viewplan",
        description="Plan minimum-length 3D inspection tours over "
                    "visibility volumes in a 2.5D urban scene.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic scene JSON")
    g.add_argument("--targets", type=int, default=5)
    g.add_argument("--objects", type=int, default=8)
    g.add_argument("--width", type=float, default=2000.0)
    g.add_argument("--depth", type=float, default=2000.0)
    g.add_argument("--h-cap", type=float, default=150.0)
    g.add_argument("--d-max", type=float, default=400.0)
    g.add_argument("--h-view", type=float, default=90.0)
    g.add_argument("--rho-min", type=float, default=40.0)
    g.add_argument("--gamma-min", type=float, default=-math.pi / 12.0)
    g.add_argument("--gamma-max", type=float, default=math.pi / 9.0)
    g.add_argument("--speed", type=float, default=20.0)
    g.add_argument("--placement", type=str, default="0.4,0.3,0.3",
                   help="ground,wall,roof weights")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=str, required=True)
    g.set_defaults(func=cmd_gen)

    p = sub.add_parser("plan", help="plan a tour for a scene")
    p.add_argument("scene", type=str)
    p.add_argument("--alg", type=str, required=True,
                   help="e.g. 2D-DTSP-8, 2D-DTSPN-ETRY-8-16, "
                        "3D-DTSPN-RFAC-8-32, 3D-METSPN-RFAC-8-32")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default="tour.json")
    p.add_argument("--n-gamma", type=int, default=1)
    p.add_argument("--sample-gamma-min", type=float, default=0.0)
    p.add_argument("--sample-gamma-max", type=float, default=0.0)
    p.add_argument("--n-slice", type=int, default=8)
    p.add_argument("--resolution", type=float, default=None)
    p.add_argument("--solver", choices=("exact", "heuristic"), default="heuristic")
    p.add_argument("--export-meshes", type=str, default=None,
                   help="directory for per-volume OBJ files")
    p.add_argument("--export-polyline", type=str, default=None,
                   help="JSON file of sampled leg polylines")
    p.set_defaults(func=cmd_plan)

    e = sub.add_parser("experiment", help="run a sweep config")
    e.add_argument("config", type=str)
    e.add_argument("--resume", action="store_true")
    e.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
