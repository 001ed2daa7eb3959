import json
import math

import pytest

from viewplan.cli import (EXIT_INFEASIBLE, EXIT_IO, EXIT_OK, EXIT_VALIDATION,
                          dump_json, main, scene_from_dict)
from viewplan.geom import load_obj


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def scene_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("scenes") / "scene.json"
    code = run(["gen", "--targets", 3, "--seed", 7, "--out", path])
    assert code == EXIT_OK
    return path


def test_gen_writes_valid_scene(scene_path):
    doc = json.loads(scene_path.read_text())
    env, targets, sensor, vehicle = scene_from_dict(doc)
    assert len(targets) == 3
    assert vehicle.rho_min == 40.0


def test_gen_deterministic_bytes(scene_path, tmp_path):
    other = tmp_path / "again.json"
    assert run(["gen", "--targets", 3, "--seed", 7, "--out", other]) == EXIT_OK
    assert other.read_bytes() == scene_path.read_bytes()


def test_gen_infeasible_separation_exit_code(tmp_path, capsys):
    code = run(["gen", "--targets", 8, "--width", 700, "--depth", 700,
                "--seed", 1, "--out", tmp_path / "x.json"])
    assert code == EXIT_VALIDATION
    assert "separation" in capsys.readouterr().err


def test_plan_writes_tour_and_exports(scene_path, tmp_path):
    tour_path = tmp_path / "tour.json"
    mesh_dir = tmp_path / "meshes"
    poly_path = tmp_path / "poly.json"
    code = run(["plan", scene_path, "--alg", "3D-DTSPN-RFAC-4-4", "--seed", 1,
                "--out", tour_path, "--export-meshes", mesh_dir,
                "--export-polyline", poly_path])
    assert code == EXIT_OK
    doc = json.loads(tour_path.read_text())
    assert doc["algorithm"] == "3D-DTSPN-RFAC-4-4"
    assert sorted(doc["cluster_order"]) == [0, 1, 2]
    assert len(doc["configurations"]) == 3
    assert doc["total_length"] == pytest.approx(sum(doc["leg_lengths"]), rel=1e-6)
    assert doc["normalized_cost"] == pytest.approx(doc["total_length"] / 40.0,
                                                   rel=1e-6)
    meshes = sorted(mesh_dir.iterdir())
    assert len(meshes) == 3
    mesh = load_obj(meshes[0])
    assert mesh.n_faces > 0
    legs = json.loads(poly_path.read_text())["legs"]
    assert len(legs) == 3
    # polyline endpoints line up with consecutive tour configurations
    q0 = doc["configurations"][0]
    assert legs[0][0][:3] == pytest.approx(q0[:3], abs=1e-6)


def test_plan_deterministic(scene_path, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        assert run(["plan", scene_path, "--alg", "3D-METSPN-RFAC-4-8",
                    "--seed", 5, "--out", out]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_plan_overhead_tour_passes_over_targets(scene_path, tmp_path):
    out = tmp_path / "dtsp.json"
    assert run(["plan", scene_path, "--alg", "2D-DTSP-8", "--seed", 0,
                "--out", out]) == EXIT_OK
    doc = json.loads(out.read_text())
    scene = json.loads(scene_path.read_text())
    target_xy = {(round(t["x"], 6), round(t["y"], 6)) for t in scene["targets"]}
    got_xy = {(round(c[0], 6), round(c[1], 6)) for c in doc["configurations"]}
    assert got_xy == target_xy
    zs = {round(c[2], 6) for c in doc["configurations"]}
    assert len(zs) == 1  # one shared altitude


def test_plan_infeasible_common_altitude(tmp_path, capsys):
    # a tall building plus a short sensor range: the roof volume floats
    # entirely above the ground target's dome, so no altitude serves both
    scene = {
        "region": [[0, 0], [1200, 0], [1200, 600], [0, 600]],
        "z_min": 171.0, "z_max": 400.0,
        "objects": [{"footprint": [[100, 100], [200, 100], [200, 200], [100, 200]],
                     "height": 150.0}],
        "targets": [{"x": 700.0, "y": 400.0, "z": 0.0, "class": "ground"},
                    {"x": 150.0, "y": 150.0, "z": 150.0, "class": "roof"}],
        "sensor": {"d_max": 200.0, "h_view": 60.0},
        "vehicle": {"rho_min": 10.0, "gamma_min": -math.pi / 12,
                    "gamma_max": math.pi / 9, "v": 20.0},
    }
    path = tmp_path / "split.json"
    path.write_text(dump_json(scene))
    out = tmp_path / "t.json"
    code = run(["plan", path, "--alg", "2D-DTSP-4", "--seed", 0, "--out", out])
    assert code == EXIT_INFEASIBLE
    assert "common-altitude" in capsys.readouterr().err
    # the 3D pipeline still solves it
    assert run(["plan", path, "--alg", "3D-DTSPN-RFAC-4-2", "--seed", 0,
                "--out", out]) == EXIT_OK


def test_plan_missing_scene_is_io_error(tmp_path):
    assert run(["plan", tmp_path / "nope.json", "--alg", "2D-DTSP-4"]) == EXIT_IO


def test_plan_malformed_scene_is_validation_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"region": [[0, 0], [1, 0]]}')
    assert run(["plan", path, "--alg", "2D-DTSP-4"]) == EXIT_VALIDATION


def test_separation_violating_scene_rejected(tmp_path, capsys):
    scene = {
        "region": [[0, 0], [1000, 0], [1000, 1000], [0, 1000]],
        "z_min": 81.0, "z_max": 500.0,
        "objects": [],
        "targets": [{"x": 100.0, "y": 100.0, "z": 0.0, "class": "ground"},
                    {"x": 200.0, "y": 100.0, "z": 0.0, "class": "ground"}],
        "sensor": {"d_max": 200.0, "h_view": 90.0},
        "vehicle": {"rho_min": 40.0, "gamma_min": -0.26, "gamma_max": 0.35,
                    "v": 20.0},
    }
    path = tmp_path / "close.json"
    path.write_text(dump_json(scene))
    code = run(["plan", path, "--alg", "2D-DTSP-4"])
    assert code == EXIT_VALIDATION
    assert "separation" in capsys.readouterr().err


def test_experiment_command(tmp_path):
    out = tmp_path / "sweep.csv"
    config = {
        "seeds": [0, 1],
        "algorithms": ["3D-METSPN-RFAC-4-4"],
        "scenario": {"n_targets": 3},
        "output": str(out),
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))
    assert run(["experiment", cfg_path]) == EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "seed,M,algorithm,n_pts,n_psi,n_gamma," \
                       "length_m,normalized_cost,wall_clock_s,status"
    assert len(lines) == 3
    # resume adds nothing new
    assert run(["experiment", cfg_path, "--resume"]) == EXIT_OK
    assert len(out.read_text().strip().splitlines()) == 3


def test_dump_json_nine_significant_digits():
    text = dump_json({"a": 1.0 / 3.0, "b": [1.5, 2], "c": "x", "d": None})
    assert text == '{"a": 0.333333333, "b": [1.5, 2], "c": "x", "d": null}\n'
    assert json.loads(text) == {"a": 0.333333333, "b": [1.5, 2], "c": "x",
                                "d": None}
