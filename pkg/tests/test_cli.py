import csv
import io
import json
import math

import numpy as np
import pytest

from chargeflow import cli


def run(tmp_path, scenario, cfg=None, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg or {}))
    out = tmp_path / f"{scenario}.out"
    code = cli.main([scenario, "--config", str(path), "--out", str(out), *extra])
    return code, (out.read_text() if out.exists() else None)


def parse_csv(text):
    lines = text.splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(ln for ln in lines if not ln.startswith("#")))))
    return meta, rows


def test_help_documents_columns(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for scenario, cols in cli.COLUMNS.items():
        assert scenario in out and ", ".join(cols[:3]) in out


def test_gauss_map_antisymmetric_and_metadata(tmp_path):
    code, text = run(tmp_path, "gauss-map", {"x1": {"start": -10, "stop": 10, "num": 21},
                                             "x2": {"start": -10, "stop": 10, "num": 21}})
    assert code == 0
    meta, rows = parse_csv(text)
    assert any(m.startswith("# config: ") for m in meta)
    resolved = json.loads(next(m for m in meta if m.startswith("# resolved: "))[len("# resolved: "):])
    assert resolved["case"] == "A" and resolved["p0"] == 5.0 and resolved["sigma_p"] == pytest.approx(2**-0.5)
    table = {(float(r["x1"]), float(r["x2"])): float(r["dqd"]) for r in rows}
    for (a, b), v in table.items():
        assert v == -table[(b, a)]
        if a == b:
            assert v == 0.0


def test_gauss_map_deterministic(tmp_path):
    cfg = {"x1": {"start": -3, "stop": 3, "num": 7}, "x2": {"start": -3, "stop": 3, "num": 7}}
    _, first = run(tmp_path, "gauss-map", cfg)
    _, second = run(tmp_path, "gauss-map", cfg, "--override", "workers=2")
    assert first.split("\n", 2)[2] == second.split("\n", 2)[2]  # identical rows and resolved metadata


def test_gauss_map_cases_a_b_translate(tmp_path):
    """Shifting the packet shifts the map when the interference phase p0 * shift is a multiple of 2 pi."""
    shift = 4.75
    p0 = 2 * math.pi * 4 / shift
    grids = {}
    for name, offset in (("A", 0.0), ("B", shift)):
        rng = {"start": -6 + offset, "stop": 6 + offset, "num": 13}
        code, text = run(tmp_path, "gauss-map", {"p0": p0, "x1": rng, "x2": rng}, "--case", name)
        assert code == 0
        grids[name] = np.array([float(r["dqd"]) for r in parse_csv(text)[1]])
    np.testing.assert_allclose(grids["A"], grids["B"], atol=1e-12)


def test_gauss_map_plateau_cells(tmp_path):
    rng = {"start": 9.0, "stop": 20.0, "num": 6}
    code, text = run(tmp_path, "gauss-map", {"x1": rng, "x2": rng})
    assert code == 0
    assert max(abs(float(r["dqd"])) for r in parse_csv(text)[1]) < 1e-6


def _scan(tmp_path, x_g, p0_values):
    rows = []
    for p0 in p0_values:
        code, text = run(tmp_path, "gauss-scan", {"x_g": x_g, "p0": {"start": p0, "stop": p0, "num": 1}})
        assert code == 0
        rows.append(np.array([float(r["dqd"]) for r in parse_csv(text)[1]]))
    return rows


def test_gauss_scan_fringe_rows(tmp_path):
    sp = 2**-0.5
    inside = {"start": 0.0, "stop": 5.0, "num": 101}
    on, near, off = _scan(tmp_path, inside, [5.0, 5.0 + 2 * sp, 5.0 + 6 * sp])
    depth = [np.ptp(r) for r in (on, near, off)]
    assert depth[0] == max(depth)
    assert depth[2] < 0.05 * depth[0]


def test_gauss_scan_far_packet_columns(tmp_path):
    code, text = run(tmp_path, "gauss-scan", {"x_g": {"start": -60, "stop": 60, "num": 2},
                                              "p0": {"start": 1.0, "stop": 9.0, "num": 5}})
    assert code == 0
    meta, rows = parse_csv(text)
    assert len(rows) == 10
    assert max(abs(float(r["dqd"])) for r in rows) < 1e-6
    assert '"x1": -2.57843' in meta[2] and '"x2": 7.82843' in meta[2]


@pytest.mark.parametrize("cfg, extra", [
    ({"bogus": 1}, []),
    ({"x1": {"num": 0}}, []),
    ({"packet": {"sigma_p": -1}}, []),
    ({}, ["--override", "p0=0"]),
    ({}, ["--override", "x1"]),
])
def test_config_errors(tmp_path, capsys, cfg, extra):
    code, _ = run(tmp_path, "gauss-map", cfg, *extra)
    assert code == cli.EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_unreadable_config(tmp_path):
    assert cli.main(["gauss-map", "--config", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["gauss-map", "--config", str(bad)]) == cli.EXIT_CONFIG


def test_cerf_strip_is_config_error(tmp_path):
    code, _ = run(tmp_path, "gauss-scan", {"p0": {"start": 1.0, "stop": 40.0, "num": 3}})
    assert code == cli.EXIT_CONFIG


def test_precedence():
    cfg = cli.resolve_config("gauss-map", {"case": "B", "x1": {"num": 5}}, "C", ["x1.num=7", "p0=2.5"])
    assert cfg["case"] == "C" and cfg["x1"] == {"start": -10.0, "stop": 10.0, "num": 7} and cfg["p0"] == 2.5
    with pytest.raises(cli.ConfigError):
        cli.resolve_config("laser-sweep", {}, "A")


def test_verify_empty_check_list(tmp_path):
    code, text = run(tmp_path, "verify", {"checks": []})
    assert code == 0
    report = json.loads(text)
    assert report["passed"] is True and report["checks"] == []


def test_verify_half_coefficient_fails(tmp_path):
    code, text = run(tmp_path, "verify", {"checks": ["agreement_triangle", "coefficient"], "density_weight": 0.5})
    assert code == cli.EXIT_VERIFY
    checks = {c["name"]: c for c in json.loads(text)["checks"]}
    assert not checks["agreement_triangle"]["passed"]
    assert checks["agreement_triangle"]["values"]["max_gap"] > 10 * 5e-3
    assert checks["coefficient"]["passed"]


def test_verify_default_passes(tmp_path):
    code, text = run(tmp_path, "verify")
    report = json.loads(text)
    assert code == 0, [c for c in report["checks"] if not c["passed"]]
    assert {c["name"] for c in report["checks"]} == set(cli.verify.CHECKS)


def test_verify_literal_plateau_distance_fails(tmp_path):
    code, text = run(tmp_path, "verify", {"checks": ["fringe"], "plateau_sigmas": 5.0})
    assert code == cli.EXIT_VERIFY
    assert json.loads(text)["checks"][0]["values"]["plateau_max"] > 1e-6


def test_verify_slow_case_reports_numerical_error(tmp_path):
    code, _ = run(tmp_path, "verify", {"checks": ["agreement_triangle"]}, "--case", "C")
    assert code == cli.EXIT_CONVERGENCE


SMALL_LASER = {"grid": {"points": 8192}, "solver": {"dt": 0.5, "check_convergence": False}}


def test_laser_sweep_zero_field(tmp_path):
    code, text = run(tmp_path, "laser-sweep", {**SMALL_LASER, "f0": [0.0]})
    assert code == 0
    meta, rows = parse_csv(text)
    assert float(rows[0]["dqd"]) == 0.0 and rows[0]["status"] == "unchecked"
    resolved = json.loads(meta[2][len("# resolved: "):])
    assert resolved["x2"] - resolved["x1"] == pytest.approx(800 * 18.8972612, rel=1e-6)
    assert resolved["p0_lattice"] == pytest.approx(0.1, rel=0.01)


def test_laser_sweep_convergence_failure_is_a_row_status(tmp_path):
    cfg = {**SMALL_LASER, "f0": [1e-3], "solver": {"dt": 0.5, "convergence": 1e-30}}
    code, text = run(tmp_path, "laser-sweep", cfg)
    assert code == 0
    row = parse_csv(text)[1][0]
    assert row["converged"] == "false" and row["status"].startswith("convergence")
