import json

import pytest

from congruence import cli


def _run(tmp_path, *argv, config=None):
    args = list(argv)
    if config is not None:
        path = tmp_path / "run.toml"
        path.write_text("version = 1\n" + config)
        args += ["--config", str(path)]
    out = tmp_path / "out"
    status = cli.main(args + ["--out", str(out)])
    report = json.loads((out / f"{argv[0]}.json").read_text())
    return status, report, out


def test_surface_analyze(tmp_path):
    status, rep, out = _run(tmp_path, "surface-analyze", "--resolution", "12", "--csv")
    assert status == 0 and rep["status"] == 0
    assert rep["lagrangian_residual"] < 1e-10
    assert rep["criticality"]["certified"]
    assert (out / "spectrum.csv").exists() and (out / "W_density.csv").exists()


def test_functional_eval_closed_forms(tmp_path):
    status, rep, _ = _run(tmp_path, "functional-eval", config='[surface]\nexample = "geodesic_sphere"\nresolution = 12\n')
    assert status == 0
    w = rep["functionals"]["W"]
    assert abs(w["value"] - w["closed_form"]) < 1e-10


def test_parallel_check(tmp_path):
    status, rep, _ = _run(tmp_path, "parallel-check", "--resolution", "12")
    assert status == 0 and rep["pass"]


def test_variation_check_parallel(tmp_path):
    status, rep, _ = _run(tmp_path, "variation-check", config='[surface]\nresolution = 12\n[variation]\nkind = "parallel"\n')
    assert status == 0 and rep["residual"] < 1e-10


def test_structures_verify(tmp_path):
    status, rep, _ = _run(tmp_path, "structures-verify", config="[structures]\nsamples = 50\n")
    assert status == 0 and all(rep["checks"].values())
    assert rep["scalar_curvature"]["target"] == 8


def test_structures_verify_timelike(tmp_path):
    cfg = "[space]\nn = 2\np = 1\nepsilon = -1\n[structures]\nsamples = 50\n"
    status, rep, _ = _run(tmp_path, "structures-verify", config=cfg)
    assert status == 0 and rep["scalar_curvature"]["target"] == -8


def test_config_error_exit_code(tmp_path, capsys):
    status, rep, _ = _run(tmp_path, "surface-analyze", config='[surface]\nexample = "cube"\n')
    assert status == 2 and rep["error"] == "ConfigError"
    status, rep, _ = _run(tmp_path, "surface-analyze", config="[bogus]\nx = 1\n")
    assert status == 2


def test_gprime_on_umbilic_surface_is_geometry_error(tmp_path):
    cfg = '[surface]\nexample = "geodesic_sphere"\nresolution = 12\n[variation]\nkind = "parallel"\ngprime = true\n'
    status, rep, _ = _run(tmp_path, "variation-check", config=cfg)
    assert status == 3 and rep["error"] == "UmbilicDegeneracy"


def test_mismatched_space_is_config_error(tmp_path):
    status, rep, _ = _run(tmp_path, "surface-analyze", config="[space]\nn = 2\np = 3\nepsilon = -1\n")
    assert status == 2


def test_critical_search_budget_exhausted_fails(tmp_path):
    cfg = '[search]\nbudget = 2\nbumps = 1\n[search.params]\nresolution = 12\n'
    status, rep, out = _run(tmp_path, "critical-search", "--csv", config=cfg)
    assert status == 1
    assert rep["trace"]["termination"] == "budget"
    assert rep["trace"]["evaluations"] == 3
    assert (out / "trace.csv").exists()


def test_critical_search_certifies_critical_start(tmp_path):
    cfg = '[search]\nstart = [0.0, 0.0]\nbumps = 2\n[search.params]\nresolution = 12\n'
    status, rep, _ = _run(tmp_path, "critical-search", config=cfg)
    assert status == 0 and rep["certificate"]["certified"]


def test_export_then_import(tmp_path):
    status, rep, out = _run(tmp_path, "export-grid", "--resolution", "10")
    assert status == 0 and rep["roundtrip_bit_exact"]
    grid = out / "chart.grid"
    assert grid.exists() and (out / "gauss_map.grid").exists()
    status, rep, _ = _run(tmp_path, "import-grid", "--grid", str(grid))
    assert status == 0 and rep["roundtrip_bit_exact"]
    assert rep["lagrangian_residual"] < 1e-10


def test_import_needs_a_grid(tmp_path):
    status, rep, _ = _run(tmp_path, "import-grid")
    assert status == 2


def test_import_missing_file(tmp_path):
    status, rep, _ = _run(tmp_path, "import-grid", "--grid", str(tmp_path / "none.grid"))
    assert status == 2


def test_json_to_stdout_is_deterministic(tmp_path, capsys):
    args = ["surface-analyze", "--resolution", "10", "--seed", "3", "--json"]
    assert cli.main(args) == 0
    first = capsys.readouterr().out
    assert cli.main(args) == 0
    assert capsys.readouterr().out == first
    assert json.loads(first)["command"] == "surface-analyze"


def test_negative_seed(tmp_path):
    status, rep, _ = _run(tmp_path, "surface-analyze", "--seed", "-1")
    assert status == 2


def test_unknown_command():
    with pytest.raises(SystemExit):
        cli.main(["frobnicate"])
