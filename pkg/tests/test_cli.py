import json
import math
import xml.etree.ElementTree as ET

import pytest

from meridian_kit.cli import (CACHE_ENV, EXIT_ASSERT, EXIT_OK, EXIT_USAGE, RunConfig, build_parser,
                              config_from_args, main)
from meridian_kit.domain import Cap, Disk, Point, make_domain

from conftest import annulus


def write_domain(path, dom):
    path.write_text(json.dumps(dom.to_json()))
    return str(path)


@pytest.fixture
def annulus_file(tmp_path):
    return write_domain(tmp_path / "annulus.json", annulus(0.25))


def test_malformed_json_is_a_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["density", str(bad), "--out", str(tmp_path)]) == EXIT_USAGE
    assert "input error" in capsys.readouterr().err


def test_invalid_domain_is_a_usage_error(tmp_path):
    path = tmp_path / "overlap.json"
    path.write_text(json.dumps({"components": [
        {"kind": "disk", "center": [0, 0], "radius": 2.0},
        {"kind": "disk", "center": [1, 0], "radius": 2.0}]}))
    assert main(["meridians", str(path), "--out", str(tmp_path)]) == EXIT_USAGE


def test_unknown_experiment_and_bad_flags(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["experiment", "thm99"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["meridians"])
    assert info.value.code == EXIT_USAGE
    assert main(["meridians", "x.json", "--tol", "-1"]) == EXIT_USAGE


def test_config_defaults_and_validation(monkeypatch):
    monkeypatch.setenv(CACHE_ENV, "/tmp/somewhere")
    cfg = config_from_args(build_parser().parse_args(["meridians", "d.json"]))
    assert cfg.cache == "/tmp/somewhere"
    assert (cfg.seeds, cfg.tol, cfg.max_iter, cfg.jobs) == (8, 1e-4, 3000, 1)
    with pytest.raises(ValueError):
        RunConfig(command="meridians", seeds=0)
    with pytest.raises(ValueError):
        RunConfig(command="meridians", dedup_tol=0.0)


def test_density_command_writes_report_and_heatmap(tmp_path, annulus_file, capsys):
    out = tmp_path / "out"
    assert main(["density", annulus_file, "--out", str(out), "--cache", str(tmp_path / "c"),
                 "--svg"]) == EXIT_OK
    body = json.loads((out / "density.json").read_text())
    assert body["schema_version"] == 1 and body["command"] == "density"
    assert body["density"]["residual"] < 1e-6
    lb = body["density"]["boundary_bounds"]
    assert lb["passed"] == lb["checked"] > 0
    ET.parse(out / "density.svg")
    assert "residual" in capsys.readouterr().out


def test_cached_density_rerun_is_identical(tmp_path, annulus_file, capsys):
    args = ["density", annulus_file, "--cache", str(tmp_path / "c")]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    assert "loaded from cache" in capsys.readouterr().err
    assert (tmp_path / "a" / "density.json").read_bytes() == (tmp_path / "b" / "density.json").read_bytes()


def test_annulus_meridians_one_row(tmp_path, annulus_file):
    out = tmp_path / "out"
    assert main(["meridians", annulus_file, "--out", str(out), "--seeds", "2", "--svg"]) == EXIT_OK
    body = json.loads((out / "meridians.json").read_text())
    assert len(body["classes"]) == 1
    row = body["classes"][0]
    assert row["length"] == pytest.approx(2 * math.pi ** 2 / math.log(4), rel=0.02)
    assert row["simple"] and row["principal"] and row["unique_evidence"] == 1
    root = ET.parse(out / "meridians.svg").getroot()
    assert any("length" in (t.text or "") for t in root.iter("{http://www.w3.org/2000/svg}text"))


def test_simply_connected_domain_has_no_rows(tmp_path, capsys):
    path = write_domain(tmp_path / "disk.json", make_domain([Cap(1.0)]))
    assert main(["meridians", path, "--out", str(tmp_path)]) == EXIT_OK
    assert "no meridian classes" in capsys.readouterr().out
    assert json.loads((tmp_path / "meridians.json").read_text())["classes"] == []


def test_lone_puncture_class_is_skipped(tmp_path):
    dom = make_domain([Point(0j), Disk(0.6 + 0j, 0.1), Cap(1.0)])
    path = write_domain(tmp_path / "p.json", dom)
    assert main(["meridians", path, "--out", str(tmp_path), "--seeds", "1"]) == EXIT_OK
    body = json.loads((tmp_path / "meridians.json").read_text())
    assert [(s["E"], s["reason"]) for s in body["skipped"]] == [([0], "trivial separation")]
    assert [r["E"] for r in body["classes"]] == [[0, 1], [1]]


def test_experiment_exit_code_follows_assertions(tmp_path, monkeypatch):
    import meridian_kit.cli as cli
    from meridian_kit.experiments import ExperimentReport, _flag

    def fake(ok):
        def run(*args, **kwargs):
            return ExperimentReport("thm14", annulus(0.25), {}, {}, (_flag("x", ok),))
        return run

    monkeypatch.setattr(cli, "run_four_component", fake(True))
    assert main(["experiment", "thm14", "--out", str(tmp_path)]) == EXIT_OK
    monkeypatch.setattr(cli, "run_four_component", fake(False))
    assert main(["experiment", "thm14", "--out", str(tmp_path)]) == EXIT_ASSERT
    body = json.loads((tmp_path / "experiment_thm14.json").read_text())
    assert body["report"]["passed"] is False
