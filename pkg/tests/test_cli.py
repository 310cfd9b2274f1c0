import json
from importlib import resources

import jsonschema
import pytest

from phasekick.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out)


def schema(name):
    text = resources.files("phasekick").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def test_kickback_examples(capsys):
    code, rec = run_json(capsys, "kickback", "--theta", "0.25", "--phi", "0")
    assert code == 0 and rec["results"]["p0"] == pytest.approx(0.5)
    _, a = run_json(capsys, "kickback", "--theta", "0.125")
    _, b = run_json(capsys, "kickback", "--theta", "0.125", "--variant", "standard")
    assert a["results"]["p0"] == pytest.approx(0.853553, abs=1e-6)
    assert a["results"]["p0"] == pytest.approx(b["results"]["p0"], abs=1e-10)
    assert a["seed"] == 0
    jsonschema.validate(a, schema("kickback"))


@pytest.mark.parametrize("argv", [
    ["kickback", "--theta", "1.0"],
    ["kickback", "--theta", "-0.1"],
    ["kickback", "--theta", "abc"],
    ["qpe", "--bits", "13", "--theta", "0.1"],
    ["shor", "-N", "15", "--a", "6"],
    ["heisenberg", "-N", "2", "--t", "3"],
    ["heisenberg"],
    ["heisenberg", "--descriptor", '{"N": 2, "bogus": 1}'],
    ["resources", "--m-range", "0:3"],
    ["nonsense"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_qpe_examples(capsys):
    code, rec = run_json(capsys, "qpe", "--bits", "3", "--theta", "0.375", "--compare-standard")
    r = rec["results"]
    assert code == 0 and r["map_outcome"] == 3 and r["distribution"][3] >= 1 - 1e-9
    assert r["tvd_vs_standard"] <= 1e-10
    jsonschema.validate(rec, schema("qpe"))
    _, rec = run_json(capsys, "qpe", "--bits", "3", "--theta", "0.375", "--delta", "0")
    assert rec["results"]["success_probability"] >= 1 - 1e-9
    _, rec = run_json(capsys, "qpe", "--bits", "3", "--theta", "0.375", "--delta", "0.2",
                      "--compare-standard")
    assert rec["results"]["success_probability"] < 1 - 1e-3


def test_resources_examples(capsys):
    code, rec = run_json(capsys, "resources", "--m-range", "1,10", "--n1u", "1", "--n1w", "1")
    rows = rec["results"]["rows"]
    assert code == 0
    assert rows[0]["ratio_float"] == 1.0 and rows[1]["ratio_float"] == 51.2
    _, rec2 = run_json(capsys, "resources", "--m-range", "10", "--n1u", "1", "--n1w", "1",
                       "--n2u", "2")
    assert rec2["results"]["rows"][0]["ratio_float"] < 51.2
    jsonschema.validate(rec, schema("resources"))
    code, out, _ = run(capsys, "resources", "--m-range", "1:2", "--n1u", "1", "--n1w", "1",
                       "--csv")
    assert out.splitlines() == ["m,cost_standard,cost_uncontrolled,ratio", "1,2,4,1", "2,6,8,1"]


def test_heisenberg_example(capsys, tmp_path):
    code, rec = run_json(capsys, "heisenberg", "-N", "2", "--J", "1", "-m", "8",
                         "--evolution", "exact")
    r = rec["results"]
    assert code == 0 and abs(r["energy"] + 3) <= r["grid_step"]
    jsonschema.validate(rec, schema("heisenberg"))
    desc = tmp_path / "h.json"
    desc.write_text(json.dumps({"N": 2, "J": 1, "m": 8, "evolution": "exact_dense"}))
    _, rec2 = run_json(capsys, "heisenberg", "--descriptor", str(desc))
    assert rec2["results"] == r


def test_shor_example_and_failure(capsys):
    code, rec = run_json(capsys, "shor", "-N", "15", "--a", "7", "-m", "3")
    assert code == 0 and rec["results"]["order"] == 4
    jsonschema.validate(rec, schema("shor"))
    code, rec = run_json(capsys, "shor", "--descriptor",
                         '{"N": 15, "a": 7, "m": 1, "runs": 4, "seed": 2}')
    assert code == 1 and rec["results"]["order"] is None and rec["seed"] == 2
    jsonschema.validate(rec, schema("shor"))


@pytest.mark.parametrize("argv", [
    ["kickback", "--theta", "0.3", "--phi", "0.1"],
    ["qpe", "--theta", "0.2", "--delta", "0.1", "--compare-standard"],
    ["resources", "--m-range", "1:5", "--n2u", "1", "--n1w", "2"],
    ["heisenberg", "-N", "3", "-m", "5", "--candidate", "basis:010"],
    ["shor", "-N", "21", "--a", "2", "--seed", "5"],
])
def test_json_is_deterministic_and_valid(capsys, argv):
    _, a = run_json(capsys, *argv)
    _, b = run_json(capsys, *argv)
    a.pop("wall_time_s"), b.pop("wall_time_s")
    assert a == b
    a["wall_time_s"] = 0.0
    jsonschema.validate(a, schema(argv[0]))


def test_text_output(capsys):
    code, out, _ = run(capsys, "qpe", "--theta", "0.375")
    assert code == 0 and "map_outcome: 3" in out and "seed 0" in out


def test_output_dir_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("PHASEKICK_OUTPUT_DIR", str(tmp_path))
    run(capsys, "resources", "--m-range", "1:3", "--n1u", "1", "--n1w", "1")
    rec = json.loads((tmp_path / "resources-seed0.json").read_text())
    assert rec["command"] == "resources"
    assert (tmp_path / "resources-seed0.csv").read_text().startswith("m,cost_standard")


def test_module_entry_point():
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "phasekick", "kickback", "--theta", "0.25",
                           "--json"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["p0"] == pytest.approx(0.5)
