import csv
import io
import json
import shutil
import subprocess

import pytest

from rookmix.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_tv_curve_exact_csv(capsys):
    code, out, err = run(capsys, "tv-curve", "--n", "3", "--d", "2", "--t-max", "2", "--mode", "exact")
    assert code == 0
    assert [r["tv"] for r in rows(out)] == ["8/9", "5/9", "7/36"]
    manifest = json.loads(err)["manifest"]
    assert manifest["command"] == "tv-curve" and manifest["mode"] == "exact"


def test_tv_curve_t_max_zero(capsys):
    code, out, _ = run(capsys, "tv-curve", "--n", "4", "--d", "3", "--t-max", "0")
    assert code == 0
    assert rows(out) == [{"t": "0", "tv": "63/64"}]


def test_tv_curve_float_and_spectral(capsys):
    code, out, _ = run(capsys, "tv-curve", "--n", "3", "--d", "6", "--t-max", "10",
                       "--mode", "float", "--spectral")
    assert code == 0
    for r in rows(out):
        assert abs(float(r["tv"]) - float(r["tv_spectral"])) <= 1e-12


def test_mixing_time_json(capsys):
    code, out, _ = run(capsys, "mixing-time", "--n", "3", "--d", "2", "--eps", "1/4,0.999",
                       "--format", "json", "--mode", "exact")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1 and set(doc) == {"schema_version", "manifest", "results"}
    assert [r["tmix"] for r in doc["results"]["rows"]] == [2, 0]
    assert doc["results"]["rows"][0]["eps"] == "1/4"


def test_bounds_command(capsys):
    code, out, _ = run(capsys, "bounds", "--n", "3", "--d", "2")
    assert code == 0
    rep = json.loads(out)["results"]["reports"][0]
    assert rep["mcleman_upper"] == 8 and rep["exact_tmix"] == 2
    assert rep["flags"]["wilson_lower"] == "not_evaluated"


def test_bounds_csv_blank_for_missing(capsys):
    code, out, _ = run(capsys, "bounds", "--n", "3", "--d", "2", "--format", "csv")
    assert code == 0
    assert rows(out)[0]["wilson_lower"] == ""


def test_verify_small(capsys):
    code, out, _ = run(capsys, "verify", "--n", "3", "--d", "3", "--t-max", "6")
    doc = json.loads(out)["results"]
    assert code == 0
    assert doc["summary"] == {"pass": 9, "fail": 0, "skipped": 0}


def test_verify_skips_above_cap(capsys):
    code, out, _ = run(capsys, "verify", "--n", "3", "--d", "13", "--t-max", "3")
    doc = json.loads(out)["results"]
    assert code == 0
    skipped = {c["name"] for c in doc["checks"] if c["status"] == "skipped"}
    assert skipped == {"lumping_equivalence", "transitivity"}


def test_cap_env_and_flag(capsys, monkeypatch):
    monkeypatch.setenv("ROOKMIX_CAP", "10")
    _, out, _ = run(capsys, "verify", "--n", "3", "--d", "3", "--t-max", "2")
    doc = json.loads(out)
    assert doc["results"]["summary"]["skipped"] == 2
    assert doc["manifest"]["config"]["cap"] == 10
    _, out, _ = run(capsys, "verify", "--n", "3", "--d", "3", "--t-max", "2", "--cap", "100")
    assert json.loads(out)["results"]["summary"]["skipped"] == 0


def test_verify_discrepancies(capsys):
    code, out, _ = run(capsys, "verify", "--n", "3", "--d", "2", "--t-max", "3",
                       "--report-discrepancies")
    disc = json.loads(out)["results"]["discrepancies"]["lemma_chain_t1"]
    assert code == 0
    assert (disc["four_tv_sq"], disc["as_stated_sum"], disc["orthonormal_sum"]) == \
        ("100/81", "3/8", "5/4")


def test_cutoff_command(capsys):
    code, out, _ = run(capsys, "cutoff", "--n", "3", "--d", "20,40", "--eps", "0.25")
    assert code == 0
    got = rows(out)
    assert [r["d"] for r in got] == ["20", "40"]
    assert float(got[0]["ratio"]) >= 1


def test_simulate_command(capsys):
    code, out, _ = run(capsys, "simulate", "--n", "3", "--d", "4", "--t", "5",
                       "--samples", "2000", "--seed", "3")
    assert code == 0
    got = rows(out)
    assert sum(int(r["count"]) for r in got) == 2000
    assert all(abs(float(r["z"])) < 5 for r in got)


def test_reruns_byte_identical(tmp_path):
    out = tmp_path / "sim.csv"
    argv = ["simulate", "--n", "3", "--d", "6", "--t", "4", "--samples", "5000", "--seed", "9",
            "--out", str(out)]
    assert main(argv) == 0
    first = out.read_bytes(), (tmp_path / "sim.csv.manifest.json").read_bytes()
    assert main(argv) == 0
    assert (out.read_bytes(), (tmp_path / "sim.csv.manifest.json").read_bytes()) == first
    assert json.loads(first[1])["manifest"]["seed"] == 9


def test_invalid_params_exit_codes(capsys):
    assert run(capsys, "tv-curve", "--n", "1", "--d", "2")[0] == 2
    assert run(capsys, "mixing-time", "--n", "3", "--d", "2", "--eps", "1.5")[0] == 2
    assert run(capsys, "tv-curve", "--n", "3", "--d", "2,3")[0] == 2
    assert run(capsys, "mixing-time", "--n", "3", "--d", "40", "--eps", "0.01",
               "--max-steps", "4")[0] == 4
    with pytest.raises(SystemExit) as exc:
        main(["tv-curve", "--n", "3"])
    assert exc.value.code != 0


def test_n2_warning_recorded(capsys):
    code, _, err = run(capsys, "tv-curve", "--n", "2", "--d", "3", "--t-max", "2")
    assert code == 0
    assert json.loads(err)["manifest"]["warnings"]


@pytest.mark.skipif(shutil.which("rookmix") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["rookmix", "tv-curve", "--n", "3", "--d", "2", "--t-max", "1"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines() == ["t,tv", "0,8/9", "1,5/9"]
