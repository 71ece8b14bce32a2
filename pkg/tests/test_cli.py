import csv
import io
import json
import shutil
import subprocess
import sys
import time

import pytest

from sharpineq import cli

GRID36 = ["constants", "--n", "1..3", "--a", "0,0.5,1,2.5", "--p", "1.5,2,3", "--norm", "lq:2"]


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def records(text):
    if text.startswith("# manifest: "):
        return list(csv.DictReader(io.StringIO(text.partition("\n")[2])))
    return json.loads(text)["records"]


def test_single_point(capsys):
    code, out, _ = run(["constants", "--n", "2", "--a", "1", "--p", "2"], capsys)
    rows = records(out)
    assert code == 0 and len(rows) == 1
    assert rows[0]["status"] == "ok" and rows[0]["value"] > 0


def test_parameter_error_is_per_row(capsys):
    # n = 2, a = 1: p = n_a = 3
    code, out, _ = run(["constants", "--n", "2", "--a", "1", "--p", "2,3"], capsys)
    rows = records(out)
    assert code == 0
    assert [r["status"] for r in rows] == ["ok", "parameter-error"]


def test_grid_of_36_is_fast(capsys):
    t0 = time.perf_counter()
    code, out, _ = run(GRID36, capsys)
    elapsed = time.perf_counter() - t0
    assert code == 0 and len(records(out)) == 36
    assert elapsed < 1.0


def test_manifest_contents(capsys):
    _, out, _ = run(GRID36 + ["--seed", "5"], capsys)
    man = json.loads(out)["manifest"]
    assert man["command"] == "constants" and man["seed"] == 5
    assert man["tolerances"]["tol"] == 1e-8 and man["version"]
    assert man["params"]["a"] == "0,0.5,1,2.5" and man["wall_time"] >= 0


def test_default_seed(capsys):
    _, out, _ = run(["constants"], capsys)
    assert json.loads(out)["manifest"]["seed"] == 0x5EED


@pytest.mark.parametrize("argv", [
    ["constants", "--n", "3..1"],
    ["constants", "--p", "two"],
    ["constants", "--n", "1.5"],
    ["verify", "gn", "--alpha", "1"],
    ["verify", "gn", "--alpha", "0.5,1"],
    ["verify", "nonsense"],
    ["optimize", "--objective", "gn"],
    ["plotdata", "histogram"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv, capsys)[0] == 2


def test_bad_norm_is_a_row_error(capsys):
    code, out, _ = run(["constants", "--n", "2", "--norm", "lq:0.5"], capsys)
    assert code == 0 and records(out)[0]["status"] == "parameter-error"


def test_bad_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("SHARPINEQ_THREADS", "many")
    assert run(["constants"], capsys)[0] == 2


def test_csv_is_lossless(tmp_path, capsys):
    path = tmp_path / "c.csv"
    assert run(GRID36 + ["--format", "csv", "--out", str(path)], capsys)[0] == 0
    text = path.read_text()
    assert text.startswith("# manifest: ")
    rows_csv = records(text)
    _, out, _ = run(GRID36, capsys)
    rows_json = records(out)
    for a, b in zip(rows_csv, rows_json):
        if b["value"] is not None:
            assert float(a["value"]) == b["value"]


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_replay_identical_and_detects_tampering(tmp_path, capsys, fmt):
    path = tmp_path / f"out.{fmt}"
    argv = ["verify", "mc", "--quick", "--mc-samples", "20000", "--format", fmt, "--out", str(path)]
    assert run(argv, capsys)[0] == 0
    code, _, err = run(["replay", str(path)], capsys)
    assert code == 0 and "identical" in err
    text = path.read_text()
    if fmt == "json":
        data = json.loads(text)
        data["records"][0]["mc"] *= 1 + 1e-15
        path.write_text(json.dumps(data))
    else:
        head, _, tail = text.rpartition("true")
        path.write_text(head + "false" + tail)
    assert run(["replay", str(path)], capsys)[0] == 1


def test_thread_count_does_not_change_output(monkeypatch, capsys):
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("SHARPINEQ_THREADS", threads)
        _, out, _ = run(GRID36 + ["--kind", "all", "--alpha", "0.5,2"], capsys)
        outs.append(json.dumps(records(out)))
    assert outs[0] == outs[1]


def test_constants_canonical_order(capsys):
    _, out, _ = run(["constants", "--n", "3,1,2", "--a", "1,0", "--p", "2"], capsys)
    keys = [(r["n"], r["a"]) for r in records(out)]
    assert keys == sorted(keys)


def test_verify_sobolev_quick_passes(capsys):
    code, out, _ = run(["verify", "sobolev", "--quick"], capsys)
    assert code == 0
    assert all(r["pass"] for r in records(out))


def test_verify_gn_custom_alphas(capsys):
    code, out, _ = run(["verify", "gn", "--quick", "--alpha", "0.25,1.5"], capsys)
    rows = records(out)
    assert code == 0 and {r["alpha"] for r in rows} >= {0.25}


def test_verify_dimred_reports_invalid_points(capsys):
    code, out, _ = run(["verify", "dimred"], capsys)
    rows = records(out)
    bad = [r for r in rows if r.get("status") == "parameter-error"]
    assert code == 1 and len(bad) == 2
    assert all(r["pass"] for r in rows if r.get("status") != "parameter-error")


def test_plotdata_schemas(capsys):
    code, out, _ = run(["plotdata", "tensorization-convergence", "--format", "csv",
                        "--samples", "10"], capsys)
    assert code == 0
    assert out.splitlines()[1] == "k,c_k,limit,rel_gap"
    _, out, _ = run(["plotdata", "extremal-profiles", "--n", "2", "--a", "1", "--p", "2",
                     "--alpha", "2", "--format", "csv", "--samples", "5"], capsys)
    assert out.splitlines()[1] == "profile,r,h"
    _, out, _ = run(["plotdata", "transport-map", "--format", "csv", "--samples", "5"], capsys)
    assert out.splitlines()[1] == "r,psi"
    _, out, _ = run(["plotdata", "deficit-vs-perturbation", "--samples", "5"], capsys)
    assert all(r["deficit"] >= -1e-8 for r in records(out))


def test_transport_command(capsys):
    code, out, _ = run(["transport", "--source", "sobolev", "--target", "same",
                        "--samples", "5"], capsys)
    rows = records(out)
    assert code == 0
    ineq = rows[-1]
    assert ineq["record"] == "inequality" and abs(ineq["gap"]) < 1e-7


def test_optimize_command(capsys):
    code, out, _ = run(["optimize", "--budget", "100", "--restarts", "0"], capsys)
    rec = records(out)[0]
    assert code == 0 and rec["relative_gap"] >= -1e-6


def test_version(capsys):
    code, out, _ = run(["--version"], capsys)
    assert code == 0 and out.strip() == cli.__version__


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "sharpineq", "constants", "--n", "2"],
                         capture_output=True, text=True, timeout=60)
    assert res.returncode == 0 and json.loads(res.stdout)["records"]
    if shutil.which("sharpineq"):
        res = subprocess.run(["sharpineq", "verify", "gn", "--alpha", "1"],
                             capture_output=True, text=True, timeout=60)
        assert res.returncode == 2 and "alpha" in res.stderr
