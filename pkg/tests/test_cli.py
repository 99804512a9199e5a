import csv
import json
from dataclasses import replace

import pytest

from config import load_var
from irsa_toolkit import main


@pytest.fixture
def config(tmp_path):
    return replace(load_var(), output_dir=tmp_path)


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# JSON commands
# ---------------------------------------------------------------------------

def test_design_k2(tmp_path, config):
    out = tmp_path / "design.json"
    assert main(["design", "--k", "2", "--eps", "0.01", "--l", "5", "--g-tol", "1e-3", "--out", str(out)], config) == 0

    result = json.loads(out.read_text(encoding="utf-8"))
    assert result["a_star"] == pytest.approx(1.73, abs=1e-9)
    assert result["load_bound"] == pytest.approx(1.6757, abs=1e-3)
    assert result["mean_degree"] == pytest.approx(2.74, abs=0.005)
    assert 1.66 <= result["de_threshold"] <= 1.69
    assert [e["degree"] for e in result["distribution"]["entries"]] == [2, 3, 4, 5, 6]


def test_design_l1_is_regular(tmp_path, config):
    out = tmp_path / "design.json"
    assert main(["design", "--k", "2", "--eps", "0.1", "--l", "1", "--g-tol", "1e-3", "--out", str(out)], config) == 0
    result = json.loads(out.read_text(encoding="utf-8"))
    assert result["distribution"] == {"entries": [{"degree": 2, "prob": 1.0}]}


def test_threshold_with_bundled_distribution(tmp_path, config):
    out = tmp_path / "threshold.json"
    assert main(["threshold", "--dist", "lambda3.json", "--k", "2", "--g-tol", "1e-3", "--out", str(out)], config) == 0
    result = json.loads(out.read_text(encoding="utf-8"))
    assert 0.0 < result["g_star"] < 2.0
    assert result["certificate"]["certified"]
    assert result["certificate"]["min_residual"] > 0.0


def test_threshold_collision_channel(tmp_path, config):
    dist = tmp_path / "regular2.json"
    dist.write_text(json.dumps({"entries": [{"degree": 2, "prob": 1.0}]}), encoding="utf-8")
    out = tmp_path / "threshold.json"
    assert main(["threshold", "--dist", str(dist), "--k", "1", "--g-tol", "1e-3", "--out", str(out)], config) == 0
    assert json.loads(out.read_text(encoding="utf-8"))["g_star"] == pytest.approx(0.5, abs=0.01)


# ---------------------------------------------------------------------------
# CSV commands
# ---------------------------------------------------------------------------

def test_table1_csv(tmp_path, config):
    out = tmp_path / "table1.csv"
    assert main(["table1", "--out", str(out)], config) == 0
    text = out.read_text(encoding="utf-8")
    assert text.splitlines()[0] == "L,ratio,published,relative_delta"
    rows = read_rows(out)
    assert len(rows) == 7
    assert rows[0]["ratio"] == "0.865"


def test_table1_to_stdout(capsys, config):
    assert main(["table1", "--l-max", "3"], config) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "L,ratio,published,relative_delta"
    assert len(lines) == 4


@pytest.mark.parametrize("p_tx, l_star", [("50", "2"), ("35", "3"), ("20", "4")])
def test_energy_marks_optimum(tmp_path, config, p_tx, l_star):
    out = tmp_path / "energy.csv"
    assert main(["energy", "--ptx", p_tx, "--pc", "0.1", "--noise", "1", "--users", "1000", "--out", str(out)], config) == 0
    rows = read_rows(out)
    assert list(rows[0]) == ["L", "A", "B", "E", "Gamma", "ratio", "is_optimal"]
    assert len(rows) == 20
    assert [r["L"] for r in rows if r["is_optimal"] == "true"] == [l_star]


def test_energy_without_circuit_power(tmp_path, config):
    out = tmp_path / "energy.csv"
    assert main(["energy", "--ptx", "50", "--pc", "0", "--out", str(out)], config) == 0
    rows = read_rows(out)
    # with no idle power E = P_tx A_L, increasing in L
    assert rows[0]["is_optimal"] == "true"
    assert float(rows[4]["E"]) == pytest.approx(50.0 * float(rows[4]["A"]), rel=1e-8)
    assert float(rows[4]["E"]) == pytest.approx(137.0085, abs=1e-3)


def test_simulate_columns(tmp_path, config):
    out = tmp_path / "sim.csv"
    argv = ["simulate", "--l", "5", "--load", "1.2", "--users", "200", "--trials", "5", "--seed", "7", "--out", str(out)]
    assert main(argv, config) == 0
    rows = read_rows(out)
    assert len(rows) == 1
    assert list(rows[0]) == ["G", "realized_G", "plr", "ci_low", "ci_high", "throughput",
                             "trials", "M", "K", "seed", "plr_theory"]
    assert rows[0]["seed"] == "7"
    assert rows[0]["M"] == "200"


def test_stop_curve(tmp_path, config):
    out = tmp_path / "curve.csv"
    assert main(["stop-curve", "--points", "25", "--out", str(out)], config) == 0
    rows = read_rows(out)
    assert len(rows) == 25
    assert all(float(r["f"]) <= float(r["tilde_f"]) + 1e-12 for r in rows)


# ---------------------------------------------------------------------------
# Determinism
# ---------------------------------------------------------------------------

def test_threads_do_not_change_bytes(tmp_path, config):
    outputs = []
    for threads in ("1", "8"):
        out = tmp_path / f"plr_{threads}.csv"
        argv = ["plr-curve", "--l", "5", "--loads", "1.4,1.0", "--users", "200", "--trials", "8",
                "--threads", threads, "--out", str(out)]
        assert main(argv, config) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert outputs[0].count(b"\n") == 3


def test_manifest_runs_are_byte_identical(tmp_path, config):
    manifest = tmp_path / "experiment.json"
    manifest.write_text(json.dumps({
        "command": "plr-curve",
        "parameters": {"dist": "lambda2.json", "k": 2, "loads": [1.2, 1.5], "users": 300, "trials": 6},
        "output_path": "run.csv",
        "seed": 5,
    }), encoding="utf-8")

    assert main(["--manifest", str(manifest)], config) == 0
    first = (tmp_path / "run.csv").read_bytes()
    assert main(["--manifest", str(manifest), "--threads", "4"], config) == 0
    assert (tmp_path / "run.csv").read_bytes() == first


def test_bundled_manifests_validate(config):
    from manifest import build_manifest, read_manifest_file
    for path in sorted(config.manifests_dir.glob("*.json")):
        raw = read_manifest_file(path)
        manifest = build_manifest(raw["command"], raw["parameters"], raw["output_path"], raw["seed"], config)
        assert manifest.output_path is not None


# ---------------------------------------------------------------------------
# Exit codes
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "argv",
    [
        ["plr-curve", "--l", "5", "--loads", ""],
        ["plr-curve", "--l", "5"],
        ["energy", "--loads", "1.0"],
        ["energy", "--ptx", "-5"],
        ["energy", "--pc", "-0.1"],
        ["design", "--k", "0"],
        ["table1", "--seed", "-3"],
        ["bogus"],
        [],
    ],
)
def test_validation_exit_code(config, argv):
    assert main(argv, config) == 2


def test_missing_distribution_exit_code(tmp_path, config):
    assert main(["threshold", "--dist", str(tmp_path / "absent.json")], config) == 3


def test_missing_manifest_exit_code(tmp_path, config):
    assert main(["--manifest", str(tmp_path / "absent.json")], config) == 3


def test_bad_bracket_exit_code(tmp_path, config):
    dist = tmp_path / "regular2.json"
    dist.write_text(json.dumps({"entries": [{"degree": 2, "prob": 1.0}]}), encoding="utf-8")
    # the collision channel is already past its threshold at the lower bracket
    assert main(["threshold", "--dist", str(dist), "--k", "1"], replace(config, g_lo=0.9)) == 4


@pytest.mark.parametrize("changes", [{"p_scan_upper": 1.0}, {"fd_step": 0.0}, {"scan_points": 1}])
def test_design_scan_settings_come_from_config(config, changes):
    assert main(["design", "--eps", "0.1", "--l", "1"], replace(config, **changes)) == 2
