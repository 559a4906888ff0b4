import json

import pytest

from levelset.cli import main


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


EXPERIMENT = {
    "instance": {
        "kind": "explicit_linear",
        "params": {"theta": [1.0, 0.0], "points": [[1, 0], [0, 1], [0.8, 0.6]]},
        "threshold": ["explicit", 0.5],
    },
    "noise_std": 0.0,
    "algorithm": {"name": "melk", "params": {"gamma": 0.0}},
    "seeds": [0, 1],
    "checkpoints": [100000],
}


def test_run_and_summarize(tmp_path, capsys):
    cfg = write_json(tmp_path / "exp.json", EXPERIMENT)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "metrics.csv").exists()
    assert main(["summarize", "--in", str(out / "metrics.csv"),
                 "--out", str(out)]) == 0
    assert (out / "summary.csv").exists()
    text = (out / "summary.csv").read_text()
    assert "f1_mean" in text


def test_run_seed_override(tmp_path):
    cfg = write_json(tmp_path / "exp.json", EXPERIMENT)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out), "--seeds", "5"]) == 0
    from levelset.harness import read_metrics

    rows = read_metrics(out / "metrics.csv")
    assert {r["seed"] for r in rows} == {5}


def test_missing_config_is_exit_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "none.json"),
                 "--out", str(tmp_path)]) == 2


def test_bad_schema_is_exit_2(tmp_path):
    cfg = write_json(tmp_path / "exp.json", {"instance": {"kind": "nope"},
                                             "algorithm": {"name": "melk"}})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_design_solve(tmp_path):
    cfg = write_json(tmp_path / "d.json", {
        "arms": {"points": [[1, 0], [0, 1]], "kernel": {"kind": "linear"}},
        "targets": "arms",
        "gamma": 0.0,
    })
    out = tmp_path / "design.json"
    assert main(["design-solve", "--config", cfg, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["weights"] == pytest.approx([0.5, 0.5], abs=0.02)
    assert doc["value"] == pytest.approx(2.0, rel=0.02)


def test_env_generate_and_oracle_allocation(tmp_path):
    cfg = write_json(tmp_path / "env.json", {
        "instance": {"kind": "soare", "params": {"n": 6, "d": 3},
                     "threshold": ["explicit", 0.5]},
        "seed": 4,
    })
    env_out = tmp_path / "env_out.json"
    assert main(["env-generate", "--config", cfg, "--out", str(env_out)]) == 0
    doc = json.loads(env_out.read_text())
    assert len(doc["true_f"]) == 6

    ora_out = tmp_path / "oracle.csv"
    assert main(["oracle-allocation", "--config", cfg, "--out", str(ora_out)]) == 0
    lines = ora_out.read_text().strip().splitlines()
    assert len(lines) == 7  # header + 6 arms
    assert lines[0].split(",")[-1] == "round"
    assert all(line.split(",")[-1] == "-2" for line in lines[1:])


def test_design_solve_pairs_targets(tmp_path):
    cfg = write_json(tmp_path / "d.json", {
        "instance": {"kind": "soare", "params": {"n": 5, "d": 3},
                     "threshold": ["implicit", 0.5]},
        "seed": 0,
        "targets": {"pairs": 0.5},
        "gamma": 1e-6,
        "fw": {"max_iters": 200},
    })
    out = tmp_path / "design.json"
    assert main(["design-solve", "--config", cfg, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["weights"]) == 5
    assert sum(doc["weights"]) == pytest.approx(1.0, abs=1e-9)
