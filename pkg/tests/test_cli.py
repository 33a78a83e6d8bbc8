# tests/test_cli.py

import json

import numpy as np
import pandas as pd
import pytest

from reviewpriv import cli
from reviewpriv.engine.instance import PublicWeights
from reviewpriv.engine.weights import sse

def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err

@pytest.fixture
def worked_csv(repo, worked_example):
    return str(repo.save_public_weights(worked_example, "worked.csv"))

# --- ReleaseManager ---

def test_manager_release_on_singleton_polytope(manager, worked_example):
    """Midpoints of tight bounds are already the only feasible point."""
    out = manager.release(worked_example, np.array([0, 1 / 3, 2 / 3, 1]))
    np.testing.assert_allclose(out["t"], [0, 1 / 3, 2 / 3, 1], atol=1e-9)
    assert out["S"] == pytest.approx(2.0)

def test_manager_rejects_wrong_length(manager, worked_example):
    """Test that a noisy vector of the wrong length is refused."""
    with pytest.raises(ValueError):
        manager.release(worked_example, np.zeros(3))

def test_manager_oracle_report(manager, two_by_two):
    """Test the oracle report on the two-by-two instance."""
    report = manager.oracle_report(two_by_two)
    assert report["theta_size"] == 2
    assert report["theta"] == [[0.0, 1.0], [0.5, 0.5]]
    assert report["sound"] is True and report["violations"] == []

def test_manager_loads_scores_through_a_transform(manager, repo, tmp_path):
    """Test that raw scores become weights before bounding."""
    (tmp_path / "scores.csv").write_text("# n=2 loads=2\n2,4\n6,2\n")
    pw = manager.load_public("scores.csv", "miscalibration")
    assert pw.rows == ((-2.0, 2.0), (-4.0, 4.0))
    (tmp_path / "norm.csv").write_text("# n=2 loads=2\n1,3\n5,1\n")
    gap = manager.load_public("scores.csv", "subjectivity-gap", "norm.csv")
    assert gap.rows == ((1.0, 1.0), (1.0, 1.0))

# --- Subcommands ---

def test_prop1_prints_both_errors(capsys):
    """Test the prop1 subcommand's JSON output."""
    code, out, _ = run(capsys, "prop1")
    assert code == 0
    payload = json.loads(out)
    assert payload["noisy"] == pytest.approx(2.0)
    assert payload["projected"] == pytest.approx(2.06896, abs=5e-5)

def test_bounds_on_worked_example(capsys, worked_csv):
    """Test the bounds subcommand on the golden instance."""
    code, out, _ = run(capsys, "bounds", worked_csv)
    assert code == 0
    payload = json.loads(out)
    np.testing.assert_allclose(payload["L"], [0, 1 / 3, 2 / 3, 1], atol=1e-12)
    np.testing.assert_allclose(payload["U"], [0, 1 / 3, 2 / 3, 1], atol=1e-12)

def test_release_writes_output_file(capsys, repo, worked_csv):
    """Test that --output sends the release to a file."""
    repo.write_json({"r": [0.0, 1 / 3, 2 / 3, 1.0]}, "noisy.json")
    out_path = repo.resolve("released.json")
    code, _, _ = run(capsys, "release", worked_csv, str(repo.resolve("noisy.json")), "--output", str(out_path))
    assert code == 0
    np.testing.assert_allclose(json.loads(out_path.read_text())["t"], [0, 1 / 3, 2 / 3, 1], atol=1e-9)

def test_oracle_reports_soundness(capsys, worked_csv):
    """Test the oracle subcommand's soundness verdict."""
    code, out, _ = run(capsys, "oracle", worked_csv)
    assert code == 0
    payload = json.loads(out)
    assert payload["theta_size"] == 1 and payload["sound"] is True

def test_input_errors_exit_one(capsys, repo, tmp_path):
    """Bad files, missing files and bad flags all exit with code 1."""
    (tmp_path / "bad.csv").write_text("0,1\n")
    code, _, err = run(capsys, "bounds", str(tmp_path / "bad.csv"))
    assert code == 1 and "reviewpriv:" in err
    code, _, _ = run(capsys, "bounds", str(tmp_path / "missing.csv"))
    assert code == 1
    assert run(capsys, "bounds", "x.csv", "--no-such-flag")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1

def test_oracle_cap_exits_one(capsys, repo):
    """An instance above the oracle cap is an input error."""
    big = PublicWeights(rows=((0.0, 1.0),) * 7, reviewer_loads=(2,) * 7)
    path = repo.save_public_weights(big, "big.csv")
    code, _, err = run(capsys, "oracle", str(path))
    assert code == 1 and "cap" in err.lower()

def test_solver_failure_exits_two(capsys, repo, worked_csv):
    """A total no point of the polytope can reach exits with code 2."""
    repo.write_json([5.0, -3.0, 2.0, 0.0], "noisy.json")
    code, _, err = run(capsys, "release", worked_csv, str(repo.resolve("noisy.json")), "--total", "10", "--max-iterations", "20")
    assert code == 2 and "converge" in err

def test_simulate_requires_seed(capsys, repo):
    """Test that simulate refuses to run unseeded."""
    repo.write_json({"n_values": [4], "trials": 1}, "cfg.json")
    code, _, err = run(capsys, "simulate", str(repo.resolve("cfg.json")))
    assert code == 1 and "--seed" in err

def test_simulate_round_trip_through_release(capsys, repo):
    """One simulated trial replayed by hand: bounds, then release of the dumped noisy vector."""
    repo.write_json({"n_values": [6], "trials": 1, "distributions": [{"rule": "fixed", "a": 5, "b": 1}]}, "cfg.json")
    results, dump, instances = repo.resolve("results.csv"), repo.resolve("trials.csv"), repo.resolve("instances")
    code, _, _ = run(
        capsys, "simulate", str(repo.resolve("cfg.json")), "--seed", "7",
        "--output", str(results), "--dump", str(dump), "--instances", str(instances),
    )
    assert code == 0
    assert len(pd.read_csv(results)) == 1

    public = instances / "n6_t0_beta_5_1_public.csv"
    noisy = instances / "n6_t0_beta_5_1_noisy.json"
    stored = json.loads(noisy.read_text())

    code, out, _ = run(capsys, "release", str(public), str(noisy), "--seed", "7")
    assert code == 0
    t = json.loads(out)["t"]
    np.testing.assert_allclose(t, stored["ours"], atol=1e-12)
    assert sse(t, stored["theta"]) == pytest.approx(pd.read_csv(dump)["sse_ours"].iloc[0], abs=1e-12)

    code, out, _ = run(capsys, "bounds", str(public))
    bounds = json.loads(out)
    assert np.all(np.asarray(bounds["L"]) <= np.asarray(stored["theta"]) + 1e-12)
    assert np.all(np.asarray(stored["theta"]) <= np.asarray(bounds["U"]) + 1e-12)

def test_simulate_is_deterministic_given_seed(capsys, repo):
    """Test that two runs with one seed write identical per-trial tables."""
    repo.write_json({"n_values": [4], "trials": 3}, "cfg.json")
    tables = []
    for name in ("a.csv", "b.csv"):
        assert run(capsys, "simulate", str(repo.resolve("cfg.json")), "--seed", "99",
                   "--output", str(repo.resolve("results.csv")), "--dump", str(repo.resolve(name)))[0] == 0
        tables.append(pd.read_csv(repo.resolve(name)))
    pd.testing.assert_frame_equal(tables[0], tables[1])
