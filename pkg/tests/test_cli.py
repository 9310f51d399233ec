import numpy as np

from ctrlalloc.cli import main


def test_static_writes_table(tmp_path, capsys):
    assert main(["static", "--config", "ghgv2_stationary", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "IDCA" in out and "QPCA" in out
    assert (tmp_path / "stationary.csv").exists()


def test_missing_config_exit_1(tmp_path, capsys):
    missing = tmp_path / "absent.yaml"
    assert main(["static", "--config", str(missing), "--out", str(tmp_path)]) == 1
    assert str(missing) in capsys.readouterr().err


def test_invalid_config_names_key(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("B: [[1, 1]]\nlimits: {u_min: [0, 2], u_max: [1, 1]}\ncommand: {kind: constant, value: [1]}\n"
                   "steady_state: zero\n")
    assert main(["static", "--config", str(bad), "--out", str(tmp_path)]) == 1
    assert "effector(s) 2" in capsys.readouterr().err


def test_ams_vertices(tmp_path):
    assert main(["ams", "--config", "ghgv2_stationary", "--out", str(tmp_path), "--quiet"]) == 0
    assert len((tmp_path / "vertices.csv").read_text().splitlines()) == 17


def test_montecarlo_seed_override_and_filter(tmp_path):
    args = ["montecarlo", "--config", "ghgv2_montecarlo", "--algorithms", "pica,idca", "--quiet",
            "--no-timing"]
    assert main(args + ["--out", str(tmp_path / "a"), "--seed", "1"]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--seed", "2"]) == 0
    a = (tmp_path / "a" / "mc_raw.csv").read_text().splitlines()
    assert {row.split(",")[1] for row in a[1:]} == {"pica", "idca"}
    assert a != (tmp_path / "b" / "mc_raw.csv").read_text().splitlines()


def test_bad_algorithm_and_wrong_scenario(tmp_path):
    assert main(["static", "--config", "toy", "--algorithms", "nope", "--out", str(tmp_path)]) == 1
    assert main(["montecarlo", "--config", "toy", "--out", str(tmp_path), "--quiet"]) == 1
    assert main(["bogus"]) == 1


def test_numerical_failure_exit_2(tmp_path, monkeypatch):
    from ctrlalloc import harness
    from ctrlalloc.bvls import CyclingError

    def boom(*a, **k):
        raise CyclingError("guard tripped")

    monkeypatch.setattr(harness, "qpca", boom)
    assert main(["static", "--config", "toy", "--out", str(tmp_path), "--quiet"]) == 2


def test_compare_and_timesim(tmp_path):
    assert main(["compare", "--config", "toy", "--out", str(tmp_path), "--repeats", "3", "--quiet"]) == 0
    lines = (tmp_path / "compare.csv").read_text().splitlines()
    assert lines[-1].startswith("generic_qp")
    cfg = tmp_path / "short.yaml"
    cfg.write_text("B: [[1.0, 1.0]]\nduration: 0.5\nlimits: {u_min: 0, u_max: 1, rate_min: -5, rate_max: 5}\n"
                   "command: {kind: constant, value: [1.0]}\nsteady_state: zero\nalgorithms: [idca, pica]\n")
    assert main(["timesim", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
    assert (tmp_path / "timesim.csv").exists() and (tmp_path / "timesim_pica.csv").exists()
    data = np.loadtxt(tmp_path / "timesim.csv", delimiter=",", skiprows=1)
    assert data.shape[0] == 50
