import json

import pytest

from ks1d.cli import EXIT_ABORT, EXIT_CLAIM, EXIT_CONFIG, EXIT_OK, main
from ks1d.config import bundled_scenarios


def cfg(name):
    return str(bundled_scenarios()[name])


def test_verify_zero(capsys, tmp_path):
    assert main(["verify", cfg("zero"), "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "linf_bound" in out and "cutoff_bounds" in out
    data = json.loads((tmp_path / "report.json").read_text())
    assert {c["claim"] for c in data["claims"]} >= {"linf_bound", "mass_conservation"}
    assert all(c["anchor"] for c in data["claims"])
    assert data["tolerances"]["mass_rel"] == 1e-12


def test_run_writes_outputs(tmp_path):
    assert main(["run", cfg("bump_past_window"), "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "diagnostics.csv").exists()
    assert "outside-window" in (tmp_path / "diagnostics.csv").read_text()


def test_reports_deterministic(tmp_path):
    main(["verify", cfg("zero"), "--out", str(tmp_path / "a")])
    main(["verify", cfg("zero"), "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "report.json").read_text() == (tmp_path / "b" / "report.json").read_text()


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("m = 2\nnonsense\n")
    assert main(["verify", str(bad)]) == EXIT_CONFIG
    assert main(["verify", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG
    invalid = tmp_path / "invalid.cfg"
    invalid.write_text(open(cfg("zero")).read().replace("gamma = 1", "gamma = -1"))
    assert main(["run", str(invalid)]) == EXIT_CONFIG


def test_runtime_abort_exit_code(tmp_path):
    path = tmp_path / "narrow.cfg"
    text = open(cfg("zero")).read()
    text = text.replace("u0.kind = zero", "u0.kind = bump\nu0.params = [0, 1, 1]")
    text = text.replace("x_min = -4", "x_min = -1.5").replace("x_max = 4", "x_max = 1.5").replace("t_end = 0.01", "t_end = 0.5")
    path.write_text(text)
    assert main(["run", str(path)]) == EXIT_ABORT


def test_claim_failure_exit_code(tmp_path):
    # 1 < m < 2 exercises the Holder branch whose stated constant is too small near the sup
    path = tmp_path / "m15.cfg"
    text = open(cfg("bump_past_window")).read().replace("m = 2", "m = 1.5").replace("q = 4", "q = 3")
    path.write_text(text)
    assert main(["verify", str(path)]) == EXIT_CLAIM


def test_sweep_and_converge_preconditions():
    assert main(["sweep-eps", cfg("zero"), "--eps", "0.1"]) == EXIT_CONFIG
    assert main(["converge", cfg("zero"), "--n", "128", "128", "256"]) == EXIT_CONFIG


def test_sweep_zero(capsys):
    assert main(["sweep-eps", cfg("zero"), "--eps", "0.1", "0.05", "0.025", "--workers", "1"]) == EXIT_OK
    assert len(capsys.readouterr().out.strip().splitlines()) == 5


def test_plots(tmp_path):
    assert main(["plots", cfg("zero"), "--out", str(tmp_path)]) == EXIT_OK
    assert len(list(tmp_path.glob("fields_*.csv"))) == 6


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    for sub in ("run", "verify", "sweep-eps", "converge", "plots"):
        assert sub in out
