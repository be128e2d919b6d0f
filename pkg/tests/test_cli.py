"""Command-line interface: exit codes, file round trips, output schemas."""

import csv
import json

import numpy as np
import pytest

from sepcov.cli import EXIT_ERROR, EXIT_OK, EXIT_REJECT, main
from sepcov.covariance import FunctionalSample
from sepcov.sample_io import read_sample, write_sample

from conftest import make_grid


def _write_iid_sample(path, seed=0, n=40, s=3, t=6):
    rng = np.random.default_rng(seed)
    sample = FunctionalSample(make_grid(s, t), rng.standard_normal((n, s, t)))
    write_sample(sample, str(path))
    return sample


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip()


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["test"])  # missing required --in
    assert exc.value.code == 2


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_missing_input_file(tmp_path, capsys):
    code = main(["test", "--in", str(tmp_path / "nope.csv")])
    assert code == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_test_accepts_iid_noise(tmp_path, capsys):
    path = tmp_path / "sample.csv"
    _write_iid_sample(path, seed=11)
    code = main(
        ["test", "--in", str(path), "--replicates", "80", "--seed", "3",
         "--block-length", "1", "--alpha", "0.01"]
    )
    payload = json.loads(capsys.readouterr().out)
    assert code in (EXIT_OK, EXIT_REJECT)
    assert code == (EXIT_REJECT if payload["reject"] else EXIT_OK)
    assert payload["config"]["approx"] == "trace"
    assert 0 < payload["p_value"] <= 1
    assert len(payload["boot_values"]) == 80


def test_test_json_report_file(tmp_path):
    path = tmp_path / "sample.bin"
    _write_iid_sample(path, seed=4)
    out = tmp_path / "report.json"
    code = main(
        ["test", "--in", str(path), "--replicates", "50", "--out", str(out)]
    )
    assert code in (EXIT_OK, EXIT_REJECT)
    payload = json.loads(out.read_text())
    assert set(payload) >= {"statistic", "quantile", "p_value", "reject", "config"}
    assert payload["config"]["replicates"] == 50
    assert payload["config"]["psi"] is None


def test_test_product_approx(tmp_path, capsys):
    path = tmp_path / "sample.csv"
    _write_iid_sample(path)
    code = main(
        ["test", "--in", str(path), "--approx", "product", "--psi", "cosine",
         "--replicates", "40"]
    )
    assert code in (EXIT_OK, EXIT_REJECT)
    payload = json.loads(capsys.readouterr().out)
    assert payload["config"]["approx"] == "product"
    assert payload["config"]["psi"] == "cosine"


def test_simulate_round_trip(tmp_path):
    path = tmp_path / "sim.csv"
    code = main(
        ["simulate", "--S", "3", "--T", "8", "--N", "12", "--seed", "9",
         "--out", str(path)]
    )
    assert code == EXIT_OK
    sample = read_sample(str(path))
    assert sample.observations.shape == (12, 3, 8)
    # deterministic in the seed
    path2 = tmp_path / "sim2.csv"
    main(["simulate", "--S", "3", "--T", "8", "--N", "12", "--seed", "9",
          "--out", str(path2)])
    np.testing.assert_array_equal(
        sample.observations, read_sample(str(path2)).observations
    )


def test_simulate_paper_grid_drops_a_site(tmp_path):
    path = tmp_path / "sim.bin"
    main(["simulate", "--S", "4", "--T", "6", "--N", "5", "--paper-grid",
          "--out", str(path)])
    assert read_sample(str(path)).observations.shape == (5, 3, 6)


def test_simulate_then_test_pipeline(tmp_path, capsys):
    path = tmp_path / "null.csv"
    main(["simulate", "--S", "3", "--T", "10", "--N", "60", "--c", "0",
          "--seed", "2", "--out", str(path)])
    code = main(["test", "--in", str(path), "--replicates", "60", "--seed", "1"])
    assert code in (EXIT_OK, EXIT_REJECT)
    json.loads(capsys.readouterr().out)


def test_relmeasure_outputs_number(tmp_path, capsys):
    path = tmp_path / "sim.csv"
    main(["simulate", "--S", "3", "--T", "8", "--N", "30", "--c", "1",
          "--seed", "1", "--out", str(path)])
    code = main(["relmeasure", "--in", str(path)])
    assert code == EXIT_OK
    value = float(capsys.readouterr().out.strip())
    assert 0 <= value < 10


def test_table1_csv_schema(tmp_path):
    out = tmp_path / "table.csv"
    code = main(
        ["table1", "--rows", "S=3;N=30;c=0", "--runs", "3", "--replicates", "30",
         "--T", "6", "--seed", "5", "--out", str(out)]
    )
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert len(rows) == 1
    row = rows[0]
    assert list(row) == ["S", "N", "c", "rejection_rate", "runs", "r", "l", "seed"]
    assert row["S"] == "3" and row["N"] == "30" and row["c"] == "0.0"
    assert 0.0 <= float(row["rejection_rate"]) <= 1.0
    assert row["runs"] == "3" and row["r"] == "30"


def test_identical_observations_exit_error(tmp_path, capsys):
    """A degenerate (zero-variance) sample fails with a clear message."""
    path = tmp_path / "flat.csv"
    sample = FunctionalSample(make_grid(2, 2), np.ones((5, 2, 2)))
    write_sample(sample, str(path))
    code = main(["test", "--in", str(path)])
    assert code == EXIT_ERROR
    assert "trace" in capsys.readouterr().err


def test_table1_bad_rows_spec(capsys):
    code = main(["table1", "--rows", "Q=4", "--runs", "1"])
    assert code == EXIT_ERROR
    assert "unknown table variable" in capsys.readouterr().err
