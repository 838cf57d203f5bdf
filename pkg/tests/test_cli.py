"""
Tests for the command-line interface.
"""

import csv
import io
import json
from unittest.mock import patch

import pytest

from src.cli import EXIT_INVALID, EXIT_OK, EXIT_ROW_FAILED, build_parser, main
from src.config import Settings
from src.utils.errors import OptimizationError
from src.utils.output import DESIGN_HEADER

SIMULATE = [
    "simulate",
    "--n", "300",
    "--theta", "0.3",
    "--p", "0.02",
    "--q", "0.05",
    "--alg", "comp",
    "--mult", "1,2",
    "--trials", "5",
]


@pytest.fixture
def settings():
    return Settings(THREADS=2)


def read_table(text: str) -> tuple[list[str], list[dict[str, str]]]:
    """Comment lines and CSV rows of a table."""
    lines = text.splitlines()
    comments = [line for line in lines if line.startswith("#")]
    body = [line for line in lines if not line.startswith("#")]
    return comments, list(csv.DictReader(io.StringIO("\n".join(body))))


class TestParser:
    """Test argument parsing."""

    def test_requires_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_simulate_choices(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["simulate", "--alg", "converse"])

    def test_unset_flags_are_none(self):
        args = build_parser().parse_args(["bounds"])
        assert args.theta is None
        assert args.design is None
        assert args.command == "bounds"


class TestCapacityCommand:
    """Test the capacity command."""

    def test_csv(self, settings, capsys):
        assert main(["capacity", "--p", "0.1", "--q", "0.1"], settings) == EXIT_OK

        comments, rows = read_table(capsys.readouterr().out)
        assert comments[0].startswith("# noisygt: ")
        assert "# command: capacity" in comments
        assert len(rows) == 1
        assert rows[0]["channel"] == "BSC"
        assert float(rows[0]["capacity_nats"]) == pytest.approx(0.368064, abs=1e-6)

    def test_jsonl(self, settings, capsys):
        assert main(["capacity", "--q", "0.1", "--format", "jsonl"], settings) == EXIT_OK

        record = json.loads(capsys.readouterr().out.strip())
        assert record["channel"] == "Z"
        assert record["flipped"] is False

    def test_uninformative_channel(self, settings):
        assert main(["capacity", "--p", "0.4", "--q", "0.6"], settings) == EXIT_INVALID


class TestTableCommands:
    """Test bounds, sweep and compare."""

    def test_bounds_rows(self, settings, tmp_path):
        out = tmp_path / "bounds.csv"
        code = main(["bounds", "--theta", "0.5", "--alg", "comp", "--out", str(out)], settings)

        assert code == EXIT_OK
        _, rows = read_table(out.read_text())
        assert [row["algorithm"] for row in rows] == ["comp", "converse", "optimal", "counting"]
        assert float(rows[0]["prefactor"]) == pytest.approx(2.0 / 0.693147**2, rel=1e-3)
        assert all(row["status"] == "ok" for row in rows)

    def test_bounds_rejects_empty_algorithm_list(self, settings):
        assert main(["bounds", "--alg", ""], settings) == EXIT_INVALID

    def test_bounds_rejects_channel_grid(self, settings):
        assert main(["bounds", "--p", "0.1,0.2"], settings) == EXIT_INVALID

    @patch("src.utils.bounds.solve_bound")
    def test_failed_rows_exit_one(self, mock_solve, settings, capsys):
        mock_solve.side_effect = OptimizationError("objective is infinite")

        code = main(["bounds", "--theta", "0.5", "--alg", "dd"], settings)

        assert code == EXIT_ROW_FAILED
        _, rows = read_table(capsys.readouterr().out)
        assert [row["status"] for row in rows] == ["error", "error", "ok", "ok"]
        assert rows[0]["error"] == "objective is infinite"

    def test_sweep_uninformative_channel(self, settings, capsys):
        code = main(
            ["sweep", "--theta", "0.3,0.6", "--p", "0.3", "--q", "0.7", "--alg", "comp"], settings
        )

        assert code == EXIT_ROW_FAILED
        _, rows = read_table(capsys.readouterr().out)
        assert len(rows) == 2
        assert all(row["status"] == "error" for row in rows)

    def test_sweep_empty_theta_grid(self, settings, capsys):
        code = main(["sweep", "--theta", ",", "--q", "0.1", "--alg", "comp,dd"], settings)

        assert code == EXIT_OK
        _, rows = read_table(capsys.readouterr().out)
        assert rows == []

    def test_compare_columns(self, settings, capsys):
        with patch("src.actions.compare.solve_bound") as mock_solve:
            mock_solve.return_value.prefactor = 3.0
            code = main(["compare", "--theta", "0.5", "--q", "0.1"], settings)

        assert code == EXIT_OK
        _, rows = read_table(capsys.readouterr().out)
        assert list(rows[0])[3:7] == ["comp_cc", "comp_bernoulli", "dd_cc", "dd_bernoulli"]
        assert float(rows[0]["dd_bernoulli"]) == 3.0


class TestSimulateCommand:
    """Test the Monte-Carlo command."""

    def test_same_seed_same_file(self, settings, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(SIMULATE + ["--seed", "3", "--out", str(first)], settings) == EXIT_OK
        assert main(SIMULATE + ["--seed", "3", "--out", str(second)], settings) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_output_does_not_depend_on_threads(self, settings, tmp_path):
        one, four = tmp_path / "one.csv", tmp_path / "four.csv"
        main(SIMULATE + ["--threads", "1", "--out", str(one)], settings)
        main(SIMULATE + ["--threads", "4", "--out", str(four)], settings)

        assert one.read_bytes() == four.read_bytes()
        comments, rows = read_table(one.read_text())
        assert len(rows) == 2
        assert not any("threads" in line for line in comments)

    def test_uninformative_channel_leaves_no_file(self, settings, tmp_path):
        out = tmp_path / "sim.csv"
        code = main(SIMULATE[:5] + ["--p", "0.3", "--q", "0.7", "--out", str(out)], settings)

        assert code == EXIT_INVALID
        assert not out.exists()

    def test_header_records_seed(self, settings, tmp_path):
        out = tmp_path / "sim.csv"
        main(SIMULATE + ["--seed", "42", "--out", str(out)], settings)

        comments, rows = read_table(out.read_text())
        assert "# seed: 42" in comments
        assert all(row["seed"] == "42" for row in rows)
        assert "wallclock" not in rows[0]

    def test_seed_from_environment(self, tmp_path):
        out = tmp_path / "sim.csv"
        main(SIMULATE + ["--out", str(out)], Settings(SEED=11, THREADS=1))

        _, rows = read_table(out.read_text())
        assert rows[0]["seed"] == "11"

    def test_timing_column(self, settings, capsys):
        main(SIMULATE + ["--timing"], settings)

        _, rows = read_table(capsys.readouterr().out)
        assert float(rows[0]["wallclock"]) >= 0.0

    def test_dump_design(self, settings, tmp_path):
        dump = tmp_path / "designs" / "first.txt"
        main(SIMULATE + ["--dump-design", str(dump), "--out", str(tmp_path / "s.csv")], settings)

        lines = dump.read_text().splitlines()
        assert lines[0] == DESIGN_HEADER
        assert lines[1].startswith("n=300 ")
        assert len(lines) == 302

    def test_config_file_below_flags(self, settings, tmp_path):
        run_file = tmp_path / "run.conf"
        run_file.write_text("n=300\ntheta=0.3\nalg=comp\nmult=1\ntrials=4\nseed=5\nk-design=6\n")
        out = tmp_path / "sim.csv"

        code = main(
            ["simulate", "--config", str(run_file), "--trials", "2", "--out", str(out)], settings
        )

        assert code == EXIT_OK
        _, rows = read_table(out.read_text())
        assert rows[0]["trials"] == "2"
        assert rows[0]["seed"] == "5"
        assert rows[0]["n"] == "300"

    def test_missing_config_file(self, settings, tmp_path):
        code = main(["simulate", "--config", str(tmp_path / "absent.conf")], settings)
        assert code == EXIT_INVALID

    def test_invalid_multiplier(self, settings):
        assert main(SIMULATE[:-4] + ["--mult", "0"], settings) == EXIT_INVALID
