"""End-to-end CLI behavior: spec parsing, outputs, exit codes."""

import csv
import json
import math

import pytest
from click.testing import CliRunner

from photonthin import moments
from photonthin.cli import cli, heavy_two_point_input, table1_inputs, wide_input

EX3_SPEC = {"two_point": {"a": 1, "pa": 0.95, "b": 1001, "pb": 0.05}}


@pytest.fixture
def runner():
    return CliRunner()


def write_spec(tmp_path, payload, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return header, [[float(v) for v in row] for row in body]


class TestMomentsCommand:
    def test_wide_two_point(self, runner, tmp_path):
        spec = write_spec(tmp_path, EX3_SPEC)
        result = runner.invoke(cli, ["moments", spec])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert abs(payload["c"] - 9.12) <= 0.02
        assert payload["mean"] == pytest.approx(51.0, abs=1e-12)

    def test_poisson(self, runner, tmp_path):
        spec = write_spec(tmp_path, {"poisson": {"mu": 5}})
        result = runner.invoke(cli, ["moments", spec])
        assert result.exit_code == 0
        assert abs(json.loads(result.output)["c"]) <= 1e-8

    def test_deterministic_table(self, runner, tmp_path):
        spec = write_spec(tmp_path, {"table": [[3, 1.0]]})
        result = runner.invoke(cli, ["moments", spec])
        payload = json.loads(result.output)
        assert payload["var"] == 0.0
        assert payload["c"] == pytest.approx(-1.0 / 6.0, rel=1e-15)

    def test_invalid_spec_exits_2(self, runner, tmp_path):
        spec = write_spec(tmp_path, {"table": [[0, 0.5], [1, 0.4]]})
        result = runner.invoke(cli, ["moments", spec])
        assert result.exit_code == 2

    def test_zero_mean_exits_2(self, runner, tmp_path):
        spec = write_spec(tmp_path, {"table": [[0, 1.0]]})
        result = runner.invoke(cli, ["moments", spec])
        assert result.exit_code == 2


class TestThinCommand:
    def test_approximation_failure_visible(self, runner, tmp_path):
        spec = write_spec(tmp_path, EX3_SPEC)
        out = tmp_path / "thin.csv"
        result = runner.invoke(
            cli, ["thin", spec, "--target-lambda", "0.1", "--out", str(out)]
        )
        assert result.exit_code == 0
        lam = json.loads(result.output)["lambda"]
        assert lam == pytest.approx(0.1, rel=1e-14)
        header, body = read_csv(out)
        assert header == ["n", "p_eta", "p_poisson", "delta"]
        assert len(body) == 11
        deltas = [row[3] for row in body]
        assert max(abs(d) for d in deltas) > 10.0 * lam**3

    def test_poisson_closure_deltas_vanish(self, runner, tmp_path):
        spec = write_spec(tmp_path, {"poisson": {"mu": 100}})
        out = tmp_path / "thin.csv"
        result = runner.invoke(
            cli, ["thin", spec, "--target-lambda", "0.1", "--out", str(out)]
        )
        assert result.exit_code == 0
        _, body = read_csv(out)
        assert all(abs(row[3]) <= 1e-12 for row in body)

    def test_eta_one_reproduces_input(self, runner, tmp_path):
        spec = write_spec(tmp_path, EX3_SPEC)
        out = tmp_path / "thin.csv"
        result = runner.invoke(cli, ["thin", spec, "--eta", "1", "--out", str(out)])
        assert result.exit_code == 0
        _, body = read_csv(out)
        by_n = {int(row[0]): row[1] for row in body}
        assert by_n[1] == 0.95
        assert by_n[0] == 0.0

    def test_round_trip_and_bitwise_match_with_report(self, runner, tmp_path):
        spec = write_spec(tmp_path, EX3_SPEC)
        out = tmp_path / "thin.csv"
        thin_res = runner.invoke(
            cli, ["thin", spec, "--target-lambda", "0.1", "--out", str(out)]
        )
        report_res = runner.invoke(
            cli, ["report", spec, "--target-lambda", "0.1"]
        )
        assert thin_res.exit_code == 0 and report_res.exit_code == 0
        _, body = read_csv(out)
        report_delta = json.loads(report_res.output)["delta"]
        assert [row[3] for row in body] == report_delta

    def test_requires_exactly_one_attenuation_flag(self, runner, tmp_path):
        spec = write_spec(tmp_path, EX3_SPEC)
        out = str(tmp_path / "x.csv")
        both = runner.invoke(
            cli,
            ["thin", spec, "--eta", "0.5", "--target-lambda", "0.1", "--out", out],
        )
        neither = runner.invoke(cli, ["thin", spec, "--out", out])
        assert both.exit_code == 2
        assert neither.exit_code == 2


class TestReportCommand:
    def test_poisson_risk(self, runner, tmp_path):
        spec = write_spec(tmp_path, {"poisson": {"mu": 50}})
        result = runner.invoke(cli, ["report", spec, "--target-lambda", "0.1"])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["risk_approx"] == pytest.approx(0.05, abs=1e-9)
        assert payload["risk_exact"] == pytest.approx(0.0492, abs=1e-4)

    def test_wide_two_point_risk(self, runner, tmp_path):
        spec = write_spec(tmp_path, EX3_SPEC)
        result = runner.invoke(cli, ["report", spec, "--target-lambda", "0.1"])
        payload = json.loads(result.output)
        assert payload["risk_approx"] == pytest.approx(0.9621, abs=1e-4)
        assert 0.6 < payload["risk_exact"] < 0.7

    def test_deterministic_residuals(self, runner, tmp_path):
        spec = write_spec(tmp_path, {"table": [[1, 1.0]]})
        result = runner.invoke(cli, ["report", spec, "--eta", "0.1"])
        payload = json.loads(result.output)
        assert all(abs(r) <= 1e-9 for r in payload["residuals"])


class TestMcCommand:
    def test_single_particle(self, runner, tmp_path):
        spec = write_spec(tmp_path, {"table": [[1, 1.0]]})
        result = runner.invoke(
            cli, ["mc", spec, "--eta", "0.5", "--trials", "1000000"]
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert abs(payload["empirical_mean"] - 0.5) <= 0.0015
        assert payload["seed"] == 42

    def test_zero_eta(self, runner, tmp_path):
        spec = write_spec(tmp_path, {"table": [[4, 1.0]]})
        result = runner.invoke(cli, ["mc", spec, "--eta", "0"])
        payload = json.loads(result.output)
        assert payload["tv_to_analytic"] == 0.0

    def test_poisson_sampling_error(self, runner, tmp_path):
        spec = write_spec(tmp_path, {"poisson": {"mu": 5}})
        result = runner.invoke(
            cli, ["mc", spec, "--eta", "0.02", "--trials", "10000000"]
        )
        assert result.exit_code == 0
        assert json.loads(result.output)["tv_to_analytic"] <= 0.003


class TestTable1Command:
    def test_ladder_values_and_envelope(self, runner, tmp_path):
        out = tmp_path / "t1.csv"
        result = runner.invoke(cli, ["table1", "--out", str(out)])
        assert result.exit_code == 0
        header, body = read_csv(out)
        assert header == ["lambda2C", "delta0", "delta1", "delta2", "delta3", "delta4"]
        targets = [0.0045, 0.0030, 0.0018, 0.0011, 0.0005, -0.00016]
        assert [row[0] for row in body] == pytest.approx(targets, abs=1e-12)
        for pmf, row in zip(table1_inputs(), body):
            ms = moments(pmf)
            envelope = (ms.d + 1.0) * 0.1**3
            l2c, d0, d1, d2, d3, d4 = row
            assert abs(d0 - l2c) <= envelope
            assert abs(d1 + 2.0 * l2c) <= envelope
            assert abs(d2 - l2c) <= envelope
            assert abs(d3) <= envelope and abs(d4) <= envelope

    def test_negative_row_flips_delta1_sign(self, runner, tmp_path):
        out = tmp_path / "t1.csv"
        runner.invoke(cli, ["table1", "--out", str(out)])
        _, body = read_csv(out)
        last = body[-1]
        assert last[0] < 0.0 and last[1] < 0.0 and last[2] > 0.0


class TestFiguresCommand:
    def test_emits_four_files_with_expected_lambdas(self, runner, tmp_path):
        out_dir = tmp_path / "figs"
        result = runner.invoke(cli, ["figures", "--out-dir", str(out_dir)])
        assert result.exit_code == 0
        summary = json.loads(result.output)
        assert abs(summary["fig2"]["lambda"] - 0.4885) <= 1e-9
        assert abs(summary["fig3"]["lambda"] - 0.0977) <= 1e-9
        for name in ("fig1", "fig2", "fig3", "fig4"):
            header, body = read_csv(out_dir / f"{name}.csv")
            assert header == ["n", "p_eta", "p_poisson"]
            assert body

    def test_fig1_far_from_poisson_fig3_close(self, runner, tmp_path):
        out_dir = tmp_path / "figs"
        runner.invoke(cli, ["figures", "--out-dir", str(out_dir)])
        _, fig1 = read_csv(out_dir / "fig1.csv")
        tv1 = 0.5 * math.fsum(abs(row[1] - row[2]) for row in fig1)
        assert tv1 > 0.1
        _, fig3 = read_csv(out_dir / "fig3.csv")
        ms = moments(wide_input())
        lam = json.loads(
            CliRunner().invoke(cli, ["figures", "--out-dir", str(out_dir)]).output
        )["fig3"]["lambda"]
        gap = max(abs(row[1] - row[2]) for row in fig3)
        assert gap <= lam**2 * (ms.c + 1.0) + (ms.d + 1.0) * lam**3

    def test_builtin_inputs_are_sane(self):
        wide = wide_input()
        assert abs(wide.mean - 488.5) <= 1e-9
        heavy = heavy_two_point_input()
        assert heavy.support == (1, 1001)


class TestCsvRoundTrip:
    def test_twelve_significant_digits(self, runner, tmp_path):
        spec = write_spec(tmp_path, EX3_SPEC)
        out = tmp_path / "thin.csv"
        runner.invoke(cli, ["thin", spec, "--target-lambda", "0.1", "--out", str(out)])
        with open(out) as fh:
            lines = fh.read().splitlines()
        for line in lines[1:]:
            for token in line.split(",")[1:]:
                value = float(token)
                assert repr(value) == token  # shortest round-trip form
