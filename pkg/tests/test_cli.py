import json

import pytest
from click.testing import CliRunner

from pdmarket.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def run_twice(runner, args):
    a = runner.invoke(main, args)
    b = runner.invoke(main, args)
    assert a.exit_code == 0, a.output
    assert a.output == b.output
    return a


class TestReproducibility:
    def test_exact(self, runner):
        run_twice(runner, ["exact", "--n", "5", "--alpha", "0.5", "--theta", "1"])

    def test_sample(self, runner):
        run_twice(
            runner,
            ["sample", "--alpha", "0.5", "--theta", "1", "--seed", "42"],
        )

    def test_crp(self, runner):
        run_twice(
            runner, ["crp", "--n", "20", "--alpha", "0.3", "--theta", "2", "--seed", "1"]
        )

    def test_curve(self, runner):
        run_twice(
            runner,
            ["curve", "--alpha", "0.6", "--theta", "55", "--ranks", "20",
             "--samples", "50", "--seed", "3"],
        )

    def test_simulate_du(self, runner):
        run_twice(
            runner,
            ["simulate-du", "--n", "10", "--alpha", "0.5", "--theta", "1",
             "--steps", "50", "--seed", "2"],
        )

    def test_simulate_diffusion(self, runner):
        run_twice(
            runner,
            ["simulate-diffusion", "--alpha", "0.6", "--theta", "55",
             "--k-sticks", "3", "--dt", "0.001", "--t-end", "0.01", "--seed", "4"],
        )


class TestOutputs:
    def test_broken_stick_csv(self, runner):
        res = runner.invoke(main, ["broken-stick", "--n", "3"])
        assert res.exit_code == 0
        assert res.output == "0.611111, 0.277778, 0.111111\n"

    def test_exact_json(self, runner):
        res = runner.invoke(
            main,
            ["exact", "--n", "3", "--alpha", "0", "--theta", "2",
             "--format", "json"],
        )
        rows = json.loads(res.output)
        assert len(rows) == 3
        assert abs(sum(r["probability"] for r in rows) - 1.0) < 1e-12

    def test_output_file(self, runner, tmp_path):
        out = tmp_path / "w.csv"
        res = runner.invoke(
            main,
            ["sample", "--alpha", "0.5", "--theta", "1", "--output", str(out)],
        )
        assert res.exit_code == 0
        assert out.read_text().startswith("rank,weight")

    def test_curve_plot(self, runner, tmp_path):
        png = tmp_path / "c.png"
        res = runner.invoke(
            main,
            ["curve", "--alpha", "0.6", "--theta", "55", "--ranks", "10",
             "--samples", "20", "--plot", str(png)],
        )
        assert res.exit_code == 0
        assert png.stat().st_size > 0

    def test_fit_end_to_end(self, runner, tmp_path):
        caps = tmp_path / "caps.csv"
        caps.write_text(
            "ticker,market_cap\n"
            + "\n".join(f"T{i},{1000 / (i + 1) ** 1.6:.2f}" for i in range(40))
        )
        res = runner.invoke(
            main,
            ["fit", "--input", str(caps), "--samples", "50",
             "--refine-rounds", "1", "--alpha-points", "4",
             "--theta-points", "5", "--seed", "1"],
        )
        assert res.exit_code == 0, res.output
        payload = json.loads(res.output)
        assert 0.0 <= payload["alpha"] < 1.0
        assert payload["theta"] > 0


class TestErrors:
    def test_domain_error_exit_one(self, runner):
        res = runner.invoke(
            main, ["exact", "--n", "3", "--alpha", "1.5", "--theta", "1"]
        )
        assert res.exit_code == 1
        assert "error: domain:" in res.output

    def test_data_error_exit_one(self, runner, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("ticker,cap\n")
        res = runner.invoke(main, ["fit", "--input", str(empty)])
        assert res.exit_code == 1
        assert "error: data:" in res.output

    def test_config_error_exit_one(self, runner):
        res = runner.invoke(
            main,
            ["simulate-diffusion", "--alpha", "0.6", "--theta", "55",
             "--dt", "0.5", "--t-end", "1"],
        )
        assert res.exit_code == 1
        assert "error: config:" in res.output

    def test_usage_error_exit_two(self, runner):
        res = runner.invoke(main, ["exact", "--n", "3"])
        assert res.exit_code == 2

    def test_help_everywhere(self, runner):
        for cmd in ["exact", "sample", "crp", "curve", "fit",
                    "simulate-du", "simulate-diffusion", "broken-stick"]:
            res = runner.invoke(main, [cmd, "--help"])
            assert res.exit_code == 0
            assert "--seed" in res.output or cmd == "broken-stick"
