import csv
import dataclasses
import io
import json

import numpy as np
import pytest

from arms.bench import (
    BenchConfig,
    TraceRow,
    run,
    run_corr_curves,
    run_toy,
    rows_to_csv,
    toy_steps_to_stop,
)
from arms.cli import main
from arms.estimators import EstimatorConfig


def _toy(**kw):
    base = dict(steps=300, probe_every=100, mc_replicates=200)
    base.update(kw)
    return BenchConfig("toy", **base)


class TestConfig:
    @pytest.mark.parametrize("bad", [dict(steps=0), dict(mc_replicates=1), dict(n_list=[1]), dict(format="xml"), dict(seed=-1)])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            BenchConfig("toy", **bad)

    def test_unknown_experiment(self):
        with pytest.raises(ValueError):
            BenchConfig("nope")


class TestToy:
    def test_csv_schema(self):
        text = rows_to_csv(run_toy(_toy(estimators=["loorf"])))
        header = text.splitlines()[0].split(",")
        assert header == [f.name for f in dataclasses.fields(TraceRow)]

    def test_deterministic(self):
        a = rows_to_csv(run_toy(_toy(seed=11)))
        b = rows_to_csv(run_toy(_toy(seed=11)))
        assert a == b
        assert a != rows_to_csv(run_toy(_toy(seed=12)))

    def test_cells_are_independent_streams(self):
        alone = run_toy(_toy(estimators=["loorf"], seed=3))
        together = [r for r in run_toy(_toy(estimators=["arms-d", "loorf"], seed=3)) if r.estimator == "loorf"]
        assert alone == together

    def test_probe_schedule_and_start(self):
        rows = run_toy(_toy(estimators=["arms-d"]))
        assert [r.step for r in rows] == [0, 100, 200, 300]
        assert rows[0].sigma_phi == pytest.approx(0.1)

    def test_stops_at_target(self):
        config = BenchConfig("toy", estimators=["loorf"], steps=100_000, learning_rate=5.0, probe_every=1000, mc_replicates=50)
        stop = toy_steps_to_stop(EstimatorConfig("loorf", 4), 5.0, seed=config.seed)
        rows = run_toy(config)
        assert rows[-1].step == (stop // 1000) * 1000
        assert all(r.sigma_phi < 0.9 for r in rows[:-1]) or stop % 1000 == 0

    @pytest.mark.parametrize("name", ["loorf", "arm", "disarm", "arms-d", "arms-n"])
    def test_reaches_target_at_default_rate(self, name):
        steps = toy_steps_to_stop(EstimatorConfig(name, 4), BenchConfig("toy").learning_rate, max_steps=50_000)
        assert steps is not None


class TestCurves:
    def test_edges_and_centre(self):
        rows = run_corr_curves(BenchConfig("corr-curves", n_list=[2], mc_replicates=20_000), grid=[0.001, 0.5, 0.999])
        assert rows[1].dirichlet_rho == pytest.approx(-1.0) and rows[1].gaussian_rho == pytest.approx(-1.0)
        for r in (rows[0], rows[2]):
            assert abs(r.dirichlet_rho) < 2e-3 and abs(r.gaussian_rho) < 2e-3


class TestCli:
    def test_toy_to_file(self, tmp_path):
        out = tmp_path / "toy.csv"
        code = main(["toy", "--estimators", "loorf", "--steps", "100", "--replicates", "50", "--out", str(out)])
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        assert rows[0]["estimator"] == "loorf" and rows[0]["step"] == "0"

    def test_json_output(self, capsys):
        assert main(["corr-curves", "--n", "2", "--replicates", "10000", "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data[0]["n"] == 2 and "gaussian_se" in data[0]

    def test_unbiasedness_exit_status(self, capsys):
        code = main(["unbiasedness", "--instances", "3", "--replicates", "40000", "--n", "2"])
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert code == 0
        control = [r for r in rows if r["estimator"] == "loorf-biased"]
        assert control and all(r["outcome"] == "fail" and r["ok"] == "true" for r in control)

    def test_unbiasedness_flags_unexpected(self):
        config = BenchConfig("unbiasedness", estimators=["loorf"], instances=2, mc_replicates=1000)
        rows, status = run(config)
        assert status == 0
        rows[0].ok = False
        assert not all(r.ok for r in rows)

    def test_msb_compare_budgets(self, capsys, tmp_path):
        from arms.msbound import ToyLatentModel

        path = tmp_path / "model.json"
        path.write_text(ToyLatentModel.random(2, np.random.default_rng(0)).to_json())
        assert main(["msb-compare", "--n", "3", "--replicates", "5000", "--model", str(path)]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert {r["estimator"]: int(r["f_evals"]) for r in rows} == {"arms-d": 6, "vimco-avg": 6, "vimco": 6, "naive": 6}
        assert all(float(r["exact_bound"]) <= float(r["log_px"]) for r in rows)

    def test_bad_arguments(self, capsys):
        assert main(["toy", "--estimators", "bogus"]) == 2
        with pytest.raises(SystemExit):
            main(["toy", "--n", "x"])


class TestOracleMode:
    def test_exact_estimator_has_zero_variance(self):
        rows = run_toy(BenchConfig("toy", estimators=["exact"], steps=200, probe_every=50, mc_replicates=10))
        assert all(r.grad_variance == 0.0 for r in rows)

    def test_msb_means_agree_with_exact(self):
        from arms.bench import run_msb_compare

        rows = run_msb_compare(BenchConfig("msb-compare", n_list=[3], mc_replicates=40_000, estimators=["arms-d", "vimco-avg"]))
        assert all(r.max_se_multiple < 4 for r in rows)
        assert all(r.bound_mean <= r.log_px for r in rows)
