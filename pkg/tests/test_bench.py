import math

import numpy as np
import pytest
from pydantic import ValidationError

from fast_disentangle import bench
from fast_disentangle.bench import CliConfig, quantile, summarize, trial_rng
from fast_disentangle.generators import SpectrumKind
from fast_disentangle.serialization import dumps
from fast_disentangle.wavefunction import Method


def test_quantile_is_nearest_rank():
    values = list(range(100, 0, -1))
    assert quantile(values, 16) == 16
    assert quantile(values, 50) == 50
    assert quantile(values, 84) == 84
    assert quantile(values, 0) == 1
    assert quantile(values, 100) == 100
    assert quantile([3.0], 84) == 3.0


def test_quantile_rejects_bad_input():
    with pytest.raises(ValueError):
        quantile([], 50)
    with pytest.raises(ValueError):
        quantile([1.0], 101)


def test_summarize_skips_missing_values():
    stat = summarize([None, math.nan, 1.0, 3.0])
    assert stat.count == 2
    assert stat.mean == 2.0
    assert stat.median == 1.0
    assert (stat.q16, stat.q84) == (1.0, 3.0)
    assert summarize([None, math.inf]) is None


def test_trial_streams_are_independent_and_stable():
    a = trial_rng(7, 1).standard_normal(4)
    np.testing.assert_array_equal(a, trial_rng(7, 1).standard_normal(4))
    assert not np.array_equal(a, trial_rng(7, 2).standard_normal(4))
    assert not np.array_equal(a, trial_rng(8, 1).standard_normal(4))


def test_config_defaults_and_helpers():
    cfg = CliConfig(command="run")
    assert cfg.dims.chi3 == 2
    assert cfg.kind is SpectrumKind.GAUSSIAN
    assert cfg.unit == "nats"
    assert cfg.descent().restarts == 8
    bits = CliConfig(command="run", bits=True)
    assert bits.unit == "bits"
    assert bits.entropy(math.log(2)) == pytest.approx(1)


@pytest.mark.parametrize(
    "values",
    [
        {"command": "run", "rank1": True},
        {"command": "run", "chi1": 0},
        {"command": "run", "kind": "lambda-harmonic", "chi2": 3},
        {"command": "run", "kind": "nope"},
        {"command": "run", "chi3": 1, "chi4": 1},
        {"command": "table1", "chi1": 4, "chi2": 3, "chi3": 3, "chi4": 4},
        {"command": "wave", "qubits": 1},
        {"command": "wave", "qubits": 25},
        {"command": "run", "trials": 0},
        {"command": "run", "fmt": "xml"},
        {"command": "plot"},
    ],
)
def test_config_rejects(values):
    with pytest.raises(ValidationError):
        CliConfig(**values)


def test_wave_config_ignores_tensor_dims():
    cfg = CliConfig(command="wave", chi3=1, chi4=1, qubits=4, method="descent")
    assert cfg.method is Method.DESCENT


def test_table1_tiny_run():
    cfg = CliConfig(command="table1", trials=3, restarts=1, seed=3)
    report = bench.run_table1(cfg)
    assert [row.trial for row in report.rows] == [0, 1, 2]
    for row in report.rows:
        assert row.s_min <= row.s_fast + 1e-9
        assert row.s_min <= row.s_rand + 1e-9
        assert 0 <= row.eps_fast <= 1
        assert row.zeros_fast >= 1
        assert row.t_fast is None and row.speedup is None
    assert report.summary["s_fast"].count == 3
    assert "t_fast" not in report.summary
    assert dumps(report) == dumps(bench.run_table1(cfg))


def test_table1_with_timing_and_speedup():
    cfg = CliConfig(command="table1", trials=1, restarts=1, speedup=True)
    report = bench.run_table1(cfg)
    row = report.rows[0]
    assert row.t_fast > 0 and row.t_min > 0
    assert "speedup" in report.summary


def test_table1_workers_match_serial():
    serial = CliConfig(command="table1", trials=4, restarts=1, seed=11)
    pooled = serial.model_copy(update={"workers": 2})
    assert dumps(bench.run_table1(serial)) == dumps(bench.run_table1(pooled))


def test_trunc_curve_rows():
    cfg = CliConfig(command="trunc-curve", trials=2, restarts=1)
    report = bench.run_trunc_curve(cfg)
    assert len(report.rows) == 2 * 4
    assert [entry.chi for entry in report.summary] == [1, 2, 3, 4]
    full = report.summary[-1]
    assert full.fast.median == full.min.median == full.identity.median == 0
    for trial in (0, 1):
        eps = [row.eps_fast for row in report.rows if row.trial == trial]
        assert eps == sorted(eps, reverse=True)


def test_wave_rows():
    cfg = CliConfig(command="wave", qubits=4, layers=3, trials=2)
    report = bench.run_wave(cfg)
    assert len(report.rows) == 2 * 4
    first = report.rows[0]
    assert (first.layer, first.parity, first.cumulative_gates) == (0, None, 0)
    assert first.elapsed is None
    assert [r.cumulative_gates for r in report.rows[:4]] == [0, 2, 3, 5]
    assert all(len(r.entropies) == 3 for r in report.rows)
    assert report.summary["final_residual"].count == 2
    assert list(bench.WaveRow.model_fields)[-1] == "entropies"


def test_single_run_on_rank_one_ansatz():
    cfg = CliConfig(command="run", kind="ansatz", rank1=True)
    report = bench.run_single(cfg)
    assert report.entropy_after <= 1e-9
    assert report.regime == "base"
    assert report.unitarity_error <= 1e-12


def test_single_run_zero_count():
    cfg = CliConfig(command="run", chi1=4, chi2=4, chi3=4, chi4=4)
    report = bench.run_single(cfg)
    assert report.zero_lower_bound == 6
    assert report.zeros_after >= 6
    assert len(report.spectrum_rows()) == 16
    assert report.spectrum_rows()[0].index == 1


def test_single_run_in_bits():
    nats = bench.run_single(CliConfig(command="run", seed=2))
    bits = bench.run_single(CliConfig(command="run", seed=2, bits=True))
    assert bits.entropy_after == pytest.approx(nats.entropy_after / math.log(2))
    assert bits.spectrum_after == nats.spectrum_after


def test_single_run_reports_algorithm_steps():
    report = bench.run_single(CliConfig(command="run", chi1=2, chi2=3, chi3=3, chi4=4))
    assert report.ordering == "row"
    assert report.triangular_residual <= 1e-12
    best_of = bench.run_single(CliConfig(command="run", trials=3))
    assert best_of.ordering is None
    assert best_of.triangular_residual is None
