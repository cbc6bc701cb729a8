import math

import numpy as np
import pytest

from geocascade.errors import ParameterDomainError
from geocascade.harness import (
    BoundCurve,
    SweepSpec,
    density_series,
    estimate_failure_ratio,
    first_round_load_probe,
    run_trials,
    sweep,
    transition_stats,
)
from geocascade.rgg import NetworkConfig

CFG = NetworkConfig(400.0, 0.1, 1.0, 0.1)


def small_spec(**overrides):
    kw = dict(
        config=CFG,
        alpha_grid=(1.5, 2.0, 2.5, 3.0),
        trials=60,
        master_seed=11,
        threads=1,
    )
    kw.update(overrides)
    return SweepSpec(**kw)


class TestSweepSpec:
    def test_grid_must_be_sorted(self):
        with pytest.raises(ParameterDomainError):
            small_spec(alpha_grid=(2.0, 1.5))

    def test_grid_must_be_nonempty(self):
        with pytest.raises(ParameterDomainError):
            small_spec(alpha_grid=())

    def test_trials_floor(self):
        with pytest.raises(ParameterDomainError):
            small_spec(trials=0)


class TestDeterminism:
    def test_thread_count_does_not_change_results(self):
        r1, d1 = run_trials(small_spec(threads=1))
        r2, d2 = run_trials(small_spec(threads=2))
        assert np.array_equal(r1, r2)
        assert d1 == d2

    def test_repeated_sweep_identical_csv(self):
        c1 = sweep(small_spec())
        c2 = sweep(small_spec(threads=2))
        assert c1.to_csv_text() == c2.to_csv_text()

    def test_master_seed_changes_results(self):
        r1, _ = run_trials(small_spec())
        r2, _ = run_trials(small_spec(master_seed=12))
        assert not np.array_equal(r1, r2)


class TestEstimate:
    def test_single_alpha_sweep_matches_estimate(self):
        mean, stderr, diag = estimate_failure_ratio(
            CFG, trials=60, master_seed=11, alpha=2.0, threads=1
        )
        curve = sweep(small_spec(alpha_grid=(2.0,)))
        assert mean == curve.fbar[0]
        assert stderr == curve.stderr[0]
        assert diag["disconnected"] == curve.disconnected

    def test_large_tolerance_is_quiet(self):
        mean, stderr, _ = estimate_failure_ratio(
            CFG, trials=40, master_seed=3, alpha=10.0, threads=1
        )
        assert mean <= stderr  # essentially zero

    def test_no_slack_fails_almost_everything(self):
        mean, _, _ = estimate_failure_ratio(
            CFG, trials=40, master_seed=3, alpha=1.0, threads=1
        )
        assert mean > 0.99

    def test_stderr_scaling(self):
        # independent batches at doubling trial counts: fitted log-log
        # slope of stderr vs trials should sit near -1/2
        sizes = [30, 60, 120, 240, 480]
        errs = []
        for i, n in enumerate(sizes):
            _, stderr, _ = estimate_failure_ratio(
                CFG, trials=n, master_seed=100 + i, alpha=2.2, threads=0
            )
            errs.append(stderr)
        slope = np.polyfit(np.log(sizes), np.log(errs), 1)[0]
        assert abs(slope + 0.5) < 0.2

    def test_single_trial_stderr_zero(self):
        _, stderr, _ = estimate_failure_ratio(
            CFG, trials=1, master_seed=5, alpha=2.0, threads=1
        )
        assert stderr == 0.0


class TestConditioning:
    def test_conditioning_shifts_little_in_regime(self):
        plain, se_p, _ = estimate_failure_ratio(
            CFG, trials=200, master_seed=21, alpha=2.2, threads=0
        )
        cond, se_c, diag = estimate_failure_ratio(
            CFG,
            trials=200,
            master_seed=21,
            alpha=2.2,
            condition_on_connected=True,
            threads=0,
        )
        assert abs(plain - cond) <= 3.0 * math.hypot(se_p, se_c)
        assert diag["disconnected"] >= 0

    def test_probe_aborts_when_infeasible(self):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            sparse = NetworkConfig(60.0, 0.03, 1.0, 0.01)
        with pytest.raises(RuntimeError, match="probe"):
            run_trials(
                SweepSpec(
                    config=sparse,
                    alpha_grid=(2.0,),
                    trials=5,
                    condition_on_connected=True,
                    master_seed=1,
                    threads=1,
                )
            )


class TestSweepColumns:
    def test_csv_schema_and_shape(self):
        curve = sweep(small_spec())
        text = curve.to_csv_text()
        lines = text.strip().split("\n")
        assert lines[0] == BoundCurve.CSV_HEADER
        assert len(lines) == 1 + 4
        first = lines[1].split(",")
        assert len(first) == 8
        assert float(first[0]) == 1.5

    def test_bounds_columns_consistent(self):
        curve = sweep(small_spec(alpha_grid=(1.0, 1.4, 2.0, 2.6, 3.0)))
        assert not curve.lower_applicable[0]  # tolerance 1.0: undefined
        assert curve.lower_applicable[1]
        assert curve.lower_applicable[2]
        assert not curve.lower_applicable[3]  # above validity limit 2.5
        assert np.all(curve.upper >= -1e-12) and np.all(curve.upper <= 1 + 1e-12)

    def test_sandwich_rows(self):
        curve = sweep(small_spec(trials=150, alpha_grid=(1.4, 1.8, 2.2)))
        for i in range(curve.alphas.size):
            assert curve.fbar[i] <= curve.upper[i] + 3 * curve.stderr[i]
            if curve.lower_applicable[i]:
                assert curve.lower[i] <= curve.fbar[i] + 3 * curve.stderr[i]


class TestTransitionStats:
    def test_crossings_on_synthetic_curve(self):
        alphas = np.linspace(1.0, 4.0, 31)
        fbar = 1.0 / (1.0 + np.exp((alphas - 2.2) / 0.15))
        curve = BoundCurve(
            alphas=alphas,
            fbar=fbar,
            stderr=np.zeros_like(alphas),
            upper=np.ones_like(alphas),
            lower=np.zeros_like(alphas),
            lower_applicable=np.zeros_like(alphas, dtype=bool),
            trials=1,
            disconnected=0,
        )
        ts = transition_stats(curve)
        assert ts.high_cross < ts.mid_cross < ts.low_cross
        assert ts.mid_cross == pytest.approx(2.2, abs=0.02)
        assert ts.width == pytest.approx(2 * 0.15 * math.log(9), rel=0.1)

    def test_flat_curve_raises(self):
        curve = BoundCurve(
            alphas=np.array([1.0, 2.0]),
            fbar=np.array([0.2, 0.1]),
            stderr=np.zeros(2),
            upper=np.ones(2),
            lower=np.zeros(2),
            lower_applicable=np.zeros(2, dtype=bool),
            trials=1,
            disconnected=0,
        )
        with pytest.raises(ValueError):
            transition_stats(curve)


class TestDensitySeries:
    def test_reduces_to_sweep_for_single_density(self):
        spec = small_spec(alpha_grid=(2.0, 2.5), trials=30)
        series = density_series(spec, [CFG.density])
        direct = sweep(spec)
        assert series.curves[0].to_csv_text() == direct.to_csv_text()
        assert series.alpha_upper == pytest.approx(2.3324088068784246, rel=1e-9)


class TestFirstRoundProbe:
    def test_exact_mean_within_three_stderr(self):
        probe = first_round_load_probe(
            CFG, node_dists=(0.1, 0.15), draws=1500, master_seed=77
        )
        for t, rec in probe.items():
            assert rec["count"] > 200
            assert abs(rec["mean"] - rec["predicted_mean"]) <= 3 * rec["mean_stderr"]
