"""Birth-death simulator: balance, reproducibility, kernel parity, accuracy."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from ecomp import EComPoisson, parse_phi
from ecomp.errors import ConfigError, DivergenceError, MismatchError
from ecomp.queueing import (
    KERNEL_KIND,
    QueueScenario,
    SimResult,
    _resolve_kernel,
    compare_to_theory,
    detailed_balance_residual,
    simulate,
)

try:
    from ecomp import _queue_kernel  # noqa: F401
    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


class TestScenario:
    def test_rho(self):
        assert QueueScenario(0.5, 2.0, "id").rho == 0.25

    def test_burn_in_default(self):
        sc = QueueScenario(0.5, 1.0, "id", horizon=1000.0)
        assert sc.burn_in == 100.0

    def test_validation(self):
        with pytest.raises(ConfigError):
            QueueScenario(-1.0, 1.0, "id")
        with pytest.raises(ConfigError):
            QueueScenario(0.5, 0.0, "id")
        with pytest.raises(ConfigError):
            QueueScenario(0.5, 1.0, "id", horizon=0.0)
        with pytest.raises(ConfigError):
            QueueScenario(0.5, 1.0, "id", horizon=100.0, burn_in=100.0)
        with pytest.raises(ConfigError):
            QueueScenario(0.5, 1.0, "id", lambda_cap=0.0)
        with pytest.raises(ConfigError):
            QueueScenario(0.2, 1.0, "inv:ratio:1.0", lambda_cap=3.0)

    def test_no_stationary_law(self):
        with pytest.raises(DivergenceError):
            QueueScenario(1.0, 1.0, "ratio:1.0")

    def test_cap_restores_stationarity(self):
        # arrival blocking makes the capped chain ergodic at any rho
        QueueScenario(1.0, 1.0, "ratio:1.0", lambda_cap=10.0)

    def test_spec_round_trip(self):
        sc = QueueScenario(0.5, 2.0, "power:2.0", lambda_cap=7.5,
                           horizon=5e4, burn_in=1e3, seed=9)
        spec = sc.to_spec()
        back = QueueScenario.from_spec(spec)
        assert back == sc
        assert back.to_spec() == spec

    def test_spec_inf_cap_encoding(self):
        sc = QueueScenario(0.5, 1.0, "id")
        spec = sc.to_spec()
        assert spec["lambda_cap"] == "inf"
        assert math.isinf(QueueScenario.from_spec(spec).lambda_cap)

    def test_spec_missing_field(self):
        with pytest.raises(ConfigError):
            QueueScenario.from_spec({"phi": "id", "lambda": 0.5})
        with pytest.raises(ConfigError):
            QueueScenario.from_spec([1, 2])

    def test_distribution_matches_parameters(self):
        sc = QueueScenario(0.5, 2.0, "id", lambda_cap=6.5)
        d = sc.distribution()
        assert d.rho == 0.25
        assert d.lambda_cap == 6.5


class TestDetailedBalance:
    @pytest.mark.parametrize(
        "sid,lam,mu",
        [("id", 0.5, 1.0), ("ratio:1.0", 0.5, 1.0), ("power:2.0", 2.0, 1.0),
         ("lambert", 1.2, 2.0), ("quadraticshift", 2.5, 1.0)],
    )
    def test_residual_tiny(self, sid, lam, mu):
        sc = QueueScenario(lam, mu, sid)
        assert detailed_balance_residual(sc, sc.distribution()) <= 1e-12

    def test_capped_chain(self):
        sc = QueueScenario(2.0, 1.0, "id", lambda_cap=4.5)
        assert detailed_balance_residual(sc, sc.distribution()) <= 1e-12


class TestSimulate:
    def test_histogram_normalized(self):
        res = simulate(QueueScenario(0.5, 1.0, "id", horizon=2e4, seed=42))
        assert res.occupancy.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(res.occupancy >= 0.0)

    def test_reproducible(self):
        sc = QueueScenario(0.5, 1.0, "ratio:1.0", horizon=2e4, seed=123)
        a, b = simulate(sc, replicates=3), simulate(sc, replicates=3)
        assert np.array_equal(a.occupancy, b.occupancy)
        assert a.jumps == b.jumps
        assert a.final_states == b.final_states
        assert a.total_weight == b.total_weight

    def test_seed_changes_trajectory(self):
        base = dict(lam=0.5, mu=1.0, phi="id", horizon=2e4)
        a = simulate(QueueScenario(seed=1, **base))
        b = simulate(QueueScenario(seed=2, **base))
        assert a.jumps != b.jumps or not np.array_equal(a.occupancy, b.occupancy)

    def test_zero_arrivals_degenerate(self):
        res = simulate(QueueScenario(0.0, 1.0, "id", horizon=1e3, seed=2))
        assert res.occupancy[0] == 1.0
        assert res.occupancy.sum() == 1.0
        assert res.jumps == 0
        assert res.final_states == (0,)

    def test_finite_cap_support(self):
        sc = QueueScenario(2.0, 1.0, "id", lambda_cap=4.5, horizon=2e4, seed=5)
        res = simulate(sc)
        assert res.occupancy.shape[0] == 5     # states 0..4
        assert res.occupancy.sum() == pytest.approx(1.0, abs=1e-12)
        assert res.occupancy[4] > 0.0          # the top state is reachable

    def test_replicate_merge_weight(self):
        sc = QueueScenario(0.5, 1.0, "id", horizon=1e4, seed=3)
        res = simulate(sc, replicates=4)
        assert res.replicates == 4
        assert len(res.final_states) == 4
        assert res.total_weight == pytest.approx(4 * 0.9e4, rel=1e-12)

    def test_bad_replicates(self):
        with pytest.raises(ConfigError):
            simulate(QueueScenario(0.5, 1.0, "id"), replicates=0)

    def test_result_dict_round_trippable(self):
        import json

        res = simulate(QueueScenario(0.5, 1.0, "id", horizon=5e3, seed=1))
        d = res.to_dict()
        assert d["lambda_cap"] == "inf"
        assert json.dumps(d)
        assert d["occupancy"] == res.occupancy.tolist()


class TestAccuracy:
    @pytest.mark.parametrize(
        "sid,lam,mu",
        [("id", 0.5, 1.0), ("ratio:1.0", 0.5, 1.0), ("power:2.0", 2.0, 1.0)],
    )
    def test_tv_small_at_moderate_horizon(self, sid, lam, mu):
        sc = QueueScenario(lam, mu, sid, horizon=2e5, seed=42)
        cmp_ = compare_to_theory(simulate(sc), sc.distribution())
        assert cmp_.tv_distance <= 0.02
        assert cmp_.mean_gap <= 0.05

    def test_tv_shrinks_with_horizon(self):
        tvs = []
        for horizon in (3e3, 3e4, 3e5):
            sc = QueueScenario(0.5, 1.0, "id", horizon=horizon, seed=7)
            tvs.append(compare_to_theory(simulate(sc), sc.distribution()).tv_distance)
        # noise allowance on each decade; strict decrease over two decades
        assert tvs[1] <= tvs[0] + 0.005
        assert tvs[2] <= tvs[1] + 0.005
        assert tvs[2] < tvs[0]

    def test_ratio_empirical_mean(self):
        # stationary mean 2 rho/(1 - rho) = 2 at rho = 0.5
        sc = QueueScenario(0.5, 1.0, "ratio:1.0", horizon=2e5, seed=42)
        assert abs(simulate(sc).empirical_mean() - 2.0) <= 0.05


class TestCompare:
    def test_perfect_match_synthetic(self):
        d = EComPoisson(0.5, parse_phi("id"))
        pmf = d.pmf_array(40)
        res = SimResult(
            phi_id="id", lam=0.5, mu=1.0, lambda_cap=math.inf,
            horizon=1.0, burn_in=0.0, seed=0, replicates=1, kernel="python",
            occupancy=pmf / pmf.sum(), total_weight=1.0, jumps=0,
            final_states=(0,),
        )
        cmp_ = compare_to_theory(res, d)
        assert cmp_.tv_distance <= 1e-12
        assert cmp_.mean_gap <= 1e-12

    def test_mismatch_errors(self):
        sc = QueueScenario(0.5, 1.0, "id", horizon=5e3, seed=1)
        res = simulate(sc)
        with pytest.raises(MismatchError):
            compare_to_theory(res, EComPoisson(0.5, parse_phi("power:2.0")))
        with pytest.raises(MismatchError):
            compare_to_theory(res, EComPoisson(0.7, parse_phi("id")))
        with pytest.raises(MismatchError):
            compare_to_theory(res, EComPoisson(0.5, parse_phi("id"),
                                               lambda_cap=9.5))

    def test_tail_mass_counts_toward_distance(self):
        # a histogram that is too short cannot report a tiny distance
        d = EComPoisson(3.0, parse_phi("id"))
        res = SimResult(
            phi_id="id", lam=3.0, mu=1.0, lambda_cap=math.inf,
            horizon=1.0, burn_in=0.0, seed=0, replicates=1, kernel="python",
            occupancy=np.array([1.0]), total_weight=1.0, jumps=0,
            final_states=(0,),
        )
        tv = compare_to_theory(res, d).tv_distance
        assert tv >= 1.0 - d.pmf(0)


class TestKernels:
    def test_kind_reported(self):
        assert KERNEL_KIND in ("compiled", "python")
        res = simulate(QueueScenario(0.5, 1.0, "id", horizon=1e3, seed=1),
                       kernel="python")
        assert res.kernel == "python"

    @pytest.mark.skipif(not HAVE_COMPILED, reason="extension not built")
    def test_compiled_python_parity(self):
        sc = QueueScenario(0.8, 1.0, "power:2.0", horizon=5e4, seed=11)
        a = simulate(sc, replicates=2, kernel="compiled")
        b = simulate(sc, replicates=2, kernel="python")
        assert np.array_equal(a.occupancy, b.occupancy)
        assert a.jumps == b.jumps
        assert a.final_states == b.final_states
        assert a.total_weight == b.total_weight

    @pytest.mark.skipif(not HAVE_COMPILED, reason="extension not built")
    def test_parity_with_capped_support(self):
        sc = QueueScenario(2.0, 1.0, "id", lambda_cap=4.5, horizon=2e4, seed=5)
        a = simulate(sc, kernel="compiled")
        b = simulate(sc, kernel="python")
        assert np.array_equal(a.occupancy, b.occupancy)

    def test_unknown_kernel_rejected(self):
        with pytest.raises(ConfigError):
            _resolve_kernel("fortran")
        with pytest.raises(ConfigError):
            simulate(QueueScenario(0.5, 1.0, "id", horizon=1e3), kernel="x")

    def test_env_override_forces_python(self):
        code = (
            "from ecomp.queueing import KERNEL_KIND; print(KERNEL_KIND)"
        )
        env = dict(os.environ, ECOMP_PURE_KERNEL="1")
        out = subprocess.run(
            [sys.executable, "-c", code], env=env,
            capture_output=True, text=True, check=True,
        )
        assert out.stdout.strip() == "python"
