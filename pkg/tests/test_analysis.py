"""Densities, absorption, window statistic, pair frequencies, regime runs."""

import numpy as np
import pytest

from axelrod_lab import (
    CultureState,
    ModelParams,
    RunConfig,
    absorption_detect,
    check_density_order,
    density_estimates,
    derive_spins,
    geometric_times,
    init_state,
    initial_pair_frequencies,
    make_rng,
    regime_experiment,
    replicate_rng,
    run,
    run_live,
    snapshots_from_live,
    window_weight_statistic,
)
from axelrod_lab.analysis import DensitySnapshot, SnapshotCollector
from axelrod_lab.errors import ParameterError, UnsupportedConfigurationError
from axelrod_lab.theory import h1, probabilities


def three_sigma(p, n):
    return 3.0 * np.sqrt(p * (1 - p) / n)


class TestDensities:
    def test_consensus_zero(self):
        s = CultureState(np.full((20, 2), 1, dtype=np.int64))
        d = density_estimates(derive_spins(s))
        assert d.ubar == (0.0, 0.0) and d.blockade_density == 0.0

    def test_initial_densities_2_4(self):
        L = 100_000
        p = ModelParams(length=L, q=(2, 4), seed=2)
        s = init_state(p, make_rng(2))
        d = density_estimates(derive_spins(s))
        assert abs(d.ubar[0] - 0.5) <= three_sigma(0.5, L)
        assert abs(d.ubar[1] - 0.75) <= three_sigma(0.75, L)

    def test_split_identity_exact(self):
        p = ModelParams(length=5000, q=(3, 5), seed=3)
        s = init_state(p, make_rng(3))
        d = density_estimates(derive_spins(s))
        # both differences equal the blockade share, as integer counts
        assert d.level_counts[0] - (d.u_active[0] * d.n_edges) == d.blockade_count
        assert d.level_counts[1] - (d.u_active[1] * d.n_edges) == d.blockade_count

    def test_requires_two_features(self):
        s = CultureState(np.full((10, 3), 1, dtype=np.int64))
        with pytest.raises(UnsupportedConfigurationError):
            density_estimates(derive_spins(s))


class TestAbsorption:
    def test_consensus_absorbing(self):
        s = CultureState(np.full((10, 2), 1, dtype=np.int64))
        assert absorption_detect(derive_spins(s))

    def test_single_live_edge_not_absorbing(self):
        op = np.full((10, 2), 1, dtype=np.int64)
        op[4, 0] = 2
        assert not absorption_detect(derive_spins(CultureState(op)))

    def test_alternating_blockades_absorbing(self):
        op = np.array([[1, 1], [2, 2]] * 6, dtype=np.int64)
        spins = derive_spins(CultureState(op))
        assert np.all(spins.xi == 2)
        assert absorption_detect(spins)


class TestDensityOrder:
    def _snap(self, t, c0, c1, blk, L=100):
        return DensitySnapshot(time=t, n_edges=L, level_counts=(c0, c1), blockade_count=blk)

    def test_rejects_wrong_orientation(self):
        snaps = [[self._snap(1.0, 10, 5, 2)]]
        with pytest.raises(ParameterError):
            check_density_order(snaps, 2, 5)
        with pytest.raises(ParameterError):
            check_density_order(snaps, 3, 3)

    def test_arithmetic(self):
        # diffs: (40-10)-(30-10) = 10 edges and (42-12)-(28-12) = 14 edges
        sets = [
            [self._snap(1.0, 40, 30, 10)],
            [self._snap(1.0, 42, 28, 12)],
        ]
        rep = check_density_order(sets, 5, 2)
        assert rep.ok
        assert rep.mean_diff[0] == pytest.approx(0.12)

    def test_initial_gap_5_2(self):
        # at time zero the expected active-density gap is
        # (1 - 1/5) - (1 - 1/2) = 3/10, blockades cancelling
        L = 20_000
        p = ModelParams(length=L, q=(5, 2), seed=6)
        sets = []
        for rep in range(5):
            rng = replicate_rng(6, rep)
            s = init_state(p, rng)
            d = density_estimates(derive_spins(s))
            sets.append([DensitySnapshot(0.0, L, d.level_counts, d.blockade_count)])
        rep = check_density_order(sets, 5, 2)
        assert rep.ok
        assert rep.mean_diff[0] == pytest.approx(0.3, abs=0.02)

    def test_monte_carlo_ordering(self):
        p = ModelParams(length=2000, q=(5, 2), seed=7)
        sets = []
        times = (1.0, 10.0, 100.0)
        for rep in range(10):
            rng = replicate_rng(7, rep)
            s = init_state(p, rng)
            res = run_live(s, p, rng, t_max=100.0, stop_on_absorption=False,
                           snapshot_times=times, collect_collisions=False)
            sets.append(snapshots_from_live(res))
        rep = check_density_order(sets, 5, 2)
        assert rep.ok


class TestWindowStatistic:
    def test_empty_window_rejected(self):
        p = ModelParams(length=10, q=(2, 5), seed=0)
        s = init_state(p, make_rng(0))
        with pytest.raises(ParameterError):
            window_weight_statistic(derive_spins(s), p, (0, 0), make_rng(1))

    def test_consensus_window_zero(self):
        p = ModelParams(length=10, q=(2, 5), seed=0)
        s = CultureState(np.full((10, 2), 1, dtype=np.int64))
        val = window_weight_statistic(derive_spins(s), p, (0, 10), make_rng(1))
        assert val == 0.0

    def test_targets_h1(self):
        L = 100_000
        for q, seed in [((2, 5), 31), ((2, 4), 32)]:
            p = ModelParams(length=L, q=q, seed=seed)
            s = init_state(p, replicate_rng(seed, 0))
            val = window_weight_statistic(
                derive_spins(s), p, (0, L), replicate_rng(seed, 1)
            )
            assert val == pytest.approx(float(h1(*q)), abs=0.02)

    def test_variance_shrinks_with_window(self):
        # disjoint windows: sample variance of the statistic ~ 1/|W|
        L = 120_000
        p = ModelParams(length=L, q=(2, 5), seed=33)
        s = init_state(p, replicate_rng(33, 0))
        spins = derive_spins(s)
        rng = replicate_rng(33, 1)

        def spread(w):
            vals = [
                window_weight_statistic(spins, p, (start, w), rng)
                for start in range(0, L, w)
            ]
            return np.var(vals)

        v_small, v_big = spread(1000), spread(8000)
        assert v_big < v_small / 3  # expect roughly a factor of 8


class TestPairFrequencies:
    def test_consensus_zero(self):
        s = CultureState(np.full((30, 2), 2, dtype=np.int64))
        freqs = initial_pair_frequencies(s)
        assert all(v == 0.0 for v in freqs.values())

    def test_matches_products_2_4(self):
        L = 100_000
        p = ModelParams(length=L, q=(2, 4), seed=35)
        s = init_state(p, make_rng(35))
        freqs = initial_pair_frequencies(s)
        pr = probabilities(2, 4)
        t12 = float(pr.p11 * pr.p12)  # 3/64
        t11 = float(pr.p11 * pr.p11)  # 1/64
        assert abs(freqs[(0, 1)] - t12) <= three_sigma(t12, L)
        assert abs(freqs[(0, 0)] - t11) <= three_sigma(t11, L)

    def test_requires_two_features(self):
        s = CultureState(np.full((10, 1), 1, dtype=np.int64))
        with pytest.raises(UnsupportedConfigurationError):
            initial_pair_frequencies(s)


class TestRegimeExperiment:
    def test_shapes_and_determinism(self):
        rep1 = regime_experiment([(2, 2), (2, 4)], length=120, replicates=3,
                                 t_max=1e6, seed=11, threads=2)
        rep2 = regime_experiment([(2, 2), (2, 4)], length=120, replicates=3,
                                 t_max=1e6, seed=11, threads=1)
        assert len(rep1.rows) == 6 and len(rep1.aggregates) == 2
        # thread count must not affect results
        for a, b in zip(rep1.rows, rep2.rows):
            assert (a.q1, a.q2, a.replicate) == (b.q1, b.q2, b.replicate)
            assert a.surviving_blockade_density == b.surviving_blockade_density
            assert a.t_abs == b.t_abs
        agg = rep1.aggregate_for(2, 4)
        assert agg.predicted_regime == "fixates_strong"

    def test_empty_grid_rejected(self):
        with pytest.raises(ParameterError):
            regime_experiment([], length=100, replicates=2, t_max=10.0, seed=0)


class TestSnapshotCollector:
    def test_full_engine_grid(self):
        p = ModelParams(length=300, q=(2, 4), seed=41)
        rng = replicate_rng(41, 0)
        s = init_state(p, rng)
        spins0 = derive_spins(s)
        collector = SnapshotCollector([1, 2, 4, 8], spins0)
        cfg = RunConfig(t_max=8.0, stop_on_absorption=False, observers=[collector])
        summary = run(s, p, cfg, rng)
        snaps = collector.finish(summary.time)
        assert [s.time for s in snaps] == [1, 2, 4, 8]
        ubars = np.array([s.ubar for s in snaps])
        assert np.all(np.diff(ubars[:, 0]) <= 0)
        assert np.all(np.diff(ubars[:, 1]) <= 0)


def test_geometric_times():
    assert geometric_times(8.0) == [1.0, 2.0, 4.0, 8.0]
    assert geometric_times(10.0) == [1.0, 2.0, 4.0, 8.0, 10.0]
    with pytest.raises(ParameterError):
        geometric_times(0.0)


def test_thread_cap_env(monkeypatch):
    from axelrod_lab.analysis import THREADS_ENV, resolve_threads

    monkeypatch.setenv(THREADS_ENV, "3")
    assert resolve_threads() == 3
    assert resolve_threads(5) == 5  # explicit argument wins
    monkeypatch.delenv(THREADS_ENV)
    assert resolve_threads() >= 1
