"""Live-edge kernel: exactness, determinism, and agreement with the full engine."""

import numpy as np
import pytest

from axelrod_lab import (
    CultureState,
    ModelParams,
    RunConfig,
    derive_spins,
    init_state,
    replicate_rng,
    run,
    run_live,
    track_blockades,
)
from axelrod_lab.coupling import ancestor_identity_ok, check_coupling
from axelrod_lab.errors import ParameterError


@pytest.mark.parametrize("q", [(2, 2), (2, 5), (3, 4), (2, 3, 4)])
def test_final_spins_match_derived(q):
    p = ModelParams(length=120, q=q, seed=1)
    rng = replicate_rng(1, len(q), sum(q))
    s = init_state(p, rng)
    res = run_live(s, p, rng, t_max=40.0)
    check_coupling(res.spins, res.state)
    assert ancestor_identity_ok(res.ancestors, res.state)
    assert res.spins.time == res.state.time
    for i, qi in enumerate(q):  # opinions stay in range under every update
        col = res.state.opinions[:, i]
        assert col.min() >= 1 and col.max() <= qi


def test_deterministic():
    p = ModelParams(length=150, q=(2, 4), seed=5)

    def go():
        rng = replicate_rng(5, 0)
        s = init_state(p, rng)
        return run_live(s, p, rng, t_max=30.0, snapshot_times=[1, 2, 4])

    a, b = go(), go()
    assert np.array_equal(a.state.opinions, b.state.opinions)
    assert a.n_candidates == b.n_candidates and a.n_active == b.n_active
    assert a.time == b.time
    assert np.array_equal(a.snapshot_level_counts, b.snapshot_level_counts)
    assert np.array_equal(a.flips, b.flips)


def test_copy_state_default_preserves_input():
    p = ModelParams(length=50, q=(2, 3), seed=7)
    rng = replicate_rng(7, 0)
    s = init_state(p, rng)
    before = s.opinions.copy()
    run_live(s, p, rng, t_max=5.0)
    assert np.array_equal(s.opinions, before)


def test_consensus_absorbs_immediately():
    p = ModelParams(length=10, q=(2, 2), seed=0)
    s = CultureState(np.full((10, 2), 1, dtype=np.int64))
    res = run_live(s, p, replicate_rng(0, 0), t_max=10.0)
    assert res.absorbed and res.n_candidates == 0
    assert res.t_abs == 0.0


@pytest.mark.parametrize("L", [3, 4, 5])
def test_tiny_rings_stay_consistent(L):
    # smallest legal rings exercise every wrap-around branch
    for seed in range(20):
        p = ModelParams(length=L, q=(3, 3), seed=seed)
        rng = replicate_rng(seed, L)
        s = init_state(p, rng)
        res = run_live(s, p, rng, t_max=200.0)
        check_coupling(res.spins, res.state)
        assert ancestor_identity_ok(res.ancestors, res.state)


def test_single_feature_always_absorbed():
    # F = 1: every edge is either empty or fully frozen, so no candidate exists
    p = ModelParams(length=30, q=(5,), seed=2)
    rng = replicate_rng(2, 0)
    s = init_state(p, rng)
    res = run_live(s, p, rng, t_max=10.0)
    assert res.absorbed and res.n_candidates == 0
    assert np.array_equal(res.state.opinions, s.opinions)


def test_alternating_blockade_ring_is_absorbing():
    # alternating cultures freeze every edge: no candidate ever fires
    op = np.array([[1, 1], [2, 2]] * 5, dtype=np.int64)
    p = ModelParams(length=10, q=(2, 2), seed=0)
    res = run_live(CultureState(op), p, replicate_rng(0, 1), t_max=10.0)
    assert res.absorbed and res.n_candidates == 0
    assert res.spins.blockade_count == 10


def test_needs_stopping_rule():
    p = ModelParams(length=10, q=(2, 2), seed=0)
    s = CultureState(np.full((10, 2), 1, dtype=np.int64))
    with pytest.raises(ParameterError):
        run_live(s, p, replicate_rng(0, 0), t_max=None, max_events=None,
                 stop_on_absorption=False)


def test_max_events_cap():
    p = ModelParams(length=200, q=(2, 4), seed=9)
    rng = replicate_rng(9, 0)
    s = init_state(p, rng)
    res = run_live(s, p, rng, max_events=500, stop_on_absorption=True)
    assert res.n_candidates == 500
    assert res.stopped_on == "max_events"


def test_t_max_reported_when_not_absorbing():
    p = ModelParams(length=400, q=(2, 5), seed=11)
    rng = replicate_rng(11, 0)
    s = init_state(p, rng)
    res = run_live(s, p, rng, t_max=0.5)
    assert res.stopped_on in ("t_max", "absorbed")
    if res.stopped_on == "t_max":
        assert res.time == 0.5 and res.t_abs is None


def test_snapshot_counts_monotone():
    p = ModelParams(length=500, q=(2, 4), seed=13)
    rng = replicate_rng(13, 0)
    s = init_state(p, rng)
    res = run_live(s, p, rng, t_max=64.0, snapshot_times=[1, 2, 4, 8, 16, 32, 64])
    lc = res.snapshot_level_counts
    assert lc.shape[0] == 7
    # walkers only jump, merge, or cancel: per-level counts never increase
    assert np.all(np.diff(lc[:, 0]) <= 0)
    assert np.all(np.diff(lc[:, 1]) <= 0)
    assert np.all(res.snapshot_blockades >= 0)


def test_blockade_ledger_matches_collision_replay():
    p = ModelParams(length=400, q=(2, 5), seed=15)
    rng = replicate_rng(15, 0)
    s = init_state(p, rng)
    spins0 = derive_spins(s)
    res = run_live(s, p, rng, t_max=40.0, collect_collisions=True)
    replay = track_blockades(spins0, res.collisions)
    assert set(replay.blockades) == set(res.blockade_ledger.blockades)
    for e, entry in replay.blockades.items():
        kernel_entry = res.blockade_ledger.blockades[e]
        assert entry.hits == kernel_entry.hits
        assert entry.broke == kernel_entry.broke
        assert entry.t_break == kernel_entry.t_break


def test_candidates_only_at_live_edges():
    p = ModelParams(length=300, q=(2, 4), seed=17)
    rng = replicate_rng(17, 0)
    s = init_state(p, rng)
    res = run_live(s, p, rng, max_events=5000)
    # F = 2: live edges carry exactly one walker
    assert res.candidates_by_xi[0] == 0
    assert res.candidates_by_xi[2] == 0
    assert res.candidates_by_xi[1] == res.n_candidates


def test_acceptance_rate_matches_rate_function():
    p = ModelParams(length=2000, q=(2, 4), seed=19)
    rng = replicate_rng(19, 0)
    s = init_state(p, rng)
    res = run_live(s, p, rng, max_events=30_000)
    frac = res.active_by_xi[1] / res.candidates_by_xi[1]
    assert abs(frac - 0.5) <= 3 * np.sqrt(0.25 / res.candidates_by_xi[1])


def test_flip_counts_match_active_events():
    p = ModelParams(length=200, q=(3, 3), seed=21)
    rng = replicate_rng(21, 0)
    s = init_state(p, rng)
    res = run_live(s, p, rng, t_max=20.0)
    assert res.flips.sum() == res.n_active


def test_three_feature_law_agreement():
    # quick mean-level check that skipping inactive arrivals is harmless at F=3
    def actives(seed_root, use_live):
        out = []
        for rep in range(150):
            p = ModelParams(length=10, q=(2, 2, 3), seed=seed_root)
            rng = replicate_rng(seed_root, rep)
            s = init_state(p, rng)
            if use_live:
                r = run_live(s, p, rng, t_max=100.0, collect_collisions=False)
                out.append(r.n_active)
            else:
                out.append(run(s, p, RunConfig(t_max=100.0), rng).n_active)
        return np.array(out, dtype=float)

    full = actives(500, False)
    live = actives(600, True)
    se = np.sqrt(full.var(ddof=1) / full.size + live.var(ddof=1) / live.size)
    assert abs(full.mean() - live.mean()) < 4.0 * se


class TestModeAgreement:
    """The live engine must agree in law with the full engine on the
    active-event subsequence; only guaranteed-inactive arrivals are skipped."""

    N = 400
    L = 12
    Q = (2, 3)

    def _full(self):
        out = []
        for rep in range(self.N):
            p = ModelParams(length=self.L, q=self.Q, seed=300)
            rng = replicate_rng(300, rep)
            s = init_state(p, rng)
            summ = run(s, p, RunConfig(t_max=5000.0), rng)
            out.append(
                (summ.n_active, summ.time if summ.stopped_on == "absorbed" else np.nan,
                 summ.spins.blockade_count)
            )
        return np.array(out)

    def _live(self):
        out = []
        for rep in range(self.N):
            p = ModelParams(length=self.L, q=self.Q, seed=400)
            rng = replicate_rng(400, rep)
            s = init_state(p, rng)
            res = run_live(s, p, rng, t_max=5000.0, collect_collisions=False)
            out.append(
                (res.n_active, res.t_abs if res.absorbed else np.nan,
                 res.spins.blockade_count)
            )
        return np.array(out)

    def test_summary_statistics_agree(self):
        full = self._full()
        live = self._live()

        def z(a, b):
            a, b = a[~np.isnan(a)], b[~np.isnan(b)]
            se = np.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
            return (a.mean() - b.mean()) / se

        assert abs(z(full[:, 0], live[:, 0])) < 4.0  # active events
        assert abs(z(full[:, 1], live[:, 1])) < 4.0  # absorption time
        assert abs(z(full[:, 2], live[:, 2])) < 4.0  # surviving blockades
