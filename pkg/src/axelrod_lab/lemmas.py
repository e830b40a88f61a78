"""Monte Carlo and structural verification runners.

Each runner exercises one statistical law or exact invariant of the
coupled dynamics at a documented scale and returns
:class:`VerificationReport` objects carrying (estimate, target, bound, n).
Statistical checks use ``n_sigma`` normal-approximation bounds; structural
checks demand zero violations.  The ``verify`` CLI subcommand and the
acceptance suite both drive these.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fast
from .analysis import DensityOrderReport, check_density_order, snapshots_from_live
from .coupling import (
    ANNIHILATION,
    check_coupling,
    derive_spins,
    ancestor_identity_ok,
)
from .engine import RunConfig, run
from .errors import ParameterError
from .model import ModelParams, init_state, interaction_rate, replicate_rng
from .theory import h1 as h1_margin


@dataclass
class VerificationReport:
    """One verified statement: |estimate - target| within bound over n samples.

    One-sided checks put the worst observed margin in ``estimate`` and
    pass while it stays below ``target + bound``.
    """

    name: str
    estimate: float
    target: float
    bound: float
    n: int
    passed: bool
    detail: str = ""

    def __post_init__(self):
        self.estimate = float(self.estimate)
        self.target = float(self.target)
        self.bound = float(self.bound)
        self.n = int(self.n)
        self.passed = bool(self.passed)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{self.name}: estimate={self.estimate:.6g} target={self.target:.6g} "
            f"bound={self.bound:.6g} n={self.n} {status}"
        )


def _binomial_bound(p: float, n: int, n_sigma: float) -> float:
    return n_sigma * np.sqrt(max(p * (1.0 - p), 1e-300) / n)


def verify_lemma1(
    q: tuple[int, ...] = (2, 4),
    length: int = 10_000,
    min_candidates: int = 20_000,
    seed: int = 0,
    n_sigma: float = 3.0,
) -> list[VerificationReport]:
    """Acceptance rate of candidate arrows.

    Conditioned on crossing a live edge with ``j`` disagreements at a
    disagreeing feature, the accepted fraction must match
    ``2 r(j) = (1/j)(1 - j/F)``.  One report per ``j`` class with enough
    samples.
    """
    params = ModelParams(length=length, q=q, seed=seed)
    rng = replicate_rng(seed, 0)
    state = init_state(params, rng)
    res = fast.run_live(
        state, params, rng, max_events=min_candidates, collect_collisions=False
    )
    reports = []
    for j in range(1, params.F):
        n = int(res.candidates_by_xi[j])
        if n < 100:
            continue
        target = 2.0 * interaction_rate(j, params.F)
        est = float(res.active_by_xi[j] / n)
        bound = _binomial_bound(target, n, n_sigma)
        reports.append(
            VerificationReport(
                name=f"lemma1-accept-rate-xi{j}",
                estimate=est,
                target=target,
                bound=bound,
                n=n,
                passed=abs(est - target) <= bound,
            )
        )
    if not reports:
        raise ParameterError("no disagreement class collected enough candidates")
    return reports


def verify_lemma4(
    q: tuple[int, int] = (2, 5),
    length: int = 100_000,
    t_max: float = 10.0,
    min_collisions: int = 10_000,
    seed: int = 0,
    n_sigma: float = 3.0,
) -> list[VerificationReport]:
    """Collision outcome law.

    At a feature with ``q_i`` opinions a collision annihilates with
    probability ``1/(q_i - 1)``; at ``q_i = 2`` every collision must
    annihilate, exactly.
    """
    params = ModelParams(length=length, q=q, seed=seed)
    rng = replicate_rng(seed, 0)
    state = init_state(params, rng)
    res = fast.run_live(state, params, rng, t_max=t_max, collect_collisions=True)
    reports = []
    for i, qi in enumerate(params.q):
        colls = [c for c in res.collisions if c.level == i]
        n = len(colls)
        anns = sum(c.outcome == ANNIHILATION for c in colls)
        target = 1.0 / (qi - 1)
        if qi == 2:
            est = anns / n if n else 1.0
            reports.append(
                VerificationReport(
                    name=f"lemma4-level{i + 1}-q{qi}-always-annihilates",
                    estimate=est,
                    target=1.0,
                    bound=0.0,
                    n=n,
                    passed=anns == n,
                )
            )
        else:
            est = anns / n if n else float("nan")
            bound = _binomial_bound(target, max(n, 1), n_sigma)
            reports.append(
                VerificationReport(
                    name=f"lemma4-level{i + 1}-q{qi}-annihilation-fraction",
                    estimate=est,
                    target=target,
                    bound=bound,
                    n=n,
                    passed=n >= min_collisions and abs(est - target) <= bound,
                    detail=f"needs >= {min_collisions} collisions",
                )
            )
    return reports


def verify_lemma5(
    q: tuple[int, int] = (5, 2),
    length: int = 10_000,
    replicates: int = 20,
    times: tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0),
    seed: int = 0,
    n_sigma: float = 3.0,
) -> tuple[VerificationReport, DensityOrderReport]:
    """Active-walker density ordering between levels.

    Level 1 must hold at least as many active walkers as level 2 whenever
    it offers more opinions, up to replicate noise at every checkpoint.
    """
    q1, q2 = q
    if q1 <= q2:
        raise ParameterError(f"need q1 > q2, got {q}")
    params = ModelParams(length=length, q=q, seed=seed)
    snapshot_sets = []
    for rep in range(replicates):
        rng = replicate_rng(seed, rep)
        state = init_state(params, rng)
        res = fast.run_live(
            state,
            params,
            rng,
            t_max=max(times),
            stop_on_absorption=False,
            snapshot_times=times,
            collect_collisions=False,
        )
        snapshot_sets.append(snapshots_from_live(res))
    order = check_density_order(snapshot_sets, q1, q2, n_sigma=n_sigma)
    worst = int(np.argmin(order.mean_diff))
    report = VerificationReport(
        name="lemma5-density-order",
        estimate=order.mean_diff[worst],
        target=0.0,
        bound=order.n_sigma * order.sigma[worst],
        n=replicates,
        passed=order.ok,
        detail=" ".join(
            f"t={t:g}:diff={d:.5f}±{s:.5f}"
            for t, d, s in zip(order.times, order.mean_diff, order.sigma)
        ),
    )
    return report, order


def sample_hit_bound(
    q: tuple[int, int], n: int, rng: np.random.Generator
) -> np.ndarray:
    """Oracle draws of the half-sum of the two per-level collision laws."""
    q1, q2 = q
    y1 = rng.geometric(1.0 / (q1 - 1), size=n)
    y2 = rng.geometric(1.0 / (q2 - 1), size=n)
    return 0.5 * (y1 + y2)


def verify_lemma6(
    q: tuple[int, int] = (2, 5),
    length: int = 100_000,
    t_max: float = 60.0,
    seed: int = 0,
    oracle_draws: int = 200_000,
    n_sigma: float = 3.0,
) -> VerificationReport:
    """Hit counts of broken blockades dominate the synthetic half-sum law.

    Compares the empirical CDF of hits-before-break (censored blockades
    excluded) against a directly sampled CDF of ``(Y1 + Y2)/2`` at the
    deciles of the latter; the empirical CDF must not exceed it by more
    than the pooled ``n_sigma`` bound anywhere.
    """
    q1, q2 = q
    if q1 == q2:
        raise ParameterError("dominance is only asserted for unequal opinion counts")
    params = ModelParams(length=length, q=q, seed=seed)
    rng = replicate_rng(seed, 0)
    state = init_state(params, rng)
    res = fast.run_live(state, params, rng, t_max=t_max, collect_collisions=False)
    hits = np.array([b.hits for b in res.blockade_ledger.broken()], dtype=float)
    n_broken = hits.size
    n_censored = len(res.blockade_ledger.censored())
    if n_broken < 100:
        raise ParameterError(f"only {n_broken} blockades broke; raise t_max or length")
    oracle = sample_hit_bound(q, oracle_draws, replicate_rng(seed, 1))
    grid = np.unique(np.quantile(oracle, np.arange(0.1, 0.95, 0.1)))
    worst_gap = -np.inf
    worst_bound = 0.0
    lines = []
    for t in grid:
        fe = float(np.mean(hits <= t))
        fo = float(np.mean(oracle <= t))
        var = fo * (1 - fo)
        bound = n_sigma * np.sqrt(var / n_broken + var / oracle_draws)
        gap = fe - fo
        lines.append(f"t={t:g}:emp={fe:.4f} vs bound-law={fo:.4f}")
        if gap - bound > worst_gap - worst_bound:
            worst_gap, worst_bound = gap, bound
    return VerificationReport(
        name="lemma6-hit-dominance",
        estimate=worst_gap,
        target=0.0,
        bound=worst_bound,
        n=int(n_broken),
        passed=worst_gap <= worst_bound,
        detail=f"broken={n_broken} censored={n_censored}; " + " ".join(lines),
    )


def verify_lemma7_window(
    q: tuple[int, int] = (2, 5),
    length: int = 100_000,
    seed: int = 0,
    tol: float = 0.02,
) -> VerificationReport:
    """Window weight statistic against the exact first-order margin."""
    from .analysis import window_weight_statistic

    params = ModelParams(length=length, q=q, seed=seed)
    rng = replicate_rng(seed, 0)
    state = init_state(params, rng)
    spins = derive_spins(state)
    est = window_weight_statistic(spins, params, (0, length), replicate_rng(seed, 1))
    target = float(h1_margin(*q))
    return VerificationReport(
        name="lemma7-window-statistic",
        estimate=est,
        target=target,
        bound=tol,
        n=length,
        passed=abs(est - target) <= tol,
    )


def verify_init_frequencies(
    q: tuple[int, int] = (2, 4),
    length: int = 100_000,
    seed: int = 0,
    n_sigma: float = 3.0,
) -> list[VerificationReport]:
    """Initial-configuration frequencies against the exact products."""
    from .analysis import initial_pair_frequencies
    from .theory import probabilities

    params = ModelParams(length=length, q=q, seed=seed)
    rng = replicate_rng(seed, 0)
    state = init_state(params, rng)
    spins = derive_spins(state)
    p = probabilities(*q)
    freqs = initial_pair_frequencies(state)
    checks = [
        ("init-blockade-frequency", spins.blockade_count / length, float(p.p2)),
        ("init-pair-levels-1-2", freqs[(0, 1)], float(p.p11 * p.p12)),
        ("init-pair-levels-1-1", freqs[(0, 0)], float(p.p11 * p.p11)),
    ]
    out = []
    for name, est, target in checks:
        bound = _binomial_bound(target, length, n_sigma)
        out.append(
            VerificationReport(
                name=name,
                estimate=float(est),
                target=target,
                bound=bound,
                n=length,
                passed=abs(est - target) <= bound,
            )
        )
    return out


@dataclass
class InvariantTrace:
    """Violation counters filled in by the structural observers."""

    coupling: int = 0
    ancestors: int = 0
    monotone: int = 0
    parity: int = 0
    frozen_identity: int = 0
    checks: int = 0
    last_counts: np.ndarray | None = None
    parity0: np.ndarray | None = None


def run_with_invariant_checks(
    q: tuple[int, ...],
    length: int,
    max_events: int,
    seed: int,
    check_every_active: bool = True,
) -> tuple[InvariantTrace, "object"]:
    """Full-engine run that audits every exact invariant as it goes.

    After each active event: the incremental occupancy table must equal
    one derived from scratch; every cell must equal its ancestor's initial
    opinion; per-level walker counts must not increase; levels with two
    opinions must keep their walker-count parity; and for two features the
    frozen count is the blockade count at both levels by construction.
    """
    from .coupling import AncestorTable, update_ancestors

    params = ModelParams(length=length, q=q, seed=seed)
    rng = replicate_rng(seed, 0)
    state = init_state(params, rng)
    trace = InvariantTrace()
    spins0 = derive_spins(state)
    trace.last_counts = spins0.level_counts.copy()
    trace.parity0 = spins0.level_counts % 2
    two_levels = [i for i, qi in enumerate(params.q) if qi == 2]
    # shadow table driven by the observed events, audited on every update
    shadow = AncestorTable.identity(state)

    def audit(ev, st, sp):
        if not ev.active or not check_every_active:
            return
        trace.checks += 1
        fresh = derive_spins(st)
        if not (
            np.array_equal(sp.zeta, fresh.zeta)
            and np.array_equal(sp.xi, fresh.xi)
            and np.array_equal(sp.level_counts, fresh.level_counts)
            and sp.blockade_count == fresh.blockade_count
            and sp.live_edge_count == fresh.live_edge_count
        ):
            trace.coupling += 1
        update_ancestors(shadow, ev)
        if not ancestor_identity_ok(shadow, st):
            trace.ancestors += 1
        if np.any(sp.level_counts > trace.last_counts):
            trace.monotone += 1
        trace.last_counts = sp.level_counts.copy()
        for i in two_levels:
            if sp.level_counts[i] % 2 != trace.parity0[i]:
                trace.parity += 1
        if params.F == 2:
            frozen_1 = int(np.count_nonzero((sp.zeta[:, 0] == 1) & (sp.xi == 2)))
            frozen_2 = int(np.count_nonzero((sp.zeta[:, 1] == 1) & (sp.xi == 2)))
            if not (frozen_1 == frozen_2 == sp.blockade_count):
                trace.frozen_identity += 1

    cfg = RunConfig(max_events=max_events, stop_on_absorption=True, observers=[audit])
    summary = run(state, params, cfg, rng)
    if not ancestor_identity_ok(summary.ancestors, summary.state):
        trace.ancestors += 1
    check_coupling(summary.spins, summary.state)
    return trace, summary


def _zero_violation_report(name: str, violations: int, n: int, detail: str = "") -> VerificationReport:
    return VerificationReport(
        name=name,
        estimate=float(violations),
        target=0.0,
        bound=0.0,
        n=n,
        passed=violations == 0,
        detail=detail,
    )


def verify_coupling(
    q: tuple[int, ...] = (3, 3), length: int = 500, max_events: int = 20_000, seed: int = 0
) -> VerificationReport:
    """Exact equality of incremental and derived occupancy tables."""
    trace, _ = run_with_invariant_checks(q, length, max_events, seed)
    return _zero_violation_report("coupling-consistency", trace.coupling, trace.checks)


def verify_parity(
    q: tuple[int, ...] = (2, 5), length: int = 500, max_events: int = 50_000, seed: int = 0
) -> VerificationReport:
    """Walker-count parity at two-opinion levels never changes."""
    trace, _ = run_with_invariant_checks(q, length, max_events, seed)
    return _zero_violation_report("parity-invariant", trace.parity, trace.checks)


def verify_ancestors(
    q: tuple[int, ...] = (2, 4), length: int = 100, max_events: int = 20_000, seed: int = 0
) -> VerificationReport:
    """Each cell equals its ancestor's initial opinion, checked exhaustively.

    Uses an explicit event loop so the table can be audited after every
    single applied update on a ring small enough for full replay.
    """
    from .coupling import AncestorTable, update_ancestors, update_spins
    from .engine import apply_event, next_event

    params = ModelParams(length=length, q=q, seed=seed)
    rng = replicate_rng(seed, 0)
    state = init_state(params, rng)
    spins = derive_spins(state)
    ancestors = AncestorTable.identity(state)
    violations = 0
    checks = 0
    n_events = 0
    while n_events < max_events and not spins.is_absorbing():
        ev = next_event(state, params, rng)
        if ev.active:
            update_spins(spins, ev, state)
            update_ancestors(ancestors, ev)
            apply_event(state, ev)
            checks += 1
            if not ancestor_identity_ok(ancestors, state):
                violations += 1
        else:
            apply_event(state, ev)
            spins.time = ev.time
        n_events += 1
    return _zero_violation_report("ancestor-identity", violations, checks)
