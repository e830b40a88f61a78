"""Densities, absorption, regime experiments, and window statistics.

Everything here is a pure function of simulation snapshots or of the
initial configuration.  Spatial averages over the ring stand in for
probabilities: the initial distribution and the dynamics are translation
invariant, so the fraction of edges in a given configuration estimates the
per-edge probability.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import fast
from .coupling import SpinConfig, derive_spins
from .errors import ParameterError, UnsupportedConfigurationError
from .model import CultureState, ModelParams, init_state, replicate_key, replicate_rng
from .theory import predict_regime

THREADS_ENV = "AXELROD_LAB_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit argument, else env cap, else a small default."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def geometric_times(t_max: float, ratio: float = 2.0, first: float = 1.0) -> list[float]:
    """Snapshot grid ``first, first*ratio, ...`` capped at ``t_max``."""
    if t_max <= 0 or ratio <= 1.0 or first <= 0:
        raise ParameterError("need t_max > 0, ratio > 1, first > 0")
    out = []
    t = first
    while t <= t_max:
        out.append(t)
        t *= ratio
    if not out or out[-1] < t_max:
        out.append(float(t_max))
    return out


@dataclass(frozen=True)
class DensitySnapshot:
    """Edge-occupancy densities at one instant (two features).

    Counts are exact integers; densities are the exact ratios.  By
    construction ``ubar_i = u_active_i + blockade_density`` for both
    levels: an edge occupied at level ``i`` either has its other level
    occupied too (a blockade) or not (an active walker).
    """

    time: float
    n_edges: int
    level_counts: tuple[int, int]
    blockade_count: int

    @property
    def ubar(self) -> tuple[float, float]:
        return (self.level_counts[0] / self.n_edges, self.level_counts[1] / self.n_edges)

    @property
    def u_active(self) -> tuple[float, float]:
        return (
            (self.level_counts[0] - self.blockade_count) / self.n_edges,
            (self.level_counts[1] - self.blockade_count) / self.n_edges,
        )

    @property
    def blockade_density(self) -> float:
        return self.blockade_count / self.n_edges


def density_estimates(spins: SpinConfig) -> DensitySnapshot:
    """Spatial densities of the current occupancy table."""
    if spins.F != 2:
        raise UnsupportedConfigurationError(
            f"per-level density split is defined for two features, got F={spins.F}"
        )
    return DensitySnapshot(
        time=spins.time,
        n_edges=spins.L,
        level_counts=(int(spins.level_counts[0]), int(spins.level_counts[1])),
        blockade_count=spins.blockade_count,
    )


def snapshots_from_live(summary: fast.LiveRunSummary) -> list[DensitySnapshot]:
    """Convert a live run's recorded snapshot counters."""
    if summary.snapshot_level_counts.shape[1] != 2:
        raise UnsupportedConfigurationError("snapshot conversion requires F=2")
    L = summary.state.L
    return [
        DensitySnapshot(
            time=float(t),
            n_edges=L,
            level_counts=(int(lc[0]), int(lc[1])),
            blockade_count=int(b),
        )
        for t, lc, b in zip(
            summary.snapshot_times,
            summary.snapshot_level_counts,
            summary.snapshot_blockades,
        )
    ]


def absorption_detect(spins: SpinConfig) -> bool:
    """True when every edge is empty or fully frozen, so all rates vanish."""
    F = spins.F
    return bool(np.all((spins.xi == 0) | (spins.xi == F)))


class SnapshotCollector:
    """Full-engine observer recording densities on a fixed time grid.

    The state is piecewise constant, so a grid point falling strictly
    before the current event's time gets the counts seen just before that
    event.  Call :meth:`finish` with the final clock to flush grid points
    the run passed without another event.
    """

    def __init__(self, times, initial_spins: SpinConfig):
        if initial_spins.F != 2:
            raise UnsupportedConfigurationError("snapshot collection requires F=2")
        self.times = sorted(float(t) for t in times)
        self._idx = 0
        self._L = initial_spins.L
        self._prev = self._counts(initial_spins)
        self.snapshots: list[DensitySnapshot] = []

    @staticmethod
    def _counts(spins: SpinConfig):
        return (
            int(spins.level_counts[0]),
            int(spins.level_counts[1]),
            spins.blockade_count,
        )

    def _emit(self, t, counts):
        self.snapshots.append(
            DensitySnapshot(
                time=t,
                n_edges=self._L,
                level_counts=(counts[0], counts[1]),
                blockade_count=counts[2],
            )
        )

    def __call__(self, ev, state, spins) -> None:
        while self._idx < len(self.times) and self.times[self._idx] < ev.time:
            self._emit(self.times[self._idx], self._prev)
            self._idx += 1
        self._prev = self._counts(spins)

    def finish(self, t_end: float) -> list[DensitySnapshot]:
        while self._idx < len(self.times) and self.times[self._idx] <= t_end:
            self._emit(self.times[self._idx], self._prev)
            self._idx += 1
        return self.snapshots


@dataclass
class DensityOrderReport:
    """Per-checkpoint comparison of active-walker densities."""

    times: list[float]
    mean_diff: list[float]  # larger-q level minus smaller-q level
    sigma: list[float]  # standard error of the mean over replicates
    n_replicates: int
    n_sigma: float
    ok: bool


def check_density_order(
    snapshot_sets: list[list[DensitySnapshot]],
    q1: int,
    q2: int,
    n_sigma: float = 3.0,
) -> DensityOrderReport:
    """Check that the level with more opinions keeps more active walkers.

    ``snapshot_sets`` holds one snapshot list per replicate, all on the
    same time grid, with level 1 the larger-``q`` level (``q1 > q2`` is
    required; orient levels before calling).  Passing means the mean
    difference stays above ``-n_sigma`` standard errors at every time.
    """
    if q1 <= q2:
        raise ParameterError(f"need q1 > q2 (larger-opinion level first), got ({q1}, {q2})")
    if not snapshot_sets or not snapshot_sets[0]:
        raise ParameterError("need at least one replicate with snapshots")
    times = [s.time for s in snapshot_sets[0]]
    for snaps in snapshot_sets:
        if [s.time for s in snaps] != times:
            raise ParameterError("replicates must share the snapshot time grid")
    diffs = np.array(
        [[s.u_active[0] - s.u_active[1] for s in snaps] for snaps in snapshot_sets]
    )
    n = diffs.shape[0]
    mean = diffs.mean(axis=0)
    sd = diffs.std(axis=0, ddof=1) if n > 1 else np.zeros(diffs.shape[1])
    sem = sd / np.sqrt(n)
    ok = bool(np.all(mean >= -n_sigma * sem))
    return DensityOrderReport(
        times=list(map(float, times)),
        mean_diff=[float(v) for v in mean],
        sigma=[float(v) for v in sem],
        n_replicates=n,
        n_sigma=n_sigma,
        ok=ok,
    )


def window_weight_statistic(
    spins: SpinConfig,
    params: ModelParams,
    window: tuple[int, int],
    rng: np.random.Generator,
) -> float:
    """Window average of initial edge weights with synthetic hit counts.

    For every fully occupied edge in the window draw independent geometric
    variables ``Y_i`` (success ``1/(q_i - 1)``) and weigh the edge
    ``(Y_1 + Y_2)/2 - 1``; every singly occupied edge weighs ``-1``.
    Returns the average over the window, which concentrates on the
    first-order fixation margin as the window grows.
    """
    if params.F != 2:
        raise UnsupportedConfigurationError("window weight statistic requires F=2")
    start, length = window
    if length < 1:
        raise ParameterError(f"window must contain at least one edge, got {length}")
    if length > spins.L:
        raise ParameterError(f"window of {length} edges exceeds ring of {spins.L}")
    idx = (int(start) + np.arange(int(length))) % spins.L
    xi_w = spins.xi[idx]
    n_blockades = int(np.count_nonzero(xi_w == 2))
    n_single = int(np.count_nonzero(xi_w == 1))
    q1, q2 = params.q
    y1 = rng.geometric(1.0 / (q1 - 1), size=n_blockades)
    y2 = rng.geometric(1.0 / (q2 - 1), size=n_blockades)
    blockade_sum = float(np.sum(0.5 * (y1 + y2) - 1.0))
    return (blockade_sum - n_single) / length


def initial_pair_frequencies(state: CultureState) -> dict[tuple[int, int], float]:
    """Frequencies of adjacent single-walker edge pairs at time zero.

    Key ``(i, j)`` (0-based levels) counts edges ``e`` where both ``e``
    and ``e + 1`` carry exactly one walker, at level ``i`` on ``e`` and
    level ``j`` on ``e + 1``.
    """
    if state.F != 2:
        raise UnsupportedConfigurationError("pair frequencies are defined for F=2")
    spins = derive_spins(state)
    one = spins.xi == 1
    one_next = np.roll(one, -1)
    out: dict[tuple[int, int], float] = {}
    for i in range(2):
        zi = spins.zeta[:, i] == 1
        for j in range(2):
            zj_next = np.roll(spins.zeta[:, j] == 1, -1)
            mask = one & one_next & zi & zj_next
            out[(i, j)] = float(np.count_nonzero(mask) / state.L)
    return out


@dataclass
class RegimeRow:
    """One replicate of one parameter pair."""

    q1: int
    q2: int
    replicate: int
    stream_key: int
    absorbed: bool
    t_abs: float | None
    surviving_blockade_density: float
    mean_flips_per_cell: float


@dataclass
class RegimeAggregate:
    q1: int
    q2: int
    n: int
    n_absorbed: int
    mean_density: float
    ci95: float  # half-width, normal approximation
    mean_t_abs: float | None
    predicted_regime: str


@dataclass
class RegimeReport:
    rows: list[RegimeRow]
    aggregates: list[RegimeAggregate]

    def aggregate_for(self, q1: int, q2: int) -> RegimeAggregate:
        for agg in self.aggregates:
            if (agg.q1, agg.q2) == (q1, q2):
                return agg
        raise KeyError((q1, q2))


def _one_regime_run(pair_idx, rep, q1, q2, length, t_max, seed):
    params = ModelParams(length=length, q=(q1, q2), seed=seed)
    rng = replicate_rng(seed, pair_idx, rep)
    state = init_state(params, rng)
    res = fast.run_live(
        state,
        params,
        rng,
        t_max=t_max,
        stop_on_absorption=True,
        collect_collisions=False,
        copy_state=False,
    )
    return RegimeRow(
        q1=q1,
        q2=q2,
        replicate=rep,
        stream_key=replicate_key(seed, pair_idx, rep),
        absorbed=res.absorbed,
        t_abs=res.t_abs,
        surviving_blockade_density=res.spins.blockade_count / length,
        mean_flips_per_cell=float(res.flips.mean()),
    )


def regime_experiment(
    pairs: list[tuple[int, int]],
    length: int,
    replicates: int,
    t_max: float,
    seed: int,
    threads: int | None = None,
) -> RegimeReport:
    """Run replicates to absorption (or ``t_max``) for each opinion pair.

    Replicates run on independent substreams and in parallel; rows come
    back in deterministic (pair, replicate) order regardless of
    scheduling.
    """
    if not pairs:
        raise ParameterError("empty parameter grid")
    for q1, q2 in pairs:
        if q1 < 2 or q2 < 2:
            raise ParameterError(f"opinion counts must be >= 2, got ({q1}, {q2})")
    jobs = [
        (pi, rep, q1, q2)
        for pi, (q1, q2) in enumerate(pairs)
        for rep in range(replicates)
    ]
    workers = resolve_threads(threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(
                pool.map(
                    lambda j: _one_regime_run(j[0], j[1], j[2], j[3], length, t_max, seed),
                    jobs,
                )
            )
    else:
        rows = [_one_regime_run(pi, rep, q1, q2, length, t_max, seed) for pi, rep, q1, q2 in jobs]

    aggregates = []
    for pi, (q1, q2) in enumerate(pairs):
        sub = [r for r in rows if (r.q1, r.q2) == (q1, q2)]
        dens = np.array([r.surviving_blockade_density for r in sub])
        n = len(sub)
        sd = dens.std(ddof=1) if n > 1 else 0.0
        t_abs = [r.t_abs for r in sub if r.absorbed]
        aggregates.append(
            RegimeAggregate(
                q1=q1,
                q2=q2,
                n=n,
                n_absorbed=sum(r.absorbed for r in sub),
                mean_density=float(dens.mean()),
                ci95=float(1.96 * sd / np.sqrt(n)) if n > 1 else 0.0,
                mean_t_abs=float(np.mean(t_abs)) if t_abs else None,
                predicted_regime=predict_regime(q1, q2).value,
            )
        )
    return RegimeReport(rows=rows, aggregates=aggregates)
