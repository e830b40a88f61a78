"""Compiled event engine restricted to live-edge arrivals.

Arrivals at agreeing cells and at fully frozen edges can never change the
state, so for large sweeps we only sample the arrows that cross an
occupied pair of a live edge.  Each such pair receives candidate arrows at
rate one (half per direction); a candidate with ``j`` disagreements on its
edge is accepted with probability ``2 r(j) = (1/j)(1 - j/F)``.  The law of
the state trajectory, and of the accepted-event subsequence, is the same
as the full engine's; only the clock draws for guaranteed-inactive arrows
are skipped.  ``tests`` compare the two engines statistically on small
rings.

The kernel consumes pre-drawn blocks from a numpy generator so that all
randomness stays on the package's single stream discipline, and returns to
Python only to refill blocks or report a stop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .coupling import (
    ANNIHILATION,
    COALESCENCE,
    AncestorTable,
    BlockadeEntry,
    CollisionRecord,
    SpinConfig,
    WeightLedger,
    derive_spins,
)
from .errors import ConsistencyError, ParameterError
from .model import CultureState, ModelParams

# meta_i slots
_N_PAIRS = 0
_N_CAND = 1
_N_ACTIVE = 2
_STATUS = 3
_CURSOR = 4
_N_COLL = 5
_SNAP_CURSOR = 6
_MAX_EVENTS = 7
_N_BLOCKADES = 8
# meta_f slots
_TIME = 0
_T_ABS = 1
_T_MAX = 2

STATUS_REFILL = 0
STATUS_ABSORBED = 1
STATUS_T_MAX = 2
STATUS_MAX_EVENTS = 3


@numba.njit(cache=True, nogil=True)
def _advance(op, zeta, xi, level_counts,
             pair_e, pair_i, pair_slot,
             anc, disp, flips,
             init_blockade, bhits, bbroke, bt_break,
             col_t, col_e, col_i, col_ann, col_xib,
             cand_by_xi, act_by_xi,
             snap_times, snap_level, snap_blockades, snap_pairs,
             exps, us, meta_i, meta_f):
    L, F = op.shape
    n_pairs = meta_i[_N_PAIRS]
    n_blockades = meta_i[_N_BLOCKADES]
    cursor = meta_i[_CURSOR]
    snap_cur = meta_i[_SNAP_CURSOR]
    time = meta_f[_TIME]
    t_max = meta_f[_T_MAX]
    max_events = meta_i[_MAX_EVENTS]
    B = exps.shape[0]
    S = snap_times.shape[0]
    status = STATUS_REFILL

    while True:
        if n_pairs == 0:
            while snap_cur < S and (t_max < 0.0 or snap_times[snap_cur] <= t_max):
                for lev in range(F):
                    snap_level[snap_cur, lev] = level_counts[lev]
                snap_blockades[snap_cur] = n_blockades
                snap_pairs[snap_cur] = n_pairs
                snap_cur += 1
            meta_f[_T_ABS] = time
            status = STATUS_ABSORBED
            break
        if max_events >= 0 and meta_i[_N_CAND] >= max_events:
            status = STATUS_MAX_EVENTS
            break
        if cursor >= B:
            status = STATUS_REFILL
            break

        t_new = time + exps[cursor] / n_pairs
        if t_max >= 0.0 and t_new > t_max:
            while snap_cur < S and snap_times[snap_cur] <= t_max:
                for lev in range(F):
                    snap_level[snap_cur, lev] = level_counts[lev]
                snap_blockades[snap_cur] = n_blockades
                snap_pairs[snap_cur] = n_pairs
                snap_cur += 1
            time = t_max
            status = STATUS_T_MAX
            break
        while snap_cur < S and snap_times[snap_cur] < t_new:
            for lev in range(F):
                snap_level[snap_cur, lev] = level_counts[lev]
            snap_blockades[snap_cur] = n_blockades
            snap_pairs[snap_cur] = n_pairs
            snap_cur += 1
        time = t_new

        slot = int(us[0, cursor] * n_pairs)
        if slot >= n_pairs:
            slot = n_pairs - 1
        e = pair_e[slot]
        i = pair_i[slot]
        j = xi[e]
        meta_i[_N_CAND] += 1
        cand_by_xi[j] += 1
        d = 1 if us[1, cursor] >= 0.5 else -1
        u = us[2, cursor]
        cursor += 1

        if u > (1.0 / j) * (1.0 - j / F):
            continue

        # active: the walker at (e, i) hops one edge in direction d
        meta_i[_N_ACTIVE] += 1
        act_by_xi[j] += 1
        if d == 1:
            x = e + 1 if e + 1 < L else 0
            y = e
            ea = x
            o = x + 1 if x + 1 < L else 0
        else:
            x = e
            y = e + 1 if e + 1 < L else 0
            ea = e - 1 if e >= 1 else L - 1
            o = ea
        vy = op[y, i]
        anc[x, i] = anc[y, i]
        disp[x, i] = disp[y, i] - d
        flips[x, i] += 1

        # crossed pair empties; drop it from the registry
        zeta[e, i] = 0
        xi[e] -= 1
        level_counts[i] -= 1
        s = pair_slot[e, i]
        last = n_pairs - 1
        if s != last:
            le = pair_e[last]
            li = pair_i[last]
            pair_e[s] = le
            pair_i[s] = li
            pair_slot[le, li] = s
        pair_slot[e, i] = -1
        n_pairs = last

        if zeta[ea, i] == 0:
            # jump onto an empty pair
            xia = xi[ea]
            zeta[ea, i] = 1
            xi[ea] += 1
            level_counts[i] += 1
            if xia + 1 == F:
                # edge froze: deregister its other occupied pairs
                for lev in range(F):
                    if lev != i and zeta[ea, lev] == 1:
                        s = pair_slot[ea, lev]
                        last = n_pairs - 1
                        if s != last:
                            le = pair_e[last]
                            li = pair_i[last]
                            pair_e[s] = le
                            pair_i[s] = li
                            pair_slot[le, li] = s
                        pair_slot[ea, lev] = -1
                        n_pairs = last
                n_blockades += 1
            else:
                pair_e[n_pairs] = ea
                pair_i[n_pairs] = i
                pair_slot[ea, i] = n_pairs
                n_pairs += 1
        else:
            # collision with the occupant of (ea, i)
            xia = xi[ea]
            annih = op[o, i] == vy
            nc = meta_i[_N_COLL]
            col_t[nc] = time
            col_e[nc] = ea
            col_i[nc] = i
            col_ann[nc] = 1 if annih else 0
            col_xib[nc] = xia
            meta_i[_N_COLL] = nc + 1
            if init_blockade[ea] == 1 and bbroke[ea] == 0:
                bhits[ea] += 1
                if annih:
                    bbroke[ea] = 1
                    bt_break[ea] = time
            if annih:
                zeta[ea, i] = 0
                xi[ea] -= 1
                level_counts[i] -= 1
                if xia == F:
                    n_blockades -= 1
                    # thawed: register the remaining occupied pairs
                    for lev in range(F):
                        if zeta[ea, lev] == 1:
                            pair_e[n_pairs] = ea
                            pair_i[n_pairs] = lev
                            pair_slot[ea, lev] = n_pairs
                            n_pairs += 1
                else:
                    s = pair_slot[ea, i]
                    last = n_pairs - 1
                    if s != last:
                        le = pair_e[last]
                        li = pair_i[last]
                        pair_e[s] = le
                        pair_i[s] = li
                        pair_slot[le, li] = s
                    pair_slot[ea, i] = -1
                    n_pairs = last
            # coalescence leaves the table unchanged
        op[x, i] = vy

    meta_i[_N_PAIRS] = n_pairs
    meta_i[_N_BLOCKADES] = n_blockades
    meta_i[_CURSOR] = cursor
    meta_i[_SNAP_CURSOR] = snap_cur
    meta_i[_STATUS] = status
    meta_f[_TIME] = time


@dataclass
class LiveRunSummary:
    """Outcome of a live-edge run."""

    n_candidates: int
    n_active: int
    time: float
    absorbed: bool
    t_abs: float | None
    stopped_on: str
    state: CultureState
    spins: SpinConfig
    ancestors: AncestorTable
    flips: np.ndarray
    collisions: list[CollisionRecord]
    candidates_by_xi: np.ndarray
    active_by_xi: np.ndarray
    snapshot_times: np.ndarray
    snapshot_level_counts: np.ndarray  # (n_snapshots, F)
    snapshot_blockades: np.ndarray
    snapshot_live_pairs: np.ndarray
    blockade_ledger: WeightLedger


def run_live(
    state: CultureState,
    params: ModelParams,
    rng: np.random.Generator,
    *,
    t_max: float | None = None,
    max_events: int | None = None,
    stop_on_absorption: bool = True,
    snapshot_times=(),
    collect_collisions: bool = True,
    copy_state: bool = True,
    block_size: int = 1 << 16,
) -> LiveRunSummary:
    """Run the compiled live-edge engine.

    ``max_events`` caps candidate arrivals (arrows across live-edge
    occupied pairs).  Absorption always ends the event loop because no
    further candidate exists; with ``stop_on_absorption=False`` and a
    ``t_max``, the clock is simply reported at ``t_max``.  Deterministic
    for a given generator state.
    """
    if t_max is None and max_events is None and not stop_on_absorption:
        raise ParameterError("need at least one stopping rule")
    if state.opinions.shape != (params.length, params.F):
        raise ParameterError("state shape does not match params")
    work = state.copy() if copy_state else state
    op = np.ascontiguousarray(work.opinions, dtype=np.int64)
    work.opinions = op
    L, F = params.length, params.F

    spins0 = derive_spins(work)
    zeta = spins0.zeta.copy()
    xi = spins0.xi.copy()
    level_counts = spins0.level_counts.copy()

    pair_e = np.zeros(L * F, dtype=np.int64)
    pair_i = np.zeros(L * F, dtype=np.int64)
    pair_slot = np.full((L, F), -1, dtype=np.int64)
    live = (xi > 0) & (xi < F)
    ee, ii = np.nonzero(zeta.astype(bool) & live[:, None])
    n_pairs = ee.size
    pair_e[:n_pairs] = ee
    pair_i[:n_pairs] = ii
    pair_slot[ee, ii] = np.arange(n_pairs)

    anc = np.tile(np.arange(L, dtype=np.int64)[:, None], (1, F))
    disp = np.zeros((L, F), dtype=np.int64)
    origin = op.copy()
    flips = np.zeros((L, F), dtype=np.int64)

    init_blockade = (xi == F).astype(np.uint8)
    bhits = np.zeros(L, dtype=np.int64)
    bbroke = np.zeros(L, dtype=np.uint8)
    bt_break = np.full(L, np.nan)

    cap = int(xi.sum()) + 1
    col_t = np.empty(cap)
    col_e = np.empty(cap, dtype=np.int64)
    col_i = np.empty(cap, dtype=np.int64)
    col_ann = np.empty(cap, dtype=np.uint8)
    col_xib = np.empty(cap, dtype=np.int64)

    cand_by_xi = np.zeros(F + 1, dtype=np.int64)
    act_by_xi = np.zeros(F + 1, dtype=np.int64)

    snap_times = np.asarray(sorted(float(t) for t in snapshot_times))
    S = snap_times.size
    snap_level = np.zeros((S, F), dtype=np.int64)
    snap_blockades = np.zeros(S, dtype=np.int64)
    snap_pairs = np.zeros(S, dtype=np.int64)

    meta_i = np.zeros(9, dtype=np.int64)
    meta_f = np.zeros(3)
    meta_i[_N_PAIRS] = n_pairs
    meta_i[_N_BLOCKADES] = spins0.blockade_count
    meta_i[_MAX_EVENTS] = -1 if max_events is None else int(max_events)
    meta_f[_TIME] = work.time
    meta_f[_T_ABS] = -1.0
    meta_f[_T_MAX] = -1.0 if t_max is None else float(t_max)

    while True:
        exps = rng.standard_exponential(block_size)
        us = rng.random((3, block_size))
        meta_i[_CURSOR] = 0
        _advance(op, zeta, xi, level_counts,
                 pair_e, pair_i, pair_slot,
                 anc, disp, flips,
                 init_blockade, bhits, bbroke, bt_break,
                 col_t, col_e, col_i, col_ann, col_xib,
                 cand_by_xi, act_by_xi,
                 snap_times, snap_level, snap_blockades, snap_pairs,
                 exps, us, meta_i, meta_f)
        if meta_i[_STATUS] != STATUS_REFILL:
            break

    status = int(meta_i[_STATUS])
    absorbed = status == STATUS_ABSORBED

    # the candidate registry must exactly cover the live occupied pairs;
    # a silent mismatch would bias the law without corrupting the tables
    live_now = (xi > 0) & (xi < F)
    expected = zeta.astype(bool) & live_now[:, None]
    n_pairs_now = int(meta_i[_N_PAIRS])
    if n_pairs_now != int(expected.sum()) or not np.array_equal(
        pair_slot >= 0, expected
    ):
        raise ConsistencyError("live-pair registry diverged from occupancy tables")

    work.time = float(meta_f[_TIME])
    if absorbed and not stop_on_absorption and t_max is not None:
        work.time = float(t_max)
        stopped_on = "t_max"
    else:
        stopped_on = {
            STATUS_ABSORBED: "absorbed",
            STATUS_T_MAX: "t_max",
            STATUS_MAX_EVENTS: "max_events",
        }[status]

    spins = SpinConfig(
        zeta=zeta,
        xi=xi,
        time=work.time,
        level_counts=level_counts,
        blockade_count=int(meta_i[_N_BLOCKADES]),
        live_edge_count=int(np.count_nonzero((xi > 0) & (xi < F))),
    )
    ancestors = AncestorTable(anc=anc, disp=disp, origin_opinions=origin)

    n_coll = int(meta_i[_N_COLL])
    collisions: list[CollisionRecord] = []
    if collect_collisions:
        for k in range(n_coll):
            collisions.append(CollisionRecord(
                time=float(col_t[k]),
                edge=int(col_e[k]),
                level=int(col_i[k]),
                outcome=ANNIHILATION if col_ann[k] else COALESCENCE,
                xi_before_target=int(col_xib[k]),
            ))

    ledger = WeightLedger(F=F, initial_xi=spins0.xi.copy())
    for e in np.flatnonzero(init_blockade):
        e = int(e)
        broke = bool(bbroke[e])
        ledger.blockades[e] = BlockadeEntry(
            edge=e,
            hits=int(bhits[e]),
            broke=broke,
            t_break=float(bt_break[e]) if broke else None,
        )

    filled = int(meta_i[_SNAP_CURSOR])
    return LiveRunSummary(
        n_candidates=int(meta_i[_N_CAND]),
        n_active=int(meta_i[_N_ACTIVE]),
        time=work.time,
        absorbed=absorbed,
        t_abs=float(meta_f[_T_ABS]) if absorbed else None,
        stopped_on=stopped_on,
        state=work,
        spins=spins,
        ancestors=ancestors,
        flips=flips,
        collisions=collisions,
        candidates_by_xi=cand_by_xi,
        active_by_xi=act_by_xi,
        snapshot_times=snap_times[:filled],
        snapshot_level_counts=snap_level[:filled],
        snapshot_blockades=snap_blockades[:filled],
        snapshot_live_pairs=snap_pairs[:filled],
        blockade_ledger=ledger,
    )
