"""Disagreement walks coupled to the culture state.

For every edge ``e`` and feature ``i``, ``zeta[e, i]`` is 1 exactly when the
two endpoint opinions differ at that feature; ``xi[e]`` sums ``zeta`` over
features.  Driven by the same event stream as the opinions, the occupied
pairs behave like symmetric walkers on the ring: an active arrow across
edge ``e`` at feature ``i`` empties the pair ``(e, i)`` and either fills
the next pair over (a jump), or lands on an occupied pair (a collision)
that resolves to empty or occupied depending on whether the two outer
neighbours already agreed at that feature.

Edges with all ``F`` pairs occupied are blockades: their walkers cannot
move and only incoming collisions can change them.  The weight ledger
counts, for every edge that starts as a blockade, how many walkers hit it
before the first annihilation breaks it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ParameterError
from .model import CultureState

ANNIHILATION = "annihilation"
COALESCENCE = "coalescence"


class EdgeClass(enum.Enum):
    EMPTY = "empty"
    LIVE = "live"
    BLOCKADE = "blockade"


def classify_edge(xi_e: int, F: int) -> EdgeClass:
    """Empty (no walkers), live (some can move), or blockade (all frozen)."""
    if not 0 <= xi_e <= F:
        raise ParameterError(f"edge count {xi_e} outside [0, {F}]")
    if xi_e == 0:
        return EdgeClass.EMPTY
    if xi_e == F:
        return EdgeClass.BLOCKADE
    return EdgeClass.LIVE


@dataclass(slots=True)
class CollisionRecord:
    """A walker landing on an already occupied pair."""

    time: float
    edge: int
    level: int
    outcome: str  # ANNIHILATION or COALESCENCE
    xi_before_target: int


@dataclass
class SpinConfig:
    """Occupancy table plus running counts.

    ``level_counts[i]`` is the number of occupied pairs at feature ``i``;
    ``blockade_count`` the number of edges with ``xi == F``;
    ``live_edge_count`` the number with ``0 < xi < F``.  The counts are
    maintained incrementally by :func:`update_spins` and always equal the
    recomputed values.
    """

    zeta: np.ndarray  # (L, F) uint8
    xi: np.ndarray  # (L,) int64
    time: float
    level_counts: np.ndarray  # (F,) int64
    blockade_count: int
    live_edge_count: int

    @property
    def L(self) -> int:
        return self.zeta.shape[0]

    @property
    def F(self) -> int:
        return self.zeta.shape[1]

    def copy(self) -> "SpinConfig":
        return SpinConfig(
            self.zeta.copy(),
            self.xi.copy(),
            self.time,
            self.level_counts.copy(),
            self.blockade_count,
            self.live_edge_count,
        )

    def is_absorbing(self) -> bool:
        """No live edges: every rate is zero and nothing can ever move."""
        return self.live_edge_count == 0


def derive_spins(state: CultureState) -> SpinConfig:
    """Recompute the full occupancy table from the opinions."""
    op = state.opinions
    zeta = (op != np.roll(op, -1, axis=0)).astype(np.uint8)
    xi = zeta.sum(axis=1, dtype=np.int64)
    F = state.F
    return SpinConfig(
        zeta=zeta,
        xi=xi,
        time=state.time,
        level_counts=zeta.sum(axis=0, dtype=np.int64),
        blockade_count=int(np.count_nonzero(xi == F)),
        live_edge_count=int(np.count_nonzero((xi > 0) & (xi < F))),
    )


def event_edges(x: int, direction: int, L: int) -> tuple[int, int, int]:
    """Edges touched by an arrow onto target ``x`` from ``x + direction``.

    Returns ``(crossed, ahead, outer)``: the edge between source and
    target, the edge on the far side of the target, and the outer
    neighbour site across the ahead edge.
    """
    if direction == 1:
        return x % L, (x - 1) % L, (x - 1) % L
    return (x - 1) % L, x % L, (x + 1) % L


def update_spins(spins: SpinConfig, ev, state_before: CultureState) -> CollisionRecord | None:
    """Advance the occupancy table through one active event.

    ``state_before`` is the culture state the event was generated against,
    prior to applying the copy.  Returns the collision record when the
    moving walker lands on an occupied pair, else None.
    """
    if not ev.active:
        spins.time = ev.time
        return None
    L, F = spins.L, spins.F
    x, i = ev.x, ev.feature
    e_cross, e_ahead, outer = event_edges(x, ev.direction, L)
    if spins.zeta[e_cross, i] != 1:
        raise ConsistencyError(
            f"active event at t={ev.time} crosses edge {e_cross} with no walker at level {i}"
        )

    copied = state_before.opinions[ev.y, i]

    # the crossed pair always empties
    spins.zeta[e_cross, i] = 0
    spins.xi[e_cross] -= 1
    spins.level_counts[i] -= 1
    if spins.xi[e_cross] == 0:
        spins.live_edge_count -= 1

    record = None
    if spins.zeta[e_ahead, i] == 0:
        # jump: the pair ahead fills
        xia = int(spins.xi[e_ahead])
        spins.zeta[e_ahead, i] = 1
        spins.xi[e_ahead] += 1
        spins.level_counts[i] += 1
        if xia == 0:
            spins.live_edge_count += 1
        elif xia + 1 == F:
            spins.live_edge_count -= 1
            spins.blockade_count += 1
    else:
        xia = int(spins.xi[e_ahead])
        annihilated = state_before.opinions[outer, i] == copied
        if annihilated:
            spins.zeta[e_ahead, i] = 0
            spins.xi[e_ahead] -= 1
            spins.level_counts[i] -= 1
            if xia == F:
                spins.blockade_count -= 1
                if F > 1:
                    spins.live_edge_count += 1
            elif xia == 1:
                spins.live_edge_count -= 1
        record = CollisionRecord(
            time=ev.time,
            edge=e_ahead,
            level=i,
            outcome=ANNIHILATION if annihilated else COALESCENCE,
            xi_before_target=xia,
        )
    spins.time = ev.time
    return record


def check_coupling(spins: SpinConfig, state: CultureState) -> None:
    """Raise unless the incremental table equals one derived from scratch."""
    fresh = derive_spins(state)
    if not (
        np.array_equal(spins.zeta, fresh.zeta)
        and np.array_equal(spins.xi, fresh.xi)
        and np.array_equal(spins.level_counts, fresh.level_counts)
        and spins.blockade_count == fresh.blockade_count
        and spins.live_edge_count == fresh.live_edge_count
    ):
        raise ConsistencyError("incremental occupancy table diverged from derived table")


@dataclass
class AncestorTable:
    """Origin site of every current opinion.

    ``anc[x, i]`` is the site whose initial opinion the cell ``(x, i)``
    currently carries; ``disp`` is the signed displacement of that origin
    on the unrolled line, kept separately because site indices wrap.
    """

    anc: np.ndarray  # (L, F) int64
    disp: np.ndarray  # (L, F) int64
    origin_opinions: np.ndarray  # (L, F) snapshot when tracking started

    @classmethod
    def identity(cls, state: CultureState) -> "AncestorTable":
        L, F = state.L, state.F
        anc = np.tile(np.arange(L, dtype=np.int64)[:, None], (1, F))
        return cls(anc=anc, disp=np.zeros((L, F), dtype=np.int64),
                   origin_opinions=state.opinions.copy())


def update_ancestors(table: AncestorTable, ev) -> None:
    """Target inherits the source's origin; all other entries unchanged."""
    if not ev.active:
        return
    table.anc[ev.x, ev.feature] = table.anc[ev.y, ev.feature]
    table.disp[ev.x, ev.feature] = table.disp[ev.y, ev.feature] + ev.direction


def ancestor_identity_ok(table: AncestorTable, state: CultureState) -> bool:
    """Every cell must equal its origin's initial opinion, exactly."""
    for i in range(state.F):
        if not np.array_equal(
            state.opinions[:, i], table.origin_opinions[table.anc[:, i], i]
        ):
            return False
    return True


def ancestor_order_check(table: AncestorTable, max_disp: int | None = None) -> tuple[int, int]:
    """Count order violations among adjacent unrolled origins.

    Origins of neighbouring sites cannot cross on the line, so
    ``x + disp[x]`` should be nondecreasing around the ring (up to one
    wrap of ``L``).  Pairs where either displacement exceeds ``L/2`` are
    skipped: the unrolled position is ambiguous once a path may have
    wound around the ring.  Returns ``(pairs_checked, violations)``.
    """
    L, F = table.anc.shape
    bound = L // 2 if max_disp is None else max_disp
    checked = 0
    violations = 0
    pos = np.arange(L, dtype=np.int64)[:, None] + table.disp
    ok = np.abs(table.disp) <= bound
    for i in range(F):
        for x in range(L):
            xn = (x + 1) % L
            if not (ok[x, i] and ok[xn, i]):
                continue
            checked += 1
            lhs = pos[x, i]
            rhs = pos[xn, i] + (L if xn == 0 else 0)
            if lhs > rhs:
                violations += 1
    return checked, violations


@dataclass
class BlockadeEntry:
    """Hit history of one edge that started as a blockade."""

    edge: int
    hits: int = 0
    broke: bool = False
    t_break: float | None = None

    def weight(self, F: int) -> int | None:
        """Realized weight ``-(F - 1) + hits``; None while censored."""
        if not self.broke:
            return None
        return -(F - 1) + self.hits


@dataclass
class WeightLedger:
    """Initial edge classes and per-blockade hit counts.

    Initially live edges carry weight ``-ξ0``; blockades earn back one
    unit per incoming walker until the first annihilation frees them.
    Blockades still intact at the end of the run are censored: they get
    no realized weight and are reported separately.
    """

    F: int
    initial_xi: np.ndarray
    blockades: dict[int, BlockadeEntry] = field(default_factory=dict)

    def initial_class(self, e: int) -> EdgeClass:
        return classify_edge(int(self.initial_xi[e]), self.F)

    def active_weight(self, e: int) -> int:
        j = int(self.initial_xi[e])
        if j == self.F:
            raise ParameterError(f"edge {e} started as a blockade; use its entry")
        return -j

    def broken(self) -> list[BlockadeEntry]:
        return [b for b in self.blockades.values() if b.broke]

    def censored(self) -> list[BlockadeEntry]:
        return [b for b in self.blockades.values() if not b.broke]


def track_blockades(initial_spins: SpinConfig, collisions: list[CollisionRecord]) -> WeightLedger:
    """Fold a run's collision records into the blockade ledger.

    Only edges that are blockades at the start are tracked; while intact,
    every collision into such an edge is a hit, and the first annihilating
    hit breaks it.  Records must come in time order from a single run.
    """
    F = initial_spins.F
    ledger = WeightLedger(F=F, initial_xi=initial_spins.xi.copy())
    for e in np.flatnonzero(initial_spins.xi == F):
        ledger.blockades[int(e)] = BlockadeEntry(edge=int(e))
    for rec in collisions:
        entry = ledger.blockades.get(rec.edge)
        if entry is None or entry.broke:
            continue
        if rec.xi_before_target != F:
            raise ConsistencyError(
                f"collision at edge {rec.edge} saw {rec.xi_before_target} walkers "
                f"on an unbroken initial blockade"
            )
        entry.hits += 1
        if rec.outcome == ANNIHILATION:
            entry.broke = True
            entry.t_break = rec.time
    return ledger
