"""Continuous-time event engine.

Every (site, feature) cell carries a rate-one clock.  Instead of keeping
``L * F`` explicit clocks, the engine samples the superposition: waiting
times are exponential with total rate ``L * F`` and the firing cell is
uniform, which is the same law.  Each firing draws a direction (which
neighbour is the source) and a uniform threshold; the arrow is active
exactly when the two sites disagree at the chosen feature and the uniform
falls below twice the interaction rate at their current disagreement
count.  Inactive arrivals still advance the clock and are delivered to
observers, since rejected draws are what the acceptance-rate checks
condition on.

The engine keeps the walker table and ancestor table in lock-step with the
opinions; a run therefore yields collision records and absorption
detection for free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coupling import (
    AncestorTable,
    CollisionRecord,
    SpinConfig,
    derive_spins,
    update_ancestors,
    update_spins,
)
from .errors import ConsistencyError, ParameterError
from .model import CultureState, ModelParams, hamming, interaction_rate

Observer = Callable[["EventRecord", CultureState, SpinConfig], None]


@dataclass(slots=True)
class EventRecord:
    """One potential interaction: the arrow onto ``x`` from ``y = x + direction``."""

    time: float
    x: int
    feature: int
    direction: int  # -1 or +1
    u: float
    y: int
    hamming_before: int
    disagree_before: bool
    active: bool


@dataclass
class RunConfig:
    """Stopping rules and per-event hooks for :func:`run`.

    At least one stopping rule must be set.  Observers are called as
    ``obs(event, state, spins)`` after every event is applied, active or
    not; filter on ``event.active`` to see updates only.
    """

    t_max: float | None = None
    max_events: int | None = None
    stop_on_absorption: bool = True
    observers: list[Observer] = field(default_factory=list)

    def __post_init__(self):
        if self.t_max is None and self.max_events is None and not self.stop_on_absorption:
            raise ParameterError("need at least one stopping rule")
        if self.t_max is not None and self.t_max <= 0:
            raise ParameterError(f"t_max must be positive, got {self.t_max}")
        if self.max_events is not None and self.max_events <= 0:
            raise ParameterError(f"max_events must be positive, got {self.max_events}")


@dataclass
class RunSummary:
    """Counts and final coupled state of one trajectory."""

    n_events: int
    n_active: int
    time: float
    absorbed: bool
    stopped_on: str  # "absorbed" | "t_max" | "max_events"
    state: CultureState
    spins: SpinConfig
    ancestors: AncestorTable
    flips: np.ndarray  # (L, F) applied updates per cell
    collisions: list[CollisionRecord]
    candidates_by_xi: np.ndarray  # (F + 1,) arrivals with disagreement at the chosen feature
    active_by_xi: np.ndarray


def next_event(
    state: CultureState, params: ModelParams, rng: np.random.Generator
) -> EventRecord:
    """Sample the next arrival and decide whether it is active.

    Draw order is fixed (gap, site, feature, direction, uniform) so a
    given generator state always yields the same event.
    """
    L, F = params.length, params.F
    gap = rng.exponential(1.0 / (L * F))
    x = int(rng.integers(L))
    i = int(rng.integers(F))
    direction = -1 if rng.integers(2) == 0 else 1
    u = float(rng.random())
    y = (x + direction) % L
    h = hamming(state, x, y)
    disagree = bool(state.opinions[x, i] != state.opinions[y, i])
    active = disagree and u <= 2.0 * interaction_rate(h, F)
    return EventRecord(
        time=state.time + gap,
        x=x,
        feature=i,
        direction=direction,
        u=u,
        y=y,
        hamming_before=h,
        disagree_before=disagree,
        active=active,
    )


def apply_event(state: CultureState, ev: EventRecord) -> CultureState:
    """Advance the clock and, for active events, copy the source opinion.

    Raises if the state has been mutated since the event was generated.
    """
    if ev.time <= state.time:
        raise ConsistencyError(
            f"event at t={ev.time} does not advance the clock from t={state.time}"
        )
    h = hamming(state, ev.x, ev.y)
    disagree = bool(state.opinions[ev.x, ev.feature] != state.opinions[ev.y, ev.feature])
    if h != ev.hamming_before or disagree != ev.disagree_before:
        raise ConsistencyError("stale event: state changed since the event was generated")
    if ev.active:
        state.opinions[ev.x, ev.feature] = state.opinions[ev.y, ev.feature]
    state.time = ev.time
    return state


def run(
    state: CultureState,
    params: ModelParams,
    cfg: RunConfig,
    rng: np.random.Generator,
) -> RunSummary:
    """Drive the state until a stopping rule fires.

    The state is advanced in place.  Bit-reproducible for a given
    generator state and configuration.
    """
    spins = derive_spins(state)
    ancestors = AncestorTable.identity(state)
    F = params.F
    flips = np.zeros((params.length, F), dtype=np.int64)
    collisions: list[CollisionRecord] = []
    candidates_by_xi = np.zeros(F + 1, dtype=np.int64)
    active_by_xi = np.zeros(F + 1, dtype=np.int64)
    n_events = 0
    n_active = 0
    stopped_on = None

    def notify(ev):
        for obs in cfg.observers:
            try:
                obs(ev, state, spins)
            except Exception as exc:
                raise RuntimeError(
                    f"observer {obs!r} failed at t={ev.time:.6g}"
                ) from exc

    if cfg.stop_on_absorption and spins.is_absorbing():
        stopped_on = "absorbed"

    while stopped_on is None:
        ev = next_event(state, params, rng)
        if cfg.t_max is not None and ev.time > cfg.t_max:
            state.time = cfg.t_max
            spins.time = cfg.t_max
            stopped_on = "t_max"
            break
        if ev.active:
            rec = update_spins(spins, ev, state)
            if rec is not None:
                collisions.append(rec)
            update_ancestors(ancestors, ev)
            apply_event(state, ev)
            flips[ev.x, ev.feature] += 1
            n_active += 1
        else:
            apply_event(state, ev)
            spins.time = ev.time
        n_events += 1
        if ev.disagree_before:
            candidates_by_xi[ev.hamming_before] += 1
            if ev.active:
                active_by_xi[ev.hamming_before] += 1
        notify(ev)
        if ev.active and cfg.stop_on_absorption and spins.is_absorbing():
            stopped_on = "absorbed"
        elif cfg.max_events is not None and n_events >= cfg.max_events:
            stopped_on = "max_events"

    return RunSummary(
        n_events=n_events,
        n_active=n_active,
        time=state.time,
        absorbed=spins.is_absorbing(),
        stopped_on=stopped_on,
        state=state,
        spins=spins,
        ancestors=ancestors,
        flips=flips,
        collisions=collisions,
        candidates_by_xi=candidates_by_xi,
        active_by_xi=active_by_xi,
    )
