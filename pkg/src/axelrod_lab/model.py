"""Model state, parameters, interaction rates, and seeding.

Sites live on a periodic ring of length ``L``.  Each site carries a culture:
a vector of ``F`` opinions, one per cultural feature, where feature ``i``
takes values in ``{1, ..., q[i]}``.  Edge ``k`` joins sites ``k`` and
``k + 1 (mod L)``.

All randomness flows through a single seedable stream
(:func:`make_rng`); replicate substreams are derived from
``(seed, replicate_index)`` so replicates are independent and individually
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

PERIODIC_RING = "periodic-ring"


@dataclass(frozen=True)
class ModelParams:
    """Immutable run parameters.

    ``q`` has one entry per feature, each at least 2; the number of
    features is ``len(q)``.  Only periodic-ring boundaries are supported.
    """

    length: int
    q: tuple[int, ...]
    seed: int = 0
    boundary: str = PERIODIC_RING

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(int(v) for v in self.q))
        if self.boundary != PERIODIC_RING:
            raise ParameterError(f"unsupported boundary {self.boundary!r}")
        if self.length < 3:
            raise ParameterError(f"ring length must be >= 3, got {self.length}")
        if len(self.q) < 1:
            raise ParameterError("need at least one feature")
        if any(v < 2 for v in self.q):
            raise ParameterError(f"every opinion count must be >= 2, got q={self.q}")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    @property
    def F(self) -> int:
        return len(self.q)

    @property
    def L(self) -> int:
        return self.length


@dataclass
class CultureState:
    """Opinion table plus simulation clock.

    ``opinions[x, i]`` is the opinion of site ``x`` for feature ``i``,
    an integer in ``1..q[i]``.  Exactly one entry changes per applied
    active event.
    """

    opinions: np.ndarray
    time: float = 0.0

    @property
    def L(self) -> int:
        return self.opinions.shape[0]

    @property
    def F(self) -> int:
        return self.opinions.shape[1]

    def copy(self) -> "CultureState":
        return CultureState(self.opinions.copy(), self.time)


def make_rng(seed: int) -> np.random.Generator:
    """Root PCG64 stream for a run."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed)))


def replicate_rng(seed: int, *indices: int) -> np.random.Generator:
    """Independent substream keyed by ``(seed, *indices)``.

    Typically one index (the replicate number); sweeps add a grid index in
    front so every (pair, replicate) cell gets its own stream.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(i) for i in indices))
    return np.random.default_rng(ss)


def replicate_key(seed: int, *indices: int) -> int:
    """64-bit identifier of a replicate substream, recorded in output rows."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, np.uint64)[0])


def init_state(params: ModelParams, rng: np.random.Generator) -> CultureState:
    """Sample the uniform product initial configuration.

    Each cell ``(x, i)`` is independent uniform on ``{1, ..., q[i]}``.
    Columns are drawn feature by feature in feature order, so the result
    is bit-identical for a given generator state.
    """
    op = np.empty((params.length, params.F), dtype=np.int64)
    for i, qi in enumerate(params.q):
        op[:, i] = rng.integers(1, qi + 1, size=params.length)
    return CultureState(op, 0.0)


def hamming(state: CultureState, x: int, y: int) -> int:
    """Number of features on which sites ``x`` and ``y`` disagree."""
    return int(np.count_nonzero(state.opinions[x] != state.opinions[y]))


def interaction_rate(j: int, F: int) -> float:
    """Rate at which one neighbour copies one given disagreeing feature
    from the other, given ``j`` disagreements out of ``F`` features.

    Zero at ``j = 0`` (nothing to copy) and at ``j = F`` (fully
    disagreeing neighbours never interact); ``(1/2)(1/j)(1 - j/F)``
    in between.  Nonincreasing on ``1..F`` and bounded by 1/2.
    """
    if not 0 <= j <= F:
        raise ParameterError(f"disagreement count {j} outside [0, {F}]")
    if j == 0:
        return 0.0
    return 0.5 * (1.0 / j) * (1.0 - j / F)
