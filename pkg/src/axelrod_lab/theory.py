"""Exact closed forms for the two-feature model.

Everything here is pure integer/rational arithmetic on the initial
distribution and the collision law of the disagreement walks; floats only
appear when rendering.  ``p0/p1/p2`` split edges by their initial number
of disagreements, ``p11/p12`` split the single-disagreement case by which
feature disagrees, and ``h1/h2`` are the fixation margins: averages of
edge weights under the initial distribution whose positivity certifies
that disagreement cannot propagate arbitrarily far.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .errors import ParameterError


class EdgeProbabilities(NamedTuple):
    p0: Fraction
    p1: Fraction
    p2: Fraction
    p11: Fraction
    p12: Fraction


def _check_q(*qs: int) -> None:
    for q in qs:
        if q < 2:
            raise ParameterError(f"opinion count must be >= 2, got {q}")


def probabilities(q1: int, q2: int) -> EdgeProbabilities:
    """Initial per-edge configuration probabilities.

    ``p0``: both features agree; ``p1``: exactly one disagrees
    (``p11`` feature 1 only, ``p12`` feature 2 only); ``p2``: both
    disagree.  Exact rationals; ``p0 + p1 + p2 = 1`` and
    ``p1 = p11 + p12`` hold identically.
    """
    _check_q(q1, q2)
    a1 = Fraction(1, q1)  # chance a given edge agrees on feature 1
    a2 = Fraction(1, q2)
    p0 = a1 * a2
    p11 = a2 * (1 - a1)
    p12 = a1 * (1 - a2)
    p2 = (1 - a1) * (1 - a2)
    return EdgeProbabilities(p0, p11 + p12, p2, p11, p12)


def geometric_tail(q_i: int, n: int) -> Fraction:
    """P(more than ``n`` collisions before a pair annihilates) at a
    feature with ``q_i`` opinions: ``((q_i - 2)/(q_i - 1))**n``.

    Each collision of two walkers at that feature independently
    annihilates with probability ``1/(q_i - 1)``, so the count of
    collisions up to and including the annihilating one is geometric.
    At ``q_i = 2`` the first collision always annihilates.
    """
    _check_q(q_i)
    if n < 0:
        raise ParameterError(f"collision count must be >= 0, got {n}")
    return Fraction(q_i - 2, q_i - 1) ** n


def geometric_mean(q_i: int) -> Fraction:
    """Expected number of collisions before annihilation: ``q_i - 1``."""
    _check_q(q_i)
    return Fraction(q_i - 1)


def h1(q1: int, q2: int) -> Fraction:
    """First-order fixation margin ``(1/2)(q1 + q2 - 4) p2 - p1``.

    Balances frozen-pair weights (each initial double-disagreement edge
    survives a geometric number of hits) against the supply of single
    walkers.  Positive means walkers run out before the frozen pairs do.
    """
    p = probabilities(q1, q2)
    return Fraction(1, 2) * (q1 + q2 - 4) * p.p2 - p.p1


def h2(q1: int, q2: int) -> Fraction:
    """Refined fixation margin.

    Adds to :func:`h1` the weight recovered from walker-walker encounters:
    adjacent opposite-feature walkers that fuse into a frozen pair, and
    same-feature walkers that collide with each other instead of hitting a
    frozen pair.  Never smaller than ``h1``.
    """
    p = probabilities(q1, q2)
    correction = Fraction(1, 4) * (1 + Fraction(1, 8) * p.p0) * (
        (q1 + q2) * p.p11 * p.p12
        + Fraction(q1, q1 - 1) * p.p11**2
        + Fraction(q2, q2 - 1) * p.p12**2
    )
    return h1(q1, q2) + correction


def symmetric_fixation_condition(F: int, q: int) -> bool:
    """Exact evaluation of ``F/q < (1 - 1/q)**(F - 1)``.

    Sufficient condition for fixation when every feature offers the same
    ``q`` opinions.
    """
    if F < 1:
        raise ParameterError(f"feature count must be >= 1, got {F}")
    _check_q(q)
    return Fraction(F, q) < (1 - Fraction(1, q)) ** (F - 1)


class Regime(enum.Enum):
    FLUCTUATES = "fluctuates"
    OPEN = "open"
    FIXATES_WEAK = "fixates_weak"
    FIXATES_STRONG = "fixates_strong"


#: Where each prediction branch comes from (established results vs. the
#: margin computations in this module).
REGIME_SOURCE = {
    Regime.FLUCTUATES: "two-opinion fluctuation/clustering result",
    Regime.OPEN: "q1 + q2 = 5 not settled either way",
    Regime.FIXATES_STRONG: "refined margin h2 > 0 at q1 + q2 = 6",
    Regime.FIXATES_WEAK: "first-order margin h1 > 0 for q1 + q2 >= 7",
}


def predict_regime(q1: int, q2: int) -> Regime:
    """Long-run prediction for the two-feature model."""
    _check_q(q1, q2)
    s = q1 + q2
    if s == 4:
        return Regime.FLUCTUATES
    if s == 5:
        return Regime.OPEN
    if s == 6:
        return Regime.FIXATES_STRONG
    return Regime.FIXATES_WEAK


@dataclass(frozen=True)
class TheoryReport:
    """All closed forms for one ``(q1, q2)`` pair, exact."""

    q1: int
    q2: int
    p0: Fraction
    p1: Fraction
    p2: Fraction
    p11: Fraction
    p12: Fraction
    ey1: Fraction
    ey2: Fraction
    h1: Fraction
    h2: Fraction
    fixation_condition_holds: bool | None
    predicted_regime: Regime
    regime_source: str


def theory_report(q1: int, q2: int) -> TheoryReport:
    p = probabilities(q1, q2)
    regime = predict_regime(q1, q2)
    return TheoryReport(
        q1=q1,
        q2=q2,
        p0=p.p0,
        p1=p.p1,
        p2=p.p2,
        p11=p.p11,
        p12=p.p12,
        ey1=geometric_mean(q1),
        ey2=geometric_mean(q2),
        h1=h1(q1, q2),
        h2=h2(q1, q2),
        fixation_condition_holds=(
            symmetric_fixation_condition(2, q1) if q1 == q2 else None
        ),
        predicted_regime=regime,
        regime_source=REGIME_SOURCE[regime],
    )
