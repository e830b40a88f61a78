"""Event-driven simulator and exact theory engine for one-dimensional
culture dynamics with a variable number of opinions per feature.

The model couples homophily (interaction rates fall with cultural
distance) to social influence (interactions copy one disagreeing
feature).  Edge disagreements form walker systems whose collisions
annihilate or coalesce; the theory module evaluates the exact functionals
that separate the fixation and fluctuation regimes, and the analysis and
verification modules confront simulation with those closed forms.
"""

from .analysis import (
    DensitySnapshot,
    RegimeReport,
    SnapshotCollector,
    absorption_detect,
    check_density_order,
    density_estimates,
    geometric_times,
    initial_pair_frequencies,
    regime_experiment,
    snapshots_from_live,
    window_weight_statistic,
)
from .coupling import (
    ANNIHILATION,
    COALESCENCE,
    AncestorTable,
    CollisionRecord,
    EdgeClass,
    SpinConfig,
    WeightLedger,
    check_coupling,
    classify_edge,
    derive_spins,
    track_blockades,
    update_ancestors,
    update_spins,
)
from .engine import EventRecord, RunConfig, RunSummary, apply_event, next_event, run
from .errors import ConsistencyError, ParameterError, UnsupportedConfigurationError
from .fast import LiveRunSummary, run_live
from .model import (
    CultureState,
    ModelParams,
    hamming,
    init_state,
    interaction_rate,
    make_rng,
    replicate_key,
    replicate_rng,
)
from .theory import (
    EdgeProbabilities,
    Regime,
    TheoryReport,
    geometric_mean,
    geometric_tail,
    h1,
    h2,
    predict_regime,
    probabilities,
    symmetric_fixation_condition,
    theory_report,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
