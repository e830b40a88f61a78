"""
Cultures, disagreement, and interaction rates
=============================================

A ring of individuals, each holding one opinion per cultural feature.
Neighbours interact at a rate that falls with the number of features they
disagree on, and an interaction copies one disagreeing feature.
"""

import numpy as np

from axelrod_lab import (
    ModelParams,
    hamming,
    init_state,
    interaction_rate,
    make_rng,
)

# A short ring with two features: two opinions for the first, four for the
# second (politics with two candidates, religion with four beliefs, say).
params = ModelParams(length=12, q=(2, 4), seed=2024)
state = init_state(params, make_rng(params.seed))

print("opinion table (rows = sites, columns = features):")
print(state.opinions.T)

# Cultural distance between neighbours drives everything.
for x in range(4):
    print(f"sites {x} and {x+1}: hamming distance {hamming(state, x, x + 1)}")

# The copy rate per (neighbour, feature) pair: zero at full agreement
# (nothing to copy) and zero at full disagreement (they refuse to talk).
F = params.F
print("\nper-feature copy rates by disagreement count:")
for j in range(F + 1):
    print(f"  {j} disagreements -> rate {interaction_rate(j, F):.3f}")

# At large size the initial densities match the product measure: an edge
# disagrees on feature i with probability 1 - 1/q_i.
big = ModelParams(length=100_000, q=(2, 4), seed=7)
s = init_state(big, make_rng(7))
from axelrod_lab import derive_spins

spins = derive_spins(s)
print("\ninitial disagreement densities at L=100000:")
print(f"  feature 1: {spins.level_counts[0] / big.length:.4f}  (expect {1 - 1/2})")
print(f"  feature 2: {spins.level_counts[1] / big.length:.4f}  (expect {1 - 1/4})")
print(f"  both (blockades): {spins.blockade_count / big.length:.4f}  (expect {(1 - 1/2) * (1 - 1/4)})")
