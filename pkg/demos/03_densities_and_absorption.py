"""
Density decay and absorbing states at scale
===========================================

The compiled live-edge engine only samples arrivals that could change the
state, which makes absorption runs on rings of thousands of sites cheap.
Densities are recorded on a geometric time grid.
"""

import numpy as np

from axelrod_lab import (
    ModelParams,
    geometric_times,
    init_state,
    replicate_rng,
    run_live,
    snapshots_from_live,
)

params = ModelParams(length=20_000, q=(2, 4), seed=5)
rng = replicate_rng(params.seed, 0)
state = init_state(params, rng)

times = geometric_times(4096.0)
res = run_live(state, params, rng, t_max=4096.0, snapshot_times=times,
               collect_collisions=False)

print("time      ubar1    ubar2    u1       u2       blockades")
for s in snapshots_from_live(res):
    print(f"{s.time:8.0f}  {s.ubar[0]:.5f}  {s.ubar[1]:.5f}  "
          f"{s.u_active[0]:.5f}  {s.u_active[1]:.5f}  {s.blockade_density:.5f}")

print(f"\nabsorbed: {res.absorbed}" + (f" at t={res.t_abs:.1f}" if res.absorbed else ""))
print(f"accepted arrows: {res.n_active},  candidate arrivals: {res.n_candidates}")
print(f"surviving blockade density: {res.spins.blockade_count / params.length:.4f}")

# With four opinions on one feature the ring freezes into many blockades;
# almost all active walkers are gone well before the clock cap.
flips = res.flips.sum(axis=1)
print(f"mean updates per site: {flips.mean():.2f}, max: {flips.max()}")
