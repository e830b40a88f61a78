"""
Disagreements as walkers on the edges
=====================================

Every edge-feature pair where the two endpoints disagree carries a walker.
An accepted interaction empties the crossed pair and either fills the next
pair over (a jump) or lands on an occupied pair, where the two walkers
cancel or merge depending on whether the outer neighbours already agree.
Edges occupied at every feature are blockades: frozen until hit.
"""

from axelrod_lab import (
    ModelParams,
    RunConfig,
    derive_spins,
    init_state,
    make_rng,
    replicate_rng,
    run,
)


def picture(spins):
    rows = []
    for i in range(spins.F):
        cells = "".join("*" if z else "." for z in spins.zeta[:, i])
        rows.append(f"  level {i + 1}: {cells}")
    return "\n".join(rows)


params = ModelParams(length=30, q=(2, 3), seed=99)
state = init_state(params, make_rng(params.seed))
print("walkers at time 0  (* = disagreement, . = agreement):")
print(picture(derive_spins(state)))

moments = []


def log_collisions(ev, st, sp):
    if ev.active:
        moments.append((ev.time, sp.level_counts.copy(), sp.blockade_count))


cfg = RunConfig(t_max=40.0, observers=[log_collisions])
summary = run(state, params, cfg, make_rng(1))

print(f"\nran to t={summary.time:.2f}: {summary.n_active} accepted arrows, "
      f"{len(summary.collisions)} collisions")
print("\nwalkers at the end:")
print(picture(summary.spins))
print(f"absorbed: {summary.absorbed} "
      f"(every edge empty or fully frozen: nothing can ever move again)")

print("\ncollision log (time, edge, level, outcome):")
for c in summary.collisions[:10]:
    print(f"  t={c.time:7.3f}  edge={c.edge:3d}  level={c.level + 1}  {c.outcome}")
if len(summary.collisions) > 10:
    print(f"  ... and {len(summary.collisions) - 10} more")

# Walker counts only ever fall: jumps conserve them, coalescences remove
# one, annihilations remove two.
print("\nwalker counts at the first few accepted arrows:")
for t, counts, blk in moments[:8]:
    print(f"  t={t:7.3f}  level counts={counts.tolist()}  blockades={blk}")
