"""
Keeping a suite up to date as the model grows
=============================================

The messenger model evolves twice: an age context with matching
features, then devices and display layouts.  Old scenarios are extended
instead of thrown away, with either the solver filling in the new
variables or a queue of partial scenarios.  Regenerating from scratch
is the baseline.
"""

import statistics

from scenariogen import (
    GenConfig,
    augment_suite,
    generate_suite,
    load_model,
    noreuse_baseline,
    valid_pair_universe,
)

v1, v2, v3 = (load_model(f"messenger_v{k}") for k in (1, 2, 3))
seeds = range(5)

for old, new, label in ((v1, v2, "v1 -> v2"), (v2, v3, "v2 -> v3")):
    u_old, u_new = valid_pair_universe(old), valid_pair_universe(new)
    rows = {"sat": [], "partial": [], "regenerate": []}
    for s in seeds:
        base = generate_suite(old, cfg=GenConfig(rng_seed=s), universe=u_old)[0]
        for strategy in ("sat", "partial"):
            rep = augment_suite(base, new, strategy=strategy, window=9, rng_seed=s, universe=u_new)
            rows[strategy].append((rep.modification_cost, rep.total_cost, len(rep.suite)))
        suite, cost = noreuse_baseline(new, rng_seed=s, universe=u_new)
        rows["regenerate"].append((0, cost, len(suite)))
    print(label)
    for k, v in rows.items():
        mod, total, size = (statistics.mean(x) for x in zip(*v))
        print(f"  {k:<11} modification {mod:5.1f}  total {total:6.1f}  size {size:5.1f}")

# window size S: how many consecutive scenarios one partial may update
base = generate_suite(v2, cfg=GenConfig(rng_seed=0))[0]
for window in (1, 3, 6, 9, 12, 15):
    rep = augment_suite(base, v3, window=window, rng_seed=0)
    print(f"S={window:<2} total cost {rep.total_cost:3d}  updates per partial {rep.updates_per_partial:.2f}")
