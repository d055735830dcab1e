"""
Learning a benchmark network end to end
=======================================

Draw data from the bundled ALARM network, learn it with both orientation
back-ends and score the results against the generating DAG.
"""

import time
from pathlib import Path

from fcbfnet import (MiCache, build_skeleton, evaluate, find_vstructures, forward_sample, hill_climb,
                     learn_all_pc, meek_rules, parse_bif, pc_metrics)

NETS = Path(__file__).resolve().parent.parent / "data" / "networks"

model = parse_bif(NETS / "alarm.bif.gz")
print(f"ALARM: {model.n_vars} variables, {len(model.edges())} edges")

ds = forward_sample(model, 2000, seed=0)

# step 1: parent/child candidates per variable
t0 = time.perf_counter()
cache = MiCache(ds)
pcs = learn_all_pc(ds, delta=0.05, cache=cache)
f1 = sum(pc_metrics(p, model.pc_set(p.target))[2] for p in pcs) / model.n_vars
print(f"PC sets learned in {time.perf_counter() - t0:.2f}s, mean PC F1 {f1:.3f}")

# step 2: keep an edge only when both endpoints agree
sk = build_skeleton(pcs, "AND")
print(f"skeleton: {len(sk.edges)} edges")

# step 3a: constraint-based orientation
pdag = meek_rules(find_vstructures(sk, ds, pcs, alpha=0.01))
print("v-structure search:", pdag.stats)
print("F2SL-c:", evaluate(pdag, model).to_json())

# step 3b: score-based orientation on the same skeleton
dag = hill_climb(ds, sk, ess=10.0)
print("F2SL-s:", evaluate(dag, model).to_json())

# a few learned arcs by name
for a, b in sorted(dag.directed_edges)[:8]:
    mark = "ok" if (a, b) in model.edges() else ("reversed" if (b, a) in model.edges() else "extra")
    print(f"  {model.variable_names[a]} -> {model.variable_names[b]}  ({mark})")
