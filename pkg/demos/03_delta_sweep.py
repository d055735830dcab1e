"""
How the relevance threshold shapes the PC sets
==============================================

Sweep delta from 0 to 0.1 and print mean PC precision / recall / F1 over
all variables and replicates.  Small thresholds admit weakly related
variables; precision climbs as delta grows while recall decays slowly.
"""

from pathlib import Path

from fcbfnet import parse_bif
from fcbfnet.benchmark import run_delta_sweep

NETS = Path(__file__).resolve().parent.parent / "data" / "networks"
deltas = [round(0.01 * k, 2) for k in range(11)]

for name in ["child", "insurance", "alarm", "hailfinder"]:
    model = parse_bif(NETS / f"{name}.bif.gz")
    res = run_delta_sweep(model, n=1000, deltas=deltas, reps=5, seed=0)
    print(f"\n{name} ({model.n_vars} variables)")
    print(" delta  precision  recall     F1")
    for d, p, r, f in zip(res["deltas"], res["precision"], res["recall"], res["f1"]):
        print(f" {d:5.2f}  {p:9.3f}  {r:6.3f}  {f:5.3f}")
