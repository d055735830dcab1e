"""
Mutual information and FCBF on three-variable structures
========================================================

Sample the small structures around a target C and watch which neighbours
survive the forward (relevance) and backward (redundancy) passes.
"""

import numpy as np

from fcbfnet import NetworkModel, forward_sample, mutual_information
from fcbfnet.pcselect import fcbf_backward, fcbf_forward
from fcbfnet.info import MiCache, conditional_mutual_information

names = ["C", "X", "Y"]

# binary noisy copies: the child takes the OR of its parents and is flipped 5% of the time
def noisy_or(n_parents):
    fav = np.array([int(k > 0) for k in range(2 ** n_parents)])
    return np.where(fav[:, None] == np.arange(2), 0.95, 0.05)

structures = {
    "X -> C -> Y": [(1, 0), (0, 2)],
    "C -> X <- Y (Y is a spouse)": [(0, 1), (2, 1)],
    "Y -> X -> C (Y is an ancestor)": [(2, 1), (1, 0)],
}

for label, edges in structures.items():
    parents = [sorted(p for p, c in edges if c == i) for i in range(3)]
    cpts = [noisy_or(len(ps)) if ps else np.array([[0.5, 0.5]]) for ps in parents]
    model = NetworkModel.from_edges(3, edges, [2, 2, 2], cpts=cpts, names=names)
    ds = forward_sample(model, 50_000, seed=1)
    cache = MiCache(ds)

    print(label)
    for a, b in [(0, 1), (0, 2), (1, 2)]:
        print(f"  I({names[a]};{names[b]}) = {mutual_information(ds, a, b):.4f} nats")
    print(f"  I(C;Y|X) = {conditional_mutual_information(ds, 0, 2, (1,)):.4f} nats")

    # delta = 0 lets everything through the forward pass, so the backward pass does the work
    fwd = fcbf_forward(ds, 0, delta=0.0, cache=cache)
    out = fcbf_backward(fwd, cache)
    print("  forward :", [names[m] for m in fwd.members])
    print("  backward:", [names[m] for m in out.members])
    print("  true PC :", sorted(names[m] for m in model.pc_set(0)))
    print()
