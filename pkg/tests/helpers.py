import itertools

import numpy as np
from fcbfnet.dataset import Dataset, NetworkModel


def random_dag(rng, n, max_edges, p=0.4):
    """Edges i->j (i<j in a random permutation) kept with probability p, up to max_edges."""
    perm = rng.permutation(n)
    pairs = [(int(perm[a]), int(perm[b])) for a in range(n) for b in range(a + 1, n)]
    rng.shuffle(pairs)
    edges = [e for e in pairs if rng.random() < p][:max_edges]
    return sorted(edges)


def is_acyclic(n, edges):
    indeg = [0] * n
    out = [[] for _ in range(n)]
    for a, b in edges:
        out[a].append(b)
        indeg[b] += 1
    ready = [v for v in range(n) if indeg[v] == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return seen == n


def vstructures(n, edges):
    es = set(edges)
    adj = {(min(a, b), max(a, b)) for a, b in es}
    parents = [set() for _ in range(n)]
    for a, b in es:
        parents[b].add(a)
    out = set()
    for c in range(n):
        for a, d in itertools.combinations(sorted(parents[c]), 2):
            if (a, d) not in adj:
                out.add((a, c, d))
    return out


def consistent_dags(n, edges):
    """Every DAG sharing the skeleton and v-structures of ``edges`` (brute force)."""
    pairs = sorted({(min(a, b), max(a, b)) for a, b in edges})
    target = vstructures(n, edges)
    found = []
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        cand = [(a, b) if bit == 0 else (b, a) for (a, b), bit in zip(pairs, bits)]
        if is_acyclic(n, cand) and vstructures(n, cand) == target:
            found.append(frozenset(cand))
    return found


def brute_force_cpdag(n, edges):
    """(directed, undirected) edges of the equivalence class: an edge is directed
    iff every member DAG orients it the same way."""
    members = consistent_dags(n, edges)
    directed, undirected = set(), set()
    for a, b in {(min(a, b), max(a, b)) for a, b in edges}:
        fwd = all((a, b) in g for g in members)
        bwd = all((b, a) in g for g in members)
        if fwd:
            directed.add((a, b))
        elif bwd:
            directed.add((b, a))
        else:
            undirected.add((a, b))
    return directed, undirected


def sharp_model(n, edges, rng, levels=(0.05, 0.95)):
    """Binary model with uniform roots and noisy-OR children whose rows are
    ``levels`` (optionally with the favoured state flipped per variable)."""
    parents = [sorted(p for p, c in edges if c == i) for i in range(n)]
    cpts = []
    for i in range(n):
        if not parents[i]:
            cpts.append(np.array([[0.5, 0.5]]))
            continue
        q = 2 ** len(parents[i])
        fav = np.array([int(k > 0) for k in range(q)])
        if rng.random() < 0.5:
            fav = 1 - fav
        cpts.append(np.where(fav[:, None] == np.arange(2)[None, :], levels[1], levels[0]))
    return NetworkModel.from_edges(n, edges, [2] * n, cpts=cpts)


def ds_from_rows(rows, cards=None):
    return Dataset.from_array(np.array(rows, dtype=np.int64), cards)


def noisy_or_network(n, seed, max_parents=2, levels=(0.05, 0.95)):
    """Random strong-dependence network: node j draws up to ``max_parents``
    parents among 0..j-1 and gets noisy-OR CPTs from :func:`sharp_model`."""
    rng = np.random.default_rng(seed)
    edges = []
    for j in range(1, n):
        k = min(int(rng.integers(0, max_parents + 1)), j)
        edges += [(int(p), j) for p in rng.choice(j, size=k, replace=False)]
    return sharp_model(n, edges, rng, levels)
