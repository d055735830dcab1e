"""Score-based orientation: BDeu-scored hill climbing restricted to a skeleton."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .dataset import Dataset, joint_index, topological_order
from .info import MiCache
from .pcselect import DEFAULT_DELTA, learn_all_pc
from .skeleton import AND, Skeleton, build_skeleton

DEFAULT_ESS = 10.0
MAX_PARENT_CONFIGS = 2 ** 20
# smallest total-score gain accepted as an improvement
MIN_IMPROVEMENT = 1e-8
# operators whose gains differ by less than this are ranked as ties
TIE_TOLERANCE = 1e-9

ADD, REVERSE, DELETE = "add", "reverse", "delete"
_OP_RANK = {ADD: 0, REVERSE: 1, DELETE: 2}


class ParentConfigOverflow(ValueError):
    pass


@dataclass(frozen=True)
class Dag:
    n_vars: int
    directed_edges: frozenset

    def __post_init__(self):
        edges = frozenset((int(a), int(b)) for a, b in self.directed_edges)
        for a, b in edges:
            if a == b:
                raise ValueError("self-loop")
        object.__setattr__(self, "directed_edges", edges)
        topological_order(self.parent_lists())  # raises CycleError

    @property
    def undirected_edges(self) -> frozenset:
        return frozenset()

    def parent_lists(self) -> list[list[int]]:
        ps = [[] for _ in range(self.n_vars)]
        for a, b in sorted(self.directed_edges):
            ps[b].append(a)
        return ps

    def adjacencies(self) -> frozenset:
        return frozenset((min(a, b), max(a, b)) for a, b in self.directed_edges)

    def to_json(self, names: Sequence[str] | None = None) -> dict:
        lab = (lambda i: names[i]) if names is not None else (lambda i: i)
        return {"nodes": list(names) if names is not None else list(range(self.n_vars)),
                "directed_edges": [[lab(a), lab(b)] for a, b in sorted(self.directed_edges)]}


def local_bdeu(ds: Dataset, x: int, parents: Iterable[int] = (), ess: float = DEFAULT_ESS) -> float:
    """BDeu family score of ``x`` given ``parents``.

    sum_j [lnG(a_j) - lnG(a_j + N_j) + sum_k (lnG(a_jk + N_jk) - lnG(a_jk))]
    with a_jk = ess / (q r) and a_j = ess / q.  Empty cells and empty parent
    configurations contribute exactly zero, so only occupied cells are visited.
    """
    parents = tuple(sorted(parents))
    if x in parents:
        raise ValueError("a variable cannot be its own parent")
    if ds.n_samples == 0:
        raise ValueError("empty dataset")
    if ess <= 0:
        raise ValueError("ess must be positive")
    r = ds.cardinalities[x]
    q = 1
    for p in parents:
        q *= ds.cardinalities[p]
    if q > MAX_PARENT_CONFIGS:
        raise ParentConfigOverflow(f"{q} parent configurations exceed the cap of {MAX_PARENT_CONFIGS}")
    pidx, _ = joint_index(ds, parents)
    cell = pidx * r + ds.data[:, x]
    if q * r <= 4 * ds.n_samples + 64:
        n_jk = np.bincount(cell, minlength=q * r).reshape(q, r)
        n_j = n_jk.sum(axis=1)
        n_jk = n_jk[n_jk > 0]
        n_j = n_j[n_j > 0]
    else:
        _, n_jk = np.unique(cell, return_counts=True)
        _, n_j = np.unique(pidx, return_counts=True)
    a_jk = ess / (q * r)
    a_j = ess / q
    score = (len(n_j) * gammaln(a_j) - gammaln(a_j + n_j).sum()
             + gammaln(a_jk + n_jk).sum() - len(n_jk) * gammaln(a_jk))
    return float(score)


class ScoreCache:
    """Memo of ``(variable, parent set) -> local BDeu``; thread-safe."""

    def __init__(self, ds: Dataset, ess: float = DEFAULT_ESS):
        self.ds = ds
        self.ess = ess
        self._memo: dict = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._memo)

    def score(self, x: int, parents: Iterable[int]) -> float:
        key = (x, frozenset(parents))
        v = self._memo.get(key)
        if v is None:
            v = local_bdeu(self.ds, x, key[1], self.ess)
            with self._lock:
                self._memo[key] = v
        return v


def total_score(ds: Dataset, dag, ess: float = DEFAULT_ESS, cache: ScoreCache | None = None) -> float:
    ps = dag.parent_lists() if hasattr(dag, "parent_lists") else dag
    if cache is not None:
        return float(sum(cache.score(i, p) for i, p in enumerate(ps)))
    return float(sum(local_bdeu(ds, i, p, ess) for i, p in enumerate(ps)))


def _reaches(children: list[set], src: int, dst: int, skip: tuple[int, int] | None = None) -> bool:
    stack, seen = [src], {src}
    while stack:
        v = stack.pop()
        for w in children[v]:
            if skip is not None and (v, w) == skip:
                continue
            if w == dst:
                return True
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def hill_climb(ds: Dataset, sk: Skeleton, ess: float = DEFAULT_ESS, max_iters: int = 100_000,
               cache: ScoreCache | None = None, trace: list | None = None) -> Dag:
    """Greedy search from the empty graph with add / delete / reverse moves.

    Additions are restricted to skeleton pairs; deletions and reversals apply
    to any current edge.  Each step applies the acyclic move with the largest
    gain; gains within ``TIE_TOLERANCE`` of the best are tied and resolved as
    add > reverse > delete, then by ``(i, j)``.  Stops when no move gains more
    than ``MIN_IMPROVEMENT`` or after ``max_iters`` moves.  If ``trace`` is a
    list, one record per accepted move is appended.
    """
    if sk.n_vars != ds.n_vars:
        raise ValueError("skeleton and dataset disagree on the number of variables")
    cache = cache if cache is not None else ScoreCache(ds, ess)
    n = ds.n_vars
    nb = sk.neighbors()
    parents = [set() for _ in range(n)]
    children = [set() for _ in range(n)]
    local = [cache.score(i, ()) for i in range(n)]
    # gain[j][i]: change of j's family score when toggling i in/out of j's parents;
    # for a child i of j this is only used to price reversing j->i
    gain: list[dict[int, float | None]] = [None] * n

    def refresh(j):
        g = {}
        for i in nb[j] | parents[j]:
            new = parents[j] - {i} if i in parents[j] else parents[j] | {i}
            try:
                g[i] = cache.score(j, new) - local[j]
            except ParentConfigOverflow:
                g[i] = None
        gain[j] = g

    for j in range(n):
        refresh(j)

    total = float(sum(local))
    if trace is not None:
        trace.append({"op": None, "edge": None, "delta": 0.0, "score": total, "edges": frozenset()})
    for _ in range(max_iters):
        cands = []
        for j in range(n):
            for i, g in gain[j].items():
                if g is None or i in children[j]:
                    continue
                if i in parents[j]:
                    cands.append((g, DELETE, i, j))
                    rg = gain[i].get(j)
                    if rg is not None:
                        cands.append((g + rg, REVERSE, i, j))
                else:
                    cands.append((g, ADD, i, j))
        cands = [c for c in cands if c[0] > MIN_IMPROVEMENT]
        if not cands:
            break
        cands.sort(key=lambda c: -c[0])
        chosen = None
        start = 0
        while start < len(cands) and chosen is None:
            top = cands[start][0]
            stop = start
            while stop < len(cands) and cands[stop][0] >= top - TIE_TOLERANCE:
                stop += 1
            for g, op, i, j in sorted(cands[start:stop], key=lambda c: (_OP_RANK[c[1]], c[2], c[3])):
                if op == ADD and _reaches(children, j, i):
                    continue
                if op == REVERSE and _reaches(children, i, j, skip=(i, j)):
                    continue
                chosen = (g, op, i, j)
                break
            start = stop
        if chosen is None:
            break
        g, op, i, j = chosen
        if op == ADD:
            parents[j].add(i)
            children[i].add(j)
        elif op == DELETE:
            parents[j].discard(i)
            children[i].discard(j)
        else:
            parents[j].discard(i)
            children[i].discard(j)
            parents[i].add(j)
            children[j].add(i)
        for v in {i, j}:
            local[v] = cache.score(v, parents[v])
        for v in {i, j}:
            refresh(v)
        total = float(sum(local))
        if trace is not None:
            trace.append({"op": op, "edge": (i, j), "delta": g, "score": total,
                          "edges": frozenset((p, c) for c in range(n) for p in parents[c])})
    return Dag(n, frozenset((p, c) for c in range(n) for p in parents[c]))


def f2sl_s(ds: Dataset, delta: float = DEFAULT_DELTA, ess: float = DEFAULT_ESS,
           max_iters: int = 100_000, threads: int = 1, cache: MiCache | None = None) -> Dag:
    """FCBF parent/child sets -> AND skeleton -> BDeu hill climbing."""
    cache = cache if cache is not None else MiCache(ds)
    pcs = learn_all_pc(ds, delta, cache, threads)
    return hill_climb(ds, build_skeleton(pcs, AND), ess, max_iters)
