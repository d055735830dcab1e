"""Constraint-based orientation: v-structure search over a learned skeleton
followed by Meek's closure rules."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .dataset import Dataset
from .info import DEFAULT_ALPHA, DEFAULT_MAX_COND, DataCITester, MiCache
from .pcselect import DEFAULT_DELTA, PCSet, learn_all_pc
from .skeleton import AND, Skeleton, build_skeleton


@dataclass(frozen=True)
class Pdag:
    n_vars: int
    directed_edges: frozenset
    undirected_edges: frozenset
    conflicts: int = 0
    stats: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        d = frozenset((int(a), int(b)) for a, b in self.directed_edges)
        u = frozenset((min(a, b), max(a, b)) for a, b in self.undirected_edges)
        for a, b in d:
            if a == b:
                raise ValueError("self-loop")
            if (b, a) in d:
                raise ValueError(f"edge {a}-{b} directed both ways")
            if (min(a, b), max(a, b)) in u:
                raise ValueError(f"edge {a}-{b} both directed and undirected")
        object.__setattr__(self, "directed_edges", d)
        object.__setattr__(self, "undirected_edges", u)

    def adjacencies(self) -> frozenset:
        return frozenset((min(a, b), max(a, b)) for a, b in self.directed_edges) | self.undirected_edges

    def to_json(self, names: Sequence[str] | None = None) -> dict:
        lab = (lambda i: names[i]) if names is not None else (lambda i: i)
        return {
            "nodes": list(names) if names is not None else list(range(self.n_vars)),
            "directed_edges": [[lab(a), lab(b)] for a, b in sorted(self.directed_edges)],
            "undirected_edges": [[lab(a), lab(b)] for a, b in sorted(self.undirected_edges)],
            "conflicts": self.conflicts,
        }


def unshielded_triples(sk: Skeleton) -> list[tuple[int, int, int]]:
    """All (A, C, D) with A < D, both adjacent to C and not to each other, sorted."""
    nb = sk.neighbors()
    triples = []
    for c in range(sk.n_vars):
        for a, d in combinations(sorted(nb[c]), 2):
            if d not in nb[a]:
                triples.append((a, c, d))
    triples.sort()
    return triples


def _step3(tester, a, c, d, pool) -> bool:
    """Search subsets S of ``pool`` (by size, then lexicographically) with
    a _||_ d | S and a dep d | S + {c}."""
    pool = sorted(pool)
    cc = tester.cardinality(c)
    smallest = sorted(tester.cardinality(v) for v in pool)
    for size in range(1, len(pool) + 1):
        if not tester.can_detect_dependence(a, d, [cc, *smallest[:size]]):
            break
        for s in combinations(pool, size):
            if not tester.can_detect_dependence(a, d, [cc, *(tester.cardinality(v) for v in s)]):
                continue
            if tester.independent(a, d, s) and not tester.independent(a, d, (*s, c)):
                return True
    return False


def classify_triple(tester, a: int, c: int, d: int, pc_a, pc_d) -> int:
    """Return 0 if not a v-structure, else the step (2 or 3) that found it; -1 at step 1."""
    if tester.independent(a, d, (c,)):
        return -1
    if tester.independent(a, d, ()):
        return 2
    for pool in (pc_a, pc_d):
        if _step3(tester, a, c, d, set(pool) - {a, c, d}):
            return 3
    return 0


def find_vstructures(sk: Skeleton, ds: Dataset | None, pc_sets: Sequence[PCSet],
                     alpha: float = DEFAULT_ALPHA, *, tester=None,
                     max_cond: int = DEFAULT_MAX_COND) -> Pdag:
    """Orient every unshielded triple A-C-D judged to be a collider.

    ``tester`` defaults to a G-test over ``ds``; any object with
    ``independent``, ``cardinality`` and ``can_detect_dependence`` works
    (e.g. :class:`~fcbfnet.info.OracleCITester`).  Orientations are committed
    in sorted triple order; an arrowhead contradicting an earlier one is
    dropped and counted as a conflict.
    """
    if tester is None:
        tester = DataCITester(ds, alpha, max_cond)
    pcs = {p.target: p.members for p in pc_sets}
    stats = {"step1": 0, "step2": 0, "step3": 0, "unresolved": 0}
    found = []
    for a, c, d in unshielded_triples(sk):
        verdict = classify_triple(tester, a, c, d, pcs.get(a, ()), pcs.get(d, ()))
        if verdict == -1:
            stats["step1"] += 1
        elif verdict == 0:
            stats["unresolved"] += 1
        else:
            stats[f"step{verdict}"] += 1
            found.append((a, c, d))

    directed: set[tuple[int, int]] = set()
    conflicts = 0
    for a, c, d in found:
        for x in (a, d):
            if (c, x) in directed:
                conflicts += 1
            else:
                directed.add((x, c))
    undirected = {e for e in sk.edges if (e[0], e[1]) not in directed and (e[1], e[0]) not in directed}
    stats["n_tests"] = getattr(tester, "n_tests", None)
    return Pdag(sk.n_vars, frozenset(directed), frozenset(undirected), conflicts, stats)


def meek_rules(p: Pdag) -> Pdag:
    """Apply Meek rules R1-R4 until a full pass orients nothing.

    R1  a->x, x-y, a not adj y              => x->y
    R2  x->k->y, x-y                        => x->y
    R3  x-c, x-d, c->y, d->y, x-y, c !adj d => x->y
    R4  x-c, c->d, d->y, x adj d, x-y, c !adj y => x->y
    """
    n = p.n_vars
    directed = set(p.directed_edges)
    undirected = set(p.undirected_edges)
    adj = [set() for _ in range(n)]
    for a, b in directed | undirected:
        adj[a].add(b)
        adj[b].add(a)

    def und(a, b):
        return (min(a, b), max(a, b)) in undirected

    def implied(x, y) -> bool:
        # R1
        for a in adj[x]:
            if (a, x) in directed and a != y and a not in adj[y]:
                return True
        # R2
        for k in adj[x]:
            if (x, k) in directed and (k, y) in directed:
                return True
        und_x = [v for v in adj[x] if und(x, v) and v != y]
        # R3
        into_y = [v for v in und_x if (v, y) in directed]
        for c, d in combinations(into_y, 2):
            if d not in adj[c]:
                return True
        # R4
        for c in und_x:
            if c in adj[y]:
                continue
            for d in adj[c]:
                if (c, d) in directed and (d, y) in directed and d in adj[x]:
                    return True
        return False

    changed = True
    while changed:
        changed = False
        for a, b in sorted(undirected):
            if (a, b) not in undirected:
                continue
            for x, y in ((a, b), (b, a)):
                if implied(x, y):
                    undirected.discard((a, b))
                    directed.add((x, y))
                    changed = True
                    break
    return Pdag(n, frozenset(directed), frozenset(undirected), p.conflicts, dict(p.stats))


def f2sl_c(ds: Dataset, delta: float = DEFAULT_DELTA, alpha: float = DEFAULT_ALPHA,
           max_cond: int = DEFAULT_MAX_COND, threads: int = 1, cache: MiCache | None = None) -> Pdag:
    """FCBF parent/child sets -> AND skeleton -> v-structures -> Meek closure."""
    cache = cache if cache is not None else MiCache(ds)
    pcs = learn_all_pc(ds, delta, cache, threads)
    sk = build_skeleton(pcs, AND)
    return meek_rules(find_vstructures(sk, ds, pcs, alpha, max_cond=max_cond))
