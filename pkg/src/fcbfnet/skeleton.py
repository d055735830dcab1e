from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .pcselect import PCSet

AND = "AND"
OR = "OR"


@dataclass(frozen=True)
class Skeleton:
    n_vars: int
    edges: frozenset  # of (i, j) with i < j

    def __post_init__(self):
        canon = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError("self-loop in skeleton")
            if not (0 <= i < self.n_vars and 0 <= j < self.n_vars):
                raise IndexError(f"edge ({i}, {j}) out of range")
            canon.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(canon))

    def neighbors(self) -> list[set[int]]:
        nb = [set() for _ in range(self.n_vars)]
        for i, j in self.edges:
            nb[i].add(j)
            nb[j].add(i)
        return nb

    def adjacent(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def to_json(self, names: Sequence[str] | None = None) -> dict:
        return {"nodes": list(names) if names is not None else list(range(self.n_vars)),
                "undirected_edges": [list(e) for e in sorted(self.edges)]}

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable) -> "Skeleton":
        return cls(n, frozenset(tuple(p) for p in pairs))


def build_skeleton(pc_sets: Sequence[PCSet], rule: str = AND) -> Skeleton:
    """Merge per-variable PC sets: AND needs mutual membership, OR either side."""
    rule = rule.upper()
    if rule not in (AND, OR):
        raise ValueError(f"unknown rule {rule!r}")
    m = len(pc_sets)
    targets = sorted(p.target for p in pc_sets)
    if targets != list(range(m)):
        raise ValueError("need exactly one PC set per variable 0..M-1")
    by_target = {p.target: set(p.members) for p in pc_sets}
    edges = set()
    for i in range(m):
        for j in by_target[i]:
            if not 0 <= j < m:
                raise IndexError(f"PC member {j} out of range")
            if rule == OR or i in by_target[j]:
                edges.add((min(i, j), max(i, j)))
    return Skeleton(m, frozenset(edges))
