"""Parent/child candidate discovery with FCBF, plus a greedy mRMR selector."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .info import MiCache

DEFAULT_DELTA = 0.05


@dataclass(frozen=True)
class PCSet:
    target: int
    members: tuple[int, ...]
    relevance: tuple[float, ...]

    def __post_init__(self):
        if self.target in self.members:
            raise ValueError("target cannot be its own parent/child")
        if len(set(self.members)) != len(self.members):
            raise ValueError("duplicate members")
        if len(self.relevance) != len(self.members):
            raise ValueError("relevance must parallel members")

    def __contains__(self, v) -> bool:
        return v in self.members

    def __len__(self) -> int:
        return len(self.members)

    def to_json(self, names=None) -> dict:
        if names is None:
            return {"target": self.target, "members": list(self.members),
                    "relevance": list(self.relevance)}
        return {"target": names[self.target], "members": [names[m] for m in self.members],
                "relevance": list(self.relevance)}


def fcbf_forward(ds: Dataset, c: int, delta: float = DEFAULT_DELTA, cache: MiCache | None = None) -> PCSet:
    """Keep every X with I(c;X) >= delta, sorted by relevance then index."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    cache = cache if cache is not None else MiCache(ds)
    rel = cache.relevance(c)
    cand = [j for j in range(ds.n_vars) if j != c and rel[j] >= delta]
    cand.sort(key=lambda j: (-rel[j], j))
    return PCSet(c, tuple(cand), tuple(float(rel[j]) for j in cand))


def fcbf_backward(candidates: PCSet, cache: MiCache) -> PCSet:
    """Drop each Y that some earlier surviving X explains: I(X;Y) > I(Y;c)."""
    members = list(candidates.members)
    relevance = list(candidates.relevance)
    removed = [False] * len(members)
    for a, x in enumerate(members):
        if removed[a]:
            continue
        for b in range(a + 1, len(members)):
            if not removed[b] and cache.mi(x, members[b]) > relevance[b]:
                removed[b] = True
    keep = [k for k in range(len(members)) if not removed[k]]
    return PCSet(candidates.target, tuple(members[k] for k in keep), tuple(relevance[k] for k in keep))


def learn_pc(ds: Dataset, c: int, delta: float = DEFAULT_DELTA, cache: MiCache | None = None) -> PCSet:
    cache = cache if cache is not None else MiCache(ds)
    return fcbf_backward(fcbf_forward(ds, c, delta, cache), cache)


def learn_all_pc(ds: Dataset, delta: float = DEFAULT_DELTA, cache: MiCache | None = None,
                 threads: int = 1) -> list[PCSet]:
    """PC sets of every variable, in target order (independent of ``threads``)."""
    cache = cache if cache is not None else MiCache(ds)
    if threads <= 1:
        return [learn_pc(ds, c, delta, cache) for c in range(ds.n_vars)]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda c: learn_pc(ds, c, delta, cache), range(ds.n_vars)))


def mrmr_select(ds: Dataset, c: int, k: int, cache: MiCache | None = None) -> list[int]:
    """Greedy max-relevance min-redundancy ranking of ``k`` features for target ``c``.

    Each step takes the unselected X maximizing I(X;c) - sum_{s in S} I(s;X),
    ties going to the smaller index.
    """
    m = ds.n_vars
    if not 1 <= k <= m - 1:
        raise ValueError(f"k must be in [1, {m - 1}]")
    cache = cache if cache is not None else MiCache(ds)
    rel = cache.relevance(c)
    redundancy = np.zeros(m)
    selected: list[int] = []
    pool = [j for j in range(m) if j != c]
    for _ in range(k):
        best = max(pool, key=lambda j: (rel[j] - redundancy[j], -j))
        selected.append(best)
        pool.remove(best)
        for j in pool:
            redundancy[j] += cache.mi(best, j)
    return selected
