"""Structure-quality metrics: SHD decomposition, arrowhead and PC-set scores."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .dataset import NetworkModel


@dataclass(frozen=True)
class EvalReport:
    shd: int
    miss: int
    extra: int
    reverse: int
    ar_precision: float
    ar_recall: float
    ar_f1: float
    runtime_seconds: float = 0.0

    def to_json(self) -> dict:
        return asdict(self)


def _edges(g) -> tuple[int, frozenset, frozenset]:
    """(n_vars, directed edges, undirected pairs) of a Dag, Pdag or NetworkModel."""
    if isinstance(g, NetworkModel):
        return g.n_vars, frozenset(g.edges()), frozenset()
    und = getattr(g, "undirected_edges", frozenset())
    return g.n_vars, frozenset(g.directed_edges), frozenset((min(a, b), max(a, b)) for a, b in und)


def _adj(directed, undirected) -> set:
    return {(min(a, b), max(a, b)) for a, b in directed} | set(undirected)


def _check(n1, n2):
    if n1 != n2:
        raise ValueError(f"graphs have different variable counts ({n1} vs {n2})")


def shd(learned, truth, undirected_as_reverse: bool = True) -> tuple[int, int, int, int]:
    """``(shd, miss, extra, reverse)`` of a learned graph against the true DAG.

    A learned undirected edge over a true edge counts as a reversal unless
    ``undirected_as_reverse`` is false.
    """
    nl, dl, ul = _edges(learned)
    nt, dt, ut = _edges(truth)
    _check(nl, nt)
    adj_l, adj_t = _adj(dl, ul), _adj(dt, ut)
    miss = len(adj_t - adj_l)
    extra = len(adj_l - adj_t)
    reverse = 0
    for a, b in dt:
        pair = (min(a, b), max(a, b))
        if pair not in adj_l:
            continue
        if (b, a) in dl or (pair in ul and undirected_as_reverse):
            reverse += 1
    return miss + extra + reverse, miss, extra, reverse


def f1_score(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def arrowhead_metrics(learned, truth) -> tuple[float, float, float]:
    """Precision over learned arrowheads, recall over true edges, and F1."""
    nl, dl, _ = _edges(learned)
    nt, dt, _ = _edges(truth)
    _check(nl, nt)
    correct = len(dl & dt)
    precision = correct / len(dl) if dl else 0.0
    recall = correct / len(dt) if dt else 0.0
    return precision, recall, f1_score(precision, recall)


def pc_metrics(learned_pc, true_pc: Iterable[int]) -> tuple[float, float, float]:
    """Precision, recall and F1 of a learned PC set.

    Empty output scores (1, 1, 1) against an empty truth and (0, 0, 0)
    otherwise; nonempty output against an empty truth has nothing to miss,
    so its recall is 1.
    """
    members = set(getattr(learned_pc, "members", learned_pc))
    true_pc = set(true_pc)
    if not members:
        return (1.0, 1.0, 1.0) if not true_pc else (0.0, 0.0, 0.0)
    tp = len(members & true_pc)
    precision = tp / len(members)
    recall = tp / len(true_pc) if true_pc else 1.0
    return precision, recall, f1_score(precision, recall)


def evaluate(learned, truth, runtime_seconds: float = 0.0, undirected_as_reverse: bool = True) -> EvalReport:
    s, miss, extra, rev = shd(learned, truth, undirected_as_reverse)
    p, r, f = arrowhead_metrics(learned, truth)
    return EvalReport(s, miss, extra, rev, p, r, f, runtime_seconds)


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample (ddof=1) standard deviation; std is 0 for one value."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return math.nan, math.nan
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std
