"""Plug-in information measures, the G-test for conditional independence,
and a d-separation oracle.  All logarithms are natural (nats)."""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.stats import chi2

from .dataset import Dataset, NetworkModel, joint_index

DEFAULT_ALPHA = 0.01
DEFAULT_MAX_COND = 8
RELIABILITY_FACTOR = 5
CLAMP_LIMIT = 1e-12


class ConditioningSetTooLarge(ValueError):
    pass


def _check_index(ds: Dataset, i: int) -> None:
    if not 0 <= i < ds.n_vars:
        raise IndexError(f"variable index {i} out of range for {ds.n_vars} variables")


def _clamp(v: float) -> float:
    return 0.0 if v < 0.0 else v


# ---------------------------------------------------------------------------
# Raw estimators over count arrays
# ---------------------------------------------------------------------------

def entropy_from_counts(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64).ravel()
    n = counts.sum()
    if n <= 0:
        raise ValueError("empty dataset")
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def mi_from_counts(table) -> float:
    """Unclamped plug-in I(X;Y) from a 2-D count table."""
    table = np.asarray(table, dtype=np.float64)
    n = table.sum()
    if n <= 0:
        raise ValueError("empty dataset")
    nx = table.sum(axis=1, keepdims=True)
    ny = table.sum(axis=0, keepdims=True)
    nz = table > 0
    t = table[nz]
    ratio = (t * n) / (nx * ny)[nz]
    return float((t * np.log(ratio)).sum() / n)


def cmi_from_counts(table) -> float:
    """Unclamped plug-in I(X;Y|Z) from a ``(z, x, y)`` count table.

    Strata with zero counts contribute nothing.
    """
    table = np.asarray(table, dtype=np.float64)
    n = table.sum()
    if n <= 0:
        raise ValueError("empty dataset")
    nz_ = table.sum(axis=(1, 2), keepdims=True)
    nxz = table.sum(axis=2, keepdims=True)
    nyz = table.sum(axis=1, keepdims=True)
    mask = table > 0
    t = table[mask]
    ratio = (t * np.broadcast_to(nz_, table.shape)[mask]) / (
        np.broadcast_to(nxz, table.shape)[mask] * np.broadcast_to(nyz, table.shape)[mask])
    return float((t * np.log(ratio)).sum() / n)


def _cond_table(ds: Dataset, x: int, y: int, z: Sequence[int]) -> np.ndarray:
    zi, qz = joint_index(ds, z)
    rx, ry = ds.cardinalities[x], ds.cardinalities[y]
    idx = (zi * rx + ds.data[:, x]) * ry + ds.data[:, y]
    # only occupied strata matter; compress z codes to keep the table small
    if qz > ds.n_samples:
        _, zi = np.unique(zi, return_inverse=True)
        qz = int(zi.max()) + 1 if zi.size else 1
        idx = (zi * rx + ds.data[:, x]) * ry + ds.data[:, y]
    return np.bincount(idx, minlength=qz * rx * ry).reshape(qz, rx, ry)


# ---------------------------------------------------------------------------
# Public estimators
# ---------------------------------------------------------------------------

def entropy(ds: Dataset, x: int) -> float:
    _check_index(ds, x)
    if ds.n_samples == 0:
        raise ValueError("empty dataset")
    counts = np.bincount(ds.data[:, x], minlength=ds.cardinalities[x])
    return entropy_from_counts(counts)


def raw_mutual_information(ds: Dataset, x: int, y: int) -> float:
    if x == y:
        raise ValueError("mutual_information needs two distinct variables")
    _check_index(ds, x)
    _check_index(ds, y)
    if ds.n_samples == 0:
        raise ValueError("empty dataset")
    if x > y:
        x, y = y, x
    rx, ry = ds.cardinalities[x], ds.cardinalities[y]
    table = np.bincount(ds.data[:, x] * ry + ds.data[:, y], minlength=rx * ry).reshape(rx, ry)
    return mi_from_counts(table)


def mutual_information(ds: Dataset, x: int, y: int) -> float:
    return _clamp(raw_mutual_information(ds, x, y))


def _check_cond(ds: Dataset, x: int, y: int, z: Iterable[int]) -> tuple[int, ...]:
    z = tuple(sorted(int(v) for v in z))
    if x == y:
        raise ValueError("x and y must differ")
    if x in z or y in z:
        raise ValueError("conditioning set overlaps the tested pair")
    if len(set(z)) != len(z):
        raise ValueError("duplicate index in conditioning set")
    for v in (x, y, *z):
        _check_index(ds, v)
    return z


def raw_conditional_mutual_information(ds: Dataset, x: int, y: int, z: Iterable[int] = ()) -> float:
    z = _check_cond(ds, x, y, z)
    if ds.n_samples == 0:
        raise ValueError("empty dataset")
    if x > y:
        x, y = y, x
    if not z:
        return raw_mutual_information(ds, x, y)
    return cmi_from_counts(_cond_table(ds, x, y, z))


def conditional_mutual_information(ds: Dataset, x: int, y: int, z: Iterable[int] = ()) -> float:
    return _clamp(raw_conditional_mutual_information(ds, x, y, z))


# ---------------------------------------------------------------------------
# Conditional independence test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CITestResult:
    statistic: float
    dof: int
    p_value: float
    independent: bool
    reliable: bool


def ci_dof(ds: Dataset, x: int, y: int, s: Iterable[int]) -> int:
    dof = (ds.cardinalities[x] - 1) * (ds.cardinalities[y] - 1)
    for v in s:
        dof *= ds.cardinalities[v]
    return dof


def ci_test(ds: Dataset, x: int, y: int, s: Iterable[int] = (), alpha: float = DEFAULT_ALPHA,
            max_cond: int = DEFAULT_MAX_COND) -> CITestResult:
    """G-test of ``x _||_ y | s`` with statistic ``2 N I(x;y|s)``.

    A test with fewer than ``5 * dof`` samples is flagged unreliable and
    reported as independent.  Degenerate variables (one state) give dof 0,
    which is also treated as unreliable.
    """
    s = _check_cond(ds, x, y, s)
    if len(s) > max_cond:
        raise ConditioningSetTooLarge(f"|s| = {len(s)} exceeds the cap of {max_cond}")
    n = ds.n_samples
    dof = ci_dof(ds, x, y, s)
    reliable = dof > 0 and n >= RELIABILITY_FACTOR * dof
    if not reliable:
        return CITestResult(0.0, max(dof, 1), 1.0, True, False)
    stat = 2.0 * n * conditional_mutual_information(ds, x, y, s)
    p = float(chi2.sf(stat, dof))
    return CITestResult(stat, dof, p, p > alpha, True)


class DataCITester:
    """Memoized G-test verdicts over one dataset.

    ``can_detect_dependence`` lets callers skip conditioning sets that are
    too large to ever yield a reliable (hence dependent) verdict.
    """

    def __init__(self, ds: Dataset, alpha: float = DEFAULT_ALPHA, max_cond: int = DEFAULT_MAX_COND):
        self.ds = ds
        self.alpha = alpha
        self.max_cond = max_cond
        self.n_tests = 0
        self._memo: dict = {}

    def cardinality(self, v: int) -> int:
        return self.ds.cardinalities[v]

    def can_detect_dependence(self, x: int, y: int, cond_cards: Iterable[int]) -> bool:
        cond_cards = list(cond_cards)
        if len(cond_cards) > self.max_cond:
            return False
        dof = (self.ds.cardinalities[x] - 1) * (self.ds.cardinalities[y] - 1)
        for c in cond_cards:
            dof *= c
        return dof > 0 and self.ds.n_samples >= RELIABILITY_FACTOR * dof

    def test(self, x: int, y: int, s: Iterable[int] = ()) -> CITestResult:
        if x > y:
            x, y = y, x
        key = (x, y, frozenset(s))
        res = self._memo.get(key)
        if res is None:
            res = ci_test(self.ds, x, y, sorted(key[2]), self.alpha, self.max_cond)
            self._memo[key] = res
            self.n_tests += 1
        return res

    def independent(self, x: int, y: int, s: Iterable[int] = ()) -> bool:
        return self.test(x, y, s).independent


class OracleCITester:
    """Independence verdicts read off a known DAG by d-separation."""

    def __init__(self, model: NetworkModel):
        self.model = model
        self.n_tests = 0

    def cardinality(self, v: int) -> int:
        return self.model.cardinalities[v]

    def can_detect_dependence(self, x, y, cond_cards) -> bool:
        return True

    def independent(self, x: int, y: int, s: Iterable[int] = ()) -> bool:
        self.n_tests += 1
        return dsep_oracle(self.model, x, y, s)


# ---------------------------------------------------------------------------
# d-separation
# ---------------------------------------------------------------------------

def dsep_oracle(model: NetworkModel, x: int, y: int, s: Iterable[int] = ()) -> bool:
    """True iff ``s`` d-separates ``x`` and ``y`` in the model's DAG.

    Reachability over (node, direction) states: a trail may pass a
    non-collider outside ``s`` and a collider that is in ``s`` or has a
    descendant in ``s``.
    """
    parents = [set(p) for p in model.parent_lists]
    return dsep(parents, x, y, s)


def dsep(parents: Sequence[set], x: int, y: int, s: Iterable[int] = ()) -> bool:
    m = len(parents)
    s = set(s)
    for v in (x, y, *s):
        if not 0 <= v < m:
            raise IndexError(f"variable index {v} out of range")
    if x == y or x in s or y in s:
        raise ValueError("x, y must be distinct and outside s")
    children = [set() for _ in range(m)]
    for c, ps in enumerate(parents):
        for p in ps:
            children[p].add(c)
    # s together with its ancestors: colliders in this set are open
    anc = set()
    stack = list(s)
    while stack:
        v = stack.pop()
        if v not in anc:
            anc.add(v)
            stack.extend(parents[v])
    # direction "up": arrived from a child; "down": arrived from a parent
    seen = set()
    queue = deque([(x, "up")])
    while queue:
        v, d = queue.popleft()
        if (v, d) in seen:
            continue
        seen.add((v, d))
        if v == y:
            return False
        if d == "up":
            if v not in s:
                queue.extend((p, "up") for p in parents[v])
                queue.extend((c, "down") for c in children[v])
        else:
            if v not in s:
                queue.extend((c, "down") for c in children[v])
            if v in anc:
                queue.extend((p, "up") for p in parents[v])
    return True


# ---------------------------------------------------------------------------
# Pairwise MI cache
# ---------------------------------------------------------------------------

class MiCache:
    """All pairwise mutual informations and marginal entropies of a dataset.

    When the one-hot width ``sum(cardinalities)`` is at most ``dense_limit``
    the full matrix is built at once from a single one-hot Gram product;
    otherwise pairs are filled lazily under a lock.
    """

    def __init__(self, ds: Dataset, dense_limit: int = 6000):
        if ds.n_samples == 0:
            raise ValueError("empty dataset")
        self.ds = ds
        m = ds.n_vars
        self._lock = threading.Lock()
        self._filled = np.zeros((m, m), dtype=bool)
        self._mi = np.zeros((m, m))
        if sum(ds.cardinalities) <= dense_limit:
            self._build_dense()
        else:
            self._h = np.array([entropy(ds, i) for i in range(m)])
            np.fill_diagonal(self._filled, True)
            np.fill_diagonal(self._mi, self._h)

    def _build_dense(self):
        ds = self.ds
        cards = np.asarray(ds.cardinalities)
        offsets = np.concatenate([[0], np.cumsum(cards)[:-1]])
        width = int(cards.sum())
        n = ds.n_samples
        rows = np.repeat(np.arange(n), ds.n_vars)
        onehot = sparse.csr_matrix(
            (np.ones(rows.size), (rows, (ds.data + offsets).ravel())), shape=(n, width))
        joint = (onehot.T @ onehot).toarray()  # exact integer counts
        marg = np.diag(joint).copy()
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = joint * n / np.outer(marg, marg)
            terms = np.where(joint > 0, joint * np.log(np.where(joint > 0, ratio, 1.0)), 0.0)
        mi = np.add.reduceat(np.add.reduceat(terms, offsets, axis=0), offsets, axis=1) / n
        upper = np.triu(mi)
        mi = upper + np.triu(mi, 1).T
        self._mi = np.maximum(mi, 0.0)
        self._h = np.diag(self._mi).copy()
        self._filled[:] = True

    def entropy(self, i: int) -> float:
        return float(self._h[i])

    def mi(self, i: int, j: int) -> float:
        if i == j:
            return float(self._h[i])
        if not self._filled[i, j]:
            v = mutual_information(self.ds, i, j)
            with self._lock:
                self._mi[i, j] = self._mi[j, i] = v
                self._filled[i, j] = self._filled[j, i] = True
        return float(self._mi[i, j])

    def relevance(self, c: int) -> np.ndarray:
        """I(c; X) for every X (entry ``c`` holds H(c))."""
        if not self._filled[c].all():
            for j in range(self.ds.n_vars):
                self.mi(c, j)
        return self._mi[c].copy()

    def matrix(self) -> np.ndarray:
        for i in range(self.ds.n_vars):
            self.relevance(i)
        return self._mi.copy()
