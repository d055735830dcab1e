import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcbfnet.dataset import CycleError, Dataset, NetworkModel, forward_sample
from fcbfnet.orient_score import (DEFAULT_ESS, MAX_PARENT_CONFIGS, MIN_IMPROVEMENT, Dag, ParentConfigOverflow, ScoreCache,
                                  f2sl_s, hill_climb, local_bdeu, total_score)
from fcbfnet.skeleton import Skeleton

from helpers import consistent_dags, is_acyclic, random_dag


def bdeu_oracle(data, cards, x, parents, ess):
    """Direct evaluation of the BDeu family formula with math.lgamma over every
    cell of the (parent configuration, child state) grid, zeros included."""
    r = cards[x]
    q = int(np.prod([cards[p] for p in parents])) if parents else 1
    a_j, a_jk = ess / q, ess / (q * r)
    total = 0.0
    for cfg in itertools.product(*(range(cards[p]) for p in parents)):
        mask = np.ones(len(data), dtype=bool)
        for p, v in zip(parents, cfg):
            mask &= data[:, p] == v
        n_jk = [int(np.sum(data[mask, x] == k)) for k in range(r)]
        total += math.lgamma(a_j) - math.lgamma(a_j + sum(n_jk))
        total += sum(math.lgamma(a_jk + c) - math.lgamma(a_jk) for c in n_jk)
    return total


def all_dags_within(n, pairs):
    """Every DAG whose adjacencies are a subset of ``pairs``."""
    for choice in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = [(a, b) if k == 1 else (b, a) for (a, b), k in zip(pairs, choice) if k]
        if is_acyclic(n, edges):
            yield edges


def test_default_ess():
    assert DEFAULT_ESS == 10.0


def test_hand_table_score():
    # value frozen from a 30-digit log-gamma evaluation of the same sum
    # four-cell table for (A, B): counts (0,0)=3 (0,1)=1 (1,0)=0 (1,1)=4
    rows = [[0, 0]] * 3 + [[0, 1]] + [[1, 1]] * 4
    ds = Dataset.from_array(rows, [2, 2])
    # a_j = 10/2 = 5, a_jk = 2.5;  j=0: N=4 (3,1);  j=1: N=4 (0,4)
    hand = (math.lgamma(5) - math.lgamma(9) + math.lgamma(5.5) + math.lgamma(3.5) - 2 * math.lgamma(2.5)
            + math.lgamma(5) - math.lgamma(9) + math.lgamma(6.5) - math.lgamma(2.5))
    assert local_bdeu(ds, 1, (0,), 10) == pytest.approx(hand, abs=1e-12)
    assert local_bdeu(ds, 1, (0,), 10) == pytest.approx(-4.88579712639043465, abs=1e-12)


def test_finite_with_empty_strata():
    ds = Dataset.from_array([[0, 0, 0], [0, 0, 1]], [3, 3, 2])
    for ess in (1e-3, 1.0, 1e3):
        assert math.isfinite(local_bdeu(ds, 2, (0, 1), ess))


def test_parent_config_cap():
    ds = Dataset.from_array(np.zeros((3, 22), dtype=int), [2] * 22)
    assert 2 ** 21 > MAX_PARENT_CONFIGS
    with pytest.raises(ParentConfigOverflow):
        local_bdeu(ds, 0, range(1, 22))


def test_errors():
    ds = Dataset.from_array([[0, 1]])
    with pytest.raises(ValueError):
        local_bdeu(ds, 0, (0,))
    with pytest.raises(ValueError):
        local_bdeu(Dataset(("A",), (2,), np.zeros((0, 1), dtype=np.int64)), 0)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 80), st.floats(0.1, 50))
def test_local_score_matches_oracle(seed, n, ess):
    rng = np.random.default_rng(seed)
    cards = rng.integers(1, 4, size=4)
    data = rng.integers(0, cards, size=(n, 4))
    ds = Dataset.from_array(data, cards)
    for k in range(4):
        for ps in itertools.combinations([1, 2, 3], k):
            if k == 3:
                continue
            assert local_bdeu(ds, 0, ps, ess) == pytest.approx(bdeu_oracle(data, cards, 0, ps, ess), abs=1e-9)


def test_score_equivalence_two_nodes(rng):
    ds = Dataset.from_array(rng.integers(0, 3, size=(200, 2)))
    assert total_score(ds, Dag(2, frozenset({(0, 1)}))) == pytest.approx(
        total_score(ds, Dag(2, frozenset({(1, 0)}))), abs=1e-9)


def test_score_equivalence_classes(rng):
    for _ in range(10):
        edges = random_dag(rng, 4, 5, p=0.6)
        data = rng.integers(0, rng.integers(2, 4, size=4), size=(300, 4))
        ds = Dataset.from_array(data)
        scores = [total_score(ds, Dag(4, g)) for g in consistent_dags(4, edges)]
        assert max(scores) - min(scores) <= 1e-9


def test_score_cache_exact(rng):
    ds = Dataset.from_array(rng.integers(0, 3, size=(100, 4)))
    cache = ScoreCache(ds)
    for ps in [(), (1,), (2, 1), (1, 2, 3)]:
        assert cache.score(0, ps) == local_bdeu(ds, 0, ps)
    assert len(cache) == 4


def test_dag_rejects_cycles():
    with pytest.raises(CycleError):
        Dag(3, frozenset({(0, 1), (1, 2), (2, 0)}))


# -- hill climbing ---------------------------------------------------------

def test_edgeless_skeleton_gives_empty_dag(rng):
    ds = Dataset.from_array(rng.integers(0, 2, size=(100, 3)))
    assert hill_climb(ds, Skeleton(3, frozenset())).directed_edges == frozenset()


def test_two_node_dependent():
    m = NetworkModel.from_edges(2, [(0, 1)], [2, 2], cpts=[[[0.5, 0.5]], [[0.9, 0.1], [0.1, 0.9]]])
    ds = forward_sample(m, 2000, 0)
    dag = hill_climb(ds, Skeleton.from_pairs(2, [(0, 1)]))
    assert len(dag.directed_edges) == 1
    best = max(total_score(ds, Dag(2, frozenset(g))) for g in all_dags_within(2, [(0, 1)]))
    assert total_score(ds, dag) == pytest.approx(best, abs=1e-9)
    # equal-score directions tie; the add with the smaller (i, j) wins
    assert dag.directed_edges == {(0, 1)}


def test_trace_contracts():
    rng = np.random.default_rng(3)
    for trial in range(10):
        edges = random_dag(rng, 6, 8)
        m = NetworkModel.from_edges(6, edges, [2, 3, 2, 3, 2, 2], rng=trial)
        ds = forward_sample(m, 3000, trial)
        sk = Skeleton.from_pairs(6, [(a, b) for a in range(6) for b in range(a + 1, 6) if rng.random() < 0.6])
        trace = []
        dag = hill_climb(ds, sk, trace=trace)
        for prev, cur in zip(trace, trace[1:]):
            assert cur["score"] > prev["score"]
            assert is_acyclic(6, cur["edges"])
            assert cur["score"] == pytest.approx(total_score(ds, Dag(6, cur["edges"])), abs=1e-9)
        assert trace[-1]["edges"] == dag.directed_edges
        assert dag.adjacencies() <= sk.edges


def test_max_iters_limits_moves(rng):
    m = NetworkModel.from_edges(4, [(0, 1), (1, 2), (2, 3)], [2] * 4, rng=1)
    ds = forward_sample(m, 2000, 1)
    sk = Skeleton.from_pairs(4, [(0, 1), (1, 2), (2, 3)])
    assert len(hill_climb(ds, sk, max_iters=1).directed_edges) == 1


def exhaustive_optimum_rate(trials, n_nodes, n, seed):
    rng = np.random.default_rng(seed)
    hits = 0
    for t in range(trials):
        edges = random_dag(rng, n_nodes, 6, p=0.5)
        cards = [int(c) for c in rng.integers(2, 4, size=n_nodes)]
        m = NetworkModel.from_edges(n_nodes, edges, cards, rng=rng)
        ds = forward_sample(m, n, int(rng.integers(2**31)))
        pairs = sorted({(min(a, b), max(a, b)) for a, b in edges})
        cache = ScoreCache(ds)
        best = max(total_score(ds, Dag(n_nodes, frozenset(g)), cache=cache)
                   for g in all_dags_within(n_nodes, pairs))
        got = total_score(ds, hill_climb(ds, Skeleton.from_pairs(n_nodes, pairs), cache=cache), cache=cache)
        assert got <= best + 1e-9
        hits += got >= best - 1e-9
    return hits / trials


def test_greedy_never_beats_exhaustive_optimum():
    rate = exhaustive_optimum_rate(15, 4, 10_000, 21)
    assert 0 < rate <= 1


def test_result_is_a_local_optimum():
    rng = np.random.default_rng(17)
    for trial in range(10):
        edges = random_dag(rng, 5, 7, p=0.5)
        m = NetworkModel.from_edges(5, edges, [2, 3, 2, 3, 2], rng=trial)
        ds = forward_sample(m, 5000, trial)
        pairs = sorted({(min(a, b), max(a, b)) for a, b in edges})
        dag = hill_climb(ds, Skeleton.from_pairs(5, pairs))
        cur = set(dag.directed_edges)
        base = total_score(ds, dag)
        moves = []
        for a, b in pairs:
            for e in ((a, b), (b, a)):
                if e in cur:
                    moves.append(cur - {e})
                    moves.append((cur - {e}) | {e[::-1]})
                elif e[::-1] not in cur:
                    moves.append(cur | {e})
        for g in moves:
            if is_acyclic(5, g):
                assert total_score(ds, Dag(5, frozenset(g))) - base <= MIN_IMPROVEMENT


def test_f2sl_s_on_independent_data():
    m = NetworkModel.from_edges(6, [], [2] * 6, rng=3)
    assert f2sl_s(forward_sample(m, 2000, 3)).directed_edges == frozenset()
