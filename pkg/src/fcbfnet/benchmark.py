"""Repeated-sampling benchmarks and the delta sweep.

Every replicate draws its own dataset from a seed derived from
``(seed, n, rep)``, so results do not depend on thread count or on which
other configurations run alongside.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .dataset import NetworkModel, forward_sample
from .evaluation import evaluate, mean_std, pc_metrics
from .info import DEFAULT_ALPHA, DEFAULT_MAX_COND, MiCache
from .orient_constraint import find_vstructures, meek_rules
from .orient_score import DEFAULT_ESS, hill_climb
from .pcselect import DEFAULT_DELTA, learn_all_pc, learn_pc
from .skeleton import AND, build_skeleton

METHOD_LABELS = {"c": "F2SL-c", "s": "F2SL-s"}


@dataclass
class RunConfig:
    method: str = "c"
    delta: float = DEFAULT_DELTA
    alpha: float = DEFAULT_ALPHA
    ess: float = DEFAULT_ESS
    seed: int = 0
    max_cond: int = DEFAULT_MAX_COND
    threads: int = 1

    def __post_init__(self):
        if self.method not in METHOD_LABELS:
            raise ValueError(f"method must be one of {sorted(METHOD_LABELS)}")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.ess <= 0:
            raise ValueError("ess must be > 0")
        if self.max_cond < 0:
            raise ValueError("max_cond must be >= 0")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("threads")
        return d


def replicate_seed(seed: int, n: int, rep: int) -> int:
    return int(np.random.SeedSequence([seed, n, rep]).generate_state(1)[0])


def learn(ds, cfg: RunConfig, timings: dict | None = None):
    """Run the full pipeline for ``cfg.method``; stage wall-clock times go in ``timings``."""
    t0 = time.perf_counter()
    cache = MiCache(ds)
    pcs = learn_all_pc(ds, cfg.delta, cache, cfg.threads)
    t1 = time.perf_counter()
    sk = build_skeleton(pcs, AND)
    t2 = time.perf_counter()
    if cfg.method == "c":
        graph = meek_rules(find_vstructures(sk, ds, pcs, cfg.alpha, max_cond=cfg.max_cond))
    else:
        graph = hill_climb(ds, sk, cfg.ess)
    t3 = time.perf_counter()
    if timings is not None:
        timings.update(pc=t1 - t0, skeleton=t2 - t1, orient=t3 - t2, total=t3 - t0)
    return graph, pcs


def _summary(values) -> dict:
    mean, std = mean_std(values)
    return {"mean": mean, "std": std}


def run_bench(model: NetworkModel, sizes: Sequence[int] = (500, 1000), reps: int = 10,
              methods: Sequence[str] = ("c", "s"), seed: int = 0, base: RunConfig | None = None,
              threads: int = 1, timings: bool = False, name: str | None = None) -> dict:
    """Table-shaped results: per (size, method) mean and sample std of SHD,
    Reverse, Miss, Extra and arrowhead scores, plus FCBF PC-set quality."""
    base = base or RunConfig()
    true_pc = [model.pc_set(i) for i in range(model.n_vars)]

    def one(job):
        n, rep = job
        ds = forward_sample(model, n, replicate_seed(seed, n, rep))
        out = {}
        pc_rows = None
        for meth in methods:
            cfg = RunConfig(meth, base.delta, base.alpha, base.ess, seed, base.max_cond, 1)
            tm = {}
            graph, pcs = learn(ds, cfg, tm)
            if pc_rows is None:
                pc_rows = np.array([pc_metrics(p, true_pc[p.target]) for p in pcs]).mean(axis=0)
            rep_ = evaluate(graph, model, tm["total"])
            row = {k: v for k, v in rep_.to_json().items() if k != "runtime_seconds"}
            if timings:
                row["timings"] = tm
            out[meth] = row
        return n, rep, out, pc_rows

    jobs = [(n, r) for n in sizes for r in range(reps)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(j) for j in jobs]

    rows = []
    for n in sizes:
        mine = [r for r in results if r[0] == n]
        for meth in methods:
            runs = [r[2][meth] for r in mine]
            row = {"size": n, "algorithm": METHOD_LABELS[meth]}
            for key in ("shd", "reverse", "miss", "extra", "ar_f1", "ar_precision", "ar_recall"):
                row[key] = _summary([r[key] for r in runs])
            if timings:
                row["time"] = _summary([r["timings"]["total"] for r in runs])
            row["runs"] = runs
            rows.append(row)
        pcm = np.array([r[3] for r in mine])
        rows.append({"size": n, "algorithm": "FCBF",
                     "pc_precision": _summary(pcm[:, 0]), "pc_recall": _summary(pcm[:, 1]),
                     "pc_f1": _summary(pcm[:, 2])})
    return {"network": name, "n_vars": model.n_vars, "n_edges": len(model.edges()),
            "reps": reps, "seed": seed, "config": base.to_json(), "rows": rows}


def run_delta_sweep(model: NetworkModel, n: int, deltas: Sequence[float], reps: int = 10,
                    seed: int = 0, threads: int = 1) -> dict:
    """Mean PC-set precision / recall / F1 of FCBF over all variables and
    replicates, for each threshold in ``deltas``."""
    deltas = [float(d) for d in deltas]
    if not deltas or any(d < 0 or not np.isfinite(d) for d in deltas):
        raise ValueError("deltas must be a nonempty list of finite values >= 0")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    true_pc = [model.pc_set(i) for i in range(model.n_vars)]

    def one(rep):
        ds = forward_sample(model, n, replicate_seed(seed, n, rep))
        cache = MiCache(ds)
        out = []
        for d in deltas:
            m = np.array([pc_metrics(learn_pc(ds, c, d, cache), true_pc[c]) for c in range(ds.n_vars)])
            out.append(m.mean(axis=0))
        return np.array(out)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            per_rep = list(pool.map(one, range(reps)))
    else:
        per_rep = [one(r) for r in range(reps)]
    avg = np.mean(per_rep, axis=0)
    return {"n": n, "reps": reps, "seed": seed, "deltas": deltas,
            "precision": avg[:, 0].tolist(), "recall": avg[:, 1].tolist(), "f1": avg[:, 2].tolist()}
