"""Command-line entry point: ``fcbfnet {sample,pc,learn,eval,bench,delta-sweep}``.

Exit codes: 0 success, 2 usage or input-format error, 1 other runtime error.
A ``--config`` file of ``key=value`` lines supplies defaults for any flag;
``FCBFNET_THREADS`` overrides the default thread count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .benchmark import RunConfig, learn, run_bench, run_delta_sweep
from .dataset import DataFormatError, NetworkFormatError, forward_sample, load_csv, parse_bif
from .evaluation import evaluate
from .info import DEFAULT_ALPHA, DEFAULT_MAX_COND, MiCache
from .orient_constraint import Pdag
from .orient_score import DEFAULT_ESS
from .pcselect import DEFAULT_DELTA, learn_pc

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_config(path) -> dict:
    conf = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        conf[key.strip().replace("-", "_")] = value.strip()
    return conf


def _default_threads() -> int:
    env = os.environ.get("FCBFNET_THREADS", "").strip()
    if not env:
        return 1
    if env == "auto":
        return os.cpu_count() or 1
    try:
        return max(1, int(env))
    except ValueError:
        raise UsageError(f"FCBFNET_THREADS={env!r} is not an integer") from None


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _ints(s: str) -> list[int]:
    return [int(v) for v in s.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fcbfnet", description="Local-to-global Bayesian network structure learning")
    p.add_argument("--config", help="key=value file providing flag defaults")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *flags):
        if "delta" in flags:
            sp.add_argument("--delta", type=float, default=DEFAULT_DELTA)
        if "alpha" in flags:
            sp.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
        if "ess" in flags:
            sp.add_argument("--ess", type=float, default=DEFAULT_ESS)
        if "max_cond" in flags:
            sp.add_argument("--max-cond", dest="max_cond", type=int, default=DEFAULT_MAX_COND)
        if "seed" in flags:
            sp.add_argument("--seed", type=int, default=0)
        if "threads" in flags:
            sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--out", help="output path (default: stdout)")

    sp = sub.add_parser("sample", help="forward-sample a network to CSV")
    sp.add_argument("--net", required=True)
    sp.add_argument("--n", type=int, required=True)
    common(sp, "seed")

    sp = sub.add_parser("pc", help="FCBF parent/child set of one variable")
    sp.add_argument("--data", required=True)
    sp.add_argument("--target", required=True)
    common(sp, "delta")

    sp = sub.add_parser("learn", help="learn a structure from data")
    sp.add_argument("--data", required=True)
    sp.add_argument("--method", choices=["c", "s"], default="c")
    sp.add_argument("--timings", action="store_true", help="include per-stage wall-clock times")
    common(sp, "delta", "alpha", "ess", "max_cond", "threads")

    sp = sub.add_parser("eval", help="score a learned graph against a true network")
    sp.add_argument("--learned", required=True)
    sp.add_argument("--truth", required=True)
    sp.add_argument("--undirected-not-reversed", action="store_true",
                    help="do not count undirected learned edges as reversals")
    common(sp)

    sp = sub.add_parser("bench", help="repeated sampling benchmark")
    sp.add_argument("--net", required=True)
    sp.add_argument("--n", type=_ints, default=[500, 1000])
    sp.add_argument("--reps", type=int, default=10)
    sp.add_argument("--methods", default="c,s")
    sp.add_argument("--timings", action="store_true",
                    help="include wall-clock times (makes output non-reproducible)")
    common(sp, "delta", "alpha", "ess", "max_cond", "seed", "threads")

    sp = sub.add_parser("delta-sweep", help="FCBF PC quality across thresholds")
    sp.add_argument("--net", required=True)
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--deltas", type=_floats,
                    default=[round(0.01 * k, 2) for k in range(11)])
    sp.add_argument("--reps", type=int, default=10)
    common(sp, "seed", "threads")
    return p


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        conf = _read_config(known.config)
        for action in parser._subparsers._group_actions[0].choices.values():
            dests = {a.dest: a for a in action._actions}
            defaults = {}
            for k, v in conf.items():
                if k in dests:
                    a = dests[k]
                    defaults[k] = a.type(v) if a.type is not None else v
            action.set_defaults(**defaults)
    return parser.parse_args(argv)


def _emit(obj, out) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_graph(path, names) -> Pdag:
    obj = json.loads(Path(path).read_text())
    index = {n: i for i, n in enumerate(names)}

    def idx(v):
        if isinstance(v, int) and 0 <= v < len(names):
            return v
        if v not in index:
            raise UsageError(f"learned graph references unknown node {v!r}")
        return index[v]

    directed = {(idx(a), idx(b)) for a, b in obj.get("directed_edges", [])}
    undirected = {(idx(a), idx(b)) for a, b in obj.get("undirected_edges", [])}
    return Pdag(len(names), frozenset(directed), frozenset(undirected))


def _threads(args) -> int:
    return args.threads if getattr(args, "threads", None) else _default_threads()


def run(args) -> None:
    cmd = args.command
    if cmd == "sample":
        model = parse_bif(args.net)
        ds = forward_sample(model, args.n, args.seed)
        if args.out:
            ds.to_csv(args.out)
        else:
            import csv
            w = csv.writer(sys.stdout, lineterminator="\n")
            w.writerow(ds.variable_names)
            w.writerows(ds.data.tolist())
    elif cmd == "pc":
        ds = load_csv(args.data)
        try:
            c = ds.index_of(args.target)
        except KeyError as e:
            raise UsageError(str(e)) from None
        pcs = learn_pc(ds, c, args.delta, MiCache(ds))
        _emit(pcs.to_json(ds.variable_names), args.out)
    elif cmd == "learn":
        ds = load_csv(args.data)
        cfg = RunConfig(args.method, args.delta, args.alpha, args.ess, 0, args.max_cond, _threads(args))
        tm = {}
        graph, _ = learn(ds, cfg, tm)
        obj = graph.to_json(ds.variable_names)
        if args.timings:
            obj["timings"] = tm
        _emit(obj, args.out)
    elif cmd == "eval":
        model = parse_bif(args.truth)
        learned = _load_graph(args.learned, list(model.variable_names))
        _emit(evaluate(learned, model, undirected_as_reverse=not args.undirected_not_reversed).to_json(),
              args.out)
    elif cmd == "bench":
        model = parse_bif(args.net)
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
        bad = [m for m in methods if m not in ("c", "s")]
        if bad:
            raise UsageError(f"unknown methods {bad}")
        base = RunConfig("c", args.delta, args.alpha, args.ess, args.seed, args.max_cond, 1)
        res = run_bench(model, args.n, args.reps, methods, args.seed, base, _threads(args),
                        args.timings, name=Path(args.net).name.split(".")[0])
        _emit(res, args.out)
    elif cmd == "delta-sweep":
        model = parse_bif(args.net)
        res = run_delta_sweep(model, args.n, args.deltas, args.reps, args.seed, _threads(args))
        res["network"] = Path(args.net).name.split(".")[0]
        _emit(res, args.out)


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    except (UsageError, ValueError, OSError) as e:
        print(f"fcbfnet: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        run(args)
    except (UsageError, DataFormatError, NetworkFormatError, FileNotFoundError) as e:
        print(f"fcbfnet: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001
        print(f"fcbfnet: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
