import json
import subprocess
import sys

import pytest

from fcbfnet.benchmark import RunConfig, replicate_seed, run_bench, run_delta_sweep
from fcbfnet.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from fcbfnet.dataset import parse_bif

from test_dataset import NETS

ASIA = str(NETS / "asia.bif.gz")


@pytest.fixture
def asia_csv(tmp_path):
    out = tmp_path / "asia.csv"
    assert main(["sample", "--net", ASIA, "--n", "3000", "--seed", "1", "--out", str(out)]) == EXIT_OK
    return out


def run_json(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    assert main([*argv, "--out", str(out)]) == EXIT_OK
    return out.read_text()


def test_sample_writes_csv(asia_csv):
    lines = asia_csv.read_text().splitlines()
    assert lines[0].split(",")[0] == "asia"
    assert len(lines) == 3001


def test_pc_subcommand(asia_csv, tmp_path):
    obj = json.loads(run_json(["pc", "--data", str(asia_csv), "--target", "either"], tmp_path))
    assert obj["target"] == "either"
    assert set(obj) == {"target", "members", "relevance"}
    assert obj["relevance"] == sorted(obj["relevance"], reverse=True)


@pytest.mark.parametrize("method,keys", [
    ("c", {"nodes", "directed_edges", "undirected_edges", "conflicts"}),
    ("s", {"nodes", "directed_edges"}),
])
def test_learn_and_eval(asia_csv, tmp_path, method, keys):
    text = run_json(["learn", "--data", str(asia_csv), "--method", method, "--delta", "0.01"], tmp_path)
    assert set(json.loads(text)) == keys
    rep = json.loads(run_json(["eval", "--learned", str(tmp_path / "out.json"), "--truth", ASIA],
                              tmp_path, "rep.json"))
    assert rep["shd"] == rep["miss"] + rep["extra"] + rep["reverse"]


def test_learn_timings_flag(asia_csv, tmp_path):
    obj = json.loads(run_json(["learn", "--data", str(asia_csv), "--timings"], tmp_path))
    assert set(obj["timings"]) == {"pc", "skeleton", "orient", "total"}


def test_usage_errors_exit_two(tmp_path, asia_csv):
    assert main(["bogus"]) == EXIT_USAGE
    assert main(["learn", "--data", str(tmp_path / "missing.csv")]) == EXIT_USAGE
    assert main(["pc", "--data", str(asia_csv), "--target", "nope"]) == EXIT_USAGE
    bad = tmp_path / "bad.csv"
    bad.write_text("A,B\n0,1,2\n")
    assert main(["learn", "--data", str(bad)]) == EXIT_USAGE
    assert main(["bench", "--net", ASIA, "--methods", "q"]) == EXIT_USAGE


def test_runtime_error_exits_one(asia_csv):
    assert main(["learn", "--data", str(asia_csv), "--alpha", "2"]) == EXIT_RUNTIME


def test_config_file_supplies_defaults(tmp_path, asia_csv):
    conf = tmp_path / "run.conf"
    conf.write_text("# defaults\ndelta = 10\n")
    obj = json.loads(run_json(["--config", str(conf), "learn", "--data", str(asia_csv)], tmp_path))
    assert obj["undirected_edges"] == [] and obj["directed_edges"] == []


def test_thread_env_var(monkeypatch, tmp_path, asia_csv):
    a = run_json(["learn", "--data", str(asia_csv)], tmp_path, "a.json")
    monkeypatch.setenv("FCBFNET_THREADS", "3")
    b = run_json(["learn", "--data", str(asia_csv)], tmp_path, "b.json")
    assert a == b
    monkeypatch.setenv("FCBFNET_THREADS", "many")
    assert main(["learn", "--data", str(asia_csv)]) == EXIT_USAGE


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "fcbfnet.cli", "sample", "--net", ASIA, "--n", "5"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert len(res.stdout.splitlines()) == 6


# -- benchmark runner ------------------------------------------------------

def test_run_config_validation():
    for bad in [dict(method="x"), dict(delta=-1), dict(alpha=1.0), dict(ess=0), dict(threads=0)]:
        with pytest.raises(ValueError):
            RunConfig(**bad)
    assert RunConfig().delta == 0.05 and RunConfig().alpha == 0.01 and RunConfig().max_cond == 8


def test_replicate_seeds_distinct():
    seeds = {replicate_seed(0, n, r) for n in (500, 1000) for r in range(10)}
    assert len(seeds) == 20


def test_bench_table_shape():
    res = run_bench(parse_bif(ASIA), sizes=(300,), reps=3, seed=2, name="asia")
    algos = [r["algorithm"] for r in res["rows"]]
    assert algos == ["F2SL-c", "F2SL-s", "FCBF"]
    row = res["rows"][0]
    for key in ("shd", "reverse", "miss", "extra", "ar_f1"):
        assert set(row[key]) == {"mean", "std"}
    assert len(row["runs"]) == 3
    assert "time" not in row


def test_bench_thread_independent():
    model = parse_bif(ASIA)
    a = run_bench(model, sizes=(300,), reps=4, seed=5, threads=1)
    b = run_bench(model, sizes=(300,), reps=4, seed=5, threads=4)
    assert json.dumps(a) == json.dumps(b)


def test_delta_sweep_single_value_and_errors():
    model = parse_bif(ASIA)
    res = run_delta_sweep(model, 500, [0.05], reps=2, seed=1)
    assert res["deltas"] == [0.05] and len(res["f1"]) == 1
    with pytest.raises(ValueError):
        run_delta_sweep(model, 500, [-0.1], reps=2)
    with pytest.raises(ValueError):
        run_delta_sweep(model, 500, [0.05], reps=0)


def test_bench_cli_byte_identical(tmp_path):
    argv = ["bench", "--net", ASIA, "--n", "300", "--reps", "2", "--seed", "3"]
    first = run_json(argv, tmp_path, "a.json")
    assert run_json(argv + ["--threads", "4"], tmp_path, "b.json") == first
