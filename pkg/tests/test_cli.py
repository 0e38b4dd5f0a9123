import csv
import io
import json

import pytest

from ddkit.cli import main

LINES = [f"tok{i}\n" for i in range(8)]
# holds unless one of the seven needed lines (all but tok4) is gone
NEEDS_ALL_BUT_FIFTH = "\n".join(
    f'grep -qxF "tok{i}" "$1" || exit 1' for i in range(8) if i != 4
)


@pytest.fixture
def example(tmp_path, script):
    inp = tmp_path / "input.txt"
    inp.write_text("".join(LINES))
    return inp, script(NEEDS_ALL_BUT_FIFTH)


def reduce(inp, oracle, tmp_path, *extra):
    report = tmp_path / "report.json"
    argv = ["reduce", "--input", inp, "--oracle", oracle, "--report", report, *extra]
    code = main([str(a) for a in argv])
    return code, (json.loads(report.read_text()) if report.exists() else None)


def test_ddmin_running_example(example, tmp_path):
    inp, oracle = example
    code, report = reduce(inp, oracle, tmp_path, "--alg", "ddmin", "--no-cache", "--check-minimal")
    assert code == 0
    assert report["queries"] == 30
    assert report["final_size"] == 7
    assert report["one_minimal"] is True
    assert report["query_stats"]["categories"]["Revisit"]["total"] == 7
    out = (tmp_path / "input.txt.reduced").read_text()
    assert out == "".join(l for l in LINES if l != "tok4\n")


def test_cdd_running_example_schedule(tmp_path, script):
    inp = tmp_path / "in.txt"
    inp.write_text("".join(LINES))
    oracle = script(f'test "$(cat "$1")" = "$(cat {inp})"')
    code, report = reduce(inp, oracle, tmp_path, "--p0", "0.25", "--probdd-tie", "larger")
    assert code == 0
    assert report["round_sizes"] == [4, 2, 1]
    assert report["queries"] == 14
    assert report["final_size"] == 8


def test_outputs_and_telemetry(example, tmp_path):
    inp, oracle = example
    out = tmp_path / "small.txt"
    tele = tmp_path / "t.json"
    tcsv = tmp_path / "t.csv"
    code, report = reduce(
        inp, oracle, tmp_path, "--alg", "probdd", "--output", out,
        "--telemetry", tele, "--telemetry-csv", tcsv, "--fixpoint",
    )
    assert code == 0
    assert out.read_text().count("\n") == 7
    records = json.loads(tele.read_text())["records"]
    assert len(records) == report["queries"]
    assert len(list(csv.DictReader(io.StringIO(tcsv.read_text())))) == len(records)
    assert report["schema"] == 1 and report["p0"] == 0.1


@pytest.mark.parametrize("p0", ["1.5", "0", "abc"])
def test_bad_p0_is_usage_error(example, tmp_path, p0, capsys):
    inp, oracle = example
    with pytest.raises(SystemExit) as exc:
        main(["reduce", "--input", str(inp), "--oracle", str(oracle), "--p0", p0])
    assert exc.value.code == 1
    assert "p0" in capsys.readouterr().err or p0 == "abc"


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_oracle_rejecting_input(tmp_path, script, capsys):
    inp = tmp_path / "in.txt"
    inp.write_text("a\n")
    code, _ = reduce(inp, script("exit 1"), tmp_path)
    assert code == 2
    assert "does not hold" in capsys.readouterr().err


def test_oracle_unavailable(example, tmp_path):
    inp, _ = example
    code, _ = reduce(inp, tmp_path / "missing-oracle", tmp_path)
    assert code == 3


def test_missing_input_file(tmp_path, script):
    code, _ = reduce(tmp_path / "nope.txt", script("exit 0"), tmp_path)
    assert code == 1


def test_check_minimal(example, tmp_path, capsys):
    inp, oracle = example
    assert main(["check-minimal", "--input", str(inp), "--oracle", str(oracle)]) == 4
    assert "removable\t4\tb'tok4\\n'" in capsys.readouterr().out
    small = tmp_path / "small.txt"
    small.write_text("".join(l for l in LINES if l != "tok4\n"))
    assert main(["check-minimal", "--input", str(small), "--oracle", str(oracle)]) == 0
    bad = tmp_path / "bad.txt"
    bad.write_text("tok0\n")
    assert main(["check-minimal", "--input", str(bad), "--oracle", str(oracle)]) == 2


def test_verify_theory_rows(capsys):
    assert main(["verify-theory", "--p0", "0.25"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [(r["r"], r["s_r"]) for r in rows] == [("0", "4"), ("1", "2"), ("2", "1")]
    assert rows[0]["holds"] == "true"


def test_verify_theory_outputs(tmp_path):
    sched = tmp_path / "s.csv"
    bounds = tmp_path / "b.csv"
    fig = tmp_path / "b.png"
    code = main([
        "verify-theory", "--p0", "0.1", "--output", str(sched),
        "--bounds-csv", str(bounds), "--s-max", "500", "--plot", str(fig),
    ])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(sched.read_text())))
    assert rows[0]["s_r"] == "10"
    assert sum(1 for _ in csv.DictReader(io.StringIO(bounds.read_text()))) == 499
    assert fig.read_bytes()[:4] == b"\x89PNG"


def test_gen_then_reduce(tmp_path, capsys):
    assert main(["gen", "--out", str(tmp_path / "g"), "--n", "40", "--k", "3", "--seed", "2"]) == 0
    info = json.loads(capsys.readouterr().out)
    code, report = reduce(info["input"], info["oracle"], tmp_path, "--alg", "cdd")
    assert code == 0
    assert report["final_size"] == 3
    kept = (tmp_path / "g" / "input.txt.reduced").read_text().split()
    assert kept == [f"tok{i}" for i in info["kernel"]]


def test_gen_rejects_k_above_n(tmp_path):
    assert main(["gen", "--out", str(tmp_path), "--n", "3", "--k", "5"]) == 1


def test_bench_command(tmp_path, capsys):
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({
        "algorithms": ["ddmin", "cdd"],
        "repetitions": 1,
        "benchmarks": [{"name": f"p{s}", "planted": {"n": 30, "k": 3, "seed": s}} for s in range(6)],
    }))
    out = tmp_path / "out"
    assert main(["bench", "--manifest", str(manifest), "--out", str(out)]) == 0
    for name in ("results.csv", "pvalues.csv", "results.json", "queries_by_category.png", "query_counts.png"):
        assert (out / name).stat().st_size > 0
    assert "benchmark,algorithm" in capsys.readouterr().out


def test_same_flags_same_bytes(example, tmp_path):
    inp, oracle = example
    produced = []
    for run in range(2):
        out = tmp_path / f"o{run}.txt"
        tele = tmp_path / f"t{run}.json"
        code, _ = reduce(inp, oracle, tmp_path, "--alg", "probdd", "--seed", "3",
                         "--output", out, "--telemetry", tele)
        assert code == 0
        data = json.loads(tele.read_text())
        for r in data["records"]:
            r.pop("duration")
        produced.append((out.read_bytes(), data))
    assert produced[0] == produced[1]
