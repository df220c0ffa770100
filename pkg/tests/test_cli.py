import json

import pytest

import popverify as pv
from popverify import protofile
from popverify.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_build_threshold_round_trips(tmp_path, capsys):
    out = tmp_path / "tower.proto"
    code, _, _ = run(
        capsys, "build", "threshold", "--sigma", "a", "--k", "2",
        "--alphabet", "a,b", "--out", str(out),
    )
    assert code == 0
    p = protofile.parse(out.read_text())
    assert p.states == frozenset({"0", "1", "2"})


def test_build_writes_stdout_by_default(capsys):
    code, out, _ = run(
        capsys, "build", "modulo", "--coeffs", "a=1", "--r", "1", "--m", "2"
    )
    assert code == 0
    assert "[model]" in out and "kind immediate-transmission" in out


def test_verify_clean_exits_zero(tmp_path, capsys):
    proto = tmp_path / "p.proto"
    pred = tmp_path / "p.pred"
    proto.write_text(
        protofile.emit(pv.build_simple_threshold("a", 2, ("a", "b")))
    )
    pred.write_text("(count a 2)")
    code, out, _ = run(
        capsys, "verify", "--protocol", str(proto), "--predicate", str(pred),
        "--max-n", "3",
    )
    assert code == 0
    assert "all verdicts match" in out


def test_verify_mismatch_exits_one(tmp_path, capsys):
    proto = tmp_path / "p.proto"
    pred = tmp_path / "p.pred"
    proto.write_text(
        protofile.emit(pv.build_simple_threshold("a", 2, ("a", "b")))
    )
    pred.write_text("(count a 3)")
    code, out, _ = run(
        capsys, "verify", "--protocol", str(proto), "--predicate", str(pred),
        "--max-n", "3",
    )
    assert code == 1
    assert "mismatch at" in out


def test_verify_records_format(tmp_path, capsys):
    proto = tmp_path / "p.proto"
    pred = tmp_path / "p.pred"
    proto.write_text(protofile.emit(pv.build_modulo(pv.ModuloParams({"a": 1}, 1, 2))))
    pred.write_text("(mod (v (a 1)) 1 2)")
    code, out, _ = run(
        capsys, "verify", "--protocol", str(proto), "--predicate", str(pred),
        "--max-n", "3", "--format", "records",
    )
    assert code == 0
    records = [json.loads(line) for line in out.splitlines()]
    assert len(records) == 3
    assert all(r["ok"] for r in records)
    assert records[0]["input"] == "{a:1}"
    assert records[0]["verdict"] == "stably computes 1"


def test_verify_budget_exits_three(tmp_path, capsys):
    proto = tmp_path / "p.proto"
    pred = tmp_path / "p.pred"
    proto.write_text(
        protofile.emit(pv.build_simple_threshold("a", 3, ("a", "b")))
    )
    pred.write_text("(count a 3)")
    code, _, _ = run(
        capsys, "verify", "--protocol", str(proto), "--predicate", str(pred),
        "--max-n", "4", "--budget", "2",
    )
    assert code == 3


def test_transform_queued_and_tokens(tmp_path, capsys):
    src = tmp_path / "avg.proto"
    src.write_text(
        protofile.emit(pv.build_threshold_avg(pv.ThresholdParams({"a": 1, "b": -1}, 1)))
    )
    out = tmp_path / "q.proto"
    code, _, _ = run(
        capsys, "transform", "--kind", "queued", "--in", str(src), "--out", str(out)
    )
    assert code == 0
    assert protofile.parse(out.read_text()).kind is pv.ModelKind.QUEUED_TRANSMISSION

    code, _, err = run(
        capsys, "transform", "--kind", "tokens", "--in", str(src), "--out", str(out)
    )
    assert code == 2 and "--sigma-tok" in err

    code, _, _ = run(
        capsys, "transform", "--kind", "tokens", "--in", str(src), "--out", str(out),
        "--sigma-tok", "a", "--k", "2",
    )
    assert code == 0
    assert protofile.parse(out.read_text()).kind is pv.ModelKind.DELAYED_TRANSMISSION


def test_transform_mirror_rejects_wrong_kind(tmp_path, capsys):
    src = tmp_path / "avg.proto"
    src.write_text(
        protofile.emit(pv.build_threshold_avg(pv.ThresholdParams({"a": 1}, 1)))
    )
    code, _, err = run(capsys, "transform", "--kind", "mirrors", "--in", str(src))
    assert code == 2 and "error:" in err


def test_simulate(tmp_path, capsys):
    proto = tmp_path / "p.proto"
    proto.write_text(protofile.emit(pv.build_modulo(pv.ModuloParams({"a": 1}, 1, 2))))
    code, out, _ = run(
        capsys, "simulate", "--protocol", str(proto), "--input", "{a:3}", "--seed", "1"
    )
    assert code == 0
    assert "converged with output 1" in out


def test_simulate_set_union(capsys):
    code, out, _ = run(
        capsys, "simulate", "--set-union-alphabet", "a,b", "--input", "{a:1, b:2}"
    )
    assert code == 0
    assert out.count("agent {a,b}") == 3


def test_analyze(tmp_path, capsys):
    proto = tmp_path / "p.proto"
    proto.write_text(
        protofile.emit(pv.build_simple_threshold("a", 2, ("a", "b")))
    )
    code, out, _ = run(capsys, "analyze", "--protocol", str(proto), "--size-bound", "3")
    assert code == 0
    assert "minimal unstable configurations" in out
    assert "implied truncation constant: 2" in out


def test_pred_eval(tmp_path, capsys):
    pred = tmp_path / "p.pred"
    pred.write_text("(and (count a 2) (not (count b 1)))")
    code, out, _ = run(capsys, "pred", "eval", "--predicate", str(pred), "--input", "{a:2}")
    assert code == 0 and out.strip() == "true"
    code, out, _ = run(
        capsys, "pred", "eval", "--predicate", str(pred), "--input", "{a:2, b:1}"
    )
    assert code == 0 and out.strip() == "false"


def test_usage_errors_exit_two(tmp_path, capsys):
    assert run(capsys, "nosuch")[0] == 2
    assert run(capsys, "verify", "--protocol", "x")[0] == 2
    missing = str(tmp_path / "missing.proto")
    pred = tmp_path / "p.pred"
    pred.write_text("true")
    code, _, err = run(
        capsys, "verify", "--protocol", missing, "--predicate", str(pred), "--max-n", "2"
    )
    assert code == 2 and "error:" in err


def test_parse_error_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.proto"
    bad.write_text("[model]\nkind sideways\n")
    code, _, err = run(capsys, "analyze", "--protocol", str(bad), "--size-bound", "2")
    assert code == 2 and "unknown model kind" in err
