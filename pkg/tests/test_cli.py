"""Command-line behavior: exit codes, strategy arguments, and determinism.

Most cases drive main() in-process; byte-level determinism across hash
seeds runs the installed module in subprocesses.
"""

import json
import os
import subprocess
import sys

from loopcert import parse_loop_certificate, parse_term, validate_loop
from loopcert.cli import main

EXIT_YES = 0
EXIT_NO = 1
EXIT_UNKNOWN = 2
EXIT_INVALID = 3


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def check(capsys, data_dir, trs, loop, strategy, *extra):
    return run(
        capsys,
        "check",
        "--trs", str(data_dir / trs),
        "--loop", str(data_dir / loop),
        "--strategy", strategy,
        *extra,
    )


# ---------------------------------------------------------------------------
# Exit codes


def test_yes_exits_zero(capsys, data_dir):
    code, out, err = check(
        capsys, data_dir, "factorial.trs", "factorial_loop.json",
        "leftmost-outermost",
    )
    assert code == EXIT_YES
    assert out.startswith("YES: loop under strategy leftmost-outermost")
    assert err == ""


def test_no_exits_one(capsys, data_dir):
    code, out, _ = check(
        capsys, data_dir, "factorial.trs", "factorial_inner_loop.json", "outermost"
    )
    assert code == EXIT_NO
    assert out.startswith("NO: not a loop under strategy outermost")


def test_unknown_exits_two(capsys, data_dir):
    code, out, _ = check(
        capsys, data_dir, "growing.trs", "growing_loop.json", "leftmost"
    )
    assert code == EXIT_UNKNOWN
    assert out.startswith("UNKNOWN: undecided for strategy leftmost")


def test_unknown_strategy_exits_three(capsys, data_dir):
    code, out, err = check(
        capsys, data_dir, "factorial.trs", "factorial_loop.json", "bogus"
    )
    assert code == EXIT_INVALID
    assert out == ""
    assert err.startswith("error: unknown strategy 'bogus'; expected one of ")


def test_missing_file_exits_three(capsys, data_dir):
    code, _, err = check(
        capsys, data_dir, "nonesuch.trs", "factorial_loop.json", "leftmost"
    )
    assert code == EXIT_INVALID
    assert "nonesuch.trs" in err


def test_shape_mismatch_exits_three(capsys, data_dir):
    code, _, err = check(
        capsys, data_dir, "factorial.trs", "factorial_par_inner_loop.json",
        "leftmost",
    )
    assert code == EXIT_INVALID
    assert "single-redex" in err


# ---------------------------------------------------------------------------
# Options


def test_bound_flag_reaches_the_solver(capsys, data_dir):
    code, out, _ = check(
        capsys, data_dir, "shift.trs", "shift_loop.json", "leftmost",
        "--bound", "4", "--format", "json",
    )
    assert code == EXIT_UNKNOWN
    doc = json.loads(out)
    assert doc["verdict"] == "unknown"
    assert doc["bound"] == 4
    assert len(doc["open_problems"]) == 1

    code, out, _ = check(
        capsys, data_dir, "shift.trs", "shift_loop.json", "leftmost",
        "--format", "json",
    )
    assert code == EXIT_NO
    assert json.loads(out)["evidence"]["witness"] == {"n": 9}


def test_forbidden_pattern_strategy_from_file(capsys, data_dir):
    code, out, _ = check(
        capsys, data_dir, "stream.trs", "stream_loop.json",
        f"forbidden:{data_dir / 'stream_patterns.txt'}", "--format", "json",
    )
    assert code == EXIT_NO
    doc = json.loads(out)
    assert doc["evidence"]["instance"]["family"] == "pattern-here"
    assert doc["evidence"]["witness"] == {"n": 0}


def test_restricted_strategy_from_file(capsys, data_dir, tmp_path):
    lhss = tmp_path / "restricted.trs"
    lhss.write_text("(VAR x)\n(RULES chk(x) -> false)\n")
    code, out, _ = check(
        capsys, data_dir, "factorial.trs", "factorial_loop.json",
        f"q-restricted:{lhss}", "--format", "json",
    )
    assert code == EXIT_NO
    assert json.loads(out)["evidence"]["instance"]["step"] == 4


def test_context_sensitive_strategy_from_file(capsys, data_dir, tmp_path):
    replacement = tmp_path / "mu.txt"
    replacement.write_text("times:\n")
    code, out, _ = check(
        capsys, data_dir, "factorial.trs", "factorial_loop.json",
        f"context-sensitive:{replacement}", "--format", "json",
    )
    assert code == EXIT_NO
    doc = json.loads(out)
    assert doc["evidence"]["instance"]["family"] == "pattern-here"
    assert doc["evidence"]["instance"]["step"] == 1


# ---------------------------------------------------------------------------
# Finding loops


def test_find_then_check_round_trip(capsys, data_dir, tmp_path):
    code, out, _ = run(
        capsys,
        "find",
        "--trs", str(data_dir / "factorial.trs"),
        "--depth", "6",
        "--start", "fact(x,y)",
    )
    assert code == EXIT_YES
    docs = json.loads(out)
    wanted = [
        d for d in docs
        if d["context"] == "times([],s(x))" and d["subst"] == {"x": "s(x)"}
    ]
    assert wanted

    cert_file = tmp_path / "found.json"
    cert_file.write_text(json.dumps(wanted[0]))
    code, out, _ = run(
        capsys,
        "check",
        "--trs", str(data_dir / "factorial.trs"),
        "--loop", str(cert_file),
        "--strategy", "leftmost-outermost",
    )
    assert code == EXIT_YES
    assert out.startswith("YES")


def test_find_reports_nothing_with_exit_one(capsys, tmp_path):
    terminating = tmp_path / "flat.trs"
    terminating.write_text("(RULES a -> b)\n")
    code, out, _ = run(capsys, "find", "--trs", str(terminating))
    assert code == EXIT_NO
    assert out == "[]\n"


def test_find_emits_valid_certificates(capsys, tmp_path):
    trs_file = tmp_path / "self.trs"
    trs_file.write_text("(VAR x)\n(RULES f(x) -> f(f(x)))\n")
    code, out, _ = run(capsys, "find", "--trs", str(trs_file), "--depth", "2")
    assert code == EXIT_YES
    docs = json.loads(out)
    assert docs

    from loopcert import parse_trs

    trs = parse_trs(trs_file.read_text())
    closings = set()
    for doc in docs:
        cert = parse_loop_certificate(json.dumps(doc), trs)
        validate_loop(trs, cert)
        closings.add((doc["context"], tuple(doc["subst"].items())))
    assert ("f([])", ()) in closings


# ---------------------------------------------------------------------------
# Determinism across interpreter hash seeds


def run_module(args, seed):
    env = dict(os.environ, PYTHONHASHSEED=seed)
    return subprocess.run(
        [sys.executable, "-m", "loopcert", *args],
        capture_output=True,
        text=True,
        env=env,
    )


def test_output_bytes_do_not_depend_on_hash_seed(data_dir):
    argv = [
        "check",
        "--trs", str(data_dir / "factorial.trs"),
        "--loop", str(data_dir / "factorial_inner_loop.json"),
        "--strategy", "innermost",
        "--format", "json",
    ]
    first = run_module(argv, "0")
    second = run_module(argv, "1")
    assert first.returncode == second.returncode == EXIT_YES
    assert first.stdout == second.stdout

    argv = ["find", "--trs", str(data_dir / "factorial.trs"), "--depth", "5"]
    first = run_module(argv, "0")
    second = run_module(argv, "1")
    assert first.returncode == second.returncode
    assert first.stdout == second.stdout
