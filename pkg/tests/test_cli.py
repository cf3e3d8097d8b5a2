import os

import pytest

from conftest import CORPUS, corpus_text
from rftsim.cli import main
from rftsim.iosa import parse_model


def _machine_section(capsys):
    out = capsys.readouterr().out
    inside = False
    kv = {}
    for line in out.splitlines():
        if line.strip() == "---":
            inside = not inside
            continue
        if inside and "=" in line:
            k, v = line.split("=", 1)
            kv[k] = v
    return kv, out


def test_validate_ok(capsys):
    rc = main(["validate", str(CORPUS / "and2_indep.rft")])
    kv, _ = _machine_section(capsys)
    assert rc == 0
    assert kv["valid"] == "true"


def test_validate_negative_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.rft"
    bad.write_text("""
toplevel T;
T and A A;
A be fail=exponential(0.1) repair=exponential(1.0);
R rbox prio A;
R2 rbox prio A;
""")
    rc = main(["validate", str(bad)])
    kv, out = _machine_section(capsys)
    assert rc == 1
    assert "SingleRbox" in out and "RepeatedInput" in out


def test_unreadable_path_exit_2(capsys):
    assert main(["validate", "/nonexistent/x.rft"]) == 2


def test_syntax_error_exit_2(tmp_path, capsys):
    p = tmp_path / "syn.rft"
    p.write_text("toplevel ;")
    assert main(["validate", str(p)]) == 2


def test_usage_error_exit_64(tmp_path, capsys):
    p = tmp_path / "t.rft"
    p.write_text(corpus_text("single_be.rft"))
    rc = main(["simulate", str(p), "--metric", "unavailability",
               "--horizon", "10", "--runs", "0"])
    assert rc == 64
    assert main(["bogus-subcommand"]) == 64


def test_compile_writes_reloadable_model(tmp_path, capsys):
    out = tmp_path / "m.iosa"
    rc = main(["compile", str(CORPUS / "and2_indep.rft"), "-o", str(out)])
    assert rc == 0
    mods = parse_model(out.read_text())
    assert {m.name for m in mods} == {
        "AND_T", "BE_A", "BE_B", "RBOX_RA", "RBOX_RB", "MONITOR"}
    # manifest header present
    assert out.read_text().startswith("//")


def test_compile_invalid_tree_writes_nothing(tmp_path, capsys):
    bad = tmp_path / "bad.rft"
    bad.write_text("""
toplevel R;
A be fail=exponential(0.1) repair=exponential(1.0);
R rbox prio A;
""")
    out = tmp_path / "never.iosa"
    rc = main(["compile", str(bad), "-o", str(out)])
    assert rc == 1
    assert not out.exists()


def test_compile_output_checks_clean(tmp_path, capsys):
    out = tmp_path / "m.iosa"
    assert main(["compile", str(CORPUS / "fcfs3.rft"), "-o", str(out)]) == 0
    assert main(["check", str(out)]) == 0
    kv, _ = _machine_section(capsys)
    assert kv["weakly_deterministic"] == "true"


def test_check_tree_exit_codes(capsys):
    assert main(["check", str(CORPUS / "pand3.rft")]) == 0
    assert main(["check", str(CORPUS / "sg_2x1.rft")]) == 0
    kv, out = _machine_section(capsys)
    assert "MUX_S" in kv["clusters"]


def test_check_violator_iosa_exit_1(tmp_path, capsys):
    p = tmp_path / "v.iosa"
    p.write_text("""
module GEN
  g : [0..2] init 0;
  [c!!] g = 0 -> (g' = 1);
  [d!!] g = 0 -> (g' = 2);
endmodule
""")
    rc = main(["check", str(p)])
    kv, out = _machine_section(capsys)
    assert rc == 1
    assert kv["weakly_deterministic"] == "false"
    assert "counterexample" in kv


def test_simulate_report_and_trace(tmp_path, capsys):
    tr = tmp_path / "trace.txt"
    rc = main(["simulate", str(CORPUS / "single_be.rft"),
               "--metric", "unavailability", "--horizon", "2000",
               "--runs", "40", "--seed", "9", "--trace", str(tr)])
    kv, out = _machine_section(capsys)
    assert rc == 0
    est = float(kv["estimate"])
    assert 0.0 < est < 0.05
    assert kv["weakly_deterministic"] == "true"
    last = -1.0
    for line in tr.read_text().splitlines():
        if line.startswith("run="):
            last = -1.0  # each run starts its own clock
            continue
        t = float(line.split()[0].split("=", 1)[1])
        assert t >= last
        last = t


def test_simulate_deterministic_given_seed(capsys):
    argv = ["simulate", str(CORPUS / "shared_rbox.rft"), "--metric",
            "unreliability", "--horizon", "30", "--runs", "50", "--seed", "5"]
    assert main(argv) == 0
    kv1, _ = _machine_section(capsys)
    assert main(argv) == 0
    kv2, _ = _machine_section(capsys)
    assert kv1["estimate"] == kv2["estimate"]
