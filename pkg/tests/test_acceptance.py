"""Acceptance suite: one test per exit criterion, each printing a verdict line.

Every expected number is produced by an independent oracle in
``oracles.py`` (uniformization or a dense stationary solve over chains
written down from the gate contracts, and a quadrature-based renewal
formula), never by the code under test.  Seeds are pinned, so the
estimates and their error margins are reproducible bit for bit.
"""

import time

import pytest

import oracles
from conftest import CORPUS, corpus_files, drive, load_compiled, load_tree
from rftsim.cli import main as cli_main
from rftsim.compiler import compile_tree
from rftsim.determinism import check_confluence, expected_nonconfluent, triggering
from rftsim.iosa import check_def1, expand, parse_model, print_model, parse_module
from rftsim.rft import Kind, parse_rft, print_rft
from rftsim.simulator import (
    Simulation,
    estimate_unavailability,
    estimate_unreliability,
    order_invariance_probe,
)

SPARE_FREE = [
    "single_be.rft", "and2_indep.rft", "or2_indep.rft", "pand2.rft",
    "pand3.rft", "vot13.rft", "vot23.rft", "vot33.rft", "shared_rbox.rft",
    "fcfs3.rft", "random2.rft", "deep.rft", "fdep_pand.rft", "nonexp.rft",
    "nonexp_mix.rft", "dangling.rft",
]
SG_CONFIGS = ["sg_2x1.rft", "sg_2x2.rft", "sg_3x2.rft", "sg_1x3.rft"]


def _report(criterion, ok, detail=""):
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def test_criterion_1_template_conformance():
    """Every per-element template expands to a valid automaton; the
    published non-confluence witness for the AND gate is found verbatim."""
    t0 = time.perf_counter()
    sources = {
        "single_be.rft": ["BE_A", "RBOX_R"],
        "and2_indep.rft": ["AND_T"],
        "or2_indep.rft": ["OR_T"],
        "pand2.rft": ["PAND_T"],
        "vot23.rft": ["VOT_T"],
        "fcfs3.rft": ["RBOX_R"],
        "random2.rft": ["RBOX_R"],
        "sg_2x1.rft": ["SBE_S", "MUX_S", "SG_G1"],
    }
    checked = 0
    for src, names in sources.items():
        compiled = compile_tree(load_tree(src))
        for name in names:
            aut = expand(compiled.module(name), compiled.table)
            violations = check_def1(aut)
            assert violations == [], (src, name, violations)
            checked += 1

    compiled = compile_tree(load_tree("and2_indep.rft"))
    aut = expand(compiled.module("AND_T"), compiled.table)
    rep = check_confluence(aut)
    witnesses = [frozenset(w.split(","))
                 for w in rep.non_confluent.get(("f_A", "u_A"), [])]
    target = frozenset({"count=1", "informf=false", "informu=false"})
    assert target in witnesses, witnesses
    elapsed = time.perf_counter() - t0
    _report(1, elapsed < 1.0,
            f"{checked} templates valid, witness found, {elapsed:.2f}s < 1s")


def test_criterion_2_nonconfluence_and_triggering_regression():
    """Per-module pairs stay inside the expected-pair oracle and the
    triggering relations equal the published per-element sets."""
    t0 = time.perf_counter()
    corpus = SPARE_FREE + SG_CONFIGS
    assert len(corpus) >= 10
    kinds_seen = set()
    published_scope = (Kind.BE, Kind.SBE, Kind.AND, Kind.OR, Kind.PAND,
                       Kind.VOT, Kind.RBOX, "mux", "monitor")
    for name in corpus:
        tree = load_tree(name)
        kinds_seen |= {tree.kind(v) for v in tree.vertices}
        compiled = load_compiled(name)
        allowed = expected_nonconfluent(tree)
        top = compiled.tree.top
        allowed.add(tuple(sorted((f"f_{top}", f"u_{top}"))))
        gate_info = {g.module: g for g in compiled.gates}
        for mod in compiled.modules:
            info = gate_info[mod.name]
            aut = expand(mod, compiled.table)
            if info.kind in (Kind.SG, "mux"):
                continue  # settled by partial composition, criterion 3
            rep = check_confluence(aut)
            if info.kind == Kind.SBE:
                pairs = set(rep.non_confluent)
                pairs.discard(tuple(sorted((f"d_{info.vertex}", f"e_{info.vertex}"))))
                assert not pairs, (name, mod.name, pairs)
                continue
            for pair in rep.pairs:
                assert pair in allowed, (name, mod.name, pair)
            trig = triggering(aut).edges
            v = info.vertex
            if info.kind in (Kind.BE, Kind.SBE, "monitor"):
                assert trig == set(), (name, mod.name, trig)
            elif info.kind in (Kind.AND, Kind.OR, Kind.VOT):
                want = {(f"f_{x}", f"f_{v}") for x in info.inputs}
                want |= {(f"u_{x}", f"u_{v}") for x in info.inputs}
                assert trig == want, (name, mod.name)
            elif info.kind == Kind.PAND:
                want = {(f"f_{x}", f"f_{v}") for x in info.inputs}
                want.add((f"u_{info.inputs[1]}", f"u_{v}"))
                assert trig == want, (name, mod.name)
            elif info.kind == Kind.RBOX:
                policy = compiled.tree.labels[v].policy
                if policy == "priority":
                    assert trig == set(), (name, mod.name, trig)
                else:
                    tau = f"tau_{mod.name}"
                    assert trig == {(tau, f"r_{x}") for x in info.inputs}
    assert set(Kind.ALL) <= kinds_seen | {Kind.FDEP}
    assert Kind.FDEP in {load_tree("fdep_pand.rft").kind(v)
                         for v in load_tree("fdep_pand.rft").vertices}
    elapsed = time.perf_counter() - t0
    _report(2, elapsed < 10.0,
            f"{len(corpus)} trees, every element kind, {elapsed:.2f}s < 10s")


def test_criterion_3_weak_determinism_verdicts():
    """The checker certifies every spare-free corpus tree and all four
    spare-sharing configurations (the latter via partial composition)."""
    t0 = time.perf_counter()
    for name in SPARE_FREE:
        rc = cli_main(["check", str(CORPUS / name)])
        assert rc == 0, name
    for name in SG_CONFIGS:
        from rftsim.determinism import check_model

        rep = check_model(load_compiled(name))
        assert rep.weakly_deterministic, name
        assert rep.clusters and all(ok for _, _, ok in rep.clusters), name
    elapsed = time.perf_counter() - t0
    _report(3, elapsed < 60.0,
            f"{len(SPARE_FREE)} spare-free trees + {len(SG_CONFIGS)} "
            f"spare configurations, {elapsed:.1f}s < 60s")


def test_criterion_4_simulator_vs_ctmc_oracles():
    """Exponential-only corpus models against brute-force chain oracles,
    each within 2 percent relative error."""
    t0 = time.perf_counter()
    checks = []

    est = estimate_unavailability(load_compiled("single_be.rft"), 20000.0, 300, 7)
    want = oracles.single_be_unavailability(0.01, 1.0)
    checks.append(("single BE unavailability", est.value, want))

    est = estimate_unavailability(load_compiled("or2_indep.rft"), 3000.0, 400, 13)
    want = oracles.or2_unavailability(0.1, 1.0, 0.1, 1.0)
    checks.append(("OR of independent pairs", est.value, want))

    est = estimate_unreliability(load_compiled("and2_indep.rft"), 50.0, 30000, 11)
    want = oracles.and2_unreliability(0.1, 1.0, 0.1, 1.0, 50.0)
    checks.append(("AND first passage", est.value, want))

    est = estimate_unavailability(load_compiled("shared_rbox.rft"), 4000.0, 400, 14)
    want = oracles.shared_rbox_and2_unavailability(0.1, 0.1, 1.0)
    checks.append(("shared repair box", est.value, want))

    est = estimate_unreliability(load_compiled("pand2.rft"), 50.0, 30000, 12)
    want = oracles.pand2_unreliability(0.1, 1.0, 0.1, 1.0, 50.0)
    checks.append(("PAND first passage", est.value, want))

    worst = 0.0
    for label, got, want in checks:
        rel = abs(got - want) / want
        worst = max(worst, rel)
        assert rel < 0.02, (label, got, want, rel)
    elapsed = time.perf_counter() - t0
    _report(4, elapsed < 300.0,
            f"5 oracle comparisons, worst relative error {worst:.3%}, "
            f"{elapsed:.0f}s < 300s")


def test_criterion_5_order_invariance_probe():
    """Tie-break policies cannot matter: overlapping intervals everywhere,
    and identical (seed, policy) reproduces traces bit for bit."""
    t0 = time.perf_counter()
    for path in corpus_files():
        rep = order_invariance_probe(load_compiled(path.name), 300.0, 40, 23)
        assert rep.intervals_overlap, path.name
        # confluence makes lex and revlex literally identical
        assert rep.estimates["lex"].value == rep.estimates["revlex"].value, path.name

    import io

    for name in ("shared_rbox.rft", "sg_2x1.rft", "random2.rft"):
        texts = []
        for _ in range(2):
            buf = io.StringIO()
            sim = Simulation(load_compiled(name), seed=29, policy="random",
                             trace=buf)
            for i in range(5):
                sim.run(i, 200.0)
            texts.append(buf.getvalue())
        assert texts[0] == texts[1], name
    elapsed = time.perf_counter() - t0
    _report(5, True, f"probe over {len(corpus_files())} trees, "
                     f"bit-identical traces, {elapsed:.0f}s")


def test_criterion_6_non_exponential_sanity():
    """Uniform failure and two-stage repair against the renewal oracle."""
    est = estimate_unavailability(load_compiled("nonexp.rft"), 3000.0, 300, 15)
    want = oracles.renewal_unavailability_uniform_erlang(1.0, 2.0, 2, 1.0)
    rel = abs(est.value - want) / want
    _report(6, rel < 0.02, f"sim {est.value:.5f} vs renewal {want:.5f}, "
                           f"relative error {rel:.3%} < 2%")


def test_criterion_7_roundtrips():
    """Tree and model text formats reach a printing fixpoint after one
    canonicalization pass, across the whole corpus."""
    files = corpus_files()
    assert len(files) >= 20
    for path in files:
        text = path.read_text()
        tree = parse_rft(text)
        once = print_rft(tree)
        assert parse_rft(once) == tree
        assert print_rft(parse_rft(once)) == once

        compiled = load_compiled(path.name)
        once = print_model(compiled.modules)
        again = parse_model(once)
        assert print_model(again) == once
        assert again == compiled.modules
    _report(7, True, f"{len(files)} tree and model files reach fixpoints")
