import pytest
from hypothesis import given, settings, strategies as st

from rftsim.distributions import Distribution
from rftsim.errors import ParseError
from rftsim.rft import (
    ElementLabel,
    FaultTreeDef,
    Kind,
    dangling_leaves,
    parse_rft,
    print_rft,
    rewrite_fdep,
    validate_rft,
)

MINIMAL = """
toplevel T;
T and A B;
A be fail=exponential(0.01) repair=exponential(1.0);
B be fail=exponential(0.02) repair=exponential(1.0);
R rbox prio A B;
"""


def test_parse_minimal():
    t = parse_rft(MINIMAL)
    assert len(t.vertices) == 4
    assert t.top == "T"
    assert t.inputs["T"] == ("A", "B")
    assert t.labels["A"].active_fail == Distribution("exponential", (0.01,))
    assert validate_rft(t) == []


def test_parse_preserves_input_order():
    t = parse_rft("""
toplevel T;
T pand B A;
A be fail=exponential(0.1) repair=exponential(1.0);
B be fail=exponential(0.1) repair=exponential(1.0);
R rbox prio B A;
""")
    assert t.inputs["T"] == ("B", "A")
    assert t.inputs["R"] == ("B", "A")


def test_duplicate_input_is_not_a_parse_error():
    # syntax is fine; the structural check rejects it
    t = parse_rft("""
toplevel T;
T and A A;
A be fail=exponential(0.1) repair=exponential(1.0);
R rbox prio A;
""")
    rules = [v.rule for v in validate_rft(t)]
    assert "RepeatedInput" in rules


def test_negative_rate_rejected_at_parse_time():
    with pytest.raises(ParseError):
        parse_rft("""
toplevel A;
A be fail=exponential(-1) repair=exponential(1.0);
R rbox prio A;
""")


def test_zero_rate_rejected():
    with pytest.raises(ParseError):
        parse_rft("""
toplevel A;
A be fail=exponential(0) repair=exponential(1.0);
R rbox prio A;
""")


def test_duplicate_vertex_rejected():
    with pytest.raises(ParseError, match="duplicate"):
        parse_rft("""
toplevel A;
A be fail=exponential(1) repair=exponential(1.0);
A be fail=exponential(1) repair=exponential(1.0);
R rbox prio A;
""")


def test_undeclared_reference_rejected():
    with pytest.raises(ParseError, match="undeclared"):
        parse_rft("toplevel T;\nT and A B;\nA be fail=exponential(1) repair=exponential(1);\n")


def test_missing_toplevel_rejected():
    with pytest.raises(ParseError, match="toplevel"):
        parse_rft("A be fail=exponential(1) repair=exponential(1);\n")


def test_parse_error_carries_location():
    try:
        parse_rft("toplevel T;\nT bogus A;\n")
    except ParseError as exc:
        assert exc.line == 2
    else:
        pytest.fail("expected a parse error")


# --- validation rules -------------------------------------------------------


def _tree(**over):
    """A valid little tree, then mutated per test."""
    be = ElementLabel(Kind.BE, 0,
                      active_fail=Distribution("exponential", (0.1,)),
                      repair=Distribution("exponential", (1.0,)))
    base = dict(
        vertices=["T", "A", "B", "R"],
        labels={"T": ElementLabel(Kind.AND, 2), "A": be, "B": be,
                "R": ElementLabel(Kind.RBOX, 2, policy="priority")},
        inputs={"T": ("A", "B"), "A": (), "B": (), "R": ("A", "B")},
        spare_users={},
        top="T",
    )
    base.update(over)
    return FaultTreeDef(**base)


def test_be_under_two_rboxes():
    t = _tree(vertices=["T", "A", "B", "R", "R2"],
              labels={**_tree().labels,
                      "R2": ElementLabel(Kind.RBOX, 1, policy="priority")},
              inputs={**_tree().inputs, "R2": ("A",)})
    v = [x for x in validate_rft(t) if x.rule == "SingleRbox"]
    assert len(v) == 1 and set(v[0].vertices) == {"A", "R", "R2"}


def test_top_cannot_be_rbox():
    t = _tree(top="R")
    rules = [x.rule for x in validate_rft(t)]
    assert "TopKind" in rules


def test_unassigned_be_rejected():
    t = _tree(inputs={**_tree().inputs, "R": ("A",)},
              labels={**_tree().labels, "R": ElementLabel(Kind.RBOX, 1, policy="priority")})
    rules = [x.rule for x in validate_rft(t)]
    assert "RboxRequired" in rules


def test_cycle_reported_once_with_witness():
    t = parse_rft("""
toplevel T;
T and X A;
X or Y A;
Y and X A;
A be fail=exponential(0.1) repair=exponential(1.0);
R rbox prio A;
""")
    v = [x for x in validate_rft(t) if x.rule == "Acyclicity"]
    assert len(v) == 1
    assert {"X", "Y"} <= set(v[0].vertices)


def test_rbox_input_kinds():
    t = parse_rft("""
toplevel T;
T and A B;
A be fail=exponential(0.1) repair=exponential(1.0);
B be fail=exponential(0.1) repair=exponential(1.0);
R rbox prio A B T;
""")
    rules = [x.rule for x in validate_rft(t)]
    assert "RboxInputKind" in rules


def test_dangling_leaf_is_a_warning_not_violation():
    t = parse_rft("""
toplevel T;
T and A B;
A be fail=exponential(0.1) repair=exponential(1.0);
B be fail=exponential(0.1) repair=exponential(1.0);
C be fail=exponential(0.1) repair=exponential(1.0);
R rbox prio A B C;
""")
    assert validate_rft(t) == []
    assert dangling_leaves(t) == ["C: basic element feeds no gate"]


def test_sg_rules():
    t = parse_rft("""
toplevel T;
T and G H;
G sg A S;
H sg A S;
A be fail=exponential(0.1) repair=exponential(1.0);
S sbe fail=exponential(0.1) dormant=exponential(0.01) repair=exponential(1.0);
R rbox prio A S;
""")
    rules = [x.rule for x in validate_rft(t)]
    assert "SingleSg" in rules  # A drives both spare gates


def test_sbe_cannot_feed_plain_gate():
    t = parse_rft("""
toplevel T;
T and S A;
A be fail=exponential(0.1) repair=exponential(1.0);
S sbe fail=exponential(0.1) dormant=exponential(0.01) repair=exponential(1.0);
R rbox prio A S;
""")
    rules = [x.rule for x in validate_rft(t)]
    assert "SbeParent" in rules


# --- fdep rewrite -----------------------------------------------------------


def test_fdep_rewrite_reroutes_through_or():
    t = parse_rft("""
toplevel G;
G and A X;
D fdep K A;
K be fail=exponential(0.1) repair=exponential(1.0);
A be fail=exponential(0.1) repair=exponential(1.0);
X be fail=exponential(0.1) repair=exponential(1.0);
R rbox prio K A X;
""")
    assert validate_rft(t) == []
    r = rewrite_fdep(t)
    assert all(r.kind(v) != Kind.FDEP for v in r.vertices)
    orname = "fdepor_D_A"
    assert r.inputs["G"] == (orname, "X")
    assert r.inputs[orname] == ("K", "A")
    assert r.labels[orname] == ElementLabel(Kind.OR, 2)
    assert validate_rft(r) == []


def test_fdep_two_dependents_two_fresh_ors():
    t = parse_rft(open("tests/corpus/fdep_pand.rft").read())
    r = rewrite_fdep(t)
    assert r.inputs["T"] == ("fdepor_D_A", "fdepor_D_B")
    assert r.inputs["fdepor_D_A"] == ("K", "A")
    assert r.inputs["fdepor_D_B"] == ("K", "B")
    # the raw elements still sit under their repair box
    assert r.inputs["R"] == ("K", "A", "B")
    assert validate_rft(r) == []


def test_fdep_rewrite_idempotent():
    t = parse_rft(MINIMAL)
    assert rewrite_fdep(t) is t
    t2 = rewrite_fdep(parse_rft(open("tests/corpus/fdep_pand.rft").read()))
    assert rewrite_fdep(t2) is t2


@pytest.mark.parametrize("name", [
    "single_be.rft", "and2_indep.rft", "deep.rft", "fdep_pand.rft",
    "sg_2x2.rft", "nonexp_mix.rft",
])
def test_corpus_roundtrip(name):
    text = open(f"tests/corpus/{name}").read()
    t = parse_rft(text)
    printed = print_rft(t)
    assert parse_rft(printed) == t
    # one canonicalization pass reaches a fixpoint
    assert print_rft(parse_rft(printed)) == printed


# --- a generated-tree property ----------------------------------------------


@st.composite
def small_trees(draw):
    n_be = draw(st.integers(2, 5))
    bes = [f"E{i}" for i in range(n_be)]
    lines = []
    for b in bes:
        lam = draw(st.floats(0.01, 2.0, allow_nan=False))
        mu = draw(st.floats(0.1, 3.0, allow_nan=False))
        lines.append(f"{b} be fail=exponential({lam!r}) repair=exponential({mu!r});")
    kind = draw(st.sampled_from(["and", "or", "pand"]))
    if kind == "pand" and n_be < 2:
        kind = "and"
    lines.append(f"T {kind} {' '.join(bes)};")
    lines.append(f"R rbox prio {' '.join(bes)};")
    lines.insert(0, "toplevel T;")
    return "\n".join(lines) + "\n"


@given(small_trees())
@settings(max_examples=40, deadline=None)
def test_generated_trees_roundtrip_and_validate(src):
    t = parse_rft(src)
    assert validate_rft(t) == []
    assert parse_rft(print_rft(t)) == t
    r = rewrite_fdep(t)
    assert validate_rft(r) == []
