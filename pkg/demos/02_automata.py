"""From tree elements to stochastic automata.

Each vertex compiles to a small guarded-command module; expanding a module
enumerates its reachable valuations as a finite automaton with clocks.

Run:  python demos/02_automata.py
"""

from rftsim.compiler import compile_tree, emit_iosa
from rftsim.iosa import check_def1, closed, compose, dump, expand
from rftsim.rft import parse_rft

tree = parse_rft("""
toplevel T;
T and A B;
A be fail=exponential(0.01) repair=exponential(1.0);
B be fail=exponential(0.02) repair=exponential(1.0);
R rbox prio A B;
""")
compiled = compile_tree(tree)
print("modules:", ", ".join(m.name for m in compiled.modules))

print("\nthe element module for A, as text:")
print(emit_iosa(compiled).split("module BE_A")[1].split("endmodule")[0]
      .join(("module BE_A", "endmodule")))

be = expand(compiled.module("BE_A"), compiled.table)
print(f"\nBE_A expands to {be.n_states} states; "
      f"structural checks: {check_def1(be) or 'all pass'}")
print(dump(be))

rbox = expand(compiled.module("RBOX_R"), compiled.table)
pair = compose(be, rbox)
print(f"BE_A || RBOX_R: {pair.n_states} states, closed = {closed(pair)}")
