"""Why simulation of these models is sound: weak determinism.

Urgent reactions may race inside one instant; the analysis shows the races
cannot matter.  Spare-gate sharing needs the exhaustive composed check --
the approximate triggering argument genuinely cannot certify it.

Run:  python demos/03_determinism.py
"""

from rftsim.compiler import compile_tree
from rftsim.determinism import check_model
from rftsim.rft import parse_rft

SPARE_FREE = """
toplevel T;
T pand A B;
A be fail=exponential(0.1) repair=exponential(1.0);
B be fail=exponential(0.1) repair=exponential(1.0);
R rbox prio A B;
"""

SHARED_SPARE = """
toplevel T;
T and G1 G2;
G1 sg M1 S;
G2 sg M2 S;
M1 be fail=exponential(0.01) repair=exponential(1.0);
M2 be fail=exponential(0.02) repair=exponential(1.0);
S sbe fail=exponential(0.015) dormant=exponential(0.001) repair=exponential(1.0);
R rbox prio M1 M2 S;
"""

for label, src in (("priority-AND tree", SPARE_FREE),
                   ("two gates sharing one spare", SHARED_SPARE)):
    rep = check_model(compile_tree(parse_rft(src)))
    print(f"== {label}")
    print(f"   weakly deterministic: {rep.weakly_deterministic} "
          f"(certified by {rep.certified_by})")
    for comp in rep.components:
        if comp.confluence.pairs:
            print(f"   {comp.name}: non-confluent pairs in isolation: "
                  f"{comp.confluence.pairs}")
    for note in rep.notes:
        print(f"   note: {note}")
    print()
