"""Monte Carlo dependability estimation, checked against closed forms.

Run:  python demos/04_simulation.py
"""

import math

from rftsim.compiler import compile_tree
from rftsim.rft import parse_rft
from rftsim.simulator import (
    Simulation,
    estimate_unavailability,
    estimate_unreliability,
    order_invariance_probe,
)

tree = parse_rft("""
toplevel A;
A be fail=exponential(0.01) repair=exponential(1.0);
R rbox prio A;
""")
compiled = compile_tree(tree)

est = estimate_unreliability(compiled, horizon=100.0, runs=20000, seed=42)
exact = 1 - math.exp(-0.01 * 100)
print(f"unreliability(100): {est.value:.4f} +- {est.half_width:.4f} "
      f"(exact {exact:.4f})")

est = estimate_unavailability(compiled, horizon=20000.0, runs=300, seed=7)
exact = 0.01 / 1.01
print(f"unavailability:     {est.value:.6f} +- {est.half_width:.6f} "
      f"(stationary {exact:.6f})")

print("\nfirst events of one run:")
sim = Simulation(compiled, seed=7)
for t, module, action, kind in sim.events(0, 400.0)[:8]:
    print(f"  t={t:10.3f}  {module:8s} {action:6s} {kind}")

print("\ntie-break policies cannot matter on a weakly deterministic model:")
print(order_invariance_probe(compiled, horizon=2000.0, runs=60, seed=1))
