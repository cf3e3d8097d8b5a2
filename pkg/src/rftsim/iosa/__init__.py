"""Input/output stochastic automata with urgency.

``symbolic`` holds the textual modelling language (modules, guarded
transitions, clocks); ``expand`` turns a symbolic module into a finite
automaton over variable valuations; ``kernel`` holds the automaton
representation itself together with the structural well-formedness checks
and parallel composition.
"""

from rftsim.iosa.kernel import (
    Action,
    Clock,
    IosaAutomaton,
    Transition,
    check_def1,
    closed,
    compose,
    dump,
)
from rftsim.iosa.symbolic import (
    ActionTable,
    SymbolicModule,
    SymbolicTransition,
    parse_model,
    parse_module,
    print_model,
    print_module,
)
from rftsim.iosa.expand import expand

__all__ = [
    "Action",
    "ActionTable",
    "Clock",
    "IosaAutomaton",
    "SymbolicModule",
    "SymbolicTransition",
    "Transition",
    "check_def1",
    "closed",
    "compose",
    "dump",
    "expand",
    "parse_model",
    "parse_module",
    "print_model",
    "print_module",
]
