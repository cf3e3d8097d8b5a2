"""rftsim: repairable fault tree modelling, compilation, and simulation.

The package is organized as a pipeline:

* :mod:`rftsim.rft` -- fault tree abstract syntax, text format, validation,
  and the FDEP-to-OR rewrite.
* :mod:`rftsim.iosa` -- stochastic automata with urgency: the symbolic
  modelling language, expansion to finite automata, structural checks, and
  parallel composition.
* :mod:`rftsim.compiler` -- per-element automata templates and the wiring
  that turns a validated tree into a closed model.
* :mod:`rftsim.determinism` -- confluence and weak-determinism analysis.
* :mod:`rftsim.simulator` -- discrete-event Monte Carlo estimation of
  unreliability and unavailability.
* :mod:`rftsim.cli` -- the ``rftsim`` command line front end.
"""

from rftsim.distributions import Distribution

__all__ = ["Distribution"]
__version__ = "0.1.0"
