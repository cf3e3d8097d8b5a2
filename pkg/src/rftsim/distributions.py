"""Continuous probability laws for clocks.

Every clock of a stochastic automaton carries one continuous law with
support in the strictly positive reals.  Parameters are validated at
construction time: rates, shapes and scales must be positive and finite;
``uniform`` additionally allows a zero lower bound (the law still puts
probability one on the positive reals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

FAMILIES = {
    # family name -> parameter names (documentation only)
    "exponential": ("rate",),
    "uniform": ("low", "high"),
    "weibull": ("shape", "scale"),
    "lognormal": ("mu", "sigma"),
    "erlang": ("k", "rate"),
}


@dataclass(frozen=True)
class Distribution:
    """A continuous probability law attached to a clock."""

    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown distribution family {self.family!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        n = len(FAMILIES[self.family])
        if len(self.params) != n:
            raise ValueError(
                f"{self.family} takes {n} parameter(s), got {len(self.params)}"
            )
        for p in self.params:
            if not math.isfinite(p):
                raise ValueError(f"{self.family}: parameters must be finite")
        lo = 0.0 if self.family == "uniform" else None
        if self.family == "uniform":
            a, b = self.params
            if a < 0 or a >= b:
                raise ValueError(f"uniform({a}, {b}): need 0 <= low < high")
        else:
            for p in self.params:
                if p <= 0:
                    raise ValueError(f"{self.family}: parameters must be > 0")
        if self.family == "erlang":
            k = self.params[0]
            if k != int(k) or k < 1:
                raise ValueError(f"erlang: k must be a positive integer, got {k}")
        del lo

    def sample(self, rng):
        """Draw one value using a numpy Generator."""
        p = self.params
        if self.family == "exponential":
            return rng.exponential(1.0 / p[0])
        if self.family == "uniform":
            return rng.uniform(p[0], p[1])
        if self.family == "weibull":
            return p[1] * rng.weibull(p[0])
        if self.family == "lognormal":
            return rng.lognormal(p[0], p[1])
        if self.family == "erlang":
            return rng.gamma(int(p[0]), 1.0 / p[1])
        raise AssertionError(self.family)

    def mean(self):
        p = self.params
        if self.family == "exponential":
            return 1.0 / p[0]
        if self.family == "uniform":
            return 0.5 * (p[0] + p[1])
        if self.family == "weibull":
            return p[1] * math.gamma(1.0 + 1.0 / p[0])
        if self.family == "lognormal":
            return math.exp(p[0] + 0.5 * p[1] ** 2)
        if self.family == "erlang":
            return p[0] / p[1]
        raise AssertionError(self.family)

    def __str__(self):
        # repr() is round-trip exact for floats, which the printers rely on.
        args = ",".join(repr(p) for p in self.params)
        return f"{self.family}({args})"
