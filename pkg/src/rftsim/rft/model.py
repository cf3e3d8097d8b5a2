"""Fault tree abstract syntax.

A tree is a set of labelled vertices plus an ordered input list per vertex.
Input order matters: priority gates fail on left-to-right failure order,
priority repair boxes serve lower-index inputs first, and a spare gate's
first input is its main basic element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from rftsim.distributions import Distribution


class Kind:
    BE = "be"
    SBE = "sbe"
    AND = "and"
    OR = "or"
    PAND = "pand"
    VOT = "vot"
    FDEP = "fdep"
    SG = "sg"
    RBOX = "rbox"

    GATES = (AND, OR, PAND, VOT, FDEP, SG, RBOX)
    LEAVES = (BE, SBE)
    ALL = LEAVES + GATES


RBOX_POLICIES = ("priority", "fcfs", "random")


@dataclass(frozen=True)
class ElementLabel:
    """The element attached to a vertex: kind, arity, and parameters."""

    kind: str
    arity: int = 0
    k: int = None                      # voting threshold
    policy: str = None                 # repair box policy
    active_fail: Distribution = None
    dormant_fail: Distribution = None
    repair: Distribution = None

    def __post_init__(self):
        k = self.kind
        if k not in Kind.ALL:
            raise ValueError(f"unknown element kind {k!r}")
        if k in Kind.LEAVES:
            if self.arity != 0:
                raise ValueError(f"{k} takes no inputs")
            if self.active_fail is None or self.repair is None:
                raise ValueError(f"{k} needs fail and repair distributions")
            if k == Kind.SBE and self.dormant_fail is None:
                raise ValueError("sbe needs a dormant failure distribution")
            if k == Kind.BE and self.dormant_fail is not None:
                raise ValueError("be takes no dormant distribution")
        else:
            if self.active_fail or self.dormant_fail or self.repair:
                raise ValueError(f"{k} gates carry no distributions")
            minimum = 2 if k in (Kind.PAND, Kind.FDEP, Kind.SG) else 1
            if self.arity < minimum:
                raise ValueError(f"{k} needs at least {minimum} inputs")
        if k == Kind.VOT:
            if self.k is None or not 1 <= self.k <= self.arity:
                raise ValueError(f"vot needs 1 <= k <= {self.arity}, got {self.k}")
        elif self.k is not None:
            raise ValueError(f"{k} takes no k parameter")
        if k == Kind.RBOX:
            if self.policy not in RBOX_POLICIES:
                raise ValueError(f"rbox policy must be one of {RBOX_POLICIES}")
        elif self.policy is not None:
            raise ValueError(f"{k} takes no policy")


@dataclass
class FaultTreeDef:
    """A parsed tree: vertices in declaration order, labels, wiring.

    ``spare_users`` maps each spare basic element to the spare gates it
    serves, in file order; that order is the sharing priority.
    """

    vertices: list
    labels: dict                      # vertex -> ElementLabel
    inputs: dict                      # vertex -> tuple of vertex names
    spare_users: dict = field(default_factory=dict)
    top: str = None

    def kind(self, v):
        return self.labels[v].kind

    def edges(self):
        """All (input, consumer) pairs derived from the input lists."""
        out = []
        for w in self.vertices:
            for v in self.inputs.get(w, ()):
                out.append((v, w))
        return out

    def parents(self, v, *, real_only=False):
        """Vertices that take ``v`` as an input.

        With ``real_only`` repair boxes are skipped: a box manages the
        element without consuming its output signal, so feeding only a box
        does not count as being used.  Functional dependencies do consume
        their inputs (trigger and dependents alike).
        """
        out = []
        for w in self.vertices:
            if v in self.inputs.get(w, ()):
                if real_only and self.kind(w) == Kind.RBOX:
                    continue
                out.append(w)
        return out


@dataclass(frozen=True)
class Violation:
    """One breached well-formedness rule."""

    rule: str
    vertices: tuple
    message: str

    def __str__(self):
        return f"{self.rule}({', '.join(self.vertices)}): {self.message}"
