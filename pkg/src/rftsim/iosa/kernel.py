"""Finite-control stochastic automata with urgency.

An automaton has a finite state set, actions partitioned into inputs and
outputs with an urgency flag, clocks carrying continuous laws, and
transitions ``s --C,a,C'--> s'`` where ``C`` is the enabling clock set and
``C'`` the clocks reset on firing.  The structural constraints checked by
:func:`check_def1` are:

(a) inputs and urgent actions have no enabling clocks;
(b) a non-urgent output is enabled by exactly one clock;
(c) one clock cannot guard two different transitions from a state;
(d) inputs are enabled in every state;
(e) inputs are deterministic;
(f) an ``active`` clock-set assignment exists certifying that no enabling
    clock can have expired before its transition fires.

Transitions may carry several weighted targets; this represents the
discrete uniform choice made by the ``random`` intrinsic and is sampled by
the simulator, not resolved nondeterministically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from rftsim.distributions import Distribution
from rftsim.errors import IncompatibleComponents


@dataclass(frozen=True)
class Action:
    name: str
    direction: str  # "input" | "output"
    urgent: bool


@dataclass(frozen=True)
class Clock:
    name: str
    law: Distribution


@dataclass(frozen=True)
class Transition:
    source: int
    clocks: frozenset  # enabling clocks (empty for inputs and urgent actions)
    action: str
    resets: frozenset
    targets: tuple  # ((prob, state), ...); single entry unless probabilistic

    @property
    def target(self):
        """The unique target; only valid for deterministic transitions."""
        assert len(self.targets) == 1
        return self.targets[0][1]

    @property
    def probabilistic(self):
        return len(self.targets) > 1


@dataclass
class IosaAutomaton:
    name: str
    actions: dict            # name -> Action
    clocks: dict             # name -> Clock
    state_labels: list       # printable valuation per state
    transitions: list
    init_state: int = 0
    init_clocks: frozenset = frozenset()

    def __post_init__(self):
        self._out = None

    @property
    def n_states(self):
        return len(self.state_labels)

    def out(self, s):
        if self._out is None:
            table = [[] for _ in range(self.n_states)]
            for t in self.transitions:
                table[t.source].append(t)
            self._out = table
        return self._out[s]

    def out_by_action(self, s, a):
        return [t for t in self.out(s) if t.action == a]

    def urgent_outputs_at(self, s):
        return sorted(
            {t.action for t in self.out(s)
             if self.actions[t.action].urgent
             and self.actions[t.action].direction == "output"}
        )

    def stable(self, s):
        """No urgent output enabled."""
        return not self.urgent_outputs_at(s)

    def enabling(self, s):
        """Clocks that guard some outgoing non-urgent output."""
        clocks = set()
        for t in self.out(s):
            clocks |= t.clocks
        return clocks

    def urgent_actions(self):
        return sorted(a.name for a in self.actions.values() if a.urgent)


@dataclass(frozen=True)
class ConstraintViolation:
    item: str  # "a" .. "f"
    message: str


def check_def1(aut: IosaAutomaton):
    """Check constraints (a)-(f); empty result means the automaton is valid."""
    v = []
    inputs = {a.name for a in aut.actions.values() if a.direction == "input"}
    urgents = {a.name for a in aut.actions.values() if a.urgent}
    for t in aut.transitions:
        if t.action in inputs or t.action in urgents:
            if t.clocks:
                v.append(ConstraintViolation(
                    "a", f"{_tdesc(aut, t)}: inputs/urgent actions take no enabling clocks"))
        elif len(t.clocks) != 1:
            v.append(ConstraintViolation(
                "b", f"{_tdesc(aut, t)}: non-urgent output needs a singleton clock set"))

    for s in range(aut.n_states):
        by_clock = {}
        for t in aut.out(s):
            for c in t.clocks:
                by_clock.setdefault(c, []).append(t)
        for c, ts in by_clock.items():
            sig = {(t.action, t.resets, t.targets) for t in ts}
            if len(sig) > 1:
                v.append(ConstraintViolation(
                    "c", f"state {aut.state_labels[s]}: clock {c} guards two different transitions"))

    for s in range(aut.n_states):
        for a in inputs:
            ts = aut.out_by_action(s, a)
            if not ts:
                v.append(ConstraintViolation(
                    "d", f"state {aut.state_labels[s]}: input {a} not enabled"))
            else:
                sig = {(t.resets, t.targets) for t in ts}
                if len(sig) > 1:
                    v.append(ConstraintViolation(
                        "e", f"state {aut.state_labels[s]}: input {a} not deterministic"))

    v.extend(_check_active_exists(aut))
    return v


def _tdesc(aut, t):
    return (f"{aut.state_labels[t.source]} --{sorted(t.clocks)},{t.action},"
            f"{sorted(t.resets)}-->")


def _check_active_exists(aut):
    """Synthesize an ``active`` function for constraint (f).

    Greatest fixpoint: start from all clocks (pinned to ``enabling(s)`` on
    stable states, clipped to the initial clock set at the initial state)
    and shrink along condition (iv) edges until stable.  Constraint (f)
    holds iff the fixpoint satisfies (ii) everywhere and stable states
    never need more than an incoming edge can supply.
    """
    n = aut.n_states
    all_clocks = frozenset(aut.clocks)
    enabling = [frozenset(aut.enabling(s)) for s in range(n)]
    stable = [aut.stable(s) for s in range(n)]

    active = [enabling[s] if stable[s] else all_clocks for s in range(n)]
    if stable[aut.init_state]:
        if not enabling[aut.init_state] <= aut.init_clocks:
            return [ConstraintViolation(
                "f", "initial state enables clocks outside the initial clock set")]
    else:
        active[aut.init_state] = active[aut.init_state] & aut.init_clocks

    incoming = [[] for _ in range(n)]
    for t in aut.transitions:
        for _, tgt in t.targets:
            incoming[tgt].append(t)

    changed = True
    while changed:
        changed = False
        for s in range(n):
            for t in incoming[s]:
                bound = (active[t.source] - t.clocks) | t.resets
                if stable[s]:
                    if not enabling[s] <= bound:
                        return [ConstraintViolation(
                            "f",
                            f"no active function: stable state {aut.state_labels[s]} "
                            f"needs {sorted(enabling[s] - bound)} after "
                            f"{t.action} from {aut.state_labels[t.source]}")]
                else:
                    new = active[s] & bound
                    if new != active[s]:
                        active[s] = new
                        changed = True
    for s in range(n):
        if not enabling[s] <= active[s]:
            return [ConstraintViolation(
                "f",
                f"no active function: state {aut.state_labels[s]} enables "
                f"{sorted(enabling[s] - active[s])} which may have expired")]
    return []


def closed(aut: IosaAutomaton):
    """A closed automaton has no input actions left to synchronize."""
    used = {t.action for t in aut.transitions}
    return not any(aut.actions[a].direction == "input" for a in used)


def compose(a: IosaAutomaton, b: IosaAutomaton, name=None):
    """Parallel composition, restricted to the reachable product.

    Shared action names synchronize (output+input gives an output,
    input+input stays an input); everything else interleaves.  Components
    must not share clocks or output actions and must agree on urgency.
    """
    shared = set(a.actions) & set(b.actions)
    for x in shared:
        aa, ba = a.actions[x], b.actions[x]
        if aa.direction == "output" and ba.direction == "output":
            raise IncompatibleComponents(f"{a.name} and {b.name} both output {x!r}")
        if aa.urgent != ba.urgent:
            raise IncompatibleComponents(f"urgency of {x!r} differs between components")
    common_clocks = set(a.clocks) & set(b.clocks)
    if common_clocks:
        raise IncompatibleComponents(f"shared clocks {sorted(common_clocks)}")

    actions = {}
    for x in set(a.actions) | set(b.actions):
        da = a.actions.get(x)
        db = b.actions.get(x)
        if da and db:
            direction = "output" if "output" in (da.direction, db.direction) else "input"
            actions[x] = Action(x, direction, da.urgent)
        else:
            actions[x] = da or db

    clocks = dict(a.clocks)
    clocks.update(b.clocks)

    index = {}
    labels = []
    transitions = []

    def state_id(pair):
        if pair not in index:
            index[pair] = len(labels)
            labels.append(f"{a.state_labels[pair[0]]}|{b.state_labels[pair[1]]}")
        return index[pair]

    init = state_id((a.init_state, b.init_state))
    frontier = [(a.init_state, b.init_state)]
    seen = {(a.init_state, b.init_state)}
    while frontier:
        sa, sb = frontier.pop()
        src = state_id((sa, sb))
        moves = []
        for t in a.out(sa):
            if t.action in shared:
                for t2 in b.out_by_action(sb, t.action):
                    targets = _product_targets(t.targets, t2.targets, sa, sb)
                    moves.append(Transition(
                        src, t.clocks | t2.clocks, t.action,
                        t.resets | t2.resets, targets))
            else:
                targets = tuple(sorted((p, (tgt, sb)) for p, tgt in t.targets))
                moves.append(Transition(src, t.clocks, t.action, t.resets, targets))
        for t in b.out(sb):
            if t.action in shared:
                continue
            targets = tuple(sorted((p, (sa, tgt)) for p, tgt in t.targets))
            moves.append(Transition(src, t.clocks, t.action, t.resets, targets))
        for m in moves:
            resolved = []
            for p, pair in m.targets:
                if pair not in seen:
                    seen.add(pair)
                    frontier.append(pair)
                resolved.append((p, state_id(pair)))
            transitions.append(Transition(
                m.source, m.clocks, m.action, m.resets, tuple(resolved)))

    out = IosaAutomaton(
        name or f"({a.name}||{b.name})",
        actions, clocks, labels, transitions,
        init, frozenset(a.init_clocks | b.init_clocks),
    )
    return out


def _product_targets(ta, tb, sa, sb):
    out = []
    for pa, xa in ta:
        for pb, xb in tb:
            out.append((pa * pb, (xa, xb)))
    return tuple(sorted(out))


def dump(aut: IosaAutomaton):
    """Plain-text transition list, stable-sorted for diffing."""
    lines = []
    for t in aut.transitions:
        for p, tgt in t.targets:
            prob = "" if len(t.targets) == 1 else f"{p:.6f}:"
            lines.append(
                f"{aut.state_labels[t.source]} --{{{','.join(sorted(t.clocks))}}},"
                f"{t.action},{{{','.join(sorted(t.resets))}}}--> {prob}{aut.state_labels[tgt]}"
            )
    return "\n".join(sorted(lines)) + "\n"
