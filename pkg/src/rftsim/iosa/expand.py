"""Expansion of symbolic modules into finite automata.

States are the reachable valuations of the module's variables and arrays.
Each symbolic transition contributes one concrete transition per valuation
satisfying its guard; right-hand sides all read the pre-state.  For every
input label and every state without an explicit enabled transition, a
self-loop with no resets is added, which realizes input-enabledness.  The
wildcard label expands to one input transition per non-urgent output label
of the surrounding model that the module does not already mention.
"""

from __future__ import annotations

from rftsim.errors import ModelError, RangeOverflow, UnknownLabel
from rftsim.iosa.expr import Call, eval_expr
from rftsim.iosa.kernel import Action, Clock, IosaAutomaton, Transition
from rftsim.iosa.symbolic import WILDCARD, ActionTable, ArrayDecl, SymbolicModule

_DECO_DIR = {"?": "input", "??": "input", "!": "output", "!!": "output"}
_DECO_URG = {"?": False, "??": True, "!": False, "!!": True}


def expand(module: SymbolicModule, table: ActionTable = None, *, max_states=500_000):
    """Expand ``module`` against a model-wide action table.

    With ``table`` omitted, the module is expanded against itself (the
    wildcard then matches only the module's own non-urgent outputs).
    """
    if table is None:
        table = ActionTable.from_modules([module])
    if table.problems:
        raise ModelError("; ".join(table.problems))

    names = [v.name for v in module.variables] + [a.name for a in module.arrays]
    decls = {v.name: v for v in module.variables}
    decls.update({a.name: a for a in module.arrays})

    init = []
    for v in module.variables:
        init.append(v.init)
    for a in module.arrays:
        init.append(tuple(a.init for _ in range(a.length)))
    init = tuple(init)

    # action bookkeeping -----------------------------------------------------
    wildcard_labels = ()
    if module.has_wildcard():
        wildcard_labels = tuple(sorted(
            table.non_urgent_output_labels() - module.explicit_labels()
        ))

    actions = {}

    def register(label, deco):
        urgent = _DECO_URG[deco]
        direction = _DECO_DIR[deco]
        if label not in table.urgent:
            raise UnknownLabel(f"{module.name}: label {label!r} not in the model alphabet")
        if table.urgent[label] != urgent:
            raise ModelError(f"{module.name}: urgency of {label!r} disagrees with the model")
        if direction == "output" and table.owner.get(label) != module.name:
            raise ModelError(f"{module.name}: {label!r} is owned by {table.owner.get(label)}")
        prev = actions.get(label)
        if prev is not None and (prev.direction != direction or prev.urgent != urgent):
            raise ModelError(f"{module.name}: inconsistent decorations on {label!r}")
        actions[label] = Action(label, direction, urgent)

    concrete = []  # (labels tuple, transition) pairs in declaration order
    for t in module.transitions:
        if t.label == WILDCARD:
            for lab in wildcard_labels:
                actions.setdefault(lab, Action(lab, "input", False))
            concrete.append((wildcard_labels, t))
        else:
            label = module.label_of(t)
            register(label, t.deco)
            concrete.append(((label,), t))

    # clock laws: one distribution per clock, collected from reset sites ----
    laws = {}
    for t in module.transitions:
        for cname, dist in t.resets:
            if cname not in module.clocks:
                raise ModelError(f"{module.name}: reset of undeclared clock {cname!r}")
            if cname in laws and laws[cname] != dist:
                raise ModelError(
                    f"{module.name}: clock {cname} reset with two different laws "
                    f"({laws[cname]} and {dist})")
            laws[cname] = dist
    for cname in module.clocks:
        if cname not in laws:
            raise ModelError(f"{module.name}: clock {cname} is never reset, no law known")
    clocks = {c: Clock(c, laws[c]) for c in module.clocks}

    # reachability over valuations ------------------------------------------
    index = {init: 0}
    order = [init]
    transitions = []
    input_labels = sorted(a.name for a in actions.values() if a.direction == "input")

    pos = 0
    while pos < len(order):
        state = order[pos]
        sid = pos
        pos += 1
        env = dict(zip(names, state))
        fired = set()
        for labels, t in concrete:
            if not labels:
                continue
            try:
                enabled = eval_expr(t.guard, env)
            except ModelError as exc:
                raise ModelError(f"{module.name}: guard of [{t.label}{t.deco}]: {exc}") from None
            if not isinstance(enabled, bool):
                raise ModelError(f"{module.name}: guard of [{t.label}{t.deco}] is not boolean")
            if not enabled:
                continue
            branches = _apply(module, decls, names, state, env, t)
            resets = frozenset(c for c, _ in t.resets)
            enab = frozenset((t.clock,)) if t.clock else frozenset()
            targets = []
            for prob, new_state in branches:
                if new_state not in index:
                    if len(index) >= max_states:
                        raise ModelError(
                            f"{module.name}: more than {max_states} states; "
                            "ranges too large?")
                    index[new_state] = len(order)
                    order.append(new_state)
                targets.append((prob, index[new_state]))
            for lab in labels:
                fired.add(lab)
                transitions.append(Transition(sid, enab, lab, resets, tuple(targets)))
        for lab in input_labels:
            if lab not in fired:
                transitions.append(
                    Transition(sid, frozenset(), lab, frozenset(), ((1.0, sid),)))

    labels = [_pretty(names, s) for s in order]
    aut = IosaAutomaton(
        module.name, actions, clocks, labels, transitions,
        init_state=0, init_clocks=frozenset(clocks),
    )
    aut.var_names = tuple(names)
    aut.valuations = order
    return aut


def _pretty(names, state):
    parts = []
    for n, v in zip(names, state):
        if isinstance(v, tuple):
            parts.append(f"{n}=[{','.join(_fmt(x) for x in v)}]")
        else:
            parts.append(f"{n}={_fmt(v)}")
    return ",".join(parts) if parts else "()"


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _apply(module, decls, names, state, env, t):
    """Successor valuations of one enabled transition.

    Returns a list of (probability, state) branches; a single branch unless
    the transition assigns ``random(...)``.
    """
    writes = {}  # target -> value, all RHS over the pre-state
    random_target = None
    random_choices = None
    for target, rhs in t.assigns:
        if isinstance(rhs, Call) and rhs.func == "random":
            arr = env[rhs.args[0].name]
            eligible = [i for i, x in enumerate(arr) if bool(x)]
            if not eligible:
                raise ModelError(
                    f"{module.name}: random() over an all-zero array at {_pretty(names, state)}")
            if random_target is not None:
                raise ModelError(f"{module.name}: two random() assignments in one transition")
            random_target = target
            random_choices = eligible
            continue
        if isinstance(rhs, Call) and rhs.func == "broken":
            arr_name = rhs.args[0].name
            decl = decls.get(arr_name)
            if not isinstance(decl, ArrayDecl):
                raise ModelError(f"{module.name}: broken() needs an array, got {arr_name!r}")
            j = eval_expr(rhs.args[1], env)
            arr = env[arr_name]
            if not 0 <= j < len(arr):
                raise ModelError(f"{module.name}: broken() index {j} out of bounds")
            hi = decl.typ[1] if decl.typ != "bool" else 1
            bumped = tuple(
                min(hi, x + 1) if (k == j or x > 0) else x for k, x in enumerate(arr)
            )
            _put(module, writes, ("whole", arr_name), bumped, names, state)
            _put(module, writes, target, 0, names, state)
            continue
        value = eval_expr(rhs, env)
        _put(module, writes, target, value, names, state)

    def build(extra=None):
        w = dict(writes)
        if extra is not None:
            tgt, val = extra
            w[_key(tgt)] = (tgt, val)
        new = list(state)
        # whole-array rewrites (from the bump intrinsic) go first so an
        # explicit cell write in the same transition is not clobbered
        ordered = sorted(w.items(), key=lambda kv: kv[1][0][0] != "whole")
        for _, (target, value) in ordered:
            kind = target[0]
            if kind == "whole":
                i = names.index(target[1])
                new[i] = value
                continue
            name = target[1]
            decl = decls[name]
            i = names.index(name)
            if kind == "var":
                new[i] = _coerce(module, decl, value, names, state)
            else:
                cell = _coerce(module, decl, value, names, state)
                arr = list(new[i])
                arr[target[2]] = cell
                new[i] = tuple(arr)
        return tuple(new)

    if random_target is None:
        return [(1.0, build())]
    p = 1.0 / len(random_choices)
    return [(p, build((random_target, idx))) for idx in random_choices]


def _key(target):
    return target[:2] if target[0] != "arr" else target


def _put(module, writes, target, value, names, state):
    key = _key(target)
    if key in writes:
        raise ModelError(
            f"{module.name}: conflicting writes to {target[1]} at {_pretty(names, state)}")
    writes[key] = (target, value)


def _coerce(module, decl, value, names, state):
    if decl.typ == "bool":
        if not isinstance(value, bool):
            raise ModelError(
                f"{module.name}: {decl.name} is bool, assigned {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, int):
        raise ModelError(f"{module.name}: {decl.name} is an integer, assigned {value!r}")
    lo, hi = decl.typ
    if not lo <= value <= hi:
        raise RangeOverflow(
            f"{module.name}: {decl.name} := {value} leaves [{lo}..{hi}]",
            _pretty(names, state))
    return value
