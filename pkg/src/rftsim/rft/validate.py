"""Structural well-formedness of fault trees.

``validate_rft`` returns one :class:`Violation` per breached rule; an empty
list means the tree is valid.  Rules, by name:

* ``Acyclicity``       the derived edge set is a DAG
* ``UniqueTop``        exactly one gate has its output unconsumed, and it
                       is the declared top
* ``TopKind``          the top is not an fdep or rbox
* ``RepeatedInput``    an output feeds the same gate at most once
* ``DummyOutput``      fdep/rbox outputs feed nothing
* ``RboxInputKind``    repair boxes manage basic elements only
* ``SingleRbox``       each (spare) basic element sits under at most one box
* ``RboxRequired``     ... and under at least one (repair must be possible,
                       otherwise a failed element waits forever)
* ``SgInputKind``      a spare gate's main input is a BE, its spares SBEs
* ``SbeParent``        spare basic elements feed only spare gates / boxes
* ``SpareConsistency`` spare-user lists mirror the spare-gate inputs
* ``SingleSg``         a BE is the main input of at most one spare gate
* ``SgFdepExclusion``  a BE used by a spare gate is not wired to an fdep
* ``DanglingGate``     a gate other than the top must feed something

A basic element that feeds only its repair box is accepted (reported by
``dangling_leaves`` as a warning, not a violation).
"""

from __future__ import annotations

from rftsim.rft.model import FaultTreeDef, Kind, Violation


def validate_rft(tree: FaultTreeDef):
    v = []
    _acyclicity(tree, v)
    _tops(tree, v)
    _inputs(tree, v)
    _rboxes(tree, v)
    _spares(tree, v)
    return v


def _acyclicity(tree, v):
    indeg = {x: 0 for x in tree.vertices}
    for a, b in tree.edges():
        if a in indeg and b in indeg:
            indeg[b] = indeg[b] + 1
    order = [x for x in tree.vertices if indeg[x] == 0]
    seen = 0
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        seen += 1
        for w in tree.parents(x):
            indeg[w] -= 1
            if indeg[w] == 0:
                order.append(w)
    if seen != len(tree.vertices):
        cycle = _find_cycle(tree)
        v.append(Violation("Acyclicity", tuple(cycle),
                           "input wiring contains a cycle"))


def _find_cycle(tree):
    color = {}
    stack = []

    def dfs(x):
        color[x] = 1
        stack.append(x)
        for w in tree.parents(x):
            c = color.get(w, 0)
            if c == 0:
                found = dfs(w)
                if found:
                    return found
            elif c == 1:
                return stack[stack.index(w):] + [w]
        stack.pop()
        color[x] = 2
        return None

    for x in tree.vertices:
        if color.get(x, 0) == 0:
            cyc = dfs(x)
            if cyc:
                return cyc
    return []


def _tops(tree, v):
    if tree.top not in tree.labels:
        v.append(Violation("UniqueTop", (tree.top,), "declared top is not a vertex"))
        return
    if tree.kind(tree.top) in (Kind.FDEP, Kind.RBOX):
        v.append(Violation("TopKind", (tree.top,),
                           "the top element cannot be an fdep or rbox"))
    parentless_gates = [
        x for x in tree.vertices
        if tree.kind(x) not in (Kind.FDEP, Kind.RBOX, Kind.BE, Kind.SBE)
        and not tree.parents(x, real_only=True)
    ]
    if tree.parents(tree.top, real_only=True):
        v.append(Violation("UniqueTop", (tree.top,),
                           "the declared top's output is consumed by another gate"))
    for x in parentless_gates:
        if x != tree.top:
            v.append(Violation("DanglingGate", (x,),
                               "gate output is not consumed and it is not the top"))


def _inputs(tree, v):
    for w in tree.vertices:
        ins = tree.inputs[w]
        seen = set()
        for x in ins:
            if x in seen:
                v.append(Violation("RepeatedInput", (x, w),
                                   "an output cannot feed the same gate twice"))
            seen.add(x)
            if x in tree.labels and tree.kind(x) in (Kind.FDEP, Kind.RBOX):
                v.append(Violation("DummyOutput", (x, w),
                                   f"{tree.kind(x)} outputs are dummy and feed nothing"))


def _rboxes(tree, v):
    box_of = {}
    for w in tree.vertices:
        if tree.kind(w) != Kind.RBOX:
            continue
        for x in tree.inputs[w]:
            if x not in tree.labels:
                continue
            if tree.kind(x) not in (Kind.BE, Kind.SBE):
                v.append(Violation("RboxInputKind", (x, w),
                                   "repair boxes manage basic elements only"))
                continue
            if x in box_of and box_of[x] != w:
                v.append(Violation("SingleRbox", (x, box_of[x], w),
                                   "element repaired by two boxes"))
            box_of[x] = w
    for x in tree.vertices:
        if tree.kind(x) in (Kind.BE, Kind.SBE) and x not in box_of:
            v.append(Violation("RboxRequired", (x,),
                               "basic element is not assigned to any repair box"))


def _spares(tree, v):
    sg_of_be = {}
    for w in tree.vertices:
        if tree.kind(w) != Kind.SG:
            continue
        ins = tree.inputs[w]
        main, spares = ins[0], ins[1:]
        if main in tree.labels and tree.kind(main) != Kind.BE:
            v.append(Violation("SgInputKind", (main, w),
                               "a spare gate's main input must be a basic element"))
        if main in tree.labels and tree.kind(main) == Kind.BE:
            if main in sg_of_be and sg_of_be[main] != w:
                v.append(Violation("SingleSg", (main, sg_of_be[main], w),
                                   "basic element drives two spare gates"))
            sg_of_be[main] = w
            for f in tree.parents(main):
                if tree.kind(f) == Kind.FDEP:
                    v.append(Violation("SgFdepExclusion", (main, w, f),
                                       "spare-gate BE also wired to an fdep"))
        for s in spares:
            if s in tree.labels and tree.kind(s) != Kind.SBE:
                v.append(Violation("SgInputKind", (s, w),
                                   "spare inputs must be spare basic elements"))

    for x in tree.vertices:
        if tree.kind(x) != Kind.SBE:
            continue
        for w in tree.parents(x):
            if tree.kind(w) not in (Kind.SG, Kind.RBOX):
                v.append(Violation("SbeParent", (x, w),
                                   "spare basic elements feed only spare gates "
                                   "and repair boxes"))

    # spare_users and the sg input lists must mirror each other
    for x in tree.vertices:
        if tree.kind(x) != Kind.SBE:
            continue
        users = tree.spare_users.get(x, ())
        for g in users:
            if g not in tree.labels or tree.kind(g) != Kind.SG \
                    or x not in tree.inputs[g][1:]:
                v.append(Violation("SpareConsistency", (x, g),
                                   "spare-user entry without the matching "
                                   "spare-gate input"))
    for w in tree.vertices:
        if tree.kind(w) != Kind.SG:
            continue
        for s in tree.inputs[w][1:]:
            if s in tree.labels and tree.kind(s) == Kind.SBE \
                    and w not in tree.spare_users.get(s, ()):
                v.append(Violation("SpareConsistency", (s, w),
                                   "spare-gate input without the matching "
                                   "spare-user entry"))


def dangling_leaves(tree: FaultTreeDef):
    """Basic elements feeding no gate at all (only their repair box).

    Accepted, but usually a modelling mistake, so surfaced as warnings.
    """
    out = []
    for x in tree.vertices:
        if tree.kind(x) in (Kind.BE, Kind.SBE):
            if not tree.parents(x, real_only=True) and x != tree.top:
                out.append(f"{x}: basic element feeds no gate")
    return out
