"""Replace functional dependency gates by OR gates.

An fdep with trigger ``t`` makes its dependents inaccessible while ``t``
is failed.  That is exactly what an OR over ``(t, d)`` computes for each
dependent ``d``, so every fdep is removed and each of its dependents is
re-routed through a fresh two-input OR wherever it feeds a real gate.
Idempotent on fdep-free trees.
"""

from __future__ import annotations

from rftsim.rft.model import ElementLabel, FaultTreeDef, Kind


def rewrite_fdep(tree: FaultTreeDef) -> FaultTreeDef:
    fdeps = [x for x in tree.vertices if tree.kind(x) == Kind.FDEP]
    if not fdeps:
        return tree

    vertices = list(tree.vertices)
    labels = dict(tree.labels)
    inputs = dict(tree.inputs)
    taken = set(vertices)

    def fresh(base):
        name = base
        n = 1
        while name in taken:
            n += 1
            name = f"{base}{n}"
        taken.add(name)
        return name

    top = tree.top
    for f in fdeps:
        trigger, *deps = inputs[f]
        for d in deps:
            consumers = [
                w for w in vertices
                if w != f and d in inputs.get(w, ())
                and labels[w].kind not in (Kind.FDEP, Kind.RBOX, Kind.SG)
            ]
            if not consumers and d != top:
                continue  # unobservable dependency, nothing to re-route
            orname = fresh(f"fdepor_{f}_{d}")
            # insert right after d so the OR prints near its subject
            vertices.insert(vertices.index(d) + 1, orname)
            labels[orname] = ElementLabel(Kind.OR, 2)
            inputs[orname] = (trigger, d)
            for w in consumers:
                inputs[w] = tuple(orname if x == d else x for x in inputs[w])
            if d == top:
                top = orname
        vertices.remove(f)
        del labels[f], inputs[f]

    return FaultTreeDef(vertices, labels, inputs, dict(tree.spare_users), top)
