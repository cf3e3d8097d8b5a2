"""Weak-determinism analysis.

A closed model is weakly deterministic when every pair of urgent actions
is confluent: firing them in either order from any reachable state meets
in the same state, so the scheduler's choice cannot influence stochastic
behavior.  The analysis has three stages, from cheap to exhaustive:

1. Per-component confluence (:func:`check_confluence`): a commuting-square
   scan over each module in isolation.  Reachability of the module alone
   over-approximates reachability inside any composition, so pairs found
   confluent here stay confluent after composition.

2. A sufficient condition over the composition: non-confluent component
   pairs are harmless unless two actions that are initially enabled or
   spontaneously enabled by a common non-urgent action can indirectly
   trigger both halves of such a pair.  ``fail``-side actions only trigger
   ``fail``-side actions (and likewise for repairs) in the gate templates,
   which is what makes compiled spare-free trees pass this stage.

3. An exhaustive confluence check of the composed model
   (:func:`explore_composition`) under the timing-aware reachability
   relation: non-urgent actions fire only from stable states, urgent
   cascades interleave freely.  This is the decision procedure used for
   spare-gate/multiplexer configurations, whose acquisition protocol mixes
   the fail and repair triggering chains and therefore defeats stage 2.

Stage-2 relations ("triggers", "spontaneously enabled", "initial") ignore
clock values: any state reachable through the transition graph counts.
That is conservative; it can raise false alarms but never misses a real
one, which stage 3 then settles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from rftsim.compiler import CompiledModel, normalize_tree
from rftsim.errors import ModelError
from rftsim.iosa.expand import expand
from rftsim.iosa.kernel import Action, IosaAutomaton, Transition
from rftsim.rft.model import FaultTreeDef, Kind


# --- per-module machinery ---------------------------------------------------


@dataclass
class ConfluenceReport:
    module: str
    non_confluent: dict = field(default_factory=dict)  # pair -> witness labels
    confluent: list = field(default_factory=list)

    @property
    def pairs(self):
        return sorted(self.non_confluent)


def _pair(a, b):
    return (a, b) if a <= b else (b, a)


def check_confluence(aut: IosaAutomaton, *, max_witnesses=64) -> ConfluenceReport:
    """Classify every unordered pair of urgent actions of one automaton.

    A pair (a, b) is non-confluent if some reachable state enables both
    through transitions that do not close a commuting square with the same
    reset sets.  All witness states (up to a cap) are recorded, so callers
    can check that a particular valuation is detected.
    """
    urgent = [a.name for a in aut.actions.values() if a.urgent]
    report = ConfluenceReport(aut.name)
    bad = report.non_confluent
    for s in range(aut.n_states):
        enabled = [a for a in urgent if aut.out_by_action(s, a)]
        for i, a in enumerate(enabled):
            for b in enabled[i:]:
                key = _pair(a, b)
                wits = bad.get(key)
                if wits is not None and len(wits) >= max_witnesses:
                    continue
                for ta in aut.out_by_action(s, a):
                    for tb in aut.out_by_action(s, b):
                        if ta is tb:
                            continue
                        if not _commute(aut, ta, tb):
                            bad.setdefault(key, [])
                            if len(bad[key]) < max_witnesses:
                                if aut.state_labels[s] not in bad[key]:
                                    bad[key].append(aut.state_labels[s])
    for i, a in enumerate(sorted(urgent)):
        for b in sorted(urgent)[i:]:
            if (a, b) not in bad:
                report.confluent.append((a, b))
    return report


def _commute(aut, ta, tb):
    d1 = _after(aut, ta.targets, tb)
    d2 = _after(aut, tb.targets, ta)
    return d1 is not None and d1 == d2


def _after(aut, targets, t2):
    """Distribution over states after continuing each target with ``t2``.

    The continuation must exist with exactly ``t2``'s action and reset set
    (the commuting square of the confluence definition keeps the clock
    resets of each side).  Returns None when no unambiguous continuation
    exists.
    """
    out = {}
    for p, s in targets:
        cont = [t for t in aut.out_by_action(s, t2.action) if t.resets == t2.resets]
        dists = {t.targets for t in cont}
        if len(dists) != 1:
            return None
        for q, s2 in dists.pop():
            out[s2] = out.get(s2, 0.0) + p * q
    return {s: round(p, 12) for s, p in out.items()}


@dataclass
class TriggeringRelation:
    edges: set = field(default_factory=set)  # (a, b): a may enable output b

    def closure(self):
        """Reflexive-transitive closure as an adjacency map."""
        adj = {}
        for a, b in self.edges:
            adj.setdefault(a, set()).add(b)
        nodes = set(adj)
        for _, b in self.edges:
            nodes.add(b)
        out = {}
        for start in nodes:
            seen = {start}
            stack = [start]
            while stack:
                x = stack.pop()
                for y in adj.get(x, ()):
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            out[start] = seen
        return out


def triggering(aut: IosaAutomaton) -> TriggeringRelation:
    """Direct triggering edges of one component.

    ``a`` triggers ``b`` when some transition on urgent ``a`` leads to a
    state enabling the urgent output ``b``, while ``b`` was not already
    enabled before ``a`` fired (self-triggering ``a == b`` is recorded
    whenever ``a`` re-enables itself).
    """
    rel = TriggeringRelation()
    urgent = {a.name for a in aut.actions.values() if a.urgent}
    for t in aut.transitions:
        if t.action not in urgent:
            continue
        enabled_before = set(aut.urgent_outputs_at(t.source))
        for _, s2 in t.targets:
            for b in aut.urgent_outputs_at(s2):
                if t.action == b or b not in enabled_before:
                    rel.edges.add((t.action, b))
    return rel


def spontaneous_and_initial(aut: IosaAutomaton):
    """Initial urgent outputs and the sets enabled right after a
    non-urgent action fires from a stable state.

    Non-urgent inputs count: in a closed composition they are driven by
    some other component's clock expiration, and the urgent outputs they
    wake up locally are exactly what the sufficient condition must see.
    """
    initial = frozenset(aut.urgent_outputs_at(aut.init_state))
    spontaneous = {}
    for s in range(aut.n_states):
        if not aut.stable(s):
            continue
        for t in aut.out(s):
            if aut.actions[t.action].urgent:
                continue
            for _, s2 in t.targets:
                enabled = frozenset(aut.urgent_outputs_at(s2))
                if enabled:
                    spontaneous.setdefault(t.action, set()).add(enabled)
    return initial, {k: sorted(v, key=sorted) for k, v in spontaneous.items()}


def expected_nonconfluent(tree: FaultTreeDef):
    """Regression oracle: the pairs that may come out non-confluent.

    Computed on the normalized tree (the form actually compiled).  For a
    gate ``w`` over inputs ``v``: any ``(f_v, u_v')`` pair of its inputs,
    plus the gate's own ``(f_w, u_v)`` and ``(u_w, f_v)`` cancellation
    pairs.  The inform-cancellation pairs arise for priority-ANDs too (a
    repair arriving in the same instant cancels a pending report), not
    only for and/or.  A voting gate shares one report flag between its
    fail and repair sides, so a further input event in the reporting
    instant can also cancel a same-family report: ``(f_v, f_w)`` and
    ``(u_v, u_w)`` join the set for ``vot``.

    All of these need two clocks expiring at the same instant, which the
    timing-aware composed check rules out; the set is an upper bound for
    the per-module analysis, not a statement about reachable behavior.
    """
    tree = normalize_tree(tree)
    pairs = set()
    for w in tree.vertices:
        kind = tree.kind(w)
        if kind not in (Kind.AND, Kind.OR, Kind.PAND, Kind.VOT):
            continue
        ins = tree.inputs[w]
        for v in ins:
            for v2 in ins:
                pairs.add(_pair(f"f_{v}", f"u_{v2}"))
            pairs.add(_pair(f"f_{w}", f"u_{v}"))
            pairs.add(_pair(f"u_{w}", f"f_{v}"))
            if kind == Kind.VOT:
                pairs.add(_pair(f"f_{v}", f"f_{w}"))
                pairs.add(_pair(f"u_{v}", f"u_{w}"))
    return pairs


# --- the sufficient condition over a composition ----------------------------


@dataclass
class TheoremTuple:
    """An instantiation of the necessary conditions for non-confluence."""

    a: str
    b: str
    pair_component: str
    c: str
    d: str
    via: str              # "initial" or the non-urgent action e
    sets: tuple = ()      # the spontaneous sets used, as (component, set)

    def __str__(self):
        how = ("both initial" if self.via == "initial"
               else f"spontaneously enabled by {self.via}")
        return (f"non-confluent ({self.a}, {self.b}) in {self.pair_component}; "
                f"{self.c} and {self.d} ({how}) indirectly trigger them")


@dataclass
class ComponentAnalysis:
    name: str
    confluence: ConfluenceReport
    triggering: TriggeringRelation
    initial: frozenset
    spontaneous: dict
    cluster_members: tuple = ()


def analyze_component(name, aut) -> ComponentAnalysis:
    return ComponentAnalysis(
        name,
        check_confluence(aut),
        triggering(aut),
        *spontaneous_and_initial(aut),
    )


def find_theorem_tuple(components):
    """Search for (a, b, c, d, e) instantiating the necessary conditions.

    Returns None when no instantiation exists, which certifies weak
    determinism of the composition.  The search enumerates non-confluent
    pairs first (the smallest set) and uses inverse reachability in the
    union triggering relation for the candidate (c, d).
    """
    union = TriggeringRelation()
    for comp in components:
        union.edges |= comp.triggering.edges
    radj = {}
    for a, b in union.edges:
        radj.setdefault(b, set()).add(a)

    def inverse_reach(x):
        seen = {x}
        stack = [x]
        while stack:
            y = stack.pop()
            for z in radj.get(y, ()):
                if z not in seen:
                    seen.add(z)
                    stack.append(z)
        return seen

    initial_all = set()
    for comp in components:
        initial_all |= comp.initial

    for comp in components:
        for (a, b) in comp.confluence.pairs:
            ca = inverse_reach(a)
            cb = inverse_reach(b)
            ci = sorted(ca & initial_all)
            di = sorted(cb & initial_all)
            if ci and di:
                return TheoremTuple(a, b, comp.name, ci[0], di[0], "initial")
            hit = _spontaneous_cover(components, ca, cb)
            if hit:
                e, c, d, sets = hit
                return TheoremTuple(a, b, comp.name, c, d, e, sets)
    return None


def _spontaneous_cover(components, ca, cb):
    """Find e whose spontaneous sets cover a trigger for each side.

    ``c`` and ``d`` may come from different components' sets, or from one
    single set of one component (each component contributes at most one
    spontaneously-enabled set per e).
    """
    actions = set()
    for comp in components:
        actions |= set(comp.spontaneous)
    for e in sorted(actions):
        sides = []
        for comp in components:
            for B in comp.spontaneous.get(e, ()):
                hits_c = sorted(B & ca)
                hits_d = sorted(B & cb)
                if hits_c and hits_d:
                    return e, hits_c[0], hits_d[0], ((comp.name, tuple(sorted(B))),)
                if hits_c or hits_d:
                    sides.append((comp.name, B, hits_c, hits_d))
        comps_c = [(n, B, h) for n, B, h, _ in sides if h]
        comps_d = [(n, B, h) for n, B, _, h in sides if h]
        for nc, Bc, hc in comps_c:
            for nd, Bd, hd in comps_d:
                if nc != nd:
                    return e, hc[0], hd[0], ((nc, tuple(sorted(Bc))),
                                             (nd, tuple(sorted(Bd))))
    return None


# --- exhaustive check of the composed model ---------------------------------


@dataclass
class CompositionCheck:
    n_states: int
    witnesses: list            # (state label, a, b) concrete failures
    truncated: bool = False

    @property
    def confluent(self):
        return not self.witnesses and not self.truncated


def explore_composition(automata, *, name="composition", max_states=1_500_000,
                        materialize=False, check=True):
    """Walk the composed state space under timing-aware reachability.

    Urgent outputs fire from any state; non-urgent actions (outputs, and
    free environment inputs when the composition is open) fire only from
    stable states, because an enabled urgent output preempts any positive
    clock delay.  Every co-enabled pair of urgent actions is checked for
    the commuting square.  With ``materialize`` the explored graph is
    returned as an automaton (used for spare-gate clusters, whose
    triggering/spontaneous relations are then read off the composition).
    """
    n = len(automata)
    urgent = {}
    owners = {}
    listeners = {}
    for i, aut in enumerate(automata):
        for a in aut.actions.values():
            if a.name in urgent and urgent[a.name] != a.urgent:
                raise ModelError(f"urgency of {a.name!r} differs between components")
            urgent[a.name] = a.urgent
            if a.direction == "output":
                if a.name in owners:
                    raise ModelError(f"{a.name!r} produced by two components")
                owners[a.name] = i
            else:
                listeners.setdefault(a.name, []).append(i)

    # per-automaton precomputation
    urg_out = []
    non_urg_out = []
    response = []
    for aut in automata:
        uo = [[] for _ in range(aut.n_states)]
        no = [[] for _ in range(aut.n_states)]
        resp = {}
        for t in aut.transitions:
            act = aut.actions[t.action]
            if act.direction == "output":
                (uo if act.urgent else no)[t.source].append(t)
            else:
                key = (t.source, t.action)
                if key in resp and (resp[key].resets, resp[key].targets) != (t.resets, t.targets):
                    raise ModelError(
                        f"{aut.name}: input {t.action} not deterministic; "
                        "run the structural checks first")
                resp[key] = t
        urg_out.append(uo)
        non_urg_out.append(no)
        response.append(resp)

    free_inputs = sorted(a for a in listeners if a not in owners)
    free_urgent = [a for a in free_inputs if urgent[a]]

    init = tuple(aut.init_state for aut in automata)
    index = {init: 0}
    order = [init]
    out_edges = [] if materialize else None
    witnesses = []
    truncated = False

    succ_cache = {}
    _MISS = object()

    def fire(gs, action):
        """(resets, branches) for one action at one global state, or None."""
        key = (gs, action)
        hit = succ_cache.get(key, _MISS)
        if hit is not _MISS:
            return hit
        if len(succ_cache) > 4_000_000:
            succ_cache.clear()
        i = owners.get(action)
        resets = frozenset()
        branches = [(1.0, list(gs))]
        if i is not None:
            ts = [t for t in urg_out[i][gs[i]] + non_urg_out[i][gs[i]]
                  if t.action == action]
            if not ts or len({(t.resets, t.targets) for t in ts}) > 1:
                succ_cache[key] = None  # disabled or ambiguous producer
                return None
            t = ts[0]
            resets |= t.resets
            branches = [(p * q, _set(gsl, i, tgt))
                        for p, gsl in branches for q, tgt in t.targets]
        for j in listeners.get(action, ()):
            t = response[j].get((gs[j], action))
            if t is None:
                continue  # unwritten input state: behaves as a self-loop
            resets |= t.resets
            branches = [(p * q, _set(gsl, j, tgt))
                        for p, gsl in branches for q, tgt in t.targets]
        result = (resets, tuple((p, tuple(gsl)) for p, gsl in branches))
        succ_cache[key] = result
        return result

    pos = 0
    while pos < len(order):
        gs = order[pos]
        pos += 1
        enabled = []
        for i in range(n):
            for t in urg_out[i][gs[i]]:
                enabled.append(t.action)
        for a in free_urgent:
            enabled.append(a)
        enabled = sorted(set(enabled))
        if enabled:
            moves = enabled
        else:
            moves = sorted({t.action for i in range(n) for t in non_urg_out[i][gs[i]]})
            moves += [a for a in free_inputs if not urgent[a]]
        if check and len(enabled) > 1:
            for x in range(len(enabled)):
                for y in range(x + 1, len(enabled)):
                    wit = _square(fire, gs, enabled[x], enabled[y])
                    if wit and len(witnesses) < 50:
                        witnesses.append((_label(automata, gs), enabled[x], enabled[y]))
        for a in moves:
            res = fire(gs, a)
            if res is None:
                continue
            resets, branches = res
            tgt_ids = []
            for p, gs2 in branches:
                sid = index.get(gs2)
                if sid is None:
                    if len(order) >= max_states:
                        truncated = True
                        sid = 0  # arbitrary; exploration stops below
                    else:
                        sid = len(order)
                        index[gs2] = sid
                        order.append(gs2)
                tgt_ids.append((p, sid))
            if materialize:
                out_edges.append((index[gs], a, resets, tuple(tgt_ids)))
            if truncated:
                break
        if truncated:
            break

    result = CompositionCheck(len(order), witnesses, truncated)
    if not materialize:
        return None, result

    actions = {}
    for a, urg in urgent.items():
        direction = "output" if a in owners else "input"
        actions[a] = Action(a, direction, urg)
    clocks = {}
    init_clocks = set()
    for aut in automata:
        clocks.update(aut.clocks)
        init_clocks |= aut.init_clocks
    labels = [_label(automata, gs) for gs in order]
    # enabling clock sets are not tracked on the composed graph; the
    # analyses run on it (confluence, triggering, spontaneous sets) only
    # look at urgency and direction
    transitions = [Transition(s, frozenset(), a, r, t) for s, a, r, t in out_edges]
    composed = IosaAutomaton(name, actions, clocks, labels, transitions,
                             0, frozenset(init_clocks))
    return composed, result


def _set(lst, i, v):
    lst = list(lst)
    lst[i] = v
    return lst


def _label(automata, gs):
    return "|".join(f"{aut.name}.{aut.state_labels[s]}"
                    for aut, s in zip(automata, gs))


def _square(fire, gs, a, b):
    """True means the pair fails to commute at gs."""
    ra = fire(gs, a)
    rb = fire(gs, b)
    if ra is None or rb is None:
        return True
    da = _continue(fire, ra, b, rb[0])
    db = _continue(fire, rb, a, ra[0])
    return da is None or da != db


def _continue(fire, first, action, want_resets):
    dist = {}
    for p, gs2 in first[1]:
        r = fire(gs2, action)
        if r is None or r[0] != want_resets:
            return None
        for q, gs3 in r[1]:
            dist[gs3] = dist.get(gs3, 0.0) + p * q
    return {k: round(v, 12) for k, v in dist.items()}


# --- whole-model verdicts ----------------------------------------------------


@dataclass
class DeterminismReport:
    """Everything the check produced, plus the final verdict.

    ``certified_by`` names the stage that settled the question:
    ``component-confluence`` (every component confluent in isolation),
    ``triggering-analysis`` (the sufficient condition holds), or
    ``composed-exhaustive`` (the full timing-aware product was scanned).
    """

    weakly_deterministic: bool
    certified_by: str
    components: list
    counterexample: TheoremTuple = None
    composed_witnesses: list = field(default_factory=list)
    clusters: list = field(default_factory=list)  # (name, members, confluent)
    notes: list = field(default_factory=list)
    composed_states: int = 0


def check_model(compiled: CompiledModel, *, max_states=1_500_000) -> DeterminismReport:
    """Verdict for a compiled tree.

    Spare-gate/multiplexer groups are composed first and analyzed as one
    component each, per-module analysis being too coarse for their
    acquisition protocol.  If the sufficient condition cannot certify the
    model (it never can for spare gates: the protocol lets request chains
    trigger both fail and repair reports), the composed model itself is
    checked exhaustively.
    """
    table = compiled.table
    automata = {m.name: expand(m, table) for m in compiled.modules}
    clusters = compiled.sg_clusters()
    return _verdict_pipeline(automata, clusters, max_states=max_states)


def verdict(modules, *, table=None, max_states=1_500_000) -> DeterminismReport:
    """Verdict for a raw list of symbolic modules (no tree structure)."""
    from rftsim.iosa.symbolic import ActionTable

    if table is None:
        table = ActionTable.from_modules(modules)
    automata = {m.name: expand(m, table) for m in modules}
    return _verdict_pipeline(automata, [], max_states=max_states)


def _verdict_pipeline(automata, clusters, *, max_states):
    notes = []
    in_cluster = {name for group in clusters for name in group}
    components = []
    cluster_info = []
    for group in clusters:
        cname = "+".join(group)
        composed, _ = explore_composition(
            [automata[g] for g in group], name=cname,
            max_states=max_states, materialize=True, check=False)
        comp = analyze_component(cname, composed)
        comp.cluster_members = tuple(group)
        components.append(comp)
        cluster_info.append((cname, tuple(group), not comp.confluence.pairs))
        notes.append(
            f"partial composition {cname}: "
            f"{'confluent' if not comp.confluence.pairs else 'NOT confluent'} "
            f"({composed.n_states} states)")
    for name, aut in automata.items():
        if name not in in_cluster:
            components.append(analyze_component(name, aut))

    if all(not c.confluence.pairs for c in components):
        return DeterminismReport(True, "component-confluence", components,
                                 clusters=cluster_info, notes=notes)

    tup = find_theorem_tuple(components)
    if tup is None:
        return DeterminismReport(True, "triggering-analysis", components,
                                 clusters=cluster_info, notes=notes)

    notes.append(f"sufficient condition fails: {tup}")
    _, check = explore_composition(
        list(automata.values()), max_states=max_states, check=True)
    if check.truncated:
        notes.append(f"composed exploration truncated at {check.n_states} states; "
                     "cannot certify")
        return DeterminismReport(False, "composed-exhaustive", components, tup,
                                 check.witnesses, cluster_info, notes,
                                 check.n_states)
    if check.confluent:
        notes.append(
            f"composed model exhaustively confluent over {check.n_states} states; "
            "the sufficient-condition alarm is a false positive of the "
            "approximate triggering relation")
        return DeterminismReport(True, "composed-exhaustive", components, None,
                                 [], cluster_info, notes, check.n_states)
    return DeterminismReport(False, "composed-exhaustive", components, tup,
                             check.witnesses, cluster_info, notes, check.n_states)
