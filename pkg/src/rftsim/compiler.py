"""From validated fault trees to closed symbolic models.

Each vertex becomes one module (two for spare basic elements: the element
itself plus the multiplexer that manages its sharing).  Signals, one action
family per vertex ``v``:

* ``fl_v`` / ``up_v`` -- the element's own failure/repair instants
  (non-urgent outputs of basic elements; repair boxes and spare gates
  listen to these);
* ``f_v`` / ``u_v``   -- urgent fail/repaired notifications consumed by the
  gates ``v`` feeds;
* ``r_v``             -- repair-start command from the repair box;
* ``e_v`` / ``d_v``   -- enable/disable commands to a spare basic element;
* ``rq/asg/acc/rj/rel`` -- the spare-acquisition protocol between a spare
  gate ``g`` and the multiplexer of a spare ``s``, indexed by the pair.

Before template instantiation the tree is normalized: functional
dependencies are rewritten to OR gates, ``vot`` with threshold 1 becomes
``or``, threshold = arity becomes ``and`` (behavioral identities), and a
priority-AND over more than two inputs is cascaded into two-input ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from rftsim.errors import ModelError, UnsupportedArity
from rftsim.rft.model import ElementLabel, FaultTreeDef, Kind
from rftsim.rft.rewrite import rewrite_fdep
from rftsim.rft.validate import validate_rft
from rftsim.iosa.symbolic import ActionTable, SymbolicModule, parse_module, print_module

MONITOR_MODULE = "MONITOR"


@dataclass
class WiringPlan:
    """Action names per vertex and who produces them."""

    fl: dict = field(default_factory=dict)
    up: dict = field(default_factory=dict)
    fail: dict = field(default_factory=dict)      # f_v
    repaired: dict = field(default_factory=dict)  # u_v
    repair: dict = field(default_factory=dict)    # r_v
    enable: dict = field(default_factory=dict)    # e_v (sbe only)
    disable: dict = field(default_factory=dict)   # d_v (sbe only)
    request: dict = field(default_factory=dict)   # (g, s) -> rq name
    assign: dict = field(default_factory=dict)    # (s, g) -> asg name
    accept: dict = field(default_factory=dict)    # (g, s) -> acc name
    reject: dict = field(default_factory=dict)    # (s, g) -> rj name
    release: dict = field(default_factory=dict)   # (g, s) -> rel name
    top_fail: str = None
    top_up: str = None
    producer: dict = field(default_factory=dict)  # action -> module name


@dataclass
class GateInfo:
    """Analysis-facing summary of one compiled module."""

    module: str
    kind: str
    vertex: str
    inputs: tuple = ()


@dataclass
class CompiledModel:
    tree: FaultTreeDef          # normalized form actually compiled
    modules: list
    wiring: WiringPlan
    table: ActionTable
    gates: list
    monitor: str = MONITOR_MODULE

    def module(self, name):
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)

    def sg_clusters(self):
        """Groups of SG/MUX module names connected through shared spares."""
        adj = {}
        for g in self.gates:
            if g.kind != Kind.SG:
                continue
            for s in g.inputs[1:]:
                adj.setdefault(g.module, set()).add(f"MUX_{s}")
                adj.setdefault(f"MUX_{s}", set()).add(g.module)
        seen = set()
        clusters = []
        for start in sorted(adj):
            if start in seen:
                continue
            group = []
            stack = [start]
            seen.add(start)
            while stack:
                x = stack.pop()
                group.append(x)
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            clusters.append(sorted(group))
        return clusters


def normalize_tree(tree: FaultTreeDef) -> FaultTreeDef:
    """FDEP rewrite, vot threshold identities, and PAND cascading."""
    tree = rewrite_fdep(tree)
    vertices = list(tree.vertices)
    labels = dict(tree.labels)
    inputs = dict(tree.inputs)

    for v in list(vertices):
        lab = labels[v]
        if lab.kind == Kind.VOT:
            if lab.k == 1:
                labels[v] = ElementLabel(Kind.OR, lab.arity)
            elif lab.k == lab.arity:
                labels[v] = ElementLabel(Kind.AND, lab.arity)

    taken = set(vertices)

    def fresh(base):
        name = base
        n = 1
        while name in taken:
            n += 1
            name = f"{base}{n}"
        taken.add(name)
        return name

    for v in list(vertices):
        lab = labels[v]
        if lab.kind == Kind.PAND and lab.arity > 2:
            ins = inputs[v]
            left = ins[0]
            chain = []
            for j, nxt in enumerate(ins[1:-1]):
                c = fresh(f"{v}_c{j + 1}")
                chain.append((c, (left, nxt)))
                left = c
            pos = vertices.index(v)
            for c, pair in chain:
                vertices.insert(pos, c)
                pos += 1
                labels[c] = ElementLabel(Kind.PAND, 2)
                inputs[c] = pair
            inputs[v] = (left, ins[-1])
            labels[v] = ElementLabel(Kind.PAND, 2)

    return FaultTreeDef(vertices, labels, inputs, dict(tree.spare_users), tree.top)


def compile_tree(tree: FaultTreeDef) -> CompiledModel:
    """Instantiate and wire every template; the result is a closed model."""
    violations = validate_rft(tree)
    if violations:
        raise ModelError(
            "tree is not well-formed: " + "; ".join(str(x) for x in violations))
    tree = normalize_tree(tree)

    wiring = WiringPlan()
    for v in tree.vertices:
        kind = tree.kind(v)
        wiring.fail[v] = f"f_{v}"
        wiring.repaired[v] = f"u_{v}"
        if kind in (Kind.BE, Kind.SBE):
            wiring.fl[v] = f"fl_{v}"
            wiring.up[v] = f"up_{v}"
            wiring.repair[v] = f"r_{v}"
        if kind == Kind.SBE:
            wiring.enable[v] = f"e_{v}"
            wiring.disable[v] = f"d_{v}"
            for g in tree.spare_users.get(v, ()):
                wiring.request[(g, v)] = f"rq_{g}_{v}"
                wiring.assign[(v, g)] = f"asg_{v}_{g}"
                wiring.accept[(g, v)] = f"acc_{g}_{v}"
                wiring.reject[(v, g)] = f"rj_{v}_{g}"
                wiring.release[(g, v)] = f"rel_{g}_{v}"
    wiring.top_fail = wiring.fail[tree.top]
    wiring.top_up = wiring.repaired[tree.top]

    modules = []
    gates = []
    for v in tree.vertices:
        for mod, info in compile_vertex(v, tree.labels[v], tree, wiring):
            modules.append(mod)
            gates.append(info)
    monitor = top_event_monitor(wiring)
    modules.append(monitor)
    gates.append(GateInfo(monitor.name, "monitor", tree.top))

    table = ActionTable.from_modules(modules)
    if table.problems:
        raise ModelError("wiring is inconsistent: " + "; ".join(table.problems))
    unmatched = table.unmatched_inputs()
    if unmatched:
        raise ModelError(f"model is not closed, inputs without producers: "
                         f"{sorted(unmatched)}")
    for m in modules:
        for t in m.transitions:
            if not t.is_input and t.label != "_":
                wiring.producer[m.label_of(t)] = m.name
    return CompiledModel(tree, modules, wiring, table, gates)


def compile_vertex(v, label: ElementLabel, tree: FaultTreeDef, wiring: WiringPlan):
    """Modules for one vertex, as (module, info) pairs."""
    kind = label.kind
    if kind == Kind.BE:
        return [(
            _parse(_be_text(v, label.active_fail, label.repair)),
            GateInfo(f"BE_{v}", Kind.BE, v),
        )]
    if kind == Kind.SBE:
        users = tree.spare_users.get(v, ())
        sbe = _parse(_sbe_text(v, label))
        mux = _parse(_mux_text(v, users))
        return [
            (sbe, GateInfo(f"SBE_{v}", Kind.SBE, v)),
            (mux, GateInfo(f"MUX_{v}", "mux", v, users)),
        ]
    if kind in (Kind.AND, Kind.OR):
        ins = tree.inputs[v]
        text = _counter_gate_text(kind, v, ins, len(ins))
        return [(_parse(text), GateInfo(f"{kind.upper()}_{v}", kind, v, ins))]
    if kind == Kind.VOT:
        ins = tree.inputs[v]
        text = _vot_text(v, ins, label.k)
        return [(_parse(text), GateInfo(f"VOT_{v}", Kind.VOT, v, ins))]
    if kind == Kind.PAND:
        ins = tree.inputs[v]
        if len(ins) != 2:
            raise UnsupportedArity(
                f"{v}: priority-AND must be cascaded to 2 inputs before compiling")
        return [(_parse(_pand_text(v, ins)),
                 GateInfo(f"PAND_{v}", Kind.PAND, v, ins))]
    if kind == Kind.RBOX:
        ins = tree.inputs[v]
        text = {
            "priority": _rbox_priority_text,
            "fcfs": _rbox_fcfs_text,
            "random": _rbox_random_text,
        }[label.policy](v, ins)
        return [(_parse(text), GateInfo(f"RBOX_{v}", Kind.RBOX, v, ins))]
    if kind == Kind.SG:
        ins = tree.inputs[v]
        if len(ins) < 2:
            raise UnsupportedArity(f"{v}: spare gate needs at least one spare input")
        return [(_parse(_sg_text(v, ins[0], ins[1:])),
                 GateInfo(f"SG_{v}", Kind.SG, v, ins))]
    if kind == Kind.FDEP:
        raise ModelError(f"{v}: functional dependencies must be rewritten first")
    raise UnsupportedArity(f"{v}: cannot compile element kind {kind!r}")


def top_event_monitor(wiring: WiringPlan) -> SymbolicModule:
    """Pure listener tracking whether the top event currently holds."""
    return _parse(f"""
module {MONITOR_MODULE}
  failed : bool init false;
  [{wiring.top_fail}??] !failed -> (failed' = true);
  [{wiring.top_up}??] failed -> (failed' = false);
endmodule
""")


def emit_iosa(compiled: CompiledModel) -> str:
    """The whole model as one text file with a manifest header."""
    lines = ["// compiled repairable fault tree model"]
    lines.append(f"// top vertex: {compiled.tree.top} "
                 f"(monitor listens to {compiled.wiring.top_fail}/{compiled.wiring.top_up})")
    for g in compiled.gates:
        extra = f" inputs: {','.join(g.inputs)}" if g.inputs else ""
        lines.append(f"// module {g.module}: {g.kind} for vertex {g.vertex}{extra}")
    lines.append("")
    lines.append("\n".join(print_module(m) for m in compiled.modules))
    return "\n".join(lines)


def _parse(text) -> SymbolicModule:
    try:
        return parse_module(text)
    except Exception as exc:  # a template bug, not a user error
        raise AssertionError(f"generated template failed to parse: {exc}\n{text}")


# --- template texts --------------------------------------------------------


def _be_text(v, mu, gamma):
    return f"""
module BE_{v}
  fc_{v} : clock;
  rc_{v} : clock;
  inform : [0..2] init 0;
  broken : [0..2] init 0;

  [fl_{v}!] broken = 0 @ fc_{v} -> (inform' = 1) & (broken' = 1);
  [r_{v}??] broken = 1 -> (broken' = 2) & (rc_{v}' = {gamma});
  [up_{v}!] broken = 2 @ rc_{v} -> (inform' = 2) & (broken' = 0) & (fc_{v}' = {mu});
  [f_{v}!!] inform = 1 -> (inform' = 0);
  [u_{v}!!] inform = 2 -> (inform' = 0);
endmodule
"""


def _sbe_text(v, label):
    mu, nu, gamma = label.active_fail, label.dormant_fail, label.repair
    return f"""
module SBE_{v}
  fc_{v} : clock;
  dfc_{v} : clock;
  rc_{v} : clock;
  inform : [0..2] init 0;
  active : bool init false;
  broken : [0..2] init 0;

  [e_{v}??] !active -> (active' = true) & (fc_{v}' = {mu});
  [d_{v}??] active -> (active' = false) & (dfc_{v}' = {nu});

  [fl_{v}!] active & broken = 0 @ fc_{v} -> (inform' = 1) & (broken' = 1);
  [fl_{v}!] !active & broken = 0 @ dfc_{v} -> (inform' = 1) & (broken' = 1);
  [r_{v}??] true -> (broken' = 2) & (rc_{v}' = {gamma});
  [up_{v}!] active & broken = 2 @ rc_{v} -> (inform' = 2) & (broken' = 0) & (fc_{v}' = {mu});
  [up_{v}!] !active & broken = 2 @ rc_{v} -> (inform' = 2) & (broken' = 0) & (dfc_{v}' = {nu});

  [f_{v}!!] inform = 1 -> (inform' = 0);
  [u_{v}!!] inform = 2 -> (inform' = 0);
endmodule
"""


def _counter_gate_text(kind, v, ins, n):
    head = f"""
module {kind.upper()}_{v}
  informf : bool init false;
  informu : bool init false;
  count : [0..{n}] init 0;
"""
    lines = []
    for x in ins:
        if kind == Kind.AND:
            lines.append(f"  [f_{x}??] count = {n - 1} -> (count' = {n}) & (informf' = true);")
            if n > 1:
                lines.append(f"  [f_{x}??] count < {n - 1} -> (count' = count + 1);")
            lines.append(f"  [f_{x}??] count = {n} -> ;")
        else:
            lines.append(f"  [f_{x}??] count = 0 -> (count' = 1) & (informf' = true);")
            if n > 1:
                lines.append(f"  [f_{x}??] count > 0 & count < {n} -> (count' = count + 1);")
    lines.append("")
    for x in ins:
        if kind == Kind.AND:
            lines.append(f"  [u_{x}??] count = {n} -> (count' = {n - 1}) & (informu' = true);")
            if n > 1:
                lines.append(f"  [u_{x}??] count > 0 & count < {n} -> (count' = count - 1);")
            lines.append(f"  [u_{x}??] count = 0 -> ;")
        else:
            lines.append(f"  [u_{x}??] count = 1 -> (count' = 0) & (informu' = true);")
            if n > 1:
                lines.append(f"  [u_{x}??] count > 1 -> (count' = count - 1);")
    if kind == Kind.AND:
        tail = f"""
  [f_{v}!!] informf & count = {n} -> (informf' = false);
  [u_{v}!!] informu & count != {n} -> (informu' = false);
endmodule
"""
    else:
        tail = f"""
  [f_{v}!!] informf & count != 0 -> (informf' = false);
  [u_{v}!!] informu & count = 0 -> (informu' = false);
endmodule
"""
    return head + "\n".join(lines) + tail


def _vot_text(v, ins, k):
    n = len(ins)
    lines = [f"""
module VOT_{v}
  count : [0..{n}] init 0;
  inform : bool init false;
"""]
    for x in ins:
        lines.append(
            f"  [f_{x}??] count < {n} -> (count' = count + 1) & (inform' = (count + 1 = {k}));")
    lines.append("")
    for x in ins:
        lines.append(
            f"  [u_{x}??] count > 0 -> (count' = count - 1) & (inform' = (count = {k}));")
    lines.append(f"""
  [f_{v}!!] inform & count >= {k} -> (inform' = false);
  [u_{v}!!] inform & count < {k} -> (inform' = false);
endmodule
""")
    return "\n".join(lines)


def _pand_text(v, ins):
    fa, fb = (f"f_{x}" for x in ins)
    ua, ub = (f"u_{x}" for x in ins)
    return f"""
module PAND_{v}
  f0 : bool init false;
  f1 : bool init false;
  st : [0..4] init 0;

  [_?] st = 0 & f1 & !f0 -> (st' = 4);

  [{fa}??] st = 0 & !f0 & !f1 -> (f0' = true);
  [{fa}??] st = 0 & !f0 & f1 -> (st' = 1) & (f0' = true);
  [{fa}??] st != 0 & !f0 -> (f0' = true);

  [{fb}??] st = 0 & !f0 & !f1 -> (f1' = true);
  [{fb}??] st = 0 & f0 & !f1 -> (st' = 1) & (f1' = true);
  [{fb}??] st = 3 & !f1 -> (st' = 2) & (f1' = true);
  [{fb}??] (st = 1 | st = 2 | st = 4) & !f1 -> (f1' = true);

  [{ua}??] st != 1 & f0 -> (f0' = false);
  [{ua}??] st = 1 & f0 -> (st' = 0) & (f0' = false);

  [{ub}??] (st = 0 | st = 3) & f1 -> (f1' = false);
  [{ub}??] (st = 1 | st = 4) & f1 -> (st' = 0) & (f1' = false);
  [{ub}??] st = 2 & f1 -> (st' = 3) & (f1' = false);

  [f_{v}!!] st = 1 -> (st' = 2);
  [u_{v}!!] st = 3 -> (st' = 0);
endmodule
"""


def _rbox_priority_text(v, ins):
    n = len(ins)
    lines = [f"""
module RBOX_{v}
  broken[{n}] : bool init false;
  busy : bool init false;
"""]
    for i, x in enumerate(ins):
        lines.append(f"  [fl_{x}?] true -> (broken[{i}]' = true);")
    lines.append("")
    for i, x in enumerate(ins):
        higher = " & ".join(f"!broken[{j}]" for j in range(i))
        guard = f"!busy & broken[{i}]" + (f" & {higher}" if higher else "")
        lines.append(f"  [r_{x}!!] {guard} -> (busy' = true);")
    lines.append("")
    for i, x in enumerate(ins):
        lines.append(f"  [up_{x}?] true -> (broken[{i}]' = false) & (busy' = false);")
    lines.append("endmodule\n")
    return "\n".join(lines)


def _rbox_fcfs_text(v, ins):
    n = len(ins)
    lines = [f"""
module RBOX_{v}
  queue[{n}] : [0..{n}] init 0;
  busy : bool init false;
  r : [0..{n}] init {n};
  dummy : [0..0] init 0;
"""]
    for i, x in enumerate(ins):
        lines.append(f"  [fl_{x}?] true -> (dummy' = broken(queue, {i}));")
    lines.append("")
    lines.append(f"  [!!] fstexclude(queue, 0) != -1 & r = {n} -> (r' = maxfrom(queue, 0));")
    lines.append("")
    for i, x in enumerate(ins):
        lines.append(f"  [r_{x}!!] !busy & r = {i} -> (busy' = true) & (queue[{i}]' = 0);")
    lines.append("")
    for i, x in enumerate(ins):
        lines.append(f"  [up_{x}?] true -> (queue[{i}]' = 0) & (busy' = false) & (r' = {n});")
    lines.append("endmodule\n")
    return "\n".join(lines)


def _rbox_random_text(v, ins):
    n = len(ins)
    lines = [f"""
module RBOX_{v}
  broken[{n}] : bool init false;
  busy : bool init false;
  r : [0..{n}] init {n};
"""]
    for i, x in enumerate(ins):
        lines.append(f"  [fl_{x}?] true -> (broken[{i}]' = true);")
    lines.append("")
    lines.append(f"  [!!] some(broken) & r = {n} -> (r' = random(broken));")
    lines.append("")
    for i, x in enumerate(ins):
        lines.append(f"  [r_{x}!!] !busy & r = {i} -> (busy' = true);")
    lines.append("")
    for i, x in enumerate(ins):
        lines.append(f"  [up_{x}?] true -> (broken[{i}]' = false) & (busy' = false) & (r' = {n});")
    lines.append("endmodule\n")
    return "\n".join(lines)


def _sg_text(g, main, spares):
    k = len(spares)
    lines = [f"""
module SG_{g}
  state : [0..4] init 0;
  inform : [0..2] init 0;
  release : [-{k}..{k}] init 0;
  idx : [1..{k}] init 1;

  [fl_{main}?] state = 0 -> (state' = 1) & (idx' = 1);
  [up_{main}?] state = 4 -> (state' = 0) & (inform' = 2);"""]
    for i in range(1, k + 1):
        lines.append(f"  [up_{main}?] state = 3 & idx = {i} -> "
                     f"(state' = 0) & (idx' = 1) & (release' = {i});")
    lines.append("")
    for i, s in enumerate(spares, start=1):
        lines.append(f"  [fl_{s}?] state = 3 & idx = {i} -> (release' = {i});")
    lines.append("")
    for i, s in enumerate(spares, start=1):
        lines.append(f"  [rq_{g}_{s}!!] state = 1 & idx = {i} -> (state' = 2);")
    lines.append("")
    for i, s in enumerate(spares, start=1):
        lines.append(f"  [asg_{s}_{g}??] state = 0 | state = 1 | state = 3 -> (release' = {i});")
        lines.append(f"  [asg_{s}_{g}??] state = 2 & idx = {i} -> "
                     f"(release' = -{i}) & (state' = 3);")
        lines.append(f"  [asg_{s}_{g}??] state = 4 -> "
                     f"(release' = -{i}) & (state' = 3) & (idx' = {i}) & (inform' = 2);")
    lines.append("")
    for i, s in enumerate(spares, start=1):
        if i < k:
            lines.append(f"  [rj_{s}_{g}??] state = 2 & idx = {i} -> "
                         f"(idx' = {i + 1}) & (state' = 1);")
        else:
            lines.append(f"  [rj_{s}_{g}??] state = 2 & idx = {i} -> "
                         f"(state' = 4) & (idx' = 1) & (inform' = 1);")
    lines.append("")
    for i, s in enumerate(spares, start=1):
        lines.append(f"  [rel_{g}_{s}!!] release = {i} & !(state = 3 & idx = {i}) -> "
                     f"(release' = 0);")
        lines.append(f"  [rel_{g}_{s}!!] release = {i} & state = 3 & idx = {i} -> "
                     f"(release' = 0) & (state' = 1) & (idx' = 1);")
    lines.append("")
    for i, s in enumerate(spares, start=1):
        lines.append(f"  [acc_{g}_{s}!!] release = -{i} -> (release' = 0);")
    lines.append(f"""
  [f_{g}!!] inform = 1 -> (inform' = 0);
  [u_{g}!!] inform = 2 -> (inform' = 0);
endmodule
""")
    return "\n".join(lines)


def _mux_text(s, users):
    m = len(users)
    if m == 0:
        # an unshared spare: nothing ever enables it, the element stays dormant
        return f"""
module MUX_{s}
  avail : bool init true;
  broken : bool init false;
  enable : [0..2] init 0;

  [fl_{s}?] true -> (broken' = true);
  [up_{s}?] true -> (broken' = false);
  [e_{s}!!] enable = 1 -> (enable' = 0);
  [d_{s}!!] enable = 2 -> (enable' = 0);
endmodule
"""
    lines = [f"""
module MUX_{s}
  queue[{m}] : [0..3] init 0;
  avail : bool init true;
  broken : bool init false;
  enable : [0..2] init 0;

  [fl_{s}?] true -> (broken' = true);
  [up_{s}?] true -> (broken' = false);

  [e_{s}!!] enable = 1 -> (enable' = 0);
  [d_{s}!!] enable = 2 -> (enable' = 0);
"""]
    for j, g in enumerate(users):
        priority = " & ".join(f"queue[{i}] = 0" for i in range(j))
        pr = f"{priority} & " if priority else ""
        lines.append(f"  [rq_{g}_{s}??] queue[{j}] = 0 & (broken | !avail) -> (queue[{j}]' = 2);")
        lines.append(f"  [rq_{g}_{s}??] queue[{j}] = 0 & !broken & avail -> (queue[{j}]' = 1);")
        # enable = 0: the activation mailbox must drain before a handoff,
        # otherwise an accept overwrites a pending disable and the firing
        # order becomes visible through the spare's clock resets
        lines.append(f"  [asg_{s}_{g}!!] queue[{j}] = 1 & {pr}!broken & avail & enable = 0 -> "
                     f"(queue[{j}]' = 3) & (avail' = false);")
        lines.append(f"  [rj_{s}_{g}!!] queue[{j}] = 2 -> (queue[{j}]' = 1);")
        lines.append(f"  [rel_{g}_{s}??] queue[{j}] = 3 -> "
                     f"(queue[{j}]' = 0) & (avail' = true) & (enable' = 2);")
        lines.append(f"  [acc_{g}_{s}??] true -> (enable' = 1);")
        lines.append("")
    lines.append("endmodule\n")
    return "\n".join(lines)
