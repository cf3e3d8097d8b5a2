"""Text format for repairable fault trees.

Galileo-inspired, one statement per line, ``;``-terminated, ``//`` comments::

    toplevel T;
    T and A B;
    A be fail=exponential(0.01) repair=exponential(1.0);
    B be fail=exponential(0.02) repair=exponential(1.0);
    S sbe fail=exponential(0.02) dormant=exponential(0.001) repair=exponential(1.0);
    G sg A S;
    V vot 2 A B S;
    D fdep A B C;
    R rbox prio A B;

Repair box policies are ``prio``, ``fcfs``, ``random``.  Distributions:
``exponential(rate)``, ``uniform(low,high)``, ``weibull(shape,scale)``,
``lognormal(mu,sigma)``, ``erlang(k,rate)``.

Parsing checks syntax only (plus name resolution and distribution
parameter domains); the structural rules live in ``validate_rft``.
"""

from __future__ import annotations

import re

from rftsim.distributions import FAMILIES, Distribution
from rftsim.errors import ParseError
from rftsim.rft.model import ElementLabel, FaultTreeDef, Kind

_TOKEN = re.compile(
    r"""(?P<ws>\s+|//[^\n]*)
      | (?P<num>\d+(\.\d+)?([eE][+-]?\d+)?)
      | (?P<name>[A-Za-z][A-Za-z0-9_]*)
      | (?P<sym>[;=(),-])
    """,
    re.VERBOSE,
)

_POLICY = {"prio": "priority", "fcfs": "fcfs", "random": "random"}
_POLICY_BACK = {v: k for k, v in _POLICY.items()}


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text):
    toks = []
    pos = 0
    line, col = 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        lex = m.group(0)
        if m.lastgroup != "ws":
            kind = {"num": "NUM", "name": "NAME", "sym": lex}[m.lastgroup]
            toks.append(_Tok(kind, lex, line, col))
        nl = lex.count("\n")
        if nl:
            line += nl
            col = len(lex) - lex.rfind("\n")
        else:
            col += len(lex)
        pos = m.end()
    toks.append(_Tok("EOF", "", line, col))
    return toks


class _P:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def expect(self, kind, what=None):
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"got {t.text or 'end of input'!r}", t.line, t.col,
                             (what or kind,))
        return self.next()

    def name(self, what="a name"):
        return self.expect("NAME", what).text


def parse_rft(text) -> FaultTreeDef:
    """Parse a tree exactly as written; no structural validation."""
    p = _P(_tokenize(text))
    vertices = []
    labels = {}
    inputs = {}
    refs = []  # (name, line, col) for the undeclared-reference check
    top = None
    top_seen = False

    while p.peek().kind != "EOF":
        t = p.peek()
        if t.kind != "NAME":
            raise ParseError(f"got {t.text!r}", t.line, t.col, ("a statement",))
        word = p.next()
        if word.text == "toplevel":
            if top_seen:
                raise ParseError("duplicate toplevel statement", word.line, word.col)
            top_seen = True
            nt = p.expect("NAME", "vertex name")
            top = nt.text
            refs.append((top, nt.line, nt.col))
            p.expect(";")
            continue
        vname = word.text
        if vname in labels:
            raise ParseError(f"duplicate vertex name {vname!r}", word.line, word.col)
        kw = p.expect("NAME", "an element kind")
        kind = kw.text.lower()
        if kind == Kind.BE:
            dists = _dists(p, ("fail", "repair"), kw)
            label = ElementLabel(Kind.BE, 0, active_fail=dists["fail"],
                                 repair=dists["repair"])
            ins = ()
        elif kind == Kind.SBE:
            dists = _dists(p, ("fail", "dormant", "repair"), kw)
            label = ElementLabel(Kind.SBE, 0, active_fail=dists["fail"],
                                 dormant_fail=dists["dormant"],
                                 repair=dists["repair"])
            ins = ()
        elif kind in (Kind.AND, Kind.OR, Kind.PAND, Kind.FDEP, Kind.SG):
            ins = _input_list(p, refs)
            label = _label(kind, len(ins), kw)
        elif kind == Kind.VOT:
            ktok = p.expect("NUM", "the voting threshold k")
            if "." in ktok.text or "e" in ktok.text.lower():
                raise ParseError("k must be an integer", ktok.line, ktok.col)
            ins = _input_list(p, refs)
            label = _label(Kind.VOT, len(ins), kw, k=int(ktok.text))
        elif kind == Kind.RBOX:
            ptok = p.expect("NAME", "a policy (prio, fcfs, random)")
            if ptok.text not in _POLICY:
                raise ParseError(f"unknown policy {ptok.text!r}", ptok.line, ptok.col,
                                 tuple(_POLICY))
            ins = _input_list(p, refs)
            label = _label(Kind.RBOX, len(ins), kw, policy=_POLICY[ptok.text])
        else:
            raise ParseError(f"unknown element kind {kind!r}", kw.line, kw.col,
                             Kind.ALL)
        p.expect(";")
        vertices.append(vname)
        labels[vname] = label
        inputs[vname] = ins

    if top is None:
        raise ParseError("missing toplevel statement", 1, 1)
    for name, line, col in refs:
        if name not in labels:
            raise ParseError(f"reference to undeclared vertex {name!r}", line, col)

    spare_users = {}
    for v in vertices:
        if labels[v].kind == Kind.SG:
            for s in inputs[v][1:]:
                spare_users.setdefault(s, []).append(v)
    spare_users = {s: tuple(gs) for s, gs in spare_users.items()}
    return FaultTreeDef(vertices, labels, inputs, spare_users, top)


def _label(kind, arity, tok, **kw):
    try:
        return ElementLabel(kind, arity, **kw)
    except ValueError as exc:
        raise ParseError(str(exc), tok.line, tok.col) from None


def _input_list(p, refs):
    ins = []
    while p.peek().kind == "NAME":
        t = p.next()
        ins.append(t.text)
        refs.append((t.text, t.line, t.col))
    if not ins:
        t = p.peek()
        raise ParseError("expected at least one input", t.line, t.col)
    return tuple(ins)


def _dists(p, fields, kw):
    out = {}
    for f in fields:
        ft = p.expect("NAME", f)
        if ft.text != f:
            raise ParseError(f"got {ft.text!r}", ft.line, ft.col, (f + "=...",))
        p.expect("=")
        out[f] = _dist(p)
    return out


def _dist(p):
    ft = p.expect("NAME", "a distribution family")
    fam = ft.text
    if fam not in FAMILIES:
        raise ParseError(f"unknown distribution {fam!r}", ft.line, ft.col,
                         tuple(FAMILIES))
    p.expect("(")
    params = [_num(p)]
    while p.peek().kind == ",":
        p.next()
        params.append(_num(p))
    p.expect(")")
    try:
        return Distribution(fam, tuple(params))
    except ValueError as exc:
        raise ParseError(str(exc), ft.line, ft.col) from None


def _num(p):
    neg = False
    if p.peek().kind == "-":
        p.next()
        neg = True
    t = p.peek()
    if t.kind == "NUM":
        p.next()
        x = float(t.text)
        return -x if neg else x
    raise ParseError(f"got {t.text!r}", t.line, t.col, ("a number",))


def print_rft(tree: FaultTreeDef) -> str:
    """Canonical text; ``parse_rft`` inverts it exactly."""
    out = [f"toplevel {tree.top};"]
    for v in tree.vertices:
        lab = tree.labels[v]
        k = lab.kind
        if k == Kind.BE:
            out.append(f"{v} be fail={lab.active_fail} repair={lab.repair};")
        elif k == Kind.SBE:
            out.append(f"{v} sbe fail={lab.active_fail} dormant={lab.dormant_fail} "
                       f"repair={lab.repair};")
        elif k == Kind.VOT:
            out.append(f"{v} vot {lab.k} {' '.join(tree.inputs[v])};")
        elif k == Kind.RBOX:
            out.append(f"{v} rbox {_POLICY_BACK[lab.policy]} {' '.join(tree.inputs[v])};")
        else:
            out.append(f"{v} {k} {' '.join(tree.inputs[v])};")
    return "\n".join(out) + "\n"
