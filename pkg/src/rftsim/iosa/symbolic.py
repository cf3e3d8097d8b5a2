"""The symbolic modelling language for stochastic automata.

A model is a set of ``module ... endmodule`` blocks.  Each module declares
boolean/ranged-integer variables, arrays, and clocks, followed by guarded
transitions::

    module BE
      fc, rc : clock;         // clocks (comma lists are accepted)
      inform : [0..2] init 0;
      broken : [0..2] init 0;

      [fl!] broken = 0 @ fc -> (inform' = 1) & (broken' = 1);
      [r??] broken = 1 -> (broken' = 2) & (rc' = exponential(1.0));
      [up!] broken = 2 @ rc -> (inform' = 2) & (broken' = 0) & (fc' = exponential(0.01));
      [f!!] inform = 1 -> (inform' = 0);
      [u!!] inform = 2 -> (inform' = 0);
    endmodule

Label decorations: ``?`` non-urgent input, ``??`` urgent input, ``!``
non-urgent output (requires an ``@ clock`` enabling clause), ``!!`` urgent
output.  ``[!!]`` with no name is a silent urgent output private to its
module.  ``[_?]`` is the wildcard input that synchronizes with every
non-urgent output of the surrounding model.  Assigning a distribution to a
clock (``(rc' = exponential(1.0))``) resets that clock.

States not covered by the written transitions of an input label are
tacitly completed with self-loops when the module is expanded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from rftsim.distributions import FAMILIES, Distribution
from rftsim.errors import ParseError
from rftsim.iosa.expr import (
    TRUE,
    Arr,
    Bin,
    Call,
    EFFECT_INTRINSICS,
    Lit,
    PURE_INTRINSICS,
    Una,
    Var,
    expr_to_str,
)

WILDCARD = "_"

_KEYWORDS = {
    "module", "endmodule", "init", "clock", "bool", "boolean", "true", "false",
}

_SYMBOLS = [
    "->", "..", "!=", "<=", ">=", "==", "??", "!!",
    "[", "]", "(", ")", ":", ";", ",", "=", "<", ">", "!", "?", "@", "'",
    "&", "|", "+", "-", "*", "/",
]


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, INT, FLOAT, SYM, KW, EOF
    text: str
    line: int
    col: int


def tokenize(text):
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            # a lone "_" is the wildcard label; names otherwise start with
            # a letter and may contain letters, digits and underscores
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "KW" if word in _KEYWORDS else "NAME"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            # A '.' starts a fraction only when not the '..' range symbol.
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                if j < n and text[j] in "eE":
                    k = j + 1
                    if k < n and text[k] in "+-":
                        k += 1
                    if k < n and text[k].isdigit():
                        j = k
                        while j < n and text[j].isdigit():
                            j += 1
                toks.append(Token("FLOAT", text[i:j], line, col))
            else:
                toks.append(Token("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token("SYM", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("EOF", "", line, col))
    return toks


@dataclass(frozen=True)
class VarDecl:
    name: str
    typ: object  # "bool" or (lo, hi)
    init: object


@dataclass(frozen=True)
class ArrayDecl:
    name: str
    length: int
    typ: object
    init: object


@dataclass(frozen=True)
class SymbolicTransition:
    """One guarded command.

    ``label`` is None for the silent urgent output, ``"_"`` for the
    wildcard input.  ``assigns`` pairs targets with expressions, where a
    target is ``("var", name)`` or ``("arr", name, index)``.  ``resets``
    pairs clock names with their laws.
    """

    label: object
    deco: str
    guard: object = TRUE
    clock: object = None
    assigns: tuple = ()
    resets: tuple = ()

    @property
    def is_input(self):
        return self.deco in ("?", "??")

    @property
    def is_urgent(self):
        return self.deco in ("??", "!!")


@dataclass
class SymbolicModule:
    name: str
    variables: list = field(default_factory=list)
    arrays: list = field(default_factory=list)
    clocks: list = field(default_factory=list)
    transitions: list = field(default_factory=list)

    def decl(self, name):
        for v in self.variables:
            if v.name == name:
                return v
        for a in self.arrays:
            if a.name == name:
                return a
        return None

    @property
    def silent_label(self):
        """Synthesized private name for this module's silent urgent output."""
        base = f"tau_{self.name}"
        taken = {t.label for t in self.transitions if isinstance(t.label, str)}
        while base in taken:
            base += "_"
        return base

    def label_of(self, t: SymbolicTransition):
        if t.label is None:
            return self.silent_label
        return t.label

    def explicit_labels(self):
        return {t.label for t in self.transitions if t.label not in (None, WILDCARD)}

    def has_wildcard(self):
        return any(t.label == WILDCARD for t in self.transitions)


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self, ahead=0):
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def fail(self, message, expected=()):
        t = self.peek()
        raise ParseError(message, t.line, t.col, expected)

    def expect(self, kind, text=None):
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            self.fail(f"got {t.text!r}", expected=(text or kind,))
        return self.next()

    def at_sym(self, text):
        t = self.peek()
        return t.kind == "SYM" and t.text == text

    def eat_sym(self, text):
        if self.at_sym(text):
            self.next()
            return True
        return False

    # --- model / module -------------------------------------------------

    def model(self):
        modules = []
        while self.peek().kind != "EOF":
            modules.append(self.module())
        if not modules:
            self.fail("empty model", expected=("module",))
        names = [m.name for m in modules]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})[0]
            raise ParseError(f"duplicate module name {dup!r}")
        return modules

    def module(self):
        self.expect("KW", "module")
        name = self.expect("NAME").text
        mod = SymbolicModule(name)
        while self.peek().kind == "NAME":
            self.declaration(mod)
        while self.at_sym("["):
            mod.transitions.append(self.transition(mod))
        if not mod.transitions:
            self.fail("module needs at least one transition", expected=("[",))
        self.expect("KW", "endmodule")
        return mod

    def declaration(self, mod):
        names = [self.expect("NAME").text]
        length = None
        if self.eat_sym("["):
            length = self.int_lit()
            self.expect("SYM", "]")
        while self.eat_sym(","):
            if length is not None:
                self.fail("arrays cannot be declared in comma lists")
            names.append(self.expect("NAME").text)
        self.expect("SYM", ":")
        tok = self.peek()
        if tok.kind == "KW" and tok.text == "clock":
            self.next()
            self.expect("SYM", ";")
            if length is not None:
                self.fail("clocks cannot be arrays")
            for n in names:
                self._check_fresh(mod, n, tok)
                mod.clocks.append(n)
            return
        typ = self.type_spec()
        self.expect("KW", "init")
        init = self.value_lit()
        self.expect("SYM", ";")
        for n in names:
            self._check_fresh(mod, n, tok)
            _check_init(typ, init, tok)
            if length is None:
                mod.variables.append(VarDecl(n, typ, init))
            else:
                if length < 1:
                    raise ParseError(f"array {n} needs positive length", tok.line, tok.col)
                mod.arrays.append(ArrayDecl(n, length, typ, init))

    def _check_fresh(self, mod, name, tok):
        if mod.decl(name) is not None or name in mod.clocks:
            raise ParseError(f"duplicate declaration {name!r}", tok.line, tok.col)

    def type_spec(self):
        tok = self.peek()
        if tok.kind == "KW" and tok.text in ("bool", "boolean"):
            self.next()
            return "bool"
        if self.eat_sym("["):
            lo = self.int_lit()
            self.expect("SYM", "..")
            hi = self.int_lit()
            self.expect("SYM", "]")
            if lo > hi:
                raise ParseError(f"empty range [{lo}..{hi}]", tok.line, tok.col)
            return (lo, hi)
        self.fail(f"got {tok.text!r}", expected=("bool", "[lo..hi]"))

    def int_lit(self):
        neg = self.eat_sym("-")
        t = self.expect("INT")
        return -int(t.text) if neg else int(t.text)

    def value_lit(self):
        t = self.peek()
        if t.kind == "KW" and t.text in ("true", "false"):
            self.next()
            return t.text == "true"
        return self.int_lit()

    # --- transitions ----------------------------------------------------

    def transition(self, mod):
        open_tok = self.expect("SYM", "[")
        label, deco = self.label_part()
        self.expect("SYM", "]")
        guard = TRUE
        if not (self.at_sym("@") or self.at_sym("->")):
            guard = self.expression()
        clock = None
        if self.eat_sym("@"):
            ctok = self.expect("NAME")
            clock = ctok.text
            if clock not in mod.clocks:
                raise ParseError(f"unknown clock {clock!r}", ctok.line, ctok.col)
        self.expect("SYM", "->")
        assigns, resets = [], []
        if not self.at_sym(";"):
            self.assignment(mod, assigns, resets)
            while self.eat_sym("&"):
                self.assignment(mod, assigns, resets)
        self.expect("SYM", ";")
        if deco == "!" and clock is None:
            raise ParseError(
                "non-urgent output needs an enabling clock (@ c)",
                open_tok.line, open_tok.col,
            )
        if deco != "!" and clock is not None:
            raise ParseError(
                f"only non-urgent outputs may carry an enabling clock, not {deco!r}",
                open_tok.line, open_tok.col,
            )
        return SymbolicTransition(
            label, deco, guard, clock, tuple(assigns), tuple(resets)
        )

    def label_part(self):
        t = self.peek()
        if t.kind == "SYM" and t.text == "!!":
            self.next()
            return None, "!!"  # silent urgent output
        if t.kind != "NAME":
            self.fail(f"got {t.text!r}", expected=("label",))
        name = self.next().text
        for deco in ("??", "!!", "?", "!"):
            if self.eat_sym(deco):
                if name == WILDCARD and deco != "?":
                    self.fail("the wildcard label only takes '?'")
                return name, deco
        self.fail("transition label needs a decoration", expected=("?", "??", "!", "!!"))

    def assignment(self, mod, assigns, resets):
        self.expect("SYM", "(")
        ntok = self.expect("NAME")
        name = ntok.text
        index = None
        if self.eat_sym("["):
            index = self.int_lit()
            self.expect("SYM", "]")
        self.expect("SYM", "'")
        self.expect("SYM", "=")
        rhs = self.expression(allow_float=True)
        self.expect("SYM", ")")
        if name in mod.clocks:
            if index is not None:
                raise ParseError(f"{name} is a clock, not an array", ntok.line, ntok.col)
            dist = _as_distribution(rhs, ntok)
            resets.append((name, dist))
            return
        decl = mod.decl(name)
        if decl is None:
            raise ParseError(f"assignment to undeclared {name!r}", ntok.line, ntok.col)
        if isinstance(decl, ArrayDecl):
            if index is None:
                # whole-array targets only arise through the bump intrinsic
                raise ParseError(
                    f"{name} is an array; assign a cell {name}[i]", ntok.line, ntok.col
                )
            if not 0 <= index < decl.length:
                raise ParseError(
                    f"index {index} out of bounds for {name}[{decl.length}]",
                    ntok.line, ntok.col,
                )
            target = ("arr", name, index)
        else:
            if index is not None:
                raise ParseError(f"{name} is not an array", ntok.line, ntok.col)
            target = ("var", name)
        _reject_floats(rhs, ntok)
        assigns.append((target, rhs))

    # --- expressions ------------------------------------------------------
    # Precedence climbing: | < & < comparisons < additive < multiplicative
    # < unary.  '=' is equality inside expressions (assignment uses ').

    def expression(self, allow_float=False):
        return self.expr_or(allow_float)

    def expr_or(self, af):
        e = self.expr_and(af)
        while self.at_sym("|"):
            self.next()
            e = Bin("|", e, self.expr_and(af))
        return e

    def expr_and(self, af):
        e = self.expr_cmp(af)
        while self.at_sym("&"):
            self.next()
            e = Bin("&", e, self.expr_cmp(af))
        return e

    def expr_cmp(self, af):
        e = self.expr_add(af)
        # '==' shows up in the wild as a synonym for '='
        for op in ("!=", "<=", ">=", "==", "<", ">", "="):
            if self.at_sym(op):
                self.next()
                return Bin("=" if op == "==" else op, e, self.expr_add(af))
        return e

    def expr_add(self, af):
        e = self.expr_mul(af)
        while self.at_sym("+") or self.at_sym("-"):
            op = self.next().text
            e = Bin(op, e, self.expr_mul(af))
        return e

    def expr_mul(self, af):
        e = self.expr_unary(af)
        while self.at_sym("*") or self.at_sym("/"):
            op = self.next().text
            rhs = self.expr_unary(af)
            if op == "/" and not (isinstance(rhs, Lit) and rhs.value not in (0, False)):
                self.fail("division only by a nonzero literal")
            e = Bin(op, e, rhs)
        return e

    def expr_unary(self, af):
        if self.at_sym("!"):
            self.next()
            return Una("!", self.expr_unary(af))
        if self.at_sym("-"):
            self.next()
            arg = self.expr_unary(af)
            if isinstance(arg, Lit) and not isinstance(arg.value, bool):
                return Lit(-arg.value)
            return Una("-", arg)
        return self.expr_atom(af)

    def expr_atom(self, af):
        t = self.peek()
        if t.kind == "INT":
            self.next()
            return Lit(int(t.text))
        if t.kind == "FLOAT":
            if not af:
                self.fail("float literals are only allowed in distributions")
            self.next()
            return Lit(float(t.text))
        if t.kind == "KW" and t.text in ("true", "false"):
            self.next()
            return Lit(t.text == "true")
        if t.kind == "NAME":
            self.next()
            if self.at_sym("("):
                self.next()
                args = []
                if not self.at_sym(")"):
                    args.append(self.expression(allow_float=af))
                    while self.eat_sym(","):
                        args.append(self.expression(allow_float=af))
                self.expect("SYM", ")")
                return self._call(t, tuple(args))
            if self.eat_sym("["):
                idx = self.int_lit()
                self.expect("SYM", "]")
                return Arr(t.text, idx)
            return Var(t.text)
        if self.eat_sym("("):
            e = self.expression(allow_float=af)
            self.expect("SYM", ")")
            return e
        self.fail(f"got {t.text!r}", expected=("expression",))

    def _call(self, tok, args):
        name = tok.text
        if name in PURE_INTRINSICS or name in EFFECT_INTRINSICS:
            arity = PURE_INTRINSICS.get(name) or EFFECT_INTRINSICS.get(name)
            if len(args) != arity:
                raise ParseError(f"{name} takes {arity} argument(s)", tok.line, tok.col)
            if not isinstance(args[0], Var):
                raise ParseError(f"{name}: first argument must be an array name",
                                 tok.line, tok.col)
            return Call(name, args)
        if name in FAMILIES:
            return Call(name, args)  # resolved to a Distribution by assignment()
        raise ParseError(f"unknown function {name!r}", tok.line, tok.col)


def _as_distribution(rhs, tok):
    if not isinstance(rhs, Call) or rhs.func not in FAMILIES:
        raise ParseError("clock resets take a distribution, e.g. exponential(1.0)",
                         tok.line, tok.col)
    params = []
    for a in rhs.args:
        if isinstance(a, Lit) and not isinstance(a.value, bool):
            params.append(float(a.value))
        else:
            raise ParseError("distribution parameters must be numeric literals",
                             tok.line, tok.col)
    try:
        return Distribution(rhs.func, tuple(params))
    except ValueError as exc:
        raise ParseError(str(exc), tok.line, tok.col) from None


def _reject_floats(e, tok):
    if isinstance(e, Lit) and isinstance(e.value, float):
        raise ParseError("float literals are only allowed in distributions",
                         tok.line, tok.col)
    if isinstance(e, Una):
        _reject_floats(e.arg, tok)
    elif isinstance(e, Bin):
        _reject_floats(e.left, tok)
        _reject_floats(e.right, tok)
    elif isinstance(e, Call):
        for a in e.args:
            _reject_floats(a, tok)


def _check_init(typ, init, tok):
    if typ == "bool":
        if not isinstance(init, bool):
            raise ParseError("bool variable needs a true/false init", tok.line, tok.col)
    else:
        lo, hi = typ
        if isinstance(init, bool) or not isinstance(init, int):
            raise ParseError("ranged variable needs an integer init", tok.line, tok.col)
        if not lo <= init <= hi:
            raise ParseError(f"init {init} outside [{lo}..{hi}]", tok.line, tok.col)


def parse_model(text):
    """Parse a whole model (one or more modules)."""
    return _Parser(tokenize(text)).model()


def parse_module(text):
    """Parse exactly one module."""
    p = _Parser(tokenize(text))
    mod = p.module()
    if p.peek().kind != "EOF":
        p.fail("trailing input after endmodule")
    return mod


# --- printing -------------------------------------------------------------


def _typ_to_str(typ):
    if typ == "bool":
        return "bool"
    return f"[{typ[0]}..{typ[1]}]"


def _val_to_str(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def print_module(mod: SymbolicModule) -> str:
    """Canonical text for a module; ``parse_module`` inverts it exactly."""
    out = [f"module {mod.name}"]
    for v in mod.variables:
        out.append(f"  {v.name} : {_typ_to_str(v.typ)} init {_val_to_str(v.init)};")
    for a in mod.arrays:
        out.append(
            f"  {a.name}[{a.length}] : {_typ_to_str(a.typ)} init {_val_to_str(a.init)};"
        )
    for c in mod.clocks:
        out.append(f"  {c} : clock;")
    out.append("")
    for t in mod.transitions:
        head = "" if t.label is None else t.label
        parts = [f"[{head}{t.deco}]", expr_to_str(t.guard)]
        if t.clock is not None:
            parts += ["@", t.clock]
        parts.append("->")
        rhs = []
        for tg, e in t.assigns:
            tgt = f"{tg[1]}[{tg[2]}]" if tg[0] == "arr" else tg[1]
            rhs.append(f"({tgt}' = {expr_to_str(e)})")
        rhs += [f"({c}' = {dist})" for c, dist in t.resets]
        body = " & ".join(rhs)
        line = "  " + " ".join(parts) + (f" {body};" if body else " ;")
        out.append(line)
    out.append("endmodule")
    return "\n".join(out) + "\n"


def print_model(modules) -> str:
    return "\n".join(print_module(m) for m in modules)


# --- the model-wide action table -------------------------------------------


@dataclass
class ActionTable:
    """Direction/urgency bookkeeping across a set of modules.

    Per name: urgency must agree everywhere, and at most one module may own
    the name as an output.  Unowned input names are tolerated here (the
    model is then simply not closed).
    """

    urgent: dict = field(default_factory=dict)
    owner: dict = field(default_factory=dict)        # label -> module name
    used_by: dict = field(default_factory=dict)      # label -> input listeners
    problems: list = field(default_factory=list)

    @classmethod
    def from_modules(cls, modules):
        table = cls()
        for mod in modules:
            for t in mod.transitions:
                if t.label == WILDCARD:
                    continue
                label = mod.label_of(t)
                urg = t.is_urgent
                if label in table.urgent and table.urgent[label] != urg:
                    table.problems.append(
                        f"label {label!r}: urgency differs between modules"
                    )
                table.urgent.setdefault(label, urg)
                if t.is_input:
                    table.used_by.setdefault(label, set()).add(mod.name)
                else:
                    prev = table.owner.get(label)
                    if prev is not None and prev != mod.name:
                        table.problems.append(
                            f"label {label!r}: output shared by {prev} and {mod.name}"
                        )
                    table.owner[label] = mod.name
        return table

    def non_urgent_output_labels(self):
        return {a for a, m in self.owner.items() if not self.urgent[a]}

    def unmatched_inputs(self):
        return {a for a in self.used_by if a not in self.owner}
