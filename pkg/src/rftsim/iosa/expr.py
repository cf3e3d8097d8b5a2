"""Expression language used in guards and assignments.

Expressions are built from boolean and integer literals, variables, array
cells with constant indices, the usual boolean/arithmetic/comparison
operators, and a small set of built-in array functions:

``some(a)``
    true iff some cell of ``a`` is nonzero / true.
``fstexclude(a, v)``
    index of the first cell whose value differs from ``v``, or -1.
``maxfrom(a, j)``
    index of the largest cell at position >= ``j`` (first such index).
``broken(a, j)``
    bump operator: raises cell ``j`` and every other positive cell by one.
    Only legal as the whole right-hand side of an assignment; the assigned
    variable receives 0 and the named array is rewritten.  Increments
    saturate at the declared upper bound of the array's cells.
``random(a)``
    uniform choice among the indices of nonzero cells.  Only legal as the
    whole right-hand side of an assignment; it makes the transition
    probabilistic.

Integer arithmetic is exact.  Division is only accepted with a nonzero
literal divisor and must be exact at evaluation time.
"""

from __future__ import annotations

from dataclasses import dataclass

from rftsim.errors import ModelError

# Pure intrinsics may appear anywhere in an expression; effectful ones only
# as a full assignment right-hand side.
PURE_INTRINSICS = {"some": 1, "fstexclude": 2, "maxfrom": 2}
EFFECT_INTRINSICS = {"broken": 2, "random": 1}


@dataclass(frozen=True)
class Lit:
    value: object  # bool, int, or float (floats only inside distributions)


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Arr:
    name: str
    index: int


@dataclass(frozen=True)
class Una:
    op: str  # "!" or "-"
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Expr = object

TRUE = Lit(True)

_CMP = {"=", "!=", "<", "<=", ">", ">="}


def eval_expr(e, env):
    """Evaluate a pure expression against a valuation.

    ``env`` maps variable names to ints/bools and array names to tuples.
    Effectful intrinsics are rejected here; they are interpreted by the
    assignment machinery in :mod:`rftsim.iosa.expand`.
    """
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ModelError(f"unknown variable {e.name!r}") from None
    if isinstance(e, Arr):
        arr = env[e.name]
        if not 0 <= e.index < len(arr):
            raise ModelError(f"index {e.index} out of bounds for {e.name}[{len(arr)}]")
        return arr[e.index]
    if isinstance(e, Una):
        v = eval_expr(e.arg, env)
        if e.op == "!":
            _want_bool(v, e)
            return not v
        return -_want_int(v, e)
    if isinstance(e, Bin):
        if e.op == "&":
            return _want_bool(eval_expr(e.left, env), e) and _want_bool(
                eval_expr(e.right, env), e
            )
        if e.op == "|":
            return _want_bool(eval_expr(e.left, env), e) or _want_bool(
                eval_expr(e.right, env), e
            )
        l = eval_expr(e.left, env)
        r = eval_expr(e.right, env)
        if e.op in _CMP:
            if e.op == "=":
                return l == r
            if e.op == "!=":
                return l != r
            li, ri = _want_int(l, e), _want_int(r, e)
            return {"<": li < ri, "<=": li <= ri, ">": li > ri, ">=": li >= ri}[e.op]
        li, ri = _want_int(l, e), _want_int(r, e)
        if e.op == "+":
            return li + ri
        if e.op == "-":
            return li - ri
        if e.op == "*":
            return li * ri
        if e.op == "/":
            if ri == 0 or li % ri != 0:
                raise ModelError(f"inexact or zero division {li}/{ri}")
            return li // ri
        raise AssertionError(e.op)
    if isinstance(e, Call):
        if e.func in EFFECT_INTRINSICS:
            raise ModelError(f"{e.func}(...) is only allowed as a full assignment")
        arr = env[e.args[0].name]
        if e.func == "some":
            return any(bool(x) for x in arr)
        if e.func == "fstexclude":
            v = eval_expr(e.args[1], env)
            for i, x in enumerate(arr):
                if x != v:
                    return i
            return -1
        if e.func == "maxfrom":
            j = eval_expr(e.args[1], env)
            if not 0 <= j < len(arr):
                raise ModelError(f"maxfrom start index {j} out of bounds")
            best = j
            for i in range(j, len(arr)):
                if arr[i] > arr[best]:
                    best = i
            return best
        raise ModelError(f"unknown function {e.func!r}")
    raise AssertionError(f"bad expression node {e!r}")


def _want_bool(v, e):
    if not isinstance(v, bool):
        raise ModelError(f"expected a boolean in {expr_to_str(e)}")
    return v


def _want_int(v, e):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ModelError(f"expected an integer in {expr_to_str(e)}")
    return v


# Precedence levels for the printer (higher binds tighter).
_PREC = {
    "|": 1,
    "&": 2,
    "=": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}
_UNARY_PREC = 6


def expr_to_str(e, parent_prec=0):
    if isinstance(e, Lit):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Arr):
        return f"{e.name}[{e.index}]"
    if isinstance(e, Una):
        s = f"{e.op}{expr_to_str(e.arg, _UNARY_PREC)}"
        return s if parent_prec <= _UNARY_PREC else f"({s})"
    if isinstance(e, Bin):
        p = _PREC[e.op]
        s = f"{expr_to_str(e.left, p)} {e.op} {expr_to_str(e.right, p + 1)}"
        return s if p >= parent_prec else f"({s})"
    if isinstance(e, Call):
        args = ", ".join(expr_to_str(a) for a in e.args)
        return f"{e.func}({args})"
    raise AssertionError(f"bad expression node {e!r}")


def variables_of(e, acc=None):
    """Names of variables and arrays read by an expression."""
    if acc is None:
        acc = set()
    if isinstance(e, (Var,)):
        acc.add(e.name)
    elif isinstance(e, Arr):
        acc.add(e.name)
    elif isinstance(e, Una):
        variables_of(e.arg, acc)
    elif isinstance(e, Bin):
        variables_of(e.left, acc)
        variables_of(e.right, acc)
    elif isinstance(e, Call):
        for a in e.args:
            variables_of(a, acc)
    return acc
