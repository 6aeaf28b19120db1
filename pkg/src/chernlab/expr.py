"""Expression trees over holomorphic chart variables.

Metric components are written as formulas in ``z1..zn`` and their conjugates
``zb1..zbn``.  The two families are treated as formally independent, which
makes the Wirtinger derivatives ordinary partial derivatives on the tree.

Grammar (highest binding first)::

    primary := number | identifier | func '(' expr ')' | '(' expr ')'
    power   := primary ['^' unary]          # right associative
    unary   := '-' unary | '+' unary | power
    term    := unary (('*' | '/') unary)*
    expr    := term (('+' | '-') term)*

Numbers accept an ``i``/``j`` suffix for imaginary literals.  ``**`` is an
alias for ``^``; exponents must fold to integer constants.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass, field, fields
from typing import Callable, Iterable, Mapping, Sequence


class ExpressionError(ValueError):
    """Base class for expression errors."""


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class SingularEvaluationError(ExpressionError):
    """Division by zero, log of zero or overflow while evaluating."""

    def __init__(self, message: str, subtree: "Expr"):
        super().__init__(f"{message} in subtree {to_string(subtree)}")
        self.subtree = subtree


# ---------------------------------------------------------------------------
# nodes
# ---------------------------------------------------------------------------


class Expr:
    """Immutable expression node with a cached structural hash."""

    _names: tuple[str, ...] = ()

    def __post_init__(self):
        if not type(self)._names:
            type(self)._names = tuple(f.name for f in fields(self) if f.name != "_hash")
        key = (type(self).__name__,) + tuple(getattr(self, name) for name in self._names)
        object.__setattr__(self, "_hash", hash(key))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return all(getattr(self, k) == getattr(other, k) for k in self._names)

    def children(self) -> tuple["Expr", ...]:
        return ()

    # operator sugar, always through the folding constructors
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k: int):
        return power(self, k)

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"Expr({to_string(self)!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Const(Expr):
    value: complex
    _hash: int = field(init=False, compare=False)

    def __post_init__(self):
        v = complex(self.value)
        # drop negative zeros so that equal constants print identically
        object.__setattr__(self, "value", complex(v.real + 0.0, v.imag + 0.0))
        super().__post_init__()


@dataclass(frozen=True, eq=False, repr=False)
class Var(Expr):
    """``z_index`` (``conj=False``) or ``zb_index`` (``conj=True``), 1-based."""

    index: int
    conj: bool = False
    _hash: int = field(init=False, compare=False)


@dataclass(frozen=True, eq=False, repr=False)
class Param(Expr):
    name: str
    _hash: int = field(init=False, compare=False)


@dataclass(frozen=True, eq=False, repr=False)
class Add(Expr):
    left: Expr
    right: Expr
    _hash: int = field(init=False, compare=False)

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=False, repr=False)
class Mul(Expr):
    left: Expr
    right: Expr
    _hash: int = field(init=False, compare=False)

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=False, repr=False)
class Div(Expr):
    num: Expr
    den: Expr
    _hash: int = field(init=False, compare=False)

    def children(self):
        return (self.num, self.den)


@dataclass(frozen=True, eq=False, repr=False)
class Neg(Expr):
    arg: Expr
    _hash: int = field(init=False, compare=False)

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=False, repr=False)
class Pow(Expr):
    base: Expr
    exponent: int
    _hash: int = field(init=False, compare=False)

    def children(self):
        return (self.base,)


@dataclass(frozen=True, eq=False, repr=False)
class Exp(Expr):
    arg: Expr
    _hash: int = field(init=False, compare=False)

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=False, repr=False)
class Log(Expr):
    arg: Expr
    _hash: int = field(init=False, compare=False)

    def children(self):
        return (self.arg,)


ZERO = Const(0)
ONE = Const(1)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, complex)):
        return Const(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def _is_const(e: Expr, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# Folding constructors.  Only constant folding and identity elements; no
# rewriting beyond that, so evaluation order stays predictable.


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    return Add(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    return Mul(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return Const(a.value / b.value)
    if _is_const(a, 0):
        return ZERO
    if _is_const(b, 1):
        return a
    return Div(a, b)


def power(a: Expr, k: int) -> Expr:
    if not isinstance(k, int) or isinstance(k, bool):
        raise ExpressionError(f"exponent must be an integer, got {k!r}")
    if k == 0:
        return ONE
    if k == 1:
        return a
    if isinstance(a, Const) and (k > 0 or a.value != 0):
        return Const(_ipow(a.value, k))
    return Pow(a, k)


def exp(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(cmath.exp(a.value))
    return Exp(a)


def log(a: Expr) -> Expr:
    if isinstance(a, Const) and a.value != 0:
        return Const(cmath.log(a.value))
    return Log(a)


def z(i: int) -> Var:
    return Var(i, False)


def zb(i: int) -> Var:
    return Var(i, True)


def _ipow(x: complex, k: int) -> complex:
    """Integer power by repeated squaring; shared by every evaluation path."""
    if k < 0:
        return 1 / _ipow(x, -k)
    result = None
    base = x
    while k:
        if k & 1:
            result = base if result is None else result * base
        k >>= 1
        if k:
            base = base * base
    return complex(1) if result is None else result


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------


def _const_str(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    if c.real == 0:
        return f"{c.imag!r}i"
    return f"({c.real!r}+{c.imag!r}i)"


def to_string(e: Expr) -> str:
    """Fully parenthesised form; ``parse_expression(to_string(e)) == e``."""
    if isinstance(e, Const):
        s = _const_str(e.value)
        return f"({s})" if s.startswith("-") else s
    if isinstance(e, Var):
        return f"{'zb' if e.conj else 'z'}{e.index}"
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Add):
        return f"({to_string(e.left)} + {to_string(e.right)})"
    if isinstance(e, Mul):
        return f"({to_string(e.left)} * {to_string(e.right)})"
    if isinstance(e, Div):
        return f"({to_string(e.num)} / {to_string(e.den)})"
    if isinstance(e, Neg):
        return f"(-{to_string(e.arg)})"
    if isinstance(e, Pow):
        k = str(e.exponent) if e.exponent >= 0 else f"(-{-e.exponent})"
        return f"({to_string(e.base)} ^ {k})"
    if isinstance(e, Exp):
        return f"exp({to_string(e.arg)})"
    if isinstance(e, Log):
        return f"log({to_string(e.arg)})"
    raise TypeError(type(e))


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?[ij]?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)

_VAR = re.compile(r"(zb|z)(\d+)$")
_FUNCS = {"exp": exp, "log": log}


def _tokenize(text: str):
    pos = 0
    data = text.encode("utf-8")
    # offsets are reported in bytes; map character positions as we go
    char_to_byte = None if len(data) == len(text) else [len(text[:k].encode("utf-8")) for k in range(len(text) + 1)]

    def boff(k):
        return k if char_to_byte is None else char_to_byte[k]

    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", boff(pos))
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "op" and value == "**":
                value = "^"
            yield kind, value, boff(pos)
        pos = m.end()
    yield "end", "", boff(len(text))


class _Parser:
    def __init__(self, text: str, n: int):
        self.tokens = list(_tokenize(text))
        self.k = 0
        self.n = n

    @property
    def tok(self):
        return self.tokens[self.k]

    def advance(self):
        t = self.tokens[self.k]
        self.k += 1
        return t

    def expect(self, value):
        kind, v, off = self.tok
        if v != value or kind == "end":
            found = "end of input" if kind == "end" else repr(v)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", off)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        kind, v, off = self.tok
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {v!r}", off)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.advance()[1]
            right = self.term()
            left = add(left, right) if op == "+" else add(left, neg(right))
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.advance()[1]
            right = self.unary()
            left = mul(left, right) if op == "*" else div(left, right)
        return left

    def unary(self) -> Expr:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return neg(self.unary())
        if self.tok[0] == "op" and self.tok[1] == "+":
            self.advance()
            return self.unary()
        return self.pow()

    def pow(self) -> Expr:
        base = self.primary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            off = self.advance()[2]
            exponent = self.unary()
            if not isinstance(exponent, Const) or exponent.value.imag != 0 or not float(exponent.value.real).is_integer():
                raise ExpressionSyntaxError("non-integer exponent", off)
            return power(base, int(exponent.value.real))
        return base

    def primary(self) -> Expr:
        kind, v, off = self.advance()
        if kind == "num":
            if v[-1] in "ij":
                return Const(complex(0, float(v[:-1])))
            return Const(float(v))
        if kind == "name":
            if v in _FUNCS or v == "conj":
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return conjugate_swap(arg) if v == "conj" else _FUNCS[v](arg)
            m = _VAR.match(v)
            if m:
                idx = int(m.group(2))
                if not 1 <= idx <= self.n:
                    raise ExpressionSyntaxError(f"variable {v} out of range for dimension {self.n}", off)
                return Var(idx, m.group(1) == "zb")
            return Param(v)
        if kind == "op" and v == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(v)
        raise ExpressionSyntaxError(f"unexpected {found}", off)


def parse_expression(text: str, n: int) -> Expr:
    """Parse ``text`` into an expression over ``z1..zn``, ``zb1..zbn``.

    ``conj(e)`` is rewritten on the spot (``conj(z1)`` becomes ``zb1``).
    Raises :class:`ExpressionSyntaxError` with a byte offset.
    """
    return _Parser(text, n).parse()


# ---------------------------------------------------------------------------
# transformations
# ---------------------------------------------------------------------------


def _map_tree(e: Expr, leaf: Callable[[Expr], Expr], memo: dict) -> Expr:
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    if isinstance(e, (Const, Var, Param)):
        out = leaf(e)
    elif isinstance(e, Add):
        out = add(_map_tree(e.left, leaf, memo), _map_tree(e.right, leaf, memo))
    elif isinstance(e, Mul):
        out = mul(_map_tree(e.left, leaf, memo), _map_tree(e.right, leaf, memo))
    elif isinstance(e, Div):
        out = div(_map_tree(e.num, leaf, memo), _map_tree(e.den, leaf, memo))
    elif isinstance(e, Neg):
        out = neg(_map_tree(e.arg, leaf, memo))
    elif isinstance(e, Pow):
        out = power(_map_tree(e.base, leaf, memo), e.exponent)
    elif isinstance(e, Exp):
        out = exp(_map_tree(e.arg, leaf, memo))
    elif isinstance(e, Log):
        out = log(_map_tree(e.arg, leaf, memo))
    else:
        raise TypeError(type(e))
    memo[key] = (e, out)  # keep e alive so its id is not reused
    return out


def _swap_leaf(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(e.value.conjugate())
    if isinstance(e, Var):
        return Var(e.index, not e.conj)
    return e


def conjugate_swap(e: Expr) -> Expr:
    """Exchange ``z_i`` with ``zb_i`` and conjugate constants."""
    return _map_tree(e, _swap_leaf, {})


def substitute_params(e: Expr, values: Mapping[str, complex]) -> Expr:
    def leaf(x):
        if isinstance(x, Param) and x.name in values:
            return Const(values[x.name])
        return x

    return _map_tree(e, leaf, {})


def max_index(e: Expr) -> int:
    best = 0
    stack = [e]
    seen = set()
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        if isinstance(x, Var):
            best = max(best, x.index)
        stack.extend(x.children())
    return best


def parameters(e: Expr) -> set[str]:
    out = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Param):
            out.add(x.name)
        stack.extend(x.children())
    return out


def wirtinger_derivative(e: Expr, i: int, antiholomorphic: bool = False, _memo: dict | None = None) -> Expr:
    """Exact derivative with respect to ``z_i`` (or ``zb_i``).

    ``z_j`` and ``zb_j`` are independent symbols, so ``d zb_1 / d z_1 = 0``.
    """
    if i < 1:
        raise ExpressionError(f"variable index must be >= 1, got {i}")
    memo = {} if _memo is None else _memo
    return _diff(e, Var(i, antiholomorphic), memo)


def _diff(e: Expr, v: Var, memo: dict) -> Expr:
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    if isinstance(e, (Const, Param)):
        out = ZERO
    elif isinstance(e, Var):
        out = ONE if e == v else ZERO
    elif isinstance(e, Add):
        out = add(_diff(e.left, v, memo), _diff(e.right, v, memo))
    elif isinstance(e, Mul):
        da, db = _diff(e.left, v, memo), _diff(e.right, v, memo)
        out = add(mul(da, e.right), mul(e.left, db))
    elif isinstance(e, Div):
        da, db = _diff(e.num, v, memo), _diff(e.den, v, memo)
        # a'/b - a b'/b^2
        out = add(div(da, e.den), neg(div(mul(e.num, db), power(e.den, 2))))
    elif isinstance(e, Neg):
        out = neg(_diff(e.arg, v, memo))
    elif isinstance(e, Pow):
        db = _diff(e.base, v, memo)
        k = e.exponent
        out = mul(mul(Const(k), power(e.base, k - 1)), db)
    elif isinstance(e, Exp):
        out = mul(e, _diff(e.arg, v, memo))
    elif isinstance(e, Log):
        out = div(_diff(e.arg, v, memo), e.arg)
    else:
        raise TypeError(type(e))
    memo[key] = (e, out)
    return out


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChartPoint:
    """Coordinates ``z_1..z_n`` plus real parameter values."""

    coords: tuple[complex, ...]
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(complex(c) for c in self.coords))

    @property
    def n(self) -> int:
        return len(self.coords)

    def conj(self) -> tuple[complex, ...]:
        return tuple(c.conjugate() for c in self.coords)


def _apply(e: Expr, vals: Sequence[complex]) -> complex:
    if isinstance(e, Add):
        return vals[0] + vals[1]
    if isinstance(e, Mul):
        return vals[0] * vals[1]
    if isinstance(e, Div):
        return vals[0] / vals[1]
    if isinstance(e, Neg):
        return -vals[0]
    if isinstance(e, Pow):
        return _ipow(vals[0], e.exponent)
    if isinstance(e, Exp):
        return cmath.exp(vals[0])
    if isinstance(e, Log):
        return cmath.log(vals[0])
    raise TypeError(type(e))


def evaluate_free(e: Expr, zs: Sequence[complex], zbs: Sequence[complex], params: Mapping[str, float] | None = None) -> complex:
    """Evaluate with ``z`` and ``zb`` supplied independently."""
    params = params or {}
    memo: dict[int, complex] = {}

    def ev(x: Expr) -> complex:
        key = id(x)
        if key in memo:
            return memo[key]
        if isinstance(x, Const):
            out = x.value
        elif isinstance(x, Var):
            if x.index > len(zs):
                raise ExpressionError(f"variable index {x.index} exceeds point dimension {len(zs)}")
            out = complex(zbs[x.index - 1] if x.conj else zs[x.index - 1])
        elif isinstance(x, Param):
            if x.name not in params:
                raise ExpressionError(f"no value for parameter {x.name!r}")
            out = complex(params[x.name])
        else:
            vals = [ev(c) for c in x.children()]
            try:
                out = _apply(x, vals)
            except (ZeroDivisionError, ValueError, OverflowError) as exc:
                raise SingularEvaluationError(str(exc) or type(exc).__name__, x) from None
        memo[key] = out
        return out

    return ev(e)


def evaluate(e: Expr, p: ChartPoint, params: Mapping[str, float] | None = None) -> complex:
    """Value of ``e`` at ``p`` with ``zb_i := conj(z_i)``.

    ``params`` supplies defaults that ``p.params`` overrides.
    """
    merged = dict(params or {})
    merged.update(p.params)
    return evaluate_free(e, p.coords, p.conj(), merged)


# ---------------------------------------------------------------------------
# compilation (common subexpressions shared across a batch of expressions)
# ---------------------------------------------------------------------------


def _topo(exprs: Iterable[Expr]):
    """Unique nodes in dependency order, deduplicated structurally."""
    order: list[Expr] = []
    index: dict[Expr, int] = {}
    for root in exprs:
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if node in index:
                continue
            if expanded:
                index[node] = len(order)
                order.append(node)
                continue
            stack.append((node, True))
            for c in reversed(node.children()):
                if c not in index:
                    stack.append((c, False))
    return order, index


class CompiledBatch:
    """Evaluate many expressions at once with shared subexpressions.

    Produces bit-identical results to :func:`evaluate_free` because every
    node is computed with the same scalar operation.
    """

    def __init__(self, exprs: Sequence[Expr]):
        self.exprs = tuple(exprs)
        order, index = _topo(self.exprs)
        consts: list[complex] = []
        lines = ["def _batch(z, zb, p):"]
        name = {}
        for k, node in enumerate(order):
            t = f"t{k}"
            name[node] = t
            if isinstance(node, Const):
                consts.append(node.value)
                rhs = f"_c[{len(consts) - 1}]"
            elif isinstance(node, Var):
                rhs = f"{'zb' if node.conj else 'z'}[{node.index - 1}]"
            elif isinstance(node, Param):
                rhs = f"p[{node.name!r}]"
            elif isinstance(node, Add):
                rhs = f"{name[node.left]} + {name[node.right]}"
            elif isinstance(node, Mul):
                rhs = f"{name[node.left]} * {name[node.right]}"
            elif isinstance(node, Div):
                rhs = f"{name[node.num]} / {name[node.den]}"
            elif isinstance(node, Neg):
                rhs = f"-{name[node.arg]}"
            elif isinstance(node, Pow):
                rhs = f"_ipow({name[node.base]}, {node.exponent})"
            elif isinstance(node, Exp):
                rhs = f"_exp({name[node.arg]})"
            elif isinstance(node, Log):
                rhs = f"_log({name[node.arg]})"
            else:
                raise TypeError(type(node))
            lines.append(f"    {t} = {rhs}")
        lines.append("    return [" + ", ".join(name[e] for e in self.exprs) + "]")
        namespace = {"_c": consts, "_ipow": _ipow, "_exp": cmath.exp, "_log": cmath.log}
        exec("\n".join(lines), namespace)  # noqa: S102 - generated from our own AST
        self._fn = namespace["_batch"]
        self.n_nodes = len(order)

    def __call__(self, zs: Sequence[complex], zbs: Sequence[complex], params: Mapping[str, float] | None = None) -> list[complex]:
        zc = [complex(v) for v in zs]
        zbc = [complex(v) for v in zbs]
        pc = {k: complex(v) for k, v in (params or {}).items()}
        try:
            return self._fn(zc, zbc, pc)
        except (ZeroDivisionError, ValueError, OverflowError):
            # rerun through the tree walker to locate the offending subtree
            for e in self.exprs:
                evaluate_free(e, zc, zbc, pc)
            raise
        except KeyError as exc:
            raise ExpressionError(f"no value for parameter {exc.args[0]!r}") from None

    def at(self, p: ChartPoint, params: Mapping[str, float] | None = None) -> list[complex]:
        merged = dict(params or {})
        merged.update(p.params)
        return self(p.coords, p.conj(), merged)
