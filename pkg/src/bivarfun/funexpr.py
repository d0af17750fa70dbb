"""Analytic expressions in x1..xd: parsing, evaluation, differentiation.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``*`` and ``/``)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ["^" exponent]
    exponent:= INT ["^" exponent] | "(" INT ")"
    atom    := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"

NUMBER may carry an ``i`` or ``j`` suffix (imaginary literal).  NAME is one
of ``x``, ``y`` (aliases of ``x1``, ``x2``), ``x1``..``x8``, ``z`` (alias of
``x1``, univariate expressions only), or the constants ``pi``, ``e``, ``i``.
FUNC is one of exp, log, sin, cos, sqrt (principal branches).

Evaluation is vectorized: variables may be numpy arrays that broadcast.
"""

import re
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT
from .errors import EvaluationDomainError, ExpressionSyntaxError

__all__ = [
    "DividedDifferenceExpr", "FunExpr", "MatrixFunExpr", "analyticity_probe",
    "diff", "divided_difference", "parse",
]

FUNCS = ("exp", "log", "sin", "cos", "sqrt")
MAX_ARITY = 8


# --- AST -----------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a name in FUNCS
    arg: object


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * /
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    k: int


# --- evaluation ----------------------------------------------------------------

def _evaluate(node, xs):
    if isinstance(node, Const):
        return np.complex128(node.value)
    if isinstance(node, Var):
        return xs[node.index - 1]
    if isinstance(node, Pow):
        base = _evaluate(node.base, xs)
        if node.k == 0:
            return np.ones_like(base) if np.ndim(base) else np.complex128(1)
        return base ** node.k
    if isinstance(node, Binary):
        a = _evaluate(node.left, xs)
        b = _evaluate(node.right, xs)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if np.any(b == 0):
            raise EvaluationDomainError("division by zero", node)
        return a / b
    a = _evaluate(node.arg, xs)
    if node.op == "neg":
        return -a
    if node.op in ("log", "sqrt") and np.any(a == 0):
        raise EvaluationDomainError(f"{node.op} evaluated at zero", node)
    with np.errstate(over="ignore", invalid="ignore"):
        return getattr(np, node.op)(a)


def _fmt_const(c):
    c = complex(c)
    if c.imag == 0:
        s = repr(c.real)
        return f"({s})" if c.real < 0 or s.startswith("-") else s
    if c.real == 0:
        s = repr(c.imag) + "i"
        return f"({s})" if c.imag < 0 else s
    sign = "-" if c.imag < 0 else "+"
    return f"({c.real!r}{sign}{abs(c.imag)!r}i)"


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _to_text(node, arity):
    if isinstance(node, Const):
        return _fmt_const(node.value), 5
    if isinstance(node, Var):
        return f"x{node.index}", 5
    if isinstance(node, Pow):
        s, p = _to_text(node.base, arity)
        if p <= _PREC["^"]:
            s = f"({s})"
        return f"{s}^{node.k}", _PREC["^"]
    if isinstance(node, Binary):
        prec = _PREC[node.op]
        ls, lp = _to_text(node.left, arity)
        rs, rp = _to_text(node.right, arity)
        if lp < prec:
            ls = f"({ls})"
        # left-associative: equal precedence on the right needs parentheses
        if rp <= prec:
            rs = f"({rs})"
        return f"{ls} {node.op} {rs}", prec
    if node.op == "neg":
        s, p = _to_text(node.arg, arity)
        if p < _PREC["neg"]:
            s = f"({s})"
        return f"-{s}", _PREC["neg"]
    s, _ = _to_text(node.arg, arity)
    return f"{node.op}({s})", 5


def _max_var(node):
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Const):
        return 0
    if isinstance(node, Pow):
        return _max_var(node.base)
    if isinstance(node, Binary):
        return max(_max_var(node.left), _max_var(node.right))
    return _max_var(node.arg)


class FunExpr:
    """An immutable expression tree with a declared arity."""

    def __init__(self, root, arity):
        if not 1 <= arity <= MAX_ARITY:
            raise ValueError(f"arity must be in [1, {MAX_ARITY}]")
        if _max_var(root) > arity:
            raise ValueError("expression uses a variable beyond its arity")
        self.root = root
        self.arity = arity

    def evaluate(self, *xs):
        """Vectorized evaluation; ``xs`` broadcast against each other."""
        if len(xs) != self.arity:
            raise ValueError(f"expected {self.arity} arguments, got {len(xs)}")
        xs = [np.asarray(x, dtype=np.complex128) for x in xs]
        shape = np.broadcast_shapes(*[x.shape for x in xs])
        out = _evaluate(self.root, xs)
        return np.broadcast_to(np.asarray(out, dtype=np.complex128), shape)

    def __call__(self, *point):
        return complex(self.evaluate(*point))

    def __str__(self):
        return _to_text(self.root, self.arity)[0]

    def __repr__(self):
        return f"FunExpr({str(self)!r}, arity={self.arity})"

    def __eq__(self, other):
        return (isinstance(other, FunExpr) and self.root == other.root
                and self.arity == other.arity)

    def __hash__(self):
        return hash((self.root, self.arity))

    def diff(self, var=1):
        return diff(self, var)

    def partial(self, value):
        """Fix the first variable; returns an expression in the remaining
        ones (arity - 1)."""
        if self.arity < 2:
            raise ValueError("cannot fix the only variable")
        return FunExpr(_substitute_first(self.root, complex(value)), self.arity - 1)


def _substitute_first(node, value):
    if isinstance(node, Var):
        return Const(value) if node.index == 1 else Var(node.index - 1)
    if isinstance(node, Const):
        return node
    if isinstance(node, Pow):
        return Pow(_substitute_first(node.base, value), node.k)
    if isinstance(node, Binary):
        return Binary(node.op, _substitute_first(node.left, value),
                      _substitute_first(node.right, value))
    return Unary(node.op, _substitute_first(node.arg, value))


def evaluate(f, point):
    """Evaluate ``f`` at a single point (sequence of complex numbers)."""
    return f(*point)


# --- parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?[ij]?(?![A-Za-z0-9_]))
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, arity):
        self.tokens = _tokenize(text)
        self.i = 0
        self.arity = arity

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Unary("neg", self.unary())
        if self.peek()[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Pow(base, self.exponent())
        return base

    def exponent(self):
        kind, text, pos = self.take()
        paren = False
        if (kind, text) == ("op", "("):
            paren = True
            kind, text, pos = self.take()
        if kind != "num" or not text.isdigit():
            raise ExpressionSyntaxError(
                "exponent must be a nonnegative integer literal", pos)
        k = int(text)
        if paren:
            self.expect(")")
        elif self.peek()[:2] == ("op", "^"):
            self.take()
            k = k ** self.exponent()
        return k

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            if text[-1] in "ij":
                return Const(complex(0.0, float(text[:-1])))
            return Const(complex(float(text)))
        if kind == "name":
            if text in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(text, arg)
            return self.name(text, pos)
        if (kind, text) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"unexpected {found}", pos)

    def name(self, text, pos):
        if text == "pi":
            return Const(complex(np.pi))
        if text == "e":
            return Const(complex(np.e))
        if text == "i":
            return Const(1j)
        index = None
        if text == "x":
            index = 1
        elif text == "y":
            index = 2
        elif text == "z" and self.arity == 1:
            index = 1
        elif re.fullmatch(r"x[1-8]", text):
            index = int(text[1])
        if index is None or index > self.arity:
            raise ExpressionSyntaxError(f"unknown identifier {text!r}", pos)
        return Var(index)


def parse(text, arity=1):
    if not 1 <= arity <= MAX_ARITY:
        raise ValueError(f"arity must be in [1, {MAX_ARITY}]")
    return FunExpr(_Parser(text, arity).parse(), arity)


# --- symbolic differentiation ------------------------------------------------------

ZERO, ONE = Const(0j), Const(1 + 0j)


def _is(node, value):
    return isinstance(node, Const) and node.value == value


def _add(a, b):
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Binary("+", a, b)


def _sub(a, b):
    if _is(b, 0):
        return a
    if _is(a, 0):
        return _neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Binary("-", a, b)


def _mul(a, b):
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Binary("*", a, b)


def _div(a, b):
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return Binary("/", a, b)


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    return Unary("neg", a)


def _pow(a, k):
    if k == 0:
        return ONE
    if k == 1:
        return a
    return Pow(a, k)


def _d(node, var):
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.index == var else ZERO
    if isinstance(node, Pow):
        du = _d(node.base, var)
        if node.k == 0:
            return ZERO
        return _mul(_mul(Const(complex(node.k)), _pow(node.base, node.k - 1)), du)
    if isinstance(node, Binary):
        u, v = node.left, node.right
        du, dv = _d(u, var), _d(v, var)
        if node.op == "+":
            return _add(du, dv)
        if node.op == "-":
            return _sub(du, dv)
        if node.op == "*":
            return _add(_mul(du, v), _mul(u, dv))
        return _div(_sub(_mul(du, v), _mul(u, dv)), _pow(v, 2))
    u = node.arg
    du = _d(u, var)
    if _is(du, 0):
        return ZERO
    if node.op == "neg":
        return _neg(du)
    if node.op == "exp":
        return _mul(node, du)
    if node.op == "log":
        return _div(du, u)
    if node.op == "sin":
        return _mul(Unary("cos", u), du)
    if node.op == "cos":
        return _neg(_mul(Unary("sin", u), du))
    # sqrt
    return _div(du, _mul(Const(2 + 0j), node))


def diff(f, var=1):
    """Symbolic partial derivative with respect to ``x{var}``."""
    if not 1 <= var <= f.arity:
        raise ValueError("derivative variable out of range")
    return FunExpr(_d(f.root, var), f.arity)


# --- divided differences -------------------------------------------------------------

class DividedDifferenceExpr:
    """First divided difference ``f[x, y]`` of a univariate expression.

    For nearby arguments the difference quotient is replaced by the
    derivative at the midpoint, which avoids cancellation.
    """

    arity = 2

    def __init__(self, base, switch_threshold=DEFAULT.dd_threshold):
        if base.arity != 1:
            raise ValueError("divided differences need a univariate expression")
        self.base = base
        self.derived = diff(base, 1)
        self.switch_threshold = switch_threshold

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=np.complex128)
        y = np.asarray(y, dtype=np.complex128)
        x, y = np.broadcast_arrays(x, y)
        delta = x - y
        far = np.abs(delta) > self.switch_threshold * (1 + np.abs(x) + np.abs(y))
        out = np.empty(x.shape, dtype=np.complex128)
        if np.any(far):
            xf, yf = x[far], y[far]
            out[far] = (self.base.evaluate(xf) - self.base.evaluate(yf)) / (xf - yf)
        if not np.all(far):
            near = ~far
            out[near] = self.derived.evaluate(0.5 * (x[near] + y[near]))
        return out

    def __call__(self, x, y):
        return complex(self.evaluate(x, y))

    def __str__(self):
        return f"divdiff({self.base})"

    def nodes(self):
        return [self.base.root, self.derived.root]


def divided_difference(f, switch_threshold=DEFAULT.dd_threshold):
    return DividedDifferenceExpr(f, switch_threshold)


# --- matrix-valued expressions -----------------------------------------------------------

class MatrixFunExpr:
    """An ``m x p`` grid of expressions sharing one arity."""

    def __init__(self, entries):
        entries = [list(row) for row in entries]
        if not entries or not entries[0]:
            raise ValueError("matrix expression needs at least one entry")
        p = len(entries[0])
        if any(len(row) != p for row in entries):
            raise ValueError("ragged matrix expression")
        arities = {e.arity for row in entries for e in row}
        if len(arities) != 1:
            raise ValueError("all entries must share the same arity")
        self.entries = entries
        self.arity = arities.pop()
        self.shape = (len(entries), p)

    @classmethod
    def parse(cls, rows, arity=1):
        return cls([[parse(t, arity) for t in row] for row in rows])

    def evaluate(self, *xs):
        """Array of shape ``broadcast(xs).shape + (m, p)``."""
        vals = [[e.evaluate(*xs) for e in row] for row in self.entries]
        shape = np.broadcast_shapes(*[np.shape(x) for x in xs])
        out = np.empty(shape + self.shape, dtype=np.complex128)
        for i, row in enumerate(vals):
            for j, v in enumerate(row):
                out[..., i, j] = v
        return out

    def __str__(self):
        return "[" + "; ".join(", ".join(str(e) for e in row)
                               for row in self.entries) + "]"


# --- analyticity probe ---------------------------------------------------------------

def _roots(f):
    if isinstance(f, FunExpr):
        return [f.root]
    if isinstance(f, DividedDifferenceExpr):
        return f.nodes()
    if isinstance(f, MatrixFunExpr):
        return [e.root for row in f.entries for e in row]
    raise TypeError(f"cannot probe {type(f).__name__}")


def _guarded_subtrees(node, acc):
    """Collect denominators and log/sqrt arguments."""
    if isinstance(node, Binary):
        if node.op == "/":
            acc.append(("den", node.right))
        _guarded_subtrees(node.left, acc)
        _guarded_subtrees(node.right, acc)
    elif isinstance(node, Unary):
        if node.op in ("log", "sqrt"):
            acc.append(("cut", node.arg))
        _guarded_subtrees(node.arg, acc)
    elif isinstance(node, Pow):
        _guarded_subtrees(node.base, acc)
    return acc


def _probe_grids(contours, n, levels):
    t = 2 * np.pi * np.arange(n) / n
    for s in levels:
        pts = []
        for c in contours:
            shrunk = c if s == 1.0 else c.shrunk(s)
            pts.append(shrunk.point(t))
        yield np.meshgrid(*pts, indexing="ij", sparse=True)


def _winding_ok(sub, kind, contours, n, levels, dense):
    """Trace each variable around its contour with the others fixed at
    probe points; a nonzero winding of a denominator (or of a log/sqrt
    argument) around 0, or a crossing of the negative real axis by a
    log/sqrt argument, signals non-analyticity inside."""
    d = len(contours)
    t = 2 * np.pi * np.arange(n) / n
    td = 2 * np.pi * np.arange(dense + 1) / dense
    for s in levels:
        fixed = [(c if s == 1.0 else c.shrunk(s)).point(t) for c in contours]
        for j in range(d):
            axes = []
            for i in range(d):
                axes.append(contours[i].point(td) if i == j else fixed[i])
            grid = np.meshgrid(*axes, indexing="ij", sparse=True)
            u = np.broadcast_to(_evaluate(sub, grid), np.broadcast_shapes(*[g.shape for g in grid]))
            u = np.moveaxis(u, j, -1)
            if not np.all(np.isfinite(u)) or np.any(u == 0):
                return False
            turns = np.angle(u[..., 1:] / u[..., :-1]).sum(axis=-1) / (2 * np.pi)
            if np.any(np.abs(turns) > 0.5):
                return False
            if kind == "cut":
                left = u.real < 0
                flip = (np.sign(u.imag[..., 1:]) != np.sign(u.imag[..., :-1]))
                if np.any(flip & left[..., 1:] & left[..., :-1]):
                    return False
                scale = max(1.0, float(np.abs(u).max()))
                if np.any(left & (np.abs(u.imag) <= 1e-8 * scale)):
                    return False
    return True


def analyticity_probe(f, contours, n_probe=DEFAULT.n_probe, cap=DEFAULT.probe_cap,
                      levels=(1.0, 0.75, 0.4)):
    """Heuristic check that ``f`` is analytic on the product of the regions
    bounded by ``contours``.

    Evaluates ``f`` on tensor grids of ``n_probe`` points per contour, on the
    contours and on two copies shrunk toward their centers, and requires
    finite values bounded by ``cap``.  Denominators and log/sqrt arguments
    are additionally traced around each contour to detect enclosed zeros
    and branch-cut crossings.  A ``True`` answer is evidence, not proof.
    """
    contours = list(contours)
    if len(contours) != f.arity:
        raise ValueError("need one contour per variable")
    if isinstance(f, DividedDifferenceExpr):
        # f[x, y] is analytic wherever f is analytic at both arguments
        for c in contours:
            for g in (f.base, f.derived):
                if not analyticity_probe(g, [c], n_probe, cap, levels):
                    return False
    try:
        for grid in _probe_grids(contours, n_probe, levels):
            with np.errstate(all="ignore"):
                vals = f.evaluate(*grid)
            if not np.all(np.isfinite(vals)) or np.abs(vals).max() > cap:
                return False
        if isinstance(f, DividedDifferenceExpr):
            return True
        guarded = []
        for root in _roots(f):
            _guarded_subtrees(root, guarded)
        dense = max(4 * n_probe, 64)
        for kind, sub in guarded:
            if not _winding_ok(sub, kind, contours, n_probe, levels, dense):
                return False
    except EvaluationDomainError:
        return False
    return True
