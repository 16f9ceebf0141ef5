"""Expression trees for real symbols g(x): parsing, printing, evaluation,
symbolic differentiation and location of the singular set.

Grammar (whitespace insensitive)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?          # right associative
    atom    := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := sqrt | log | abs | exp | sin | cos

The only free variable is ``x``; any other identifier must be a parameter
supplied at parse time, and is replaced by its value.  Constant subtrees are
folded as the tree is built.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import optimize

__all__ = [
    "ExprTree", "Const", "Var", "Add", "Sub", "Mul", "Div", "Neg", "Pow", "Func",
    "ExprSyntaxError", "UnknownIdentifierError", "ParameterError", "SymbolError",
    "DenseZeroSetError", "SpectralSymbol", "parse", "differentiate", "pretty",
    "singular_points", "structural_singularities", "real_zeros", "build_symbol",
    "FUNCTIONS",
]


class ExprSyntaxError(ValueError):
    """Malformed expression. ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ParameterError(ValueError):
    pass


class SymbolError(ValueError):
    """The symbol violates the admissibility conditions on the window."""


class DenseZeroSetError(SymbolError):
    pass


# --------------------------------------------------------------------------
# tree nodes

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _fmt(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


class ExprTree:
    """Base class of immutable expression nodes.

    Nodes are callable: ``tree(x)`` evaluates on a float or array.
    """

    prec = _PREC_ATOM

    def __call__(self, x):
        with np.errstate(all="ignore"):
            return self._eval(np.asarray(x, dtype=float))

    def _eval(self, x):
        raise NotImplementedError

    def children(self) -> tuple["ExprTree", ...]:
        return ()

    def is_const(self) -> bool:
        return False

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True, eq=True)
class Const(ExprTree):
    value: float

    def _eval(self, x):
        return np.full(np.shape(x), self.value)

    def is_const(self):
        return True

    def __str__(self):
        return _fmt(self.value)


@dataclass(frozen=True, eq=True)
class Var(ExprTree):
    def _eval(self, x):
        return x.astype(float, copy=True)

    def __str__(self):
        return "x"


@dataclass(frozen=True, eq=True)
class _Binary(ExprTree):
    left: ExprTree
    right: ExprTree
    op = "?"

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return pretty(self)


class Add(_Binary):
    op, prec = "+", _PREC_ADD

    def _eval(self, x):
        return self.left._eval(x) + self.right._eval(x)


class Sub(_Binary):
    op, prec = "-", _PREC_ADD

    def _eval(self, x):
        return self.left._eval(x) - self.right._eval(x)


class Mul(_Binary):
    op, prec = "*", _PREC_MUL

    def _eval(self, x):
        return self.left._eval(x) * self.right._eval(x)


class Div(_Binary):
    op, prec = "/", _PREC_MUL

    def _eval(self, x):
        return self.left._eval(x) / self.right._eval(x)


@dataclass(frozen=True, eq=True)
class Neg(ExprTree):
    arg: ExprTree
    prec = _PREC_NEG

    def children(self):
        return (self.arg,)

    def _eval(self, x):
        return -self.arg._eval(x)

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True, eq=True)
class Pow(ExprTree):
    """``base ^ exponent`` with a fixed real exponent."""

    base: ExprTree
    exponent: float
    prec = _PREC_POW

    def children(self):
        return (self.base,)

    def _eval(self, x):
        b = self.base._eval(x)
        p = self.exponent
        if float(p).is_integer():
            return b ** int(p) if p >= 0 else 1.0 / b ** int(-p)
        return np.where(b >= 0, np.abs(b) ** p, np.nan)

    def __str__(self):
        return pretty(self)


# sign is produced by differentiation of abs; it is not part of the input grammar
FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sqrt": lambda u: np.where(u >= 0, np.sqrt(np.abs(u)), np.nan),
    "log": lambda u: np.where(u > 0, np.log(np.abs(u)), np.where(u == 0, -np.inf, np.nan)),
    "abs": np.abs,
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
}
_INTERNAL_FUNCTIONS = {**FUNCTIONS, "sign": np.sign}


@dataclass(frozen=True, eq=True)
class Func(ExprTree):
    name: str
    arg: ExprTree

    def children(self):
        return (self.arg,)

    def _eval(self, x):
        return _INTERNAL_FUNCTIONS[self.name](self.arg._eval(x))

    def __str__(self):
        return pretty(self)


# --------------------------------------------------------------------------
# smart constructors (local simplification rules only)

def _c(tree: ExprTree) -> float | None:
    return tree.value if isinstance(tree, Const) else None


def _const(value: float) -> Const:
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"constant subexpression evaluates to {value}")
    return Const(value + 0.0)


def add(a: ExprTree, b: ExprTree) -> ExprTree:
    ca, cb = _c(a), _c(b)
    if ca is not None and cb is not None:
        return _const(ca + cb)
    if ca == 0:
        return b
    if cb == 0:
        return a
    return Add(a, b)


def sub(a: ExprTree, b: ExprTree) -> ExprTree:
    ca, cb = _c(a), _c(b)
    if ca is not None and cb is not None:
        return _const(ca - cb)
    if cb == 0:
        return a
    if ca == 0:
        return neg(b)
    return Sub(a, b)


def neg(a: ExprTree) -> ExprTree:
    if isinstance(a, Const):
        return _const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a: ExprTree, b: ExprTree) -> ExprTree:
    ca, cb = _c(a), _c(b)
    if ca is not None and cb is not None:
        return _const(ca * cb)
    if cb is not None:
        a, b, ca, cb = b, a, cb, ca
    if ca == 0:
        return Const(0.0)
    if ca == 1:
        return b
    if ca == -1:
        return neg(b)
    if ca is not None and isinstance(b, Mul) and isinstance(b.left, Const):
        return mul(_const(ca * b.left.value), b.right)
    return Mul(a, b)


def div(a: ExprTree, b: ExprTree) -> ExprTree:
    ca, cb = _c(a), _c(b)
    if cb == 0:
        raise ParameterError("division by the constant 0")
    if ca is not None and cb is not None:
        return _const(ca / cb)
    if ca == 0:
        return Const(0.0)
    if cb == 1:
        return a
    if cb is not None:
        if isinstance(a, Mul) and isinstance(a.left, Const):
            return mul(_const(a.left.value / cb), a.right)
        return Div(a, b)
    if isinstance(a, Mul) and isinstance(a.left, Const) and isinstance(b, Mul) and isinstance(b.left, Const):
        return mul(_const(a.left.value / b.left.value), div(a.right, b.right))
    return Div(a, b)


def power(a: ExprTree, p: float) -> ExprTree:
    p = float(p)
    if isinstance(a, Const):
        with np.errstate(all="ignore"):
            value = Pow(a, p)(0.0)
        if not np.isfinite(value):
            raise ParameterError(f"{_fmt(a.value)}^{_fmt(p)} is not a finite real")
        return _const(float(value))
    if p == 0:
        return Const(1.0)
    if p == 1:
        return a
    return Pow(a, p)


def func(name: str, a: ExprTree) -> ExprTree:
    if isinstance(a, Const):
        with np.errstate(all="ignore"):
            value = float(_INTERNAL_FUNCTIONS[name](np.float64(a.value)))
        if not math.isfinite(value):
            raise ParameterError(f"{name}({_fmt(a.value)}) is not a finite real")
        return _const(value)
    return Func(name, a)


# --------------------------------------------------------------------------
# printing

def pretty(tree: ExprTree) -> str:
    """Canonical text form, parenthesized only where the grammar requires."""
    match tree:
        case Const(value=v):
            return _fmt(v)
        case Var():
            return "x"
        case Func(name=name, arg=arg):
            return f"{name}({pretty(arg)})"
        case Neg(arg=arg):
            inner = pretty(arg)
            if arg.prec <= _PREC_MUL or (isinstance(arg, Const) and arg.value < 0):
                inner = f"({inner})"
            return f"-{inner}"
        case Pow(base=base, exponent=p):
            b = pretty(base)
            if base.prec <= _PREC_POW or (isinstance(base, Const) and base.value < 0):
                b = f"({b})"
            return f"{b}^{_fmt(p)}"
        case _Binary(left=left, right=right):
            lhs, rhs = pretty(left), pretty(right)
            if left.prec < tree.prec:
                lhs = f"({lhs})"
            # left associativity: equal precedence on the right needs parentheses
            if right.prec <= tree.prec or (isinstance(right, Const) and right.value < 0):
                rhs = f"({rhs})"
            return f"{lhs} {tree.op} {rhs}"
    raise TypeError(f"not an expression node: {tree!r}")


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            start = len(text[:pos]) + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", _byte_offset(text, start))
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, params: Mapping[str, float]):
        self.text = text
        self.params = params
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok):
        return ExprSyntaxError(message, _byte_offset(self.text, tok[2]))

    def expect(self, value):
        tok = self.next()
        if tok[1] != value or tok[0] != "op":
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise self.error(f"expected {value!r}, found {found}", tok)

    def parse(self) -> ExprTree:
        tree = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise self.error(f"unexpected {tok[1]!r}", tok)
        return tree

    def expr(self):
        tree = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.next()[1]
            rhs = self.term()
            tree = add(tree, rhs) if op == "+" else sub(tree, rhs)
        return tree

    def term(self):
        tree = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            tok = self.next()
            rhs = self.unary()
            try:
                tree = mul(tree, rhs) if tok[1] == "*" else div(tree, rhs)
            except ParameterError as exc:
                raise self.error(str(exc), tok) from None
        return tree

    def unary(self):
        tok = self.peek()
        if tok[:2] == ("op", "-"):
            self.next()
            return neg(self.unary())
        if tok[:2] == ("op", "+"):
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            tok = self.next()
            exponent = self.unary()
            if not isinstance(exponent, Const):
                raise self.error("exponent must be a constant expression", tok)
            try:
                return power(base, exponent.value)
            except ParameterError as exc:
                raise self.error(str(exc), tok) from None
        return base

    def atom(self):
        tok = self.next()
        kind, value, _ = tok
        if kind == "num":
            return _const(float(value))
        if kind == "id":
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                try:
                    return func(value, arg)
                except ParameterError as exc:
                    raise self.error(str(exc), tok) from None
            if value == "x":
                return Var()
            if value in self.params:
                return _const(self.params[value])
            raise UnknownIdentifierError(f"unknown identifier {value!r}", _byte_offset(self.text, tok[2]))
        if (kind, value) == ("op", "("):
            tree = self.expr()
            self.expect(")")
            return tree
        found = "end of input" if kind == "end" else repr(value)
        raise self.error(f"expected a number, identifier or '(', found {found}", tok)


def parse(text: str, params: Mapping[str, float] | None = None) -> ExprTree:
    """Parse ``text`` into an expression tree in the variable ``x``.

    >>> pretty(parse("sqrt(x^2 + m^2)", {"m": 1}))
    'sqrt(x^2 + 1)'
    """
    params = dict(params or {})
    for name, value in params.items():
        if name == "x" or name in FUNCTIONS or not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
            raise ParameterError(f"invalid parameter name {name!r}")
        if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
            raise ParameterError(f"parameter {name!r} must be a real number, got {value!r}")
        if not math.isfinite(float(value)):
            raise ParameterError(f"parameter {name!r} must be finite, got {value!r}")
        params[name] = float(value)
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text, params).parse()


# --------------------------------------------------------------------------
# differentiation

def differentiate(tree: ExprTree) -> ExprTree:
    """Symbolic derivative with respect to ``x``."""
    d = differentiate
    match tree:
        case Const():
            return Const(0.0)
        case Var():
            return Const(1.0)
        case Add(left=a, right=b):
            return add(d(a), d(b))
        case Sub(left=a, right=b):
            return sub(d(a), d(b))
        case Neg(arg=a):
            return neg(d(a))
        case Mul(left=a, right=b):
            return add(mul(d(a), b), mul(a, d(b)))
        case Div(left=a, right=b):
            if b.is_const():
                return div(d(a), b)
            if a.is_const():
                return neg(div(mul(a, d(b)), power(b, 2)))
            return div(sub(mul(d(a), b), mul(a, d(b))), power(b, 2))
        case Pow(base=u, exponent=p):
            return mul(mul(Const(p), d(u)), power(u, p - 1))
        case Func(name="log", arg=Func(name="abs", arg=u)):
            # log|u|' = u'/u away from the zeros of u
            return div(d(u), u)
        case Func(name=name, arg=u):
            du = d(u)
            if name == "sqrt":
                return div(mul(Const(0.5), du), tree)
            if name == "log":
                return div(du, u)
            if name == "abs":
                return mul(du, Func("sign", u))
            if name == "exp":
                return mul(du, tree)
            if name == "sin":
                return mul(du, func("cos", u))
            if name == "cos":
                return neg(mul(du, func("sin", u)))
            if name == "sign":
                return Const(0.0)
    raise TypeError(f"cannot differentiate {tree!r}")


# --------------------------------------------------------------------------
# zero finding and singular structure

def _dedupe(points: Sequence[float], tol: float = 1e-9) -> list[float]:
    out: list[float] = []
    for p in sorted(points):
        if not out or p - out[-1] > tol:
            out.append(p)
    return out


def real_zeros(fn: Callable[[np.ndarray], np.ndarray], window: tuple[float, float],
               resolution: float, xtol: float = 1e-12, dense_fraction: float | None = None,
               dense_threshold: float = 1e-14) -> list[float]:
    """Zeros of ``fn`` on ``window`` by a scan at step ``resolution``.

    Sign changes are refined by bisection; sign-preserving local minima of
    ``|fn|`` (double roots) are refined by bounded minimization and kept when
    ``|fn| <= 1e-12`` there.  Brackets across poles are discarded.
    """
    lo, hi = map(float, window)
    if not hi > lo:
        raise ValueError(f"empty window {window}")
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    n = int(math.ceil((hi - lo) / resolution)) + 1
    xs = np.linspace(lo, hi, n)
    vs = np.asarray(fn(xs), dtype=float)
    finite = np.isfinite(vs)
    av = np.abs(vs)
    if dense_fraction is not None:
        small = np.count_nonzero(finite & (av < dense_threshold))
        if small > dense_fraction * n:
            raise DenseZeroSetError(
                f"derivative vanishes on {small}/{n} scan points of {list(window)}; "
                "its zero set must have Lebesgue measure zero"
            )

    def scalar(z):
        return float(np.asarray(fn(np.array([z])), dtype=float)[0])

    found = [float(x) for x in xs[finite & (vs == 0.0)]]
    s = np.sign(vs)
    both = finite[:-1] & finite[1:]
    for i in np.flatnonzero(both & (s[:-1] * s[1:] < 0)):
        z = optimize.bisect(scalar, xs[i], xs[i + 1], xtol=xtol)
        if abs(scalar(z)) <= min(av[i], av[i + 1]):
            found.append(z)
    interior = np.flatnonzero(
        finite[1:-1] & finite[:-2] & finite[2:]
        & (av[1:-1] <= av[:-2]) & (av[1:-1] < av[2:])
        & (s[:-2] == s[2:]) & (s[1:-1] != 0) & (s[:-2] == s[1:-1])
    ) + 1
    for i in interior:
        res = optimize.minimize_scalar(lambda z: abs(scalar(z)), bounds=(xs[i - 1], xs[i + 1]),
                                       method="bounded", options={"xatol": xtol})
        if abs(scalar(res.x)) <= 1e-12:
            found.append(float(res.x))
    return _dedupe(found)


def _singular_arguments(tree: ExprTree) -> list[ExprTree]:
    """Subterms whose zeros are candidate points of non-smoothness."""
    out = []
    match tree:
        case Func(name=name, arg=u) if name in ("abs", "log", "sqrt", "sign"):
            out.append(u)
        case Div(right=b):
            out.append(b)
        case Pow(base=u, exponent=p) if not (float(p).is_integer() and p >= 0):
            out.append(u)
    for child in tree.children():
        out.extend(_singular_arguments(child))
    return [u for u in out if not u.is_const()]


def structural_singularities(tree: ExprTree, window: tuple[float, float],
                             resolution: float = 1e-3) -> list[float]:
    """Points of ``window`` where some abs/log/sqrt/sign argument, denominator,
    or base of a non-integer or negative power vanishes."""
    points: list[float] = []
    for u in _singular_arguments(tree):
        points.extend(real_zeros(u, window, resolution))
    return _dedupe(points)


@dataclass(frozen=True)
class SpectralSymbol:
    """A real symbol g with its derivative and non-smooth set on a window.

    Build with :func:`build_symbol`; instances constructed that way have
    passed the admissibility checks (``validated`` is True).
    """

    text: str
    params: Mapping[str, float]
    g: ExprTree
    gprime: ExprTree
    window: tuple[float, float]
    K: tuple[float, ...]
    validated: bool = False
    K_outside: tuple[float, ...] = field(default=())

    def __call__(self, k):
        return self.g(k)

    def derivative(self, k):
        return self.gprime(k)


def _fd_check(g: ExprTree, gprime: ExprTree, window, K, npoints=1000, seed=0):
    rng = np.random.default_rng(seed)
    lo, hi = window
    pts = rng.uniform(lo, hi, size=4 * npoints)
    if K:
        dist = np.min(np.abs(pts[:, None] - np.asarray(K)[None, :]), axis=1)
    else:
        dist = np.full(pts.shape, np.inf)
    pts, dist = pts[dist > 1e-3][:npoints], dist[dist > 1e-3][:npoints]
    h = 1e-5 * np.minimum(1.0 + np.abs(pts), dist)
    sym = gprime(pts)
    fd = (g(pts + h) - g(pts - h)) / (2 * h)
    bad = ~(np.abs(sym - fd) <= 1e-6 * (1 + np.abs(sym)))
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise SymbolError(
            f"symbolic derivative {pretty(gprime)} disagrees with finite differences "
            f"at x={pts[i]!r}: {sym[i]!r} vs {fd[i]!r}"
        )


def build_symbol(text: str, params: Mapping[str, float] | None = None,
                 window: tuple[float, float] = (-10.0, 10.0), resolution: float = 1e-3,
                 validate: bool = True) -> SpectralSymbol:
    """Parse ``text``, differentiate it and check admissibility on ``window``.

    The checks: g is finite and real away from its structural singular
    points, the symbolic derivative matches central differences, and the
    zero set of g' is not dense (raises :class:`DenseZeroSetError`).
    """
    params = dict(params or {})
    g = parse(text, params)
    gprime = differentiate(g)
    window = (float(window[0]), float(window[1]))
    K = tuple(_dedupe(structural_singularities(g, window, resolution)
                      + structural_singularities(gprime, window, resolution)))
    sym = SpectralSymbol(text, params, g, gprime, window, K)
    if not validate:
        return sym

    xs = np.linspace(*window, int((window[1] - window[0]) / resolution) + 1)
    if K:
        keep = np.min(np.abs(xs[:, None] - np.asarray(K)[None, :]), axis=1) > 1e-3
        xs = xs[keep]
    vals = g(xs)
    if not np.all(np.isfinite(vals)):
        bad = xs[~np.isfinite(vals)]
        raise SymbolError(f"g = {pretty(g)} is not a finite real on {list(window)} (e.g. at x={bad[0]!r})")
    _fd_check(g, gprime, window, K)
    # raises DenseZeroSetError when g' vanishes on a set of positive measure
    real_zeros(gprime, window, resolution, dense_fraction=0.10)
    return SpectralSymbol(text, params, g, gprime, window, K, validated=True)


def singular_points(sym: SpectralSymbol, window: tuple[float, float] | None = None,
                    resolution: float = 1e-3) -> list[float]:
    """Sorted union of the non-smooth points K and the zeros of g' in ``window``."""
    window = sym.window if window is None else (float(window[0]), float(window[1]))
    K = [p for p in sym.K if window[0] <= p <= window[1]]
    if window != sym.window:
        K = _dedupe(K + structural_singularities(sym.g, window, resolution)
                    + structural_singularities(sym.gprime, window, resolution))
    zeros = real_zeros(sym.gprime, window, resolution, dense_fraction=0.10)
    zeros = [z for z in zeros if all(abs(z - p) > 1e-9 for p in K)]
    return _dedupe(K + zeros)
