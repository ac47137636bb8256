"""A small quantifier-free term language over F_q((t)).

Sorts: ``field`` (polynomials in variables and t), ``int`` (Presburger-style
terms with ord, min, max, mod), ``residue`` (ac and bracket constants) and
``bool`` (comparisons, divisibility "n | e", and/or/not).

Grammar (loosest binding first)::

    bool    := conj ("or" conj)*
    conj    := neg ("and" neg)*
    neg     := "not" neg | cmp
    cmp     := INT "|" arith | arith (("=" | "!=" | "<=" | "<" | ">=" | ">") arith)?
    arith   := term (("+" | "-") term)*
    term    := unary (("*" | "mod") unary)*
    unary   := "-" unary | power
    power   := atom ("^" "-"? INT)?
    atom    := INT | "[" INT ("," INT)* "]" | "t" | IDENT
             | ("ord" | "ac") "(" bool ")" | ("min" | "max") "(" bool ("," bool)* ")"
             | "(" bool ")"
"""

from __future__ import annotations

import itertools
import re
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .local_field import INF, FieldElement, LocalField, PrecisionError, Vector

FIELD, INT, RES, BOOL = "field", "int", "residue", "bool"


class ExprError(ValueError):
    """Syntax or sort error, with a character offset when known."""

    def __init__(self, message: str, pos: int | None = None):
        super().__init__(message if pos is None else f"{message} (at offset {pos})")
        self.pos = pos


class StabilityError(RuntimeError):
    """A value changed between depth D and D+1."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Num(Node):
    value: int
    sort: str | None = None


@dataclass(frozen=True)
class ResLit(Node):
    coords: tuple[int, ...]
    sort: str | None = None


@dataclass(frozen=True)
class Var(Node):
    name: str
    sort: str = FIELD


@dataclass(frozen=True)
class Uniformizer(Node):
    sort: str = FIELD


@dataclass(frozen=True)
class Neg(Node):
    arg: Node
    sort: str | None = None


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # + - * mod
    left: Node
    right: Node
    sort: str | None = None


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exp: int
    sort: str | None = None


@dataclass(frozen=True)
class Func(Node):
    name: str  # ord ac min max
    args: tuple[Node, ...]
    sort: str | None = None


@dataclass(frozen=True)
class Divides(Node):
    n: int
    arg: Node
    sort: str = BOOL


@dataclass(frozen=True)
class Cmp(Node):
    op: str
    left: Node
    right: Node
    sort: str = BOOL


@dataclass(frozen=True)
class BoolOp(Node):
    op: str  # and or
    left: Node
    right: Node
    sort: str = BOOL


@dataclass(frozen=True)
class Not(Node):
    arg: Node
    sort: str = BOOL


def sort_of(node: Node) -> str | None:
    return getattr(node, "sort", None)


def free_vars(node: Node) -> list[str]:
    out: list[str] = []

    def walk(n):
        if isinstance(n, Var):
            if n.name not in out:
                out.append(n.name)
        for child in _children(n):
            walk(child)

    walk(node)
    return out


def _children(n: Node) -> tuple[Node, ...]:
    if isinstance(n, (Neg, Not, Divides)):
        return (n.arg,)
    if isinstance(n, (BinOp, Cmp, BoolOp)):
        return (n.left, n.right)
    if isinstance(n, Pow):
        return (n.base,)
    if isinstance(n, Func):
        return n.args
    return ()


# ---------------------------------------------------------------------------
# Tokenizer and parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<res>\[[\d\s,]*\])|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><=|>=|!=|[-+*^(),|=<>]))"
)
_KEYWORDS = {"and", "or", "not", "mod", "ord", "ac", "min", "max", "t"}


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ExprError(f"unexpected character {text[pos:].strip()[:1]!r}", pos)
        kind = m.lastgroup
        tok = m.group(kind)
        start = m.start(kind)
        if kind == "id" and tok in _KEYWORDS:
            kind = "kw"
        toks.append(_Tok(kind, tok, start))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def accept(self, kind: str, text: str | None = None) -> _Tok | None:
        tok = self.cur
        if tok.kind == kind and (text is None or tok.text == text):
            self.i += 1
            return tok
        return None

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        tok = self.accept(kind, text)
        if tok is None:
            want = text or kind
            got = self.cur.text or "end of input"
            raise ExprError(f"expected {want!r}, got {got!r}", self.cur.pos)
        return tok

    def parse(self) -> Node:
        node = self.bool_or()
        if self.cur.kind != "eof":
            raise ExprError(f"unexpected {self.cur.text!r}", self.cur.pos)
        return node

    def bool_or(self) -> Node:
        node = self.bool_and()
        while self.accept("kw", "or"):
            node = BoolOp("or", node, self.bool_and())
        return node

    def bool_and(self) -> Node:
        node = self.bool_not()
        while self.accept("kw", "and"):
            node = BoolOp("and", node, self.bool_not())
        return node

    def bool_not(self) -> Node:
        if self.accept("kw", "not"):
            return Not(self.bool_not())
        return self.comparison()

    def comparison(self) -> Node:
        if self.cur.kind == "int" and self.toks[self.i + 1].kind == "op" and self.toks[self.i + 1].text == "|":
            n = int(self.expect("int").text)
            self.expect("op", "|")
            if n <= 0:
                raise ExprError("divisibility modulus must be positive", self.cur.pos)
            return Divides(n, self.arith())
        left = self.arith()
        for op in ("=", "!=", "<=", "<", ">=", ">"):
            if self.accept("op", op):
                return Cmp(op, left, self.arith())
        return left

    def arith(self) -> Node:
        node = self.term()
        while True:
            if self.accept("op", "+"):
                node = BinOp("+", node, self.term())
            elif self.accept("op", "-"):
                node = BinOp("-", node, self.term())
            else:
                return node

    def term(self) -> Node:
        node = self.unary()
        while True:
            if self.accept("op", "*"):
                node = BinOp("*", node, self.unary())
            elif self.accept("kw", "mod"):
                node = BinOp("mod", node, self.unary())
            else:
                return node

    def unary(self) -> Node:
        if self.accept("op", "-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.accept("op", "^"):
            sign = -1 if self.accept("op", "-") else 1
            e = int(self.expect("int").text)
            return Pow(base, sign * e)
        return base

    def atom(self) -> Node:
        tok = self.cur
        if self.accept("int"):
            return Num(int(tok.text))
        if self.accept("res"):
            body = tok.text[1:-1]
            parts = [s.strip() for s in body.split(",")]
            if not parts or any(not s for s in parts):
                raise ExprError("empty residue literal", tok.pos)
            return ResLit(tuple(int(s) for s in parts))
        if self.accept("kw", "t"):
            return Uniformizer()
        if tok.kind == "kw" and tok.text in ("ord", "ac", "min", "max"):
            self.i += 1
            self.expect("op", "(")
            args = [self.bool_or()]
            while self.accept("op", ","):
                args.append(self.bool_or())
            self.expect("op", ")")
            if tok.text in ("ord", "ac") and len(args) != 1:
                raise ExprError(f"{tok.text} takes one argument", tok.pos)
            return Func(tok.text, tuple(args))
        if self.accept("id"):
            return Var(tok.text)
        if self.accept("op", "("):
            node = self.bool_or()
            self.expect("op", ")")
            return node
        raise ExprError(f"unexpected {tok.text or 'end of input'!r}", tok.pos)


# ---------------------------------------------------------------------------
# Sort checking
# ---------------------------------------------------------------------------


def _is_int_constant(n: Node) -> bool:
    if isinstance(n, Num):
        return True
    if isinstance(n, Neg):
        return _is_int_constant(n.arg)
    if isinstance(n, BinOp) and n.op in "+-*":
        return _is_int_constant(n.left) and _is_int_constant(n.right)
    return False


class _Checker:
    def __init__(self, int_vars: set[str], res_vars: set[str]):
        self.int_vars = int_vars
        self.res_vars = res_vars

    def infer(self, n: Node) -> str | None:
        """Sort of n, or None for a bare polymorphic literal expression."""
        if isinstance(n, Num):
            return n.sort
        if isinstance(n, ResLit):
            return n.sort
        if isinstance(n, Var):
            return n.sort
        if isinstance(n, Uniformizer):
            return FIELD
        if isinstance(n, Neg):
            s = self.infer(n.arg)
            if s in (BOOL,):
                raise ExprError("negation of a boolean")
            return s
        if isinstance(n, Pow):
            s = self.infer(n.base)
            return s
        if isinstance(n, BinOp):
            if n.op == "mod":
                return INT
            a, b = self.infer(n.left), self.infer(n.right)
            if a is not None and b is not None and a != b:
                raise ExprError(f"sort mismatch: {a} {n.op} {b}")
            return a or b
        if isinstance(n, Func):
            return {"ord": INT, "ac": RES, "min": INT, "max": INT}[n.name]
        return BOOL

    def resolve(self, n: Node, want: str | None) -> Node:
        """Rebuild n with every literal resolved to a concrete sort."""
        if isinstance(n, Num):
            s = want or INT
            if s == BOOL:
                raise ExprError("integer literal used as a boolean")
            return Num(n.value, s)
        if isinstance(n, ResLit):
            s = want or RES
            if s not in (RES, FIELD):
                raise ExprError(f"residue literal used in {s} context")
            return ResLit(n.coords, s)
        if isinstance(n, Var):
            s = INT if n.name in self.int_vars else RES if n.name in self.res_vars else FIELD
            if want is not None and want != s:
                raise ExprError(f"variable {n.name!r} of sort {s} used as {want}")
            return Var(n.name, s)
        if isinstance(n, Uniformizer):
            if want not in (None, FIELD):
                raise ExprError(f"t used as {want}")
            return n
        if isinstance(n, Neg):
            s = want or self._sort(n.arg) or INT
            if s not in (FIELD, INT, RES):
                raise ExprError(f"negation in {s} context")
            return Neg(self.resolve(n.arg, s), s)
        if isinstance(n, Pow):
            s = want or self._sort(n.base) or INT
            if s == BOOL:
                raise ExprError("power of a boolean")
            base = self.resolve(n.base, s)
            if n.exp < 0 and not (s == FIELD and isinstance(base, Uniformizer)):
                raise ExprError("negative exponents are only allowed on t")
            if s == INT and n.exp > 1 and not _is_int_constant(base):
                raise ExprError("non-linear integer term")
            return Pow(base, n.exp, s)
        if isinstance(n, BinOp):
            if n.op == "mod":
                if want not in (None, INT):
                    raise ExprError(f"mod used as {want}")
                right = self.resolve(n.right, INT)
                if not isinstance(right, Num) or right.value <= 0:
                    raise ExprError("mod needs a positive integer literal")
                return BinOp("mod", self.resolve(n.left, INT), right, INT)
            s = want or self._sort(n) or INT
            if s == BOOL:
                raise ExprError(f"arithmetic {n.op} in boolean context")
            left, right = self.resolve(n.left, s), self.resolve(n.right, s)
            if s == INT and n.op == "*" and not (_is_int_constant(left) or _is_int_constant(right)):
                raise ExprError("integer products need a constant factor")
            return BinOp(n.op, left, right, s)
        if isinstance(n, Func):
            out = {"ord": INT, "ac": RES, "min": INT, "max": INT}[n.name]
            if want is not None and want != out:
                raise ExprError(f"{n.name}(...) has sort {out}, used as {want}")
            if n.name in ("ord", "ac"):
                return Func(n.name, (self.resolve(n.args[0], FIELD),), out)
            return Func(n.name, tuple(self.resolve(a, INT) for a in n.args), out)
        if want not in (None, BOOL):
            raise ExprError(f"boolean term used as {want}")
        if isinstance(n, Divides):
            return Divides(n.n, self.resolve(n.arg, INT))
        if isinstance(n, Cmp):
            s = self._sort(n.left) or self._sort(n.right) or INT
            if s == BOOL:
                raise ExprError("comparison of booleans")
            if s in (FIELD, RES) and n.op not in ("=", "!="):
                raise ExprError(f"order comparison {n.op!r} on sort {s}")
            return Cmp(n.op, self.resolve(n.left, s), self.resolve(n.right, s))
        if isinstance(n, BoolOp):
            return BoolOp(n.op, self.resolve(n.left, BOOL), self.resolve(n.right, BOOL))
        if isinstance(n, Not):
            return Not(self.resolve(n.arg, BOOL))
        raise ExprError(f"unknown node {n!r}")

    def _sort(self, n: Node) -> str | None:
        if isinstance(n, Var):
            return INT if n.name in self.int_vars else RES if n.name in self.res_vars else FIELD
        if isinstance(n, (Neg, Pow)):
            return self._sort(n.arg if isinstance(n, Neg) else n.base)
        if isinstance(n, BinOp):
            if n.op == "mod":
                return INT
            a, b = self._sort(n.left), self._sort(n.right)
            if a is not None and b is not None and a != b:
                raise ExprError(f"sort mismatch: {a} {n.op} {b}")
            return a or b
        if isinstance(n, (Num, ResLit)):
            return None
        return self.infer(n)


def parse(text: str, int_vars: Iterable[str] = (), res_vars: Iterable[str] = (), sort: str | None = None) -> Node:
    """Parse and sort-check. Undeclared identifiers have field sort."""
    raw = _Parser(text).parse()
    return _Checker(set(int_vars), set(res_vars)).resolve(raw, sort)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC = {"or": 1, "and": 2, "not": 3, "cmp": 4, "+": 5, "-": 5, "*": 6, "mod": 6, "neg": 7, "^": 8, "atom": 9}


def _prec(n: Node) -> int:
    if isinstance(n, BoolOp):
        return _PREC[n.op]
    if isinstance(n, Not):
        return _PREC["not"]
    if isinstance(n, (Cmp, Divides)):
        return _PREC["cmp"]
    if isinstance(n, BinOp):
        return _PREC[n.op]
    if isinstance(n, Neg):
        return _PREC["neg"]
    if isinstance(n, Pow):
        return _PREC["^"]
    return _PREC["atom"]


def to_text(n: Node) -> str:
    """Canonical text; parse(to_text(n)) reproduces n."""

    def wrap(child: Node, min_prec: int) -> str:
        s = to_text(child)
        return f"({s})" if _prec(child) < min_prec else s

    if isinstance(n, Num):
        return str(n.value)
    if isinstance(n, ResLit):
        return "[" + ",".join(str(c) for c in n.coords) + "]"
    if isinstance(n, Var):
        return n.name
    if isinstance(n, Uniformizer):
        return "t"
    if isinstance(n, Neg):
        return "-" + wrap(n.arg, _PREC["neg"])
    if isinstance(n, Pow):
        return f"{wrap(n.base, _PREC['atom'])}^{n.exp}"
    if isinstance(n, BinOp):
        p = _PREC[n.op]
        op = f" {n.op} " if n.op in ("+", "-", "mod") else "*"
        return f"{wrap(n.left, p)}{op}{wrap(n.right, p + 1)}"
    if isinstance(n, Func):
        return f"{n.name}(" + ", ".join(to_text(a) for a in n.args) + ")"
    if isinstance(n, Divides):
        return f"{n.n} | {wrap(n.arg, _PREC['+'])}"
    if isinstance(n, Cmp):
        return f"{wrap(n.left, _PREC['+'])} {n.op} {wrap(n.right, _PREC['+'])}"
    if isinstance(n, BoolOp):
        p = _PREC[n.op]
        return f"{wrap(n.left, p)} {n.op} {wrap(n.right, p + 1)}"
    if isinstance(n, Not):
        return "not " + wrap(n.arg, _PREC["not"])
    raise ExprError(f"cannot print {n!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _int_add(a, b):
    return INF if a == INF or b == INF else a + b


def _int_sub(a, b):
    if b == INF:
        raise ExprError("subtracting the +inf sentinel")
    return INF if a == INF else a - b


def _int_mul(a, b):
    if a == INF or b == INF:
        other = b if a == INF else a
        if other == 0:
            return 0
        if other != INF and other < 0:
            raise ExprError("negative multiple of the +inf sentinel")
        return INF
    return a * b


def evaluate(n: Node, env: Mapping[str, object], K: LocalField):
    """Evaluate a sorted AST. ord(0) is INF; INF absorbs min/max and n | INF holds."""
    R = K.residue
    if isinstance(n, Num):
        if n.sort == FIELD:
            return K.from_int(n.value)
        if n.sort == RES:
            return R.from_int(n.value)
        return n.value
    if isinstance(n, ResLit):
        code = R.from_coords(list(n.coords) + [0] * (R.f - len(n.coords)))
        return K.const(code) if n.sort == FIELD else code
    if isinstance(n, Var):
        if n.name not in env:
            raise ExprError(f"unassigned variable {n.name!r}")
        return env[n.name]
    if isinstance(n, Uniformizer):
        return K.t(1)
    if isinstance(n, Neg):
        v = evaluate(n.arg, env, K)
        if n.sort == INT:
            if v == INF:
                raise ExprError("negating the +inf sentinel")
            return -v
        if n.sort == RES:
            return R.neg(v)
        return -v
    if isinstance(n, Pow):
        if n.sort == FIELD and isinstance(n.base, Uniformizer):
            return K.t(n.exp)
        v = evaluate(n.base, env, K)
        if n.sort == FIELD:
            return v**n.exp
        if n.sort == RES:
            out = 1
            for _ in range(n.exp):
                out = R.mul(out, v)
            return out
        out = 1
        for _ in range(n.exp):
            out = _int_mul(out, v)
        return out
    if isinstance(n, BinOp):
        a = evaluate(n.left, env, K)
        b = evaluate(n.right, env, K)
        if n.op == "mod":
            return 0 if a == INF else a % b
        if n.sort == INT:
            return {"+": _int_add, "-": _int_sub, "*": _int_mul}[n.op](a, b)
        if n.sort == RES:
            return {"+": R.add, "-": R.sub, "*": R.mul}[n.op](a, b)
        return {"+": lambda x, y: x + y, "-": lambda x, y: x - y, "*": lambda x, y: x * y}[n.op](a, b)
    if isinstance(n, Func):
        if n.name == "ord":
            return evaluate(n.args[0], env, K).ord()
        if n.name == "ac":
            return evaluate(n.args[0], env, K).ac()
        vals = [evaluate(a, env, K) for a in n.args]
        return min(vals) if n.name == "min" else max(vals)
    if isinstance(n, Divides):
        v = evaluate(n.arg, env, K)
        return True if v == INF else v % n.n == 0
    if isinstance(n, Cmp):
        a = evaluate(n.left, env, K)
        b = evaluate(n.right, env, K)
        if isinstance(a, FieldElement):
            d = a - b
            if not d.coeffs and d.prec != INF:
                raise PrecisionError("field equality undetermined at this precision")
            eq = not d.coeffs
            return eq if n.op == "=" else not eq
        return {"=": a == b, "!=": a != b, "<=": a <= b, "<": a < b, ">=": a >= b, ">": a > b}[n.op]
    if isinstance(n, BoolOp):
        a = evaluate(n.left, env, K)
        if n.op == "and":
            return a and evaluate(n.right, env, K)
        return a or evaluate(n.right, env, K)
    if isinstance(n, Not):
        return not evaluate(n.arg, env, K)
    raise ExprError(f"cannot evaluate {n!r}")


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


class Polynomial:
    """Multivariate polynomial with coefficients in K (exact Laurent series)."""

    __slots__ = ("K", "n", "terms")

    def __init__(self, K: LocalField, n: int, terms: Mapping[tuple[int, ...], FieldElement] | None = None):
        self.K = K
        self.n = n
        self.terms = {e: c for e, c in (terms or {}).items() if c.coeffs}

    @classmethod
    def const(cls, K: LocalField, n: int, c: FieldElement) -> Polynomial:
        return cls(K, n, {(0,) * n: c})

    @classmethod
    def var(cls, K: LocalField, n: int, i: int) -> Polynomial:
        e = [0] * n
        e[i] = 1
        return cls(K, n, {tuple(e): K.one()})

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __add__(self, other: Polynomial) -> Polynomial:
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return Polynomial(self.K, self.n, out)

    def __neg__(self) -> Polynomial:
        return Polynomial(self.K, self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other) -> Polynomial:
        if isinstance(other, FieldElement):
            return Polynomial(self.K, self.n, {e: c * other for e, c in self.terms.items()})
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                out[e] = out[e] + prod if e in out else prod
        return Polynomial(self.K, self.n, out)

    def __pow__(self, k: int) -> Polynomial:
        if k < 0:
            raise ExprError("negative power of a polynomial")
        out = Polynomial.const(self.K, self.n, self.K.one())
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.n == other.n and self.terms == other.terms

    __hash__ = None

    def evaluate(self, point: Sequence[FieldElement]) -> FieldElement:
        total = None
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                for _ in range(k):
                    term = term * x
            total = term if total is None else total + term
        return self.K.zero() if total is None else total

    def derivative(self, i: int) -> Polynomial:
        out: dict = {}
        for e, c in self.terms.items():
            k = e[i]
            if k == 0:
                continue
            e2 = list(e)
            e2[i] -= 1
            e2 = tuple(e2)
            val = c * k
            out[e2] = out[e2] + val if e2 in out else val
        return Polynomial(self.K, self.n, out)

    def gradient(self) -> list[Polynomial]:
        return [self.derivative(i) for i in range(self.n)]

    def embed(self, n_total: int, offset: int = 0) -> Polynomial:
        """View as a polynomial in n_total variables, own variables at offset."""
        out = {}
        for e, c in self.terms.items():
            full = [0] * n_total
            full[offset : offset + self.n] = e
            out[tuple(full)] = c
        return Polynomial(self.K, n_total, out)

    def substitute(self, values: Sequence[Polynomial]) -> Polynomial:
        """Compose with polynomials for each variable."""
        n2 = values[0].n if values else self.n
        total = Polynomial(self.K, n2)
        powers: dict[tuple[int, int], Polynomial] = {}
        for e, c in self.terms.items():
            term = Polynomial.const(self.K, n2, c)
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    if key not in powers:
                        powers[key] = values[i] ** k
                    term = term * powers[key]
            total = total + term
        return total

    def shifted(self) -> Polynomial:
        """P(x + y) as a polynomial in 2n variables (x first, then y)."""
        n = self.n
        vals = [Polynomial.var(self.K, 2 * n, i) + Polynomial.var(self.K, 2 * n, n + i) for i in range(n)]
        return self.substitute(vals)

    def ord_floor(self, betas: Sequence[float]) -> float:
        """Lower bound of ord P(x) for ord x_i >= betas[i] (monomial-wise)."""
        best = INF
        for e, c in self.terms.items():
            v = c.ord()
            for b, k in zip(betas, e):
                if k:
                    v = v + b * k
            best = min(best, v)
        return best

    def is_affine(self) -> bool:
        return self.degree <= 1

    def split_by_degree_in(self, idx: Sequence[int]) -> dict[int, Polynomial]:
        """Group monomials by total degree in the variables idx."""
        out: dict[int, dict] = {}
        for e, c in self.terms.items():
            d = sum(e[i] for i in idx)
            out.setdefault(d, {})[e] = c
        return {d: Polynomial(self.K, self.n, t) for d, t in out.items()}

    def to_ast(self, names: Sequence[str]) -> Node:
        R = self.K.residue
        parts: list[Node] = []
        for e in sorted(self.terms, key=lambda e: (-sum(e), tuple(-k for k in e))):
            c = self.terms[e]
            for i, a in enumerate(c.coeffs):
                if not a:
                    continue
                k = c.v + i
                factors: list[Node] = []
                coords = tuple(R.to_coords(a))
                if R.f == 1:
                    if coords[0] != 1 or (k == 0 and not any(e)):
                        factors.append(Num(coords[0], FIELD))
                else:
                    if a != 1 or (k == 0 and not any(e)):
                        factors.append(ResLit(coords, FIELD))
                if k == 1:
                    factors.append(Uniformizer())
                elif k != 0:
                    factors.append(Pow(Uniformizer(), k, FIELD))
                for name, power in zip(names, e):
                    if power == 1:
                        factors.append(Var(name))
                    elif power > 1:
                        factors.append(Pow(Var(name), power, FIELD))
                node = factors[0]
                for f in factors[1:]:
                    node = BinOp("*", node, f, FIELD)
                parts.append(node)
        if not parts:
            return Num(0, FIELD)
        node = parts[0]
        for p in parts[1:]:
            node = BinOp("+", node, p, FIELD)
        return node

    def __repr__(self):
        return f"Polynomial({to_text(self.to_ast([f'x{i + 1}' for i in range(self.n)]))})"


def to_polynomial(node: Node, variables: Sequence[str], K: LocalField, params: Mapping[str, FieldElement] | None = None) -> Polynomial:
    """Convert a field-sort AST to a Polynomial in ``variables``."""
    params = params or {}
    n = len(variables)
    index = {v: i for i, v in enumerate(variables)}

    def conv(x: Node) -> Polynomial:
        if sort_of(x) not in (FIELD, None) and not isinstance(x, (Var, Uniformizer)):
            raise ExprError(f"non-polynomial subterm {to_text(x)!r}")
        if isinstance(x, Num):
            return Polynomial.const(K, n, K.from_int(x.value))
        if isinstance(x, ResLit):
            R = K.residue
            return Polynomial.const(K, n, K.const(R.from_coords(list(x.coords) + [0] * (R.f - len(x.coords)))))
        if isinstance(x, Uniformizer):
            return Polynomial.const(K, n, K.t(1))
        if isinstance(x, Var):
            if x.name in index:
                return Polynomial.var(K, n, index[x.name])
            if x.name in params:
                return Polynomial.const(K, n, params[x.name])
            raise ExprError(f"unknown variable {x.name!r} in polynomial")
        if isinstance(x, Neg):
            return -conv(x.arg)
        if isinstance(x, Pow):
            if isinstance(x.base, Uniformizer):
                return Polynomial.const(K, n, K.t(x.exp))
            return conv(x.base) ** x.exp
        if isinstance(x, BinOp) and x.op in "+-*":
            a, b = conv(x.left), conv(x.right)
            return a + b if x.op == "+" else a - b if x.op == "-" else a * b
        raise ExprError(f"non-polynomial subterm {to_text(x)!r}")

    if sort_of(node) not in (FIELD, None):
        raise ExprError("polynomial conversion needs a field-sort term")
    return conv(node)


def parse_polynomial(text: str, variables: Sequence[str], K: LocalField) -> Polynomial:
    return to_polynomial(parse(text, sort=FIELD), variables, K)


def grad(node: Node, variables: Sequence[str], K: LocalField) -> list[Node]:
    P = to_polynomial(node, variables, K)
    return [d.to_ast(variables) for d in P.gradient()]


def taylor_remainder_poly(P: Polynomial) -> list[list[Polynomial]]:
    """R(x, y) (upper triangular) with P(x+y) = P(x) + <grad P(x), y> + sum R_ij y_i y_j.

    Each monomial of degree >= 2 in y goes to the pair (i, j), i <= j, of the
    first two y-factors in lexicographic order.
    """
    n = P.n
    S = P.shifted()
    K = P.K
    R = [[Polynomial(K, 2 * n) for _ in range(n)] for _ in range(n)]
    for e, c in S.terms.items():
        ye = list(e[n:])
        if sum(ye) < 2:
            continue
        i = next(k for k in range(n) if ye[k] > 0)
        ye[i] -= 1
        j = next(k for k in range(n) if ye[k] > 0)
        ye[j] -= 1
        mono = tuple(e[:n]) + tuple(ye)
        R[i][j] = R[i][j] + Polynomial(K, 2 * n, {mono: c})
    return R


def taylor_remainder(node: Node, variables: Sequence[str], K: LocalField) -> list[list[Node]]:
    P = to_polynomial(node, variables, K)
    names = list(variables) + [f"{v}_y" for v in variables]
    return [[r.to_ast(names) for r in row] for row in taylor_remainder_poly(P)]


# ---------------------------------------------------------------------------
# Finite range enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Product of balls: variable names, center vector, common radius."""

    names: tuple[str, ...]
    center: Vector
    radius: int
    sphere: bool = False  # restrict to points with min ord(x_i - c_i) == radius


@dataclass
class ValueRange:
    values: set = field(default_factory=set)
    zero_locus: list = field(default_factory=list)  # assignments where a value is undetermined
    depth: int = 0
    count: int = 0

    @property
    def capped(self) -> bool:
        return bool(self.zero_locus)


Bounds = namedtuple("Bounds", ["min", "max", "zero_locus"])


def assignments(K: LocalField, boxes: Sequence[Box], depth: int):
    """Yield assignments of truncated points (precision = coset depth)."""
    per_box = []
    for b in boxes:
        d = max(depth, b.radius)
        reps = K.enumerate_coset_reps(b.center, b.radius, d)
        if b.sphere:
            reps = [r for r in reps if any((x - c).coeff(b.radius) for x, c in zip(r, b.center))]
        per_box.append([(b.names, tuple(x.with_prec(d) for x in r)) for r in reps])
    total = 1
    for lst in per_box:
        total *= len(lst)
    K.check_count(total)
    for combo in itertools.product(*per_box):
        env = {}
        for names, r in combo:
            for name, x in zip(names, r):
                env[name] = x
        yield env


def range_enumerate(
    node: Node,
    boxes: Sequence[Box],
    depth: int,
    K: LocalField,
    where: Node | None = None,
    params: Mapping[str, object] | None = None,
    stability_samples: int = 8,
) -> ValueRange:
    """All values of an int/residue term over a product of balls.

    Each coset of B_depth is represented by a truncated point of precision
    ``depth``; a value that is not determined by the coset is recorded in
    ``zero_locus`` instead (it comes from ord/ac of an uncertified zero).
    A sample of cosets is re-evaluated on their children at depth+1.
    """
    params = dict(params or {})
    out = ValueRange(depth=depth)
    determined: list[tuple[dict, object]] = []
    for env in assignments(K, boxes, depth):
        out.count += 1
        full = {**params, **env}
        try:
            if where is not None and not evaluate(where, full, K):
                continue
            val = evaluate(node, full, K)
        except PrecisionError:
            out.zero_locus.append(env)
            continue
        out.values.add(val)
        if len(determined) < stability_samples:
            determined.append((env, val))
    for env, val in determined:
        for child in _children_of(K, env, boxes, depth):
            full = {**params, **child}
            try:
                if where is not None and not evaluate(where, full, K):
                    raise StabilityError("domain filter changed between depths")
                v2 = evaluate(node, full, K)
            except PrecisionError as exc:
                raise StabilityError(f"value at depth {depth} lost at depth {depth + 1}") from exc
            if v2 != val:
                raise StabilityError(f"value {val} at depth {depth} became {v2} at depth {depth + 1}")
    return out


def _children_of(K: LocalField, env: dict, boxes: Sequence[Box], depth: int):
    """Children at depth+1 obtained by perturbing the first variable."""
    first = boxes[0].names[0]
    d = max(depth, boxes[0].radius)
    refined = {k: FieldElement(K, v.v, v.coeffs, v.prec + 1) for k, v in env.items()}
    base = refined[first]
    for a in range(K.q):
        child = dict(refined)
        child[first] = base + K.t(d, a).with_prec(d + 1)
        yield child


def valuation_bounds(
    node: Node, boxes: Sequence[Box], depth: int, K: LocalField, where: Node | None = None, params=None
) -> Bounds:
    rng = range_enumerate(node, boxes, depth, K, where, params)
    if not rng.values:
        return Bounds(None, None, rng.zero_locus)
    return Bounds(min(rng.values), max(rng.values), rng.zero_locus)


# ---------------------------------------------------------------------------
# Polynomial maps
# ---------------------------------------------------------------------------


class PolyMap:
    """A polynomial map K^n -> K^k with cached Taylor data and valuation floors."""

    def __init__(self, polys: Sequence[Polynomial], names: Sequence[str] | None = None, texts: Sequence[str] | None = None):
        if not polys:
            raise ExprError("a polynomial map needs at least one component")
        self.K = polys[0].K
        self.n_in = polys[0].n
        self.polys = list(polys)
        self.names = list(names) if names is not None else [f"x{i + 1}" for i in range(self.n_in)]
        self.texts = list(texts) if texts is not None else [to_text(p.to_ast(self.names)) for p in polys]
        self._shift = [p.shifted() for p in self.polys]
        h_idx = list(range(self.n_in, 2 * self.n_in))
        self._by_h = [s.split_by_degree_in(h_idx) for s in self._shift]
        self.jacobian = [p.gradient() for p in self.polys]

    @classmethod
    def parse(cls, texts: Sequence[str] | str, names: Sequence[str], K: LocalField) -> PolyMap:
        if isinstance(texts, str):
            texts = [texts]
        return cls([parse_polynomial(s, names, K) for s in texts], names, list(texts))

    @classmethod
    def identity(cls, K: LocalField, n: int) -> PolyMap:
        return cls([Polynomial.var(K, n, i) for i in range(n)])

    @property
    def n_out(self) -> int:
        return len(self.polys)

    def __call__(self, x: Sequence[FieldElement]) -> Vector:
        return tuple(p.evaluate(x) for p in self.polys)

    def is_affine(self) -> bool:
        return all(p.is_affine() for p in self.polys)

    def jacobian_at(self, x: Sequence[FieldElement]) -> list[list[FieldElement]]:
        return [[d.evaluate(x) for d in row] for row in self.jacobian]

    def value_floor(self, betas: Sequence[float]) -> list[float]:
        return [p.ord_floor(betas) for p in self.polys]

    def diff_floor(self, betas: Sequence[float], D: float) -> list[float]:
        """Per component: lower bound of ord(P(z+h) - P(z)), ord z >= betas, ord h >= D."""
        full = list(betas) + [D] * self.n_in
        return [min((poly.ord_floor(full) for d, poly in parts.items() if d >= 1), default=INF) for parts in self._by_h]

    def quad_floor(self, betas: Sequence[float], D: float) -> list[float]:
        """Per component: lower bound of the part of P(z+h) of degree >= 2 in h."""
        full = list(betas) + [D] * self.n_in
        return [min((poly.ord_floor(full) for d, poly in parts.items() if d >= 2), default=INF) for parts in self._by_h]

    def to_json(self) -> dict:
        return {"vars": self.names, "map": self.texts}
