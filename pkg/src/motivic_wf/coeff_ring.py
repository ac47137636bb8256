"""Coefficient ring for motivic values.

Elements are fractions N(L) / prod (L^i - 1) where N is a Laurent
polynomial in L with coefficients in the cyclotomic integers Z[zeta_p].
Specialising L -> q lands in Q(zeta_p), represented by ``CyclotomicRational``.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping


class CoefficientError(ValueError):
    """Raised on malformed ring input or unsupported operations."""


# ---------------------------------------------------------------------------
# Cyclotomic integers
# ---------------------------------------------------------------------------


class CyclotomicInteger:
    """Element of Z[zeta_p] in the basis 1, zeta, ..., zeta^(p-2)."""

    __slots__ = ("p", "coords", "_hash")

    def __init__(self, p: int, coords: Iterable[int]):
        coords = tuple(int(c) for c in coords)
        if len(coords) != p - 1:
            raise CoefficientError(f"expected {p - 1} coordinates, got {len(coords)}")
        self.p = p
        self.coords = coords
        self._hash = None

    @classmethod
    def zero(cls, p: int) -> CyclotomicInteger:
        return cls(p, (0,) * (p - 1))

    @classmethod
    def from_int(cls, p: int, n: int) -> CyclotomicInteger:
        return cls(p, (n,) + (0,) * (p - 2))

    @classmethod
    def zeta(cls, p: int, k: int = 1) -> CyclotomicInteger:
        counts = [0] * p
        counts[k % p] = 1
        return cls.from_counts(p, counts)

    @classmethod
    def from_counts(cls, p: int, counts) -> CyclotomicInteger:
        """Sum of counts[j] * zeta^j over j in 0..p-1."""
        top = counts[p - 1]
        if top:
            return cls(p, (counts[j] - top for j in range(p - 1)))
        return cls(p, counts[: p - 1])

    def is_zero(self) -> bool:
        return not any(self.coords)

    def as_int(self) -> int | None:
        if any(self.coords[1:]):
            return None
        return self.coords[0]

    def content(self) -> int:
        return math.gcd(*self.coords) if self.coords else 0

    def _check(self, other: CyclotomicInteger) -> None:
        if other.p != self.p:
            raise CoefficientError(f"mixing p={self.p} and p={other.p}")

    def __add__(self, other):
        if isinstance(other, int):
            other = CyclotomicInteger.from_int(self.p, other)
        self._check(other)
        return CyclotomicInteger(self.p, (a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicInteger(self.p, (-a for a in self.coords))

    def __sub__(self, other):
        if isinstance(other, int):
            other = CyclotomicInteger.from_int(self.p, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return CyclotomicInteger(self.p, (a * other for a in self.coords))
        self._check(other)
        p = self.p
        full = [0] * p
        for i, a in enumerate(self.coords):
            if not a:
                continue
            for j, b in enumerate(other.coords):
                if b:
                    full[(i + j) % p] += a * b
        return CyclotomicInteger.from_counts(p, full)

    __rmul__ = __mul__

    def exact_div_int(self, n: int) -> CyclotomicInteger:
        if any(c % n for c in self.coords):
            raise CoefficientError(f"{self} not divisible by {n}")
        return CyclotomicInteger(self.p, (c // n for c in self.coords))

    def __eq__(self, other):
        if isinstance(other, int):
            return self.as_int() == other
        if not isinstance(other, CyclotomicInteger):
            return NotImplemented
        return self.p == other.p and self.coords == other.coords

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.p, self.coords))
        return self._hash

    def __repr__(self):
        return f"CyclotomicInteger({self.p}, {self.coords})"

    def __str__(self):
        parts = []
        for j, c in enumerate(self.coords):
            if not c:
                continue
            if j == 0:
                body = str(abs(c))
            elif abs(c) == 1:
                body = f"z^{j}"
            else:
                body = f"{abs(c)}*z^{j}"
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# Elements of Q(zeta_p)
# ---------------------------------------------------------------------------


class CyclotomicRational:
    """num / den with num in Z[zeta_p], den a positive integer, reduced."""

    __slots__ = ("num", "den")

    def __init__(self, num: CyclotomicInteger, den: int = 1):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            num, den = -num, -den
        g = math.gcd(num.content(), den)
        if g > 1:
            num = num.exact_div_int(g)
            den //= g
        if num.is_zero():
            den = 1
        self.num = num
        self.den = den

    @property
    def p(self) -> int:
        return self.num.p

    @classmethod
    def from_int(cls, p: int, n: int) -> CyclotomicRational:
        return cls(CyclotomicInteger.from_int(p, n))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other: CyclotomicRational) -> CyclotomicRational:
        return CyclotomicRational(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self):
        return CyclotomicRational(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return CyclotomicRational(self.num * other, self.den)
        return CyclotomicRational(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, CyclotomicRational):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"CyclotomicRational({self.num!s}, {self.den})"

    def __str__(self):
        s = str(self.num)
        if self.den == 1:
            return s
        if any(self.num.coords[1:]) or " " in s:
            s = f"({s})"
        return f"{s}/{self.den}"

    def to_json(self) -> dict:
        return {"num": list(self.num.coords), "den": self.den}


# ---------------------------------------------------------------------------
# Motivic scalars
# ---------------------------------------------------------------------------

Numerator = dict  # exponent of L -> nonzero CyclotomicInteger


def _num_add(a: Mapping[int, CyclotomicInteger], b: Mapping[int, CyclotomicInteger], sign: int = 1) -> Numerator:
    out = dict(a)
    for k, c in b.items():
        cur = out.get(k)
        s = c if sign > 0 else -c
        val = s if cur is None else cur + s
        if val.is_zero():
            out.pop(k, None)
        else:
            out[k] = val
    return out


def _num_mul(a: Mapping[int, CyclotomicInteger], b: Mapping[int, CyclotomicInteger]) -> Numerator:
    out: Numerator = {}
    for i, x in a.items():
        for j, y in b.items():
            k = i + j
            prod = x * y
            cur = out.get(k)
            out[k] = prod if cur is None else cur + prod
    return {k: v for k, v in out.items() if not v.is_zero()}


def _num_shift(a: Mapping[int, CyclotomicInteger], s: int) -> Numerator:
    return {k + s: v for k, v in a.items()}


def _num_times_factor(a: Numerator, i: int) -> Numerator:
    """a * (L^i - 1)."""
    return _num_add(_num_shift(a, i), a, -1)


def _num_div_factor(a: Numerator, i: int) -> Numerator | None:
    """Exact a / (L^i - 1), or None when it does not divide."""
    if not a:
        return {}
    lo = min(a)
    hi = max(a)
    rem = {k - lo: v for k, v in a.items()}
    quot: Numerator = {}
    for k in range(hi - lo, i - 1, -1):
        c = rem.pop(k, None)
        if c is None or c.is_zero():
            continue
        quot[k - i] = c
        cur = rem.get(k - i)
        rem[k - i] = c if cur is None else cur + c
    if any(not v.is_zero() for v in rem.values()):
        return None
    return {k + lo: v for k, v in quot.items() if not v.is_zero()}


class MotivicScalar:
    """Element of Z[L, L^-1, 1/(L^i - 1)] tensor Z[zeta_p].

    Stored as a Laurent numerator and a sorted tuple of factor degrees i,
    one entry per factor (L^i - 1) in the denominator.
    """

    __slots__ = ("p", "num", "den")

    def __init__(self, p: int, num: Mapping[int, CyclotomicInteger] | None = None, den: Iterable[int] = ()):
        self.p = p
        num = {k: v for k, v in (num or {}).items() if not v.is_zero()}
        den = sorted(int(i) for i in den)
        if any(i <= 0 for i in den):
            raise CoefficientError("denominator factors must be L^i - 1 with i >= 1")
        if not num:
            den = []
        else:
            num, den = self._strip(num, den)
        self.num = num
        self.den = tuple(den)

    @staticmethod
    def _strip(num: Numerator, den: list[int]) -> tuple[Numerator, list[int]]:
        kept: list[int] = []
        for i in den:
            q = _num_div_factor(num, i)
            if q is None:
                kept.append(i)
            else:
                num = q
        return num, kept

    # constructors -----------------------------------------------------------

    @classmethod
    def zero(cls, p: int) -> MotivicScalar:
        return cls(p)

    @classmethod
    def from_int(cls, p: int, n: int) -> MotivicScalar:
        return cls(p, {0: CyclotomicInteger.from_int(p, n)})

    @classmethod
    def one(cls, p: int) -> MotivicScalar:
        return cls.from_int(p, 1)

    @classmethod
    def L_power(cls, p: int, k: int, coeff: int | CyclotomicInteger = 1) -> MotivicScalar:
        if isinstance(coeff, int):
            coeff = CyclotomicInteger.from_int(p, coeff)
        return cls(p, {k: coeff})

    @classmethod
    def zeta(cls, p: int, k: int = 1) -> MotivicScalar:
        return cls(p, {0: CyclotomicInteger.zeta(p, k)})

    @classmethod
    def from_cyclotomic(cls, c: CyclotomicInteger, k: int = 0) -> MotivicScalar:
        return cls(c.p, {k: c})

    @classmethod
    def geometric(cls, p: int, i: int = 1) -> MotivicScalar:
        """1 / (1 - L^-i) = L^i / (L^i - 1)."""
        return cls(p, {i: CyclotomicInteger.from_int(p, 1)}, (i,))

    # predicates -------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def as_cyclotomic(self) -> CyclotomicInteger | None:
        """The value when the scalar has no L dependence, else None."""
        if not self.num:
            return CyclotomicInteger.zero(self.p)
        if self.den or set(self.num) != {0}:
            return None
        return self.num[0]

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> MotivicScalar:
        if isinstance(other, MotivicScalar):
            if other.p != self.p:
                raise CoefficientError(f"mixing p={self.p} and p={other.p}")
            return other
        if isinstance(other, int):
            return MotivicScalar.from_int(self.p, other)
        if isinstance(other, CyclotomicInteger):
            return MotivicScalar.from_cyclotomic(other)
        raise TypeError(f"cannot combine MotivicScalar with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return MotivicScalar(self.p, _num_add(self.num, other.num), self.den)
        ca, cb = Counter(self.den), Counter(other.den)
        common = ca | cb
        na, nb = self.num, other.num
        for i, k in (common - ca).items():
            for _ in range(k):
                na = _num_times_factor(na, i)
        for i, k in (common - cb).items():
            for _ in range(k):
                nb = _num_times_factor(nb, i)
        return MotivicScalar(self.p, _num_add(na, nb), common.elements())

    __radd__ = __add__

    def __neg__(self):
        return MotivicScalar(self.p, {k: -v for k, v in self.num.items()}, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if not self.num or not other.num:
            return MotivicScalar.zero(self.p)
        return MotivicScalar(self.p, _num_mul(self.num, other.num), self.den + other.den)

    __rmul__ = __mul__

    def times_L(self, k: int) -> MotivicScalar:
        """Multiply by L^k without touching the denominator."""
        if not k or not self.num:
            return self
        out = MotivicScalar.__new__(MotivicScalar)
        out.p, out.num, out.den = self.p, _num_shift(self.num, k), self.den
        return out

    def times_zeta(self, k: int) -> MotivicScalar:
        if not self.num or k % self.p == 0:
            return self
        z = CyclotomicInteger.zeta(self.p, k)
        out = MotivicScalar.__new__(MotivicScalar)
        out.p, out.num, out.den = self.p, {e: c * z for e, c in self.num.items()}, self.den
        return out

    def __pow__(self, n: int):
        if n < 0:
            if self.den or len(self.num) != 1:
                raise CoefficientError("negative powers only for monomials c*L^k")
            (k, c), = self.num.items()
            if c == 1:
                return MotivicScalar.L_power(self.p, -k * (-n))
            if c == -1:
                return MotivicScalar.L_power(self.p, k * n, (-1) ** n)
            raise CoefficientError("negative powers only for unit monomials")
        out = MotivicScalar.one(self.p)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            other = MotivicScalar.from_int(self.p, other)
        if not isinstance(other, MotivicScalar):
            return NotImplemented
        if self.p != other.p:
            return False
        if self.den == other.den:
            return self.num == other.num
        na, nb = self.num, other.num
        for i in other.den:
            na = _num_times_factor(na, i)
        for i in self.den:
            nb = _num_times_factor(nb, i)
        return na == nb

    __hash__ = None  # equality is not syntactic

    # specialisation ---------------------------------------------------------

    def eval_at_q(self, q: int) -> CyclotomicRational:
        """Specialise L -> q (exact, in Q(zeta_p))."""
        p = self.p
        if not self.num:
            return CyclotomicRational(CyclotomicInteger.zero(p))
        lo = min(self.num)
        shift = -lo if lo < 0 else 0
        acc = [0] * (p - 1)
        for k, c in self.num.items():
            w = q ** (k + shift)
            for j, x in enumerate(c.coords):
                if x:
                    acc[j] += x * w
        den = q**shift
        for i in self.den:
            den *= q**i - 1
        return CyclotomicRational(CyclotomicInteger(p, acc), den)

    # text -------------------------------------------------------------------

    def __repr__(self):
        return f"MotivicScalar({self})"

    def __str__(self):
        if not self.num:
            return "0"
        terms = []
        for k in sorted(self.num, reverse=True):
            c = self.num[k]
            n = c.as_int()
            if n is not None:
                neg = n < 0
                mag = abs(n)
                if k == 0:
                    body = str(mag)
                elif mag == 1:
                    body = f"L^{k}"
                else:
                    body = f"{mag}*L^{k}"
            else:
                neg = False
                body = f"({c})" if k == 0 and len(self.num) > 1 or k != 0 else str(c)
                if k != 0:
                    body = f"{body}*L^{k}"
            terms.append((neg, body))
        out = ("-" if terms[0][0] else "") + terms[0][1]
        for neg, body in terms[1:]:
            out += (" - " if neg else " + ") + body
        if self.den:
            if len(terms) > 1 or (len(self.num) == 1 and out.startswith("-")):
                out = f"({out})"
            out += " / " + "*".join(f"(L^{i}-1)" for i in self.den)
        return out

    @classmethod
    def parse(cls, text: str, p: int) -> MotivicScalar:
        return _ScalarParser(text, p).parse()

    def to_json(self, q: int | None = None) -> dict:
        out: dict = {"symbolic": str(self)}
        if q is not None:
            out["value_at_q"] = str(self.eval_at_q(q))
        return out


# ---------------------------------------------------------------------------
# Parser for scalar text
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([zL])|(\S))")


class _ScalarParser:
    def __init__(self, text: str, p: int):
        self.text = text
        self.p = p
        self.toks: list[tuple[str, str]] = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                break
            if m.group(1):
                self.toks.append(("num", m.group(1)))
            elif m.group(2):
                self.toks.append(("sym", m.group(2)))
            else:
                ch = m.group(3)
                if ch not in "+-*^()/":
                    raise CoefficientError(f"unexpected character {ch!r} in {self.text!r}")
                self.toks.append(("op", ch))
            pos = m.end()
        self.i = 0

    def peek(self) -> tuple[str, str] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, op: str | None = None) -> tuple[str, str]:
        tok = self.peek()
        if tok is None or (op is not None and tok != ("op", op)):
            raise CoefficientError(f"malformed scalar {self.text!r}")
        self.i += 1
        return tok

    def parse(self) -> MotivicScalar:
        if not self.toks:
            raise CoefficientError("empty scalar")
        num = self.expr()
        if self.peek() == ("op", "/"):
            self.take("/")
            den = self.expr()
            num = num * _invert_denominator(den)
        if self.peek() is not None:
            raise CoefficientError(f"trailing input in {self.text!r}")
        return num

    def expr(self) -> MotivicScalar:
        val = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self) -> MotivicScalar:
        val = self.unary()
        while self.peek() == ("op", "*"):
            self.take("*")
            val = val * self.unary()
        return val

    def unary(self) -> MotivicScalar:
        if self.peek() == ("op", "-"):
            self.take("-")
            return -self.unary()
        return self.power()

    def power(self) -> MotivicScalar:
        kind, tok = self.take()
        if kind == "num":
            base = MotivicScalar.from_int(self.p, int(tok))
        elif tok == "z":
            base = MotivicScalar.zeta(self.p, 1)
        elif tok == "L":
            base = MotivicScalar.L_power(self.p, 1)
        elif tok == "(":
            base = self.expr()
            self.take(")")
        else:
            raise CoefficientError(f"unexpected {tok!r} in {self.text!r}")
        if self.peek() == ("op", "^"):
            self.take("^")
            sign = 1
            if self.peek() == ("op", "-"):
                self.take("-")
                sign = -1
            kind, e = self.take()
            if kind != "num":
                raise CoefficientError(f"bad exponent in {self.text!r}")
            n = sign * int(e)
            if tok == "z":
                return MotivicScalar.zeta(self.p, n)
            return base**n
        return base


def _invert_denominator(den: MotivicScalar) -> MotivicScalar:
    """1/den for den = unit * L^a * prod (L^i - 1)."""
    if den.den or not den.num:
        raise CoefficientError("denominator must be a nonzero Laurent polynomial")
    p = den.p
    lo = min(den.num)
    poly = _num_shift(den.num, -lo)
    factors = _factor_cyclotomic(poly, [])
    if factors is None:
        raise CoefficientError(f"denominator {den} is not a product of L^i - 1 factors")
    unit, fs = factors
    return MotivicScalar(p, {-lo: unit}, fs)


def _factor_cyclotomic(poly: Numerator, acc: list[int]):
    hi = max(poly)
    if hi == 0:
        c = poly[0]
        p = c.p
        for k in range(p):
            for s in (1, -1):
                if c == CyclotomicInteger.zeta(p, k) * s:
                    return CyclotomicInteger.zeta(p, -k) * s, acc
        return None
    for i in range(hi, 0, -1):
        q = _num_div_factor(poly, i)
        if q is not None and q and min(q) == 0:
            found = _factor_cyclotomic(q, acc + [i])
            if found is not None:
                return found
    return None


# ---------------------------------------------------------------------------
# Character sums over residue lines
# ---------------------------------------------------------------------------


def char_sum_over_residue_line(r: int, residue_field) -> MotivicScalar:
    """Sum over a in F_q of zeta^{tr(r*a)}, computed by direct summation."""
    p = residue_field.p
    counts = [0] * p
    for a in range(residue_field.q):
        counts[residue_field.trace(residue_field.mul(r, a))] += 1
    return MotivicScalar.from_cyclotomic(CyclotomicInteger.from_counts(p, counts))
