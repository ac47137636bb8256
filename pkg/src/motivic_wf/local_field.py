"""Truncated Laurent series over a finite field.

``ResidueField`` is F_q = F_p[x]/(modulus) with elements encoded as integers
0..q-1 (base-p digits are the polynomial coefficients, lowest first).
``FieldElement`` is a Laurent series over F_q known exactly for exponents
below ``prec`` (``math.inf`` for finite, exact series).
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .coeff_ring import CyclotomicInteger, MotivicScalar

INF = math.inf


class PrecisionError(ArithmeticError):
    """A coefficient outside the known precision window was needed."""


class BudgetError(RuntimeError):
    """An enumeration would exceed the configured budget."""


class FieldInputError(ValueError):
    """Malformed field configuration or element text."""


DEFAULT_MODULI: dict[int, tuple[int, int, tuple[int, ...]]] = {
    2: (2, 1, (0, 1)),
    3: (3, 1, (0, 1)),
    5: (5, 1, (0, 1)),
    7: (7, 1, (0, 1)),
    4: (2, 2, (1, 1, 1)),
    8: (2, 3, (1, 1, 0, 1)),
    9: (3, 2, (1, 0, 1)),
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def _polymod(a: list[int], mod: Sequence[int], p: int) -> list[int]:
    a = [x % p for x in a]
    deg = len(mod) - 1
    inv_lead = pow(mod[-1], -1, p)
    for k in range(len(a) - 1, deg - 1, -1):
        c = a[k] * inv_lead % p
        if c:
            for j in range(deg + 1):
                a[k - deg + j] = (a[k - deg + j] - c * mod[j]) % p
    return a[:deg] + [0] * (deg - len(a[:deg]))


def is_irreducible(mod: Sequence[int], p: int) -> bool:
    """Brute-force irreducibility test for a monic polynomial over F_p."""
    deg = len(mod) - 1
    if deg < 1 or mod[-1] % p != 1:
        return False
    for d in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            div = list(low) + [1]
            if not any(_polymod(list(mod), div, p)):
                return False
    return True


class ResidueField:
    """F_q with precomputed operation tables."""

    def __init__(self, p: int, f: int = 1, modulus: Sequence[int] | None = None):
        if not is_prime(p):
            raise FieldInputError(f"p={p} is not prime")
        if f < 1:
            raise FieldInputError("f must be positive")
        if modulus is None:
            entry = DEFAULT_MODULI.get(p**f)
            if entry is None or entry[:2] != (p, f):
                raise FieldInputError(f"no default modulus for q={p}^{f}; supply one")
            modulus = entry[2]
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != f + 1 or not is_irreducible(modulus, p):
            raise FieldInputError(f"modulus {list(modulus)} is not monic irreducible of degree {f} over F_{p}")
        self.p, self.f, self.modulus = p, f, modulus
        self.q = q = p**f
        digits = [self.to_coords(a) for a in range(q)]
        self._add = [[self.from_coords([(x + y) % p for x, y in zip(digits[a], digits[b])]) for b in range(q)] for a in range(q)]
        self._neg = [self.from_coords([(-x) % p for x in digits[a]]) for a in range(q)]
        self._mul = [[0] * q for _ in range(q)]
        for a in range(q):
            for b in range(q):
                prod = [0] * (2 * f - 1)
                for i, x in enumerate(digits[a]):
                    for j, y in enumerate(digits[b]):
                        prod[i + j] += x * y
                self._mul[a][b] = self.from_coords(_polymod(prod, modulus, p) if f > 1 else [prod[0] % p])
        self._inv = [0] * q
        for a in range(1, q):
            self._inv[a] = next(b for b in range(1, q) if self._mul[a][b] == 1)
        self._trace = []
        for a in range(q):
            s, pw = 0, a
            for _ in range(f):
                s = self._add[s][pw]
                x = pw
                for _ in range(p - 1):
                    x = self._mul[x][pw]
                pw = x
            if s >= p:
                raise AssertionError("trace escaped the prime field")
            self._trace.append(s)

    def to_coords(self, a: int) -> list[int]:
        out = []
        for _ in range(self.f):
            a, r = divmod(a, self.p)
            out.append(r)
        return out

    def from_coords(self, coords: Iterable[int]) -> int:
        out = 0
        for c in reversed(list(coords)):
            out = out * self.p + (c % self.p)
        return out

    def add(self, a: int, b: int) -> int:
        return self._add[a][b]

    def neg(self, a: int) -> int:
        return self._neg[a]

    def sub(self, a: int, b: int) -> int:
        return self._add[a][self._neg[b]]

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in residue field")
        return self._inv[a]

    def trace(self, a: int) -> int:
        return self._trace[a]

    def from_int(self, n: int) -> int:
        return n % self.p

    def format(self, a: int) -> str:
        return "[" + ",".join(str(c) for c in self.to_coords(a)) + "]"

    def parse(self, text: str) -> int:
        body = text.strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise FieldInputError(f"residue element must be bracketed: {text!r}")
        parts = [s for s in body[1:-1].split(",") if s.strip()]
        if not parts or len(parts) > self.f:
            raise FieldInputError(f"residue element needs 1..{self.f} coordinates: {text!r}")
        try:
            coords = [int(s) for s in parts]
        except ValueError as exc:
            raise FieldInputError(f"bad residue element {text!r}") from exc
        return self.from_coords(coords + [0] * (self.f - len(coords)))

    def __eq__(self, other):
        return isinstance(other, ResidueField) and (self.p, self.f, self.modulus) == (other.p, other.f, other.modulus)

    def __hash__(self):
        return hash((self.p, self.f, self.modulus))

    def __repr__(self):
        return f"ResidueField(p={self.p}, f={self.f}, modulus={list(self.modulus)})"


class FieldElement:
    """Element of F_q((t)) known below exponent ``prec``.

    ``coeffs[i]`` is the coefficient of t^(v+i); leading and trailing zeros
    are stripped, so ``v`` is the order of a nonzero element.
    """

    __slots__ = ("K", "v", "coeffs", "prec", "_hash")

    def __init__(self, K: LocalField, v: int, coeffs: Sequence[int], prec: float = INF):
        coeffs = list(coeffs)
        if prec != INF:
            keep = max(0, min(len(coeffs), int(prec) - v))
            coeffs = coeffs[:keep]
        lo = 0
        while lo < len(coeffs) and coeffs[lo] == 0:
            lo += 1
        hi = len(coeffs)
        while hi > lo and coeffs[hi - 1] == 0:
            hi -= 1
        self.K = K
        self.v = v + lo if hi > lo else 0
        self.coeffs = tuple(coeffs[lo:hi])
        self.prec = prec
        self._hash = None

    @classmethod
    def _raw(cls, K, v, coeffs, prec):
        obj = cls.__new__(cls)
        obj.K, obj.v, obj.coeffs, obj.prec, obj._hash = K, v, coeffs, prec, None
        return obj

    # basic queries ----------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.prec == INF

    def is_zero(self) -> bool:
        """True when the known part vanishes (the exact zero if prec is infinite)."""
        return not self.coeffs

    @property
    def low(self) -> float:
        """Smallest exponent that may carry a nonzero coefficient."""
        return self.v if self.coeffs else self.prec

    def ord(self) -> float:
        if self.coeffs:
            return self.v
        if self.prec == INF:
            return INF
        raise PrecisionError(f"ord of a series known to vanish only below t^{self.prec}")

    def ac(self) -> int:
        if self.coeffs:
            return self.coeffs[0]
        if self.prec == INF:
            return 0
        raise PrecisionError("ac of an uncertified zero")

    def coeff(self, k: int) -> int:
        if k >= self.prec:
            raise PrecisionError(f"coefficient of t^{k} beyond precision {self.prec}")
        i = k - self.v
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return 0

    @property
    def top(self) -> int:
        """One past the highest nonzero exponent (v for zero)."""
        return self.v + len(self.coeffs)

    # arithmetic -------------------------------------------------------------

    def _check(self, other: FieldElement) -> None:
        if other.K is not self.K and other.K != self.K:
            raise FieldInputError("mixing elements of different fields")

    def __add__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        prec = min(self.prec, other.prec)
        if not other.coeffs:
            return self if prec == self.prec else FieldElement(self.K, self.v, self.coeffs, prec)
        if not self.coeffs:
            return other if prec == other.prec else FieldElement(self.K, other.v, other.coeffs, prec)
        add = self.K.residue._add
        lo = min(self.v, other.v)
        hi = max(self.top, other.top)
        out = [0] * (hi - lo)
        for i, c in enumerate(self.coeffs):
            out[self.v - lo + i] = c
        base = other.v - lo
        for i, c in enumerate(other.coeffs):
            out[base + i] = add[out[base + i]][c]
        return FieldElement(self.K, lo, out, prec)

    def __neg__(self) -> FieldElement:
        neg = self.K.residue._neg
        return FieldElement._raw(self.K, self.v, tuple(neg[c] for c in self.coeffs), self.prec)

    def __sub__(self, other: FieldElement) -> FieldElement:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(self.K.residue.from_int(other))
        self._check(other)
        prec = min(self.low + other.prec, other.low + self.prec)
        if not self.coeffs or not other.coeffs:
            return FieldElement._raw(self.K, 0, (), prec)
        R = self.K.residue
        add, mul = R._add, R._mul
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                row = mul[a]
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[i + j] = add[out[i + j]][row[b]]
        return FieldElement(self.K, self.v + other.v, out, prec)

    __rmul__ = __mul__

    def scale(self, a: int) -> FieldElement:
        """Multiply by a residue constant."""
        if a == 0:
            return FieldElement._raw(self.K, 0, (), self.prec)
        row = self.K.residue._mul[a]
        return FieldElement._raw(self.K, self.v, tuple(row[c] for c in self.coeffs), self.prec)

    def shift(self, k: int) -> FieldElement:
        """Multiply by t^k."""
        if not self.coeffs:
            return FieldElement._raw(self.K, 0, (), self.prec + k)
        return FieldElement._raw(self.K, self.v + k, self.coeffs, self.prec + k)

    def __pow__(self, n: int) -> FieldElement:
        if n < 0:
            if len(self.coeffs) == 1 and self.is_exact:
                inv = self.K.residue.inv(self.coeffs[0])
                return FieldElement._raw(self.K, n * self.v, (pow_residue(self.K.residue, inv, -n),), INF)
            raise FieldInputError("negative powers only for exact monomials")
        out = self.K.one()
        for _ in range(n):
            out = out * self
        return out

    def truncate(self, N: int) -> FieldElement:
        """Exact element x mod t^N (the part with exponents < N)."""
        if N > self.prec:
            raise PrecisionError(f"truncation at t^{N} beyond precision {self.prec}")
        if self.top <= N and self.prec == INF:
            return self
        keep = N - self.v
        if keep <= 0:
            return FieldElement._raw(self.K, 0, (), INF)
        return FieldElement(self.K, self.v, self.coeffs[:keep], INF)

    def tail(self, N: int) -> FieldElement:
        """The part with exponents >= N."""
        drop = N - self.v
        if drop <= 0:
            return self
        return FieldElement(self.K, N, self.coeffs[drop:], self.prec)

    def with_prec(self, prec: float) -> FieldElement:
        return FieldElement(self.K, self.v, self.coeffs, min(prec, self.prec))

    def character_exponent(self) -> int:
        """tr(a_0(x)) in F_p: Psi(x) = zeta_p^exponent."""
        return self.K.residue._trace[self.coeff(0)]

    # comparison / text ------------------------------------------------------

    def key(self) -> tuple:
        return (self.v, self.coeffs, self.prec)

    def sort_key(self) -> tuple:
        return tuple((self.v + i, c) for i, c in enumerate(self.coeffs) if c)

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.v == other.v and self.coeffs == other.coeffs and self.prec == other.prec

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.v, self.coeffs, self.prec))
        return self._hash

    def __repr__(self):
        return f"FieldElement({self})"

    def __str__(self):
        fmt = self.K.residue.format
        parts = [f"t^{self.v + i}*{fmt(c)}" for i, c in enumerate(self.coeffs) if c]
        if self.prec != INF:
            parts.append(f"O(t^{int(self.prec)})")
        return " + ".join(parts) if parts else "0"


def pow_residue(R: ResidueField, a: int, n: int) -> int:
    out = 1
    for _ in range(n):
        out = R.mul(out, a)
    return out


Vector = tuple  # tuple of FieldElement


@dataclass(frozen=True)
class Window:
    v_min: int = -40
    v_max: int = 60


class LocalField:
    """K = F_q((t)) with a precision window and an enumeration budget."""

    def __init__(self, residue: ResidueField, window: Window | tuple[int, int] = Window(), budget: int = 500_000):
        if not isinstance(window, Window):
            window = Window(*window)
        if window.v_min >= window.v_max:
            raise FieldInputError("precision window must satisfy v_min < v_max")
        if budget <= 0:
            raise FieldInputError("budget must be positive")
        self.residue = residue
        self.window = window
        self.budget = budget
        self._zero = FieldElement._raw(self, 0, (), INF)
        self._one = FieldElement._raw(self, 0, (1,), INF)

    @classmethod
    def make(cls, q: int, **kw) -> LocalField:
        entry = DEFAULT_MODULI.get(q)
        if entry is None:
            raise FieldInputError(f"no default residue field for q={q}")
        p, f, mod = entry
        return cls(ResidueField(p, f, mod), **kw)

    @property
    def p(self) -> int:
        return self.residue.p

    @property
    def q(self) -> int:
        return self.residue.q

    def __eq__(self, other):
        return isinstance(other, LocalField) and self.residue == other.residue

    def __hash__(self):
        return hash(self.residue)

    def __repr__(self):
        return f"LocalField(q={self.q}, modulus={list(self.residue.modulus)})"

    # constructors -----------------------------------------------------------

    def zero(self) -> FieldElement:
        return self._zero

    def one(self) -> FieldElement:
        return self._one

    def const(self, a: int) -> FieldElement:
        return FieldElement._raw(self, 0, (a,), INF) if a else self._zero

    def from_int(self, n: int) -> FieldElement:
        return self.const(self.residue.from_int(n))

    def t(self, k: int = 1, a: int = 1) -> FieldElement:
        return FieldElement._raw(self, k, (a,), INF) if a else self._zero

    def element(self, terms: dict[int, int], prec: float = INF) -> FieldElement:
        """Build sum of terms[k] * t^k."""
        terms = {k: c for k, c in terms.items() if c}
        if not terms:
            return FieldElement(self, 0, (), prec)
        lo, hi = min(terms), max(terms)
        return FieldElement(self, lo, [terms.get(k, 0) for k in range(lo, hi + 1)], prec)

    def zeros(self, m: int) -> Vector:
        return (self._zero,) * m

    # text -------------------------------------------------------------------

    _TERM = re.compile(r"^t\^(-?\d+)\*(\[[^\]]*\])$")

    def parse(self, text: str) -> FieldElement:
        """Parse "t^-1*[2] + t^0*[1]" (also "0" and a trailing "O(t^N)")."""
        body = text.strip()
        if body == "0":
            return self._zero
        terms: dict[int, int] = {}
        prec: float = INF
        for raw in body.split("+"):
            piece = raw.strip().replace(" ", "")
            if piece.startswith("O(t^") and piece.endswith(")"):
                try:
                    prec = int(piece[4:-1])
                except ValueError as exc:
                    raise FieldInputError(f"bad precision marker in {text!r}") from exc
                continue
            m = self._TERM.match(piece)
            if not m:
                raise FieldInputError(f"bad field term {piece!r} in {text!r}")
            k = int(m.group(1))
            if not (self.window.v_min <= k < self.window.v_max):
                raise PrecisionError(f"exponent {k} outside the precision window {self.window}")
            a = self.residue.parse(m.group(2))
            terms[k] = self.residue.add(terms.get(k, 0), a)
        return self.element(terms, prec)

    def parse_vector(self, value) -> Vector:
        if isinstance(value, str):
            return (self.parse(value),)
        return tuple(self.parse(s) for s in value)

    # enumeration ------------------------------------------------------------

    def check_count(self, count: int) -> None:
        if count > self.budget:
            raise BudgetError(f"enumeration of {count} items exceeds budget {self.budget}")

    def enumerate_coset_reps(self, c: Sequence[FieldElement], alpha: int, D: int) -> list[Vector]:
        """Representatives of B(c, alpha) modulo t^D, lexicographic in coefficients."""
        if D < alpha:
            raise FieldInputError(f"need D >= alpha, got D={D}, alpha={alpha}")
        if alpha < self.window.v_min or D > self.window.v_max:
            raise PrecisionError(f"exponents [{alpha},{D}) outside the precision window")
        m = len(c)
        span = D - alpha
        self.check_count(self.q ** (m * span))
        base = [ci.truncate(alpha) for ci in c]
        if span == 0:
            return [tuple(base)]
        digits_per = list(itertools.product(range(self.q), repeat=span))
        per_coord = []
        for b in base:
            lo = min(b.v, alpha) if b.coeffs else alpha
            prefix = [0] * (alpha - lo)
            for i, x in enumerate(b.coeffs):
                prefix[b.v - lo + i] = x
            per_coord.append([FieldElement(self, lo, prefix + list(d)) for d in digits_per])
        return [tuple(v) for v in itertools.product(*per_coord)]

    def iter_coset_reps(self, c: Sequence[FieldElement], alpha: int, D: int) -> Iterator[Vector]:
        """Lazy version of enumerate_coset_reps; the budget applies to items consumed."""
        if D < alpha:
            raise FieldInputError(f"need D >= alpha, got D={D}, alpha={alpha}")
        if alpha < self.window.v_min or D > self.window.v_max:
            raise PrecisionError(f"exponents [{alpha},{D}) outside the precision window")
        span = D - alpha
        base = [ci.truncate(alpha) for ci in c]
        prefixes = []
        for b in base:
            lo = min(b.v, alpha) if b.coeffs else alpha
            prefix = [0] * (alpha - lo)
            for i, x in enumerate(b.coeffs):
                prefix[b.v - lo + i] = x
            prefixes.append((lo, prefix))
        count = 0
        for digits in itertools.product(range(self.q), repeat=span * len(base)):
            count += 1
            if count > self.budget:
                raise BudgetError(f"enumeration exceeded budget {self.budget}")
            yield tuple(
                FieldElement(self, lo, prefix + list(digits[i * span : (i + 1) * span])) for i, (lo, prefix) in enumerate(prefixes)
            )

    def count_coset_reps(self, m: int, alpha: int, D: int) -> int:
        return self.q ** (m * (D - alpha))


def inner_product(x: Sequence[FieldElement], y: Sequence[FieldElement]) -> FieldElement:
    if len(x) != len(y):
        raise FieldInputError("inner product of vectors of different length")
    acc = None
    for a, b in zip(x, y):
        term = a * b
        acc = term if acc is None else acc + term
    if acc is None:
        raise FieldInputError("inner product of empty vectors")
    return acc


def psi_exponent(x: Sequence[FieldElement], y: Sequence[FieldElement]) -> int:
    """Exponent e with Psi(<x,y>) = zeta_p^e."""
    return inner_product(x, y).character_exponent()


def psi(x: FieldElement) -> CyclotomicInteger:
    return CyclotomicInteger.zeta(x.K.p, x.character_exponent())


def vec_add(x: Sequence[FieldElement], y: Sequence[FieldElement]) -> Vector:
    return tuple(a + b for a, b in zip(x, y))


def vec_sub(x: Sequence[FieldElement], y: Sequence[FieldElement]) -> Vector:
    return tuple(a - b for a, b in zip(x, y))


def vec_neg(x: Sequence[FieldElement]) -> Vector:
    return tuple(-a for a in x)


def vec_scale(lam: FieldElement, x: Sequence[FieldElement]) -> Vector:
    return tuple(lam * a for a in x)


def vec_truncate(x: Sequence[FieldElement], N: int) -> Vector:
    return tuple(a.truncate(N) for a in x)


def vec_ord(x: Sequence[FieldElement]) -> float:
    return min((a.ord() for a in x), default=INF)


def in_ball(x: Sequence[FieldElement], c: Sequence[FieldElement], alpha: int) -> bool:
    """ord(x_i - c_i) >= alpha for every coordinate."""
    for a, b in zip(x, c):
        d = a - b
        if d.coeffs and d.v < alpha:
            return False
        if not d.coeffs and d.prec < alpha:
            raise PrecisionError("ball membership undetermined at this precision")
    return True


def format_vector(x: Sequence[FieldElement]) -> list[str]:
    return [str(a) for a in x]
