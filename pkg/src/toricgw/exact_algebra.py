"""Exact arithmetic over Q[u1..ur] and its fraction field.

Polynomials are backed by FLINT's ``fmpq_mpoly`` (via python-flint), which
gives us fast sparse multivariate arithmetic and gcd.  Everything here is
immutable; rational functions are kept in a canonical form so that equality
is structural.

Canonical string form
---------------------
Monomials are written ``c*u1^2*u3`` and sorted by descending total degree,
then descending exponent vector.  Coefficients are ``p`` or ``p/q``.  A
rational function prints as ``N`` when the denominator is 1 and as
``(N)/(D)`` otherwise.  No whitespace is emitted, so strings are suitable
for golden files; :func:`parse_rf` reads them back.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import flint

__all__ = [
    "ArithmeticError_",
    "PoleError",
    "MultiPoly",
    "RationalFunction",
    "WeightVector",
    "frac_str",
    "parse_fraction",
    "parse_rf",
]


class ArithmeticError_(ArithmeticError):
    """Division by the zero function and similar."""


class PoleError(ArithmeticError_):
    pass


@lru_cache(maxsize=None)
def _ctx(nvars: int):
    if nvars < 1:
        raise ValueError("need at least one variable")
    names = tuple(f"u{i + 1}" for i in range(nvars))
    return flint.fmpq_mpoly_ctx.get(names, "deglex")


def _fq(x) -> flint.fmpq:
    x = Fraction(x)
    return flint.fmpq(x.numerator, x.denominator)


def _to_fraction(c) -> Fraction:
    return Fraction(int(c.p), int(c.q))


def frac_str(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(s) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    return Fraction(str(s).strip())


def _monomial_key(exps):
    return (sum(exps), tuple(exps))


class MultiPoly:
    """Sparse polynomial in u1..ur with rational coefficients."""

    __slots__ = ("nvars", "_p")

    def __init__(self, nvars: int, raw=None):
        self.nvars = nvars
        self._p = _ctx(nvars).constant(0) if raw is None else raw

    # construction
    @classmethod
    def constant(cls, nvars: int, c) -> "MultiPoly":
        return cls(nvars, _ctx(nvars).constant(_fq(c)))

    @classmethod
    def gen(cls, nvars: int, i: int) -> "MultiPoly":
        return cls(nvars, _ctx(nvars).gen(i))

    @classmethod
    def from_terms(cls, nvars: int, terms: dict) -> "MultiPoly":
        clean = {tuple(int(e) for e in k): _fq(v) for k, v in terms.items() if Fraction(v) != 0}
        for k in clean:
            if len(k) != nvars:
                raise ValueError(f"exponent vector {k} has wrong length for {nvars} variables")
        return cls(nvars, _ctx(nvars).from_dict(clean) if clean else None)

    def terms(self) -> dict:
        return {tuple(k): _to_fraction(v) for k, v in self._p.to_dict().items()}

    def __reduce__(self):
        return (MultiPoly.from_terms, (self.nvars, {k: frac_str(v) for k, v in self.terms().items()}))

    # arithmetic
    def _check(self, other):
        if isinstance(other, (int, Fraction)):
            return MultiPoly.constant(self.nvars, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        if other.nvars != self.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return MultiPoly(self.nvars, self._p + other._p)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return MultiPoly(self.nvars, self._p - other._p)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return MultiPoly(self.nvars, self._p * other._p)

    __rmul__ = __mul__

    def __neg__(self):
        return MultiPoly(self.nvars, -self._p)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        return MultiPoly(self.nvars, self._p ** k)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.constant(self.nvars, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.nvars == other.nvars and self._p == other._p

    def __hash__(self):
        return hash((self.nvars, str(self)))

    def is_zero(self) -> bool:
        return self._p.is_zero()

    def is_constant(self) -> bool:
        return self._p.is_constant()

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if self._p.is_zero():
            return -1
        return int(self._p.total_degree())

    def is_homogeneous(self) -> bool:
        degs = {sum(k) for k in self._p.to_dict()}
        return len(degs) <= 1

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError("point has wrong length")
        return _to_fraction(self._p(*[_fq(x) for x in point]))

    def gcd(self, other: "MultiPoly") -> "MultiPoly":
        return MultiPoly(self.nvars, self._p.gcd(other._p))

    def exact_div(self, other: "MultiPoly") -> "MultiPoly":
        return MultiPoly(self.nvars, self._p / other._p)

    def leading_coefficient(self) -> Fraction:
        return _to_fraction(self._p.leading_coefficient())

    def __str__(self):
        terms = self.terms()
        if not terms:
            return "0"
        out = []
        for exps in sorted(terms, key=_monomial_key, reverse=True):
            c = terms[exps]
            mono = "*".join(
                (f"u{i + 1}" if e == 1 else f"u{i + 1}^{e}") for i, e in enumerate(exps) if e
            )
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if mono and a == 1:
                body = mono
            elif mono:
                body = f"{frac_str(a)}*{mono}"
            else:
                body = frac_str(a)
            out.append((sign, body))
        s = ("-" if out[0][0] == "-" else "") + out[0][1]
        for sign, body in out[1:]:
            s += sign + body
        return s

    def __repr__(self):
        return f"MultiPoly({self})"


class RationalFunction:
    """Element of Q(u1..ur) in canonical reduced form.

    The numerator and denominator are coprime and the denominator has
    leading coefficient 1 in the degree-lex order.  The zero function is 0/1.
    """

    __slots__ = ("nvars", "num", "den")

    def __init__(self, num: MultiPoly, den: MultiPoly | None = None, _normalized: bool = False):
        nv = num.nvars
        if den is None:
            den = MultiPoly.constant(nv, 1)
        if den.nvars != nv:
            raise ValueError("variable count mismatch")
        if den.is_zero():
            raise ArithmeticError_("zero denominator")
        if not _normalized:
            num, den = _normalize(num, den)
        self.nvars = nv
        self.num = num
        self.den = den

    # construction helpers
    @classmethod
    def constant(cls, nvars: int, c) -> "RationalFunction":
        return cls(MultiPoly.constant(nvars, c), None, _normalized=True)

    @classmethod
    def zero(cls, nvars: int) -> "RationalFunction":
        return cls.constant(nvars, 0)

    @classmethod
    def one(cls, nvars: int) -> "RationalFunction":
        return cls.constant(nvars, 1)

    @classmethod
    def gen(cls, nvars: int, i: int) -> "RationalFunction":
        return cls(MultiPoly.gen(nvars, i), None, _normalized=True)

    def __reduce__(self):
        return (_rebuild_rf, (self.num, self.den))

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            if other.nvars != self.nvars:
                raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, MultiPoly):
            return RationalFunction(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction.constant(self.nvars, other)
        if isinstance(other, WeightVector):
            return other.to_rf()
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, _normalized=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        # cross-cancel first to keep the gcd calls small
        g1 = self.num.gcd(o.den)
        g2 = o.num.gcd(self.den)
        n = self.num.exact_div(g1) * o.num.exact_div(g2)
        d = self.den.exact_div(g2) * o.den.exact_div(g1)
        return RationalFunction(n, d)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if self.num.is_zero():
            raise ArithmeticError_("division by the zero function")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k >= 0:
            return RationalFunction(self.num ** k, self.den ** k, _normalized=True)._renorm()
        return self.inverse() ** (-k)

    def _renorm(self):
        # powers of a canonical pair are coprime; only the leading coefficient may drift
        lc = self.den.leading_coefficient()
        if lc == 1:
            return self
        return RationalFunction(self.num * (1 / lc), self.den * (1 / lc), _normalized=True)

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, RationalFunction) else other
        if o is NotImplemented:
            return NotImplemented
        return self.nvars == o.nvars and self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash(str(self))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> Fraction | None:
        if self.num.is_constant() and self.den.is_constant():
            return self.num.leading_coefficient() if not self.num.is_zero() else Fraction(0)
        return None

    def total_degree(self) -> int | None:
        """Numerator degree minus denominator degree (None for zero)."""
        if self.num.is_zero():
            return None
        return self.num.total_degree() - self.den.total_degree()

    def is_homogeneous(self) -> bool:
        return self.num.is_homogeneous() and self.den.is_homogeneous()

    def evaluate(self, point: Sequence) -> Fraction:
        d = self.den.evaluate(point)
        if d == 0:
            raise PoleError(f"denominator {self.den} vanishes at {tuple(frac_str(x) for x in point)}")
        return self.num.evaluate(point) / d

    def __str__(self):
        if self.den.is_constant():
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"RationalFunction({self})"


def _rebuild_rf(num, den):
    return RationalFunction(num, den, _normalized=True)


def _normalize(num: MultiPoly, den: MultiPoly):
    nv = num.nvars
    if num.is_zero():
        return num, MultiPoly.constant(nv, 1)
    if not den.is_constant():
        g = num.gcd(den)
        if not g.is_constant():
            num = num.exact_div(g)
            den = den.exact_div(g)
    lc = den.leading_coefficient()
    if lc != 1:
        inv = MultiPoly.constant(nv, 1 / lc)
        num = num * inv
        den = den * inv
    return num, den


class WeightVector:
    """Element of M tensor Q written in the basis u1..ur."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        self.coeffs = tuple(Fraction(c) for c in coeffs)

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    @classmethod
    def zero(cls, r: int) -> "WeightVector":
        return cls([0] * r)

    @classmethod
    def basis(cls, r: int, i: int) -> "WeightVector":
        return cls([1 if j == i else 0 for j in range(r)])

    def __add__(self, other: "WeightVector") -> "WeightVector":
        if other.rank != self.rank:
            raise ValueError("rank mismatch")
        return WeightVector(a + b for a, b in zip(self.coeffs, other.coeffs))

    def __sub__(self, other: "WeightVector") -> "WeightVector":
        return self + (-other)

    def __neg__(self) -> "WeightVector":
        return WeightVector(-a for a in self.coeffs)

    def scale(self, c) -> "WeightVector":
        c = Fraction(c)
        return WeightVector(c * a for a in self.coeffs)

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def pair(self, v: Sequence) -> Fraction:
        return sum((a * b for a, b in zip(self.coeffs, v)), Fraction(0))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __eq__(self, other):
        return isinstance(other, WeightVector) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def to_poly(self) -> MultiPoly:
        r = self.rank
        return MultiPoly.from_terms(r, {tuple(1 if j == i else 0 for j in range(r)): c for i, c in enumerate(self.coeffs)})

    def to_rf(self) -> RationalFunction:
        return RationalFunction(self.to_poly(), None, _normalized=True)

    def __str__(self):
        return str(self.to_poly())

    def __repr__(self):
        return f"WeightVector({self})"


# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|(u\d+)|(.))")


def _tokenize(s: str):
    toks = []
    for num, var, op in _TOKEN.findall(s):
        if num:
            toks.append(("num", int(num)))
        elif var:
            toks.append(("var", int(var[1:]) - 1))
        elif op.strip():
            toks.append(("op", op))
    return toks


def parse_rf(s: str, nvars: int) -> RationalFunction:
    """Parse a rational-function expression in u1..u_nvars.

    Accepts the canonical output format and ordinary infix input with
    ``+ - * / ^`` and parentheses.
    """
    toks = _tokenize(s)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def take(expected=None):
        nonlocal pos
        t = peek()
        if expected is not None and t != ("op", expected):
            raise ValueError(f"expected {expected!r} in {s!r}")
        pos += 1
        return t

    def expr():
        neg = False
        if peek() == ("op", "-"):
            take()
            neg = True
        elif peek() == ("op", "+"):
            take()
        val = term()
        if neg:
            val = -val
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            rhs = term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term():
        val = power()
        while peek() in (("op", "*"), ("op", "/")):
            op = take()[1]
            rhs = power()
            val = val * rhs if op == "*" else val / rhs
        return val

    def power():
        base = atom()
        if peek() == ("op", "^"):
            take()
            neg = False
            if peek() == ("op", "-"):
                take()
                neg = True
            kind, k = take()
            if kind != "num":
                raise ValueError(f"bad exponent in {s!r}")
            base = base ** (-k if neg else k)
        return base

    def atom():
        kind, val = peek()
        if kind == "num":
            take()
            return RationalFunction.constant(nvars, val)
        if kind == "var":
            take()
            if val >= nvars:
                raise ValueError(f"variable u{val + 1} out of range for {nvars} variables")
            return RationalFunction.gen(nvars, val)
        if (kind, val) == ("op", "("):
            take()
            v = expr()
            take(")")
            return v
        if (kind, val) == ("op", "-"):
            take()
            return -atom()
        raise ValueError(f"unexpected token {val!r} in {s!r}")

    if not toks:
        raise ValueError("empty expression")
    out = expr()
    if pos != len(toks):
        raise ValueError(f"trailing input in {s!r}")
    return out
