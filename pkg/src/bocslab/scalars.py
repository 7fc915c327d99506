"""Exact scalars: the rationals (via gmpy2.mpq) and prime fields F_p."""
from __future__ import annotations

import re
from random import Random
from fractions import Fraction

from gmpy2 import mpq, is_prime

from .errors import DivisionByZero, FieldMismatch, ParseError


class FpElement:
    """Residue class modulo a prime p, stored as an int in [0, p)."""

    __slots__ = ("v", "p")

    def __init__(self, v: int, p: int):
        self.v = v % p
        self.p = p

    def _other(self, o):
        if isinstance(o, FpElement):
            if o.p != self.p:
                raise FieldMismatch(f"F_{self.p} vs F_{o.p}")
            return o.v
        if isinstance(o, int):
            return o
        raise FieldMismatch(f"cannot combine F_{self.p} element with {type(o).__name__}")

    def __add__(self, o):
        return FpElement(self.v + self._other(o), self.p)

    __radd__ = __add__

    def __sub__(self, o):
        return FpElement(self.v - self._other(o), self.p)

    def __rsub__(self, o):
        return FpElement(self._other(o) - self.v, self.p)

    def __mul__(self, o):
        return FpElement(self.v * self._other(o), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FpElement(-self.v, self.p)

    def __pos__(self):
        return self

    def inverse(self):
        if self.v == 0:
            raise DivisionByZero(f"inverse of 0 in F_{self.p}")
        return FpElement(pow(self.v, self.p - 2, self.p), self.p)

    def __truediv__(self, o):
        w = self._other(o) % self.p
        if w == 0:
            raise DivisionByZero(f"division by 0 in F_{self.p}")
        return FpElement(self.v * pow(w, self.p - 2, self.p), self.p)

    def __rtruediv__(self, o):
        return FpElement(self._other(o), self.p) / self

    def __eq__(self, o):
        if isinstance(o, FpElement):
            return self.p == o.p and self.v == o.v
        if isinstance(o, int):
            return self.v == o % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return f"{self.v} mod {self.p}"


class Field:
    """Descriptor of the ground field: ``Field("q")`` or ``Field("fp:7")``."""

    def __init__(self, name: str = "q"):
        name = name.strip().lower()
        if name == "q":
            self.p = 0
        else:
            m = re.fullmatch(r"fp:(\d+)", name)
            if not m:
                raise ParseError(f"unknown field descriptor {name!r}")
            p = int(m.group(1))
            if p < 2 or p > 2**31 or not is_prime(p):
                raise ParseError(f"{p} is not a prime <= 2^31")
            self.p = p
        self.name = name
        self.zero = self(0)
        self.one = self(1)

    def __call__(self, x) -> object:
        """Coerce an int, Fraction, string or field element into this field."""
        if isinstance(x, str):
            return self.parse(x)
        if self.p == 0:
            if isinstance(x, FpElement):
                raise FieldMismatch("F_p element used over Q")
            return mpq(x)
        if isinstance(x, FpElement):
            if x.p != self.p:
                raise FieldMismatch(f"F_{x.p} element used over F_{self.p}")
            return x
        if isinstance(x, int):
            return FpElement(x, self.p)
        q = Fraction(x)
        return FpElement(q.numerator, self.p) / q.denominator

    def __eq__(self, other):
        return isinstance(other, Field) and other.name == self.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return f"Field({self.name!r})"

    def parse(self, s: str):
        s = s.strip()
        m = re.fullmatch(r"(-?\d+)\s+mod\s+(\d+)", s)
        if m:
            if int(m.group(2)) != self.p:
                raise FieldMismatch(f"{s!r} is not an element of {self.name}")
            return FpElement(int(m.group(1)), self.p)
        m = re.fullmatch(r"(-?\d+)(?:/(\d+))?", s)
        if not m:
            raise ParseError(f"bad scalar {s!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise DivisionByZero(f"zero denominator in {s!r}")
        if self.p == 0:
            return mpq(num, den)
        return FpElement(num, self.p) / den

    def format(self, x) -> str:
        if self.p == 0:
            x = mpq(x)
            if x.denominator == 1:
                return str(x.numerator)
            return f"{x.numerator}/{x.denominator}"
        return str(self(x).v) if isinstance(x, FpElement) else str(int(x) % self.p)

    def random(self, rng: Random, nonzero: bool = False, small: bool = True):
        while True:
            if self.p == 0:
                num = rng.randint(-3, 3) if small else rng.randint(-50, 50)
                den = rng.choice((1, 1, 1, 2, 3)) if small else rng.randint(1, 20)
                x = mpq(num, den)
            else:
                x = FpElement(rng.randrange(self.p), self.p)
            if x or not nonzero:
                return x

    def inv(self, x):
        if not x:
            raise DivisionByZero("inverse of zero")
        return self.one / x


QQ = Field("q")


class BaseRing:
    """S = k^n, given by the number of primitive idempotents and the field."""

    def __init__(self, n: int = 1, field: Field | None = None):
        if n < 1:
            raise ValueError("need at least one idempotent")
        self.n = n
        self.field = field or QQ

    def __eq__(self, other):
        return isinstance(other, BaseRing) and other.n == self.n and other.field == self.field

    def __hash__(self):
        return hash((self.n, self.field))

    def __repr__(self):
        return f"BaseRing({self.n}, {self.field.name})"


def scalar_arith(a, b, op: str, field: Field | None = None):
    """Exact ``a op b`` for op in '+', '-', '*', '/' (also accepts the unicode signs)."""
    if field is not None:
        a, b = field(a), field(b)
    elif type(a) is not type(b) and not (isinstance(a, int) or isinstance(b, int)):
        raise FieldMismatch(f"{type(a).__name__} vs {type(b).__name__}")
    if op in ("+",):
        return a + b
    if op in ("-", "−"):
        return a - b
    if op in ("*", "×"):
        return a * b
    if op in ("/", "÷"):
        if not b:
            raise DivisionByZero("division by zero")
        return a / b
    raise ValueError(f"unknown operation {op!r}")
