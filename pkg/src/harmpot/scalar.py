"""Exact scalar tower used throughout the package.

``Fraction`` plays the role of the rational type.  On top of it sit

* :class:`FieldElement` -- ``a + b*sqrt(d)`` in a real quadratic field,
* :class:`ExactComplex` -- complexification of that field,
* :class:`PiGraded` -- values ``c0 + c1/pi`` with exact ``c0, c1``,
* :class:`SymbolicConstant` -- ``r + (g*gamma + l*log 2)`` optionally over pi.

Textual encoding of a field element is ``"a/b"`` or ``"a/b+c/e*s"`` where
``s`` stands for ``sqrt(d)``.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational as _RationalABC

import mpmath

Rational = Fraction

__all__ = [
    "Rational", "FieldElement", "ExactComplex", "PiGraded", "SymbolicConstant",
    "field_arith", "numeric_eval", "rational_reconstruct", "parse_field",
    "to_fraction", "I", "ONE", "ZERO",
]


def _is_squarefree(d: int) -> bool:
    if d < 2:
        return d in (0, 1)
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


def to_fraction(x) -> Fraction:
    """Exact conversion of ints, Fractions, floats and mpf values."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, _RationalABC)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, mpmath.mpf):
        sign, man, exp, _ = x._mpf_
        if not man:
            if exp:  # inf or nan
                raise ValueError("non-finite value")
            return Fraction(0)
        val = Fraction(int(man)) * (Fraction(2) ** exp)
        return -val if sign else val
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def _rational_sqrt(q: Fraction):
    if q < 0:
        return None
    n, m = q.numerator, q.denominator
    rn, rm = math.isqrt(n), math.isqrt(m)
    if rn * rn == n and rm * rm == m:
        return Fraction(rn, rm)
    return None


class FieldElement:
    """Element ``a + b*sqrt(d)`` of Q(sqrt d), d square-free.

    Elements with ``b == 0`` are rational and mix freely with any ``d``.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = 1):
        a = to_fraction(a)
        b = to_fraction(b)
        d = int(d)
        if not _is_squarefree(d):
            raise ValueError(f"d={d} is not a square-free nonnegative integer")
        if d == 1:
            a, b = a + b, Fraction(0)
        elif d == 0:
            b = Fraction(0)
        self.a = a
        self.b = b
        self.d = d

    # -- coercion -------------------------------------------------------
    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(other, 0, self.d)
        return NotImplemented

    @staticmethod
    def _common_d(x: "FieldElement", y: "FieldElement") -> int:
        if x.b == 0:
            return y.d
        if y.b == 0 or x.d == y.d:
            return x.d
        raise ValueError(f"mismatched fields: sqrt({x.d}) vs sqrt({y.d})")

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d = self._common_d(self, other)
        return FieldElement(self.a + other.a, self.b + other.b, d)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(-self.a, -self.b, self.d)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d = self._common_d(self, other)
        a = self.a * other.a + d * self.b * other.b
        b = self.a * other.b + self.b * other.a
        return FieldElement(a, b, d)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def conjugate_root(self) -> "FieldElement":
        """Galois conjugate ``a - b*sqrt(d)``."""
        return FieldElement(self.a, -self.b, self.d)

    def inverse(self) -> "FieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt d)")
        return FieldElement(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = FieldElement(1, 0, self.d)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- predicates -----------------------------------------------------
    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a >= 0 and b > 0:
            return 1
        if a <= 0 and b < 0:
            return -1
        lhs, rhs = a * a, self.d * b * b
        if a > 0:  # b < 0
            return 1 if lhs > rhs else -1
        return 1 if rhs > lhs else -1  # a < 0 < b

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        other = self._coerce(other) if not isinstance(other, FieldElement) else other
        if other is NotImplemented:
            return NotImplemented
        if self.b == 0 and other.b == 0:
            return self.a == other.a
        return self.a == other.a and self.b == other.b and self.d == other.d

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def sqrt(self):
        """Exact square root in the same field, or ``None``."""
        if self.sign() < 0:
            return None
        if self.is_zero():
            return FieldElement(0, 0, self.d)
        d = self.d
        if self.b == 0:
            r = _rational_sqrt(self.a)
            if r is not None:
                return FieldElement(r, 0, d)
            if d > 1:
                r = _rational_sqrt(self.a / d)
                if r is not None:
                    return FieldElement(0, r, d)
            return None
        # (x + y s)^2 = a + b s  =>  x^2 = (a +- sqrt(a^2 - d b^2)) / 2
        disc = _rational_sqrt(self.a * self.a - d * self.b * self.b)
        if disc is None:
            return None
        for x2 in ((self.a + disc) / 2, (self.a - disc) / 2):
            x = _rational_sqrt(x2)
            if x is None or x == 0:
                continue
            cand = FieldElement(x, self.b / (2 * x), d)
            if cand.sign() < 0:
                cand = -cand
            if cand * cand == self:
                return cand
        return None

    # -- numerics and text ---------------------------------------------
    def to_mpf(self):
        val = mpmath.mpf(self.a.numerator) / self.a.denominator
        if self.b:
            val += mpmath.mpf(self.b.numerator) / self.b.denominator * mpmath.sqrt(self.d)
        return val

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*s"
        sign = "+" if self.b > 0 else "-"
        return f"{self.a}{sign}{abs(self.b)}*s"

    def __repr__(self):
        if self.b == 0:
            return f"FieldElement({self.a})"
        return f"FieldElement({self.a}, {self.b}, d={self.d})"


_TOKEN = re.compile(r"\s*([+-]?)\s*(\d+(?:/\d+)?)?\s*(\*?\s*s)?\s*")


def parse_field(text, d: int = 1) -> FieldElement:
    """Parse ``"a/b"``, ``"a/b+c/e*s"``, ``"s"``, ``"-1/2*s"`` ... into Q(sqrt d)."""
    if isinstance(text, (int, Fraction)):
        return FieldElement(text, 0, d)
    s = str(text).replace(" ", "")
    if not s:
        raise ValueError("empty field element")
    a, b = Fraction(0), Fraction(0)
    pos = 0
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse field element {text!r}")
        sign, num, root = m.groups()
        if num is None and root is None:
            raise ValueError(f"cannot parse field element {text!r}")
        if pos > 0 and not sign:
            raise ValueError(f"missing operator in {text!r}")
        val = Fraction(num) if num is not None else Fraction(1)
        if sign == "-":
            val = -val
        if root:
            b += val
        else:
            a += val
        pos = m.end()
    if b and d == 0:
        raise ValueError("sqrt term given for d = 0")
    return FieldElement(a, b, d)


def field_arith(x: FieldElement, y: FieldElement, op: str) -> FieldElement:
    """Binary arithmetic on field elements, ``op`` one of ``+ - * /`` (``×``, ``÷``, ``−`` also accepted)."""
    if op in ("+",):
        return x + y
    if op in ("-", "−"):
        return x - y
    if op in ("*", "×"):
        return x * y
    if op in ("/", "÷"):
        return x / y
    raise ValueError(f"unknown operator {op!r}")


class ExactComplex:
    """``re + i*im`` with ``re, im`` in a common quadratic field."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0, d: int | None = None):
        if not isinstance(re, FieldElement):
            re = FieldElement(re, 0, d if d is not None else 1)
        if not isinstance(im, FieldElement):
            im = FieldElement(im, 0, d if d is not None else re.d)
        FieldElement._common_d(re, im)
        self.re = re
        self.im = im

    @property
    def d(self) -> int:
        if self.re.b:
            return self.re.d
        if self.im.b:
            return self.im.d
        return max(self.re.d, self.im.d)

    def _coerce(self, other):
        if isinstance(other, ExactComplex):
            return other
        if isinstance(other, (int, Fraction, FieldElement)):
            return ExactComplex(other, 0, self.d)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ExactComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ExactComplex(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, FieldElement)):
            return ExactComplex(self.re * other, self.im * other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ExactComplex(self.re * other.re - self.im * other.im,
                            self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def abs2(self) -> FieldElement:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "ExactComplex":
        n = self.abs2()
        if n.is_zero():
            raise ZeroDivisionError("division by zero ExactComplex")
        inv = n.inverse()
        return ExactComplex(self.re * inv, -self.im * inv)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, FieldElement)):
            inv = FieldElement(1, 0, self.d) / other
            return ExactComplex(self.re * inv, self.im * inv)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = ExactComplex(1, 0, self.d)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def is_real(self) -> bool:
        return self.im.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if self.im.is_zero():
            return hash(self.re)
        return hash((self.re, self.im))

    def to_mpc(self):
        return mpmath.mpc(self.re.to_mpf(), self.im.to_mpf())

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def encode(self) -> str:
        """``"re"`` for real values, ``"re;im"`` otherwise."""
        if self.im.is_zero():
            return str(self.re)
        return f"{self.re};{self.im}"

    @classmethod
    def decode(cls, text: str, d: int = 1) -> "ExactComplex":
        parts = str(text).split(";")
        if len(parts) == 1:
            return cls(parse_field(parts[0], d), 0)
        if len(parts) == 2:
            return cls(parse_field(parts[0], d), parse_field(parts[1], d))
        raise ValueError(f"cannot decode {text!r}")

    def __str__(self):
        if self.im.is_zero():
            return str(self.re)
        if self.re.is_zero():
            return f"({self.im})*i"
        return f"({self.re})+({self.im})*i"

    def __repr__(self):
        return f"ExactComplex({self.re!r}, {self.im!r})"


ZERO = ExactComplex(0, 0)
ONE = ExactComplex(1, 0)
I = ExactComplex(0, 1)


def _as_complex(x) -> ExactComplex:
    if isinstance(x, ExactComplex):
        return x
    return ExactComplex(x, 0)


class PiGraded:
    """Exact value ``c0 + c1/pi``.

    Products where both factors carry a 1/pi part are rejected: pi^-2 never
    arises legitimately in this package.
    """

    __slots__ = ("c0", "c1")

    def __init__(self, c0=0, c1=0):
        self.c0 = _as_complex(c0)
        self.c1 = _as_complex(c1)

    @classmethod
    def over_pi(cls, q) -> "PiGraded":
        return cls(0, q)

    def _coerce(self, other):
        if isinstance(other, PiGraded):
            return other
        if isinstance(other, (int, Fraction, FieldElement, ExactComplex)):
            return PiGraded(other, 0)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return PiGraded(self.c0 + other.c0, self.c1 + other.c1)

    __radd__ = __add__

    def __neg__(self):
        return PiGraded(-self.c0, -self.c1)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return PiGraded(self.c0 - other.c0, self.c1 - other.c1)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, FieldElement, ExactComplex)):
            return PiGraded(self.c0 * other, self.c1 * other)
        if not isinstance(other, PiGraded):
            return NotImplemented
        if not self.c1.is_zero() and not other.c1.is_zero():
            raise ValueError("product would create a pi^-2 term")
        return PiGraded(self.c0 * other.c0,
                        self.c0 * other.c1 + self.c1 * other.c0)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, FieldElement, ExactComplex)):
            return PiGraded(self.c0 / other, self.c1 / other)
        if isinstance(other, PiGraded) and other.c1.is_zero():
            return self / other.c0
        return NotImplemented

    def conjugate(self) -> "PiGraded":
        return PiGraded(self.c0.conjugate(), self.c1.conjugate())

    def is_zero(self) -> bool:
        return self.c0.is_zero() and self.c1.is_zero()

    def is_real(self) -> bool:
        return self.c0.is_real() and self.c1.is_real()

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.c0 == other.c0 and self.c1 == other.c1

    def __hash__(self):
        return hash((self.c0, self.c1))

    def numeric(self, precision: int = 53):
        with mpmath.workprec(precision + 10):
            val = self.c0.to_mpc() + self.c1.to_mpc() / mpmath.pi
        with mpmath.workprec(precision):
            return +val

    def __str__(self):
        return f"{self.c0.encode()} + ({self.c1.encode()})/pi"

    @classmethod
    def parse(cls, text: str, d: int = 1) -> "PiGraded":
        m = re.fullmatch(r"\s*(.*?)\s*\+\s*\((.*)\)\s*/\s*pi\s*", text)
        if m is None:
            raise ValueError(f"cannot parse PiGraded {text!r}")
        return cls(ExactComplex.decode(m.group(1), d), ExactComplex.decode(m.group(2), d))

    def __repr__(self):
        return f"PiGraded({self})"


class SymbolicConstant:
    """``rational + (gamma * euler_gamma + log2 * log 2)``, divided by pi when ``over_pi``.

    With ``over_pi`` (the default) the rational part is *not* divided by pi:
    the value is ``r + (g*gamma + l*log 2)/pi``, the shape of the additive
    constant of the simple-walk potential.
    """

    __slots__ = ("rational", "gamma", "log2", "over_pi")

    def __init__(self, rational=0, gamma=0, log2=0, over_pi: bool = True):
        self.rational = to_fraction(rational)
        self.gamma = to_fraction(gamma)
        self.log2 = to_fraction(log2)
        self.over_pi = bool(over_pi)

    def _check(self, other):
        if self.over_pi != other.over_pi:
            raise ValueError("cannot mix constants with and without the 1/pi factor")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            return SymbolicConstant(self.rational + other, self.gamma, self.log2, self.over_pi)
        if not isinstance(other, SymbolicConstant):
            return NotImplemented
        self._check(other)
        return SymbolicConstant(self.rational + other.rational, self.gamma + other.gamma,
                                self.log2 + other.log2, self.over_pi)

    __radd__ = __add__

    def __neg__(self):
        return SymbolicConstant(-self.rational, -self.gamma, -self.log2, self.over_pi)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, k):
        if not isinstance(k, (int, Fraction)):
            return NotImplemented
        return SymbolicConstant(self.rational * k, self.gamma * k, self.log2 * k, self.over_pi)

    __rmul__ = __mul__

    def divided_by_pi(self) -> "SymbolicConstant":
        """Value / pi; only defined for a zero rational part without 1/pi yet."""
        if self.over_pi or self.rational != 0:
            raise ValueError("result not representable")
        return SymbolicConstant(0, self.gamma, self.log2, True)

    def __eq__(self, other):
        if not isinstance(other, SymbolicConstant):
            return NotImplemented
        return (self.rational, self.gamma, self.log2, self.over_pi) == (
            other.rational, other.gamma, other.log2, other.over_pi)

    def __hash__(self):
        return hash((self.rational, self.gamma, self.log2, self.over_pi))

    def numeric(self, precision: int = 53):
        with mpmath.workprec(precision + 10):
            tail = self.gamma * mpmath.euler + self.log2 * mpmath.log(2)
            if self.over_pi:
                tail = tail / mpmath.pi
            val = mpmath.mpf(self.rational.numerator) / self.rational.denominator + tail
        with mpmath.workprec(precision):
            return +val

    def __str__(self):
        body = f"{self.gamma}*euler_gamma + {self.log2}*log(2)"
        if self.over_pi:
            body = f"({body})/pi"
        return f"{self.rational} + {body}"

    @classmethod
    def parse(cls, text: str) -> "SymbolicConstant":
        """Inverse of ``str``."""
        m = re.fullmatch(r"\s*(\S+) \+ (\()?(\S+)\*euler_gamma \+ (\S+)\*log\(2\)(\)/pi)?\s*", text)
        if m is None or bool(m.group(2)) != bool(m.group(5)):
            raise ValueError(f"cannot parse constant {text!r}")
        return cls(Fraction(m.group(1)), Fraction(m.group(3)), Fraction(m.group(4)),
                   over_pi=bool(m.group(2)))

    def __repr__(self):
        return f"SymbolicConstant({self})"


def numeric_eval(x, precision: int = 53):
    """High-precision value of an exact scalar at ``precision`` bits."""
    if precision < 53:
        raise ValueError("precision must be at least 53 bits")
    if isinstance(x, (PiGraded, SymbolicConstant)):
        val = x.numeric(precision)
    elif isinstance(x, ExactComplex):
        with mpmath.workprec(precision):
            val = x.to_mpc()
    elif isinstance(x, FieldElement):
        with mpmath.workprec(precision):
            val = x.to_mpf()
    elif isinstance(x, (int, Fraction)):
        with mpmath.workprec(precision):
            val = mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpmath.mpf(x)
    else:
        raise TypeError(f"cannot evaluate {type(x).__name__}")
    if isinstance(val, mpmath.mpc) and val.imag == 0:
        val = val.real
    return val


def rational_reconstruct(x, max_denominator: int):
    """Best rational p/q with q <= max_denominator if it is close enough, else None.

    Acceptance requires ``|x - p/q| < 1/(2 q max_denominator)``.
    """
    xf = to_fraction(x)
    cand = xf.limit_denominator(max_denominator)
    if abs(xf - cand) < Fraction(1, 2 * cand.denominator * max_denominator):
        return cand
    return None
