"""Exact potential values for the simple walk on Z^2.

Every value has the form ``n + q/pi`` with ``n`` an integer and ``q``
rational.  The table is filled from the diagonal values
``a(m, m) = (4/pi) (1 + 1/3 + ... + 1/(2m-1))`` and the discrete Laplace
equation, sweeping rows ``0 <= y <= x`` outward.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd

import mpmath

from .scalar import SymbolicConstant

__all__ = [
    "PotentialValue", "PotentialTable", "DiagonalSeries", "mccrea_whipple",
    "diagonal_value", "odd_harmonic_asymptotics", "bernoulli", "ConstantScan",
    "error_constant_scan",
]


@dataclass(frozen=True)
class PotentialValue:
    """``n + q/pi`` exactly, and/or a numeric value with an error bound."""

    exact: tuple | None = None  # (n, q) as Fractions
    numeric: object = None
    error: object = None

    def __post_init__(self):
        if self.exact is None and self.numeric is None:
            raise ValueError("PotentialValue needs an exact or a numeric part")

    @property
    def n(self) -> Fraction:
        return self.exact[0]

    @property
    def q(self) -> Fraction:
        return self.exact[1]

    def value(self, precision: int = 53):
        """Numeric value; exact parts are evaluated with enough guard bits."""
        if self.exact is None:
            return self.numeric
        n, q = self.exact
        size = max(abs(n), abs(q), 1)
        guard = int(size).bit_length() + q.denominator.bit_length() + 20
        with mpmath.workprec(precision + guard):
            val = (mpmath.mpf(n.numerator) / n.denominator
                   + mpmath.mpf(q.numerator) / q.denominator / mpmath.pi)
        with mpmath.workprec(precision):
            return +val

    def __str__(self):
        if self.exact is not None:
            return f"{self.n} + ({self.q})/pi"
        return f"{self.numeric} +- {self.error}"


def _odd_lcm(m: int) -> int:
    out = 1
    for j in range(1, 2 * m, 2):
        out = out * j // gcd(out, j)
    return out


def diagonal_value(m: int) -> PotentialValue:
    """``a(m + i m) = (4/pi) sum_{j<=m} 1/(2j-1)``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    q = 4 * sum((Fraction(1, 2 * j - 1) for j in range(1, m + 1)), Fraction(0))
    return PotentialValue(exact=(Fraction(0), q))


@dataclass
class PotentialTable:
    """Cache of exact values on the wedge ``0 <= y <= x <= size``.

    Values are stored as integer pairs ``(n, Q)`` meaning ``n + Q/(L pi)``
    with one common denominator ``L`` so the sweep is pure integer work.
    """

    size: int = 0
    denominator: int = 1
    _n: list = field(default_factory=list, repr=False)
    _Q: list = field(default_factory=list, repr=False)

    def fill(self, size: int) -> "PotentialTable":
        if size <= self.size and self._n:
            return self
        L = _odd_lcm(size + 1)
        diag = [0]
        acc = 0
        for m in range(1, size + 2):
            acc += 4 * L // (2 * m - 1)
            diag.append(acc)
        n_rows = [[0]]
        Q_rows = [[0]]
        for x in range(0, size):
            nx, Qx = n_rows[x], Q_rows[x]
            nprev = n_rows[x - 1] if x > 0 else None
            Qprev = Q_rows[x - 1] if x > 0 else None
            new_n = [0] * (x + 2)
            new_Q = [0] * (x + 2)
            for y in range(0, x):
                # harmonic at (x, y): a(x+1,y) = 4a(x,y) - a(x-1,y) - a(x,y+1) - a(x,y-1)
                cn = 4 * nx[y] - nx[y + 1] - nx[abs(y - 1)] - nprev[y]
                cQ = 4 * Qx[y] - Qx[y + 1] - Qx[abs(y - 1)] - Qprev[y]
                new_n[y] = cn
                new_Q[y] = cQ
            if x == 0:
                # four neighbours of the origin sum to 4: a(1,0) = 1
                new_n[0], new_Q[0] = 1, 0
            else:
                # a(x+1, x) = 2 a(x, x) - a(x, x-1)
                new_n[x] = 2 * nx[x] - nx[x - 1]
                new_Q[x] = 2 * Qx[x] - Qx[x - 1]
            new_n[x + 1] = 0
            new_Q[x + 1] = diag[x + 1]
            n_rows.append(new_n)
            Q_rows.append(new_Q)
        self.size = size
        self.denominator = L
        self._n = n_rows
        self._Q = Q_rows
        return self

    def raw(self, x: int, y: int) -> tuple[int, int]:
        x, y = abs(x), abs(y)
        if y > x:
            x, y = y, x
        if x > self.size:
            self.fill(max(x, 2 * self.size))
        return self._n[x][y], self._Q[x][y]

    def get(self, x: int, y: int) -> PotentialValue:
        n, Q = self.raw(x, y)
        return PotentialValue(exact=(Fraction(n), Fraction(Q, self.denominator)))

    def numeric(self, x: int, y: int, precision: int = 53):
        n, Q = self.raw(x, y)
        guard = max(abs(n), abs(Q), 1).bit_length() + 20
        with mpmath.workprec(precision + guard):
            val = mpmath.mpf(n) + mpmath.mpf(Q) / (self.denominator * mpmath.pi)
        with mpmath.workprec(precision):
            return +val


def mccrea_whipple(x: int, y: int, table: PotentialTable | None = None) -> PotentialValue:
    """Exact ``a(x, y)`` for the simple walk; pass ``table`` to reuse work."""
    if table is None:
        table = PotentialTable()
    table.fill(max(abs(x), abs(y), 1))
    return table.get(x, y)


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = -1/2."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return Fraction(1)
    return -sum((comb(n + 1, k) * bernoulli(k) for k in range(n)), Fraction(0)) / (n + 1)


@dataclass(frozen=True)
class DiagonalSeries:
    """``S(m) ~ log_coefficient*log m + constant + sum_j coefficients[j] m^-j``.

    Here ``S(m) = 1 + 1/3 + ... + 1/(2m-1)``.
    """

    log_coefficient: Fraction
    constant: SymbolicConstant
    coefficients: dict

    def evaluate(self, m, precision: int = 53):
        with mpmath.workprec(precision + 10):
            m = mpmath.mpf(m)
            val = self.log_coefficient * mpmath.log(m) + self.constant.numeric(precision + 10)
            for j, c in self.coefficients.items():
                val += mpmath.mpf(c.numerator) / c.denominator * m ** (-j)
        with mpmath.workprec(precision):
            return +val


def odd_harmonic_asymptotics(J: int) -> DiagonalSeries:
    """Euler-Maclaurin expansion of ``sum_{j<=m} 1/(2j-1)`` through ``m^-J``.

    Uses ``S(m) = H_{2m} - H_m / 2``; odd powers cancel and
    ``c_{2k} = B_{2k} (1/2 - 4^-k) / (2k)``.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    coeffs = {}
    for j in range(1, J + 1):
        if j % 2:
            coeffs[j] = Fraction(0)
        else:
            k = j // 2
            coeffs[j] = bernoulli(2 * k) * (Fraction(1, 2) - Fraction(1, 4 ** k)) / (2 * k)
    constant = SymbolicConstant(0, Fraction(1, 2), 1, over_pi=False)
    return DiagonalSeries(Fraction(1, 2), constant, coeffs)


@dataclass(frozen=True)
class ConstantScan:
    argmax: tuple
    value: object  # max of |z|^2 |a(z) - (2/pi) log|z| - lambda|
    signed: object  # the signed quantity at the argmax
    points: int


def error_constant_scan(rmax: int = 400, table: PotentialTable | None = None) -> ConstantScan:
    """Scan ``|z|^2 (a(z) - (2/pi) log|z| - lambda)`` over 1 <= |z| <= rmax.

    By the 8-fold symmetry only the wedge 0 <= y <= x is visited.
    """
    table = table or PotentialTable()
    table.fill(rmax)
    L = table.denominator
    bits = max(L.bit_length(), 64) + 2 * rmax + 64
    best = None
    count = 0
    with mpmath.workprec(bits):
        lam = SymbolicConstant(0, 2, 3).numeric(bits)
        Lpi = L * mpmath.pi
        two_over_pi = 2 / mpmath.pi
        for x in range(1, rmax + 1):
            for y in range(0, x + 1):
                r2 = x * x + y * y
                if r2 > rmax * rmax:
                    break
                n, Q = table.raw(x, y)
                a = n + mpmath.mpf(Q) / Lpi
                val = r2 * (a - two_over_pi * mpmath.log(r2) / 2 - lam)
                count += 1
                if best is None or abs(val) > abs(best[1]):
                    best = ((x, y), val)
    with mpmath.workprec(64):
        return ConstantScan(best[0], +abs(best[1]), +best[1], count)
