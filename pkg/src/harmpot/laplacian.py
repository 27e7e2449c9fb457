"""Taylor operators D_n of a walk Laplacian, acting on the z, zbar term algebra.

A term is either a monomial ``z^k zbar^l`` (k, l any integers) or
``log(z zbar)``.  Term collections are plain dicts keyed by ``(k, l)`` with
the special key :data:`LOG` for the logarithm.  Operators are built in the
Wirtinger derivatives ``dz, dzbar``; the real ones follow from
``dx = dz + dzbar`` and ``dy = i (dz - dzbar)``.
"""
from __future__ import annotations

from math import factorial
from typing import NamedTuple

from .scalar import ExactComplex
from .walk import WalkSpec, taylor_coefficients

LOG = "log"


class Term(NamedTuple):
    coeff: object
    k: int
    l: int
    is_log: bool = False

    @property
    def order(self) -> int:
        return self.k + self.l


def _falling(x: int, n: int) -> int:
    out = 1
    for j in range(n):
        out *= x - j
    return out


def _is_zero(c) -> bool:
    if hasattr(c, "is_zero"):
        return c.is_zero()
    return c == 0


class DiffOperator:
    """Finite sum ``sum c_ab dz^a dzbar^b`` with exact coefficients."""

    def __init__(self, coeffs=None):
        self.coeffs = {key: c for key, c in (coeffs or {}).items() if not _is_zero(c)}

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out[key] + c if key in out else c
        return DiffOperator(out)

    def __eq__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        return self.coeffs == other.coeffs

    def is_zero(self) -> bool:
        return not self.coeffs

    def orders(self) -> set:
        return {a + b for a, b in self.coeffs}

    def is_conjugate_symmetric(self) -> bool:
        return all(self.coeffs.get((b, a), ExactComplex(0)) == c.conjugate()
                   for (a, b), c in self.coeffs.items())

    def apply(self, terms: dict) -> dict:
        """Apply to a term dict, merging equal monomials and dropping exact zeros."""
        out: dict = {}
        for key, coeff in terms.items():
            for (k, l), c in self._image(key):
                val = coeff * c
                if (k, l) in out:
                    out[(k, l)] = out[(k, l)] + val
                else:
                    out[(k, l)] = val
        return {key: c for key, c in out.items() if not _is_zero(c)}

    def _image(self, key):
        for (a, b), c in self.coeffs.items():
            if key == LOG:
                # dz log(z zbar) = 1/z, and dz dzbar kills it away from 0
                if a and b:
                    continue
                if b == 0:
                    f = (-1) ** (a - 1) * factorial(a - 1)
                    yield (-a, 0), c * f
                else:
                    f = (-1) ** (b - 1) * factorial(b - 1)
                    yield (0, -b), c * f
            else:
                k, l = key
                f = _falling(k, a) * _falling(l, b)
                if f:
                    yield (k - a, l - b), c * f

    def dump(self) -> str:
        """One line ``a b c_ab`` per coefficient, sorted."""
        return "\n".join(f"{a} {b} {c.encode()}" for (a, b), c in sorted(self.coeffs.items()))

    def __repr__(self):
        return f"DiffOperator({self.dump()!r})"


def taylor_operator(walk: WalkSpec, n: int) -> DiffOperator:
    """``D_n = (1/n!) sum_m C(n,m) mu_{m,n-m} dz^m dzbar^(n-m)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return DiffOperator(taylor_coefficients(walk, n))


def apply_operator(op: DiffOperator, t: Term) -> list:
    key = LOG if t.is_log else (t.k, t.l)
    return terms_from_dict(op.apply({key: t.coeff}))


def terms_to_dict(terms) -> dict:
    out: dict = {}
    for t in terms:
        key = LOG if t.is_log else (t.k, t.l)
        out[key] = out[key] + t.coeff if key in out else t.coeff
    return {k: c for k, c in out.items() if not _is_zero(c)}


def terms_from_dict(terms: dict) -> list:
    out = []
    for key, c in terms.items():
        if key == LOG:
            out.append(Term(c, 0, 0, True))
        else:
            out.append(Term(c, key[0], key[1], False))
    return sort_terms(out)


def sort_terms(terms) -> list:
    """By decreasing order, then by k."""
    return sorted(terms, key=lambda t: (-(t.k + t.l), -t.k, not t.is_log))


def residual(walk: WalkSpec, terms, K: int) -> list:
    """``(D_1 + ... + D_K)`` applied to ``terms``, keeping orders >= -K."""
    if K < 2:
        raise ValueError("K must be >= 2")
    src = terms if isinstance(terms, dict) else terms_to_dict(terms)
    total: dict = {}
    for n in range(1, K + 1):
        image = taylor_operator(walk, n).apply(src)
        for key, c in image.items():
            if key[0] + key[1] < -K:
                continue
            total[key] = total[key] + c if key in total else c
    total = {k: c for k, c in total.items() if not _is_zero(c)}
    return terms_from_dict(total)
