"""Bounded, balanced random walks on 2-D lattices.

A walk is loaded from a small JSON document::

    {"name": "z2-simple", "sqrt_d": 1,
     "basis": [["1", "0"], ["0", "1"]],
     "steps": [{"p": "1/4", "vx": "1", "vy": "0"}, ...]}

Coordinates are field-element strings (see :func:`harmpot.scalar.parse_field`).
Bundled walks: ``z2-simple``, ``z2-king``, ``tri-directed`` and ``tri-six``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from math import comb
from pathlib import Path

import mpmath

from .scalar import ExactComplex, FieldElement, PiGraded, parse_field

BUNDLED = ("z2-simple", "z2-king", "tri-directed", "tri-six")


class WalkError(ValueError):
    """Raised when a walk specification violates an invariant."""


@dataclass(frozen=True)
class CorrelationMatrix:
    """``M_ij = E <R, e_i><R, e_j>`` in the standard basis."""

    xx: FieldElement
    xy: FieldElement
    yy: FieldElement

    @property
    def det(self) -> FieldElement:
        return self.xx * self.yy - self.xy * self.xy

    @property
    def trace(self) -> FieldElement:
        return self.xx + self.yy

    def is_scalar(self) -> bool:
        return self.xy.is_zero() and self.xx == self.yy and self.xx.sign() > 0

    def inverse_quadratic(self, x, y):
        """``<M^-1 v, v>`` for a numeric vector ``v = (x, y)``."""
        det = self.det.to_mpf()
        return (self.yy.to_mpf() * x * x - 2 * self.xy.to_mpf() * x * y
                + self.xx.to_mpf() * y * y) / det


@dataclass(frozen=True)
class WalkSpec:
    name: str
    steps: tuple  # ((ExactComplex, Fraction), ...)
    basis: tuple  # (ExactComplex, ExactComplex)
    d: int
    coords: tuple  # integer lattice coordinates of each step
    _moments: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __hash__(self):
        return hash((self.name, self.coords, tuple(p for _, p in self.steps)))

    @property
    def probabilities(self):
        return [p for _, p in self.steps]

    @property
    def vectors(self):
        return [v for v, _ in self.steps]

    def point(self, m: int, n: int) -> ExactComplex:
        """Lattice point ``m*e1 + n*e2``."""
        e1, e2 = self.basis
        return e1 * m + e2 * n

    def numeric_point(self, m: int, n: int):
        return complex(self.point(m, n))

    def coordinates(self, z: ExactComplex) -> tuple[int, int]:
        """Integer lattice coordinates of ``z``; WalkError if ``z`` is off-lattice."""
        e1, e2 = self.basis
        det = e1.re * e2.im - e1.im * e2.re
        s = (z.re * e2.im - z.im * e2.re) / det
        t = (e1.re * z.im - e1.im * z.re) / det
        if not (s.is_rational() and t.is_rational()
                and s.a.denominator == 1 and t.a.denominator == 1):
            raise WalkError(f"{z} is not in the declared lattice")
        return int(s.a), int(t.a)

    def reversed(self) -> "WalkSpec":
        """The time-reversed walk (every step negated)."""
        name = self.name if is_reversible(self) else self.name + "~reversed"
        return WalkSpec(name, tuple((-v, p) for v, p in self.steps), self.basis,
                        self.d, tuple((-s, -t) for s, t in self.coords))


def _parse_vec(pair, d):
    re_, im_ = pair
    return ExactComplex(parse_field(re_, d), parse_field(im_, d))


def validate_walk(raw) -> WalkSpec:
    """Check a raw (JSON-like) spec and return a normalized :class:`WalkSpec`."""
    try:
        d = int(raw.get("sqrt_d", 1))
        name = str(raw.get("name", "walk"))
        basis = tuple(_parse_vec(b, d) for b in raw["basis"])
        steps_raw = raw["steps"]
    except (KeyError, TypeError, ValueError) as exc:
        raise WalkError(f"malformed walk spec: {exc}") from exc
    if len(basis) != 2:
        raise WalkError("basis must contain two vectors")
    e1, e2 = basis
    if (e1.re * e2.im - e1.im * e2.re).is_zero():
        raise WalkError("degenerate lattice basis")

    steps = []
    for entry in steps_raw:
        p = Fraction(str(entry["p"]))
        v = ExactComplex(parse_field(entry["vx"], d), parse_field(entry["vy"], d))
        if p <= 0:
            raise WalkError("step probabilities must be positive")
        steps.append((v, p))
    if not steps:
        raise WalkError("empty step set")
    if sum(p for _, p in steps) != 1:
        raise WalkError("probabilities do not sum to 1")
    drift = sum((v * p for v, p in steps), ExactComplex(0, 0, d))
    if not drift.is_zero():
        raise WalkError(f"nonzero drift {drift}")

    proto = WalkSpec(name, tuple(steps), basis, d, ())
    coords = tuple(proto.coordinates(v) for v, _ in steps)
    rank = 0
    for i, (s1, t1) in enumerate(coords):
        for s2, t2 in coords[i + 1:]:
            if s1 * t2 - s2 * t1 != 0:
                rank = 2
                break
        if rank == 2:
            break
    if rank < 2:
        raise WalkError("degenerate step set: steps do not span a rank-2 lattice")
    return WalkSpec(name, tuple(steps), basis, d, coords)


def load_walk(source) -> WalkSpec:
    """Load a walk from a bundled name, a JSON path, or an already-parsed dict."""
    if isinstance(source, WalkSpec):
        return source
    if isinstance(source, dict):
        return validate_walk(source)
    text = str(source)
    if text in BUNDLED:
        raw = json.loads(resources.files("harmpot").joinpath("walks", f"{text}.json").read_text())
    else:
        raw = json.loads(Path(text).read_text(encoding="utf-8"))
    return validate_walk(raw)


def moment(walk: WalkSpec, a: int, b: int) -> ExactComplex:
    """``mu_{a,b} = sum_i p_i v_i^a conj(v_i)^b`` (cached on the walk)."""
    if a < 0 or b < 0:
        raise ValueError("moment orders must be nonnegative")
    key = (a, b)
    cache = walk._moments
    if key not in cache:
        total = ExactComplex(0, 0, walk.d)
        for v, p in walk.steps:
            total = total + (v ** a) * (v.conjugate() ** b) * p
        cache[key] = total
    return cache[key]


def is_spherical(walk: WalkSpec) -> bool:
    return moment(walk, 2, 0).is_zero() and moment(walk, 1, 1).re.sign() > 0


def is_reversible(walk: WalkSpec) -> bool:
    """Step distribution invariant under ``v -> -v``."""
    table = {v: p for v, p in walk.steps}
    return all(table.get(-v) == p for v, p in walk.steps)


def is_conjugation_symmetric(walk: WalkSpec) -> bool:
    """Step distribution invariant under complex conjugation."""
    table = {v: p for v, p in walk.steps}
    return all(table.get(v.conjugate()) == p for v, p in walk.steps)


def correlation_matrix(walk: WalkSpec) -> CorrelationMatrix:
    xx = sum((v.re * v.re * p for v, p in walk.steps), FieldElement(0, 0, walk.d))
    xy = sum((v.re * v.im * p for v, p in walk.steps), FieldElement(0, 0, walk.d))
    yy = sum((v.im * v.im * p for v, p in walk.steps), FieldElement(0, 0, walk.d))
    return CorrelationMatrix(xx, xy, yy)


def _root_of_unity(q: int, d: int):
    half = Fraction(1, 2)
    if q == 1:
        return ExactComplex(1, 0)
    if q == 2:
        return ExactComplex(-1, 0)
    if q == 4:
        return ExactComplex(0, 1)
    if q in (3, 6) and d == 3:
        re_ = -half if q == 3 else half
        return ExactComplex(FieldElement(re_, 0, 3), FieldElement(0, half, 3))
    return None


def rotational_symmetry_order(walk: WalkSpec) -> int:
    """Largest q such that rotation by 2*pi/q permutes the steps preserving p."""
    table = {v: p for v, p in walk.steps}
    for q in (6, 4, 3, 2):
        zeta = _root_of_unity(q, walk.d)
        if zeta is None:
            continue
        if all(table.get(v * zeta) == p for v, p in walk.steps):
            return q
    return 1


def lattice_volume(walk: WalkSpec) -> FieldElement:
    e1, e2 = walk.basis
    return abs(e1.re * e2.im - e1.im * e2.re)


def tau_constant(walk: WalkSpec) -> PiGraded:
    """Coefficient of ``log|z|``: ``2 vol Z / (2 pi sqrt(det M))``."""
    det = correlation_matrix(walk).det
    root = det.sqrt()
    if root is None:
        raise WalkError(f"det M = {det} has no exact square root in Q(sqrt {walk.d})")
    return PiGraded.over_pi(lattice_volume(walk) / root)


def taylor_coefficients(walk: WalkSpec, n: int) -> dict:
    """``{(m, n-m): C(n,m) mu_{m,n-m} / n!}`` -- the symbol of the n-th Taylor operator."""
    out = {}
    fact = Fraction(1)
    for k in range(2, n + 1):
        fact *= k
    for m in range(n + 1):
        c = moment(walk, m, n - m) * Fraction(comb(n, m)) / fact
        if not c.is_zero():
            out[(m, n - m)] = c
    return out


def characteristic(walk: WalkSpec, theta1, theta2):
    """``E exp(i <theta, coords>)`` with theta in dual lattice coordinates."""
    total = 0
    for (s, t), p in zip(walk.coords, walk.probabilities):
        total += (mpmath.mpf(p.numerator) / p.denominator) * mpmath.expj(s * theta1 + t * theta2)
    return total
