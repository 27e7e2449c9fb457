"""Asymptotic expansion of the potential kernel by the differential approach.

The kernel is written as

    a(z) = alpha log(z zbar) + lambda + sum beta_kl z^k zbar^l,   k + l < 0,

and the beta's are found level by level (level m collects k + l = -m).
Away from the origin, sum_n D_n a = 0 for the Taylor operators D_n of
the walk Laplacian E f(z + R) - f(z).  At level m the D_2 = mu11 dz dzbar part
acts on the unknown beta's and everything else is known, so

    beta_{k+1,l+1} = -delta_{kl} / (mu11 (k+1) (l+1)).

Harmonic monomials z^-m, zbar^-m are killed by dz dzbar and stay free.
They are carried as extra linear "columns": each free slot is seeded with
a unit coefficient and pushed through the same recursion, so the final
expansion is ``base + sum_s v_s column_s`` for slot values v_s fixed later
from exact diagonal values (simple walk) or a numeric fit.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction

import mpmath
import numpy as np

from .exact_values import odd_harmonic_asymptotics
from .laplacian import LOG, taylor_operator, terms_from_dict
from .scalar import (ExactComplex, FieldElement, PiGraded, SymbolicConstant,
                     rational_reconstruct)
from .walk import (WalkSpec, is_conjugation_symmetric, is_reversible, is_spherical,
                   lattice_volume, load_walk, moment, rotational_symmetry_order)

log = logging.getLogger(__name__)

DEFAULT_RADII = (40, 56, 80, 113, 160)
HOLDOUT_RADII = (47, 67, 95, 134)
DEFAULT_RAY_COUNT = 16
FIT_ORACLE_PRECISION = 128  # bits; Fourier values are then good to ~1e-37


class ExpansionError(ValueError):
    pass


def _is_zero(c) -> bool:
    return c.is_zero() if hasattr(c, "is_zero") else c == 0


def _add_into(out: dict, key, val):
    if key in out:
        val = out[key] + val
    if _is_zero(val):
        out.pop(key, None)
    else:
        out[key] = val


@dataclass
class FitReport:
    """Diagnostics of a numeric harmonic fit."""

    points: int
    residual: object
    holdout_residual: object
    reconstructed: dict = field(default_factory=dict)  # slot -> PiGraded
    floats: dict = field(default_factory=dict)  # slot -> mpf
    failures: list = field(default_factory=list)


@dataclass
class Expansion:
    walk: WalkSpec
    order: int
    alpha: PiGraded
    terms: dict  # (k, l) -> PiGraded, exact part
    slots: dict = field(default_factory=dict)  # unresolved slot -> {(k, l): ExactComplex}
    numeric_terms: dict = field(default_factory=dict)  # (k, l) -> mpc from float slots
    slot_values: dict = field(default_factory=dict)  # resolved slot -> PiGraded | mpf
    lam: object = None  # SymbolicConstant or mpf
    lam_error: object = None
    fit: FitReport | None = None

    @property
    def is_resolved(self) -> bool:
        return not self.slots

    @property
    def is_exact(self) -> bool:
        return self.is_resolved and not self.numeric_terms

    def coefficient(self, k: int, l: int):
        """beta_kl: PiGraded when exact, mpc when a fitted float contributes."""
        exact = self.terms.get((k, l), PiGraded(0))
        if (k, l) in self.numeric_terms:
            return exact.numeric(256) + self.numeric_terms[(k, l)]
        return exact

    def keys(self) -> set:
        return set(self.terms) | set(self.numeric_terms)

    def term_list(self) -> list:
        """Exact part as :class:`Term` objects, log term first."""
        d = dict(self.terms)
        d[LOG] = self.alpha
        return terms_from_dict(d)

    def resolve(self, values: dict, lam=None, lam_error=None) -> "Expansion":
        """Substitute slot values (PiGraded exact, or real floats)."""
        terms = dict(self.terms)
        numeric = dict(self.numeric_terms)
        slots = dict(self.slots)
        resolved = dict(self.slot_values)
        for slot, value in values.items():
            column = slots.pop(slot)
            resolved[slot] = value
            for key, c in column.items():
                if isinstance(value, PiGraded):
                    _add_into(terms, key, value * c)
                else:
                    _add_into(numeric, key, mpmath.mpf(value) * c.to_mpc())
        return replace(self, terms=terms, slots=slots, numeric_terms=numeric,
                       slot_values=resolved,
                       lam=self.lam if lam is None else lam,
                       lam_error=self.lam_error if lam_error is None else lam_error)

    def truncated(self, K: int) -> "Expansion":
        """Drop every term below order -K (and unresolved slots above level K)."""
        keep = lambda key: key[0] + key[1] >= -K  # noqa: E731
        slots = {s: {k: c for k, c in col.items() if keep(k)}
                 for s, col in self.slots.items() if s[0] <= K}
        return replace(self, order=min(K, self.order),
                       terms={k: c for k, c in self.terms.items() if keep(k)},
                       numeric_terms={k: c for k, c in self.numeric_terms.items() if keep(k)},
                       slots=slots,
                       slot_values={s: v for s, v in self.slot_values.items() if s[0] <= K})


def harmonic_slots(walk: WalkSpec, K: int) -> list:
    """Free harmonic slots ``(level, 're'|'im')`` up to level K."""
    q = rotational_symmetry_order(walk)
    parts = ("re",) if is_conjugation_symmetric(walk) else ("re", "im")
    return [(m, part) for m in range(1, K + 1) if m % q == 0 for part in parts]


def _slot_seed(slot) -> dict:
    m, part = slot
    if part == "re":
        return {(0, -m): ExactComplex(1), (-m, 0): ExactComplex(1)}
    return {(0, -m): ExactComplex(0, 1), (-m, 0): ExactComplex(0, -1)}


def _run_column(ops: dict, mu11, levels: dict, K: int, seed_level: int | None = None,
                seed: dict | None = None) -> dict:
    """Fill levels 1..K of one column in place; ``levels[0]`` may hold the log term."""
    for m in range(1, K + 1):
        delta: dict = {}
        for n in range(3, m + 3):
            src = levels.get(m + 2 - n)
            if src:
                for key, c in ops[n].apply(src).items():
                    _add_into(delta, key, c)
        level: dict = {}
        for (k1, l1), c in delta.items():
            if k1 == -1 or l1 == -1:
                raise ExpansionError(
                    f"level {m}: source term z^{k1} zbar^{l1} has no preimage under dz dzbar")
            k, l = k1 + 1, l1 + 1
            level[(k, l)] = -c / (mu11 * (k * l))
        if m == seed_level:
            for key, c in seed.items():
                _add_into(level, key, c)
        levels[m] = level
    return levels


def solve_expansion(walk, K: int) -> Expansion:
    """Order-K expansion with harmonic slots left unresolved."""
    walk = load_walk(walk)
    if K < 2:
        raise ExpansionError("order K must be >= 2")
    if not is_spherical(walk):
        raise ExpansionError(f"walk {walk.name!r} is not spherical")
    mu11 = moment(walk, 1, 1)
    if mu11.is_zero():
        raise ExpansionError("D_2 is not invertible")
    # flux through a large circle: 2 pi mu11 * (2 alpha) = vol(Z) * (total mass 1)
    alpha = PiGraded.over_pi(lattice_volume(walk) / mu11.re)
    ops = {n: taylor_operator(walk, n) for n in range(3, K + 3)}

    base = _run_column(ops, mu11, {0: {LOG: alpha}}, K)
    terms: dict = {}
    for m in range(1, K + 1):
        for key, c in base[m].items():
            _add_into(terms, key, c)

    columns = {}
    for slot in harmonic_slots(walk, K):
        levels = _run_column(ops, mu11, {}, K, slot[0], _slot_seed(slot))
        col: dict = {}
        for m in range(1, K + 1):
            for key, c in levels[m].items():
                _add_into(col, key, c)
        columns[slot] = col
    return Expansion(walk, K, alpha, terms, columns)


# ---------------------------------------------------------------- evaluation

def _polar(z, precision):
    with mpmath.workprec(precision + 20):
        if isinstance(z, ExactComplex):
            z = z.to_mpc()
        z = mpmath.mpc(z)
        return abs(z), mpmath.arg(z)


def _monomial(r, theta, k, l):
    """z^k zbar^l = r^(k+l) e^{i (k-l) theta}."""
    return r ** (k + l) * mpmath.expj((k - l) * theta)


def _numeric_coeffs(terms: dict, precision: int) -> dict:
    out = {}
    for key, c in terms.items():
        out[key] = c.numeric(precision) if isinstance(c, PiGraded) else (
            c.to_mpc() if isinstance(c, ExactComplex) else mpmath.mpc(c))
    return out


def _sum_terms(coeffs: dict, r, theta):
    total = mpmath.mpc(0)
    for (k, l), c in coeffs.items():
        total += c * _monomial(r, theta, k, l)
    return total


def _lambda_value(lam, precision):
    if lam is None:
        raise ExpansionError("expansion has no additive constant; resolve it first")
    if isinstance(lam, SymbolicConstant):
        return lam.numeric(precision)
    return mpmath.mpf(lam)


def evaluate(expansion: Expansion, z, precision: int = 256):
    """alpha log(z zbar) + lambda + sum beta_kl z^k zbar^l (real part)."""
    if not expansion.is_resolved:
        raise ExpansionError("expansion has unresolved harmonic slots")
    with mpmath.workprec(precision + 20):
        r, theta = _polar(z, precision)
        if r == 0:
            raise ExpansionError("cannot evaluate at z = 0")
        val = expansion.alpha.numeric(precision + 20).real * 2 * mpmath.log(r)
        val += _lambda_value(expansion.lam, precision + 20)
        val += _sum_terms(_numeric_coeffs(expansion.terms, precision + 20), r, theta).real
        val += _sum_terms(expansion.numeric_terms, r, theta).real
    with mpmath.workprec(precision):
        return +val


# ------------------------------------------------------------ real form

@dataclass(frozen=True)
class RealFormEntry:
    """``coefficient * Re(z^l / |z|^k)``."""

    l: int
    k: int
    coefficient: object  # PiGraded (real) or mpf

    @property
    def order(self) -> int:
        return self.l - self.k


def to_real_form(expansion: Expansion) -> list:
    """Pairs beta_kl, beta_lk (k > l) as alpha Re(z^(k-l) / |z|^(-2l))."""
    out = []
    for key in sorted(expansion.keys()):
        k, l = key
        if k == l:
            raise ExpansionError(f"diagonal term beta_{k}{l} has no real-form entry")
        if k < l:
            continue
        b = expansion.coefficient(k, l)
        partner = expansion.coefficient(l, k)
        if isinstance(b, PiGraded) and isinstance(partner, PiGraded):
            if partner != b.conjugate():
                raise ExpansionError(f"beta_{k},{l} and beta_{l},{k} are not conjugate")
            if not b.is_real():
                raise ExpansionError(f"complex real-form coefficient at ({k}, {l})")
            coeff = b * 2
        else:
            b, partner = mpmath.mpc(_to_num(b)), mpmath.mpc(_to_num(partner))
            scale = max(abs(b), mpmath.mpf(10) ** -60)
            if abs(partner - mpmath.conj(b)) > scale * mpmath.mpf(10) ** -20 or abs(b.imag) > scale * mpmath.mpf(10) ** -20:
                raise ExpansionError(f"numeric coefficient at ({k}, {l}) is not conjugate-real")
            coeff = 2 * b.real
        out.append(RealFormEntry(k - l, -2 * l, coeff))
    out.sort(key=lambda e: (-e.order, e.l))
    return out


def _to_num(c):
    return c.numeric(256) if isinstance(c, PiGraded) else c


# ----------------------------------------------------- structural checks

def check_klhalf(expansion: Expansion) -> bool:
    """No term with both exponents negative."""
    return not any(k < 0 and l < 0 for k, l in expansion.keys())


def check_degree_bounds(expansion: Expansion, reversible: bool) -> bool:
    """Real-form denominators at order -k obey |z|^e with e <= 4k (3k if D_3 = 0)."""
    slope = 3 if reversible else 4
    try:
        table = to_real_form(expansion)
    except ExpansionError:
        return False
    return _degree_ok(table, slope)


def _degree_ok(table, slope) -> bool:
    d = 2
    return all(e.k <= slope * (-e.order) + 2 - d for e in table)


def check_parity(expansion: Expansion, reversible: bool) -> bool:
    """Reversible walks carry only even orders; vacuous otherwise."""
    if not reversible:
        return True
    return all((k + l) % 2 == 0 for k, l in expansion.keys())


def structural_checks(expansion: Expansion) -> dict:
    rev = is_reversible(expansion.walk)
    return {
        "klhalf": check_klhalf(expansion),
        "degree": check_degree_bounds(expansion, rev),
        "parity": check_parity(expansion, rev),
    }


# ------------------------------------------- exact harmonic fix on Z^2

def is_simple_z2(walk: WalkSpec) -> bool:
    if walk.d != 1:
        return False
    expected = {(1, 0), (-1, 0), (0, 1), (0, -1)}
    vecs = {(int(v.re.a), int(v.im.a)) for v in walk.vectors}
    return vecs == expected and all(p == Fraction(1, 4) for p in walk.probabilities) \
        and lattice_volume(walk) == FieldElement(1)


def fix_harmonic_exact_z2(expansion: Expansion) -> Expansion:
    """Resolve every slot and lambda from the exact diagonal values.

    On z = m(1+i) the potential is (4/pi) S(m) with S the odd harmonic sum,
    whose m^-j coefficients are known exactly.  Each level has one free slot
    (or none); matching coefficients of m^-j determines it.
    """
    walk = expansion.walk
    if not is_simple_z2(walk):
        raise ExpansionError("exact harmonic fixing needs the simple Z^2 walk")
    K = expansion.order
    series = odd_harmonic_asymptotics(K)
    one_plus_i = ExactComplex(1, 1)
    one_minus_i = ExactComplex(1, -1)

    def on_diagonal(col: dict, m: int):
        # sum over level m of c (1+i)^k (1-i)^l; the m^{k+l} factor is m^-level
        total = None
        for (k, l), c in col.items():
            if k + l != -m:
                continue
            v = c * (one_plus_i ** k) * (one_minus_i ** l)
            total = v if total is None else total + v
        return total

    if expansion.alpha != PiGraded.over_pi(Fraction(1)):
        raise ExpansionError(f"log coefficient {expansion.alpha} does not match the diagonal")
    values: dict = {}
    resolved = expansion
    for m in range(1, K + 1):
        target = PiGraded.over_pi(4 * series.coefficients[m])
        known = on_diagonal(resolved.terms, m)
        known = PiGraded(0) if known is None else known
        slots_here = [s for s in resolved.slots if s[0] == m]
        if not slots_here:
            if known != target:
                raise ExpansionError(f"diagonal mismatch at level {m}: {known} vs {target}")
            continue
        if len(slots_here) != 1:
            raise ExpansionError(f"level {m} has {len(slots_here)} free slots")
        slot = slots_here[0]
        coef = on_diagonal(resolved.slots[slot], m)
        if coef is None or coef.is_zero():
            raise ExpansionError(f"slot at level {m} is invisible on the diagonal")
        value = (target - known) / coef
        if not value.is_real():
            raise ExpansionError(f"non-real harmonic coefficient at level {m}")
        values[slot] = value
        # fold in now so later levels see it
        resolved = resolved.resolve({slot: value})
    # constant: alpha log 2 + lambda = (4/pi)(gamma/2 + log 2)
    const = (series.constant * 4).divided_by_pi()
    alpha_log2 = SymbolicConstant(0, 0, expansion.alpha.c1.re.a, over_pi=True)
    lam = const - alpha_log2
    return replace(resolved, lam=lam, lam_error=None)


# ------------------------------------------------------- numeric fit

def default_rays(count: int = DEFAULT_RAY_COUNT) -> list:
    return [mpmath.expj(2 * mpmath.pi * j / count) for j in range(count)]


def _symmetry_images(walk: WalkSpec, m: int, n: int) -> list:
    from .walk import _root_of_unity
    z = walk.point(m, n)
    q = rotational_symmetry_order(walk)
    zeta = _root_of_unity(q, walk.d) or ExactComplex(1)
    images = []
    w = z
    for _ in range(q):
        images.append(w)
        if is_conjugation_symmetric(walk):
            images.append(w.conjugate())
        w = w * zeta
    out = []
    for im in images:
        try:
            out.append(walk.coordinates(im))
        except ValueError:
            pass
    return out


def sample_points(walk: WalkSpec, radii, rays) -> list:
    """Lattice points nearest to r*u, deduplicated up to lattice symmetry."""
    e1, e2 = (complex(b) for b in walk.basis)
    det = e1.real * e2.imag - e1.imag * e2.real
    seen = set()
    out = []
    for r in radii:
        for u in rays:
            w = complex(u) * r
            s = (w.real * e2.imag - w.imag * e2.real) / det
            t = (e1.real * w.imag - e1.imag * w.real) / det
            best = None
            for ds in (0, 1):
                for dt in (0, 1):
                    cand = (int(s) + ds - (s < 0), int(t) + dt - (t < 0))
                    dist = abs(e1 * cand[0] + e2 * cand[1] - w)
                    if best is None or dist < best[0]:
                        best = (dist, cand)
            cand = best[1]
            canon = min(_symmetry_images(walk, *cand))
            if canon not in seen:
                seen.add(canon)
                out.append(cand)
    return out


def harmonic_unit(walk: WalkSpec) -> FieldElement:
    """Expected irrational factor of harmonic coefficients (times 1/pi)."""
    vol = lattice_volume(walk)
    return FieldElement(0, 1, walk.d) if vol.b else FieldElement(1)


def _least_squares(rows, rhs, precision):
    """Column-scaled least squares in mpmath; returns (solution, residual vector)."""
    with mpmath.workprec(precision):
        A = mpmath.matrix(rows)
        b = mpmath.matrix(rhs)
        ncol = A.cols
        scale = []
        for j in range(ncol):
            s = max(abs(A[i, j]) for i in range(A.rows)) or mpmath.mpf(1)
            scale.append(s)
            for i in range(A.rows):
                A[i, j] /= s
        x, _ = mpmath.qr_solve(A, b)
        sol = [x[j] / scale[j] for j in range(ncol)]
        res = [b[i] - sum(A[i, j] * x[j] for j in range(ncol)) for i in range(A.rows)]
    return sol, res


def fit_harmonic_numeric(expansion: Expansion, oracle, radii=DEFAULT_RADII, rays=None,
                         max_denominator: int = 10 ** 4, target_order: int | None = None,
                         holdout_radii=HOLDOUT_RADII, precision: int = 200) -> Expansion:
    """Fix lambda and the harmonic slots by least squares against ``oracle``.

    ``oracle(m, n)`` returns a(m e1 + n e2) as an mpf.  Slots up to
    ``target_order`` are reconstructed as rationals times the walk's unit
    over pi, lowest level first; each accepted value is frozen and the rest
    refitted.  A candidate is accepted only if the held-out residual does
    not degrade.  The remaining slots stay as floats.
    """
    walk = expansion.walk
    target_order = expansion.order if target_order is None else target_order
    rays = default_rays() if rays is None else rays
    fit_pts = sample_points(walk, radii, rays)
    hold_pts = sample_points(walk, holdout_radii, rays)
    slots = sorted(expansion.slots)
    unit = harmonic_unit(walk)

    with mpmath.workprec(precision):
        base_coeffs = _numeric_coeffs(expansion.terms, precision)
        col_coeffs = {s: _numeric_coeffs(expansion.slots[s], precision) for s in slots}
        alpha2 = 2 * expansion.alpha.numeric(precision).real

        def design(points):
            rows, rhs = [], []
            for m, n in points:
                r, theta = _polar(walk.point(m, n), precision)
                target = mpmath.mpf(oracle(m, n))
                known = alpha2 * mpmath.log(r) + _sum_terms(base_coeffs, r, theta).real
                rows.append([_sum_terms(col_coeffs[s], r, theta).real for s in slots])
                rhs.append(target - known)
            return rows, rhs

        fit_rows, fit_rhs = design(fit_pts)
        hold_rows, hold_rhs = design(hold_pts)

        def solve(fixed: dict):
            free = [i for i, s in enumerate(slots) if s not in fixed]
            rows = [[mpmath.mpf(1)] + [row[i] for i in free] for row in fit_rows]
            rhs = [b - sum(row[i] * fixed[slots[i]] for i in range(len(slots)) if slots[i] in fixed)
                   for row, b in zip(fit_rows, fit_rhs)]
            sol, res = _least_squares(rows, rhs, precision)
            vals = dict(fixed)
            for j, i in enumerate(free):
                vals[slots[i]] = sol[j + 1]
            lam = sol[0]
            hold = max((abs(b - lam - sum(row[i] * vals[s] for i, s in enumerate(slots))))
                       for row, b in zip(hold_rows, hold_rhs))
            return lam, vals, max(abs(x) for x in res), hold

        fixed_num: dict = {}
        exact: dict = {}
        failures = []
        lam, vals, res, hold = solve(fixed_num)
        unit_num = unit.to_mpf() / mpmath.pi
        for slot in slots:
            if slot[0] > target_order:
                break
            q = rational_reconstruct(vals[slot] / unit_num, max_denominator)
            if q is None:
                failures.append(slot)
                log.info("slot %s: no rational with denominator <= %d", slot, max_denominator)
                continue
            cand = PiGraded.over_pi(unit * q)
            trial = dict(fixed_num)
            trial[slot] = cand.numeric(precision).real
            t_lam, t_vals, t_res, t_hold = solve(trial)
            if t_hold > 10 * hold + mpmath.mpf(10) ** (-precision // 4):
                failures.append(slot)
                log.info("slot %s: candidate %s rejected by held-out points", slot, cand)
                continue
            fixed_num, exact = trial, {**exact, slot: cand}
            lam, vals, res, hold = t_lam, t_vals, t_res, t_hold

    floats = {s: vals[s] for s in slots if s not in exact}
    report = FitReport(len(fit_pts), res, hold, exact, floats, failures)
    values = {**exact, **floats}
    out = expansion.resolve(values, lam=lam, lam_error=max(res, hold))
    out.fit = report
    return out


def oracle_for(walk: WalkSpec, precision: int = FIT_ORACLE_PRECISION):
    """Default high-precision oracle used by the fit (Fourier integral)."""
    from .oracle import potential_fourier

    cache: dict = {}

    def a(m, n):
        if (m, n) not in cache:
            cache[(m, n)] = potential_fourier(walk, (m, n), precision=precision).numeric
        return cache[(m, n)]

    return a


def fitted_expansion(walk, K: int, oracle=None, extra_order: int = 24, **kwargs) -> Expansion:
    """Solve to order K + extra_order, fit the harmonic slots, truncate to K."""
    walk = load_walk(walk)
    model = solve_expansion(walk, K + extra_order)
    if oracle is None:
        oracle = oracle_for(walk)
    fitted = fit_harmonic_numeric(model, oracle, target_order=K, **kwargs)
    out = fitted.truncated(K)
    out.fit = fitted.fit
    return out


def exact_expansion_z2(K: int) -> Expansion:
    return fix_harmonic_exact_z2(solve_expansion(load_walk("z2-simple"), K))


def real_form_terms(expansion: Expansion) -> list:
    """Exact part as Term objects (for residual checks)."""
    return [t for t in expansion.term_list()]


@dataclass
class DecayProfile:
    direction: tuple
    radii: list
    errors: list
    slope: float


def diagonal_direction(walk: WalkSpec) -> tuple:
    """Lattice coordinates of the step along the diagonal ray.

    (1, 1) on square lattices (angle pi/4); on the triangular lattice
    2 + omega, which points along angle pi/6.
    """
    return (2, 1) if walk.d == 3 else (1, 1)


def decay_profile(expansion: Expansion, oracle, direction, radii,
                  precision: int = 256) -> DecayProfile:
    """|oracle - expansion| at the lattice points m*direction nearest each radius.

    The slope is the least-squares slope of log error against log |z|.
    """
    walk = expansion.walk
    step = abs(complex(walk.point(*direction)))
    used, errs = [], []
    for r in radii:
        m = max(1, round(r / step))
        z = (direction[0] * m, direction[1] * m)
        p = walk.point(*z)
        with mpmath.workprec(precision):
            err = abs(mpmath.mpf(oracle(*z)) - evaluate(expansion, p, precision))
        used.append(m * step)
        errs.append(err)
    x = np.log(np.array(used, dtype=float))
    y = np.log(np.array([float(max(e, mpmath.mpf(10) ** -300)) for e in errs]))
    slope = float(np.polyfit(x, y, 1)[0])
    return DecayProfile(tuple(direction), used, errs, slope)
