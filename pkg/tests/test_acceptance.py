"""The ten acceptance criteria, one test each, at their stated tolerances.

Each test records a pass/fail line that is printed in the terminal summary
(and immediately, when run with ``-s``).
"""
import contextlib
import io
import random
import time
from fractions import Fraction

import mpmath
import numpy as np
from hypothesis import given, settings, strategies as st

from conftest import ACCEPTANCE
from harmpot.cli import main, parse_structured
from harmpot.exact_values import PotentialTable, diagonal_value, error_constant_scan, mccrea_whipple
from harmpot.expansion import (Expansion, check_degree_bounds, check_klhalf, check_parity,
                               decay_profile, diagonal_direction, solve_expansion, structural_checks,
                               to_real_form)
from harmpot.oracle import (convolution_value, f_sum, local_clt, multinomial_clt_check,
                            potential_convolution_iterate, potential_direct_sum, potential_fourier,
                            step_distribution, theta_sum_check)
from harmpot.scalar import FieldElement, PiGraded, SymbolicConstant
from harmpot.walk import is_reversible, tau_constant

SQRT3 = FieldElement(0, 1, 3)

# published real-form tables: (l, k) -> coefficient of Re(z^l / |z|^k)
SIMPLE_TABLE = {(4, 6): Fraction(-1, 6), (4, 8): Fraction(-3, 20), (8, 12): Fraction(-5, 24),
                (8, 14): Fraction(-51, 56), (12, 18): Fraction(-35, 36), (8, 16): Fraction(-217, 160),
                (12, 20): Fraction(-45, 4), (16, 24): Fraction(-1925, 192)}
KING_TABLE = {(4, 6): Fraction(1, 9), (4, 8): Fraction(11, 90), (8, 12): Fraction(-5, 36),
              (8, 14): Fraction(-167, 252), (12, 18): Fraction(35, 54), (8, 16): Fraction(-1673, 2160),
              (12, 20): Fraction(15, 2), (16, 24): Fraction(-1925, 288)}
# multiples of sqrt(3)/pi, all printed with a plus sign
TRI_TABLE = {(3, 4): Fraction(1, 6), (6, 8): Fraction(1, 12), (3, 6): Fraction(1, 18),
             (9, 12): Fraction(5, 54), (6, 10): Fraction(17, 135), (12, 16): Fraction(35, 216),
             (9, 14): Fraction(19, 54), (15, 20): Fraction(7, 18), (6, 12): Fraction(85, 1134),
             (12, 18): Fraction(98, 81), (18, 24): Fraction(385, 324)}


def record(n: int, ok: bool, detail: str):
    ACCEPTANCE[n] = (ok, detail)
    print(f"\ncriterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def table_of(expansion) -> dict:
    return {(e.l, e.k): e.coefficient for e in to_real_form(expansion)}


def compare(table: dict, published: dict, unit) -> list:
    """Entries of ``published`` not reproduced exactly: (key, expected, got)."""
    bad = []
    for key, q in published.items():
        want = PiGraded.over_pi(unit * q)
        got = table.get(key)
        if got != want:
            bad.append((key, want, got))
    return bad


# ---------------------------------------------------------------------- 1

def test_criterion_1_simple_table():
    t0 = time.perf_counter()
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(["expand", "z2-simple", "--order", "9", "--format", "structured"])
    elapsed = time.perf_counter() - t0
    report = parse_structured(out.getvalue())
    table = {(t["l"], t["k"]): t["coefficient"] for t in report["terms"]}
    bad = compare(table, SIMPLE_TABLE, FieldElement(1))
    lam_ok = report["lambda"]["exact"] == SymbolicConstant(0, 2, 3)
    ok = code == 0 and not bad and lam_ok and elapsed <= 60
    record(1, ok, f"8/8 coefficients exact={not bad}, lambda=(2g+log 8)/pi {lam_ok}, "
                  f"{elapsed:.1f}s")


# ---------------------------------------------------------------------- 2

def test_criterion_2_king_table(king9):
    table = table_of(king9)
    bad = compare(table, KING_TABLE, FieldElement(1))
    # non-harmonic coefficients come from the recursion alone
    recursion = solve_expansion(king9.walk, 9).terms
    nonharm_ok = all(king9.terms[key] == c for key, c in recursion.items()
                     if not any(key in col for col in solve_expansion(king9.walk, 9).slots.values()))
    recon = king9.fit.reconstructed
    dens_ok = all(v.c1.re.a.denominator <= 10 ** 4 for v in recon.values()) and recon
    fit_ok = king9.fit.residual < 1e-10 and not king9.fit.failures
    ok = not bad and nonharm_ok and bool(dens_ok) and fit_ok
    record(2, ok, f"{8 - len(bad)}/8 published coefficients exact; harmonic slots "
                  f"{ {s[0]: str(v) for s, v in recon.items()} }; fit residual "
                  f"{mpmath.nstr(king9.fit.residual, 3)}")


# ---------------------------------------------------------------------- 3

def test_criterion_3_triangular_table(tri9):
    table = table_of(tri9)
    bad = compare(table, TRI_TABLE, SQRT3)
    odd = any((key[0] + key[1]) % 2 for key in tri9.keys())
    fit_ok = tri9.fit.residual < 1e-10 and not tri9.fit.failures
    magnitudes = all(table.get(key) in (PiGraded.over_pi(SQRT3 * q), PiGraded.over_pi(-SQRT3 * q))
                     for key, q in TRI_TABLE.items())
    detail = (f"{11 - len(bad)}/11 published coefficients exact (all 11 magnitudes match: "
              f"{magnitudes}); odd orders present {odd}")
    if bad:
        detail += "; differing: " + ", ".join(f"Re z^{l}/|z|^{k}: want {w} got {g}"
                                              for (l, k), w, g in bad)
    record(3, not bad and odd and fit_ok, detail)


# ---------------------------------------------------------------------- 4

def test_criterion_4_exact_values():
    table = PotentialTable().fill(60)
    diag_ok = all(mccrea_whipple(m, m, table).exact == diagonal_value(m).exact
                  == (0, 4 * sum((Fraction(1, 2 * j - 1) for j in range(1, m + 1)), Fraction(0)))
                  for m in range(51))
    lap_ok = True
    for x in range(-30, 31):
        for y in range(-30, 31):
            c = table.get(x, y).exact
            nb = [table.get(x + dx, y + dy).exact for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))]
            lap = (sum(v[0] for v in nb) / 4 - c[0], sum(v[1] for v in nb) / 4 - c[1])
            lap_ok = lap_ok and lap == ((1, 0) if (x, y) == (0, 0) else (0, 0))
    small = table.get(1, 1).exact == (0, 4) and table.get(1, 0).exact == (1, 0)
    record(4, diag_ok and lap_ok and small,
           f"diagonal m<=50 {diag_ok}; Laplacian on |x|,|y|<=30 {lap_ok}; a(1,1)=4/pi, a(1,0)=1 {small}")


# ---------------------------------------------------------------------- 5

def test_criterion_5_constant():
    t0 = time.perf_counter()
    scan = error_constant_scan(400)
    elapsed = time.perf_counter() - t0
    asym = 1 / (6 * mpmath.pi)
    ok = (scan.argmax == (3, 0) and abs(scan.value - 0.06882) <= 5e-5
          and abs(asym - 0.05305) <= 1e-5 and elapsed <= 600)
    record(5, ok, f"max at {scan.argmax}, value {mpmath.nstr(scan.value, 8)}; "
                  f"1/(6 pi) = {mpmath.nstr(asym, 8)}; {elapsed:.1f}s over {scan.points} points")


# ---------------------------------------------------------------------- 6

def test_criterion_6_tau(expansions):
    expected = {"z2-simple": PiGraded.over_pi(2), "z2-king": PiGraded.over_pi(Fraction(4, 3)),
                "tri-directed": PiGraded.over_pi(SQRT3)}
    got = {name: (tau_constant(e.walk), e.alpha * 2) for name, e in expansions.items()}
    ok = all(t == a == expected[name] for name, (t, a) in got.items())
    record(6, ok, "; ".join(f"{name}: tau={t}, 2*alpha={a}" for name, (t, a) in got.items()))


# ---------------------------------------------------------------------- 7

def random_points(seed: int, count: int, rmax: int, walk) -> list:
    rng = random.Random(seed)
    pts = []
    while len(pts) < count:
        m, n = rng.randint(-rmax, rmax), rng.randint(-rmax, rmax)
        r = abs(complex(walk.point(m, n)))
        if 1 <= r <= rmax and (m, n) not in pts:
            pts.append((m, n))
    return pts


def test_criterion_7_oracles(walks):
    grid = potential_convolution_iterate(R=200, iterations=12)
    worst = {}
    for name, w in walks.items():
        diffs = []
        for z in random_points(7, 25, 40, w):
            vals = [potential_direct_sum(w, z).numeric, potential_fourier(w, z).numeric]
            if name == "z2-simple":
                vals.append(mpmath.mpf(convolution_value(grid, z)))
            diffs.append(max(abs(a - b) for a in vals for b in vals))
        worst[name] = float(max(diffs))
    table = PotentialTable().fill(40)
    simple = walks["z2-simple"]
    exact_err = max(float(abs(potential_fourier(simple, z).numeric - table.numeric(*z, precision=128)))
                    for z in random_points(11, 10, 40, simple))
    ok = all(v < 1e-6 for v in worst.values()) and exact_err < 1e-10
    record(7, ok, "max pairwise oracle difference at 25 points: "
                  + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
                  + f"; Fourier vs exact at 10 points {exact_err:.1e}")


# ---------------------------------------------------------------------- 8

@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(2, 9))
def test_criterion_8_klhalf_mutations(expansions, k, l, K):
    for e in expansions.values():
        cut = e.truncated(K)
        assert all(structural_checks(cut).values())
        terms = dict(cut.terms)
        terms[(-k, -l)] = PiGraded.over_pi(1)
        assert not check_klhalf(Expansion(cut.walk, K, cut.alpha, terms))


def test_criterion_8_structure(expansions):
    results = {}
    for name, e in expansions.items():
        rev = is_reversible(e.walk)
        results[name] = (check_klhalf(e), check_degree_bounds(e, rev), check_parity(e, rev))
    e = expansions["z2-simple"]
    mutated = dict(e.terms)
    mutated[(-1, -1)] = PiGraded(1)
    caught = not check_klhalf(Expansion(e.walk, e.order, e.alpha, mutated))
    ok = all(all(v) for v in results.values()) and caught
    record(8, ok, "; ".join(f"{n}: klhalf/degree/parity {v}" for n, v in results.items())
           + f"; beta_-1,-1 mutation rejected {caught}")


# ---------------------------------------------------------------------- 9

def test_criterion_9_lemmas():
    details = []
    scaled = []
    for r in (50, 100, 200, 400):
        direct, asym = f_sum(2, 1, 1, r)
        scaled.append(abs(direct - asym) * r ** 5)
    fsum_ok = all(b < a for a, b in zip(scaled, scaled[1:]))
    details.append(f"f_sum err*r^5 decreasing {fsum_ok}")
    s0, closed = theta_sum_check(np.eye(2), (0, 0), 100)
    s1, _ = theta_sum_check(np.eye(2), (0.37, -0.61), 100)
    theta_ok = abs(s1 - s0) / closed < 1e-10
    details.append(f"theta shift {abs(s1 - s0) / closed:.1e}")
    ex, clt = multinomial_clt_check([Fraction(1, 2)] * 2, 1000, [0, 0])
    multi = float(abs(clt / ex - 1))
    details.append(f"binomial CLT rel err {multi:.1e}")
    p = step_distribution("z2-simple", 100)[(0, 0)]
    p = mpmath.mpf(p.numerator) / p.denominator
    clt_err = float(abs(local_clt("z2-simple", 100, (0, 0)) / p - 1))
    details.append(f"local CLT rel err at n=100 {clt_err:.1e}")
    ok = fsum_ok and theta_ok and multi < 1e-3 and clt_err <= 0.02
    record(9, ok, "; ".join(details))


# --------------------------------------------------------------------- 10

def test_criterion_10_decay(expansions, oracles):
    radii = (20, 28, 40, 56, 80, 113, 160, 200)
    table = PotentialTable().fill(160)
    slopes = {}
    for name, e in expansions.items():
        if name == "z2-simple":
            def oracle(m, n):
                return table.numeric(m, n, precision=256)
        else:
            oracle = oracles[name]
        prof = decay_profile(e, oracle, diagonal_direction(e.walk), radii)
        slopes[name] = prof.slope
    ok = all(s <= -9.7 for s in slopes.values())
    record(10, ok, "diagonal log-log slopes over |z| in [20, 200]: "
                   + ", ".join(f"{k} {v:.2f}" for k, v in slopes.items()))
