"""Independent numerical evaluations of the potential kernel, plus checks of
the local limit estimates the direct approach rests on.

Convention: ``a`` is the kernel with ``E a(z + R) - a(z) = delta_0(z)``,

    a(z) = sum_n P_n(0) - P_n(-z),

which is the textbook ``sum P_n(0) - P_n(z)`` for reversible walks.  With
dual coordinates ``theta`` against the lattice coordinates of ``z``,

    a(z) = (2 pi)^-2 int (1 - e^{i <theta, z>}) / (1 - phi(theta)) dtheta.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, gcd

import mpmath
import numpy as np
from scipy import signal, stats

from .exact_values import PotentialValue
from .scalar import ExactComplex
from .walk import (WalkError, WalkSpec, correlation_matrix, is_reversible, lattice_volume,
                   load_walk)

log = logging.getLogger(__name__)

SUPPORT_BUDGET = 10 ** 6


class OracleError(RuntimeError):
    pass


def _coords(walk: WalkSpec, z) -> tuple[int, int]:
    if isinstance(z, ExactComplex):
        return walk.coordinates(z)
    m, n = z
    return int(m), int(n)


# ------------------------------------------------------ exact P_n

@dataclass(frozen=True)
class StepDistribution:
    n: int
    probs: dict  # (m, n) lattice coordinates -> Fraction

    def __getitem__(self, z):
        return self.probs.get(tuple(z), Fraction(0))

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))

    def support(self) -> set:
        return set(self.probs)


def _integer_weights(walk: WalkSpec):
    den = 1
    for p in walk.probabilities:
        den = den * p.denominator // gcd(den, p.denominator)
    return [int(p * den) for p in walk.probabilities], den


def step_distribution(walk, n: int) -> StepDistribution:
    """Exact n-step distribution by repeated convolution with integer weights."""
    walk = load_walk(walk)
    if n < 0:
        raise ValueError("n must be >= 0")
    reach = max(max(abs(s), abs(t)) for s, t in walk.coords)
    R = n * reach
    if (2 * R + 1) ** 2 > SUPPORT_BUDGET:
        raise OracleError(f"support of P_{n} exceeds the budget of {SUPPORT_BUDGET} points")
    weights, den = _integer_weights(walk)
    grid = np.zeros((2 * R + 1, 2 * R + 1), dtype=object)
    grid[:] = 0
    grid[R, R] = 1
    for step in range(n):
        new = np.zeros_like(grid)
        new[:] = 0
        for (s, t), w in zip(walk.coords, weights):
            # shift by (s, t): new[x+s, y+t] += w * grid[x, y]
            xs = slice(max(0, s), 2 * R + 1 + min(0, s))
            xd = slice(max(0, -s), 2 * R + 1 + min(0, -s))
            ys = slice(max(0, t), 2 * R + 1 + min(0, t))
            yd = slice(max(0, -t), 2 * R + 1 + min(0, -t))
            new[xs, ys] += grid[xd, yd] * w
        grid = new
    total = den ** n
    probs = {}
    for i, j in zip(*np.nonzero(grid != 0)):
        probs[(int(i) - R, int(j) - R)] = Fraction(int(grid[i, j]), total)
    return StepDistribution(n, probs)


# -------------------------------------------------- reachability Y

@dataclass(frozen=True)
class Reachability:
    """(n, z) is in Y iff n = rho(z) mod period; rho is linear in coordinates."""

    period: int
    rho: tuple  # (rho(e1), rho(e2)) mod period

    def contains(self, n: int, z) -> bool:
        m, k = z
        return (n - self.rho[0] * m - self.rho[1] * k) % self.period == 0

    def residue(self, z) -> int:
        m, k = z
        return (self.rho[0] * m + self.rho[1] * k) % self.period


def reachability(walk, max_steps: int = 8) -> Reachability:
    """Detect the space-time sublattice from the supports of P_n, n <= max_steps."""
    walk = load_walk(walk)
    supports = {n: step_distribution(walk, n).support() for n in range(1, max_steps + 1)}
    period = 0
    for n, supp in supports.items():
        if (0, 0) in supp:
            period = gcd(period, n)
    if period == 0:
        raise OracleError("no return to the origin within the probe window")
    for r1 in range(period):
        for r2 in range(period):
            cand = Reachability(period, (r1, r2))
            if all(cand.contains(n, z) for n, supp in supports.items() for z in supp):
                return cand
    raise OracleError("supports are not described by a linear residue map")


def tau_prime(walk, reach: Reachability | None = None):
    """vol(Y cap Z) / (2 pi sqrt(det M))."""
    walk = load_walk(walk)
    reach = reach or reachability(walk)
    det = correlation_matrix(walk).det.to_mpf()
    return reach.period * lattice_volume(walk).to_mpf() / (2 * mpmath.pi * mpmath.sqrt(det))


def gaussian_exponent(walk: WalkSpec, z):
    """B(z) = <M^-1 z, z> / 2 for z given in lattice coordinates."""
    p = walk.point(*z)
    return correlation_matrix(walk).inverse_quadratic(p.re.to_mpf(), p.im.to_mpf()) / 2


def local_clt(walk, n: int, z, reach: Reachability | None = None):
    """Leading local-limit approximation tau' n^-1 exp(-B(z)/n) on Y, else 0."""
    walk = load_walk(walk)
    z = _coords(walk, z)
    reach = reach or reachability(walk)
    if n <= 0 or not reach.contains(n, z):
        return mpmath.mpf(0)
    return tau_prime(walk, reach) / n * mpmath.exp(-gaussian_exponent(walk, z) / n)


# ---------------------------------------------------- Fourier oracle

def _laurent_in_w(walk: WalkSpec, inner: int):
    """Group steps by their exponent along the inner dual coordinate."""
    groups: dict = {}
    for (s, t), p in zip(walk.coords, walk.probabilities):
        outer_c, inner_c = (s, t) if inner == 1 else (t, s)
        groups.setdefault(inner_c, []).append((outer_c, p))
    return groups


def _inner_coefficients(groups, theta, powers):
    """Laurent coefficients [w^p] of 1 / (1 - phi) on |w| = 1 for each p in ``powers``.

    1 - phi = sum_t c_t w^t; multiply by w^T to get a polynomial and expand
    its reciprocal by partial fractions over the roots.
    """
    lo = min(groups)
    hi = max(groups)
    T = -lo
    coeffs = [mpmath.mpc(0)] * (hi - lo + 1)
    for t, items in groups.items():
        c = -sum(mpmath.mpf(p.numerator) / p.denominator * mpmath.expj(o * theta) for o, p in items)
        coeffs[t - lo] += c
    coeffs[T] += 1  # the identity
    poly = list(reversed(coeffs))  # highest degree first
    deg = len(poly) - 1
    if deg == 2:
        a2, a1, a0 = poly
        disc = mpmath.sqrt(a1 * a1 - 4 * a2 * a0)
        roots = [(-a1 + disc) / (2 * a2), (-a1 - disc) / (2 * a2)]
    else:
        roots = mpmath.polyroots(poly, maxsteps=200, extraprec=mpmath.mp.prec)
    lead = poly[0]
    out = []
    derivs = []
    for i, rho in enumerate(roots):
        d = lead
        for j, other in enumerate(roots):
            if j != i:
                d *= rho - other
        derivs.append(d)
    for p in powers:
        q = p - T  # coefficient of w^q in 1/P
        total = mpmath.mpc(0)
        for rho, d in zip(roots, derivs):
            if abs(rho) < 1:
                if q <= -1:
                    total += rho ** (-q - 1) / d
            elif q >= 0:
                total -= rho ** (-q - 1) / d
        out.append(total)
    return out


def potential_fourier(walk, z, precision: int = 128) -> PotentialValue:
    """a(z) from the Fourier integral, with the inner integral done by residues.

    The inner variable is the dual coordinate of the larger coordinate of z,
    so the remaining one-dimensional integrand decays away from theta = 0.
    The outer integral uses tanh-sinh quadrature on geometrically refined
    subintervals around the singular point.
    """
    walk = load_walk(walk)
    m, n = _coords(walk, z)
    if m == 0 and n == 0:
        return PotentialValue(numeric=mpmath.mpf(0), error=mpmath.mpf(0))
    inner = 1 if abs(n) >= abs(m) else 0
    outer_z, inner_z = (m, n) if inner == 1 else (n, m)
    groups = _laurent_in_w(walk, inner)
    span = max(abs(m), abs(n), 1)
    with mpmath.workprec(precision + 40):
        # the integrand is continuous at 0 but its two pieces blow up like
        # 1/theta; clamping costs O(floor^2) and keeps the roots apart
        floor = mpmath.mpf(2) ** (-(precision // 2))

        def integrand(theta):
            if abs(theta) < floor:
                theta = floor if theta >= 0 else -floor
            c0, cz = _inner_coefficients(groups, theta, (0, -inner_z))
            return (c0 - mpmath.expj(outer_z * theta) * cz).real

        h = mpmath.mpf(1) / (4 * span)
        cuts = [mpmath.mpf(0)]
        while cuts[-1] + h < mpmath.pi:
            cuts.append(cuts[-1] + h)
            h *= 2
        cuts.append(mpmath.pi)
        total = mpmath.mpf(0)
        err = mpmath.mpf(0)
        for sign in (1, -1):
            pts = [sign * c for c in cuts]
            if sign < 0:
                pts = list(reversed(pts))
            val, e = mpmath.quad(integrand, pts, error=True)
            total += val
            err += abs(e)
        val = total / (2 * mpmath.pi)
        err = err / (2 * mpmath.pi)
    with mpmath.workprec(precision):
        val = +val
    if not err < mpmath.mpf(2) ** (-precision // 2):
        log.warning("Fourier quadrature at %s reached only %s", (m, n), mpmath.nstr(err, 3))
    return PotentialValue(numeric=val, error=max(err, mpmath.mpf(2) ** (-precision)))


# -------------------------------------------------- direct sum oracle

def _partial_sums_simple(N: int, z) -> float:
    """sum_{n<N} P_n(0) - P_n(z) for the simple walk via rotated binomials."""
    x, y = z
    u, v = x + y, x - y
    n = np.arange(N, dtype=float)
    with np.errstate(invalid="ignore"):
        p0 = stats.binom.pmf(n / 2, n, 0.5) ** 2
        pz = stats.binom.pmf((n + u) / 2, n, 0.5) * stats.binom.pmf((n + v) / 2, n, 0.5)
    ok0 = (np.arange(N) % 2) == 0
    okz = ((np.arange(N) + u) % 2) == 0
    return float(np.sum(np.where(ok0, p0, 0.0)) - np.sum(np.where(okz, pz, 0.0)))


def _partial_sums_torus(walk: WalkSpec, N: int, z) -> float:
    """sum_{n<N} P_n(0) - P_n(-z) from the discrete Fourier transform on a torus.

    The torus is large enough that wrap-around of P_n, n < N, is below e^-40.
    """
    # variance of each lattice coordinate per step; images of z under the
    # torus sit at distance >= G - |z| where P_n, n < N, is below e^-40
    var = max(float(sum(p * c[i] ** 2 for c, p in zip(walk.coords, walk.probabilities)))
              for i in (0, 1))
    G = int(np.sqrt(80 * N * var) + max(abs(z[0]), abs(z[1])) + 8)
    if G * G > 4 * 10 ** 7:
        raise OracleError(f"torus of size {G} exceeds the direct-sum budget")
    theta = 2 * np.pi * np.arange(G) / G
    probs = [float(p) for p in walk.probabilities]
    total = 0.0
    for i in range(G):  # rows keep memory at O(G)
        t1 = theta[i]
        phi = np.zeros(G, dtype=complex)
        for (s, t), p in zip(walk.coords, probs):
            phi += p * np.exp(1j * (s * t1 + t * theta))
        one_minus = 1 - phi
        geo = np.empty(G, dtype=complex)
        small = np.abs(one_minus) < 1e-300
        geo[~small] = (1 - phi[~small] ** N) / one_minus[~small]
        geo[small] = N
        total += np.sum(geo * (1 - np.exp(1j * (z[0] * t1 + z[1] * theta)))).real
    return total / (G * G)


def _clt_tail(walk: WalkSpec, N: int, z, reach: Reachability, tp, B):
    """sum_{n>=N} over Y of tau'/n - tau' e^{-B/n}/n, by Euler-Maclaurin."""
    g = reach.period
    r0, rz = 0, reach.residue((-z[0], -z[1]))  # the kernel sums P_n(-z)
    # first n >= N in each class
    n0 = N + ((r0 - N) % g)
    nz = N + ((rz - N) % g)
    with mpmath.workdps(30):
        f = lambda j: tp / (n0 + g * j) - tp * mpmath.exp(-B / (nz + g * j)) / (nz + g * j)  # noqa: E731
        return mpmath.nsum(f, [0, mpmath.inf], method="euler-maclaurin")


def potential_direct_sum(walk, z, N: int | None = None, precision: int = 53,
                         c: float = 20.0) -> PotentialValue:
    """Partial sums of the defining series plus a local-limit tail.

    The partial sum at N, 2N, 4N is extrapolated in 1/N (the tail model is
    exact to leading order, leaving O(1/N) and O(1/N^2) corrections), and the
    spread of the extrapolants is the reported error.
    """
    walk = load_walk(walk)
    z = _coords(walk, z)
    if z == (0, 0):
        return PotentialValue(numeric=mpmath.mpf(0), error=mpmath.mpf(0))
    size2 = float(abs(complex(walk.point(*z))) ** 2)
    if N is None:
        N = max(int(np.ceil(c * size2 - 1e-9)), 2000)
    if N < c * size2 - 1e-9:
        raise OracleError(f"N = {N} is below {c} |z|^2")
    reach = reachability(walk)
    tp = tau_prime(walk, reach)
    B = gaussian_exponent(walk, z)
    simple = _is_simple(walk)
    estimates = []
    for k in (1, 2, 4):
        Nk = k * N
        part = _partial_sums_simple(Nk, z) if simple else _partial_sums_torus(walk, Nk, z)
        estimates.append(mpmath.mpf(part) + _clt_tail(walk, Nk, z, reach, tp, B))
    v1, v2, v4 = estimates
    rich2 = (8 * v4 - 6 * v2 + v1) / 3
    rich1 = 2 * v4 - v2
    err = abs(rich2 - rich1)
    if not is_reversible(walk):
        # odd cumulants add half-integer powers of 1/N that the extrapolation
        # does not model; observed spread underestimates by about 3
        err *= 4
    err += mpmath.mpf(1e-13) * N ** 0.5
    with mpmath.workprec(precision):
        return PotentialValue(numeric=+rich2, error=err)


def _is_simple(walk: WalkSpec) -> bool:
    return walk.d == 1 and sorted(walk.coords) == [(-1, 0), (0, -1), (0, 1), (1, 0)] \
        and len(set(walk.probabilities)) == 1 and lattice_volume(walk).a == 1


# ---------------------------------------------- convolution iteration

@dataclass
class GridFunction:
    radius: int
    values: np.ndarray  # index [x + R, y + R]
    residual_norms: list

    def __call__(self, x: int, y: int) -> float:
        return float(self.values[x + self.radius, y + self.radius])


def _seed_grid(R: int) -> np.ndarray:
    x = np.arange(-R, R + 1)
    X, Y = np.meshgrid(x, x, indexing="ij")
    r2 = (X * X + Y * Y).astype(float)
    r2[R, R] = 1.0
    f = np.log(r2) / np.pi  # (2/pi) log|z|
    f[R, R] = -1.0
    return f


def _laplace_defect(f: np.ndarray) -> np.ndarray:
    """(Delta f - delta_0) on the interior; zero on the outer ring."""
    g = np.zeros_like(f)
    g[1:-1, 1:-1] = (f[2:, 1:-1] + f[:-2, 1:-1] + f[1:-1, 2:] + f[1:-1, :-2]) / 4 - f[1:-1, 1:-1]
    c = f.shape[0] // 2
    g[c, c] -= 1.0
    return g


def potential_convolution_iterate(R: int = 200, iterations: int = 12,
                                  walk="z2-simple") -> GridFunction:
    """f_n = f_{n-1} - (Delta f_{n-1} - delta_0) * f on the square of radius R.

    Seed f = (2/pi) log|z|, f(0) = -1.  The convolution uses f on the
    doubled square, so only the defect is truncated to the grid.  Residual
    norms sum |Delta f_n - delta_0| over the inner half-square.
    """
    walk = load_walk(walk)
    if not _is_simple(walk):
        raise OracleError("the convolution iteration is implemented for the simple walk only")
    if R < 50:
        raise ValueError("R must be >= 50")
    big = _seed_grid(2 * R)
    f = big[R:3 * R + 1, R:3 * R + 1].copy()
    h = R // 2
    inner = slice(R - h, R + h + 1)
    cur = f
    norms = []
    for it in range(iterations + 1):
        g = _laplace_defect(cur)
        norms.append(float(np.abs(g[inner, inner]).sum()))
        if it == iterations:
            break
        if len(norms) >= 3 and norms[-1] > norms[-2] > norms[-3]:
            raise OracleError("convolution iteration diverges")
        cur = cur - signal.fftconvolve(g, big, mode="valid")
    return GridFunction(R, cur, norms)


def convolution_value(grid: GridFunction, z, anchor=(1, 0)) -> float:
    """Grid value shifted so that the anchor takes its exact value a(1, 0) = 1."""
    return grid(*z) - grid(*anchor) + 1.0


# ------------------------------------------------ lemma validators

def f_sum(s, j: int, q: int, r, precision: int = 256):
    """Return (direct, asymptotic) for F = sum_{n = j mod q, n >= 1} n^-s e^{-r/n}.

    For s = 1 the summand is (e^{-r/n} - 1)/n.  Beyond n >= M = 4r the
    exponential is expanded and each power summed with the Hurwitz zeta
    function, so the direct value is accurate to the working precision.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    with mpmath.workprec(precision):
        s = mpmath.mpf(s)
        r = mpmath.mpf(r)
        first = j % q or q
        M = int(4 * r) + q + first
        k_cut = (M - first + q - 1) // q  # first k with n = first + q k >= M
        direct = mpmath.mpf(0)
        for k in range(k_cut):
            n = first + q * k
            if s == 1:
                direct += (mpmath.exp(-r / n) - 1) / n
            else:
                direct += mpmath.exp(-r / n) / mpmath.mpf(n) ** s
        a = mpmath.mpf(first) / q + k_cut
        i = 1 if s == 1 else 0
        term_scale = mpmath.mpf(1)
        tol = mpmath.mpf(2) ** (-precision - 10)
        fact = mpmath.mpf(1)
        while True:
            if i:
                fact *= i
            piece = (-r) ** i / fact * mpmath.zeta(s + i, a) / mpmath.mpf(q) ** (s + i)
            direct += piece
            if i > 2 and abs(piece) < tol * max(abs(direct), term_scale):
                break
            i += 1
        if s == 1:
            asym = (mpmath.digamma(mpmath.mpf(first) / q) + mpmath.log(q) - mpmath.euler
                    - mpmath.log(r)) / q
        else:
            asym = mpmath.gamma(s - 1) / (q * r ** (s - 1))
    return direct, asym


def multinomial_clt_check(p, n: int, w):
    """Return (exact multinomial probability, leading local-limit value)."""
    p = [Fraction(x) for x in p]
    w = [Fraction(x) for x in w]
    if len(p) != len(w):
        raise ValueError("p and w must have equal length")
    if sum(w) != 0:
        raise ValueError("offsets must sum to zero")
    counts = [pi * n + wi for pi, wi in zip(p, w)]
    if any(c < 0 or c.denominator != 1 for c in counts) or sum(counts) != n:
        raise ValueError("p_i n + w_i must be nonnegative integers summing to n")
    counts = [int(c) for c in counts]
    mult = factorial(n)
    for c in counts:
        mult //= factorial(c)
    exact = Fraction(mult)
    for pi, c in zip(p, counts):
        exact *= pi ** c
    k = len(p)
    with mpmath.workdps(30):
        prod = mpmath.mpf(1)
        for pi in p:
            prod *= mpmath.mpf(pi.numerator) / pi.denominator
        expo = sum(mpmath.mpf(wi.numerator) ** 2 / wi.denominator ** 2
                   / (2 * mpmath.mpf(pi.numerator) / pi.denominator * n)
                   for pi, wi in zip(p, w))
        clt = (2 * mpmath.pi * n) ** (-mpmath.mpf(k - 1) / 2) / mpmath.sqrt(prod) * mpmath.exp(-expo)
        ex = mpmath.mpf(exact.numerator) / exact.denominator
    return ex, clt


def theta_sum_check(A, v, n):
    """Return (sum_z exp(-|A(z + v)|^2 / n), pi n / |det A|) for z in Z^2."""
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    if n < 1:
        raise ValueError("n must be >= 1")
    gram = A.T @ A
    lam_min = float(np.linalg.eigvalsh(gram)[0])
    if lam_min <= 0:
        raise ValueError("A must be nonsingular")
    R = int(np.ceil(np.sqrt(45 * n / lam_min) + np.abs(v).max() + 2))
    k = np.arange(-R, R + 1, dtype=float)
    X, Y = np.meshgrid(k + v[0], k + v[1], indexing="ij")
    q = gram[0, 0] * X * X + 2 * gram[0, 1] * X * Y + gram[1, 1] * Y * Y
    total = float(np.exp(-q / n).sum())
    return total, float(np.pi * n / abs(np.linalg.det(A)))


def is_reversible_walk(walk) -> bool:
    return is_reversible(load_walk(walk))


__all__ = [
    "OracleError", "StepDistribution", "Reachability", "GridFunction", "step_distribution",
    "reachability", "tau_prime", "local_clt", "potential_fourier", "potential_direct_sum",
    "potential_convolution_iterate", "convolution_value", "f_sum", "multinomial_clt_check",
    "theta_sum_check", "WalkError",
]
