"""Command line interface: ``harmpot <command> [options]``.

Commands
--------
expand      real-form coefficient table of the potential expansion
value       a(z) at one lattice point (exact ``n + q/pi`` on Z^2 with --exact)
oracle      a(z) by one oracle, or ``oracle compare`` over a points file
constant    sup of |z|^2 |a - (2/pi) log|z| - lambda| on Z^2
verify      decay of the expansion error along rays
selftest    ``selftest lemmas``: the local-limit lemma validators

Exit codes: 0 success, 2 a check failed, 3 precision or budget failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import __version__
from .exact_values import PotentialTable, error_constant_scan, mccrea_whipple
from .expansion import (Expansion, ExpansionError, decay_profile, diagonal_direction,
                        exact_expansion_z2, fitted_expansion, is_simple_z2,
                        structural_checks, to_real_form)
from .oracle import (OracleError, convolution_value, f_sum, local_clt, multinomial_clt_check,
                     potential_convolution_iterate, potential_direct_sum, potential_fourier,
                     step_distribution, theta_sum_check)
from .scalar import PiGraded, SymbolicConstant
from .walk import WalkError, load_walk

log = logging.getLogger("harmpot")

EXIT_OK, EXIT_CHECK, EXIT_BUDGET = 0, 2, 3
MAX_ORDER = 24


@dataclass
class RunConfig:
    command: str = "expand"
    walk: str = "z2-simple"
    order: int = 9
    precision: int = 256
    fmt: str = "table"
    at: tuple | None = None
    points: str | None = None
    method: str = "fourier"
    exact: bool = False
    rmax: int = 400
    rays: str = "diagonal"
    slope_tolerance: float = 0.3
    agree_tolerance: float = 1e-6
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.order > MAX_ORDER:
            raise BudgetError(f"order {self.order} exceeds the budget guard {MAX_ORDER}")
        if self.order < 2:
            raise BudgetError("order must be >= 2")
        if self.precision < 53:
            raise BudgetError("precision must be at least 53 bits")


class BudgetError(RuntimeError):
    pass


# ------------------------------------------------------------ expansions

def build_expansion(walk, order: int) -> Expansion:
    """Exact harmonic path on the simple walk, numeric fit elsewhere."""
    walk = load_walk(walk)
    if is_simple_z2(walk):
        return exact_expansion_z2(order)
    return fitted_expansion(walk, order)


def _coeff_text(c) -> str:
    if isinstance(c, PiGraded):
        return str(c)
    return mpmath.nstr(c, 30)


def _lambda_fields(expansion: Expansion) -> dict:
    lam = expansion.lam
    if isinstance(lam, SymbolicConstant):
        return {"exact": str(lam), "numeric": mpmath.nstr(lam.numeric(200), 40),
                "uncertainty": None}
    return {"exact": None, "numeric": mpmath.nstr(lam, 30),
            "uncertainty": None if expansion.lam_error is None else mpmath.nstr(expansion.lam_error, 3)}


def report_structured(expansion: Expansion) -> dict:
    """Machine-readable report mirroring the real-form table."""
    walk = expansion.walk
    terms = []
    for e in to_real_form(expansion):
        exact = isinstance(e.coefficient, PiGraded)
        terms.append({"order": e.order, "l": e.l, "k": e.k,
                      "coefficient": _coeff_text(e.coefficient), "exact": exact})
    return {
        "walk": walk.name,
        "sqrt_d": walk.d,
        "order": expansion.order,
        "alpha": str(expansion.alpha),
        "tau": str(expansion.alpha * 2),
        "lambda": _lambda_fields(expansion),
        "terms": terms,
        "checks": structural_checks(expansion),
    }


def dump_structured(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def parse_structured(text: str) -> dict:
    """Parse a structured report; exact coefficients become PiGraded objects."""
    data = json.loads(text)
    d = int(data["sqrt_d"])
    data["alpha"] = PiGraded.parse(data["alpha"], d)
    data["tau"] = PiGraded.parse(data["tau"], d)
    if data["lambda"]["exact"] is not None:
        data["lambda"]["exact"] = SymbolicConstant.parse(data["lambda"]["exact"])
    for t in data["terms"]:
        if t["exact"]:
            t["coefficient"] = PiGraded.parse(t["coefficient"], d)
    return data


def unparse_structured(data: dict) -> str:
    """Inverse of :func:`parse_structured` (canonical text)."""
    out = json.loads(json.dumps(data, default=str))
    return dump_structured(out)


def format_table(expansion: Expansion) -> str:
    walk = expansion.walk
    lam = _lambda_fields(expansion)
    lines = [
        f"walk: {walk.name}    order: {expansion.order}",
        "a(z) = tau log|z| + lambda + sum coefficient * Re(z^l / |z|^k)",
        f"tau    = {expansion.alpha * 2}",
        f"lambda = {lam['exact'] or lam['numeric']}"
        + (f"  (+- {lam['uncertainty']})" if lam["uncertainty"] else ""),
        f"{'order':>6} {'l':>4} {'k':>4}  coefficient",
    ]
    for e in to_real_form(expansion):
        lines.append(f"{e.order:>6} {e.l:>4} {e.k:>4}  {_coeff_text(e.coefficient)}")
    checks = structural_checks(expansion)
    lines.append("checks: " + ", ".join(f"{k}={'pass' if v else 'FAIL'}" for k, v in checks.items()))
    return "\n".join(lines)


def cmd_expand(config: RunConfig, out=None) -> int:
    out = out or sys.stdout
    config.validate()
    expansion = build_expansion(config.walk, config.order)
    if config.fmt == "structured":
        out.write(dump_structured(report_structured(expansion)))
    else:
        out.write(format_table(expansion) + "\n")
    return EXIT_OK if all(structural_checks(expansion).values()) else EXIT_CHECK


# ----------------------------------------------------------------- values

def cmd_value(config: RunConfig, out=None) -> int:
    out = out or sys.stdout
    walk = load_walk(config.walk)
    x, y = config.at
    if config.exact:
        if not is_simple_z2(walk):
            out.write("exact values are available for the simple Z^2 walk only\n")
            return EXIT_CHECK
        v = mccrea_whipple(x, y)
        out.write(f"{v}\n{mpmath.nstr(v.value(config.precision), 40)}\n")
        return EXIT_OK
    v = potential_fourier(walk, (x, y), precision=config.precision)
    out.write(f"{mpmath.nstr(v.numeric, 40)} +- {mpmath.nstr(v.error, 3)}\n")
    return EXIT_OK


def _oracle_value(walk, z, method: str, precision: int, grid_cache: dict):
    if method == "fourier":
        v = potential_fourier(walk, z, precision=precision)
        return v.numeric, v.error
    if method == "sum":
        v = potential_direct_sum(walk, z)
        return v.numeric, v.error
    if method == "conv":
        R = max(200, 4 * max(abs(z[0]), abs(z[1])))
        if R not in grid_cache:
            grid_cache[R] = potential_convolution_iterate(R, walk=walk)
        grid = grid_cache[R]
        return mpmath.mpf(convolution_value(grid, z)), mpmath.mpf(grid.residual_norms[-1])
    raise ValueError(f"unknown method {method!r}")


def _read_points(path: str) -> list:
    pts = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                x, y = line.replace(",", " ").split()[:2]
                pts.append((int(x), int(y)))
    return pts


def cmd_oracle(config: RunConfig, out=None) -> int:
    out = out or sys.stdout
    walk = load_walk(config.walk)
    cache: dict = {}
    if config.extra.get("action") == "compare":
        methods = ["sum", "fourier"] + (["conv"] if is_simple_z2(walk) else [])
        pts = _read_points(config.points)
        out.write("x y " + " ".join(methods) + " max_pair_diff\n")
        worst = 0.0
        for z in pts:
            vals = [_oracle_value(walk, z, m, config.precision, cache)[0] for m in methods]
            diff = max(abs(a - b) for a in vals for b in vals)
            worst = max(worst, float(diff))
            out.write(f"{z[0]} {z[1]} " + " ".join(mpmath.nstr(v, 15) for v in vals)
                      + f" {mpmath.nstr(diff, 3)}\n")
        ok = worst < config.agree_tolerance
        out.write(f"max pairwise difference {worst:.3e}: {'pass' if ok else 'FAIL'}\n")
        return EXIT_OK if ok else EXIT_CHECK
    val, err = _oracle_value(walk, tuple(config.at), config.method, config.precision, cache)
    out.write(f"{mpmath.nstr(val, 30)} +- {mpmath.nstr(err, 3)}\n")
    return EXIT_OK


# ------------------------------------------------------------- constant

def cmd_constant(config: RunConfig, out=None) -> int:
    out = out or sys.stdout
    scan = error_constant_scan(config.rmax)
    x, y = scan.argmax
    out.write(f"sup over 1 <= |z| <= {config.rmax} of |z|^2 |a(z) - (2/pi) log|z| - lambda|\n")
    out.write(f"attained at z = ({x}, {y}), value {mpmath.nstr(scan.value, 10)}"
              f" (signed {mpmath.nstr(scan.signed, 10)})\n")
    out.write(f"asymptotic constant 1/(6 pi) = {mpmath.nstr(1 / (6 * mpmath.pi), 10)}\n")
    return EXIT_OK


# --------------------------------------------------------------- verify

VERIFY_RADII = (20, 28, 40, 56, 80, 113, 160, 200)


def verify_rays(walk, which: str) -> list:
    if which == "diagonal":
        return [diagonal_direction(walk)]
    return [tuple(v) for v in which_rays(walk)]


def which_rays(walk):
    from .expansion import default_rays, sample_points
    return sorted({p for p in sample_points(walk, [1000], default_rays())})


def cmd_verify(config: RunConfig, out=None) -> int:
    out = out or sys.stdout
    config.validate()
    walk = load_walk(config.walk)
    expansion = build_expansion(walk, config.order)
    if is_simple_z2(walk):
        table = PotentialTable()

        def oracle(m, n):
            return table.numeric(m, n, config.precision)
    else:
        def oracle(m, n):
            return potential_fourier(walk, (m, n), precision=config.precision).numeric
    ok = True
    for ray in verify_rays(walk, config.rays):
        prof = decay_profile(expansion, oracle, ray, VERIFY_RADII, precision=config.precision)
        out.write(f"ray {ray}: slope {prof.slope:.3f}\n")
        for r, err in zip(prof.radii, prof.errors):
            out.write(f"  |z| = {r:9.3f}  error {mpmath.nstr(err, 5)}\n")
        ok = ok and prof.slope <= -config.order + config.slope_tolerance
    out.write(f"decay check (slope <= {-config.order + config.slope_tolerance}): "
              f"{'pass' if ok else 'FAIL'}\n")
    return EXIT_OK if ok else EXIT_CHECK


# ------------------------------------------------------------- selftest

def lemma_checks() -> dict:
    """Run the desk-scale lemma validators; name -> (passed, detail)."""
    results = {}
    errs = []
    for r in (50, 100, 200, 400):
        direct, asym = f_sum(2, 1, 1, r)
        errs.append(float(abs(direct - asym) * r ** 5))
    results["f_sum superpolynomial"] = (all(b < a for a, b in zip(errs, errs[1:])),
                                        "err*r^5: " + ", ".join(f"{e:.2e}" for e in errs))
    s0, _ = theta_sum_check(np.eye(2), (0, 0), 100)
    s1, closed = theta_sum_check(np.eye(2), (0.3, 0.7), 100)
    shift = abs(s1 - s0) / closed
    results["theta shift invariance"] = (shift < 1e-10, f"relative shift {shift:.1e}")
    ex, clt = multinomial_clt_check([0.5, 0.5], 1000, [0, 0])
    rel = float(abs(ex - clt) / ex)
    results["multinomial clt"] = (rel < 1e-3, f"relative error {rel:.2e}")
    p100 = step_distribution("z2-simple", 100)[(0, 0)]
    approx = local_clt("z2-simple", 100, (0, 0))
    rel = float(abs(approx - mpmath.mpf(p100.numerator) / p100.denominator)
                / (mpmath.mpf(p100.numerator) / p100.denominator))
    results["local clt tau'=2/pi"] = (rel < 0.02, f"relative error at n=100 {rel:.2e}")
    return results


def cmd_selftest(config: RunConfig, out=None) -> int:
    out = out or sys.stdout
    ok = True
    for name, (passed, detail) in lemma_checks().items():
        out.write(f"{'pass' if passed else 'FAIL'}  {name}: {detail}\n")
        ok = ok and passed
    return EXIT_OK if ok else EXIT_CHECK


# ----------------------------------------------------------------- main

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="harmpot", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, order=True):
        sp.add_argument("--walk", default="z2-simple",
                        help="bundled walk name or path to a walk JSON file")
        sp.add_argument("--precision", type=int, default=256, help="working precision in bits")
        if order:
            sp.add_argument("--order", type=int, default=9, help="expansion order K")

    sp = sub.add_parser("expand", help="expansion coefficient table")
    sp.add_argument("walk_pos", nargs="?", metavar="WALK", help="walk (alternative to --walk)")
    common(sp)
    sp.add_argument("--format", dest="fmt", choices=("table", "structured"), default="table")

    sp = sub.add_parser("value", help="potential at one point")
    common(sp, order=False)
    sp.add_argument("--at", nargs=2, type=int, required=True, metavar=("X", "Y"))
    sp.add_argument("--exact", action="store_true")

    sp = sub.add_parser("oracle", help="numeric oracles")
    sp.add_argument("action", nargs="?", choices=("eval", "compare"), default="eval")
    common(sp, order=False)
    sp.add_argument("--method", choices=("sum", "fourier", "conv"), default="fourier")
    sp.add_argument("--at", nargs=2, type=int, metavar=("X", "Y"))
    sp.add_argument("--points", help="file with one 'x y' lattice point per line")
    sp.add_argument("--tolerance", type=float, default=1e-6)

    sp = sub.add_parser("constant", help="explicit error constant on Z^2")
    sp.add_argument("--rmax", type=int, default=400)

    sp = sub.add_parser("verify", help="decay of the expansion error")
    common(sp)
    sp.add_argument("--rays", choices=("diagonal", "all"), default="diagonal")

    sp = sub.add_parser("selftest", help="lemma validators")
    sp.add_argument("suite", choices=("lemmas",))
    return p


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in ("walk", "order", "precision", "fmt", "method", "exact", "rmax", "rays", "points"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if getattr(args, "walk_pos", None):
        cfg.walk = args.walk_pos
    if getattr(args, "at", None):
        cfg.at = tuple(args.at)
    if hasattr(args, "tolerance"):
        cfg.agree_tolerance = args.tolerance
    if hasattr(args, "action"):
        cfg.extra["action"] = args.action
    return cfg


COMMANDS = {
    "expand": cmd_expand, "value": cmd_value, "oracle": cmd_oracle,
    "constant": cmd_constant, "verify": cmd_verify, "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = config_from_args(args)
    if cfg.command == "oracle":
        if cfg.extra["action"] == "compare" and not cfg.points:
            print("oracle compare needs --points FILE", file=sys.stderr)
            return EXIT_CHECK
        if cfg.extra["action"] == "eval" and cfg.at is None:
            print("oracle needs --at X Y", file=sys.stderr)
            return EXIT_CHECK
    try:
        return COMMANDS[cfg.command](cfg)
    except BudgetError as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OracleError as exc:
        print(f"oracle: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (WalkError, ExpansionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
