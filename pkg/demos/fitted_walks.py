"""Coefficient tables for the king's walk and the directed triangular walk.

Non-harmonic coefficients come out of the exact recursion. The harmonic
ones (z^-n terms) and the constant are fitted against the Fourier-integral
oracle and recovered as rationals. Takes a few minutes per walk.

    python demos/fitted_walks.py [z2-king|tri-directed]
"""
import sys

import mpmath

from harmpot.expansion import fitted_expansion, to_real_form

names = sys.argv[1:] or ["z2-king", "tri-directed"]
for name in names:
    e = fitted_expansion(name, 9)
    print(f"{name}: tau = {e.alpha * 2}, lambda = {mpmath.nstr(e.lam, 25)}")
    print(f"  fit residual {mpmath.nstr(e.fit.residual, 3)}, held out {mpmath.nstr(e.fit.holdout_residual, 3)}")
    for slot, value in sorted(e.fit.reconstructed.items()):
        print(f"  harmonic level {slot[0]}: {value}")
    for entry in to_real_form(e):
        c = entry.coefficient
        sign = "+" if c.numeric(64).real > 0 else "-"
        print(f"  order {entry.order:3d}   Re z^{entry.l}/|z|^{entry.k}   {sign}  {c}")
