"""Three independent computations of a(z) for the simple walk, plus the exact value.

    python demos/oracle_triangle.py
"""
import mpmath

from harmpot.exact_values import mccrea_whipple
from harmpot.oracle import (convolution_value, potential_convolution_iterate,
                            potential_direct_sum, potential_fourier)

grid = potential_convolution_iterate(R=200, iterations=12)
print("convolution residual norms:", ", ".join(f"{r:.1e}" for r in grid.residual_norms))
print(f"{'z':>10} {'exact':>22} {'sum':>10} {'fourier':>10} {'conv':>10}")
for z in [(1, 0), (2, 1), (5, 5), (12, -7), (30, 17)]:
    exact = mccrea_whipple(*z).value(128)
    s = potential_direct_sum("z2-simple", z).numeric
    f = potential_fourier("z2-simple", z).numeric
    c = convolution_value(grid, z)
    print(f"{str(z):>10} {mpmath.nstr(exact, 20):>22} {float(abs(s - exact)):10.1e}"
          f" {float(abs(f - exact)):10.1e} {float(abs(c - exact)):10.1e}")
