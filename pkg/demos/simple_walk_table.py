"""Exact asymptotic expansion of the potential kernel of the simple walk on Z^2.

Solves the coefficient recursion to order 9, fixes the harmonic terms and the
additive constant from the exact diagonal values, then checks the result
against McCrea-Whipple values far from the origin.

    python demos/simple_walk_table.py
"""
import mpmath

from harmpot.exact_values import PotentialTable
from harmpot.expansion import evaluate, exact_expansion_z2, to_real_form

expansion = exact_expansion_z2(9)
print("a(z) = (2/pi) log|z| + lambda + sum c Re(z^l / |z|^k)")
print("lambda =", expansion.lam, "=", mpmath.nstr(expansion.lam.numeric(128), 25))
for entry in to_real_form(expansion):
    print(f"  order {entry.order:3d}   l={entry.l:2d} k={entry.k:2d}   c = {entry.coefficient}")

# compare with exact values along the axis; the error should shrink like |z|^-10
table = PotentialTable().fill(200)
for x in (10, 20, 50, 100, 200):
    exact = table.numeric(x, 0, precision=256)
    err = abs(evaluate(expansion, x) - exact)
    print(f"x = {x:4d}   a = {mpmath.nstr(exact, 20)}   |error| = {mpmath.nstr(err, 3)}")
