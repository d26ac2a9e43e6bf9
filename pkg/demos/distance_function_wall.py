"""Why the classical source-condition route fails for non-sparse solutions.

The distance function d(R) measures how well a sign pattern xi can be
approximated, in the sup norm, by adjoint images A* w with ||w|| <= R.  A
classical convergence proof needs d(R) = 0 at finite R.  For a solution with
infinitely many nonzero coefficients the sign pattern has constant magnitude,
and d(R) refuses to drop: it stays above 1 - R/sqrt(sum sigma_k^-2), a bound
that approaches 1 as the truncation level grows.  A decaying pattern escapes
at a finite radius, which is exactly the sparse situation.
"""

import numpy as np

from l1lab import (
    DecaySequence,
    DiagonalOperator,
    Subgradient,
    distance_report,
    minimal_subgradient,
    radius_for_level,
)

print("constant sign pattern (non-sparse solution), sigma_k = 1/k")
print(f"{'N':>7} {'R':>6} {'d(R)':>10} {'sigma_last':>11}")
for n in (100, 1000, 10_000):
    op = DiagonalOperator.power(1.0, 1.0, n=n)
    xi = minimal_subgradient(DecaySequence.power(2.0, 1.0, n=n), n=n)
    for R in (1.0, 10.0, 100.0):
        rep = distance_report(op, xi, R)
        print(f"{n:7d} {R:6.0f} {rep.d_value:10.6f} {rep.sigma_last:11.1e}")
print()
print("raising R by two orders of magnitude barely moves d once N is large:")
print("the ceiling tightens toward 1, so no finite radius ever reaches 0.")
print()

print("decaying pattern xi_k = 1/k (compare: sparse sign patterns)")
n = 10_000
op = DiagonalOperator.power(1.0, 1.0, n=n)
xi = Subgradient(values=1.0 / np.arange(1, n + 1))
for level in (0.5, 0.1, 0.01, 0.001):
    r_star = radius_for_level(op, xi, level)
    rep = distance_report(op, xi, r_star)
    print(f"  level {level:6.3f} reached at R* = {r_star:10.3f}  (d(R*) = {rep.d_value:.5f})")
print()

print("truly sparse pattern: d hits zero at a small finite radius")
xi_sparse = minimal_subgradient(
    DecaySequence.from_support([(1, 1.0), (2, -1.0), (3, 1.0)], n=n), n=n
)
r_zero = radius_for_level(op, xi_sparse, 0.0)
rep = distance_report(op, xi_sparse, r_zero)
print(f"  R* = {r_zero:.4f}, d(R*) = {rep.d_value:.1e}")
