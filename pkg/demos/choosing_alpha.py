"""Three ways to pick the regularization weight on one noisy problem.

The a-priori rule needs the rate function of the unknown solution; the strong
discrepancy principle bisects until the residual lands inside a window around
the noise level; the sequential variant walks a geometric grid downward and
stops at the first small-enough residual.  All three are compared on a power
family instance at several noise levels.
"""

import numpy as np

from l1lab import (
    DecaySequence,
    DiagonalOperator,
    RateFunction,
    alpha_a_priori,
    alpha_sequential_discrepancy,
    alpha_strong_discrepancy,
    solve_diagonal,
    synthesize,
)
from l1lab.sequence_model import tail_sum

n = 2000
op = DiagonalOperator.power(1.0, 1.0, n=n)
x_true = DecaySequence.power(2.0, 1.0, n=n)
rf = RateFunction.from_model(x_true, op)
xt = x_true.coefficients(n)
tail = tail_sum(x_true, n)


def l1_error(x):
    return float(np.sum(np.abs(x - xt))) + tail


print(f"{'delta':>8} {'rule':>22} {'alpha':>12} {'residual/d':>11} {'l1 error':>10}")
for delta in [1e-2, 1e-3, 1e-4]:
    problem = synthesize(op, x_true, delta, seed=0)

    alpha_ap = alpha_a_priori(delta, rf)
    res_ap = solve_diagonal(problem, alpha_ap)

    alpha_st, res_st = alpha_strong_discrepancy(problem)
    alpha_sq, res_sq = alpha_sequential_discrepancy(problem)

    for rule, alpha, res in [
        ("a-priori d^2/phi(d)", alpha_ap, res_ap),
        ("strong discrepancy", alpha_st, res_st),
        ("sequential grid", alpha_sq, res_sq),
    ]:
        print(
            f"{delta:8.0e} {rule:>22} {alpha:12.3e} "
            f"{res.residual_norm / delta:11.3f} {l1_error(res.x):10.5f}"
        )
    print()

print("phi(delta) reference values:", [round(rf(d), 5) for d in (1e-2, 1e-3, 1e-4)])
print("all three rules keep the error within a small factor of phi(delta).")
