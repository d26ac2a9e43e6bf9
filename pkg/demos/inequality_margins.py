"""Randomized stress test of the two inequalities behind the error bounds.

The projection inequality controls the l1-norm combination through a head
sum and a tail; the error-bound inequality dominates the reconstruction error
by the penalty difference plus the rate function of the image-space gap.
Both are hammered with random candidates, including adversarial families
built from the true solution, and the worst margin is serialized and replayed
to show the round trip is exact.
"""

import tempfile
from pathlib import Path

import numpy as np

from l1lab import (
    DecaySequence,
    DiagonalOperator,
    check_lemma_sums,
    check_vi,
    lemma_suite,
    load_sample,
    save_sample,
    synthesize,
    vi_suite,
)

n = 500
op = DiagonalOperator.power(1.0, 1.0, n=n)
x_true = DecaySequence.power(2.0, 1.0, n=n)

vi_res = vi_suite(op, x_true, num_samples=20_000, seed=0)
lemma_res = lemma_suite(x_true, dim=n, num_samples=50_000, seed=1)

print(f"error-bound sweep: {vi_res.num_samples} samples, min margin {vi_res.min_margin:.4e}")
print(
    f"projection sweep:  {lemma_res.num_samples} samples, "
    f"min margin {lemma_res.min_margin:.4e}"
)
print(f"both nonnegative up to float slack: {vi_res.passed and lemma_res.passed}")
print()

worst = vi_res.worst
print("worst error-bound sample:")
print(f"  lhs {worst.lhs:.6f}  rhs {worst.rhs:.6f}  best head length {worst.n_used}")

# serialize, reload, and recompute: margins agree bit for bit
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "worst.json"
    save_sample(worst, path, kind="vi")
    loaded, kind = load_sample(path)
    problem = synthesize(op, x_true, 0.0, 0)
    redone = check_vi(problem, loaded.x)
    print(f"  replay from {kind} file: stored {loaded.margin!r}, recomputed {redone.margin!r}")
    print(f"  bit-identical: {loaded.margin == redone.margin}")
print()

# the projection inequality is tight for candidates that vanish on the head
x = np.zeros(n)
lhs, rhs = check_lemma_sums(x, x_true, n)
print(f"zero candidate, full head: lhs {lhs:.6f} vs rhs {rhs:.6f} (gap = analytic tail x2)")
lhs, rhs = check_lemma_sums(x_true.coefficients(n), x_true, 0)
print(f"true coefficients, empty head: lhs {lhs:.6f} vs rhs {rhs:.6f} (slack = full mass x2)")
