"""Minimization of the quadratic-misfit l1-penalized functional.

The objective is ``T_alpha(x) = 0.5 * ||A x - y||^2 + alpha * ||x||_1``.
Diagonal operators admit an exact per-component solution by soft
thresholding; dense matrices are handled by an accelerated proximal
gradient iteration with backtracking and monotone restart.  Convergence
is always declared through the subgradient optimality certificate, never
through iterate distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sequence_model import (
    DiagonalOperator,
    GeneralOperator,
    RegProblem,
    adjoint_apply,
    apply,
)

__all__ = [
    "SolveResult",
    "soft_threshold",
    "solve_diagonal",
    "solve_general",
    "optimality_residual",
    "tikhonov_value",
    "null_solution_threshold",
]


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one penalized solve.

    ``converged`` is False when the iterative path ran out of iterations
    before the certificate dropped below tolerance; the carried iterate is
    then the best one seen (smallest certificate), not the last.
    """

    x: np.ndarray
    alpha: float
    residual_norm: float
    penalty: float
    objective: float
    certificate: float
    support_size: int
    iterations: int = 0
    converged: bool = True

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        x.flags.writeable = False
        object.__setattr__(self, "x", x)


def soft_threshold(v, thresh):
    """Componentwise ``sign(v) * max(|v| - thresh, 0)``; zero at the boundary."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)


def tikhonov_value(op, y, x, alpha):
    """Objective value ``0.5*||Ax - y||^2 + alpha*||x||_1``."""
    r = apply(op, x) - y
    return 0.5 * float(r @ r) + alpha * float(np.sum(np.abs(x)))


def null_solution_threshold(op, y):
    """Smallest alpha for which x = 0 minimizes the objective: ``||A* y||_inf``."""
    y = np.asarray(y, dtype=float)
    return float(np.max(np.abs(adjoint_apply(op, y)))) if y.size else 0.0


def _package(op, y, x, alpha, iterations=0, converged=True):
    r = apply(op, x) - y
    residual_norm = float(np.linalg.norm(r))
    penalty = float(np.sum(np.abs(x)))
    return SolveResult(
        x=x,
        alpha=float(alpha),
        residual_norm=residual_norm,
        penalty=penalty,
        objective=0.5 * residual_norm**2 + alpha * penalty,
        certificate=optimality_residual(op, y, alpha, x),
        support_size=int(np.count_nonzero(x)),
        iterations=iterations,
        converged=converged,
    )


def solve_diagonal(problem: RegProblem, alpha: float) -> SolveResult:
    """Exact minimizer for a diagonal operator, one soft threshold per component.

    ``x_k = sign(sigma_k y_k) * max(|sigma_k y_k| - alpha, 0) / sigma_k**2``;
    a component exactly at the threshold is set to zero.
    """
    if not isinstance(problem.op, DiagonalOperator):
        raise TypeError("solve_diagonal requires a DiagonalOperator problem")
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    sigma = problem.op.sigma
    z = sigma * problem.y_noisy
    x = soft_threshold(z, alpha) / sigma**2
    return _package(problem.op, problem.y_noisy, x, alpha)


def diagonal_residual_norm(op: DiagonalOperator, y, alpha: float) -> float:
    """Residual norm of the exact diagonal solution without forming it.

    Componentwise ``|A x - y|_k = min(alpha / sigma_k, |y_k|)``: thresholded
    components keep their data value, surviving ones are pulled to distance
    ``alpha / sigma_k``.
    """
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    y = np.asarray(y, dtype=float)
    r = np.minimum(alpha / op.sigma, np.abs(y))
    return float(np.linalg.norm(r))


def optimality_residual(op, y, alpha, x) -> float:
    """Distance of x from satisfying the subgradient optimality condition.

    With ``g = A*(A x - y)``: on the support the entry ``g_k + alpha*sign(x_k)``
    must vanish, off the support ``|g_k|`` may not exceed alpha.  Returns the
    max violation; zero exactly at the minimizer.
    """
    x = np.asarray(x, dtype=float)
    g = adjoint_apply(op, apply(op, x) - np.asarray(y, dtype=float))
    on = x != 0.0
    viol_on = np.abs(g[on] + alpha * np.sign(x[on]))
    viol_off = np.maximum(np.abs(g[~on]) - alpha, 0.0)
    worst = 0.0
    if viol_on.size:
        worst = float(np.max(viol_on))
    if viol_off.size:
        worst = max(worst, float(np.max(viol_off)))
    return worst


def _operator_norm_estimate(matrix, iters=100, seed=0):
    # power iteration on A^T A; good enough to seed the backtracking step
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(matrix.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = matrix.T @ (matrix @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        est = norm
        v = w / norm
    return float(np.sqrt(est))


def solve_general(
    op: GeneralOperator,
    y_noisy,
    alpha: float,
    tol: float = 1e-10,
    max_iter: int = 20_000,
) -> SolveResult:
    """Accelerated proximal gradient (monotone restart, backtracking) minimizer.

    Runs until the optimality certificate drops below ``tol`` or ``max_iter``
    steps elapse; in the latter case the result carries ``converged=False``
    and the best iterate seen.  The objective never increases across
    restarts.
    """
    if not isinstance(op, GeneralOperator):
        raise TypeError("solve_general requires a GeneralOperator")
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    A = op.matrix
    y = np.asarray(y_noisy, dtype=float)
    if y.shape != (A.shape[0],):
        raise ValueError(f"expected data vector of shape ({A.shape[0]},), got {y.shape}")

    op_norm = _operator_norm_estimate(A)
    base_step = 1.0 if op_norm == 0.0 else 1.0 / op_norm**2

    def gradient(x):
        return A.T @ (A @ x - y)

    def objective(x):
        r = A @ x - y
        return 0.5 * float(r @ r) + alpha * float(np.sum(np.abs(x)))

    def prox_step(point, grad):
        # backtracking from the base step; shrinkage is local to this call so
        # floating noise near the optimum cannot collapse the step for good
        s = base_step
        f_point = 0.5 * float((A @ point - y) @ (A @ point - y))
        for _ in range(60):
            cand = soft_threshold(point - s * grad, s * alpha)
            diff = cand - point
            f_cand = 0.5 * float((A @ cand - y) @ (A @ cand - y))
            bound = f_point + float(grad @ diff) + float(diff @ diff) / (2.0 * s)
            if f_cand <= bound + 1e-15:
                return cand
            s *= 0.5
        return cand

    x = np.zeros(A.shape[1])
    z = x.copy()
    t_momentum = 1.0
    obj_x = objective(x)
    best_x, best_cert = x.copy(), optimality_residual(op, y, alpha, x)
    iterations = 0

    for iterations in range(1, max_iter + 1):
        x_next = prox_step(z, gradient(z))
        obj_next = objective(x_next)

        if obj_next > obj_x:
            # momentum overshot: restart from the last monotone point with a
            # plain proximal-gradient step, a descent direction up to rounding
            x_next = prox_step(x, gradient(x))
            obj_next = objective(x_next)
            t_momentum = 1.0
            z = x_next.copy()
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_momentum**2))
            z = x_next + ((t_momentum - 1.0) / t_next) * (x_next - x)
            t_momentum = t_next

        x, obj_x = x_next, obj_next
        cert = optimality_residual(op, y, alpha, x)
        if cert < best_cert:
            best_x, best_cert = x.copy(), cert
        if cert <= tol:
            return _package(op, y, x, alpha, iterations=iterations, converged=True)

    return _package(op, y, best_x, alpha, iterations=iterations, converged=False)
