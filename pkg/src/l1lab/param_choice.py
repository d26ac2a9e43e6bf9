"""Regularization parameter choice rules.

Three rules are provided: an a-priori choice ``alpha = delta**2 / phi(delta)``
driven by a rate function, a strong discrepancy principle that brackets the
residual norm inside ``[tau1*delta, tau2*delta]`` by bisection in log(alpha),
and a sequential discrepancy principle that walks the geometric grid
``alpha_j = zeta**j * alpha0`` down from alpha0 and stops at the first
parameter whose residual drops to ``tau*delta``.

All searches exploit that the residual norm of the penalized solution is
nondecreasing in alpha; for diagonal operators the residual is evaluated in
closed form so the search is free of inner-solver noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sequence_model import DiagonalOperator, GeneralOperator, RegProblem
from .solver import (
    SolveResult,
    diagonal_residual_norm,
    null_solution_threshold,
    solve_diagonal,
    solve_general,
)

__all__ = [
    "DiscrepancyConfig",
    "DiscrepancyInfeasibleError",
    "alpha_a_priori",
    "alpha_strong_discrepancy",
    "alpha_sequential_discrepancy",
    "residual_profile",
]


class DiscrepancyInfeasibleError(ValueError):
    """No admissible alpha exists; ``bound`` names the violated side.

    ``bound = "lower"``: even the zero solution's residual ||y_noisy|| stays
    below tau1*delta, so the residual can never reach the lower edge.
    ``bound = "upper"``: the residual floor at alpha -> 0 already exceeds the
    upper edge.  ``bound = "grid"``: the sequential walk exhausted its step
    budget without passing the test.
    """

    def __init__(self, bound, message):
        super().__init__(message)
        self.bound = bound


@dataclass(frozen=True)
class DiscrepancyConfig:
    """Constants for both discrepancy principles.

    ``alpha0 = None`` means: start the sequential grid at the null-solution
    threshold ||A* y_noisy||_inf, the smallest alpha with x = 0.
    """

    tau1: float = 1.0
    tau2: float = 1.5
    tau: float = 1.2
    zeta: float = 0.8
    alpha0: float | None = None
    max_bisections: int = 200

    def __post_init__(self):
        if not 1.0 <= self.tau1 <= self.tau2:
            raise ValueError(f"need 1 <= tau1 <= tau2, got tau1={self.tau1}, tau2={self.tau2}")
        if not self.tau > 1.0:
            raise ValueError(f"tau must exceed 1, got {self.tau}")
        if not 0.0 < self.zeta < 1.0:
            raise ValueError(f"zeta must lie in (0,1), got {self.zeta}")
        if self.alpha0 is not None and not self.alpha0 > 0.0:
            raise ValueError(f"alpha0 must be positive, got {self.alpha0}")
        if self.max_bisections < 1:
            raise ValueError("max_bisections must be at least 1")


def alpha_a_priori(delta: float, phi) -> float:
    """A-priori rule ``alpha = delta**2 / phi(delta)`` for the quadratic misfit."""
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    val = float(phi(delta))
    if not val > 0.0:
        raise ValueError(
            f"phi({delta}) = {val} is not positive; an index function must be "
            "positive at positive arguments"
        )
    return delta**2 / val


def _solve_at(problem: RegProblem, alpha: float) -> SolveResult:
    if isinstance(problem.op, DiagonalOperator):
        return solve_diagonal(problem, alpha)
    return solve_general(problem.op, problem.y_noisy, alpha)


def _residual_at(problem: RegProblem, alpha: float) -> float:
    if isinstance(problem.op, DiagonalOperator):
        return diagonal_residual_norm(problem.op, problem.y_noisy, alpha)
    return solve_general(problem.op, problem.y_noisy, alpha).residual_norm


def residual_profile(problem: RegProblem, alphas) -> np.ndarray:
    """Residual norms of the exact solutions over an alpha grid (for monotonicity checks)."""
    return np.array([_residual_at(problem, a) for a in np.asarray(alphas, dtype=float)])


def _residual_floor(problem: RegProblem) -> float:
    # limit of the residual as alpha -> 0+: zero for diagonal operators,
    # the least-squares misfit for general matrices
    if isinstance(problem.op, DiagonalOperator):
        return 0.0
    _, res, *_ = np.linalg.lstsq(problem.op.matrix, problem.y_noisy, rcond=None)
    if res.size:
        return float(np.sqrt(res[0]))
    fit = problem.op.matrix @ np.linalg.lstsq(problem.op.matrix, problem.y_noisy, rcond=None)[0]
    return float(np.linalg.norm(fit - problem.y_noisy))


def alpha_strong_discrepancy(
    problem: RegProblem, config: DiscrepancyConfig = DiscrepancyConfig()
) -> tuple[float, SolveResult]:
    """Largest-residual-window rule: find alpha with residual in [tau1*d, tau2*d].

    Bisection in log(alpha) between brackets found by geometric expansion from
    ``delta * ||A||``; the returned solve is re-checked against the window, so
    the postcondition holds by construction or an error is raised.
    """
    delta = problem.delta
    if not delta > 0.0:
        raise ValueError(f"strong discrepancy needs delta > 0, got {delta}")
    lo_target = config.tau1 * delta
    hi_target = config.tau2 * delta

    norm_y = float(np.linalg.norm(problem.y_noisy))
    if norm_y < lo_target:
        raise DiscrepancyInfeasibleError(
            "lower",
            f"||y_noisy|| = {norm_y} < tau1*delta = {lo_target}: residual cannot "
            "reach the lower bound for any alpha",
        )
    floor = _residual_floor(problem)
    if floor > hi_target:
        raise DiscrepancyInfeasibleError(
            "upper",
            f"residual floor {floor} > tau2*delta = {hi_target}: residual cannot "
            "get under the upper bound for any alpha",
        )

    def in_window(res):
        return lo_target <= res <= hi_target

    alpha = delta * problem.op.norm
    res = _residual_at(problem, alpha)

    # geometric expansion to a sign-changing bracket in log alpha
    lo_alpha = hi_alpha = alpha
    if not in_window(res):
        if res < lo_target:
            for _ in range(400):
                hi_alpha *= 2.0
                res = _residual_at(problem, hi_alpha)
                if in_window(res):
                    alpha = hi_alpha
                    break
                if res > hi_target:
                    lo_alpha = hi_alpha / 2.0
                    break
            else:  # pragma: no cover - excluded by the norm_y precheck
                raise DiscrepancyInfeasibleError("lower", "expansion failed upward")
        else:
            for _ in range(400):
                lo_alpha /= 2.0
                res = _residual_at(problem, lo_alpha)
                if in_window(res):
                    alpha = lo_alpha
                    break
                if res < lo_target:
                    hi_alpha = lo_alpha * 2.0
                    break
            else:  # pragma: no cover - excluded by the floor precheck
                raise DiscrepancyInfeasibleError("upper", "expansion failed downward")

    if not in_window(res):
        # res(lo_alpha) < tau1*delta < tau2*delta < res(hi_alpha); bisect the gap
        for _ in range(config.max_bisections):
            alpha = float(np.exp(0.5 * (np.log(lo_alpha) + np.log(hi_alpha))))
            res = _residual_at(problem, alpha)
            if in_window(res):
                break
            if res < lo_target:
                lo_alpha = alpha
            else:
                hi_alpha = alpha
        else:
            raise DiscrepancyInfeasibleError(
                "grid",
                f"bisection did not land in [{lo_target}, {hi_target}] within "
                f"{config.max_bisections} steps; the window may be degenerate",
            )

    result = _solve_at(problem, alpha)
    if not in_window(result.residual_norm):  # pragma: no cover - defensive re-check
        raise DiscrepancyInfeasibleError(
            "grid", f"post-solve residual {result.residual_norm} escaped the window"
        )
    return alpha, result


def alpha_sequential_discrepancy(
    problem: RegProblem, config: DiscrepancyConfig = DiscrepancyConfig()
) -> tuple[float, SolveResult]:
    """Walk ``alpha_j = zeta**j * alpha0`` down; stop at residual <= tau*delta.

    Returns the largest grid element passing the test (smallest j, searched
    from j = 0 so alpha0 itself is admissible).
    """
    delta = problem.delta
    if not delta > 0.0:
        raise ValueError(f"sequential discrepancy needs delta > 0, got {delta}")
    alpha0 = config.alpha0
    if alpha0 is None:
        alpha0 = null_solution_threshold(problem.op, problem.y_noisy)
        if alpha0 <= 0.0:
            raise ValueError("y_noisy is zero; no sensible grid start exists")
    target = config.tau * delta

    for j in range(config.max_bisections + 1):
        alpha = (config.zeta**j) * alpha0
        if _residual_at(problem, alpha) <= target:
            return alpha, _solve_at(problem, alpha)
    raise DiscrepancyInfeasibleError(
        "grid",
        f"no alpha_j = zeta^j * alpha0 with j <= {config.max_bisections} has "
        f"residual <= tau*delta = {target}",
    )
