"""Rate function, Hölder exponents, Bregman distance, and the distance function.

The rate calibrator is ``phi(t) = 2 * min_n (tail_n + t * growth_n)`` where
``tail_n`` sums the true solution's coefficients beyond n and ``growth_n``
sums the dual norms 1/sigma_k up to n (growth_0 = 0).  As a minimum of
affine functions phi is concave; it is strictly increasing as long as the
minimizing head length stays finite, and phi(0) equals twice the tail mass
beyond the truncation level (zero only for sparse solutions).

The distance function ``d(R) = min_{||w||_2 <= R} max_k |xi_k - sigma_k w_k|``
quantifies how badly a subgradient xi misses the range of the adjoint; for
non-sparse solutions it stays near its ceiling for every R, which is exactly
why the rate function route is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sequence_model import DecaySequence, DiagonalOperator, tail_table

__all__ = [
    "RateFunction",
    "Subgradient",
    "DistanceReport",
    "phi",
    "holder_exponent",
    "holder_exponent_sum_form",
    "distance_function",
    "distance_report",
    "radius_for_level",
    "minimal_subgradient",
    "bregman_distance",
]


@dataclass(frozen=True)
class RateFunction:
    """Precomputed tail/growth tables defining the concave rate calibrator.

    ``tails[n]`` for n = 0..N is the coefficient mass beyond n including the
    analytic remainder past the truncation level; ``growths[n]`` is the
    cumulative dual-norm sum with growths[0] = 0.
    """

    tails: np.ndarray
    growths: np.ndarray

    def __post_init__(self):
        tails = np.asarray(self.tails, dtype=float)
        growths = np.asarray(self.growths, dtype=float)
        if tails.shape != growths.shape or tails.ndim != 1 or len(tails) < 2:
            raise ValueError("tails and growths must be 1-d arrays of equal length >= 2")
        if growths[0] != 0.0 or np.any(np.diff(growths) <= 0.0):
            raise ValueError("growths must start at 0 and be strictly increasing")
        if np.any(np.diff(tails) > 0.0) or np.any(tails < 0.0):
            raise ValueError("tails must be nonnegative and nonincreasing")
        tails.flags.writeable = False
        growths.flags.writeable = False
        object.__setattr__(self, "tails", tails)
        object.__setattr__(self, "growths", growths)

    @classmethod
    def from_model(cls, x_true: DecaySequence, op: DiagonalOperator):
        """Tables for the pair (x_true, op) at the operator's truncation level."""
        tails = tail_table(x_true, op.dim)
        growths = np.concatenate([[0.0], np.cumsum(1.0 / op.sigma)])
        return cls(tails=tails, growths=growths)

    @property
    def n_max(self):
        return len(self.tails) - 1

    def _candidate_cut(self, t):
        # a head length n with t*growths[n] > tails[0] scores worse than n = 0
        # outright, so the scan never has to look past the cut
        if t == 0.0:
            return len(self.growths)
        with np.errstate(over="ignore"):
            # subnormal t can overflow the ratio to inf; the cut is then the
            # full table, which is what an infinite bound selects anyway
            bound = self.tails[0] / t
        return max(1, int(np.searchsorted(self.growths, bound, side="right")))

    def value_with_argmin(self, t):
        """phi(t) together with the minimizing head length n."""
        t = float(t)
        if t < 0.0:
            raise ValueError(f"t must be nonnegative, got {t}")
        cut = self._candidate_cut(t)
        scores = self.tails[:cut] + t * self.growths[:cut]
        n = int(np.argmin(scores))
        return 2.0 * float(scores[n]), n

    def __call__(self, t):
        return self.value_with_argmin(t)[0]

    def grid(self, ts, chunk=256):
        """Vectorized phi over an array of arguments (chunked broadcasting)."""
        ts = np.asarray(ts, dtype=float)
        if np.any(ts < 0.0):
            raise ValueError("grid arguments must be nonnegative")
        flat = ts.ravel()
        out = np.empty(flat.shape)
        for start in range(0, len(flat), chunk):
            block = flat[start : start + chunk]
            cut = self._candidate_cut(float(np.min(block))) if block.size else 1
            scores = self.tails[None, :cut] + block[:, None] * self.growths[None, :cut]
            out[start : start + chunk] = 2.0 * np.min(scores, axis=1)
        return out.reshape(ts.shape)


def phi(rf: RateFunction, t: float) -> float:
    """Rate function value ``2 * min_n (tails[n] + t * growths[n])``."""
    return rf(t)


def holder_exponent(mu_hat: float, nu_hat: float) -> float:
    """Predicted rate exponent ``(mu_hat - 1) / (mu_hat + nu_hat)``.

    mu_hat is the decay power of the solution coefficients, nu_hat the decay
    power of the singular values.
    """
    if not mu_hat > 1.0:
        raise ValueError(f"mu_hat must exceed 1 for a summable solution, got {mu_hat}")
    if not nu_hat > 0.0:
        raise ValueError(f"nu_hat must be positive, got {nu_hat}")
    return (mu_hat - 1.0) / (mu_hat + nu_hat)


def holder_exponent_sum_form(mu: float, nu: float) -> float:
    """Same exponent in tail/growth powers: ``mu / (mu + nu)``.

    Here mu = mu_hat - 1 bounds the tail sums (tail_n <= K1 * n**-mu) and
    nu = nu_hat + 1 bounds the growth sums (growth_n <= K2 * n**nu).
    """
    if not (mu > 0.0 and nu > 0.0):
        raise ValueError(f"need mu > 0 and nu > 0, got mu={mu}, nu={nu}")
    return mu / (mu + nu)


@dataclass(frozen=True)
class Subgradient:
    """Vector with entries in [-1, 1]; a subgradient of the l1 norm."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError(f"subgradient must be one-dimensional, got shape {vals.shape}")
        if np.any(np.abs(vals) > 1.0 + 1e-15):
            raise ValueError("subgradient entries must lie in [-1, 1]")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)


def minimal_subgradient(x_true: DecaySequence, n: int | None = None) -> Subgradient:
    """sign(x_k) on the support, zero elsewhere, at truncation level n."""
    if n is None:
        n = len(x_true)
    return Subgradient(values=np.sign(x_true.coefficients(n)))


def _check_lengths(op: DiagonalOperator, xi: Subgradient):
    if len(xi) != len(op):
        raise ValueError(
            f"subgradient length {len(xi)} does not match operator dimension {len(op)}"
        )


def distance_function(op: DiagonalOperator, xi: Subgradient, R: float, tol: float = 1e-10) -> float:
    """Best sup-norm approximation error of xi by adjoint images of a radius-R ball.

    Level s is achievable iff ``sum_k ((|xi_k| - s)_+ / sigma_k)**2 <= R**2``;
    the smallest achievable s is located by bisection to absolute tolerance
    ``tol`` (the returned value is feasible, so it overestimates by < tol).
    """
    _check_lengths(op, xi)
    if not R > 0.0:
        raise ValueError(f"R must be positive, got {R}")
    abs_xi = np.abs(xi.values)
    inv_sigma = 1.0 / op.sigma
    R2 = R * R

    def feasible(s):
        w = np.maximum(abs_xi - s, 0.0) * inv_sigma
        return float(w @ w) <= R2

    if feasible(0.0):
        return 0.0
    lo, hi = 0.0, float(np.max(abs_xi))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class DistanceReport:
    """Distance value plus truncation context.

    ``sigma_last`` is the smallest singular value kept; when it is not yet
    small the truncated value can sit far below the infinite-dimensional one.
    """

    R: float
    d_value: float
    n_terms: int
    sigma_last: float


def distance_report(op: DiagonalOperator, xi: Subgradient, R: float) -> DistanceReport:
    """Distance function value with the truncation diagnostic attached."""
    return DistanceReport(
        R=float(R),
        d_value=distance_function(op, xi, R),
        n_terms=len(op),
        sigma_last=float(op.sigma[-1]),
    )


def radius_for_level(op: DiagonalOperator, xi: Subgradient, s: float) -> float:
    """Smallest ball radius R at which the distance function reaches level s."""
    _check_lengths(op, xi)
    if s < 0.0:
        raise ValueError(f"level must be nonnegative, got {s}")
    w = np.maximum(np.abs(xi.values) - s, 0.0) / op.sigma
    return float(np.linalg.norm(w))


def bregman_distance(x, x_true, xi: Subgradient) -> float:
    """Convexity gap ``||x||_1 - ||x_true||_1 - <xi, x - x_true>``.

    ``x_true`` may be a DecaySequence (truncated to len(x)) or a plain
    vector.  xi must be a subgradient at x_true: sign(x_true_k) wherever
    x_true_k != 0.  Nonnegative for every x.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"x must be one-dimensional, got shape {x.shape}")
    if isinstance(x_true, DecaySequence):
        xt = x_true.coefficients(len(x))
    else:
        xt = np.asarray(x_true, dtype=float)
    if xt.shape != x.shape or len(xi) != len(x):
        raise ValueError("x, x_true, and xi must share one length")
    on = xt != 0.0
    if not np.all(xi.values[on] == np.sign(xt[on])):
        raise ValueError("xi is not a subgradient at x_true: sign mismatch on the support")
    # grouped per component: each term is nonnegative in exact arithmetic and
    # in floating point, so rounding cannot push the total below zero
    gaps = (np.abs(x) - xi.values * x) - (np.abs(xt) - xi.values * xt)
    return float(np.sum(gaps))
