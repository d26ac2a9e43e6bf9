"""Sequence-space problem model: decaying solutions, diagonal operators, noisy data.

Infinite coefficient sequences are represented by their leading ``N`` entries
plus an optional analytic power-law tail descriptor, so that l1 norms and tail
sums remain exact up to a controlled bracketing error instead of a silent
truncation error.  All types are immutable after construction and all
operations are pure functions.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PowerTail",
    "PowerSigma",
    "DecaySequence",
    "DiagonalOperator",
    "GeneralOperator",
    "RegProblem",
    "tail_sum",
    "tail_table",
    "growth_sum",
    "apply",
    "synthesize",
    "weighted_sup_norm",
    "power_remainder",
]

#: default truncation level for power-law sequences
DEFAULT_N = 10_000


@dataclass(frozen=True)
class PowerTail:
    """Analytic decay law ``|x_k| = K1 * k**(-mu_hat)`` for all k.

    ``mu_hat > 1`` is required so the sequence is absolutely summable.
    """

    mu_hat: float
    K1: float

    def __post_init__(self):
        if not self.mu_hat > 1.0:
            raise ValueError(f"mu_hat must exceed 1 for summability, got {self.mu_hat}")
        if not self.K1 > 0.0:
            raise ValueError(f"K1 must be positive, got {self.K1}")


@dataclass(frozen=True)
class PowerSigma:
    """Analytic singular value law ``sigma_k = K * k**(-nu_hat)``."""

    nu_hat: float
    K: float

    def __post_init__(self):
        if not self.nu_hat > 0.0:
            raise ValueError(f"nu_hat must be positive, got {self.nu_hat}")
        if not self.K > 0.0:
            raise ValueError(f"K must be positive, got {self.K}")


def _as_1d_floats(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must have at least one entry")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DecaySequence:
    """Truncated representation of an absolutely summable coefficient sequence.

    ``values`` holds the leading N coefficients.  ``tail_model = None`` means
    the sequence is exactly the finite list (a sparse sequence); a
    :class:`PowerTail` means the entries follow ``|x_k| = K1 * k**(-mu_hat)``
    for *all* k, with ``values`` storing the first N samples of that law and
    ``signs`` the sign pattern of the continuation beyond N.
    """

    values: np.ndarray
    tail_model: PowerTail | None = None
    signs: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _as_1d_floats(self.values, "values"))
        if self.signs is not None:
            signs = _as_1d_floats(self.signs, "signs")
            if not np.all(np.abs(signs) == 1.0):
                raise ValueError("signs must contain only +1/-1")
            object.__setattr__(self, "signs", signs)
        if self.tail_model is not None:
            k = np.arange(1, len(self.values) + 1, dtype=float)
            law = self.tail_model.K1 * k ** (-self.tail_model.mu_hat)
            if not np.allclose(np.abs(self.values), law, rtol=1e-12, atol=0.0):
                raise ValueError("values do not sample the declared power tail law")

    @classmethod
    def power(cls, mu_hat, K1, n=DEFAULT_N, signs=None):
        """First ``n`` samples of the law ``|x_k| = K1 * k**(-mu_hat)``."""
        model = PowerTail(mu_hat=float(mu_hat), K1=float(K1))
        k = np.arange(1, n + 1, dtype=float)
        mags = model.K1 * k ** (-model.mu_hat)
        if signs is None:
            vals = mags
        else:
            s = np.asarray(signs, dtype=float)
            if s.shape != (n,):
                raise ValueError(f"signs must have shape ({n},), got {s.shape}")
            vals = s * mags
        return cls(values=vals, tail_model=model, signs=signs if signs is None else s)

    @classmethod
    def sparse(cls, values):
        """Exactly finitely supported sequence given by the listed entries."""
        return cls(values=values, tail_model=None)

    @classmethod
    def from_support(cls, support, n=None):
        """Sparse sequence from 1-based ``(index, value)`` pairs.

        ``n`` pads the representation with zeros up to length n (defaults to
        the largest index).
        """
        pairs = [(int(i), float(v)) for i, v in support]
        if not pairs:
            raise ValueError("support must be nonempty")
        top = max(i for i, _ in pairs)
        if any(i < 1 for i, _ in pairs):
            raise ValueError("support indices are 1-based and must be >= 1")
        length = top if n is None else int(n)
        if length < top:
            raise ValueError(f"n={length} is below the largest support index {top}")
        vals = np.zeros(length)
        for i, v in pairs:
            vals[i - 1] = v
        return cls.sparse(vals)

    def __len__(self):
        return len(self.values)

    @property
    def is_sparse(self):
        return self.tail_model is None

    def coefficients(self, n):
        """First ``n`` coefficients, extended by the tail law or by zeros."""
        n = int(n)
        if n <= len(self.values):
            return self.values[:n].copy()
        ext = np.zeros(n)
        ext[: len(self.values)] = self.values
        if self.tail_model is not None:
            k = np.arange(len(self.values) + 1, n + 1, dtype=float)
            ext[len(self.values):] = self.tail_model.K1 * k ** (-self.tail_model.mu_hat)
        return ext

    def l1_norm(self):
        return tail_sum(self, 0)


@dataclass(frozen=True)
class DiagonalOperator:
    """Compact diagonal operator acting as ``(A x)_k = sigma_k * x_k``.

    Singular values are listed in nonincreasing order; the dual elements
    representing the coordinate functionals have norms ``1/sigma_k``.
    """

    sigma: np.ndarray
    sigma_model: PowerSigma | None = None

    def __post_init__(self):
        object.__setattr__(self, "sigma", _as_1d_floats(self.sigma, "sigma"))
        if not np.all(self.sigma > 0.0):
            raise ValueError("singular values must be strictly positive")
        if np.any(np.diff(self.sigma) > 0.0):
            raise ValueError("singular values must be nonincreasing")
        if self.sigma_model is not None:
            k = np.arange(1, len(self.sigma) + 1, dtype=float)
            law = self.sigma_model.K * k ** (-self.sigma_model.nu_hat)
            if not np.allclose(self.sigma, law, rtol=1e-12, atol=0.0):
                raise ValueError("sigma does not sample the declared power law")

    @classmethod
    def power(cls, nu_hat, K=1.0, n=DEFAULT_N):
        """Singular values ``sigma_k = K * k**(-nu_hat)`` for k = 1..n."""
        model = PowerSigma(nu_hat=float(nu_hat), K=float(K))
        k = np.arange(1, n + 1, dtype=float)
        return cls(sigma=model.K * k ** (-model.nu_hat), sigma_model=model)

    def __len__(self):
        return len(self.sigma)

    @property
    def dim(self):
        """Coefficient-space dimension (equals the data-space dimension)."""
        return len(self.sigma)

    @property
    def norm(self):
        """Operator norm, attained at the first singular value."""
        return float(self.sigma[0])

    def dual_norms(self):
        """Norms ``1/sigma_k`` of the coordinate-functional representers."""
        return 1.0 / self.sigma


@dataclass(frozen=True)
class GeneralOperator:
    """Dense matrix stand-in for a bounded operator (rows: data, cols: coefficients)."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim != 2:
            raise ValueError(f"matrix must be two-dimensional, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("matrix must be finite")
        col_norms = np.linalg.norm(mat, axis=0)
        if np.any(col_norms == 0.0):
            raise ValueError("matrix has a zero column; coordinate recovery is impossible")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_diagonal(cls, op: DiagonalOperator):
        return cls(matrix=np.diag(op.sigma))

    @property
    def dim(self):
        """Coefficient-space dimension (number of columns)."""
        return self.matrix.shape[1]

    @property
    def norm(self):
        return float(np.linalg.norm(self.matrix, 2))

    def dual_norms(self):
        """Best-effort norms of least-squares preimages of the coordinate functionals.

        Row k is the minimum-norm solution f of ``A^T f = e_k``; for truncated
        ill-conditioned sections these are only surrogates for the infinite
        problem and should be read with care.
        """
        pinv_t = np.linalg.pinv(self.matrix.T)
        return np.linalg.norm(pinv_t, axis=0)


@dataclass(frozen=True)
class RegProblem:
    """Operator equation bundle: exact data, noisy data, and the noise level."""

    op: DiagonalOperator | GeneralOperator
    x_true: DecaySequence
    y_exact: np.ndarray
    y_noisy: np.ndarray
    delta: float
    p: int = 2

    def __post_init__(self):
        object.__setattr__(self, "y_exact", _as_1d_floats(self.y_exact, "y_exact"))
        object.__setattr__(self, "y_noisy", _as_1d_floats(self.y_noisy, "y_noisy"))
        if self.p != 2:
            raise ValueError("only the quadratic misfit (p = 2) is supported")
        if self.delta < 0.0:
            raise ValueError("noise level must be nonnegative")
        gap = float(np.linalg.norm(self.y_exact - self.y_noisy))
        if gap > self.delta * (1.0 + 1e-12):
            raise ValueError(
                f"noisy data violates the noise model: ||y - y_noisy|| = {gap} > delta = {self.delta}"
            )

    @property
    def is_diagonal(self):
        return isinstance(self.op, DiagonalOperator)

    def x_true_vec(self):
        """Exact solution coefficients at the operator's truncation level."""
        return self.x_true.coefficients(self.op.dim)


def _integral_tail(mu_hat, a):
    # int_a^inf t^(-mu) dt, the basic integral bound
    return a ** (1.0 - mu_hat) / (mu_hat - 1.0)


@functools.lru_cache(maxsize=4096)
def power_remainder(mu_hat, m, rel_tol=1e-10):
    """Bracketed evaluation of ``sum_{k>m} k**(-mu_hat)``.

    Extends the explicit partial sum past ``m`` until the convexity bracket
    (trapezoidal lower bound, midpoint upper bound) is tighter than
    ``rel_tol`` relative to the remainder, then returns the bracket midpoint
    together with its half-width.

    Returns
    -------
    (value, half_width) : tuple of float
    """
    mu_hat = float(mu_hat)
    if not mu_hat > 1.0:
        raise ValueError("remainder diverges for mu_hat <= 1")
    m = int(m)
    if m < 0:
        raise ValueError("m must be nonnegative")

    explicit = 0.0
    start = m + 1
    block = 2048
    while True:
        stop = start + block
        k = np.arange(start, stop, dtype=float)
        explicit += float(np.sum(k ** (-mu_hat)))
        last = stop - 1  # summed through k = last
        lower = _integral_tail(mu_hat, last + 1.0) + 0.5 * (last + 1.0) ** (-mu_hat)
        upper = _integral_tail(mu_hat, last + 0.5)
        half = 0.5 * (upper - lower)
        mid = explicit + 0.5 * (lower + upper)
        if half <= rel_tol * mid:
            return mid, half
        start = stop
        block *= 2


def tail_sum(x: DecaySequence, n: int) -> float:
    """Sum of ``|x_k|`` over k > n.

    Exact for sparse sequences; for a power tail the listed part is summed
    explicitly and the analytic remainder is bracketed to relative error
    1e-10 (midpoint returned).
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be nonnegative")
    listed = len(x)
    head = float(np.sum(np.abs(x.values[n:]))) if n < listed else 0.0
    if x.tail_model is None:
        return head
    m = max(n, listed)
    rem, _ = power_remainder(x.tail_model.mu_hat, m)
    return head + x.tail_model.K1 * rem


def tail_table(x: DecaySequence, m: int) -> np.ndarray:
    """All tail sums at once: entry n is ``tail_sum(x, n)`` for n = 0..m.

    Built by a reverse cumulative sum plus the analytic remainder, so no
    entry is formed by subtracting nearly equal totals.
    """
    m = int(m)
    if m < 0:
        raise ValueError("m must be nonnegative")
    listed = max(m, len(x))
    abs_x = np.abs(x.coefficients(listed))
    beyond = float(np.sum(abs_x[m:]))
    if x.tail_model is not None:
        rem, _ = power_remainder(x.tail_model.mu_hat, listed)
        beyond += x.tail_model.K1 * rem
    revcum = np.concatenate([np.cumsum(abs_x[:m][::-1])[::-1], [0.0]])
    return revcum + beyond


def growth_sum(op: DiagonalOperator, n: int) -> float:
    """Sum of the dual norms ``1/sigma_k`` over k <= n."""
    n = int(n)
    if not 1 <= n <= len(op):
        raise ValueError(f"n must lie in [1, {len(op)}], got {n}")
    return float(np.sum(1.0 / op.sigma[:n]))


def apply(op, x) -> np.ndarray:
    """Apply the forward operator to a coefficient vector."""
    x = np.asarray(x, dtype=float)
    if isinstance(op, DiagonalOperator):
        if x.shape != (len(op),):
            raise ValueError(f"expected coefficient vector of shape ({len(op)},), got {x.shape}")
        return op.sigma * x
    if isinstance(op, GeneralOperator):
        if x.shape != (op.matrix.shape[1],):
            raise ValueError(
                f"expected coefficient vector of shape ({op.matrix.shape[1]},), got {x.shape}"
            )
        return op.matrix @ x
    raise TypeError(f"unsupported operator type {type(op).__name__}")


def adjoint_apply(op, y) -> np.ndarray:
    """Apply the adjoint to a data vector."""
    y = np.asarray(y, dtype=float)
    if isinstance(op, DiagonalOperator):
        if y.shape != (len(op),):
            raise ValueError(f"expected data vector of shape ({len(op)},), got {y.shape}")
        return op.sigma * y
    if isinstance(op, GeneralOperator):
        if y.shape != (op.matrix.shape[0],):
            raise ValueError(
                f"expected data vector of shape ({op.matrix.shape[0]},), got {y.shape}"
            )
        return op.matrix.T @ y
    raise TypeError(f"unsupported operator type {type(op).__name__}")


def synthesize(op, x_true: DecaySequence, delta: float, seed: int) -> RegProblem:
    """Build a :class:`RegProblem` with noise of exactly the requested level.

    The noise direction is a seeded pseudo-random unit vector, so
    ``||y_noisy - y_exact|| = delta`` holds with equality up to rounding and
    a fixed seed reproduces the data bit for bit.
    """
    delta = float(delta)
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    x_vec = x_true.coefficients(op.dim)
    y_exact = apply(op, x_vec)
    if delta == 0.0:
        y_noisy = y_exact.copy()
    else:
        rng = np.random.default_rng(seed)
        u = rng.standard_normal(y_exact.shape)
        norm = np.linalg.norm(u)
        while norm == 0.0:  # pragma: no cover - probability zero
            u = rng.standard_normal(y_exact.shape)
            norm = np.linalg.norm(u)
        y_noisy = y_exact + delta * (u / norm)
    return RegProblem(op=op, x_true=x_true, y_exact=y_exact, y_noisy=y_noisy, delta=delta)


def weighted_sup_norm(op: DiagonalOperator, x) -> float:
    """Weighted sup norm ``sup_k |x_k| / (1/sigma_k) = sup_k sigma_k |x_k|``.

    Always bounded by the data-space norm of ``A x``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (len(op),):
        raise ValueError(f"expected coefficient vector of shape ({len(op)},), got {x.shape}")
    if x.size == 0:
        return 0.0
    return float(np.max(op.sigma * np.abs(x)))
