"""Least squares, trimmed-mean min-max regression heuristics, and MoM regression.

The trimmed min-max objective over regressor pairs (beta_m, beta_M) is
approached by two heuristics: alternating Armijo sub-gradient steps over the
current active set, and alternating exact least-squares refits ("plug-in").
The median-of-means variant replaces the active set by the bucket whose mean
loss difference achieves the median. Best-MoM sweeps bucket counts using
oracle access to the true coefficients; it exists purely as an infeasible
benchmark baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .synthdata import Dataset, RngSeed

__all__ = [
    "LINE_SEARCH_CAP",
    "GdConfig",
    "RegressorPair",
    "fit_least_squares",
    "active_set",
    "aasd",
    "plug_in",
    "mom_regression",
    "best_mom",
    "loss_l2",
    "divisors",
]

# Backtracking halvings allowed before a half-iteration accepts a zero step.
LINE_SEARCH_CAP = 60


@dataclass(frozen=True)
class GdConfig:
    """Step-size and stopping parameters for the alternating descent loops."""

    tol_delta: float = 1e-4
    eta0: float = 1.0
    xi0: float = 1.0
    theta: float = 0.5
    max_iters: int = 1000

    def __post_init__(self) -> None:
        if not (self.tol_delta > 0 and self.eta0 > 0 and self.xi0 > 0):
            raise ValueError("tol_delta, eta0 and xi0 must be positive")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be a positive integer")


@dataclass
class RegressorPair:
    """The (min, max) iterates of the saddle-point heuristics."""

    beta_m: np.ndarray
    beta_M: np.ndarray

    def __post_init__(self) -> None:
        self.beta_m = np.asarray(self.beta_m, dtype=float)
        self.beta_M = np.asarray(self.beta_M, dtype=float)
        if self.beta_m.shape != self.beta_M.shape or self.beta_m.ndim != 1:
            raise ValueError("beta_m and beta_M must be vectors of equal length")
        if not (np.all(np.isfinite(self.beta_m)) and np.all(np.isfinite(self.beta_M))):
            raise ValueError("regressor pair contains non-finite entries")

    @classmethod
    def zeros(cls, d: int) -> "RegressorPair":
        return cls(np.zeros(d), np.zeros(d))


def fit_least_squares(X, y) -> np.ndarray:
    """Minimum-norm least-squares solution of X beta ~ y.

    Satisfies the normal-equation residual bound
    ||X^T (y - X beta)||_inf <= 1e-8 * (1 + ||X^T y||_inf) on
    well-conditioned systems; rank-deficient systems get the minimum-norm
    minimizer.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be n-by-d and y a matching length-n vector")
    if X.shape[0] < 1:
        raise ValueError("need at least one observation")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("least-squares input contains non-finite entries")
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    return beta


def _loss_diffs(X, y, beta_m, beta_M) -> np.ndarray:
    rm = X @ beta_m - y
    rM = X @ beta_M - y
    return rm * rm - rM * rM


def _active_indices(X, y, beta_m, beta_M, k: int) -> np.ndarray:
    """Indices surviving removal of the k largest and k smallest loss diffs.

    Ties resolve by stable sort on (value, original index).
    """
    n = y.shape[0]
    if k == 0:
        return np.arange(n)
    order = np.argsort(_loss_diffs(X, y, beta_m, beta_M), kind="stable")
    keep = order[k : n - k]
    keep.sort()
    return keep


def active_set(pair: RegressorPair, data: Dataset, k: int) -> np.ndarray:
    """Sorted indices over which the trimmed loss difference is a plain mean."""
    _check_trim(k, data.n)
    return _active_indices(data.X, data.y, pair.beta_m, pair.beta_M, k)


def _check_trim(k: int, n: int) -> None:
    if k < 0 or 2 * k >= n:
        raise ValueError(f"need 0 <= 2k < n, got k={k}, n={n}")


def _armijo_half_step(XI, yI, beta, step, theta):
    """One grown-then-backtracked gradient step on the active-set SSE.

    Tries beta - step * grad, shrinking the step by theta while the SSE over
    the active rows increases. After LINE_SEARCH_CAP shrinks the iterate is
    kept unchanged (zero step). Returns (new_beta, step) so the accepted
    step size carries over to the next iteration.
    """
    resid = yI - XI @ beta
    grad = -2.0 * (XI.T @ resid)
    sse0 = float(resid @ resid)
    for _ in range(LINE_SEARCH_CAP + 1):
        cand = beta - step * grad
        r = XI @ cand - yI
        if float(r @ r) <= sse0:
            return cand, step
        step *= theta
    return beta, step


def aasd(
    data: Dataset,
    k: int,
    cfg: Optional[GdConfig] = None,
    init: Optional[RegressorPair] = None,
) -> RegressorPair:
    """Alternating Armijo sub-gradient descent on the trimmed min-max objective.

    Each iteration grows the step size by 1/theta, recomputes the active set,
    descends beta_m on the frozen active-set SSE with backtracking, then
    recomputes the active set with the updated beta_m and applies the
    symmetric update to beta_M. Stops when the larger iterate movement drops
    to tol_delta, or after max_iters iterations. beta_m is the regression
    estimate.
    """
    cfg = cfg or GdConfig()
    X, y = data.X, data.y
    n, d = X.shape
    _check_trim(k, n)
    if init is None:
        init = RegressorPair.zeros(d)
    beta_m = init.beta_m.copy()
    beta_M = init.beta_M.copy()
    eta = cfg.eta0
    xi = cfg.xi0
    for _ in range(cfg.max_iters):
        eta /= cfg.theta
        idx = _active_indices(X, y, beta_m, beta_M, k)
        new_m, eta = _armijo_half_step(X[idx], y[idx], beta_m, eta, cfg.theta)

        xi /= cfg.theta
        idx = _active_indices(X, y, new_m, beta_M, k)
        new_M, xi = _armijo_half_step(X[idx], y[idx], beta_M, xi, cfg.theta)

        delta = max(
            float(np.linalg.norm(beta_m - new_m)),
            float(np.linalg.norm(beta_M - new_M)),
        )
        beta_m, beta_M = new_m, new_M
        if delta <= cfg.tol_delta:
            break
    return RegressorPair(beta_m, beta_M)


def plug_in(
    data: Dataset,
    k: int,
    init: Optional[RegressorPair] = None,
    iters: int = 2,
) -> RegressorPair:
    """Alternating exact least-squares refits on the current active set."""
    X, y = data.X, data.y
    n, d = X.shape
    _check_trim(k, n)
    if iters < 1:
        raise ValueError("iters must be a positive integer")
    if init is None:
        init = RegressorPair.zeros(d)
    beta_m = init.beta_m.copy()
    beta_M = init.beta_M.copy()
    for _ in range(iters):
        idx = _active_indices(X, y, beta_m, beta_M, k)
        beta_m = fit_least_squares(X[idx], y[idx])
        idx = _active_indices(X, y, beta_m, beta_M, k)
        beta_M = fit_least_squares(X[idx], y[idx])
    return RegressorPair(beta_m, beta_M)


def _bucket_layout(n: int, num_blocks: int):
    """Contiguous balanced bucket offsets: sizes floor(n/K) or ceil(n/K)."""
    base, extra = divmod(n, num_blocks)
    sizes = np.full(num_blocks, base, dtype=np.intp)
    sizes[:extra] += 1
    starts = np.zeros(num_blocks, dtype=np.intp)
    np.cumsum(sizes[:-1], out=starts[1:])
    return starts, sizes


def _median_bucket(diffs, starts, sizes) -> int:
    """Index of the bucket whose mean achieves the median of bucket means.

    For an even bucket count the lower of the two middle buckets is used;
    ties resolve by bucket order (stable sort).
    """
    means = np.add.reduceat(diffs, starts) / sizes
    order = np.argsort(means, kind="stable")
    return int(order[(len(order) - 1) // 2])


def mom_regression(
    data: Dataset,
    num_blocks: int,
    cfg: Optional[GdConfig] = None,
    init: Optional[RegressorPair] = None,
    rng: Optional[RngSeed] = None,
) -> RegressorPair:
    """Median-of-means analogue of the alternating descent heuristic.

    The sample is shuffled once with the supplied seed and split into
    ``num_blocks`` balanced contiguous buckets. Per iteration, the bucket
    achieving the median of the bucket means of the loss difference plays
    the role of the active set in the alternating Armijo updates; the
    stopping rule matches the trimmed-mean descent.
    """
    cfg = cfg or GdConfig()
    n, d = data.X.shape
    if not 1 <= num_blocks <= n:
        raise ValueError(f"num_blocks must be in [1, {n}], got {num_blocks}")
    if init is None:
        init = RegressorPair.zeros(d)
    if rng is None:
        rng = RngSeed(0)
    perm = rng.generator().permutation(n)
    Xs = data.X[perm]
    ys = data.y[perm]
    starts, sizes = _bucket_layout(n, num_blocks)

    beta_m = init.beta_m.copy()
    beta_M = init.beta_M.copy()
    eta = cfg.eta0
    xi = cfg.xi0
    for _ in range(cfg.max_iters):
        eta /= cfg.theta
        b = _median_bucket(_loss_diffs(Xs, ys, beta_m, beta_M), starts, sizes)
        sl = slice(starts[b], starts[b] + sizes[b])
        new_m, eta = _armijo_half_step(Xs[sl], ys[sl], beta_m, eta, cfg.theta)

        xi /= cfg.theta
        b = _median_bucket(_loss_diffs(Xs, ys, new_m, beta_M), starts, sizes)
        sl = slice(starts[b], starts[b] + sizes[b])
        new_M, xi = _armijo_half_step(Xs[sl], ys[sl], beta_M, xi, cfg.theta)

        delta = max(
            float(np.linalg.norm(beta_m - new_m)),
            float(np.linalg.norm(beta_M - new_M)),
        )
        beta_m, beta_M = new_m, new_M
        if delta <= cfg.tol_delta:
            break
    return RegressorPair(beta_m, beta_M)


def best_mom(
    data: Dataset,
    candidate_Ks: Optional[Sequence[int]] = None,
    cfg: Optional[GdConfig] = None,
    init: Optional[RegressorPair] = None,
    rng: Optional[RngSeed] = None,
    beta_star=None,
    Sigma=None,
):
    """Oracle sweep over bucket counts; returns (best_K, best_pair).

    Runs the MoM regression for every candidate bucket count and keeps the
    one minimizing the population-covariance loss against the known true
    coefficients. Infeasible in practice (it peeks at beta_star); used only
    to benchmark against.
    """
    if beta_star is None or Sigma is None:
        raise ValueError("best_mom needs the true coefficients and covariance")
    if candidate_Ks is None:
        candidate_Ks = divisors(data.n)
    candidate_Ks = list(candidate_Ks)
    if not candidate_Ks:
        raise ValueError("candidate bucket counts must be nonempty")
    best = None
    for K in candidate_Ks:
        pair = mom_regression(data, K, cfg, init, rng)
        loss = loss_l2(pair.beta_m, beta_star, Sigma)
        if best is None or loss < best[0]:
            best = (loss, K, pair)
    return best[1], best[2]


def loss_l2(beta_hat, beta_star, Sigma) -> float:
    """Prediction-distance loss sqrt((b - b*)^T Sigma (b - b*))."""
    bh = np.asarray(beta_hat, dtype=float)
    bs = np.asarray(beta_star, dtype=float)
    S = np.asarray(Sigma, dtype=float)
    if bh.shape != bs.shape or bh.ndim != 1:
        raise ValueError("coefficient vectors must have matching lengths")
    if S.shape != (bh.size, bh.size):
        raise ValueError(f"Sigma must be {bh.size}x{bh.size}, got {S.shape}")
    if not np.allclose(S, S.T, rtol=1e-10, atol=1e-12):
        raise ValueError("Sigma must be symmetric")
    diff = bh - bs
    quad = float(diff @ S @ diff)
    return math.sqrt(max(quad, 0.0))


def divisors(n: int) -> list:
    """All positive divisors of n, ascending."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    small, large = [], []
    step = 1
    while step * step <= n:
        if n % step == 0:
            small.append(step)
            if step != n // step:
                large.append(n // step)
        step += 1
    return small + large[::-1]
