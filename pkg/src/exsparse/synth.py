"""Reproducible synthetic benchmark generators.

All randomness comes from NumPy's PCG64 (``numpy.random.default_rng``); a
generator instance may be passed in place of an integer seed. Draw orders
are fixed and documented per generator so datasets are byte-reproducible
given (parameters, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .groups import GroupSet, new_group_set, random_grouping


@dataclass(frozen=True, eq=False)
class ElassoDataset:
    """Gaussian regression data with a planted group-structured model:
    y = X w_star + sigma * noise."""

    X: np.ndarray
    y: np.ndarray
    w_star: np.ndarray
    G: GroupSet
    lambda_suggested: float
    sigma: float


@dataclass(frozen=True, eq=False)
class EsvmDataset:
    """Two-class Gaussian data with class means +/- d * w_star; w_star has
    exactly one nonzero per group."""

    X: np.ndarray
    labels: np.ndarray
    w_star: np.ndarray
    G: GroupSet
    d: float


def _contiguous_groups(n: int, m: int) -> GroupSet:
    # deterministic near-equal split; the first n mod m chunks get the extra index
    small, extra = divmod(n, m)
    groups, start = [], 1
    for k in range(m):
        size = small + (1 if k < extra else 0)
        groups.append(list(range(start, start + size)))
        start += size
    return new_group_set(groups, n)


def _gaussian_matrix(rng, rows: int, cols: int) -> np.ndarray:
    # column-major fill so the draw order is independent of the row count layout
    return rng.standard_normal(rows * cols).reshape((rows, cols), order="F")


def gen_elasso_disjoint(n, N, m, k_per_group, sigma, seed) -> ElassoDataset:
    """Disjoint-group regression benchmark.

    Groups are the contiguous near-equal split of 1..n (no randomness).
    Draw order: X column-major, then per group the nonzero positions, then
    one value vector over all planted positions, then the noise vector.
    The suggested weight is 0.4 / ||w_star||_1.
    """
    if m < 1 or m > n:
        raise ValueError("need 1 <= m <= n")
    G = _contiguous_groups(n, m)
    if k_per_group < 1 or k_per_group > min(len(g) for g in G.groups):
        raise ValueError("k_per_group must fit inside the smallest group")
    rng = np.random.default_rng(seed)
    X = _gaussian_matrix(rng, N, n)
    positions = np.concatenate([
        rng.choice(idx, size=k_per_group, replace=False) for idx in G.index_arrays()
    ])
    w = np.zeros(n)
    w[positions] = rng.standard_normal(positions.size)
    noise = rng.standard_normal(N)
    y = X @ w + sigma * noise
    return ElassoDataset(X, y, w, G, 0.4 / np.abs(w).sum(), sigma)


def gen_elasso_overlap(n, N, m, size_min, size_max, k_per_group, sigma, seed) -> ElassoDataset:
    """Overlapping-group regression benchmark.

    Draw order: per group a size uniform in [size_min, size_max] and then
    its members (uniform subset of 1..n); then X column-major; then per
    group up to k_per_group nonzero positions, skipping positions already
    planted by an earlier group; then one value vector; then noise.
    """
    if not (1 <= size_min <= size_max <= n):
        raise ValueError("need 1 <= size_min <= size_max <= n")
    rng = np.random.default_rng(seed)
    groups = []
    for _ in range(m):
        size = int(rng.integers(size_min, size_max + 1))
        groups.append((rng.choice(n, size=size, replace=False) + 1).tolist())
    G = new_group_set(groups, n)
    X = _gaussian_matrix(rng, N, n)
    planted = np.zeros(n, dtype=bool)
    positions = []
    for idx in G.index_arrays():
        avail = idx[~planted[idx]]
        take = min(k_per_group, avail.size)
        if take > 0:
            chosen = rng.choice(avail, size=take, replace=False)
            planted[chosen] = True
            positions.extend(chosen.tolist())
    positions = np.asarray(positions, dtype=np.intp)
    w = np.zeros(n)
    w[positions] = rng.standard_normal(positions.size)
    noise = rng.standard_normal(N)
    y = X @ w + sigma * noise
    return ElassoDataset(X, y, w, G, 0.4 / np.abs(w).sum(), sigma)


def _plant_classifier(n, m, rng):
    # random near-equal partition, then one standard-normal nonzero per group
    G = random_grouping(n, m, rng)
    positions = np.concatenate([
        rng.choice(idx, size=1) for idx in G.index_arrays()
    ])
    w = np.zeros(n)
    w[positions] = rng.standard_normal(positions.size)
    return G, w


def sample_esvm(w_star, d, count, rng):
    """Draw `count` fresh samples (count even): one standard-normal base
    matrix of count/2 columns is shifted by +d*w_star for the positive class
    and by -d*w_star for the negative class, so sample i and sample
    i + count/2 share their noise column. Every sample's marginal law is
    N(+/- d*w_star, I). Returns (X, labels) with the first half labeled +1.
    """
    if count % 2:
        raise ValueError("sample count must be even")
    w_star = np.asarray(w_star, dtype=float)
    rng = np.random.default_rng(rng)
    half = count // 2
    X0 = _gaussian_matrix(rng, w_star.size, half)
    shift = d * w_star[:, None]
    X = np.concatenate([X0 + shift, X0 - shift], axis=1)
    labels = np.concatenate([np.ones(half, dtype=int), -np.ones(half, dtype=int)])
    return X, labels


def gen_esvm(n, m, d, seed) -> EsvmDataset:
    """Classification benchmark with one sample per group (m samples, m
    groups of near-equal size over n features).

    Draw order: the random partition, then per group the nonzero position,
    then one value vector over the m nonzeros, then the shared noise matrix
    (n x m/2, column-major) that both classes shift in opposite directions.
    Class means differ by exactly 2*d*w_star.
    """
    if m % 2:
        raise ValueError("sample count m must be even")
    rng = np.random.default_rng(seed)
    G, w = _plant_classifier(n, m, rng)
    X, labels = sample_esvm(w, d, m, rng)
    return EsvmDataset(X, labels, w, G, d)


def analytic_error_rate(w_star, d) -> float:
    """Gaussian-CDF misclassification rate of the planted classifier:
    Phi(-d * ||w_star||)."""
    z = -d * float(np.linalg.norm(w_star))
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def tune_margin_scale(n, m, target_error, seed, holdout_size=None,
                      tol=1e-3, max_iter=200) -> float:
    """Bisection for the margin scale d at which the planted classifier's
    holdout misclassification rate hits target_error.

    Uses the same seed-aligned planting as gen_esvm, so gen_esvm(n, m, d,
    seed) carries the tuned w_star. Each bisection step evaluates the rate
    on a fresh seeded holdout of max(10*m, 200000) signed margins (a sample
    x contributes the margin w_star'x, distributed N(+/- d||w||^2, ||w||^2)).
    Stops once the holdout rate is within tol of the target (tol defaults
    well inside the one-percentage-point contract). Deterministic given seed.
    """
    if not 0 < target_error < 0.5:
        raise ValueError("target_error must lie in (0, 0.5)")
    rng = np.random.default_rng(seed)
    _, w = _plant_classifier(n, m, rng)
    wnorm = float(np.linalg.norm(w))
    if wnorm == 0:
        raise RuntimeError("degenerate planted model (w_star = 0)")
    size = holdout_size or max(10 * m, 200_000)

    def rate(d):
        z = rng.standard_normal(size)
        return float(np.mean(d * wnorm + z <= 0))

    lo, hi = 0.0, 1.0 / wnorm
    for _ in range(60):
        if rate(hi) < target_error:
            break
        hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the target error")
    best_d, best_gap = hi, np.inf
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        r = rate(mid)
        gap = abs(r - target_error)
        if gap < best_gap:
            best_d, best_gap = mid, gap
        if gap <= tol:
            return mid
        if r > target_error:
            lo = mid
        else:
            hi = mid
    return best_d
