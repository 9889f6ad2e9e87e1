"""Group structures for exclusive-sparsity regularization.

Feature indices are 1-based in all public inputs, outputs, and file formats;
conversion to 0-based numpy indexing happens internally. Groups are stored
sorted and deduplicated, and may overlap unless stated otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np


class Unbalanced:
    """Sentinel returned by :func:`group_balance_ratio` when some group
    contains no true features (min count zero, ratio undefined)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBALANCED"


UNBALANCED = Unbalanced()


@dataclass(frozen=True)
class GroupSet:
    """A validated collection of index groups over features 1..n.

    Attributes
    ----------
    n : total feature count.
    groups : tuple of groups; each group a sorted tuple of unique 1-based indices.
    is_disjoint : True iff no index appears in two groups.
    covers_all : True iff the union of groups is {1..n}.
    """

    n: int
    groups: tuple[tuple[int, ...], ...]
    is_disjoint: bool
    covers_all: bool

    @property
    def m(self) -> int:
        return len(self.groups)

    def index_arrays(self) -> tuple[np.ndarray, ...]:
        """0-based index array per group, memoized for solver hot loops."""
        cached = getattr(self, "_idx0", None)
        if cached is None:
            cached = tuple(np.asarray(g, dtype=np.intp) - 1 for g in self.groups)
            object.__setattr__(self, "_idx0", cached)
        return cached

    def grouped_mask(self) -> np.ndarray:
        """Boolean mask of features that belong to at least one group."""
        mask = np.zeros(self.n, dtype=bool)
        for idx in self.index_arrays():
            mask[idx] = True
        return mask

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "groups": [list(g) for g in self.groups]})

    @staticmethod
    def from_json(text: str) -> "GroupSet":
        obj = json.loads(text)
        return new_group_set(obj["groups"], obj["n"])


def new_group_set(groups, n: int) -> GroupSet:
    """Validate and canonicalize a list of 1-based index groups over {1..n}."""
    if n < 1:
        raise ValueError(f"feature count must be positive, got {n}")
    if len(groups) == 0:
        raise ValueError("at least one group is required")
    canon = []
    for k, g in enumerate(groups):
        idx = sorted(set(int(i) for i in g))
        if not idx:
            raise ValueError(f"group {k + 1} is empty")
        if idx[0] < 1 or idx[-1] > n:
            raise ValueError(f"group {k + 1} has indices outside [1, {n}]")
        canon.append(tuple(idx))
    counts = np.zeros(n, dtype=np.intp)
    for g in canon:
        counts[np.asarray(g) - 1] += 1
    is_disjoint = bool(np.all(counts <= 1))
    covers_all = bool(np.all(counts >= 1))
    return GroupSet(n=n, groups=tuple(canon), is_disjoint=is_disjoint, covers_all=covers_all)


@dataclass(frozen=True)
class Support:
    """The set of true (nonzero) feature indices of a planted model."""

    indices: frozenset[int]

    def __post_init__(self):
        for i in self.indices:
            if i < 1:
                raise ValueError("support indices are 1-based and positive")

    @property
    def s(self) -> int:
        return len(self.indices)


def exclusive_norm_sq(w, G: GroupSet) -> float:
    """Squared exclusive norm: sum over groups of the squared l1 norm of w
    restricted to the group. Coordinates outside every group contribute 0."""
    w = np.asarray(w, dtype=float)
    if w.shape != (G.n,):
        raise ValueError(f"expected vector of length {G.n}, got shape {w.shape}")
    aw = np.abs(w)
    return float(sum(aw[idx].sum() ** 2 for idx in G.index_arrays()))


def overlap_matrix(G: GroupSet) -> np.ndarray:
    """Co-membership count matrix Q: Q[i, j] is the number of groups containing
    both i and j (diagonal: number of groups containing i).

    Satisfies u @ Q @ u == sum over groups of (sum of u over the group)^2
    for every real vector u, hence Q is positive semidefinite.
    """
    M = np.zeros((G.m, G.n), dtype=np.int64)
    for k, idx in enumerate(G.index_arrays()):
        M[k, idx] = 1
    return M.T @ M


def random_grouping(n: int, m: int, seed) -> GroupSet:
    """Uniformly random partition of {1..n} into m groups whose sizes differ
    by at most one.

    Implemented as a seeded uniform shuffle of 1..n followed by contiguous
    chunks; the first n mod m chunks get the larger size. The PRNG is NumPy's
    PCG64 (``numpy.random.default_rng``), so output is reproducible across
    platforms for a given seed.
    """
    if m < 1 or m > n:
        raise ValueError(f"group count must satisfy 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n) + 1
    small, extra = divmod(n, m)
    groups = []
    start = 0
    for k in range(m):
        size = small + (1 if k < extra else 0)
        groups.append(perm[start:start + size].tolist())
        start += size
    return new_group_set(groups, n)


def group_balance_ratio(G: GroupSet, support: Support):
    """Ratio of the largest to the smallest per-group true-feature count.

    Returns the UNBALANCED sentinel when some group contains no true feature,
    so Monte-Carlo simulations can tally that outcome instead of aborting.
    """
    for i in support.indices:
        if i > G.n:
            raise ValueError(f"support index {i} outside [1, {G.n}]")
    counts = [len(support.indices.intersection(g)) for g in G.groups]
    lo, hi = min(counts), max(counts)
    if lo == 0:
        return UNBALANCED
    return hi / lo


def suggest_group_count(s: int, c: float = 1.0) -> int:
    """Group count of the form c * s / ln(s), floored at one group."""
    if s < 2:
        raise ValueError(f"need at least 2 true features, got {s}")
    return max(1, round(c * s / math.log(s)))


def simulate_balance(n: int, s: int, m: int, t: float, trials: int, seed) -> dict:
    """Monte-Carlo check of the random-grouping balance guarantee.

    Each trial draws a uniform random support of size s over {1..n} and a
    fresh random grouping into m groups, then tests whether the balance ratio
    is within (1+t)/(1-t). Returns tallies of within-bound and unbalanced
    (empty-group-support) trials.
    """
    if not 0 < t < 1:
        raise ValueError("t must lie in (0, 1)")
    if s > n:
        raise ValueError("support size cannot exceed feature count")
    rng = np.random.default_rng(seed)
    bound = (1 + t) / (1 - t)
    within = 0
    unbalanced = 0
    for _ in range(trials):
        support = Support(frozenset((rng.choice(n, size=s, replace=False) + 1).tolist()))
        G = random_grouping(n, m, rng)
        ratio = group_balance_ratio(G, support)
        if ratio is UNBALANCED:
            unbalanced += 1
        elif ratio <= bound:
            within += 1
    return {
        "n": n,
        "s": s,
        "m": m,
        "t": t,
        "trials": trials,
        "bound_ratio": bound,
        "success_fraction": within / trials,
        "unbalanced_fraction": unbalanced / trials,
    }
