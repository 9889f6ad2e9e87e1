"""Exclusive SVM: hinge loss + (alpha/2)*||w||^2 + (beta/2)*||w||_e^2,
solved through its dual.

The dual variables are a per-sample vector u in [0, 1]^N and one free
vector v^g per group; the smooth dual part is
(1/2 alpha) * ||Z u - sum_g vbar^g||^2 - 1'u with Z the label-signed sample
matrix and vbar^g the zero-extension of v^g to all n features. The
non-smooth part separates into a box constraint on u and a squared
linf-norm per group, so the prox reduces to a clamp plus per-group
linf-cone projections. The primal solution is recovered as
w = (Z u - sum_g vbar^g) / alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fista import ProxPart, SmoothPart, SolveConfig, fista_solve, \
    power_iteration_lipschitz
from .groups import GroupSet, exclusive_norm_sq
from .prox import _linf_cone_rows_zero_b, project_box, project_linf_cone

_BOX_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EsvmProblem:
    """Samples stored column-major (X: features x samples), labels in {-1, +1},
    a group structure over the features, and positive weights alpha (ridge)
    and beta (exclusive term)."""

    X: np.ndarray
    labels: np.ndarray
    G: GroupSet
    alpha: float
    beta: float

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        labels = np.asarray(self.labels)
        if X.ndim != 2:
            raise ValueError("sample matrix must be 2-D (features x samples)")
        if labels.ndim != 1 or labels.size != X.shape[1]:
            raise ValueError("need one label per sample column")
        if not np.all(np.isin(labels, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        if X.shape[0] != self.G.n:
            raise ValueError(
                f"feature count {X.shape[0]} does not match group universe {self.G.n}"
            )
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", np.asarray(labels, dtype=float))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def n_samples(self) -> int:
        return self.X.shape[1]


@dataclass
class SignedSamples:
    """Matrix Z whose column i is label_i times sample column i."""

    Z: np.ndarray


def build_signed(X, labels) -> SignedSamples:
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    if not np.all(np.isin(labels, (-1, 1))):
        raise ValueError("labels must be -1 or +1")
    return SignedSamples(X * np.asarray(labels, dtype=float)[None, :])


@dataclass
class EsvmDualState:
    """Dual iterate: box-constrained u (one entry per sample) and one free
    vector per group."""

    u: np.ndarray
    v: list[np.ndarray]


def _group_layout(G: GroupSet):
    idx = G.index_arrays()
    sizes = np.array([a.size for a in idx], dtype=np.intp)
    concat = np.concatenate(idx)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    return concat, sizes, offsets


def _vbar_sum(G: GroupSet, v: list[np.ndarray]) -> np.ndarray:
    concat, _, _ = _group_layout(G)
    return np.bincount(concat, weights=np.concatenate(v), minlength=G.n)


def _residual(p: EsvmProblem, s: EsvmDualState, Z=None) -> np.ndarray:
    if Z is None:
        Z = build_signed(p.X, p.labels).Z
    return Z @ s.u - _vbar_sum(p.G, s.v)


def dual_objective(p: EsvmProblem, s: EsvmDualState) -> float:
    """Smooth-plus-separable dual value (the box indicator on u is asserted,
    not added)."""
    u = np.asarray(s.u, dtype=float)
    if u.min() < -_BOX_TOL or u.max() > 1 + _BOX_TOL:
        raise ValueError("dual variable u leaves the unit box")
    r = _residual(p, s)
    smooth = 0.5 / p.alpha * float(r @ r) - float(u.sum())
    vmax2 = sum(float(np.max(np.abs(vg))) ** 2 for vg in s.v)
    return smooth + 0.5 / p.beta * vmax2


def dual_gradient(p: EsvmProblem, s: EsvmDualState):
    """Gradient of the smooth dual part: (du, [dv^g per group])."""
    Z = build_signed(p.X, p.labels).Z
    r = _residual(p, s, Z)
    du = (Z.T @ r) / p.alpha - 1.0
    dv = [-(r[idx]) / p.alpha for idx in p.G.index_arrays()]
    return du, dv


def dual_prox(c, d_groups, gamma: float, beta: float) -> EsvmDualState:
    """Prox of the separable dual part: clamp u to [0, 1] and project each
    group vector onto the linf cone at level weight gamma/beta."""
    if gamma <= 0 or beta <= 0:
        raise ValueError("gamma and beta must be positive")
    u = project_box(c, 0.0, 1.0)
    v = [project_linf_cone(dg, 0.0, gamma / beta).x for dg in d_groups]
    return EsvmDualState(u, v)


def recover_primal(p: EsvmProblem, s: EsvmDualState) -> np.ndarray:
    """Primal weights w = (Z u - sum_g vbar^g) / alpha."""
    return _residual(p, s) / p.alpha


def primal_objective(p: EsvmProblem, w) -> float:
    """Hinge loss over label-signed margins plus both regularizers."""
    w = np.asarray(w, dtype=float)
    if w.shape != (p.n,):
        raise ValueError(f"expected vector of length {p.n}, got shape {w.shape}")
    Z = build_signed(p.X, p.labels).Z
    margins = Z.T @ w
    hinge = float(np.maximum(0.0, 1.0 - margins).sum())
    return hinge + 0.5 * p.alpha * float(w @ w) \
        + 0.5 * p.beta * exclusive_norm_sq(w, p.G)


def duality_gap(p: EsvmProblem, s: EsvmDualState) -> float:
    """Primal value at the recovered w plus the (minimization-form) dual
    value; nonnegative by weak duality and zero at optimality."""
    return primal_objective(p, recover_primal(p, s)) + dual_objective(p, s)


def dual_lipschitz_bound(p: EsvmProblem, iters: int = 80, seed=0) -> float:
    """Power-iteration bound on the dual Hessian norm: the Gram operator of
    [Z, -E] is Z Z' plus the per-feature group-membership counts on the
    diagonal, all divided by alpha."""
    Z = build_signed(p.X, p.labels).Z
    counts = np.zeros(p.n)
    for idx in p.G.index_arrays():
        counts[idx] += 1.0

    def matvec(v):
        return Z @ (Z.T @ v) + counts * v

    return power_iteration_lipschitz(matvec, p.n, iters, seed) / p.alpha


def solve_fista_licp(p: EsvmProblem, cfg: SolveConfig | None = None,
                     gap_tol: float = 1e-4):
    """Accelerated solve of the dual with per-group linf-cone prox steps.

    Terminates on the engine criteria or as soon as the duality gap
    certifies the recovered primal: gap <= gap_tol * (1 + |primal|).
    Returns (w, dual state, history).
    """
    cfg = cfg or SolveConfig()
    Z = build_signed(p.X, p.labels).Z
    concat, sizes, offsets = _group_layout(p.G)
    N = p.n_samples
    total = int(sizes.sum())
    alpha, beta = p.alpha, p.beta
    uniform = bool(np.all(sizes == sizes[0]))
    nrows = sizes.size

    def unpack(vec):
        vflat = vec[N:]
        return vec[:N], [vflat[o:o + s] for o, s in zip(offsets, sizes)]

    def value(vec):
        u, vflat = vec[:N], vec[N:]
        r = Z @ u - np.bincount(concat, weights=vflat, minlength=p.n)
        return 0.5 / alpha * float(r @ r) - float(u.sum())

    def gradient(vec):
        u, vflat = vec[:N], vec[N:]
        r = Z @ u - np.bincount(concat, weights=vflat, minlength=p.n)
        return np.concatenate([(Z.T @ r) / alpha - 1.0, -r[concat] / alpha])

    def h_value(vec):
        u, vflat = vec[:N], vec[N:]
        if u.min() < -_BOX_TOL or u.max() > 1 + _BOX_TOL:
            return np.inf
        gmax = np.maximum.reduceat(np.abs(vflat), offsets)
        return 0.5 / beta * float((gmax * gmax).sum())

    def prox(vec, gamma):
        u = np.clip(vec[:N], 0.0, 1.0)
        vflat = vec[N:]
        if uniform:
            rows, _ = _linf_cone_rows_zero_b(vflat.reshape(nrows, -1), gamma / beta)
            vnew = rows.ravel()
        else:
            vnew = np.concatenate([
                project_linf_cone(vflat[o:o + s], 0.0, gamma / beta).x
                for o, s in zip(offsets, sizes)
            ])
        return np.concatenate([u, vnew])

    F = SmoothPart(value, gradient, dual_lipschitz_bound(p, seed=cfg.seed or 0))
    H = ProxPart(prox, h_value)
    gid = np.concatenate([
        np.full(s, g, dtype=np.intp) for g, s in enumerate(sizes)
    ])

    def gap_stop(vec, _k):
        # duality_gap evaluated with the precomputed layout (hot path)
        u, vflat = vec[:N], vec[N:]
        r = Z @ u - np.bincount(concat, weights=vflat, minlength=p.n)
        w = r / alpha
        margins = Z.T @ w
        group_l1 = np.bincount(gid, weights=np.abs(w)[concat], minlength=sizes.size)
        primal = float(np.maximum(0.0, 1.0 - margins).sum()) \
            + 0.5 * alpha * float(w @ w) + 0.5 * beta * float(group_l1 @ group_l1)
        gmax = np.maximum.reduceat(np.abs(vflat), offsets)
        dual = 0.5 / alpha * float(r @ r) - float(u.sum()) \
            + 0.5 / beta * float(gmax @ gmax)
        if primal + dual <= gap_tol * (1.0 + abs(primal)):
            return "gap_tol"
        return None

    vec, history = fista_solve(F, H, np.zeros(N + total), cfg, extra_stop=gap_stop)
    u, v = unpack(vec)
    state = EsvmDualState(u, [vg.copy() for vg in v])
    return recover_primal(p, state), state, history


def predict(w, X) -> np.ndarray:
    """Label predictions sign(w'x) per sample column, with sign(0) := +1."""
    w = np.asarray(w, dtype=float)
    scores = w @ np.asarray(X, dtype=float)
    return np.where(scores >= 0, 1, -1)


def accuracy(pred, labels) -> float:
    """Fraction of agreeing labels."""
    pred = np.asarray(pred)
    labels = np.asarray(labels)
    if pred.shape != labels.shape:
        raise ValueError("prediction and label vectors must have equal length")
    return float(np.mean(pred == labels))
