"""Solvers for least squares + (lam/2) * squared-exclusive-norm.

Two accelerated routes to the same optimum:

* positive-cone projection (works for arbitrary, possibly overlapping
  groups): split w into nonnegative parts w = w_plus - w_minus, turning the
  regularizer into the smooth quadratic (lam/2) (w_plus + w_minus)' Q
  (w_plus + w_minus) with Q the group co-membership matrix, constrained to
  the nonnegative orthant;
* l1-cone projection (disjoint groups only): keep the regularizer in the
  prox and solve it exactly per group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fista import ProxPart, SmoothPart, SolveConfig, fista_solve, \
    power_iteration_lipschitz
from .groups import GroupSet, exclusive_norm_sq, overlap_matrix
from .prox import project_nonneg_pair, prox_exclusive_sq_disjoint


@dataclass(frozen=True, eq=False)
class ElassoProblem:
    """Least-squares data (X: samples x features, y) with a group structure
    and a positive regularization weight lam on the half squared norm."""

    X: np.ndarray
    y: np.ndarray
    G: GroupSet
    lam: float

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2:
            raise ValueError("design matrix must be 2-D (samples x features)")
        if X.shape[0] != y.size:
            raise ValueError(
                f"row count {X.shape[0]} does not match observation count {y.size}"
            )
        if X.shape[1] != self.G.n:
            raise ValueError(
                f"feature count {X.shape[1]} does not match group universe {self.G.n}"
            )
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[1]


@dataclass
class PcpState:
    """Nonnegative split w = w_plus - w_minus used by the positive-cone route."""

    w_plus: np.ndarray
    w_minus: np.ndarray

    @property
    def w(self) -> np.ndarray:
        return self.w_plus - self.w_minus


def elasso_objective(p: ElassoProblem, w) -> float:
    """0.5*||Xw - y||^2 + (lam/2) * squared exclusive norm of w."""
    w = np.asarray(w, dtype=float)
    if w.shape != (p.n,):
        raise ValueError(f"expected vector of length {p.n}, got shape {w.shape}")
    r = p.X @ w - p.y
    return float(0.5 * (r @ r) + 0.5 * p.lam * exclusive_norm_sq(w, p.G))


def pcp_smooth_gradient(p: ElassoProblem, state: PcpState, Q=None):
    """Gradient pair of the split smooth objective: the shared least-squares
    pull enters the two parts with opposite signs while the lam * Q *
    (w_plus + w_minus) coupling enters both with the same sign."""
    if Q is None:
        Q = overlap_matrix(p.G).astype(float)
    w = state.w
    g_ls = p.X.T @ (p.X @ w - p.y)
    qs = p.lam * (Q @ (state.w_plus + state.w_minus))
    return g_ls + qs, -g_ls + qs


def _pcp_parts(p: ElassoProblem):
    Q = overlap_matrix(p.G).astype(float)
    X, y, lam, n = p.X, p.y, p.lam, p.n

    def value(z):
        wp, wm = z[:n], z[n:]
        r = X @ (wp - wm) - y
        s = wp + wm
        return 0.5 * float(r @ r) + 0.5 * lam * float(s @ (Q @ s))

    def gradient(z):
        wp, wm = z[:n], z[n:]
        g_ls = X.T @ (X @ (wp - wm) - y)
        qs = lam * (Q @ (wp + wm))
        return np.concatenate([g_ls + qs, -g_ls + qs])

    def prox(z, _gamma):
        wp, wm = project_nonneg_pair(z[:n], z[n:])
        return np.concatenate([wp, wm])

    def h_value(z):
        return 0.0 if np.all(z >= 0) else np.inf

    L = pcp_lipschitz_bound(p, Q)
    return SmoothPart(value, gradient, L), ProxPart(prox, h_value)


def pcp_lipschitz_bound(p: ElassoProblem, Q=None, iters: int = 80, seed=0) -> float:
    """Upper bound 2*(||X'X|| + lam*||Q||) on the split Hessian norm, with
    both spectral norms estimated by power iteration."""
    if Q is None:
        Q = overlap_matrix(p.G).astype(float)
    X = p.X
    nrm_xtx = power_iteration_lipschitz(lambda v: X.T @ (X @ v), p.n, iters, seed)
    nrm_q = power_iteration_lipschitz(lambda v: Q @ v, p.n, iters, seed)
    return 2.0 * (nrm_xtx + p.lam * nrm_q)


def solve_fista_pcp(p: ElassoProblem, cfg: SolveConfig | None = None):
    """Accelerated solve through the nonnegative-split reformulation; valid
    for arbitrary (overlapping) groups. Returns (w, history)."""
    cfg = cfg or SolveConfig()
    F, H = _pcp_parts(p)
    z0 = np.zeros(2 * p.n)
    z, history = fista_solve(F, H, z0, cfg)
    return z[:p.n] - z[p.n:], history


def solve_fista_locp(p: ElassoProblem, cfg: SolveConfig | None = None):
    """Accelerated solve with the exact per-group l1-cone prox; requires
    disjoint groups. Returns (w, history)."""
    if not p.G.is_disjoint:
        raise ValueError("l1-cone route requires disjoint groups; use solve_fista_pcp")
    cfg = cfg or SolveConfig()
    X, y, lam, G = p.X, p.y, p.lam, p.G

    def value(w):
        r = X @ w - y
        return 0.5 * float(r @ r)

    def gradient(w):
        return X.T @ (X @ w - y)

    L = power_iteration_lipschitz(lambda v: X.T @ (X @ v), p.n, 80, cfg.seed or 0)
    F = SmoothPart(value, gradient, L)
    H = ProxPart(
        prox=lambda c, gamma: prox_exclusive_sq_disjoint(c, G, gamma * lam),
        value=lambda w: 0.5 * lam * exclusive_norm_sq(w, G),
    )
    w, history = fista_solve(F, H, np.zeros(p.n), cfg)
    return w, history
