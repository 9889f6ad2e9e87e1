"""Scikit-learn style estimators wrapping the exclusive-sparsity solvers.

Both estimators take group structure either as a GroupSet, as a list of
1-based index lists, or as ``n_groups`` for a seeded random near-equal
partition of the features. With no group information at all, every feature
lands in one big group (the plain-l1-like special case).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .elasso import ElassoProblem, solve_fista_locp, solve_fista_pcp
from .esvm import EsvmProblem, accuracy, duality_gap, predict, solve_fista_licp
from .fista import SolveConfig
from .groups import GroupSet, new_group_set, random_grouping


def _resolve_groups(groups, n_groups, n_features, random_state) -> GroupSet:
    if groups is not None:
        if isinstance(groups, GroupSet):
            if groups.n != n_features:
                raise ValueError(
                    f"group universe {groups.n} does not match {n_features} features"
                )
            return groups
        return new_group_set(groups, n_features)
    if n_groups is not None:
        return random_grouping(n_features, n_groups, random_state)
    return new_group_set([list(range(1, n_features + 1))], n_features)


def _solve_config(max_iters, rel_tol, step_mode, gamma, random_state) -> SolveConfig:
    return SolveConfig(max_iters=max_iters, rel_tol=rel_tol, step_mode=step_mode,
                       gamma=gamma, seed=random_state)


class ExclusiveLasso(BaseEstimator, RegressorMixin):
    """Least-squares regression with the half squared exclusive-norm penalty.

    Parameters
    ----------
    lam : regularization weight on the half squared exclusive norm.
    groups : GroupSet or list of 1-based index lists; None uses n_groups or
        a single all-features group.
    n_groups : build a seeded random near-equal partition at fit time.
    solver : "auto" picks the grouped-prox route for disjoint groups and the
        nonnegative-split route otherwise; "pcp" and "locp" force a route.
    """

    def __init__(self, lam=1.0, groups=None, n_groups=None, solver="auto",
                 max_iters=100_000, rel_tol=1e-8, step_mode="backtracking",
                 gamma=None, random_state=None):
        self.lam = lam
        self.groups = groups
        self.n_groups = n_groups
        self.solver = solver
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.step_mode = step_mode
        self.gamma = gamma
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        G = _resolve_groups(self.groups, self.n_groups, X.shape[1], self.random_state)
        problem = ElassoProblem(X, y, G, self.lam)
        solver = self.solver
        if solver == "auto":
            solver = "locp" if G.is_disjoint else "pcp"
        if solver == "locp":
            w, history = solve_fista_locp(problem, self._config())
        elif solver == "pcp":
            w, history = solve_fista_pcp(problem, self._config())
        else:
            raise ValueError(f"unknown solver {self.solver!r}")
        self.coef_ = w
        self.group_set_ = G
        self.history_ = history
        self.n_iter_ = len(history)
        self.n_features_in_ = X.shape[1]
        return self

    def _config(self):
        return _solve_config(self.max_iters, self.rel_tol, self.step_mode,
                             self.gamma, self.random_state)

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_


class ExclusiveSvmClassifier(BaseEstimator, ClassifierMixin):
    """Linear max-margin classifier with ridge plus squared exclusive-norm
    regularization, trained through the dual with a duality-gap certificate.

    Labels must be -1/+1 (no intercept is fitted; append a constant feature
    outside all groups if one is needed).
    """

    def __init__(self, alpha=1.0, beta=1.0, groups=None, n_groups=None,
                 gap_tol=1e-4, max_iters=100_000, rel_tol=1e-8,
                 step_mode="backtracking", gamma=None, random_state=None):
        self.alpha = alpha
        self.beta = beta
        self.groups = groups
        self.n_groups = n_groups
        self.gap_tol = gap_tol
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.step_mode = step_mode
        self.gamma = gamma
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        G = _resolve_groups(self.groups, self.n_groups, X.shape[1], self.random_state)
        problem = EsvmProblem(X.T, y, G, self.alpha, self.beta)
        cfg = _solve_config(self.max_iters, self.rel_tol, self.step_mode,
                            self.gamma, self.random_state)
        w, state, history = solve_fista_licp(problem, cfg, gap_tol=self.gap_tol)
        self.coef_ = w
        self.classes_ = np.array([-1, 1])
        self.group_set_ = G
        self.dual_state_ = state
        self.duality_gap_ = duality_gap(problem, state)
        self.history_ = history
        self.n_iter_ = len(history)
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return predict(self.coef_, check_array(X).T)

    def score(self, X, y, sample_weight=None):
        return accuracy(self.predict(X), np.asarray(y))
