"""Exclusive-sparsity (l1,2) regularized optimization: exact cone-projection
proximal kernels, accelerated solvers for smooth and hinge losses, a random
grouping scheme with a balance guarantee, synthetic benchmark generators,
and brute-force certification oracles."""

from .estimators import ExclusiveLasso, ExclusiveSvmClassifier
from .elasso import ElassoProblem, solve_fista_locp, solve_fista_pcp
from .esvm import EsvmProblem, solve_fista_licp
from .fista import SolveConfig, SolveHistory, fista_solve
from .groups import (GroupSet, Support, UNBALANCED, exclusive_norm_sq,
                     group_balance_ratio, new_group_set, overlap_matrix,
                     random_grouping, suggest_group_count)
from .prox import (ConePoint, project_box, project_l1_cone, project_linf_cone,
                   project_nonneg_pair, prox_exclusive_sq_disjoint, soft_threshold)

__all__ = [
    "ConePoint", "ElassoProblem", "EsvmProblem", "ExclusiveLasso",
    "ExclusiveSvmClassifier", "GroupSet", "SolveConfig", "SolveHistory",
    "Support", "UNBALANCED", "exclusive_norm_sq", "fista_solve",
    "group_balance_ratio", "new_group_set", "overlap_matrix", "project_box",
    "project_l1_cone", "project_linf_cone", "project_nonneg_pair",
    "prox_exclusive_sq_disjoint", "random_grouping", "soft_threshold",
    "solve_fista_licp", "solve_fista_locp", "solve_fista_pcp",
    "suggest_group_count",
]

__version__ = "0.1.0"
