"""Oracle suite behind the `verify` CLI subcommand: a fast, seeded
cross-section of the kernel-vs-oracle checks (the full acceptance battery
lives in the test suite)."""

from __future__ import annotations

import numpy as np

from .elasso import ElassoProblem, elasso_objective, solve_fista_locp, solve_fista_pcp
from .esvm import EsvmProblem, duality_gap, primal_objective, solve_fista_licp
from .fista import ProxPart, SmoothPart, SolveConfig, power_iteration_lipschitz
from .groups import new_group_set, overlap_matrix, simulate_balance
from .oracle import (dense_spectral_norm, oracle_esvm_subgradient,
                     oracle_ista_elasso_batch, oracle_l1_cone, oracle_linf_cone)
from .prox import (l1_cone_kkt_residual, linf_cone_stationarity_residual,
                   project_l1_cone, project_linf_cone)
from .synth import gen_elasso_disjoint, gen_esvm, tune_margin_scale


def _cone_objective(a, b, zeta, point):
    a = np.asarray(a, dtype=float)
    return 0.5 * float(((point.x - a) ** 2).sum()) + 0.5 * zeta * (point.y - b) ** 2


def _check_groups(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(3, 30))
        m = int(rng.integers(1, 6))
        groups = [(rng.choice(n, size=rng.integers(1, n + 1), replace=False) + 1).tolist()
                  for _ in range(m)]
        G = new_group_set(groups, n)
        Q = overlap_matrix(G)
        u = rng.standard_normal(n)
        direct = sum(u[np.asarray(g) - 1].sum() ** 2 for g in G.groups)
        worst = max(worst, abs(u @ Q @ u - direct) / max(1.0, abs(direct)))
    ok = worst <= 1e-10
    sim = simulate_balance(500, 100, 5, 0.5, 200, seed)
    ok = ok and sim["success_fraction"] >= 0.9
    return ok, f"uQu rel err {worst:.1e}; balance success {sim['success_fraction']:.2f}"


def _check_prox(seed, instances=2000):
    rng = np.random.default_rng(seed)
    worst_gap = 0.0
    worst_resid = 0.0
    for _ in range(instances):
        d = int(rng.integers(1, 9))
        a = rng.standard_normal(d)
        b = 0.0 if rng.random() < 0.5 else float(np.abs(rng.standard_normal()))
        zeta = float(rng.choice([0.1, 1.0, 10.0]))
        p1 = project_l1_cone(a, b, zeta)
        worst_gap = max(worst_gap, _cone_objective(a, b, zeta, p1)
                        - oracle_l1_cone(a, b, zeta, 1e-3).objective)
        worst_resid = max(worst_resid, l1_cone_kkt_residual(a, b, zeta, p1))
        p2 = project_linf_cone(a, b, zeta)
        worst_gap = max(worst_gap, _cone_objective(a, b, zeta, p2)
                        - oracle_linf_cone(a, b, zeta, 1e-3).objective)
        worst_resid = max(worst_resid, linf_cone_stationarity_residual(a, b, zeta, p2))
    ok = worst_gap <= 1e-8 and worst_resid <= 1e-9
    return ok, f"worst obj excess {worst_gap:.1e}; worst residual {worst_resid:.1e}"


def _check_fista(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((40, 40))
    A = A @ A.T / 40 + np.eye(40)
    est = power_iteration_lipschitz(lambda v: A @ v, 40, 80, seed)
    ref = dense_spectral_norm(A)
    ok = abs(est - ref) / ref <= 1e-4
    c = rng.standard_normal(40)
    F = SmoothPart(lambda x: 0.5 * float((x - c) @ (x - c)), lambda x: x - c, 1.0)
    H = ProxPart(lambda z, g: z, lambda x: 0.0)
    from .fista import fista_solve

    x, hist = fista_solve(F, H, np.zeros(40), SolveConfig(max_iters=2000, rel_tol=1e-12))
    ok = ok and float(np.max(np.abs(x - c))) <= 1e-8
    return ok, f"power-vs-dense rel {abs(est - ref) / ref:.1e}; quad dist {float(np.max(np.abs(x - c))):.1e}"


def _check_elasso(seed):
    ds = gen_elasso_disjoint(100, 40, 5, 2, 0.01, seed)
    p = ElassoProblem(ds.X, ds.y, ds.G, 2 * ds.lambda_suggested)
    cfg = SolveConfig(max_iters=4000, rel_tol=1e-10)
    w1, _ = solve_fista_pcp(p, cfg)
    w2, _ = solve_fista_locp(p, cfg)
    f1, f2 = elasso_objective(p, w1), elasso_objective(p, w2)
    rep = oracle_ista_elasso_batch([p], 400_000)[0]
    pair = abs(f1 - f2) / abs(f2)
    onc = max(abs(f1 - rep.objective), abs(f2 - rep.objective)) / rep.objective
    ok = pair <= 1e-5 and onc <= 1e-5
    return ok, f"pcp-vs-locp rel {pair:.1e}; vs ista oracle rel {onc:.1e}"


def _check_esvm(seed):
    d = tune_margin_scale(120, 24, 0.10, seed)
    ds = gen_esvm(120, 24, d, seed)
    p = EsvmProblem(ds.X, ds.labels, ds.G, 1.0, 1.0)
    w, state, hist = solve_fista_licp(p, SolveConfig(max_iters=20_000, rel_tol=1e-12),
                                      gap_tol=1e-5)
    primal = primal_objective(p, w)
    gap = duality_gap(p, state)
    rep = oracle_esvm_subgradient(p, 20_000)
    ok = gap <= 1e-4 * (1 + abs(primal)) and primal <= rep.objective * (1 + 1e-2)
    return ok, f"gap {gap:.1e}; primal {primal:.6g} vs subgrad {rep.objective:.6g}"


_SECTIONS = {
    "groups": _check_groups,
    "prox": _check_prox,
    "fista": _check_fista,
    "elasso": _check_elasso,
    "esvm": _check_esvm,
}


def run_suite(only=None, seed=0):
    names = [only] if only else list(_SECTIONS)
    results = []
    for name in names:
        ok, detail = _SECTIONS[name](seed)
        results.append((name, bool(ok), detail))
    return results
