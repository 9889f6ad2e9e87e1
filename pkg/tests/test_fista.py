import numpy as np
import pytest

from exsparse.fista import (NumericsError, ProxPart, SmoothPart, SolveConfig,
                            backtracking_step, fista_solve, power_iteration_lipschitz)
from exsparse.prox import soft_threshold


def quadratic_parts(c):
    c = np.asarray(c, dtype=float)
    return SmoothPart(
        value=lambda x: 0.5 * float((x - c) @ (x - c)),
        gradient=lambda x: x - c,
        lipschitz_hint=1.0,
    )


IDENTITY_PROX = ProxPart(prox=lambda z, g: z, value=lambda x: 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(max_iters=0)
    with pytest.raises(ValueError):
        SolveConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        SolveConfig(step_mode="magic")
    with pytest.raises(ValueError):
        SolveConfig(gamma=-1.0)
    with pytest.raises(ValueError):
        SolveConfig(eta=1.0)


@pytest.mark.parametrize("step_mode", ["backtracking", "fixed"])
def test_unconstrained_quadratic_converges(step_mode):
    rng = np.random.default_rng(0)
    c = rng.standard_normal(30)
    x, hist = fista_solve(quadratic_parts(c), IDENTITY_PROX, np.zeros(30),
                          SolveConfig(max_iters=5000, rel_tol=1e-12,
                                      step_mode=step_mode))
    assert np.max(np.abs(x - c)) <= 1e-8
    assert hist.termination == "rel_tol"


def test_scalar_lasso_closed_form():
    c, lam = 2.0, 0.7
    F = quadratic_parts([c])
    H = ProxPart(prox=lambda z, g: soft_threshold(z, g * lam),
                 value=lambda x: lam * float(np.abs(x).sum()))
    # backtracking's majorization test resolves F differences only to
    # eps*|F|, leaving ~1e-7 iterate jitter around the optimum
    x, _ = fista_solve(F, H, np.zeros(1), SolveConfig(max_iters=5000, rel_tol=1e-13))
    assert x[0] == pytest.approx(soft_threshold([c], lam)[0], abs=1e-6)
    x, _ = fista_solve(F, H, np.zeros(1),
                       SolveConfig(max_iters=5000, rel_tol=1e-13, step_mode="fixed"))
    assert x[0] == pytest.approx(soft_threshold([c], lam)[0], abs=1e-10)


def test_momentum_sequence():
    c = np.ones(3)
    x, hist = fista_solve(quadratic_parts(c), IDENTITY_PROX, np.zeros(3),
                          SolveConfig(max_iters=3, rel_tol=1e-16))
    t1 = hist.records[0].momentum
    assert t1 == pytest.approx((1 + np.sqrt(5)) / 2, abs=1e-12)
    t2 = hist.records[1].momentum
    assert t2 == pytest.approx(0.5 + 0.5 * np.sqrt(1 + 4 * t1 * t1), abs=1e-12)


def test_unsquared_momentum_variant_differs():
    c = np.ones(3)
    cfg = SolveConfig(max_iters=3, rel_tol=1e-16, unsquared_momentum=True)
    _, hist = fista_solve(quadratic_parts(c), IDENTITY_PROX, np.zeros(3), cfg)
    t1 = hist.records[0].momentum
    assert t1 == pytest.approx((1 + np.sqrt(5)) / 2, abs=1e-12)
    t2 = hist.records[1].momentum
    assert t2 == pytest.approx(0.5 + 0.5 * np.sqrt(1 + 4 * t1), abs=1e-12)
    assert t2 < 0.5 + 0.5 * np.sqrt(1 + 4 * t1 * t1)


class TestBacktracking:
    @staticmethod
    def _quad(H):
        H = np.asarray(H, dtype=float)
        return SmoothPart(
            value=lambda x: 0.5 * float(x @ (H @ x)),
            gradient=lambda x: H @ x,
        )

    def test_accepts_at_or_above_lipschitz(self):
        F = self._quad(np.diag([4.0, 4.0]))
        gamma, p, L = backtracking_step(F, IDENTITY_PROX, np.array([1.0, 1.0]),
                                        L=5.0, eta=2.0)
        assert L == 5.0 and gamma == pytest.approx(0.2)

    def test_exactly_one_doubling(self):
        # Hessian diag(4, 1); along the gradient direction from (1, 1) the
        # curvature is 65/17 ~ 3.82: the trial at L=2 fails, L=4 accepts
        H = np.diag([4.0, 1.0])
        F = self._quad(H)
        xbar = np.array([1.0, 1.0])
        g = H @ xbar
        for L, ok in ((2.0, False), (4.0, True)):
            p = xbar - g / L
            lhs = F.value(p)
            rhs = F.value(xbar) + g @ (p - xbar) + 0.5 * L * ((p - xbar) @ (p - xbar))
            assert (lhs <= rhs + 1e-12) == ok
        gamma, p, L = backtracking_step(F, IDENTITY_PROX, xbar, L=2.0, eta=2.0)
        assert L == 4.0 and gamma == pytest.approx(0.25)

    def test_linear_objective_accepts_initial(self):
        F = SmoothPart(value=lambda x: float(x.sum()),
                       gradient=lambda x: np.ones_like(x))
        gamma, p, L = backtracking_step(F, IDENTITY_PROX, np.zeros(4), L=0.5, eta=2.0)
        assert L == 0.5 and gamma == pytest.approx(2.0)

    def test_majorization_reasserted(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((12, 12))
        H = A @ A.T / 12
        F = self._quad(H)
        for _ in range(50):
            xbar = rng.standard_normal(12)
            L0 = float(rng.uniform(0.01, 5.0))
            gamma, p, L = backtracking_step(F, IDENTITY_PROX, xbar, L0, 2.0)
            g = F.gradient(xbar)
            diff = p - xbar
            assert F.value(p) <= F.value(xbar) + g @ diff \
                + 0.5 * L * (diff @ diff) + 1e-9 * (1 + abs(F.value(xbar)))

    def test_trial_cap_raises(self):
        # gradient inconsistent with value: majorization can never hold
        F = SmoothPart(value=lambda x: float(x @ x), gradient=lambda x: -np.ones_like(x))
        with pytest.raises(NumericsError):
            backtracking_step(F, IDENTITY_PROX, np.ones(3), 1.0, 2.0, max_trials=20)


def test_power_iteration_examples():
    assert power_iteration_lipschitz(lambda v: v, 5, iters=50) == pytest.approx(1.0, abs=1e-6)
    D = np.diag([1.0, 4.0])
    assert power_iteration_lipschitz(lambda v: D @ v, 2, iters=50) == pytest.approx(4.0, abs=1e-4)
    assert power_iteration_lipschitz(lambda v: np.zeros_like(v), 3, iters=10) == 0.0


def test_best_so_far_objective_monotone():
    rng = np.random.default_rng(9)
    A = rng.standard_normal((20, 40))
    y = rng.standard_normal(20)
    lam = 0.5
    F = SmoothPart(value=lambda w: 0.5 * float((A @ w - y) @ (A @ w - y)),
                   gradient=lambda w: A.T @ (A @ w - y),
                   lipschitz_hint=float(np.linalg.norm(A, 2) ** 2))
    H = ProxPart(prox=lambda z, g: soft_threshold(z, g * lam),
                 value=lambda w: lam * float(np.abs(w).sum()))
    _, hist = fista_solve(F, H, np.zeros(40), SolveConfig(max_iters=500, rel_tol=1e-14))
    best = np.minimum.accumulate(hist.objectives)
    assert np.all(np.diff(best) <= 0)


def test_termination_and_history_shape(tmp_path):
    c = np.ones(4)
    x, hist = fista_solve(quadratic_parts(c), IDENTITY_PROX, np.zeros(4),
                          SolveConfig(max_iters=7, rel_tol=1e-30))
    assert hist.termination == "max_iters"
    assert len(hist) == 7
    assert [r.k for r in hist.records] == list(range(1, 8))
    path = tmp_path / "hist.csv"
    hist.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,objective,step,momentum,rel_change"
    assert len(lines) == 8


def test_extra_stop_hook():
    c = np.ones(4)
    x, hist = fista_solve(quadratic_parts(c), IDENTITY_PROX, np.zeros(4),
                          SolveConfig(max_iters=100, rel_tol=1e-30),
                          extra_stop=lambda x, k: "custom" if k >= 3 else None)
    assert hist.termination == "custom"
    assert len(hist) == 3


def test_nonfinite_gradient_raises():
    F = SmoothPart(value=lambda x: float(x @ x),
                   gradient=lambda x: np.full_like(x, np.nan),
                   lipschitz_hint=1.0)
    with pytest.raises(NumericsError):
        fista_solve(F, IDENTITY_PROX, np.ones(2),
                    SolveConfig(max_iters=5, rel_tol=1e-8, step_mode="fixed"))


def test_divergent_fixed_step_raises():
    F = SmoothPart(value=lambda x: 0.5 * float(x @ x) * 1e4,
                   gradient=lambda x: 1e4 * x)
    with pytest.raises(NumericsError):
        fista_solve(F, IDENTITY_PROX, np.ones(3),
                    SolveConfig(max_iters=10000, rel_tol=1e-30,
                                step_mode="fixed", gamma=1.0))


def test_fixed_mode_needs_step_or_hint():
    F = SmoothPart(value=lambda x: float(x @ x), gradient=lambda x: 2 * x)
    with pytest.raises(ValueError):
        fista_solve(F, IDENTITY_PROX, np.ones(2),
                    SolveConfig(max_iters=5, step_mode="fixed"))
