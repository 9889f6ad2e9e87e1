import numpy as np
import pytest

from exsparse.groups import new_group_set
from exsparse.oracle import oracle_l1_cone, oracle_linf_cone
from exsparse.prox import (ConePoint, _l1_cone_rows_zero_b, _linf_cone_rows_zero_b,
                           l1_cone_kkt_residual, linf_cone_stationarity_residual,
                           project_box, project_l1_cone, project_linf_cone,
                           project_nonneg_pair, prox_exclusive_sq_disjoint,
                           soft_threshold)


def cone_objective(a, b, zeta, point):
    a = np.asarray(a, dtype=float)
    return 0.5 * ((point.x - a) ** 2).sum() + 0.5 * zeta * (point.y - b) ** 2


def random_instance(rng):
    d = int(rng.integers(1, 9))
    a = rng.standard_normal(d)
    b = 0.0 if rng.random() < 0.5 else float(np.abs(rng.standard_normal()))
    zeta = float(rng.choice([0.1, 1.0, 10.0]))
    return a, b, zeta


def test_soft_threshold():
    assert np.allclose(soft_threshold([3, -1], 1.5), [1.5, 0.0])
    a = np.array([0.3, -2.0, 1.1])
    assert np.array_equal(soft_threshold(a, 0.0), a)
    assert np.array_equal(soft_threshold(a, 2.5), np.zeros(3))
    with pytest.raises(ValueError):
        soft_threshold(a, -0.1)


def test_project_box():
    assert np.allclose(project_box([-1, 0.5, 2], 0, 1), [0, 0.5, 1])
    inside = np.array([0.2, 0.8])
    assert np.array_equal(project_box(inside, 0, 1), inside)
    assert np.array_equal(project_box([0.0, 1.0], 0, 1), [0.0, 1.0])
    with pytest.raises(ValueError):
        project_box([1.0], 2.0, 1.0)


def test_project_nonneg_pair():
    p, m = project_nonneg_pair([-1, 2], [3, -4])
    assert np.array_equal(p, [0, 2]) and np.array_equal(m, [3, 0])
    p, m = project_nonneg_pair([1, 2], [3, 4])
    assert np.array_equal(p, [1, 2]) and np.array_equal(m, [3, 4])
    p, m = project_nonneg_pair([0, 0], [0, 0])
    assert not p.any() and not m.any()
    with pytest.raises(ValueError):
        project_nonneg_pair([1, 2], [1, 2, 3])


class TestL1Cone:
    def test_trivial_interior_case(self):
        point = project_l1_cone([1, 1], 4.0, 1.0)
        assert np.array_equal(point.x, [1, 1]) and point.y == 4.0

    def test_threshold_search(self):
        point = project_l1_cone([3, 1], 0.0, 1.0)
        assert np.allclose(point.x, [1.5, 0.0]) and point.y == pytest.approx(1.5)
        point = project_l1_cone([-2, 2], 1.0, 2.0)
        assert np.allclose(point.x, [-0.8, 0.8]) and point.y == pytest.approx(1.6)

    def test_negative_b_full_shrink(self):
        point = project_l1_cone([1.0], -10.0, 1.0)
        assert np.array_equal(point.x, [0.0]) and point.y == 0.0
        assert l1_cone_kkt_residual([1.0], -10.0, 1.0, point) <= 1e-12

    def test_rejects(self):
        with pytest.raises(ValueError):
            project_l1_cone([1.0], 0.0, 0.0)
        with pytest.raises(ValueError):
            project_l1_cone([], 0.0, 1.0)

    def test_kkt_and_feasibility_battery(self):
        rng = np.random.default_rng(21)
        for _ in range(3000):
            a, b, zeta = random_instance(rng)
            point = project_l1_cone(a, b, zeta)
            assert np.abs(point.x).sum() <= point.y + 1e-9
            assert l1_cone_kkt_residual(a, b, zeta, point) <= 1e-9

    def test_negative_b_battery(self):
        # beyond the algorithm's printed scope; the kernel stays total and exact
        rng = np.random.default_rng(22)
        for _ in range(500):
            d = int(rng.integers(1, 7))
            a = rng.standard_normal(d)
            b = -float(np.abs(rng.standard_normal()))
            zeta = float(rng.choice([0.1, 1.0, 10.0]))
            point = project_l1_cone(a, b, zeta)
            assert np.abs(point.x).sum() <= point.y + 1e-9
            assert point.y >= 0.0
            assert l1_cone_kkt_residual(a, b, zeta, point) <= 1e-9

    def test_magnitude_monotonicity(self):
        rng = np.random.default_rng(23)
        for _ in range(500):
            a, b, zeta = random_instance(rng)
            x = project_l1_cone(a, b, zeta).x
            order = np.argsort(-np.abs(a))
            mags = np.abs(x)[order]
            assert np.all(np.diff(mags) <= 1e-12)

    def test_equivariance(self):
        rng = np.random.default_rng(24)
        for _ in range(200):
            a, b, zeta = random_instance(rng)
            point = project_l1_cone(a, b, zeta)
            perm = rng.permutation(a.size)
            permuted = project_l1_cone(a[perm], b, zeta)
            assert np.allclose(permuted.x, point.x[perm], atol=1e-12)
            assert permuted.y == pytest.approx(point.y, abs=1e-12)
            signs = rng.choice([-1.0, 1.0], size=a.size)
            flipped = project_l1_cone(a * signs, b, zeta)
            assert np.allclose(flipped.x, point.x * signs, atol=1e-12)

    def test_tie_independence(self):
        rng = np.random.default_rng(25)
        for _ in range(200):
            base = rng.standard_normal(3)
            a = np.concatenate([base, np.abs(base[:2]), -np.abs(base[2:3])])
            b, zeta = 0.0, float(rng.choice([0.1, 1.0, 10.0]))
            point = project_l1_cone(a, b, zeta)
            perm = rng.permutation(a.size)
            permuted = project_l1_cone(a[perm], b, zeta)
            assert np.allclose(permuted.x, point.x[perm], atol=1e-12)


class TestLinfCone:
    def test_trivial_interior_case(self):
        point = project_linf_cone([1, -2], 3.0, 1.0)
        assert np.array_equal(point.x, [1, -2]) and point.y == 3.0

    def test_level_search(self):
        point = project_linf_cone([2, -1], 0.0, 1.0)
        assert np.allclose(point.x, [1.0, -1.0]) and point.y == pytest.approx(1.0)
        point = project_linf_cone([4.0], 0.0, 1.0)
        assert np.allclose(point.x, [2.0]) and point.y == pytest.approx(2.0)

    def test_negative_b_apex(self):
        point = project_linf_cone([0.5, -0.5], -2.0, 1.0)
        assert not point.x.any() and point.y == 0.0
        assert linf_cone_stationarity_residual([0.5, -0.5], -2.0, 1.0, point) <= 1e-12

    def test_rejects(self):
        with pytest.raises(ValueError):
            project_linf_cone([1.0], 0.0, -1.0)
        with pytest.raises(ValueError):
            project_linf_cone([], 0.0, 1.0)

    def test_stationarity_battery(self):
        rng = np.random.default_rng(31)
        for _ in range(3000):
            a, b, zeta = random_instance(rng)
            point = project_linf_cone(a, b, zeta)
            assert np.abs(point.x).max() <= point.y + 1e-9
            assert point.y >= 0.0
            assert linf_cone_stationarity_residual(a, b, zeta, point) <= 1e-9

    def test_equivariance_and_ties(self):
        rng = np.random.default_rng(32)
        for _ in range(200):
            a, b, zeta = random_instance(rng)
            point = project_linf_cone(a, b, zeta)
            perm = rng.permutation(a.size)
            permuted = project_linf_cone(a[perm], b, zeta)
            assert np.allclose(permuted.x, point.x[perm], atol=1e-12)
            signs = rng.choice([-1.0, 1.0], size=a.size)
            flipped = project_linf_cone(a * signs, b, zeta)
            assert np.allclose(flipped.x, point.x * signs, atol=1e-12)
            dup = np.concatenate([a, -a[: max(1, a.size // 2)]])
            pd = project_linf_cone(dup, b, zeta)
            pd2 = project_linf_cone(dup[rng.permutation(dup.size)], b, zeta)
            assert pd.y == pytest.approx(pd2.y, abs=1e-12)


def test_oracle_dominance_smoke():
    # the full 10^4-instance battery runs in the acceptance suite
    rng = np.random.default_rng(41)
    for _ in range(300):
        a, b, zeta = random_instance(rng)
        p1 = project_l1_cone(a, b, zeta)
        assert cone_objective(a, b, zeta, p1) <= oracle_l1_cone(a, b, zeta).objective + 1e-8
        p2 = project_linf_cone(a, b, zeta)
        assert cone_objective(a, b, zeta, p2) <= oracle_linf_cone(a, b, zeta).objective + 1e-8


def test_argmin_uniqueness_against_oracle():
    rng = np.random.default_rng(42)
    for _ in range(40):
        a, b, zeta = random_instance(rng)
        p1 = project_l1_cone(a, b, zeta)
        rep = oracle_l1_cone(a, b, zeta, grid_resolution=1e-6)
        assert np.max(np.abs(p1.x - rep.argmin[0])) <= 1e-5
        p2 = project_linf_cone(a, b, zeta)
        rep = oracle_linf_cone(a, b, zeta, grid_resolution=1e-6)
        assert np.max(np.abs(p2.x - rep.argmin[0])) <= 1e-5


class TestExclusiveProx:
    def test_zero_input(self):
        G = new_group_set([[1, 2], [3]], 3)
        assert not prox_exclusive_sq_disjoint(np.zeros(3), G, 1.0).any()

    def test_scalar_closed_form(self):
        G = new_group_set([[1]], 1)
        out = prox_exclusive_sq_disjoint([2.0], G, 1.0)
        assert out[0] == pytest.approx(1.0)
        # general scalar rule w = c / (1 + weight)
        for gl in (0.3, 2.0):
            out = prox_exclusive_sq_disjoint([2.0], G, gl)
            assert out[0] == pytest.approx(2.0 / (1 + gl))

    def test_matches_l1_cone(self):
        G = new_group_set([[1, 2]], 2)
        out = prox_exclusive_sq_disjoint([3.0, 1.0], G, 1.0)
        assert np.allclose(out, [1.5, 0.0])

    def test_ungrouped_passthrough(self):
        G = new_group_set([[2, 3]], 4)
        c = np.array([5.0, 3.0, 1.0, -8.0])
        out = prox_exclusive_sq_disjoint(c, G, 1.0)
        assert out[0] == 5.0 and out[3] == -8.0

    def test_rejects_overlap(self):
        G = new_group_set([[1, 2], [2, 3]], 3)
        with pytest.raises(ValueError):
            prox_exclusive_sq_disjoint(np.ones(3), G, 1.0)

    def test_prox_optimality_against_grid(self):
        # the prox objective at the output never exceeds the oracle's best
        rng = np.random.default_rng(43)
        G = new_group_set([[1, 3], [2, 4, 5]], 5)
        idx = G.index_arrays()
        for _ in range(100):
            c = rng.standard_normal(5)
            gl = float(rng.choice([0.1, 1.0, 3.0]))
            w = prox_exclusive_sq_disjoint(c, G, gl)
            for a in idx:
                obj = 0.5 * ((w[a] - c[a]) ** 2).sum() + 0.5 * gl * np.abs(w[a]).sum() ** 2
                rep = oracle_l1_cone(c[a], 0.0, gl)
                assert obj <= rep.objective + 1e-8


def test_batched_rows_match_scalar_kernels():
    rng = np.random.default_rng(44)
    A = rng.standard_normal((60, 5))
    for zeta in (0.1, 1.0, 10.0):
        rows = _l1_cone_rows_zero_b(A, zeta)
        rows_inf, ys = _linf_cone_rows_zero_b(A, zeta)
        for i in range(A.shape[0]):
            assert np.array_equal(rows[i], project_l1_cone(A[i], 0.0, zeta).x)
            ref = project_linf_cone(A[i], 0.0, zeta)
            assert np.array_equal(rows_inf[i], ref.x)
            assert ys[i] == ref.y
    zero_rows = _linf_cone_rows_zero_b(np.zeros((3, 4)), 1.0)
    assert not zero_rows[0].any() and not zero_rows[1].any()


def test_cone_point_named_fields():
    point = ConePoint(np.array([1.0]), 2.0)
    assert point.x[0] == 1.0 and point.y == 2.0
