import numpy as np
import pytest
from scipy.optimize import linprog

from fbsim import lp


def _scipy_solve(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, upper=None):
    n = len(c)
    bounds = [(0, None if upper is None or np.isinf(upper[j]) else upper[j]) for j in range(n)]
    return linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")


def test_simple_2d():
    # max x + y s.t. x + 2y <= 4, 3x + y <= 6
    res = lp.solve_lp([-1, -1], A_ub=[[1, 2], [3, 1]], b_ub=[4, 6])
    assert res.ok
    assert res.fun == pytest.approx(-2.8, abs=1e-8)


def test_equality_and_bounds():
    # min x1 + 2 x2 + 3 x3 with x1 + x2 + x3 = 2, x <= 1
    res = lp.solve_lp([1, 2, 3], A_eq=[[1, 1, 1]], b_eq=[2], upper=np.array([1.0, 1.0, 1.0]))
    assert res.ok
    assert res.fun == pytest.approx(3.0, abs=1e-8)
    assert np.allclose(res.x, [1, 1, 0], atol=1e-8)


def test_infeasible():
    res = lp.solve_lp([1, 1], A_ub=[[1, 0], [-1, 0]], b_ub=[1, -3])
    assert res.status == lp.INFEASIBLE


def test_infeasible_equality():
    res = lp.solve_lp([0, 0], A_eq=[[1, 1]], b_eq=[5], upper=np.array([1.0, 1.0]))
    assert res.status == lp.INFEASIBLE


def test_unbounded():
    res = lp.solve_lp([-1, 0], A_ub=[[0, 1]], b_ub=[1])
    assert res.status == lp.UNBOUNDED


def test_negative_rhs_rows():
    # x >= 2 written as -x <= -2
    res = lp.solve_lp([1], A_ub=[[-1]], b_ub=[-2])
    assert res.ok
    assert res.fun == pytest.approx(2.0, abs=1e-8)


def test_bounds_only():
    res = lp.solve_lp([-2, 3], upper=np.array([5.0, 5.0]))
    assert res.ok
    assert res.fun == pytest.approx(-10.0)


def test_random_lps_match_scipy():
    rng = np.random.default_rng(42)
    n_match = 0
    for trial in range(120):
        n = rng.integers(2, 9)
        m_ub = int(rng.integers(1, 7))
        m_eq = int(rng.integers(0, 3))
        c = rng.normal(0, 2, n)
        A_ub = rng.normal(0, 1, (m_ub, n))
        b_ub = rng.uniform(-1, 5, m_ub)
        if m_eq:
            A_eq = rng.normal(0, 1, (m_eq, n))
            x_feas = rng.uniform(0, 1, n)
            b_eq = A_eq @ x_feas
        else:
            A_eq = b_eq = None
        upper = np.where(rng.random(n) < 0.5, rng.uniform(0.5, 4.0, n), np.inf)

        ours = lp.solve_lp(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, upper=upper)
        ref = _scipy_solve(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, upper=upper)

        if ref.status == 2:
            assert ours.status == lp.INFEASIBLE, f"trial {trial}: scipy infeasible, ours {ours.status}"
        elif ref.status == 3:
            assert ours.status == lp.UNBOUNDED, f"trial {trial}"
        else:
            assert ours.ok, f"trial {trial}: scipy optimal, ours status {ours.status}"
            assert ours.fun == pytest.approx(ref.fun, rel=1e-6, abs=1e-7), f"trial {trial}"
            n_match += 1
    assert n_match > 50  # sanity: plenty of optimal instances were compared


def test_random_transportation_like():
    # structured like the placement relaxation: assignment rows + capacities
    rng = np.random.default_rng(9)
    for trial in range(25):
        n_u, n_c = int(rng.integers(3, 8)), int(rng.integers(2, 5))
        cost = rng.uniform(1, 10, (n_c, n_u))
        n = n_c * n_u
        c = cost.ravel()
        A_eq = np.zeros((n_u, n))
        for j in range(n_u):
            A_eq[j, j::n_u] = 1.0
        b_eq = np.ones(n_u)
        A_ub = np.zeros((n_c, n))
        for i in range(n_c):
            A_ub[i, i * n_u : (i + 1) * n_u] = 1.0
        cap = rng.integers(1, n_u + 1, n_c).astype(float)
        ours = lp.solve_lp(c, A_ub=A_ub, b_ub=cap, A_eq=A_eq, b_eq=b_eq, upper=np.ones(n))
        ref = _scipy_solve(c, A_ub=A_ub, b_ub=cap, A_eq=A_eq, b_eq=b_eq, upper=np.ones(n))
        if ref.status == 2:
            assert ours.status == lp.INFEASIBLE
        else:
            assert ours.ok and ours.fun == pytest.approx(ref.fun, rel=1e-7, abs=1e-8)


def test_degenerate_lp():
    # many redundant constraints at the optimum
    c = [-1.0, -1.0]
    A_ub = [[1, 0], [1, 0], [0, 1], [1, 1], [2, 2]]
    b_ub = [1, 1, 1, 2, 4]
    res = lp.solve_lp(c, A_ub=A_ub, b_ub=b_ub)
    assert res.ok
    assert res.fun == pytest.approx(-2.0, abs=1e-9)


def test_determinism():
    rng = np.random.default_rng(1)
    c = rng.normal(size=20)
    A_ub = rng.normal(size=(15, 20))
    b_ub = rng.uniform(0.5, 3, 15)
    r1 = lp.solve_lp(c, A_ub=A_ub, b_ub=b_ub, upper=np.full(20, 2.0))
    r2 = lp.solve_lp(c, A_ub=A_ub, b_ub=b_ub, upper=np.full(20, 2.0))
    assert r1.ok and r2.ok
    assert np.array_equal(r1.x, r2.x)
    assert r1.n_iter == r2.n_iter
