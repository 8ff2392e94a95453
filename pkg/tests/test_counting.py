import pytest

from app.environments import build_synthetic_tree
from app.oracle import CountProfile, brute_force_values, check_prop2, count_near_optimal, fit_kappa


def test_sparse_tree_has_one_near_optimal_node_per_depth():
    tree = build_synthetic_tree(2, 6, nu=1.0, rho=0.2, gamma=0.5, kappa_target=1, seed=2)
    oracle = brute_force_values(tree, H=6, tol=1.0)
    profile = count_near_optimal(tree, oracle, 6, nu=1.0, rho=0.2)
    assert profile.near_optimal == [1] * 7
    assert profile.near_optimal == list(tree.near_optimal_counts)
    assert fit_kappa(profile, 2.0) == 1.0


def test_counts_match_the_construction(kappa_one_tree):
    oracle = brute_force_values(kappa_one_tree, H=10, tol=1.0)
    profile = count_near_optimal(kappa_one_tree, oracle, 10, nu=2.0, rho=0.5)
    assert profile.near_optimal == list(kappa_one_tree.near_optimal_counts)


def test_counts_grow_with_eps(dense_tree):
    oracle = brute_force_values(dense_tree, H=6, tol=1.0)
    profile = count_near_optimal(dense_tree, oracle, 4, nu=2.0, rho=0.5, eps_grid=[0.0, 0.1, 1.0, 10.0])
    grid = profile.grid_counts()
    assert len(grid) == 5
    for h, row in enumerate(grid):
        assert row == sorted(row)
        assert row[-1] == 2 ** h


def test_prop2_holds_on_a_dense_tree(dense_tree):
    oracle = brute_force_values(dense_tree, H=6, tol=1.0)
    grid = [0.0, 0.01, 0.1, 0.5, 1.0]
    pu = count_near_optimal(dense_tree, oracle, 6, nu=2.0, rho=0.5, kind="u")
    pv = count_near_optimal(dense_tree, oracle, 6, nu=2.0, rho=0.5, kind="v")
    report = check_prop2(pu, pv, dense_tree.gamma, dense_tree.r_max, grid)
    assert report.passed
    assert report.verdict == "pass"
    assert report.checked == 7 * len(grid)


def test_prop2_reports_the_first_violation():
    pu = CountProfile(kind="u", nu=1.0, rho=0.5, v_star=0.0, gaps=((0.0,), (0.0, 0.0, 5.0, 5.0)))
    pv = CountProfile(kind="v", nu=1.0, rho=0.5, v_star=0.0, gaps=((0.0,), (0.0, 0.0, 0.0, 0.0)))
    report = check_prop2(pu, pv, 0.5, 1.0, [0.0])
    assert report.verdict == "fail"
    first = report.first_violation
    assert (first.h, first.side, first.lhs, first.rhs) == (1, "v<=u", 4, 2)


def test_v_counts_need_a_deep_enough_oracle(dense_tree):
    oracle = brute_force_values(dense_tree, H=3, tol=1.0)
    with pytest.raises(ValueError):
        count_near_optimal(dense_tree, oracle, 4, nu=2.0, rho=0.5, kind="v")


def test_fit_kappa():
    assert fit_kappa([1, 1, 1], 2.0) == 1.0
    assert fit_kappa([1, 4, 16], 2.0) == pytest.approx(8 ** 0.5)
    with pytest.raises(ValueError):
        fit_kappa([1, 2], 1.0)
