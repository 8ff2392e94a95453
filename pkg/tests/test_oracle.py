import itertools

import pytest

from app.environments import ToyMDP, build_synthetic_tree
from app.errors import HorizonTooShallow
from app.oracle import brute_force_values, certified_loss, oracle_horizon, simple_regret, tail_bound
from app.planning import PlanningTree


@pytest.fixture(scope="module")
def toy_oracle():
    return brute_force_values(ToyMDP(gamma=0.95, shift=0.0), tol=1e-3)


def test_toy_values(toy_oracle):
    # staying forever from (0, 0) is worth gamma / (1 - gamma)^2
    assert toy_oracle.tail <= 1e-3
    assert 380.0 - 1e-3 <= toy_oracle.v_star <= 380.0 + 1e-9
    assert toy_oracle.q_star[0] == pytest.approx(380.0, abs=1e-3)
    assert toy_oracle.q_star[1] == pytest.approx(363.0, abs=1e-3)
    assert toy_oracle.optimal_actions == [0]


def test_simple_regret(toy_oracle):
    assert simple_regret(toy_oracle, 0) == 0.0
    assert simple_regret(toy_oracle, 1) == pytest.approx(17.0, rel=1e-6)
    with pytest.raises(ValueError):
        simple_regret(toy_oracle, 2)


def test_certified_loss_bounds_regret(toy_oracle):
    assert certified_loss(toy_oracle, (1,)) == pytest.approx(378.0, rel=1e-6)
    assert certified_loss(toy_oracle, (1,)) >= simple_regret(toy_oracle, 1)
    assert certified_loss(toy_oracle, (0,) * 400) == pytest.approx(0.0, abs=1e-6)


def test_node_value(toy_oracle):
    assert toy_oracle.node_value(()) == pytest.approx(toy_oracle.v_star)
    assert toy_oracle.node_value((1,)) == pytest.approx(toy_oracle.q_star[1])


def test_myopic_discount():
    oracle = brute_force_values(ToyMDP(gamma=0.0, shift=0.0))
    assert oracle.horizon == 1
    assert oracle.v_star == 2.0
    assert oracle.optimal_actions == [1]


def test_shallow_horizon_is_rejected():
    with pytest.raises(HorizonTooShallow):
        brute_force_values(ToyMDP(gamma=0.95, shift=0.0), H=20, tol=1e-3)


def test_truncation_stays_within_the_tail():
    env = ToyMDP(gamma=0.95, shift=0.0)
    short = brute_force_values(env, H=20, tol=1000.0)
    longer = brute_force_values(env, H=22, tol=1000.0)
    assert 0.0 <= longer.v_star - short.v_star <= short.tail


def test_oracle_horizon_for_bounded_rewards(dense_tree):
    h = oracle_horizon(dense_tree, 1e-3)
    assert tail_bound(0.5, dense_tree.r_max, h) <= 1e-3 < tail_bound(0.5, dense_tree.r_max, h - 1)
    with pytest.raises(HorizonTooShallow):
        oracle_horizon(dense_tree, 0.0)


def test_toy_horizon_covers_the_growing_counter(toy_oracle):
    env = ToyMDP(gamma=0.95, shift=0.0)
    flat = next(h for h in range(1, 1000) if tail_bound(0.95, env.r_max, h) <= 1e-3)
    assert toy_oracle.horizon > flat
    assert env.value_tail(0.95, toy_oracle.horizon) <= 1e-3 < env.value_tail(0.95, toy_oracle.horizon - 1)
    # staying from d = 0 collects sum_t gamma^t t, which the tail must cover
    stay_tail = sum(0.95 ** t * t for t in range(toy_oracle.horizon, 5000))
    assert stay_tail <= env.value_tail(0.95, toy_oracle.horizon)


def test_shifted_toy_needs_a_deeper_horizon(toy_oracle):
    shifted = ToyMDP(gamma=0.95)
    assert oracle_horizon(shifted, 1e-3) > toy_oracle.horizon


def test_synthetic_optimum(kappa_one_tree):
    oracle = brute_force_values(kappa_one_tree, H=10, tol=1.0)
    assert oracle.v_star == pytest.approx(kappa_one_tree.optimal_value)
    assert oracle.optimal_actions == [kappa_one_tree.optimal_path[0]]


def test_dense_tree_designated_path_is_optimal(dense_tree):
    oracle = brute_force_values(dense_tree, H=6, tol=1.0)
    assert oracle.v_star == pytest.approx(dense_tree.optimal_value)
    assert certified_loss(oracle, dense_tree.optimal_path) == pytest.approx(0.0, abs=1e-12)


def test_root_gap_sets_the_regret():
    tree = build_synthetic_tree(2, 1, nu=1.0, rho=0.5, gamma=0.5, kappa_target=1, gap=0.3, seed=1)
    oracle = brute_force_values(tree, H=5, tol=1.0)
    wrong = 1 - tree.optimal_path[0]
    assert simple_regret(oracle, wrong) == pytest.approx(0.3 * 1.0 * (1 - 0.5))


def test_to_dict(toy_oracle):
    data = toy_oracle.to_dict()
    assert data["horizon"] == toy_oracle.horizon
    assert data["optimal_actions"] == [0]
    assert set(data["q_star"]) == {"0", "1"}


@pytest.mark.parametrize("fixture", ["dense_tree", "kappa_one_tree"])
def test_u_below_v_below_b(request, fixture, rng):
    tree = request.getfixturevalue(fixture)
    depth = len(tree.optimal_path)
    oracle = brute_force_values(tree, H=depth, tol=1.0)
    planning = PlanningTree(tree, rng=rng)
    for h in range(min(depth, 6) + 1):
        for seq in itertools.product(range(tree.n_actions), repeat=h):
            u, v = planning.u_value(seq), oracle.node_value(seq)
            b = planning.b_value(seq, tree.r_max)
            assert u <= v + 1e-12
            assert v <= b + 1e-12
