import math

import numpy as np
import pytest

from app.environments import build_synthetic_tree
from app.errors import InvalidConfig
from app.planners import OlopConfig, olop_config, run_olop
from app.planners.olop import Olop, olop_horizon


def test_horizon():
    assert olop_horizon(1, 0.5) == 1
    assert olop_horizon(100, 0.5) == 4
    assert olop_horizon(100, 0.0) == 1


@pytest.mark.parametrize("n,K,gamma", [(10, 2, 0.9), (1000, 3, 0.2), (5000, 2, 0.95)])
def test_config_is_the_largest_fit(n, K, gamma):
    cfg = olop_config(n, K, gamma, 1.0, 1.0)
    assert cfg.evaluations <= n * K
    M = cfg.episodes + 1
    assert M * olop_horizon(M, gamma) > n * K


def test_config_needs_both_ranges():
    with pytest.raises(InvalidConfig, match="b̃, R̃_max"):
        olop_config(100, 2, 0.9, None, 1.0)
    with pytest.raises(InvalidConfig):
        olop_config(100, 2, 0.9, 1.0, None)
    with pytest.raises(InvalidConfig):
        olop_config(100, 2, 0.9, -1.0, 1.0)


def test_explicit_config_must_fit(toy):
    with pytest.raises(InvalidConfig):
        run_olop(toy, 10, cfg=OlopConfig(b_tilde=1.0, r_max_tilde=1.0, episodes=20, horizon=2))


def test_greedy_without_exploration_bonus():
    tree = build_synthetic_tree(3, 1, nu=1.25, rho=0.2, gamma=0.2, kappa_target=2, seed=5)
    res = run_olop(tree, 1000, b_tilde=0.0, r_max_tilde=1.0)
    assert res.first_action == tree.optimal_path[0]
    assert res.budget_used == 1000
    assert res.max_opened_depth == 2


def test_unvisited_edges_are_tried_first(toy):
    cfg = olop_config(50, 2, 0.9, 0.0, 130.0)
    olop = Olop(toy, 50, cfg, rng=np.random.default_rng(0))
    first = olop.choose_episode()
    assert first == (0,) * cfg.horizon
    olop.play(first)
    assert olop.choose_episode()[0] == 1
    assert olop.edge_term((1,)) == math.inf


def test_rel_is_capped(toy):
    cfg = olop_config(200, 2, 0.9, 1.0, 130.0)
    olop = Olop(toy, 200, cfg, rng=np.random.default_rng(0))
    for _ in range(5):
        olop.play(olop.choose_episode())
    path = olop.recommend()
    assert len(path) == cfg.horizon
    for h in range(len(path) + 1):
        assert olop.rel(path[:h]) <= olop.cap(h) + 1e-12


def test_budget_respected(noisy_toy):
    for n in (50, 400):
        res = run_olop(noisy_toy, n, b_tilde=10.0, r_max_tilde=130.0, rng=np.random.default_rng(n))
        assert res.budget_used <= n
        assert res.first_action in (0, 1)
