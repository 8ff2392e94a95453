import numpy as np
import pytest

from app.errors import InvalidConfig
from app.planners import PlannerOptions, plan, planner_ids


def test_planner_ids():
    assert planner_ids() == ["olop", "platypoos", "sequool", "sequool_reset", "uniform_good", "uniform_naive"]


def test_unknown_planner_lists_valid_ids(toy):
    with pytest.raises(InvalidConfig, match="valid ids: olop, platypoos"):
        plan("uct", toy, 100, rng=np.random.default_rng(0))


def test_uniform_needs_horizon(toy):
    with pytest.raises(InvalidConfig):
        plan("uniform_good", toy, 100, rng=np.random.default_rng(0))


def test_olop_needs_ranges(toy):
    with pytest.raises(InvalidConfig):
        plan("olop", toy, 100, rng=np.random.default_rng(0), options=PlannerOptions(b_tilde=1.0))


@pytest.mark.parametrize("planner_id", ["olop", "platypoos", "sequool", "sequool_reset",
                                        "uniform_good", "uniform_naive"])
def test_every_planner_runs(toy, planner_id):
    options = PlannerOptions(b_tilde=0.0, r_max_tilde=130.0, horizon=3)
    res = plan(planner_id, toy, 500, rng=np.random.default_rng(1), options=options)
    assert res.planner == planner_id
    assert res.budget_used <= res.budget_limit
