"""
Uniform planning: one depth-H episode for every sequence of A^H.

The naive strategy estimates each sequence from its own episode only. The
good strategy pools the episodes in a tree, so an edge at depth h is
estimated from the K^(H-h) episodes going through it.
"""
import itertools
import logging

import numpy as np

from ..environments.base import GenerativeModel, path_states
from ..errors import InfeasibleHorizon
from ..planning.budget import BudgetLedger, LedgerMode
from ..planning.tree import ActionSeq, PlanningTree
from .result import PlannerResult, TraceEvent

logger = logging.getLogger(__name__)


def uniform_cost(K: int, H: int) -> int:
    return K ** H * H


def max_uniform_horizon(K: int, budget: int) -> int:
    """Largest H with K^H H <= budget, 0 if none."""
    H = 0
    while uniform_cost(K, H + 1) <= budget:
        H += 1
    return H


def play_uniform_episodes(env: GenerativeModel, budget: int, H: int, *,
                          rng: np.random.Generator) -> dict[ActionSeq, np.ndarray]:
    """Rewards of one episode per sequence in A^H, in lexicographic order."""
    if H < 1:
        raise InfeasibleHorizon(f"horizon must be >= 1, got {H}.")
    cost = uniform_cost(env.n_actions, H)
    if cost > budget:
        raise InfeasibleHorizon(f"K^H * H = {cost} evaluations exceed the budget {budget}.")

    ledger = BudgetLedger(budget, LedgerMode.FREE)
    episodes = {}
    for seq in itertools.product(range(env.n_actions), repeat=H):
        ledger.charge(H)
        states = path_states(env, seq)
        episodes[seq] = np.array([env.sample_reward(states[t], a, rng) for t, a in enumerate(seq)])
    return episodes


def pool_episodes(env: GenerativeModel, episodes: dict[ActionSeq, np.ndarray], *,
                  rng: np.random.Generator, gamma: float | None = None) -> PlanningTree:
    tree = PlanningTree(env, rng=rng, gamma=gamma)
    for seq, rewards in episodes.items():
        tree.ensure_path(seq)
        for t in range(len(seq)):
            tree.record(seq[: t + 1], rewards[t])
    return tree


def _result(name: str, best: ActionSeq, value: float, H: int, K: int, budget: int,
            root_estimates: dict[int, float], trace: bool) -> PlannerResult:
    events = (TraceEvent(stage="output", h=H, node=list(best), u_hat=value),) if trace else ()
    return PlannerResult(
        planner=name,
        first_action=best[0],
        chosen_sequence=best,
        chosen_value=value,
        budget_used=uniform_cost(K, H),
        budget_limit=budget,
        max_opened_depth=H - 1,
        root_estimates=root_estimates,
        trace=events,
    )


def run_uniform_naive(env: GenerativeModel, budget: int, H: int, gamma: float | None = None, *,
                      rng: np.random.Generator | None = None,
                      trace: bool = False) -> PlannerResult:
    g = env.gamma if gamma is None else gamma
    episodes = play_uniform_episodes(env, budget, H, rng=rng or np.random.default_rng(0))
    discounts = g ** np.arange(H)
    estimates = {seq: float(np.dot(discounts, r)) for seq, r in episodes.items()}
    best = min(estimates, key=lambda s: (-estimates[s], s))

    root_estimates: dict[int, float] = {}
    for seq, r in episodes.items():
        root_estimates.setdefault(seq[0], float(r[0]))
    return _result("uniform_naive", best, estimates[best], H, env.n_actions, budget,
                   root_estimates, trace)


def run_uniform_good(env: GenerativeModel, budget: int, H: int, gamma: float | None = None, *,
                     rng: np.random.Generator | None = None,
                     trace: bool = False) -> PlannerResult:
    rng = rng or np.random.default_rng(0)
    episodes = play_uniform_episodes(env, budget, H, rng=rng)
    tree = pool_episodes(env, episodes, rng=rng, gamma=gamma)
    best = tree.argmax_u_hat(tree.nodes_at_depth(H))
    return _result("uniform_good", best, tree.u_hat(best), H, env.n_actions, budget,
                   tree.root_estimates(), trace)
