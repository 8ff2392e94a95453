"""
SequOOL applied to planning with deterministic rewards, with and without
the reset condition.

Free planning opens floor(h_max / h) nodes at depth h; under reset every
opening of a depth-h node also pays h to reach it, and the quota drops to
floor(h_max / h^2).
"""
import logging

import numpy as np

from ..environments.base import GenerativeModel
from ..errors import BudgetExhausted, BudgetTooSmall, NoisyEnvironment
from ..planning.budget import BudgetLedger, LedgerMode
from ..planning.tree import ROOT, PlanningTree
from ..utils import harmonic_number
from .result import PlannerResult, TraceEvent

logger = logging.getLogger(__name__)


def sequool_h_max(n: int) -> int:
    return int(n // harmonic_number(n)) if n >= 1 else 0


def sequool_quota(h_max: int, h: int, *, reset: bool = False) -> int:
    """Nodes to open at depth h: floor(h_max / h), or floor(h_max / h^2) under reset."""
    return h_max // (h * h) if reset else h_max // h


def _run(env: GenerativeModel, n: int, gamma: float | None, *, rng: np.random.Generator,
         reset: bool, trace: bool, name: str) -> PlannerResult:
    if not env.noise.is_noiseless:
        raise NoisyEnvironment(f"{name} needs noiseless rewards (noise kind {env.noise.kind.value}, b={env.noise.b}).")
    h_max = sequool_h_max(n)
    if h_max < 1:
        raise BudgetTooSmall(f"n={n} gives h_max=0.")

    tree = PlanningTree(env, rng=rng, gamma=gamma)
    ledger = BudgetLedger(n, LedgerMode.RESET if reset else LedgerMode.FREE)
    events: list[TraceEvent] = []

    try:
        tree.open(ROOT, 1, ledger)
        if trace:
            events.append(TraceEvent(stage="init", h=0, node=[], m=1))

        for h in range(1, h_max + 1):
            quota = sequool_quota(h_max, h, reset=reset)
            if quota == 0:
                break
            for seq in tree.select_top_nodes(h, quota):
                tree.open(seq, 1, ledger)
                if trace:
                    events.append(TraceEvent(stage="explore", h=h, node=list(seq), m=1,
                                             u_hat=tree.u_hat(seq)))
    except BudgetExhausted as exc:
        logger.debug("%s stopped on budget: %s", name, exc)

    best = tree.argmax_u_hat(tree.sampled_nodes())
    value = tree.u_hat(best)
    if trace:
        events.append(TraceEvent(stage="output", h=len(best), node=list(best), u_hat=value))

    logger.debug("%s n=%d h_max=%d charged=%d depth=%d", name, n, h_max, ledger.charged,
                 tree.max_opened_depth)
    return PlannerResult(
        planner=name,
        first_action=best[0],
        chosen_sequence=best,
        chosen_value=value,
        budget_used=ledger.charged,
        budget_limit=ledger.capacity,
        max_opened_depth=tree.max_opened_depth,
        root_estimates=tree.root_estimates(),
        trace=tuple(events),
    )


def run_sequool(env: GenerativeModel, n: int, gamma: float | None = None, *,
                rng: np.random.Generator | None = None,
                trace: bool = False) -> PlannerResult:
    return _run(env, n, gamma, rng=rng or np.random.default_rng(0),
                reset=False, trace=trace, name="sequool")


def run_sequool_reset(env: GenerativeModel, n: int, gamma: float | None = None, *,
                      rng: np.random.Generator | None = None,
                      trace: bool = False) -> PlannerResult:
    return _run(env, n, gamma, rng=rng or np.random.default_rng(0),
                reset=True, trace=trace, name="sequool_reset")
