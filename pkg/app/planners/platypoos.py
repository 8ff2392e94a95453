"""
PlaTγPOOS: scale-free planning with deterministic dynamics and stochastic
rewards. It never reads the reward range or the noise range.

Phases:
  1. open the root with h_max evaluations
  2. for h = 1..h_max and p = top(h)..0: open, with m(h, p) evaluations,
     the q(h, p) unopened depth-h nodes with highest û among those whose
     entering edge has T >= e(h, p)
  3. one candidate per p: argmax û over sequences whose edges at depths
     t = 2..h(a) satisfy T >= ceil((t-1) 2^p gamma^(2(t-1)))
  4. cross-validation: extra evaluations of each candidate's actions
  5. output the candidate with the highest refreshed û

With `fill_budget`, h_max is raised until the worst-case charge reaches n.
"""
import functools
import logging
import math
from dataclasses import dataclass

import numpy as np

from ..environments.base import AccessMode, GenerativeModel
from ..errors import BudgetExhausted, BudgetTooSmall
from ..planning.budget import BudgetLedger, LedgerMode
from ..planning.tree import ROOT, ActionSeq, PlanningTree
from .result import PlannerResult, TraceEvent

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScheduleEntry:
    h: int
    p: int
    m: int          # evaluations per opening, ceil(h 2^p gamma^2h)
    quota: int      # nodes to open, floor(h_max / (h m))
    threshold: int  # eligibility on T, ceil((h-1) 2^p gamma^2(h-1))


def _ceil(x: float) -> int:
    return int(math.ceil(x))


def eligibility_threshold(t: int, p: int, gamma: float) -> int:
    """ceil((t-1) 2^p gamma^(2(t-1))); 0 at t = 1."""
    if t <= 1:
        return 0
    return _ceil((t - 1) * 2 ** p * gamma ** (2 * (t - 1)))


@dataclass(frozen=True)
class PlatypoosSchedule:
    n: int
    gamma: float
    h_max: int
    p_max: int
    entries: tuple[ScheduleEntry, ...]

    def top(self, h: int) -> int:
        """floor(log2(h_max / ceil(h^2 gamma^2h))), -1 when the depth is skipped."""
        c = max(1, _ceil(h * h * self.gamma ** (2 * h)))
        ratio = self.h_max // c
        return ratio.bit_length() - 1

    def at_depth(self, h: int) -> list[ScheduleEntry]:
        return [e for e in self.entries if e.h == h]

    def entry(self, h: int, p: int) -> ScheduleEntry:
        for e in self.entries:
            if e.h == h and e.p == p:
                return e
        raise KeyError((h, p))

    def cross_validation_count(self, t: int) -> int:
        g2 = self.gamma ** 2
        return _ceil((t + 1) * g2 ** t * self.h_max * (1.0 - g2) ** 2)

    def exploration_charge(self, reset: bool = False) -> int:
        """Root initialisation plus every scheduled opening, in ledger units."""
        return self.h_max + sum(e.quota * (e.m + (e.h if reset else 0)) for e in self.entries)

    @property
    def deepest_opening(self) -> int:
        return max((e.h for e in self.entries if e.quota > 0), default=0)

    def worst_case_charge(self, reset: bool = False) -> int:
        """Exploration plus cross-validation of p_max + 1 candidates as deep as the schedule allows."""
        per_candidate = sum(self.cross_validation_count(t) + (t if reset else 0)
                            for t in range(self.deepest_opening + 1))
        return self.exploration_charge(reset) + (self.p_max + 1) * per_candidate


def default_h_max(n: int) -> int:
    return int(n / (2 * (math.log2(n) + 1) ** 2)) if n >= 1 else 0


def build_schedule(n: int, gamma: float, h_max: int) -> PlatypoosSchedule:
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must be in [0, 1), got {gamma}.")
    if h_max < 1:
        raise BudgetTooSmall(f"n={n} gives h_max=0.")
    p_max = h_max.bit_length() - 1

    entries = []
    for h in range(1, h_max + 1):
        c = max(1, _ceil(h * h * gamma ** (2 * h)))
        top = (h_max // c).bit_length() - 1
        for p in range(top, -1, -1):
            m = max(1, _ceil(h * 2 ** p * gamma ** (2 * h)))
            entries.append(ScheduleEntry(
                h=h, p=p, m=m,
                quota=h_max // (h * m),
                threshold=eligibility_threshold(h, p, gamma),
            ))
    return PlatypoosSchedule(n=n, gamma=gamma, h_max=h_max, p_max=p_max, entries=tuple(entries))


@functools.lru_cache(maxsize=64)
def platypoos_schedule(n: int, gamma: float, *, fill: bool = False,
                       reset: bool = False) -> PlatypoosSchedule:
    """
    Schedule for a budget n. With `fill`, h_max is raised to the largest value
    (found by bisection) whose worst-case charge still fits in n; the floors
    otherwise leave most of the budget unused.
    """
    base = build_schedule(n, gamma, default_h_max(n))
    if not fill or base.worst_case_charge(reset) > n:
        return base

    lo, hi = base.h_max, n
    best = base
    while lo < hi:
        mid = (lo + hi + 1) // 2
        candidate = build_schedule(n, gamma, mid)
        if candidate.worst_case_charge(reset) <= n:
            lo, best = mid, candidate
        else:
            hi = mid - 1
    logger.debug("filled schedule n=%d: h_max %d -> %d", n, base.h_max, best.h_max)
    return best


class Platypoos:
    """One run: owns its tree, ledger and RNG stream."""

    name = "platypoos"

    def __init__(self, env: GenerativeModel, n: int, gamma: float | None = None, *,
                 rng: np.random.Generator, trace: bool = False,
                 log_samples: bool = False, fill_budget: bool = False):
        self.env = env
        self.gamma = env.gamma if gamma is None else gamma
        self.schedule = platypoos_schedule(n, self.gamma, fill=fill_budget,
                                           reset=env.access is AccessMode.RESET)
        self.tree = PlanningTree(env, rng=rng, gamma=self.gamma, log_samples=log_samples)
        self.ledger = BudgetLedger(n, LedgerMode.for_access(env.access), tolerance=1)
        self.trace_enabled = trace
        self.events: list[TraceEvent] = []
        self.exhausted = False
        self.candidates: dict[int, ActionSeq] = {}

    def _event(self, **kw) -> None:
        if self.trace_enabled:
            self.events.append(TraceEvent(**kw))

    def explore(self) -> None:
        sch = self.schedule
        try:
            self.tree.open(ROOT, sch.h_max, self.ledger)
            self._event(stage="init", h=0, node=[], m=sch.h_max)

            for entry in sch.entries:
                if entry.quota == 0:
                    continue
                thr = entry.threshold
                chosen = self.tree.select_top_nodes(
                    entry.h, entry.quota, eligibility=lambda st, thr=thr: st.count >= thr)
                for seq in chosen:
                    u = self.tree.u_hat(seq)
                    self.tree.open(seq, entry.m, self.ledger)
                    self._event(stage="explore", h=entry.h, p=entry.p, node=list(seq),
                                m=entry.m, u_hat=u)
        except BudgetExhausted as exc:
            self.exhausted = True
            logger.debug("exploration stopped on budget: %s", exc)

    def _valid_for(self, p: int) -> list[ActionSeq]:
        """Sampled sequences whose edges at depths 2..h(a) meet the p-level thresholds."""
        valid: dict[ActionSeq, bool] = {ROOT: True}
        out = []
        for seq in sorted(self.tree.sampled_nodes(), key=len):
            nd = self.tree.node(seq)
            ok = valid.get(seq[:-1], False) and nd.stats.count >= eligibility_threshold(len(seq), p, self.gamma)
            valid[seq] = ok
            if ok:
                out.append(seq)
        return out

    def select_candidates(self) -> dict[int, ActionSeq]:
        for p in range(self.schedule.p_max + 1):
            best = self.tree.argmax_u_hat(self._valid_for(p))
            if best is not None:
                self.candidates[p] = best
                self._event(stage="candidate", h=len(best), p=p, node=list(best),
                            u_hat=self.tree.u_hat(best))
        return self.candidates

    def cross_validate(self) -> None:
        if self.exhausted:
            return
        try:
            for p, seq in sorted(self.candidates.items()):
                for t in range(len(seq)):
                    m = self.schedule.cross_validation_count(t)
                    self.ledger.charge(self.ledger.opening_cost(m, t))
                    self.tree.sample(seq[: t + 1], m)
                    self._event(stage="cross_validate", h=t, p=p, node=list(seq[: t + 1]), m=m)
        except BudgetExhausted as exc:
            self.exhausted = True
            logger.debug("cross-validation stopped on budget: %s", exc)

    def output(self) -> PlannerResult:
        best_p, best = min(self.candidates.items(),
                           key=lambda kv: (-self.tree.u_hat(kv[1]), kv[1], kv[0]))
        value = self.tree.u_hat(best)
        self._event(stage="output", h=len(best), p=best_p, node=list(best), u_hat=value)
        logger.debug("platypoos n=%d h_max=%d charged=%d depth=%d", self.schedule.n,
                     self.schedule.h_max, self.ledger.charged, self.tree.max_opened_depth)
        return PlannerResult(
            planner=self.name,
            first_action=best[0],
            chosen_sequence=best,
            chosen_value=value,
            budget_used=self.ledger.charged,
            budget_limit=self.ledger.capacity,
            max_opened_depth=self.tree.max_opened_depth,
            candidates=dict(self.candidates),
            root_estimates=self.tree.root_estimates(),
            trace=tuple(self.events),
        )

    def run(self) -> PlannerResult:
        self.explore()
        self.select_candidates()
        self.cross_validate()
        return self.output()


def run_platypoos(env: GenerativeModel, n: int, gamma: float | None = None, *,
                  rng: np.random.Generator | None = None,
                  trace: bool = False, fill_budget: bool = False) -> PlannerResult:
    return Platypoos(env, n, gamma, rng=rng or np.random.default_rng(0),
                     trace=trace, fill_budget=fill_budget).run()
