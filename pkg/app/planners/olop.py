"""
Open-loop optimistic planning, used as the non-scale-free baseline.

M episodes of length L. Each episode plays the depth-L sequence with the
highest B-value

    U(a) = sum_t gamma^t (r̂_t + b̃ sqrt(2 log M / T_t)) + R̃ gamma^h(a) / (1 - gamma)
    B(a) = min over prefixes a' of a of U(a')

where an unvisited prefix scores +inf. B is kept incrementally as
B(a) = S(a) + rel(a), S being the sum of the per-edge terms and

    rel(a) = min(cap(h), max_k [e(a k) + rel(a k)]),   rel(leaf) = cap(L)

Only nodes on the played path change after an episode, so only their rel
values are refreshed.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from ..environments.base import GenerativeModel
from ..errors import BudgetExhausted, InvalidConfig
from ..planning.budget import BudgetLedger, LedgerMode
from ..planning.tree import ROOT, ActionSeq, PlanningTree
from .result import PlannerResult, TraceEvent

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OlopConfig:
    b_tilde: float
    r_max_tilde: float
    episodes: int
    horizon: int

    @property
    def evaluations(self) -> int:
        return self.episodes * self.horizon


def olop_horizon(M: int, gamma: float) -> int:
    if M <= 1 or gamma == 0.0:
        return 1
    return max(1, math.ceil(math.log(M) / (2.0 * math.log(1.0 / gamma))))


def olop_config(n: int, K: int, gamma: float, b_tilde: float | None,
                r_max_tilde: float | None) -> OlopConfig:
    """Largest M with M * L(M) <= n K."""
    if b_tilde is None or r_max_tilde is None:
        raise InvalidConfig("OLOP requires b̃, R̃_max.")
    if not math.isfinite(b_tilde) or b_tilde < 0:
        raise InvalidConfig(f"b̃ must be >= 0, got {b_tilde}.")
    if not math.isfinite(r_max_tilde) or r_max_tilde <= 0:
        raise InvalidConfig(f"R̃_max must be > 0, got {r_max_tilde}.")
    if not 0.0 <= gamma < 1.0:
        raise InvalidConfig(f"gamma must be in [0, 1), got {gamma}.")

    evals = n * K
    if evals < 1:
        raise InvalidConfig(f"n={n} leaves no evaluations for OLOP.")
    lo, hi = 1, evals
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid * olop_horizon(mid, gamma) <= evals:
            lo = mid
        else:
            hi = mid - 1
    M = lo
    L = olop_horizon(M, gamma)
    if M * L > evals:
        raise InvalidConfig(f"no episode fits into {evals} evaluations.")
    return OlopConfig(b_tilde=float(b_tilde), r_max_tilde=float(r_max_tilde), episodes=M, horizon=L)


class Olop:
    name = "olop"

    def __init__(self, env: GenerativeModel, n: int, cfg: OlopConfig, gamma: float | None = None, *,
                 rng: np.random.Generator, trace: bool = False):
        self.env = env
        self.n = n
        self.cfg = cfg
        self.tree = PlanningTree(env, rng=rng, gamma=gamma)
        self.gamma = self.tree.gamma
        self.ledger = BudgetLedger(n * env.n_actions, LedgerMode.FREE)
        self.trace_enabled = trace
        self.events: list[TraceEvent] = []
        self._log_m = math.log(cfg.episodes) if cfg.episodes > 1 else 0.0
        self._rel: dict[ActionSeq, float] = {}

    def cap(self, h: int) -> float:
        if self.gamma == 0.0:
            return self.cfg.r_max_tilde if h == 0 else 0.0
        return self.cfg.r_max_tilde * self.gamma ** h / (1.0 - self.gamma)

    def edge_term(self, seq: ActionSeq) -> float:
        """gamma^t (r̂ + b̃ sqrt(2 log M / T)) for the edge entering `seq`; +inf if unvisited."""
        if seq not in self.tree:
            return math.inf
        stats = self.tree.node(seq).stats
        if stats.count == 0:
            return math.inf
        bonus = self.cfg.b_tilde * math.sqrt(2.0 * self._log_m / stats.count)
        return self.gamma ** (len(seq) - 1) * (stats.mean + bonus)

    def rel(self, seq: ActionSeq) -> float:
        return self._rel.get(seq, math.inf)

    def child_score(self, seq: ActionSeq) -> float:
        return self.edge_term(seq) + self.rel(seq)

    def choose_episode(self) -> ActionSeq:
        seq = ROOT
        for _ in range(self.cfg.horizon):
            best_k, best = 0, -math.inf
            for k in range(self.env.n_actions):
                score = self.child_score(seq + (k,))
                if score > best:
                    best_k, best = k, score
            seq = seq + (best_k,)
        return seq

    def _refresh(self, seq: ActionSeq) -> None:
        L = self.cfg.horizon
        self._rel[seq] = self.cap(L)
        for h in range(L - 1, -1, -1):
            prefix = seq[:h]
            best = max(self.child_score(prefix + (k,)) for k in range(self.env.n_actions))
            self._rel[prefix] = min(self.cap(h), best)

    def play(self, seq: ActionSeq) -> None:
        self.ledger.charge(len(seq))
        self.tree.ensure_path(seq)
        for t in range(1, len(seq) + 1):
            self.tree.sample(seq[:t], 1)
        self._refresh(seq)
        if self.trace_enabled:
            self.events.append(TraceEvent(stage="episode", h=len(seq), node=list(seq), m=1))

    def recommend(self) -> ActionSeq:
        """Most visited root action, then the most visited continuation."""
        seq = ROOT
        while True:
            best, best_t = None, 0
            for k in range(self.env.n_actions):
                ch = seq + (k,)
                t = self.tree.node(ch).stats.count if ch in self.tree else 0
                if t > best_t:
                    best, best_t = ch, t
            if best is None:
                return seq
            seq = best

    def run(self) -> PlannerResult:
        try:
            for _ in range(self.cfg.episodes):
                self.play(self.choose_episode())
        except BudgetExhausted as exc:
            logger.debug("olop stopped on budget: %s", exc)

        best = self.recommend()
        value = self.tree.u_hat(best)
        logger.debug("olop n=%d M=%d L=%d charged=%d", self.n, self.cfg.episodes,
                     self.cfg.horizon, self.ledger.charged)
        return PlannerResult(
            planner=self.name,
            first_action=best[0],
            chosen_sequence=best,
            chosen_value=value,
            budget_used=math.ceil(self.ledger.charged / self.env.n_actions),
            budget_limit=self.n,
            max_opened_depth=self.cfg.horizon - 1,
            root_estimates=self.tree.root_estimates(),
            trace=tuple(self.events),
        )


def run_olop(env: GenerativeModel, n: int, gamma: float | None = None, cfg: OlopConfig | None = None, *,
             b_tilde: float | None = None, r_max_tilde: float | None = None,
             rng: np.random.Generator | None = None,
             trace: bool = False) -> PlannerResult:
    g = env.gamma if gamma is None else gamma
    if cfg is None:
        cfg = olop_config(n, env.n_actions, g, b_tilde, r_max_tilde)
    elif cfg.evaluations > n * env.n_actions or cfg.horizon < 1 or cfg.episodes < 1:
        raise InvalidConfig(f"M={cfg.episodes}, L={cfg.horizon} do not fit n*K={n * env.n_actions}.")
    return Olop(env, n, cfg, g, rng=rng or np.random.default_rng(0), trace=trace).run()
