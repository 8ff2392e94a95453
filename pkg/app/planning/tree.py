"""
Planning tree over action sequences.

A node is identified by its action sequence (a tuple of action indices; the
empty tuple is the root). Each non-root node carries the statistics of the
edge entering it: the samples of its last action drawn at its parent's state.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator

import numpy as np

from ..environments.base import GenerativeModel, path_value
from ..errors import AlreadyOpened, MissingSamples, NodeNotPresent
from .budget import BudgetLedger
from .samplelog import SampleRecord

ActionSeq = tuple[int, ...]
ROOT: ActionSeq = ()


@dataclass(slots=True)
class EdgeStats:
    count: int = 0
    reward_sum: float = 0.0

    def add(self, rewards: np.ndarray) -> None:
        self.count += int(rewards.size)
        self.reward_sum += float(np.sum(rewards))

    @property
    def has_samples(self) -> bool:
        return self.count > 0

    @property
    def mean(self) -> float | None:
        if self.count == 0:
            return None
        return self.reward_sum / self.count


@dataclass(slots=True, eq=False)
class TreeNode:
    seq: ActionSeq
    state: Any
    stats: EdgeStats = field(default_factory=EdgeStats)
    opened: bool = False
    opened_with_m: int | None = None
    children: list[ActionSeq] = field(default_factory=list)
    u_hat_cache: float | None = None

    @property
    def depth(self) -> int:
        return len(self.seq)


class PlanningTree:
    """
    Owned by a single planner run. Successor states are computed once per
    node and cached (dynamics are deterministic).
    """

    def __init__(self, env: GenerativeModel, *, rng: np.random.Generator,
                 gamma: float | None = None, log_samples: bool = False):
        self.env = env
        self.rng = rng
        self.gamma = env.gamma if gamma is None else gamma
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}.")
        self.K = env.n_actions

        root = TreeNode(ROOT, env.root_state)
        root.u_hat_cache = 0.0
        self._nodes: dict[ActionSeq, TreeNode] = {ROOT: root}
        self._by_depth: dict[int, list[ActionSeq]] = {0: [ROOT]}
        self._stream_index = 0
        self.max_opened_depth = -1
        self.sample_log: list[SampleRecord] | None = [] if log_samples else None

    # --- lookup ------------------------------------------------------------

    def __contains__(self, seq) -> bool:
        return tuple(seq) in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def __iter__(self) -> Iterator[ActionSeq]:
        return iter(self._nodes)

    def node(self, seq) -> TreeNode:
        try:
            return self._nodes[tuple(seq)]
        except KeyError:
            raise NodeNotPresent(tuple(seq)) from None

    @property
    def root(self) -> TreeNode:
        return self._nodes[ROOT]

    def nodes_at_depth(self, depth: int) -> list[ActionSeq]:
        return list(self._by_depth.get(depth, ()))

    def sampled_nodes(self) -> list[ActionSeq]:
        return [s for s, nd in self._nodes.items() if s and nd.stats.count > 0]

    # --- growth ------------------------------------------------------------

    def child(self, seq, action: int) -> TreeNode:
        """Returns the child node, creating it (and caching its state) if needed."""
        parent = self.node(seq)
        self.env.check_action(action)
        key = parent.seq + (action,)
        existing = self._nodes.get(key)
        if existing is not None:
            return existing
        nd = TreeNode(key, self.env.transition(parent.state, action))
        self._nodes[key] = nd
        self._by_depth.setdefault(len(key), []).append(key)
        parent.children.append(key)
        return nd

    def ensure_path(self, seq) -> TreeNode:
        nd = self.root
        for a in seq:
            nd = self.child(nd.seq, a)
        return nd

    def record(self, seq, rewards) -> None:
        """Folds reward samples into the statistics of the edge entering `seq`."""
        nd = self.node(seq)
        if not nd.seq:
            raise ValueError("The root has no entering edge.")
        arr = np.atleast_1d(np.asarray(rewards, dtype=float))
        self._invalidate(nd)
        nd.stats.add(arr)

        if self.sample_log is not None:
            prefix = list(nd.seq[:-1])
            for r in arr:
                self.sample_log.append(SampleRecord(
                    sequence=prefix, action=nd.seq[-1], reward=float(r),
                    stream_index=self._stream_index))
                self._stream_index += 1

    def sample(self, seq, m: int) -> np.ndarray:
        """Draws m fresh samples of the edge entering `seq` and records them."""
        nd = self.node(seq)
        parent = self._nodes[nd.seq[:-1]]
        rewards = self.env.sample_rewards(parent.state, nd.seq[-1], m, self.rng)
        self.record(nd.seq, rewards)
        return rewards

    def open(self, seq, m: int, ledger: BudgetLedger) -> list[ActionSeq]:
        """
        Opens a node: m reward samples for each of its K children.

        The ledger is charged before anything is drawn, so BudgetExhausted
        leaves the tree untouched.
        """
        nd = self.node(seq)
        if nd.opened:
            raise AlreadyOpened(nd.seq)
        if m < 1:
            raise ValueError(f"An opening needs m >= 1 evaluations, got {m}.")

        ledger.charge_opening(m, nd.depth)
        children = []
        for action in range(self.K):
            ch = self.child(nd.seq, action)
            rewards = self.env.sample_rewards(nd.state, action, m, self.rng)
            self.record(ch.seq, rewards)
            children.append(ch.seq)

        nd.opened = True
        nd.opened_with_m = m
        self.max_opened_depth = max(self.max_opened_depth, nd.depth)
        return children

    def _invalidate(self, nd: TreeNode) -> None:
        # a cached node always has cached ancestors, so the walk stops at the
        # first node without a cache
        stack = [nd]
        while stack:
            cur = stack.pop()
            if cur.u_hat_cache is None:
                continue
            cur.u_hat_cache = None
            stack.extend(self._nodes[c] for c in cur.children)

    # --- estimates -----------------------------------------------------------

    def u_hat(self, seq) -> float:
        """û(a) = sum_t gamma^t r̂_t over the edges of a."""
        nd = self.node(seq)
        if nd.u_hat_cache is not None:
            return nd.u_hat_cache

        chain = []
        cur = nd
        while cur.u_hat_cache is None:
            chain.append(cur)
            cur = self._nodes[cur.seq[:-1]]

        value = cur.u_hat_cache
        for link in reversed(chain):
            if link.stats.count == 0:
                raise MissingSamples(link.seq)
            value = value + self.gamma ** (link.depth - 1) * link.stats.mean
            link.u_hat_cache = value
        return value

    def u_value(self, seq) -> float:
        """u(a) from the true means. Oracle access only, never used to plan."""
        return path_value(self.env, seq, gamma=self.gamma, state=self.root.state)

    def b_value(self, seq, r_max: float, gamma: float | None = None) -> float:
        g = self.gamma if gamma is None else gamma
        if not math.isfinite(r_max):
            raise ValueError("R_max must be finite.")
        if not 0.0 <= g < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {g}.")
        seq = tuple(seq)
        u = path_value(self.env, seq, gamma=g, state=self.root.state)
        return u + g ** len(seq) * r_max / (1.0 - g)

    def select_top_nodes(self, depth: int, count: int,
                         eligibility: Callable[[EdgeStats], bool] | None = None) -> list[ActionSeq]:
        """
        Up to `count` unopened depth-`depth` nodes with the highest û,
        ties broken by lexicographic order of the sequences.
        """
        if depth < 1:
            raise ValueError("select_top_nodes needs depth >= 1.")
        cap = min(count, self.K ** depth)
        if cap <= 0:
            return []

        pool = []
        for s in self._by_depth.get(depth, ()):
            nd = self._nodes[s]
            if nd.opened or nd.stats.count == 0:
                continue
            if eligibility is not None and not eligibility(nd.stats):
                continue
            pool.append(s)
        pool.sort(key=lambda s: (-self.u_hat(s), s))
        return pool[:cap]

    def argmax_u_hat(self, seqs: Iterable[ActionSeq]) -> ActionSeq | None:
        best = None
        best_key = None
        for s in seqs:
            key = (-self.u_hat(s), s)
            if best_key is None or key < best_key:
                best, best_key = s, key
        return best

    def root_estimates(self) -> dict[int, float]:
        out = {}
        for a in range(self.K):
            nd = self._nodes.get((a,))
            if nd is not None and nd.stats.count > 0:
                out[a] = nd.stats.mean
        return out

    # --- invariants ----------------------------------------------------------

    def consistency_violations(self) -> list[ActionSeq]:
        """Sampled nodes whose parent was never opened."""
        bad = []
        for s, nd in self._nodes.items():
            if s and nd.stats.count > 0 and not self._nodes[s[:-1]].opened:
                bad.append(s)
        return bad
