"""
Brute-force ground truth by truncated value iteration over reachable states.

States reachable at each level are enumerated forwards from the root, then
V_t(x) = max_a r(x, a) + gamma V_{t+1}(f(x, a)) is computed backwards with
V_H = 0. Open-loop sequences and closed-loop policies agree here because the
dynamics are deterministic.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from ..environments.base import GenerativeModel, path_states, path_value
from ..errors import HorizonTooShallow

logger = logging.getLogger(__name__)

# relative slack for "same value" decisions on truncated floats
VALUE_TOL = 1e-12


def tail_bound(gamma: float, r_max: float, h: int) -> float:
    """gamma^h R_max / (1 - gamma): what rewards after depth h can still add."""
    return gamma ** h * r_max / (1.0 - gamma)


# past this depth the tail search gives up
MAX_HORIZON = 100_000


def oracle_horizon(env: GenerativeModel, tol: float, gamma: float | None = None) -> int:
    """Smallest H whose value tail `env.value_tail(gamma, H)` is within `tol`."""
    g = env.gamma if gamma is None else gamma
    if tol <= 0:
        raise HorizonTooShallow(f"tolerance must be > 0, got {tol}.")
    h = 1
    while env.value_tail(g, h) > tol:
        h += 1
        if h > MAX_HORIZON:
            raise HorizonTooShallow(f"no horizon up to {MAX_HORIZON} brings the tail under tol={tol}.")
    return h


@dataclass(frozen=True)
class OracleTable:
    env: GenerativeModel
    gamma: float
    horizon: int
    tail: float
    root_state: Any
    levels: tuple[dict, ...]  # levels[t][state] = V_{H-t}(state)
    q_star: dict[int, float] = field(default_factory=dict)

    @property
    def v_star(self) -> float:
        return self.levels[0][self.root_state]

    @property
    def optimal_actions(self) -> list[int]:
        best = max(self.q_star.values())
        slack = VALUE_TOL * max(1.0, abs(best))
        return [a for a, q in sorted(self.q_star.items()) if q >= best - slack]

    def level_value(self, h: int, state: Any) -> float:
        if not 0 <= h <= self.horizon:
            raise ValueError(f"depth {h} outside [0, {self.horizon}].")
        if h == self.horizon:
            return 0.0
        return self.levels[h][state]

    def node_value(self, seq: Sequence[int]) -> float:
        """v_H(a) = u(a) + gamma^h(a) V_{H-h(a)}(x_a); within `tail` of v(a)."""
        seq = tuple(seq)
        states = path_states(self.env, seq, self.root_state)
        u = path_value(self.env, seq, gamma=self.gamma, state=self.root_state)
        return u + self.gamma ** len(seq) * self.level_value(len(seq), states[-1])

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "gamma": self.gamma,
            "tail": self.tail,
            "v_star": self.v_star,
            "q_star": {str(a): q for a, q in sorted(self.q_star.items())},
            "optimal_actions": self.optimal_actions,
        }


def brute_force_values(env: GenerativeModel, H: int | None = None, tol: float = 1e-3, *,
                       gamma: float | None = None, state: Any = None) -> OracleTable:
    g = env.gamma if gamma is None else gamma
    if state is not None:
        env = env.with_root(state)
    if H is None:
        H = oracle_horizon(env, tol, g)
    if H < 1:
        raise HorizonTooShallow(f"horizon must be >= 1, got {H}.")
    tail = env.value_tail(g, H)
    if tail > tol:
        raise HorizonTooShallow(
            f"tail bound {tail:.6g} at H={H} exceeds tol={tol}; need H >= {oracle_horizon(env, tol, g)}.")

    root = env.root_state
    K = env.n_actions

    reachable: list[list] = [[root]]
    for _ in range(H - 1):
        seen: dict = {}
        for x in reachable[-1]:
            for a in range(K):
                seen.setdefault(env.transition(x, a), None)
        reachable.append(list(seen))

    levels: list[dict] = [dict() for _ in range(H)]
    for t in range(H - 1, -1, -1):
        nxt = levels[t + 1] if t + 1 < H else None
        for x in reachable[t]:
            best = -math.inf
            for a in range(K):
                cont = nxt[env.transition(x, a)] if nxt is not None else 0.0
                best = max(best, env.true_mean(x, a) + g * cont)
            levels[t][x] = best

    q_star = {}
    for a in range(K):
        cont = levels[1][env.transition(root, a)] if H > 1 else 0.0
        q_star[a] = env.true_mean(root, a) + g * cont

    logger.debug("oracle H=%d states=%d v*=%.6g tail=%.3g", H,
                 sum(len(lv) for lv in levels), levels[0][root], tail)
    return OracleTable(env=env, gamma=g, horizon=H, tail=tail, root_state=root,
                       levels=tuple(levels), q_star=q_star)


def simple_regret(oracle: OracleTable, recommended: int) -> float:
    """max_a Q*(x, a) - Q*(x, a(n)); 0 for any optimal action."""
    if recommended not in oracle.q_star:
        raise ValueError(f"action {recommended} not covered by the oracle.")
    if recommended in oracle.optimal_actions:
        return 0.0
    return max(oracle.q_star.values()) - oracle.q_star[recommended]


def certified_loss(oracle: OracleTable, sequence: Sequence[int]) -> float:
    """v* - u(a): bounds the simple regret of the first action of a."""
    u = path_value(oracle.env, tuple(sequence), gamma=oracle.gamma, state=oracle.root_state)
    return max(0.0, oracle.v_star - u)
