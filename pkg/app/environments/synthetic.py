"""
Synthetic planning trees with a designated optimal path and controllable
smoothness (nu, rho).

Along the optimal path the reward at depth t is nu * rho^t * (1 - rho) / gamma^t,
so the optimal value is nu * (1 - rho^H) and the tail after depth h is
nu * (rho^h - rho^H) <= nu * rho^h.

- kappa_target == 1: sparse table. Off-path edges pay (1 - gap) times the
  on-path reward of their depth and lead to a zero-reward sink.
- kappa_target > 1: dense table to depth H. Every off-path edge pays a
  uniform factor in [0, 1 - gap] of the on-path reward of its depth.

Beyond depth H every reward is 0.
"""
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from ..errors import InfeasibleParameters
from .base import AccessMode, GenerativeModel, NoiseModel

# state of every node whose subtree carries no explicit rewards
SINK = -1

MAX_TABLE_ROWS = 10**7


@dataclass(frozen=True, eq=False)
class SyntheticTree(GenerativeModel):
    n_actions: int
    max_depth: int
    gamma: float
    nu: float
    rho: float
    optimal_path: tuple[int, ...]
    table: dict[tuple[int, ...], tuple[float, ...]]
    r_max: float = 1.0
    kappa_target: float = 1.0
    gap: float = 1.0
    seed: int = 0
    noise: NoiseModel = field(default_factory=NoiseModel)
    scale: float = 1.0
    access: AccessMode = AccessMode.CHECKPOINT
    root: Any = ()
    near_optimal_counts: tuple[int, ...] = ()

    @property
    def root_state(self):
        return self.root

    @property
    def count_bound(self) -> int | None:
        return max(self.near_optimal_counts) if self.near_optimal_counts else None

    @property
    def optimal_value(self) -> float:
        total = 0.0
        for t, a in enumerate(self.optimal_path):
            total += self.gamma ** t * self.true_mean(self.optimal_path[:t], a)
        return total

    def transition(self, state, action: int):
        self.check_action(action)
        if state == SINK:
            return SINK
        child = tuple(state) + (action,)
        return child if child in self.table else SINK

    def true_mean(self, state, action: int) -> float:
        self.check_action(action)
        if state == SINK:
            return 0.0
        row = self.table.get(tuple(state))
        if row is None:
            return 0.0
        return self.scale * row[action]

    def with_root(self, state) -> "SyntheticTree":
        return replace(self, root=state)

    def scaled(self, alpha: float) -> "SyntheticTree":
        return replace(self, scale=self.scale * alpha, r_max=self.r_max * alpha,
                       noise=self.noise.scaled(alpha))


def _on_path_rewards(H: int, nu: float, rho: float, gamma: float) -> list[float]:
    return [nu * rho ** t * (1.0 - rho) / gamma ** t for t in range(H)]


def _kappa_one_counts(K: int, H: int, nu: float, rho: float, gap: float) -> tuple[int, ...]:
    """
    N^u_h(3 nu rho^h) for the sparse construction, h = 0..H.

    A node that leaves the optimal path at depth d has u = u*_d + (1 - gap) gamma^d r*_d
    whatever its depth, i.e. nu * (1 - rho^d) + (1 - gap) * nu * rho^d * (1 - rho).
    """
    v_star = nu * (1.0 - rho ** H)
    counts = []
    for h in range(H + 1):
        threshold = v_star - 3.0 * nu * rho ** h
        n = 1
        for d in range(h):
            u_dev = nu * (1.0 - rho ** d) + (1.0 - gap) * nu * rho ** d * (1.0 - rho)
            if u_dev >= threshold:
                n += (K - 1) * K ** (h - d - 1)
        counts.append(n)
    return tuple(counts)


def build_synthetic_tree(
    K: int,
    H: int,
    nu: float,
    rho: float,
    gamma: float,
    kappa_target: float = 1,
    seed: int = 0,
    *,
    r_max: float = 1.0,
    gap: float | None = None,
    noise: NoiseModel | None = None,
) -> SyntheticTree:
    if K < 1 or H < 1:
        raise InfeasibleParameters("K and H must be >= 1.")
    if not 0.0 < gamma < 1.0:
        raise InfeasibleParameters(f"gamma must be in (0, 1), got {gamma}.")
    if not 0.0 < rho <= gamma:
        raise InfeasibleParameters(f"rho must be in (0, gamma], got {rho}.")
    if not 0.0 < nu <= r_max / (1.0 - gamma) * (1 + 1e-12):
        raise InfeasibleParameters(f"nu must be in (0, R_max/(1-gamma)], got {nu}.")
    if kappa_target < 1:
        raise InfeasibleParameters("kappa_target must be >= 1.")

    sparse = kappa_target == 1
    if gap is None:
        gap = 1.0 if sparse else 0.1
    if gap > 1.0:
        raise InfeasibleParameters(f"gap {gap} > 1 would force negative rewards.")
    if gap <= 0.0:
        raise InfeasibleParameters("gap must be > 0 for the designated path to be optimal.")

    on_path = _on_path_rewards(H, nu, rho, gamma)
    if max(on_path) > r_max * (1 + 1e-12):
        raise InfeasibleParameters(
            f"on-path reward {max(on_path):.6g} exceeds R_max {r_max}; lower nu or raise rho.")

    rng = np.random.default_rng(seed)
    path = tuple(int(a) for a in rng.integers(0, K, H))
    table: dict[tuple[int, ...], tuple[float, ...]] = {}

    if sparse:
        for t in range(H):
            row = [(1.0 - gap) * on_path[t]] * K
            row[path[t]] = on_path[t]
            table[path[:t]] = tuple(row)
        counts = _kappa_one_counts(K, H, nu, rho, gap)
    else:
        rows = sum(K ** t for t in range(H))
        if rows > MAX_TABLE_ROWS:
            raise InfeasibleParameters(f"dense table would hold {rows} rows (> {MAX_TABLE_ROWS}).")
        for t in range(H):
            for prefix in itertools.product(range(K), repeat=t):
                row = rng.uniform(0.0, 1.0 - gap, K) * on_path[t]
                if prefix == path[:t]:
                    row[path[t]] = on_path[t]
                table[prefix] = tuple(float(x) for x in row)
        counts = ()

    return SyntheticTree(
        n_actions=K,
        max_depth=H,
        gamma=gamma,
        nu=nu,
        rho=rho,
        optimal_path=path,
        table=table,
        r_max=r_max,
        kappa_target=float(kappa_target),
        gap=gap,
        seed=seed,
        noise=noise or NoiseModel(),
        near_optimal_counts=counts,
    )


# --- fixtures on disk ---------------------------------------------------------

class TableRow(BaseModel):
    node: list[int]
    means: list[float]


class SyntheticTreeFile(BaseModel):
    n_actions: int
    max_depth: int
    gamma: float
    nu: float
    rho: float
    r_max: float
    kappa_target: float
    gap: float
    seed: int
    optimal_path: list[int]
    near_optimal_counts: list[int] = []
    nodes: list[TableRow]


def tree_to_file(tree: SyntheticTree) -> SyntheticTreeFile:
    rows = sorted(tree.table.items(), key=lambda kv: (len(kv[0]), kv[0]))
    return SyntheticTreeFile(
        n_actions=tree.n_actions,
        max_depth=tree.max_depth,
        gamma=tree.gamma,
        nu=tree.nu,
        rho=tree.rho,
        r_max=tree.r_max,
        kappa_target=tree.kappa_target,
        gap=tree.gap,
        seed=tree.seed,
        optimal_path=list(tree.optimal_path),
        near_optimal_counts=list(tree.near_optimal_counts),
        nodes=[TableRow(node=list(k), means=list(v)) for k, v in rows],
    )


def save_synthetic_tree(tree: SyntheticTree, path: str | Path) -> Path:
    p = Path(path)
    p.write_text(tree_to_file(tree).model_dump_json(indent=1), encoding="utf-8")
    return p


def load_synthetic_tree(path: str | Path, *, noise: NoiseModel | None = None) -> SyntheticTree:
    data = SyntheticTreeFile.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))
    for row in data.nodes:
        if len(row.means) != data.n_actions or not all(math.isfinite(x) for x in row.means):
            raise InfeasibleParameters(f"bad table row for node {row.node}.")
    return SyntheticTree(
        n_actions=data.n_actions,
        max_depth=data.max_depth,
        gamma=data.gamma,
        nu=data.nu,
        rho=data.rho,
        optimal_path=tuple(data.optimal_path),
        table={tuple(r.node): tuple(r.means) for r in data.nodes},
        r_max=data.r_max,
        kappa_target=data.kappa_target,
        gap=data.gap,
        seed=data.seed,
        noise=noise or NoiseModel(),
        near_optimal_counts=tuple(data.near_optimal_counts),
    )
