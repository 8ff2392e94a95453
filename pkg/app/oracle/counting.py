"""
Near-optimality counts by exhaustive enumeration.

N^u_h(eps) counts depth-h sequences with u(a) >= v* - eps, N^v_h(eps) the
same with the truncated v-value from an oracle table.
"""
import bisect
import logging
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from ..environments.base import GenerativeModel
from .values import VALUE_TOL, OracleTable, tail_bound

logger = logging.getLogger(__name__)

CountKind = Literal["u", "v"]


@dataclass(frozen=True)
class CountProfile:
    kind: CountKind
    nu: float
    rho: float
    v_star: float
    gaps: tuple[tuple[float, ...], ...]  # per depth, sorted v* - value
    eps_grid: tuple[float, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.gaps) - 1

    def count(self, h: int, eps: float) -> int:
        slack = VALUE_TOL * max(1.0, abs(self.v_star))
        return bisect.bisect_right(self.gaps[h], eps + slack)

    @property
    def near_optimal(self) -> list[int]:
        """N_h(3 nu rho^h) for h = 0..H."""
        return [self.count(h, 3.0 * self.nu * self.rho ** h) for h in range(self.depth + 1)]

    def grid_counts(self, eps_grid: Sequence[float] | None = None) -> list[list[int]]:
        grid = self.eps_grid if eps_grid is None else eps_grid
        return [[self.count(h, e) for e in grid] for h in range(self.depth + 1)]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "nu": self.nu,
            "rho": self.rho,
            "v_star": self.v_star,
            "near_optimal": self.near_optimal,
            "eps_grid": list(self.eps_grid),
            "grid_counts": self.grid_counts(),
        }


def enumerate_values(env: GenerativeModel, H: int, oracle: OracleTable, kind: CountKind) -> list[np.ndarray]:
    """u or v_H for every sequence of depth 0..H, in lexicographic order per depth."""
    if kind not in ("u", "v"):
        raise ValueError(f"kind must be 'u' or 'v', got {kind!r}.")
    if kind == "v" and H > oracle.horizon:
        raise ValueError(f"oracle horizon {oracle.horizon} < counting depth {H}.")
    g = oracle.gamma
    K = env.n_actions

    frontier = [(oracle.root_state, 0.0)]
    out = []
    for h in range(H + 1):
        if kind == "u":
            out.append(np.array([u for _, u in frontier]))
        else:
            out.append(np.array([u + g ** h * oracle.level_value(h, x) for x, u in frontier]))
        if h == H:
            break
        frontier = [(env.transition(x, a), u + g ** h * env.true_mean(x, a))
                    for x, u in frontier for a in range(K)]
    return out


def count_near_optimal(env: GenerativeModel, oracle: OracleTable, H: int, nu: float, rho: float,
                       kind: CountKind = "u", eps_grid: Sequence[float] = ()) -> CountProfile:
    values = enumerate_values(env, H, oracle, kind)
    v_star = oracle.v_star
    gaps = tuple(tuple(sorted(float(v_star - x) for x in arr)) for arr in values)
    logger.debug("counted %s-values to depth %d (%d nodes)", kind, H, sum(len(x) for x in gaps))
    return CountProfile(kind=kind, nu=nu, rho=rho, v_star=v_star, gaps=gaps,
                        eps_grid=tuple(float(e) for e in eps_grid))


@dataclass(frozen=True)
class Prop2Violation:
    h: int
    eps: float
    side: str  # "v<=u" or "u<=v"
    lhs: int
    rhs: int


@dataclass(frozen=True)
class Prop2Report:
    checked: int
    violations: tuple[Prop2Violation, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def first_violation(self) -> Prop2Violation | None:
        return self.violations[0] if self.violations else None

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def check_prop2(profile_u: CountProfile, profile_v: CountProfile, gamma: float, r_max: float,
                eps_grid: Sequence[float], *,
                tail: Callable[[int], float] | None = None) -> Prop2Report:
    """
    N^v_h(eps) <= N^u_h(eps + tail_h) and N^u_h(eps) <= N^v_h(eps + tail_h)
    with tail_h = gamma^h R_max / (1 - gamma), or `tail(h)` when given.
    """
    if profile_u.depth != profile_v.depth:
        raise ValueError("profiles were computed to different depths.")
    violations = []
    checked = 0
    for h in range(profile_u.depth + 1):
        slack = tail(h) if tail is not None else tail_bound(gamma, r_max, h)
        for eps in eps_grid:
            checked += 1
            nv, nu_shift = profile_v.count(h, eps), profile_u.count(h, eps + slack)
            if nv > nu_shift:
                violations.append(Prop2Violation(h, float(eps), "v<=u", nv, nu_shift))
            nu_, nv_shift = profile_u.count(h, eps), profile_v.count(h, eps + slack)
            if nu_ > nv_shift:
                violations.append(Prop2Violation(h, float(eps), "u<=v", nu_, nv_shift))
    if violations:
        logger.warning("proposition-2 check: %d violations, first %s", len(violations), violations[0])
    return Prop2Report(checked=checked, violations=tuple(violations))


def fit_kappa(profile: CountProfile | Sequence[int], C: float) -> float:
    """
    Smallest kappa >= 1 with N_h <= C kappa^h for h = 1..H, i.e.
    max_h (N_h / C)^(1/h) clipped at 1.
    """
    if C <= 1:
        raise ValueError(f"C must be > 1, got {C}.")
    counts = profile.near_optimal if isinstance(profile, CountProfile) else list(profile)
    kappa = 1.0
    for h in range(1, len(counts)):
        if counts[h] > 0:
            kappa = max(kappa, (counts[h] / C) ** (1.0 / h))
    return kappa
