"""
Empirical check of the concentration event: after a full PlaTγPOOS run,
every sequence meeting the p-level sample thresholds should satisfy

    |û(a) - u(a)| <= b sqrt(p_max log(4n/delta) / 2^(p+1))

with probability at least 1 - delta.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ..environments.base import GenerativeModel
from ..planners.platypoos import Platypoos, PlatypoosSchedule, eligibility_threshold
from ..utils import make_rng

logger = logging.getLogger(__name__)

# fewest replications a coverage rate is reported for
MIN_REPLICATIONS = 1000


def confidence_radius(b: float, schedule: PlatypoosSchedule, delta: float, p: int) -> float:
    # p_max is 0 for small n; the radius is kept non-degenerate with max(p_max, 1)
    return b * math.sqrt(max(schedule.p_max, 1) * math.log(4.0 * schedule.n / delta) / 2 ** (p + 1))


@dataclass(frozen=True)
class CoverageReport:
    replications: int
    violations: int
    delta: float
    radii: dict[int, float]

    @property
    def violation_rate(self) -> float:
        return self.violations / self.replications

    @property
    def sigma(self) -> float:
        """Binomial standard deviation of the rate at level delta."""
        d = min(max(self.delta, 0.0), 1.0)
        return math.sqrt(d * (1.0 - d) / self.replications)

    @property
    def within_bound(self) -> bool:
        return self.violation_rate <= self.delta + 3.0 * self.sigma

    def to_dict(self) -> dict:
        return {
            "replications": self.replications,
            "violations": self.violations,
            "violation_rate": self.violation_rate,
            "delta": self.delta,
            "sigma": self.sigma,
            "within_bound": self.within_bound,
            "radii": {str(p): r for p, r in sorted(self.radii.items())},
        }


def _largest_eligible_p(counts: list[int], p_max: int, gamma: float) -> int:
    """counts[t-1] is T of the depth-t edge; -1 when no p qualifies."""
    for p in range(p_max, -1, -1):
        if all(counts[t - 1] >= eligibility_threshold(t, p, gamma) for t in range(2, len(counts) + 1)):
            return p
    return -1


def replication_violated(env: GenerativeModel, schedule: PlatypoosSchedule, delta: float,
                         seed: int, rep: int) -> bool:
    planner = Platypoos(env, schedule.n, schedule.gamma, rng=make_rng(seed, rep))
    planner.run()
    tree = planner.tree
    b = env.noise.b
    for seq in tree.sampled_nodes():
        counts = [tree.node(seq[:t]).stats.count for t in range(1, len(seq) + 1)]
        p = _largest_eligible_p(counts, schedule.p_max, schedule.gamma)
        if p < 0:
            continue
        u = tree.u_value(seq)
        slack = 1e-9 * max(1.0, abs(u))
        if abs(tree.u_hat(seq) - u) > confidence_radius(b, schedule, delta, p) + slack:
            return True
    return False


def concentration_coverage(env: GenerativeModel, schedule: PlatypoosSchedule, delta: float,
                           replications: int, *, seed: int = 0, jobs: int = 1) -> CoverageReport:
    if replications < MIN_REPLICATIONS:
        raise ValueError(f"replications must be >= {MIN_REPLICATIONS}, got {replications}.")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must be in (0, 1], got {delta}.")

    args = [(env, schedule, delta, seed, rep) for rep in range(replications)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            flags = list(pool.map(replication_violated, *zip(*args)))
    else:
        flags = [replication_violated(*a) for a in args]

    report = CoverageReport(
        replications=replications,
        violations=sum(flags),
        delta=delta,
        radii={p: confidence_radius(env.noise.b, schedule, delta, p) for p in range(schedule.p_max + 1)},
    )
    logger.info("coverage: %d/%d replications violated (delta=%.3g)",
                report.violations, replications, delta)
    return report
