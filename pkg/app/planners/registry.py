from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..environments.base import GenerativeModel
from ..errors import InvalidConfig
from .olop import run_olop
from .platypoos import run_platypoos
from .result import PlannerResult
from .sequool import run_sequool, run_sequool_reset
from .uniform import run_uniform_good, run_uniform_naive


@dataclass(frozen=True)
class PlannerOptions:
    """Planner-specific knobs. Only OLOP reads b̃ / R̃_max, only uniform planners read horizon, only PlaTγPOOS reads fill_budget."""
    b_tilde: float | None = None
    r_max_tilde: float | None = None
    horizon: int | None = None
    fill_budget: bool = False


PlannerFn = Callable[..., PlannerResult]


def _platypoos(env, n, gamma, *, rng, trace, options):
    return run_platypoos(env, n, gamma, rng=rng, trace=trace, fill_budget=options.fill_budget)


def _sequool(env, n, gamma, *, rng, trace, options):
    return run_sequool(env, n, gamma, rng=rng, trace=trace)


def _sequool_reset(env, n, gamma, *, rng, trace, options):
    return run_sequool_reset(env, n, gamma, rng=rng, trace=trace)


def _olop(env, n, gamma, *, rng, trace, options):
    return run_olop(env, n, gamma, b_tilde=options.b_tilde, r_max_tilde=options.r_max_tilde,
                    rng=rng, trace=trace)


def _uniform(fn):
    def call(env, n, gamma, *, rng, trace, options):
        if options.horizon is None:
            raise InvalidConfig("uniform planners require a horizon.")
        return fn(env, n, options.horizon, gamma, rng=rng, trace=trace)
    return call


PLANNERS: dict[str, PlannerFn] = {
    "platypoos": _platypoos,
    "sequool": _sequool,
    "sequool_reset": _sequool_reset,
    "olop": _olop,
    "uniform_naive": _uniform(run_uniform_naive),
    "uniform_good": _uniform(run_uniform_good),
}


def planner_ids() -> list[str]:
    return sorted(PLANNERS)


def get_planner(planner_id: str) -> PlannerFn:
    try:
        return PLANNERS[planner_id]
    except KeyError:
        raise InvalidConfig(
            f"unknown planner '{planner_id}'; valid ids: {', '.join(planner_ids())}.") from None


def plan(planner_id: str, env: GenerativeModel, n: int, gamma: float | None = None, *,
         rng: np.random.Generator, trace: bool = False,
         options: PlannerOptions | None = None) -> PlannerResult:
    fn = get_planner(planner_id)
    return fn(env, n, gamma, rng=rng, trace=trace, options=options or PlannerOptions())
