from .olop import OlopConfig, olop_config, run_olop
from .platypoos import Platypoos, PlatypoosSchedule, ScheduleEntry, platypoos_schedule, run_platypoos
from .registry import PLANNERS, PlannerOptions, get_planner, plan, planner_ids
from .result import PlannerResult, TraceEvent, write_trace
from .sequool import run_sequool, run_sequool_reset, sequool_h_max, sequool_quota
from .uniform import run_uniform_good, run_uniform_naive

__all__ = [
    "PLANNERS",
    "OlopConfig",
    "PlannerOptions",
    "PlannerResult",
    "Platypoos",
    "PlatypoosSchedule",
    "ScheduleEntry",
    "TraceEvent",
    "get_planner",
    "olop_config",
    "plan",
    "planner_ids",
    "platypoos_schedule",
    "run_olop",
    "run_platypoos",
    "run_sequool",
    "run_sequool_reset",
    "run_uniform_good",
    "run_uniform_naive",
    "sequool_h_max",
    "sequool_quota",
    "write_trace",
]
