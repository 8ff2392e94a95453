from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .environments.base import AccessMode, NoiseKind
from .oracle.concentration import MIN_REPLICATIONS
from .planners.registry import planner_ids
from .settings import settings

CSV_COLUMNS = [
    "planner", "env", "seed", "n", "gamma", "noise_kind", "b", "btilde", "rmaxtilde",
    "regret", "shifted_return", "budget_used", "max_depth", "wallclock_ms",
]

OLOP_IDS = {"olop"}
UNIFORM_IDS = {"uniform_naive", "uniform_good"}


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _as_list(value):
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


class EnvConfig(StrictModel):
    id: Literal["toy", "synthetic"] = "toy"
    gamma: float = Field(0.95, ge=0.0, lt=1.0)
    noise: NoiseKind = NoiseKind.UNIFORM
    b: float = Field(0.0, ge=0.0)
    shift: float | None = None
    r_max: float | None = Field(None, gt=0.0)
    scale: float = Field(1.0, gt=0.0)
    access: AccessMode = AccessMode.CHECKPOINT

    # synthetic trees
    k: int = Field(2, ge=1)
    depth: int = Field(10, ge=1)
    nu: float | None = Field(None, gt=0.0)
    rho: float | None = Field(None, gt=0.0, lt=1.0)
    kappa: float = Field(1.0, ge=1.0)
    tree_seed: int = 0
    gap: float | None = None
    fixture: str | None = None

    @model_validator(mode="after")
    def _check_noise(self):
        if self.noise is NoiseKind.NONE and self.b != 0.0:
            raise ValueError("noise kind 'none' requires b = 0")
        return self

    @property
    def reward_shift(self) -> float:
        if self.id != "toy":
            return 0.0
        return settings.REWARD_SHIFT if self.shift is None else self.shift

    @property
    def reward_range(self) -> float:
        if self.r_max is not None:
            return self.r_max
        return settings.TOY_R_MAX if self.id == "toy" else 1.0


class PlannerConfig(StrictModel):
    id: str = "platypoos"
    btilde: float | None = Field(None, ge=0.0)
    rmaxtilde: float | None = Field(None, gt=0.0)
    horizon: int | None = Field(None, ge=1)
    fill_budget: bool = False

    @field_validator("id")
    @classmethod
    def _known_planner(cls, v: str) -> str:
        if v not in planner_ids():
            raise ValueError(f"unknown planner '{v}'; valid ids: {', '.join(planner_ids())}")
        return v

    @model_validator(mode="after")
    def _check_params(self):
        if self.id in OLOP_IDS and (self.btilde is None or self.rmaxtilde is None):
            raise ValueError("OLOP requires b̃, R̃_max (planner.btilde, planner.rmaxtilde)")
        if self.id in UNIFORM_IDS and self.horizon is None:
            raise ValueError(f"{self.id} requires planner.horizon")
        return self


class SeedConfig(StrictModel):
    master: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0)
    replications: int = Field(1, ge=1)


class RolloutConfig(StrictModel):
    steps: int = Field(20, ge=0)


class OutputConfig(StrictModel):
    path: str | None = None
    format: Literal["csv", "json"] = "json"
    timing: bool = True
    trace: bool = False


class SweepConfig(StrictModel):
    mode: Literal["run", "rollout"] = "run"
    planners: list[str] = ["platypoos"]
    budgets: list[int] = []
    noise: list[float] = []
    btilde: list[float | Literal["match"]] = []
    rmaxtilde: list[float] = []

    @field_validator("planners", "budgets", "noise", "btilde", "rmaxtilde", mode="before")
    @classmethod
    def _listify(cls, v):
        return _as_list(v)

    @field_validator("planners")
    @classmethod
    def _known_planners(cls, v: list[str]) -> list[str]:
        unknown = [p for p in v if p not in planner_ids()]
        if unknown:
            raise ValueError(f"unknown planner(s) {unknown}; valid ids: {', '.join(planner_ids())}")
        return v

    @field_validator("budgets")
    @classmethod
    def _positive_budgets(cls, v: list[int]) -> list[int]:
        if any(n < 1 for n in v):
            raise ValueError("budgets must be >= 1")
        return v

    @field_validator("noise")
    @classmethod
    def _noise_ranges(cls, v: list[float]) -> list[float]:
        if any(b < 0 for b in v):
            raise ValueError("noise ranges must be >= 0")
        return v


class DiagnoseConfig(StrictModel):
    depth: int = Field(6, ge=1)
    nu: float | None = Field(None, gt=0.0)
    rho: float | None = Field(None, gt=0.0, lt=1.0)
    c: float = Field(2.0, gt=1.0)
    eps_points: int = Field(20, ge=1)
    tol: float | None = Field(None, gt=0.0)
    delta: float = Field(0.1, gt=0.0, le=1.0)
    coverage_budget: int = Field(200, ge=1)
    replications: int = Field(0, ge=0)

    @field_validator("replications")
    @classmethod
    def _enough_replications(cls, v: int) -> int:
        if 0 < v < MIN_REPLICATIONS:
            raise ValueError(f"coverage needs 0 or >= {MIN_REPLICATIONS} replications, got {v}")
        return v


class ExperimentConfig(StrictModel):
    env: EnvConfig = Field(default_factory=EnvConfig)
    planner: PlannerConfig = Field(default_factory=PlannerConfig)
    budget: int = Field(1000, ge=1)
    seeds: SeedConfig = Field(default_factory=SeedConfig)
    rollout: RolloutConfig = Field(default_factory=RolloutConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    sweep: SweepConfig | None = None
    diagnose: DiagnoseConfig | None = None


class RunRecord(BaseModel):
    planner: str
    env: str
    seed: int
    n: int
    gamma: float
    noise_kind: str
    b: float
    btilde: float | None = None
    rmaxtilde: float | None = None
    regret: float | None = None
    shifted_return: float | None = None
    budget_used: int | None = None
    max_depth: int | None = None
    wallclock_ms: float | None = None
    error: str | None = None

    recommended_action: int | None = None
    chosen_sequence: list[int] | None = None
    actions: list[int] | None = None
    config: dict[str, Any] | None = None

    @field_validator("regret")
    @classmethod
    def _non_negative(cls, v):
        if v is not None and v < 0:
            raise ValueError("regret must be >= 0")
        return v

    def csv_row(self) -> dict[str, Any]:
        return self.model_dump(include=set(CSV_COLUMNS) | {"error"})


class DiagnoseReport(BaseModel):
    env: dict[str, Any]
    depth: int
    nu: float
    rho: float
    c: float
    v_star: float
    oracle_horizon: int
    tail: float
    count_u: dict[str, Any]
    count_v: dict[str, Any]
    kappa_u: float
    kappa_v: float
    expected_counts: list[int] | None = None
    prop2_verdict: str
    prop2_checked: int
    prop2_first_violation: dict[str, Any] | None = None
    coverage: dict[str, Any] | None = None
