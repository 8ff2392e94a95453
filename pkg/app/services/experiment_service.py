"""
Experiment orchestration: environments from configs, single runs, receding
horizon rollouts, sweeps and diagnostics, plus record output.
"""
import csv
import dataclasses
import functools
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from ..environments import NoiseModel, ToyMDP, build_synthetic_tree, load_synthetic_tree
from ..environments.base import GenerativeModel
from ..environments.synthetic import SyntheticTree
from ..errors import ConfigError, PlanningError
from ..oracle import (
    OracleTable,
    brute_force_values,
    check_prop2,
    concentration_coverage,
    count_near_optimal,
    fit_kappa,
    oracle_horizon,
    simple_regret,
)
from ..planners import PlannerOptions, PlannerResult, plan, platypoos_schedule, write_trace
from ..schemas import (
    CSV_COLUMNS,
    DiagnoseConfig,
    DiagnoseReport,
    EnvConfig,
    ExperimentConfig,
    RunRecord,
)
from ..settings import settings
from ..utils import derive_seed, format_number, make_rng, parse_flat_config

logger = logging.getLogger(__name__)


# --- config -------------------------------------------------------------------

def _line_for(key: str, lines: dict[str, int]) -> int | None:
    parts = key.split(".")
    while parts:
        k = ".".join(parts)
        if k in lines:
            return lines[k]
        hits = [n for name, n in lines.items() if name.startswith(k + ".")]
        if hits:
            return min(hits)
        parts.pop()
    return None


def parse_config(text: str) -> ExperimentConfig:
    lines: dict[str, int] = {}
    data = parse_flat_config(text, lines)
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        key = ".".join(str(p) for p in err["loc"])
        msg = err["msg"].removeprefix("Value error, ")
        raise ConfigError(msg, line=_line_for(key, lines), key=key or None) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return parse_config(text)


def with_seed(cfg: ExperimentConfig, seed: int | None) -> ExperimentConfig:
    if seed is None:
        return cfg
    return cfg.model_copy(update={"seeds": cfg.seeds.model_copy(update={"master": seed})})


# --- environments ---------------------------------------------------------------

@functools.lru_cache(maxsize=16)
def _synthetic_base(k: int, depth: int, nu: float, rho: float, gamma: float, kappa: float,
                    tree_seed: int, r_max: float, gap: float | None) -> SyntheticTree:
    return build_synthetic_tree(k, depth, nu, rho, gamma, kappa, tree_seed, r_max=r_max, gap=gap)


def synthetic_defaults(env_cfg: EnvConfig) -> tuple[float, float]:
    """(nu, rho) with rho = gamma and nu = R_max / (1 - rho) when unset."""
    rho = env_cfg.gamma if env_cfg.rho is None else env_cfg.rho
    nu = env_cfg.reward_range / (1.0 - rho) if env_cfg.nu is None else env_cfg.nu
    return nu, rho


def build_env(env_cfg: EnvConfig, *, b: float | None = None, noiseless: bool = False) -> GenerativeModel:
    b = env_cfg.b if b is None else b
    noise = NoiseModel() if noiseless else NoiseModel(env_cfg.noise, b)
    scale = env_cfg.scale

    if env_cfg.id == "toy":
        return ToyMDP(gamma=env_cfg.gamma, noise=noise, shift=env_cfg.reward_shift,
                      r_max=env_cfg.reward_range * scale, scale=scale, access=env_cfg.access)

    if env_cfg.fixture:
        tree = load_synthetic_tree(env_cfg.fixture)
    else:
        nu, rho = synthetic_defaults(env_cfg)
        tree = _synthetic_base(env_cfg.k, env_cfg.depth, nu, rho, env_cfg.gamma, env_cfg.kappa,
                               env_cfg.tree_seed, env_cfg.reward_range, env_cfg.gap)
    return dataclasses.replace(tree, noise=noise, access=env_cfg.access,
                               scale=scale, r_max=tree.r_max * scale)


def analysis_env(env_cfg: EnvConfig) -> GenerativeModel:
    """Noise-free copy with the reward shift removed, for the oracle."""
    env = build_env(env_cfg, noiseless=True)
    if isinstance(env, ToyMDP):
        env = dataclasses.replace(env, shift=0.0)
    return env


@functools.lru_cache(maxsize=16)
def _oracle_cached(env_json: str) -> OracleTable:
    env_cfg = EnvConfig.model_validate_json(env_json)
    # tolerance follows the reward scale so scaled instances truncate at the same depth
    return brute_force_values(analysis_env(env_cfg), tol=settings.ORACLE_TOL * env_cfg.scale)


def oracle_for(env_cfg: EnvConfig) -> OracleTable:
    return _oracle_cached(env_cfg.model_dump_json(exclude={"noise", "b", "access"}))


# --- runs -----------------------------------------------------------------------

def planner_options(cfg: ExperimentConfig) -> PlannerOptions:
    return PlannerOptions(b_tilde=cfg.planner.btilde, r_max_tilde=cfg.planner.rmaxtilde,
                          horizon=cfg.planner.horizon, fill_budget=cfg.planner.fill_budget)


def _base_record(cfg: ExperimentConfig, seed: int, *, echo: bool) -> dict:
    return dict(
        planner=cfg.planner.id,
        env=cfg.env.id,
        seed=seed,
        n=cfg.budget,
        gamma=cfg.env.gamma,
        noise_kind=cfg.env.noise.value,
        b=cfg.env.b,
        btilde=cfg.planner.btilde,
        rmaxtilde=cfg.planner.rmaxtilde,
        config=cfg.model_dump(mode="json", exclude={"sweep", "diagnose"}) if echo else None,
    )


def _elapsed_ms(cfg: ExperimentConfig, t0: float) -> float | None:
    if not cfg.output.timing:
        return None
    return round((time.perf_counter() - t0) * 1000.0, 3)


def _save_trace(cfg: ExperimentConfig, result: PlannerResult, seed: int, tag: str) -> None:
    if cfg.output.trace and settings.TRACE_DIR:
        out = Path(settings.TRACE_DIR)
        out.mkdir(parents=True, exist_ok=True)
        write_trace(result.trace, out / f"{result.planner}-{tag}-{seed}.jsonl")


def run_once(cfg: ExperimentConfig, *, spawn_key: tuple[int, ...] = (0, 0, 0),
             echo: bool = True) -> RunRecord:
    seed = derive_seed(cfg.seeds.master, *spawn_key)
    env = build_env(cfg.env)
    rng = make_rng(cfg.seeds.master, *spawn_key)

    t0 = time.perf_counter()
    result = plan(cfg.planner.id, env, cfg.budget, rng=rng, trace=cfg.output.trace,
                  options=planner_options(cfg))
    wallclock = _elapsed_ms(cfg, t0)
    _save_trace(cfg, result, seed, "run")

    regret = simple_regret(oracle_for(cfg.env), result.first_action)
    logger.info("run %s env=%s n=%d seed=%d action=%d regret=%.6g", cfg.planner.id, cfg.env.id,
                cfg.budget, seed, result.first_action, regret)
    return RunRecord(
        **_base_record(cfg, seed, echo=echo),
        regret=regret,
        budget_used=result.budget_used,
        max_depth=result.max_opened_depth,
        wallclock_ms=wallclock,
        recommended_action=result.first_action,
        chosen_sequence=list(result.chosen_sequence),
    )


def rollout(cfg: ExperimentConfig, *, spawn_key: tuple[int, ...] = (0, 0, 0),
            echo: bool = True) -> RunRecord:
    """
    Plans from the current state, executes the first recommended action and
    repeats for `rollout.steps` steps. Executed actions draw their reward from
    the environment (a stream separate from the planner's), and the return is
    the discounted sum of those rewards minus the reward shift.
    """
    seed = derive_seed(cfg.seeds.master, *spawn_key)
    env = build_env(cfg.env)
    rng = make_rng(cfg.seeds.master, *spawn_key)
    exec_rng = make_rng(cfg.seeds.master, *spawn_key, 1)
    options = planner_options(cfg)

    t0 = time.perf_counter()
    state = env.root_state
    total = 0.0
    actions: list[int] = []
    budget_used, max_depth = 0, -1
    for t in range(cfg.rollout.steps):
        result = plan(cfg.planner.id, env.with_root(state), cfg.budget, rng=rng, options=options)
        a = result.first_action
        state, reward = env.step(state, a, exec_rng)
        total += env.gamma ** t * (reward - env.reward_shift)
        actions.append(a)
        budget_used = max(budget_used, result.budget_used)
        max_depth = max(max_depth, result.max_opened_depth)

    logger.info("rollout %s env=%s n=%d seed=%d steps=%d return=%.6g", cfg.planner.id,
                cfg.env.id, cfg.budget, seed, cfg.rollout.steps, total)
    return RunRecord(
        **_base_record(cfg, seed, echo=echo),
        shifted_return=total,
        budget_used=budget_used if actions else None,
        max_depth=max_depth if actions else None,
        wallclock_ms=_elapsed_ms(cfg, t0),
        recommended_action=actions[0] if actions else None,
        actions=actions,
    )


# --- sweeps ---------------------------------------------------------------------

def _error_text(exc: Exception) -> str:
    return "; ".join(line.strip() for line in str(exc).splitlines() if line.strip())


def _run_cell(base: dict, planner: str, n: int, b: float, btilde, rmaxtilde,
              key: tuple[int, int, int], mode: str) -> RunRecord:
    data = {**base}
    data["env"] = {**base["env"], "b": b}
    data["planner"] = {**base["planner"], "id": planner, "btilde": btilde, "rmaxtilde": rmaxtilde}
    data["budget"] = n
    try:
        cell = ExperimentConfig.model_validate(data)
        if mode == "rollout":
            return rollout(cell, spawn_key=key, echo=False)
        return run_once(cell, spawn_key=key, echo=False)
    except (PlanningError, ValueError) as exc:
        text = _error_text(exc)
        logger.warning("sweep cell %s n=%d b=%g key=%s failed: %s", planner, n, b, key, text)
        return RunRecord(
            planner=planner,
            env=base["env"]["id"],
            seed=derive_seed(base["seeds"]["master"], *key),
            n=n,
            gamma=base["env"]["gamma"],
            noise_kind=str(base["env"]["noise"]),
            b=b,
            btilde=btilde,
            rmaxtilde=rmaxtilde,
            error=text,
        )


def sweep_cells(cfg: ExperimentConfig) -> list[tuple]:
    """
    Every (planner, budget, noise, b̃, R̃_max, replication) cell, in output
    order. The RNG key is (budget index, noise index, replication) so all
    planners and every b̃ see the same stream for the same cell.
    """
    if cfg.sweep is None:
        raise ConfigError("a sweep needs a [sweep] section", key="sweep")
    sw = cfg.sweep
    budgets = sw.budgets or [cfg.budget]
    noises = sw.noise or [cfg.env.b]
    btildes = sw.btilde or [cfg.planner.btilde]
    rmaxes = sw.rmaxtilde or [cfg.planner.rmaxtilde]

    base = cfg.model_dump(mode="json", exclude={"sweep", "diagnose"})
    cells = []
    for planner in sw.planners:
        for bi, n in enumerate(budgets):
            for ni, b in enumerate(noises):
                for bt in btildes:
                    btilde = b if bt == "match" else bt
                    for rm in rmaxes:
                        for rep in range(cfg.seeds.replications):
                            cells.append((base, planner, n, b, btilde, rm, (bi, ni, rep), sw.mode))
    return cells


def sweep(cfg: ExperimentConfig, *, jobs: int | None = None) -> list[RunRecord]:
    cells = sweep_cells(cfg)
    jobs = settings.SWEEP_JOBS if jobs is None else jobs
    logger.info("sweep: %d cells, %d job(s)", len(cells), jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_cell, *zip(*cells)))
    return [_run_cell(*c) for c in cells]


# --- output ---------------------------------------------------------------------

def records_to_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS + ["error"], lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: format_number(v) for k, v in rec.csv_row().items()})
    return buf.getvalue()


def records_to_json(records: list[RunRecord]) -> str:
    return "".join(rec.model_dump_json() + "\n" for rec in records)


def write_records(records: list[RunRecord], fmt: str, path: str | Path | None = None) -> str:
    text = records_to_csv(records) if fmt == "csv" else records_to_json(records)
    if path:
        Path(path).write_text(text, encoding="utf-8")
    return text


# --- diagnostics ----------------------------------------------------------------

def diagnose_defaults(env_cfg: EnvConfig, env: GenerativeModel, dg: DiagnoseConfig) -> tuple[float, float]:
    if isinstance(env, SyntheticTree):
        nu = env.nu * env.scale if dg.nu is None else dg.nu
        rho = env.rho if dg.rho is None else dg.rho
    else:
        rho = env_cfg.gamma if dg.rho is None else dg.rho
        nu = env.r_max / (1.0 - env_cfg.gamma) if dg.nu is None else dg.nu
    return nu, rho


def diagnose(cfg: ExperimentConfig, *, jobs: int = 1) -> tuple[DiagnoseReport, OracleTable]:
    dg = cfg.diagnose or DiagnoseConfig()
    env = analysis_env(cfg.env)
    gamma = cfg.env.gamma
    nu, rho = diagnose_defaults(cfg.env, env, dg)

    tol = dg.tol if dg.tol is not None else settings.ORACLE_TOL * cfg.env.scale
    H = max(dg.depth, oracle_horizon(env, tol, gamma))
    oracle = brute_force_values(env, H, tol)

    count_u = count_near_optimal(env, oracle, dg.depth, nu, rho, "u")
    count_v = count_near_optimal(env, oracle, dg.depth, nu, rho, "v")
    widest = max(max(g) for g in count_u.gaps)
    grid = tuple(float(e) for e in np.linspace(0.0, widest, dg.eps_points))
    count_u = dataclasses.replace(count_u, eps_grid=grid)
    count_v = dataclasses.replace(count_v, eps_grid=grid)
    prop2 = check_prop2(count_u, count_v, gamma, env.r_max, grid,
                        tail=lambda h: env.value_tail(gamma, h))

    coverage = None
    if dg.replications > 0:
        schedule = platypoos_schedule(dg.coverage_budget, gamma)
        coverage = concentration_coverage(build_env(cfg.env), schedule, dg.delta, dg.replications,
                                          seed=cfg.seeds.master, jobs=jobs).to_dict()

    expected = None
    if isinstance(env, SyntheticTree) and env.near_optimal_counts:
        expected = list(env.near_optimal_counts[: dg.depth + 1])

    first = prop2.first_violation
    report = DiagnoseReport(
        env=cfg.env.model_dump(mode="json"),
        depth=dg.depth,
        nu=nu,
        rho=rho,
        c=dg.c,
        v_star=oracle.v_star,
        oracle_horizon=oracle.horizon,
        tail=oracle.tail,
        count_u=count_u.to_dict(),
        count_v=count_v.to_dict(),
        kappa_u=fit_kappa(count_u, dg.c),
        kappa_v=fit_kappa(count_v, dg.c),
        expected_counts=expected,
        prop2_verdict=prop2.verdict,
        prop2_checked=prop2.checked,
        prop2_first_violation=dataclasses.asdict(first) if first else None,
        coverage=coverage,
    )
    logger.info("diagnose env=%s depth=%d kappa_u=%.4g kappa_v=%.4g prop2=%s", cfg.env.id,
                dg.depth, report.kappa_u, report.kappa_v, report.prop2_verdict)
    return report, oracle
