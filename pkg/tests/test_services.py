import json

import pytest

from app.db import init_db
from app.environments import ToyMDP, path_value
from app.errors import ConfigError
from app.schemas import CSV_COLUMNS, ExperimentConfig
from app.services import experiment_service as svc
from app.services import run_log_service
from app.utils import make_rng

TOY_RUN = """
# toy MDP, one run
env.id = toy
env.gamma = 0.95
planner.id = platypoos
budget = 500
seeds.master = 42
output.timing = false
"""

SWEEP = """
env.id = toy
env.noise = uniform
planner.id = platypoos
seeds.master = 7
seeds.replications = 2
output.timing = false
sweep.planners = platypoos, olop
sweep.budgets = 300, 600
sweep.noise = 0, 5
sweep.btilde = match
sweep.rmaxtilde = 130
"""

SPARSE_TREE = """
env.id = synthetic
env.k = 2
env.depth = 6
env.gamma = 0.5
env.nu = 2
env.rho = 0.5
env.kappa = 1
env.tree_seed = 7
diagnose.depth = 4
diagnose.replications = 1000
"""


# --- config ---------------------------------------------------------------------

def test_parse_config():
    cfg = svc.parse_config(TOY_RUN)
    assert cfg.env.gamma == 0.95
    assert cfg.budget == 500
    assert cfg.seeds.master == 42
    assert cfg.output.timing is False


def test_parse_lists():
    cfg = svc.parse_config(SWEEP)
    assert cfg.sweep.planners == ["platypoos", "olop"]
    assert cfg.sweep.budgets == [300, 600]
    assert cfg.sweep.btilde == ["match"]
    assert cfg.sweep.rmaxtilde == [130.0]


def test_unknown_planner_error_has_line_and_key():
    with pytest.raises(ConfigError) as exc:
        svc.parse_config("env.id = toy\nbudget = 10\nplanner.id = uct\n")
    assert exc.value.line == 3
    assert exc.value.key == "planner.id"
    assert "valid ids" in str(exc.value)


def test_olop_requires_ranges():
    with pytest.raises(ConfigError, match="OLOP requires b̃, R̃_max") as exc:
        svc.parse_config("budget = 10\nplanner.id = olop\nplanner.btilde = 1\n")
    assert exc.value.line == 2


@pytest.mark.parametrize("text,line", [
    ("budget 10\n", 1),
    ("budget = 10\nbudget = 20\n", 2),
    ("env.id = toy\nenv.colour = red\n", 2),
    ("env.id = toy\nenv.noise = none\nenv.b = 1\n", 1),
    ("env.id = toy\ndiagnose.replications = 50\n", 2),
])
def test_config_errors(text, line):
    with pytest.raises(ConfigError) as exc:
        svc.parse_config(text)
    assert exc.value.line == line


def test_fill_budget_reaches_the_planner():
    cfg = svc.parse_config("env.id = toy\nplanner.fill_budget = true\nbudget = 2000\n")
    assert svc.planner_options(cfg).fill_budget is True
    assert svc.planner_options(svc.parse_config(TOY_RUN)).fill_budget is False


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        svc.load_config(tmp_path / "nope.conf")


def test_with_seed():
    cfg = svc.with_seed(ExperimentConfig(), 99)
    assert cfg.seeds.master == 99
    assert svc.with_seed(cfg, None) is cfg


# --- environments ---------------------------------------------------------------

def test_analysis_env_drops_shift_and_noise():
    cfg = svc.parse_config("env.id = toy\nenv.b = 5\n")
    env = svc.analysis_env(cfg.env)
    assert env.noise.is_noiseless
    assert env.reward_shift == 0.0
    assert svc.build_env(cfg.env).reward_shift == 100.0


def test_oracle_ignores_noise():
    a = svc.parse_config("env.id = toy\nenv.b = 5\n").env
    b = svc.parse_config("env.id = toy\nenv.b = 0\n").env
    assert svc.oracle_for(a) is svc.oracle_for(b)
    # rewards on the stay path outgrow TOY_R_MAX, so the tail certificate is loose here
    assert svc.oracle_for(a).v_star == pytest.approx(380.0, abs=5e-3)


def test_synthetic_defaults():
    cfg = svc.parse_config("env.id = synthetic\nenv.gamma = 0.8\n")
    nu, rho = svc.synthetic_defaults(cfg.env)
    assert rho == 0.8
    assert nu == pytest.approx(5.0)


# --- runs -----------------------------------------------------------------------

def test_run_is_deterministic():
    cfg = svc.parse_config(TOY_RUN)
    a = svc.run_once(cfg)
    b = svc.run_once(cfg)
    assert a.model_dump_json() == b.model_dump_json()
    assert a.regret >= 0
    assert a.budget_used <= 501
    assert a.wallclock_ms is None
    assert a.config["budget"] == 500


def test_run_regret_scales_with_rewards():
    base = svc.parse_config("env.id = toy\nenv.b = 5\nbudget = 800\n")
    big = svc.parse_config("env.id = toy\nenv.b = 18.5\nenv.scale = 3.7\nbudget = 800\n")
    for rep in range(3):
        a = svc.run_once(base, spawn_key=(0, 0, rep))
        b = svc.run_once(big, spawn_key=(0, 0, rep))
        assert a.recommended_action == b.recommended_action
        assert b.regret == pytest.approx(3.7 * a.regret, rel=1e-9, abs=1e-9)


def test_rollout_return_is_the_shift_free_path_value():
    cfg = svc.parse_config("env.id = toy\nenv.b = 0\nplanner.id = platypoos\nbudget = 1000\nrollout.steps = 20\n")
    rec = svc.rollout(cfg)
    assert len(rec.actions) == 20
    clean = ToyMDP(gamma=0.95, shift=0.0)
    assert rec.shifted_return == pytest.approx(path_value(clean, rec.actions))
    assert rec.shifted_return < path_value(clean, [0] * 20)


def test_rollout_executes_through_the_noisy_environment():
    cfg = svc.parse_config("env.id = toy\nenv.noise = uniform\nenv.b = 10\nplanner.id = platypoos\n"
                           "budget = 300\nrollout.steps = 8\nseeds.master = 3\n")
    rec = svc.rollout(cfg, spawn_key=(0, 0, 2))
    env = svc.build_env(cfg.env)
    exec_rng = make_rng(3, 0, 0, 2, 1)
    state, expected = env.root_state, 0.0
    for t, a in enumerate(rec.actions):
        state, reward = env.step(state, a, exec_rng)
        expected += 0.95 ** t * (reward - env.reward_shift)
    assert rec.shifted_return == pytest.approx(expected)
    clean = ToyMDP(gamma=0.95, shift=0.0)
    assert rec.shifted_return != pytest.approx(path_value(clean, rec.actions))


def test_rollout_without_steps():
    cfg = svc.parse_config("env.id = toy\nrollout.steps = 0\n")
    rec = svc.rollout(cfg)
    assert rec.shifted_return == 0.0
    assert rec.actions == []
    assert rec.budget_used is None


# --- sweeps ---------------------------------------------------------------------

def test_sweep_cells_order_and_streams():
    cfg = svc.parse_config(SWEEP)
    records = svc.sweep(cfg, jobs=1)
    assert len(records) == 2 * 2 * 2 * 2
    assert [(r.planner, r.n, r.b) for r in records[:4]] == [
        ("platypoos", 300, 0.0), ("platypoos", 300, 0.0),
        ("platypoos", 300, 5.0), ("platypoos", 300, 5.0)]
    olop = [r for r in records if r.planner == "olop"]
    plat = [r for r in records if r.planner == "platypoos"]
    assert [r.seed for r in olop] == [r.seed for r in plat]
    assert all(r.btilde == r.b for r in olop)
    assert all(r.error is None for r in records)


def test_sweep_is_independent_of_jobs():
    cfg = svc.parse_config(SWEEP)
    serial = svc.records_to_csv(svc.sweep(cfg, jobs=1))
    parallel = svc.records_to_csv(svc.sweep(cfg, jobs=2))
    assert serial == parallel


def test_platypoos_ignores_btilde():
    cfg = svc.parse_config(SWEEP.replace("sweep.btilde = match", "sweep.btilde = 1, 10, 100")
                           .replace("sweep.planners = platypoos, olop", "sweep.planners = platypoos"))
    records = svc.sweep(cfg, jobs=1)
    by_cell: dict = {}
    for r in records:
        by_cell.setdefault((r.n, r.b, r.seed), set()).add((r.recommended_action, r.regret, r.budget_used))
    assert all(len(v) == 1 for v in by_cell.values())


def test_failed_cells_keep_their_row():
    cfg = svc.parse_config(SWEEP.replace("sweep.budgets = 300, 600", "sweep.budgets = 8, 300"))
    records = svc.sweep(cfg, jobs=1)
    failed = [r for r in records if r.error]
    assert failed
    assert all(r.planner == "platypoos" and r.n == 8 for r in failed)
    assert all(r.regret is None for r in failed)
    assert "h_max=0" in failed[0].error


def test_sweep_needs_a_grid():
    with pytest.raises(ConfigError):
        svc.sweep(svc.parse_config(TOY_RUN))


# --- output ---------------------------------------------------------------------

def test_csv_schema():
    records = [svc.run_once(svc.parse_config(TOY_RUN))]
    text = svc.records_to_csv(records)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS + ["error"])
    assert lines[0] == ("planner,env,seed,n,gamma,noise_kind,b,btilde,rmaxtilde,regret,"
                        "shifted_return,budget_used,max_depth,wallclock_ms,error")
    assert len(lines) == 2
    assert lines[1].startswith("platypoos,toy,")


def test_json_lines(tmp_path):
    records = [svc.run_once(svc.parse_config(TOY_RUN))]
    out = tmp_path / "runs.jsonl"
    svc.write_records(records, "json", out)
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert rows[0]["planner"] == "platypoos"
    assert rows[0]["recommended_action"] == records[0].recommended_action


# --- diagnostics ----------------------------------------------------------------

def test_diagnose_sparse_tree():
    report, oracle = svc.diagnose(svc.parse_config(SPARSE_TREE))
    assert report.prop2_verdict == "pass"
    assert report.count_u["near_optimal"] == report.expected_counts
    assert report.kappa_u == 1.0
    assert report.v_star == pytest.approx(2.0 * (1 - 0.5 ** 6))
    assert report.coverage["violations"] == 0
    assert oracle.horizon >= 4


# --- run log --------------------------------------------------------------------

def test_run_log_and_fixtures(tmp_path):
    _, SessionLocal = init_db(f"sqlite:///{tmp_path}/log.db")
    with SessionLocal() as db:
        first = run_log_service.log_run(db, "run", "platypoos", "success", {"regret": 0.0})
        second = run_log_service.log_run(db, "run", "olop", "error", {"error": "boom"})
        runs = run_log_service.list_runs(db, 10)
        assert [r.id for r in runs] == [second, first]

        run_log_service.store_fixture(db, "tree-7", "counts", {"u": [1, 2]})
        run_log_service.store_fixture(db, "tree-7", "counts", {"u": [1, 3]})
        assert run_log_service.get_fixture(db, "tree-7", "counts").payload == {"u": [1, 3]}
        with pytest.raises(ValueError):
            run_log_service.store_fixture(db, "tree-7", "plots", {})
