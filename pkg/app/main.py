"""
HTTP surface for the experiment harness:

- GET  /health
- GET  /meta/planners
- POST /experiments/run
- POST /experiments/rollout
- POST /experiments/sweep
- POST /diagnostics
- GET  /runs
"""

from fastapi import Depends, FastAPI, HTTPException, Query
from sqlalchemy.orm import Session

from .db import init_db
from .errors import PlanningError
from .logs import configure_logging
from .planners import planner_ids
from .schemas import ExperimentConfig
from .services import experiment_service, run_log_service
from .settings import settings


# --- Infra --------------------------------------------------------------------

configure_logging()
engine, SessionLocal = init_db(settings.DATABASE_URL)

app = FastAPI(title=settings.APP_NAME)


def get_db():
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


def _fail(db: Session, kind: str, planner: str, e: Exception, status_code: int):
    run_log_service.log_run(db, kind, planner, "error", {"error": str(e)})
    raise HTTPException(status_code=status_code, detail=str(e)) from e


# --- Basic endpoints ------------------------------------------------------------

@app.get("/health")
def health():
    return {"status": "ok", "env": settings.APP_ENV}


@app.get("/meta/planners")
def meta_planners():
    return {
        "planners": planner_ids(),
        "scale_free": ["platypoos"],
        "noiseless_only": ["sequool", "sequool_reset"],
        "requires": {
            "olop": ["planner.btilde", "planner.rmaxtilde"],
            "uniform_naive": ["planner.horizon"],
            "uniform_good": ["planner.horizon"],
        },
    }


# --- Experiments ---------------------------------------------------------------

@app.post("/experiments/run")
def experiments_run(cfg: ExperimentConfig, db: Session = Depends(get_db)):
    try:
        records = [experiment_service.run_once(cfg, spawn_key=(0, 0, rep))
                   for rep in range(cfg.seeds.replications)]
        data = [r.model_dump(mode="json") for r in records]
        run_log_service.log_run(db, "run", cfg.planner.id, "success", {"records": data})
        return data

    except ValueError as e:
        _fail(db, "run", cfg.planner.id, e, 400)

    except PlanningError as e:
        _fail(db, "run", cfg.planner.id, e, 422)


@app.post("/experiments/rollout")
def experiments_rollout(cfg: ExperimentConfig, db: Session = Depends(get_db)):
    try:
        records = [experiment_service.rollout(cfg, spawn_key=(0, 0, rep))
                   for rep in range(cfg.seeds.replications)]
        data = [r.model_dump(mode="json") for r in records]
        run_log_service.log_run(db, "rollout", cfg.planner.id, "success", {"records": data})
        return data

    except ValueError as e:
        _fail(db, "rollout", cfg.planner.id, e, 400)

    except PlanningError as e:
        _fail(db, "rollout", cfg.planner.id, e, 422)


@app.post("/experiments/sweep")
def experiments_sweep(cfg: ExperimentConfig, db: Session = Depends(get_db)):
    try:
        records = experiment_service.sweep(cfg, jobs=1)
        data = [r.model_dump(mode="json", exclude={"config"}) for r in records]
        failed = sum(1 for r in records if r.error)
        run_log_service.log_run(db, "sweep", ",".join(cfg.sweep.planners), "success",
                                {"rows": len(data), "failed": failed})
        return data

    except ValueError as e:
        _fail(db, "sweep", "", e, 400)

    except PlanningError as e:
        _fail(db, "sweep", "", e, 422)


@app.post("/diagnostics")
def diagnostics(cfg: ExperimentConfig, db: Session = Depends(get_db)):
    try:
        report, _ = experiment_service.diagnose(cfg)
        data = report.model_dump(mode="json")
        run_log_service.log_run(db, "diagnose", "", "success",
                                {"env": cfg.env.id, "prop2": report.prop2_verdict,
                                 "kappa_u": report.kappa_u})
        return data

    except ValueError as e:
        _fail(db, "diagnose", "", e, 400)

    except PlanningError as e:
        _fail(db, "diagnose", "", e, 422)


@app.get("/runs")
def runs(limit: int = Query(50, ge=1, le=500), db: Session = Depends(get_db)):
    return [
        {
            "id": r.id,
            "kind": r.kind,
            "planner": r.planner,
            "status": r.status,
            "details": r.details,
            "created_at": str(r.created_at),
        }
        for r in run_log_service.list_runs(db, limit)
    ]
