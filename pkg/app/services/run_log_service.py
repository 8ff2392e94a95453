from sqlalchemy import select
from sqlalchemy.orm import Session

from ..models import ExperimentRun, FixtureStore

FIXTURE_KINDS = {"tree", "oracle", "counts"}


def log_run(db: Session, kind: str, planner: str, status: str, details: dict) -> int:
    run = ExperimentRun(kind=kind, planner=planner, status=status, details=details)
    db.add(run)
    db.commit()
    return run.id


def list_runs(db: Session, limit: int = 50) -> list[ExperimentRun]:
    stmt = select(ExperimentRun).order_by(ExperimentRun.id.desc()).limit(limit)
    return list(db.execute(stmt).scalars())


def get_fixture(db: Session, name: str, kind: str) -> FixtureStore | None:
    stmt = select(FixtureStore).where(
        FixtureStore.name == name,
        FixtureStore.kind == kind,
    )
    return db.execute(stmt).scalar_one_or_none()


def store_fixture(db: Session, name: str, kind: str, payload: dict) -> FixtureStore:
    if kind not in FIXTURE_KINDS:
        raise ValueError(f"Invalid fixture kind: {kind}")

    f = get_fixture(db, name, kind)
    if f:
        f.payload = payload
    else:
        f = FixtureStore(name=name, kind=kind, payload=payload)
        db.add(f)

    db.commit()
    return f
