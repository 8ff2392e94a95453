from functools import lru_cache
from pathlib import Path

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import DeclarativeBase, sessionmaker


class Base(DeclarativeBase):
    pass


def _sqlite_file(database_url: str) -> Path | None:
    prefix = "sqlite:///"
    if not database_url.startswith(prefix):
        return None
    path = database_url[len(prefix):]
    if not path or path == ":memory:":
        return None
    return Path(path)


@lru_cache(maxsize=None)
def get_engine(database_url: str) -> Engine:
    connect_args = {}
    if database_url.startswith("sqlite"):
        # the API serves requests from a thread pool
        connect_args = {"check_same_thread": False}
        db_file = _sqlite_file(database_url)
        if db_file is not None:
            db_file.parent.mkdir(parents=True, exist_ok=True)
    return create_engine(database_url, echo=False, future=True, connect_args=connect_args)


def get_session_factory(engine: Engine) -> sessionmaker:
    return sessionmaker(bind=engine, autoflush=False, autocommit=False, future=True)


def init_db(database_url: str) -> tuple[Engine, sessionmaker]:
    """Engine + session factory for the run log, tables created on first use."""
    from . import models  # noqa: F401  (registers ExperimentRun / FixtureStore)

    engine = get_engine(database_url)
    Base.metadata.create_all(bind=engine)
    return engine, get_session_factory(engine)
