from sqlalchemy import DateTime, Integer, String, UniqueConstraint, text
from sqlalchemy.orm import Mapped, mapped_column
from sqlalchemy.types import JSON

from .db import Base


class ExperimentRun(Base):
    __tablename__ = "experiment_runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    kind: Mapped[str] = mapped_column(String(20), index=True)  # run|rollout|sweep|diagnose
    planner: Mapped[str] = mapped_column(String(30), default="")
    status: Mapped[str] = mapped_column(String(20))  # success|error
    details: Mapped[dict] = mapped_column(JSON, default=dict)

    created_at: Mapped[object] = mapped_column(
        DateTime(timezone=True),
        server_default=text("CURRENT_TIMESTAMP"),
    )


class FixtureStore(Base):
    """
    Exported synthetic trees, oracle tables and count profiles, by name.
    """
    __tablename__ = "fixtures"
    __table_args__ = (UniqueConstraint("name", "kind", name="uq_fixture_name_kind"),)

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    name: Mapped[str] = mapped_column(String(80), index=True)
    kind: Mapped[str] = mapped_column(String(20))  # tree|oracle|counts
    payload: Mapped[dict] = mapped_column(JSON)

    created_at: Mapped[object] = mapped_column(
        DateTime(timezone=True),
        server_default=text("CURRENT_TIMESTAMP"),
    )
