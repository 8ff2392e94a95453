from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from pydantic import BaseModel, ConfigDict

from ..planning.tree import ActionSeq


class TraceEvent(BaseModel):
    """One planner decision, for offline extraction of the deepest-opened-depth diagnostics."""
    model_config = ConfigDict(frozen=True)

    stage: str  # init | explore | cross_validate | candidate | output
    h: int
    p: int | None = None
    node: list[int]
    m: int = 0
    u_hat: float | None = None


def write_trace(events: Iterable[TraceEvent], path: str | Path) -> Path:
    p = Path(path)
    with p.open("w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(ev.model_dump_json() + "\n")
    return p


@dataclass(frozen=True)
class PlannerResult:
    planner: str
    first_action: int
    chosen_sequence: ActionSeq
    chosen_value: float
    budget_used: int
    budget_limit: int
    max_opened_depth: int
    candidates: dict[int, ActionSeq] = field(default_factory=dict)
    root_estimates: dict[int, float] = field(default_factory=dict)
    trace: tuple[TraceEvent, ...] = ()

    def __post_init__(self):
        if not self.chosen_sequence or self.chosen_sequence[0] != self.first_action:
            raise ValueError("first_action must be the first element of chosen_sequence.")

    def decisions(self) -> list[tuple[str, int, int | None, tuple[int, ...], int]]:
        """Trace without the estimates: what was opened / evaluated, in order."""
        return [(e.stage, e.h, e.p, tuple(e.node), e.m) for e in self.trace]
