"""
Line-delimited log of every generative call: one record per reward sample.
"""
from pathlib import Path
from typing import Iterable, Sequence

from pydantic import BaseModel

from ..errors import MissingSamples


class SampleRecord(BaseModel):
    sequence: list[int]
    action: int
    reward: float
    stream_index: int


def write_sample_log(records: Iterable[SampleRecord], path: str | Path) -> Path:
    p = Path(path)
    with p.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.model_dump_json() + "\n")
    return p


def read_sample_log(path: str | Path) -> list[SampleRecord]:
    with Path(path).open(encoding="utf-8") as fh:
        return [SampleRecord.model_validate_json(line) for line in fh if line.strip()]


def replay_u_hat(records: Iterable[SampleRecord], actions: Sequence[int], gamma: float) -> float:
    """Recomputes û(a) from raw logged samples, independently of the tree."""
    sums: dict[tuple[int, ...], float] = {}
    counts: dict[tuple[int, ...], int] = {}
    for rec in records:
        edge = tuple(rec.sequence) + (rec.action,)
        sums[edge] = sums.get(edge, 0.0) + rec.reward
        counts[edge] = counts.get(edge, 0) + 1

    total = 0.0
    for t in range(len(actions)):
        edge = tuple(actions[: t + 1])
        if counts.get(edge, 0) == 0:
            raise MissingSamples(edge)
        total += gamma ** t * (sums[edge] / counts[edge])
    return total
