"""Scoring of candidate coordinate sequences against bijective ground truth.

Two complementary criteria: Ordered (index-by-index equality with the ground
truth sequence) and Any-order (coverage of the ground-truth coordinate set
regardless of traversal order).  Per-index evaluation failures count as
mismatches; whole-run failures carry a verdict and force both scores to zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence, Union

from mapforge.geometry import GroundTruth

__all__ = [
    "Status",
    "CandidateVerdict",
    "OK",
    "EvalFailure",
    "BijectivityReport",
    "AccuracyReport",
    "ordered_accuracy",
    "anyorder_accuracy",
    "check_bijective",
    "score_candidate",
    "read_candidate_records",
    "write_candidate_records",
]


class Status(str, Enum):
    OK = "ok"
    NON_COMPILING = "non_compiling"
    RUNTIME_FAILURE = "runtime_failure"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class CandidateVerdict:
    status: Status
    detail: str = ""

    def __post_init__(self) -> None:
        if self.status is not Status.OK and not self.detail:
            raise ValueError(f"{self.status.value} verdict requires a detail message")

    @property
    def ok(self) -> bool:
        return self.status is Status.OK


OK = CandidateVerdict(Status.OK)


@dataclass(frozen=True)
class EvalFailure:
    """Per-index failure record (candidate raised / returned garbage at one index)."""

    message: str


@dataclass(frozen=True)
class BijectivityReport:
    duplicates: int
    omissions: int

    @property
    def bijective(self) -> bool:
        return self.duplicates == 0 and self.omissions == 0


@dataclass(frozen=True)
class AccuracyReport:
    ordered: float
    anyorder: float
    n_evaluated: int
    verdict: CandidateVerdict = OK

    def __post_init__(self) -> None:
        if not (0.0 <= self.ordered <= 1.0 and 0.0 <= self.anyorder <= 1.0):
            raise ValueError("accuracy fractions must lie in [0, 1]")
        if not self.verdict.ok and (self.ordered != 0.0 or self.anyorder != 0.0):
            raise ValueError("a failed run cannot carry nonzero accuracy")


Record = Union[tuple, EvalFailure]


def _require_same_length(candidate: Sequence, gt: GroundTruth) -> None:
    if len(candidate) != gt.count:
        raise ValueError(
            f"candidate has {len(candidate)} records but ground truth has {gt.count}"
        )


def ordered_accuracy(candidate: Sequence[Record], gt: GroundTruth) -> float:
    """Fraction of indices whose record equals the ground-truth coordinate exactly."""
    _require_same_length(candidate, gt)
    matches = sum(1 for got, want in zip(candidate, gt.coords) if got == want)
    return matches / gt.count


def anyorder_accuracy(candidate: Sequence[Record], gt: GroundTruth) -> float:
    """Fraction of distinct ground-truth coordinates produced, at any index."""
    _require_same_length(candidate, gt)
    produced = {rec for rec in candidate if isinstance(rec, tuple)}
    return len(produced & set(gt.coords)) / gt.count


def check_bijective(candidate: Sequence[Record], gt: GroundTruth) -> BijectivityReport:
    _require_same_length(candidate, gt)
    produced = {rec for rec in candidate if isinstance(rec, tuple)}
    duplicates = len(candidate) - len(produced)
    omissions = len(set(gt.coords) - produced)
    return BijectivityReport(duplicates=duplicates, omissions=omissions)


def score_candidate(
    outcome: Union[Sequence[Record], CandidateVerdict], gt: GroundTruth
) -> AccuracyReport:
    """Score a run outcome: a full record sequence, or a failure verdict from the runner."""
    if isinstance(outcome, CandidateVerdict):
        if outcome.ok:
            raise ValueError("an Ok verdict must come with a record sequence")
        return AccuracyReport(0.0, 0.0, n_evaluated=0, verdict=outcome)
    return AccuracyReport(
        ordered=ordered_accuracy(outcome, gt),
        anyorder=anyorder_accuracy(outcome, gt),
        n_evaluated=gt.count,
        verdict=OK,
    )


def write_candidate_records(records: Sequence[Record], path: str | Path) -> None:
    """Same JSON Lines shape as ground truth; failures become {"n": k, "err": msg}."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for n, rec in enumerate(records):
            if isinstance(rec, EvalFailure):
                fh.write(json.dumps({"n": n, "err": rec.message}) + "\n")
            else:
                fh.write(json.dumps({"n": n, "c": list(rec)}) + "\n")


def read_candidate_records(path: str | Path) -> list[Record]:
    records: list[Record] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("n") != len(records):
                raise ValueError(f"{path}: non-contiguous index at line {lineno + 1}")
            if "err" in rec:
                records.append(EvalFailure(str(rec["err"])))
            elif "c" in rec:
                records.append(tuple(rec["c"]))
            else:
                raise ValueError(f"{path}: record without 'c' or 'err' at line {lineno + 1}")
    return records
