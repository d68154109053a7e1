"""Versioned evaluation records, JSONL persistence with resume, and re-grading."""

from __future__ import annotations

import json
import threading
from collections.abc import Iterable
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from planeval.agents.parsing import labels_to_order, parse_answer
from planeval.course.io import InstanceRecord
from planeval.course.model import AssignmentPlan
from planeval.course.tasks import grade_course_solution
from planeval.errors import SchemaVersionError
from planeval.eval_core import Role, grade_ranking, grade_verdict
from planeval.fitness.env import metrics_from_transcript

SCHEMA_VERSION = "planeval.record/1"


@dataclass
class EvalRecord:
    config_hash: str
    environment: str
    role: str
    mode: str
    agent: str
    condition: str
    instance_id: str
    seed: int
    order_index: int
    transcript: dict[str, Any]
    ground_truth: dict[str, Any]
    outcome: dict[str, Any]
    error: str | None = None
    wall_time: float | None = None
    timestamp: str | None = None
    schema_version: str = SCHEMA_VERSION
    extra: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> EvalRecord:
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaVersionError(f"unsupported record schema {version!r}; expected {SCHEMA_VERSION!r}")
        return cls(**d)


# -- grading ------------------------------------------------------------------------


def solver_plan_from_answer(value: Any) -> AssignmentPlan | None:
    """Nested course -> section -> room mapping, or None if the shape is wrong."""
    if not isinstance(value, dict):
        return None
    if not all(isinstance(v, dict) and all(isinstance(r, str) for r in v.values()) for v in value.values()):
        return None
    return AssignmentPlan.from_nested(value)


def grade(role: str, environment: str, transcript: dict[str, Any], ground_truth: dict[str, Any]) -> dict[str, Any]:
    """Outcome for one record from its transcript and ground truth alone."""
    role = Role(role)
    if role is Role.SOLVER and environment == "fitness":
        rows = transcript["iterations"]
        m = metrics_from_transcript(rows, ground_truth["k"], ground_truth["cost_utility_fraction"])
        return m.to_dict()
    parsed = parse_answer(role, _final_reply(transcript))
    if role is Role.HEURISTIC:
        order = labels_to_order(parsed.value, len(ground_truth["oracle_order"])) if parsed.ok else None
        result = grade_ranking(order, ground_truth["oracle_order"]).to_dict()
        result["parse_errors"] = parsed.errors
        return result
    if role is Role.VERIFIER:
        out = grade_verdict(parsed.value if parsed.ok else None, ground_truth)
        out["malformed"] = not parsed.ok
        return out
    plan = solver_plan_from_answer(parsed.value) if parsed.ok else None
    record = InstanceRecord.from_json(ground_truth["instance"])
    out = grade_course_solution(plan, record, ground_truth["delta"])
    out["delivered"] = plan is not None
    return out


def _final_reply(transcript: dict[str, Any]) -> str:
    for m in reversed(transcript.get("messages", [])):
        if m.get("speaker") == "agent":
            return m.get("text", "")
    return ""


def regrade(record: EvalRecord) -> dict[str, Any]:
    return grade(record.role, record.environment, record.transcript, record.ground_truth)


# -- JSONL ------------------------------------------------------------------------


def _repair_tail(path: Path) -> None:
    """Drop a partial final line left by an interrupted write."""
    with open(path, "rb+") as fh:
        data = fh.read()
        if not data or data.endswith(b"\n"):
            return
        cut = data.rfind(b"\n") + 1
        fh.truncate(cut)


def recorded_ids(path: str | Path, config_hash: str | None = None) -> set[str]:
    """Instance ids already in ``path``, optionally only those written under ``config_hash``."""
    path = Path(path)
    if not path.exists():
        return set()
    _repair_tail(path)
    return {
        r.instance_id for r in load_records([path]) if config_hash is None or r.config_hash == config_hash
    }


class JsonlWriter:
    """Single serialized sink; each record is flushed as one complete line."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            _repair_tail(self.path)
        self._fh = open(self.path, "a", encoding="utf-8")
        self._lock = threading.Lock()

    def write(self, record: EvalRecord) -> None:
        line = record.to_json() + "\n"
        with self._lock:
            self._fh.write(line)
            self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> JsonlWriter:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def load_records(paths: Iterable[str | Path]) -> list[EvalRecord]:
    out = []
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    d = json.loads(line)
                except ValueError as exc:
                    raise ValueError(f"{p}:{lineno}: not valid JSON ({exc})") from None
                out.append(EvalRecord.from_dict(d))
    return out
