"""Instance files in the course-planning JSON layout.

Top-level keys: ``raw_problem`` (``Class Periods``, ``number_of_seats``,
``Classrooms``), ``text_description``, ``solution`` (per section ``room`` and
``seat_diff``) and ``optimal_score``. Generated files add ``difficulty`` and
``seed``. Loading then saving reproduces the input exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

from planeval.course.model import (
    AssignmentPlan,
    Classroom,
    CourseInstance,
    Difficulty,
    Section,
    TimeSlot,
)


@dataclass(frozen=True)
class InstanceRecord:
    instance: CourseInstance
    solution: AssignmentPlan | None = None
    optimal_score: float | None = None

    def to_json(self) -> dict[str, Any]:
        inst = self.instance
        periods: dict[str, dict[str, str]] = {}
        seats: dict[str, dict[str, int]] = {}
        for s in inst.sections:
            periods.setdefault(s.course_id, {})[s.section_id] = s.slot.to_text()
            seats.setdefault(s.course_id, {})[s.section_id] = s.enrollment
        out: dict[str, Any] = {
            "raw_problem": {
                "Class Periods": periods,
                "number_of_seats": seats,
                "Classrooms": {c.room_id: c.capacity for c in inst.classrooms},
            },
            "text_description": inst.text_description,
        }
        if self.solution is not None:
            sol: dict[str, dict[str, Any]] = {}
            for s in inst.sections:
                room = self.solution.get(s.key)
                if room is None:
                    continue
                sol.setdefault(s.course_id, {})[s.section_id] = {
                    "room": room,
                    "seat_diff": inst.room(room).capacity - s.enrollment,
                }
            out["solution"] = sol
        if self.optimal_score is not None:
            out["optimal_score"] = self.optimal_score
        if inst.difficulty is not None:
            out["difficulty"] = inst.difficulty.value
        if inst.seed is not None:
            out["seed"] = inst.seed
        return out

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> InstanceRecord:
        raw = d["raw_problem"]
        periods = raw["Class Periods"]
        seats = raw["number_of_seats"]
        sections = []
        for course, secs in periods.items():
            for sec, slot_text in secs.items():
                try:
                    enrollment = seats[course][sec]
                except KeyError:
                    raise ValueError(f"no enrollment for {course}/{sec}") from None
                sections.append(Section(course, sec, TimeSlot.parse(slot_text), int(enrollment)))
        rooms = [Classroom(name, int(cap)) for name, cap in raw["Classrooms"].items()]
        diff = d.get("difficulty")
        instance = CourseInstance(
            sections=tuple(sections),
            classrooms=tuple(rooms),
            difficulty=Difficulty(diff) if diff is not None else None,
            text_description=d.get("text_description", ""),
            seed=d.get("seed"),
        )
        solution = None
        if "solution" in d:
            assignments = {}
            for course, secs in d["solution"].items():
                for sec, entry in secs.items():
                    key = (course, sec)
                    section = instance.section(key)
                    room = instance.room(entry["room"])
                    if entry.get("seat_diff") != room.capacity - section.enrollment:
                        raise ValueError(f"seat_diff of {course}/{sec} disagrees with the problem data")
                    assignments[key] = entry["room"]
            solution = AssignmentPlan(assignments)
        return cls(instance, solution, d.get("optimal_score"))


def dumps(record: InstanceRecord) -> str:
    return json.dumps(record.to_json(), indent=4) + "\n"


def save_instance(record: InstanceRecord, path: str | Path) -> None:
    Path(path).write_text(dumps(record), encoding="utf-8")


def load_instance(path: str | Path) -> InstanceRecord:
    return InstanceRecord.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def load_worked_example() -> InstanceRecord:
    """The worked example instance shipped with the package (optimal slack 32)."""
    text = resources.files("planeval.course").joinpath("data").joinpath("worked_example.json").read_text("utf-8")
    return InstanceRecord.from_json(json.loads(text))
