"""Course-scheduling domain types and the textual time-slot format."""

from __future__ import annotations

import ast
import enum
import re
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

DAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday")

_SLOT_RE = re.compile(
    r"^\[(?P<days>[^\]]*)\] at (?P<h1>\d{1,2}):(?P<m1>\d{2})(?P<p1>AM|PM)-(?P<h2>\d{1,2}):(?P<m2>\d{2})(?P<p2>AM|PM)$"
)


class Difficulty(str, enum.Enum):
    EASY = "Easy"
    MEDIUM = "Medium"
    HARD = "Hard"


def _clock(minutes: int) -> str:
    h, m = divmod(minutes, 60)
    suffix = "AM" if h < 12 else "PM"
    h12 = h % 12 or 12
    return f"{h12}:{m:02d}{suffix}"


def _minutes(h: str, m: str, period: str) -> int:
    hour = int(h) % 12 + (12 if period == "PM" else 0)
    return hour * 60 + int(m)


@dataclass(frozen=True)
class TimeSlot:
    """Meeting days (order preserved for rendering) and a half-open [start, end) interval."""

    days: tuple[str, ...]
    start: int
    end: int

    def __post_init__(self):
        object.__setattr__(self, "days", tuple(self.days))
        if not self.days:
            raise ValueError("a time slot needs at least one day")
        for d in self.days:
            if d not in DAYS:
                raise ValueError(f"unknown day {d!r}")
        if not self.start < self.end:
            raise ValueError("slot start must precede its end")

    @property
    def day_set(self) -> frozenset[str]:
        return frozenset(self.days)

    def to_text(self) -> str:
        return f"{list(self.days)!r} at {_clock(self.start)}-{_clock(self.end)}"

    @classmethod
    def parse(cls, text: str) -> TimeSlot:
        m = _SLOT_RE.match(text.strip())
        if not m:
            raise ValueError(f"unrecognised time slot {text!r}")
        days = ast.literal_eval(f"[{m['days']}]")
        return cls(
            days=tuple(days),
            start=_minutes(m["h1"], m["m1"], m["p1"]),
            end=_minutes(m["h2"], m["m2"], m["p2"]),
        )


def slots_overlap(a: TimeSlot, b: TimeSlot) -> bool:
    return bool(a.day_set & b.day_set) and a.start < b.end and b.start < a.end


SectionKey = tuple[str, str]


@dataclass(frozen=True)
class Section:
    course_id: str
    section_id: str
    slot: TimeSlot
    enrollment: int

    def __post_init__(self):
        if self.enrollment < 1:
            raise ValueError("enrollment must be positive")

    @property
    def key(self) -> SectionKey:
        return (self.course_id, self.section_id)

    @property
    def label(self) -> str:
        return f"{self.course_id}/{self.section_id}"


@dataclass(frozen=True)
class Classroom:
    room_id: str
    capacity: int

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be positive")


@dataclass(frozen=True)
class CourseInstance:
    sections: tuple[Section, ...]
    classrooms: tuple[Classroom, ...]
    difficulty: Difficulty | None = None
    text_description: str = ""
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "sections", tuple(self.sections))
        object.__setattr__(self, "classrooms", tuple(self.classrooms))
        keys = [s.key for s in self.sections]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate section")
        rooms = [c.room_id for c in self.classrooms]
        if len(set(rooms)) != len(rooms):
            raise ValueError("duplicate classroom")
        # lookup indexes; not dataclass fields, so equality ignores them
        self.__dict__["_by_key"] = {s.key: s for s in self.sections}
        self.__dict__["_by_room"] = {c.room_id: c for c in self.classrooms}

    def section(self, key: SectionKey) -> Section:
        return self._by_key[key]

    def room(self, room_id: str) -> Classroom:
        return self._by_room[room_id]

    def has_section(self, key: SectionKey) -> bool:
        return key in self._by_key

    def has_room(self, room_id: str) -> bool:
        return room_id in self._by_room

    @property
    def courses(self) -> list[str]:
        seen: list[str] = []
        for s in self.sections:
            if s.course_id not in seen:
                seen.append(s.course_id)
        return seen


@dataclass(frozen=True)
class AssignmentPlan:
    """Partial map from section key to room id; missing keys are unassigned sections."""

    assignments: Mapping[SectionKey, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))

    def __len__(self) -> int:
        return len(self.assignments)

    def __iter__(self) -> Iterator[SectionKey]:
        return iter(self.assignments)

    def get(self, key: SectionKey) -> str | None:
        return self.assignments.get(key)

    def to_nested(self) -> dict[str, dict[str, str]]:
        out: dict[str, dict[str, str]] = {}
        for (course, section), room in self.assignments.items():
            out.setdefault(course, {})[section] = room
        return out

    @classmethod
    def from_nested(cls, d: Mapping[str, Mapping[str, str]]) -> AssignmentPlan:
        return cls({(c, s): room for c, secs in d.items() for s, room in secs.items()})


@dataclass(frozen=True)
class PlanAssessment:
    complete: bool
    feasible: bool
    violations: tuple[str, ...]
    total_slack: int
    occupancy_ratio: float
    threshold_pass: bool

    def to_dict(self) -> dict:
        return {
            "complete": self.complete,
            "feasible": self.feasible,
            "violations": list(self.violations),
            "total_slack": self.total_slack,
            "occupancy_ratio": self.occupancy_ratio,
            "threshold_pass": self.threshold_pass,
        }
