"""Seeded generator for course-scheduling instances at three difficulty levels."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from planeval.course.io import InstanceRecord
from planeval.course.model import (
    DAYS,
    Classroom,
    CourseInstance,
    Difficulty,
    Section,
    TimeSlot,
)
from planeval.course.solver import solve_exact
from planeval.errors import GenerationExhausted, Unsatisfiable

PERIOD_STARTS = (8 * 60 + 30, 10 * 60, 11 * 60 + 30, 13 * 60, 14 * 60 + 30, 16 * 60, 17 * 60 + 30)
PERIOD_MINUTES = 75


@dataclass(frozen=True)
class GeneratorParams:
    """Sampling distributions for one difficulty level.

    Integer ranges are inclusive. ``classroom_weights`` and
    ``enrollment_weights`` optionally replace the uniform draw over their range
    with relative weights, one per value in order.
    """

    n_courses: int
    sections_per_course: tuple[int, int] = (2, 3)
    enrollment: tuple[int, int] = (20, 30)
    classrooms: tuple[int, int] = (3, 6)
    capacity: tuple[int, int] = (25, 34)
    classroom_weights: tuple[float, ...] | None = None
    enrollment_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        for bounds, weights in (
            (self.classrooms, self.classroom_weights),
            (self.enrollment, self.enrollment_weights),
        ):
            if weights is not None and len(weights) != bounds[1] - bounds[0] + 1:
                raise ValueError("one weight per value in the range is required")


# Room-count weights are set so that, after unsolvable draws are rejected, the
# mean room count and mean sections-per-room land on 4.03/3.39, 4.53/4.03 and
# 4.97/5.02. Rejection favours more and larger rooms, hence capacity tops out at
# 34 and 30-student sections are slightly rarer.
_ENROLLMENT_WEIGHTS = (1.0,) * 10 + (0.85,)
DIFFICULTY_PARAMS = {
    Difficulty.EASY: GeneratorParams(
        n_courses=5, classroom_weights=(0.61, 0.13, 0.08, 0.18), enrollment_weights=_ENROLLMENT_WEIGHTS
    ),
    Difficulty.MEDIUM: GeneratorParams(
        n_courses=7, classroom_weights=(0.40, 0.22, 0.20, 0.18), enrollment_weights=_ENROLLMENT_WEIGHTS
    ),
    Difficulty.HARD: GeneratorParams(
        n_courses=10, classroom_weights=(0.0, 0.19, 0.73, 0.08), enrollment_weights=_ENROLLMENT_WEIGHTS
    ),
}


def _uniform(rng: np.random.Generator, bounds: tuple[int, int], weights=None) -> int:
    lo, hi = bounds
    if weights is None:
        return int(rng.integers(lo, hi + 1))
    p = np.asarray(weights, dtype=float)
    return lo + int(rng.choice(len(p), p=p / p.sum()))


def _join_days(days: Sequence[str]) -> str:
    return " and ".join(days)


def describe(instance: CourseInstance) -> str:
    """Deterministic natural-language rendering of every field of the problem."""
    lines = ["The course schedule is organized as follows:"]
    for course in instance.courses:
        secs = [s for s in instance.sections if s.course_id == course]
        lines.append(f"{course} has {len(secs)} sections.")
        for s in secs:
            start, end = s.slot.to_text().split(" at ")[1].split("-")
            lines.append(
                f"  {s.section_id} meets on {_join_days(s.slot.days)} from {start} to {end} "
                f"with an estimated enrollment of {s.enrollment} students."
            )
    lines.append(f"There are {len(instance.classrooms)} classrooms available:")
    for c in instance.classrooms:
        lines.append(f"  {c.room_id} has {c.capacity} seats.")
    lines.append(
        "Assign every section to exactly one classroom so that no classroom hosts two sections at "
        "overlapping times and every classroom can seat its section's enrollment, keeping the number "
        "of unused seats as small as possible."
    )
    return "\n".join(lines)


def sample_instance(params: GeneratorParams, rng: np.random.Generator, difficulty=None, seed=None) -> CourseInstance:
    sections = []
    for c in range(1, params.n_courses + 1):
        for s in range(1, _uniform(rng, params.sections_per_course) + 1):
            day_idx = rng.choice(len(DAYS), size=2, replace=False)
            start = PERIOD_STARTS[int(rng.integers(len(PERIOD_STARTS)))]
            slot = TimeSlot(tuple(DAYS[int(i)] for i in day_idx), start, start + PERIOD_MINUTES)
            enrollment = _uniform(rng, params.enrollment, params.enrollment_weights)
            sections.append(Section(f"Course {c}", f"Section {s}", slot, enrollment))
    rooms = [
        Classroom(f"classroom {r}", _uniform(rng, params.capacity))
        for r in range(1, _uniform(rng, params.classrooms, params.classroom_weights) + 1)
    ]
    inst = CourseInstance(tuple(sections), tuple(rooms), difficulty, "", seed)
    return CourseInstance(inst.sections, inst.classrooms, difficulty, describe(inst), seed)


def generate_instance(
    difficulty: Difficulty | str,
    seed: int,
    params: GeneratorParams | None = None,
    max_attempts: int = 1000,
) -> InstanceRecord:
    """Sample until the instance is solvable; the record carries the exact solution."""
    difficulty = Difficulty(difficulty)
    params = params or DIFFICULTY_PARAMS[difficulty]
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    for _ in range(max_attempts):
        inst = sample_instance(params, rng, difficulty, seed)
        try:
            plan, slack = solve_exact(inst)
        except Unsatisfiable:
            continue
        return InstanceRecord(inst, plan, float(slack))
    raise GenerationExhausted(f"no solvable {difficulty.value} instance after {max_attempts} draws (seed {seed})")


def instance_seed(base_seed: int, index: int) -> int:
    """Per-instance seed derived from a run seed and the instance index."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1, dtype=np.uint64)[0])


def dataset_statistics(instances: Sequence[CourseInstance]) -> dict[str, float]:
    """Per-dataset means of courses, sections, enrollment, rooms and seats."""
    n = len(instances)
    if n == 0:
        raise ValueError("no instances")
    courses = [len(i.courses) for i in instances]
    sections = [len(i.sections) for i in instances]
    rooms = [len(i.classrooms) for i in instances]
    return {
        "instances": n,
        "courses": sum(courses) / n,
        "avg_sections": sum(s / c for s, c in zip(sections, courses)) / n,
        "avg_students_per_section": sum(sec.enrollment for i in instances for sec in i.sections) / sum(sections),
        "avg_classrooms": sum(rooms) / n,
        "avg_seats_per_classroom": sum(c.capacity for i in instances for c in i.classrooms) / sum(rooms),
        "sections_per_classroom": sum(s / r for s, r in zip(sections, rooms)) / n,
    }
