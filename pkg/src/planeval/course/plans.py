"""Plan assessment, the oracle edit distance, and plan corruption."""

from __future__ import annotations

import math

import numpy as np

from planeval.course.model import (
    AssignmentPlan,
    CourseInstance,
    PlanAssessment,
    slots_overlap,
)
from planeval.errors import UnknownReference

DELTA = 1.3


def check_references(plan: AssignmentPlan, instance: CourseInstance) -> None:
    for key, room in plan.assignments.items():
        if not instance.has_section(key):
            raise UnknownReference(f"unknown section {key[0]}/{key[1]}")
        if not instance.has_room(room):
            raise UnknownReference(f"unknown classroom {room!r}")


def assess(plan: AssignmentPlan, instance: CourseInstance, delta: float = DELTA) -> PlanAssessment:
    """Completeness, feasibility, seat slack and the occupancy threshold for a plan.

    ``threshold_pass`` holds when the plan is feasible and total assigned
    capacity over total enrollment is at most ``delta``.
    """
    check_references(plan, instance)
    violations = []
    for s in instance.sections:
        if s.key not in plan.assignments:
            violations.append(f"unassigned section: {s.label}")
    complete = not violations

    slack = 0
    seats = enrolled = 0
    for key, room_id in plan.assignments.items():
        s = instance.section(key)
        room = instance.room(room_id)
        slack += room.capacity - s.enrollment
        seats += room.capacity
        enrolled += s.enrollment
        if s.enrollment > room.capacity:
            violations.append(
                f"capacity exceeded: {s.label} has {s.enrollment} students but {room_id} seats {room.capacity}"
            )

    by_room: dict[str, list] = {}
    for key, room_id in plan.assignments.items():
        by_room.setdefault(room_id, []).append(instance.section(key))
    for room_id, secs in by_room.items():
        for i in range(len(secs)):
            for j in range(i + 1, len(secs)):
                if slots_overlap(secs[i].slot, secs[j].slot):
                    violations.append(
                        f"room conflict: {room_id} hosts {secs[i].label} and {secs[j].label} at overlapping times"
                    )

    feasible = complete and len(violations) == 0
    ratio = seats / enrolled if enrolled else 0.0
    return PlanAssessment(
        complete=complete,
        feasible=feasible,
        violations=tuple(violations),
        total_slack=slack,
        occupancy_ratio=ratio,
        threshold_pass=feasible and ratio <= delta,
    )


def slack_exceeds(assessment: PlanAssessment, delta: float = DELTA) -> bool:
    """The literal ``J(P) > delta`` predicate on total seat slack, for strict comparisons."""
    return assessment.total_slack > delta


def plan_distance(candidate: AssignmentPlan, gold: AssignmentPlan, instance: CourseInstance) -> int:
    """Sections missing from ``candidate`` or placed in a different room than in ``gold``."""
    check_references(candidate, instance)
    check_references(gold, instance)
    return sum(
        1 for s in instance.sections
        if candidate.get(s.key) is None or candidate.get(s.key) != gold.get(s.key)
    )


def corrupt_plan(
    gold: AssignmentPlan,
    instance: CourseInstance,
    keep_fraction: float,
    alter_rate: float,
    seed: int,
) -> AssignmentPlan:
    """Keep a random prefix of ceil(keep_fraction * m) gold assignments, then move
    each kept entry to a different random room with probability ``alter_rate``."""
    if not 0.0 <= keep_fraction <= 1.0 or not 0.0 <= alter_rate <= 1.0:
        raise ValueError("keep_fraction and alter_rate must lie in [0, 1]")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    keys = [s.key for s in instance.sections if s.key in gold.assignments]
    order = rng.permutation(len(keys))
    n_keep = math.ceil(keep_fraction * len(instance.sections) - 1e-9)
    rooms = [c.room_id for c in instance.classrooms]
    out = {}
    for idx in order[:n_keep]:
        key = keys[idx]
        room = gold.assignments[key]
        # draw unconditionally to keep the stream aligned across alter rates
        flip = rng.random()
        pick = rng.integers(max(len(rooms) - 1, 1))
        if flip < alter_rate and len(rooms) > 1:
            others = [r for r in rooms if r != room]
            room = others[int(pick)]
        out[key] = room
    return AssignmentPlan(out)
