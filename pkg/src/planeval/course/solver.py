"""Exact minimum-slack room assignment: branch and bound plus a brute-force oracle."""

from __future__ import annotations

import itertools
import math

from planeval.course.model import AssignmentPlan, CourseInstance, slots_overlap
from planeval.errors import TooLarge, Unsatisfiable

BRUTE_FORCE_LIMIT = 10**7


def _conflicts(instance: CourseInstance) -> list[list[int]]:
    secs = instance.sections
    out: list[list[int]] = [[] for _ in secs]
    for i in range(len(secs)):
        for j in range(i + 1, len(secs)):
            if slots_overlap(secs[i].slot, secs[j].slot):
                out[i].append(j)
                out[j].append(i)
    return out


def _to_plan(instance: CourseInstance, room_of: list[int]) -> AssignmentPlan:
    rooms = instance.classrooms
    return AssignmentPlan({s.key: rooms[r].room_id for s, r in zip(instance.sections, room_of)})


def _clique_check(instance: CourseInstance) -> None:
    """Sections meeting at the same moment need distinct rooms big enough for them.

    Per day, the sections running at any start time form a clique; it fits
    iff its k-th largest enrollment fits the k-th largest room for every k.
    """
    caps = sorted((c.capacity for c in instance.classrooms), reverse=True)
    secs = instance.sections
    for day in {d for s in secs for d in s.slot.days}:
        on_day = [s for s in secs if day in s.slot.day_set]
        for probe in {s.slot.start for s in on_day}:
            active = sorted(
                (s.enrollment for s in on_day if s.slot.start <= probe < s.slot.end), reverse=True
            )
            if len(active) > len(caps) or any(e > c for e, c in zip(active, caps)):
                raise Unsatisfiable(f"too many simultaneous sections on {day} at minute {probe}")


def _components(conflicts: list[list[int]]) -> list[list[int]]:
    seen = [False] * len(conflicts)
    out = []
    for root in range(len(conflicts)):
        if seen[root]:
            continue
        seen[root] = True
        comp, stack = [], [root]
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in conflicts[i]:
                if not seen[j]:
                    seen[j] = True
                    stack.append(j)
        out.append(sorted(comp))
    return out


def _branch_and_bound(
    members: list[int],
    enrollment: list[int],
    options: list[list[tuple[int, int]]],
    conflicts: list[list[int]],
    n_rooms: int,
    room_of: list[int],
) -> int | None:
    """Minimum slack for one conflict component; writes the rooms into ``room_of``."""
    order = sorted(members, key=lambda i: (-enrollment[i], i))
    m = len(order)
    blocked = {i: [0] * n_rooms for i in members}
    low = {i: options[i][0][1] for i in members}  # smallest slack still available
    remaining = sum(low.values())
    best = math.inf
    best_rooms: dict[int, int] | None = None

    def floor(j: int) -> int | None:
        for r, slack in options[j]:
            if not blocked[j][r]:
                return slack
        return None

    def search(d: int, cost: int) -> None:
        nonlocal best, best_rooms, remaining
        if cost + remaining >= best:
            return
        if d == m:
            best = cost
            best_rooms = {i: room_of[i] for i in members}
            return
        i = order[d]
        remaining -= low[i]
        for r, slack in options[i]:
            if cost + slack + remaining >= best:
                break  # options are sorted by slack
            if blocked[i][r]:
                continue
            room_of[i] = r
            marked = []  # neighbours whose counter for r we raised
            saved = []  # (j, previous low[j]) for neighbours whose floor moved
            dead = False
            for j in conflicts[i]:
                if room_of[j] != -1:
                    continue
                blocked[j][r] += 1
                marked.append(j)
                if blocked[j][r] == 1:
                    new = floor(j)
                    if new is None:
                        dead = True
                        break
                    if new != low[j]:
                        saved.append((j, low[j]))
                        remaining += new - low[j]
                        low[j] = new
            if not dead:
                search(d + 1, cost + slack)
            for j, old in reversed(saved):
                remaining += old - low[j]
                low[j] = old
            for j in marked:
                blocked[j][r] -= 1
            room_of[i] = -1
        remaining += low[i]

    search(0, 0)
    if best_rooms is None:
        return None
    for i, r in best_rooms.items():
        room_of[i] = r
    return int(best)


def solve_exact(instance: CourseInstance) -> tuple[AssignmentPlan, int]:
    """Minimum total seat slack over all feasible complete assignments.

    Sections that never share a meeting time cannot interfere, so each
    connected component of the conflict graph is optimised separately. Within
    a component, sections are branched in decreasing enrollment and rooms tried
    by increasing slack (then room index). Rooms taken by an assigned
    conflicting section leave the neighbour's domain (forward checking); a
    branch is cut when a section has no room left or when its slack plus each
    remaining section's smallest available slack cannot beat the incumbent.
    Only strict improvements replace the incumbent, so results are deterministic.
    """
    secs = instance.sections
    caps = [c.capacity for c in instance.classrooms]
    m = len(secs)
    if m == 0:
        return AssignmentPlan({}), 0
    enrollment = [s.enrollment for s in secs]
    options = []
    for s in secs:
        opts = [r for r in range(len(caps)) if caps[r] >= s.enrollment]
        if not opts:
            raise Unsatisfiable(f"no classroom can seat {s.label}")
        opts.sort(key=lambda r, e=s.enrollment: (caps[r] - e, r))
        options.append([(r, caps[r] - s.enrollment) for r in opts])
    _clique_check(instance)
    conflicts = _conflicts(instance)

    room_of = [-1] * m
    total = 0
    for comp in _components(conflicts):
        cost = _branch_and_bound(comp, enrollment, options, conflicts, len(caps), room_of)
        if cost is None:
            raise Unsatisfiable("no conflict-free assignment exists")
        total += cost
    return _to_plan(instance, room_of), total


def brute_force_solve(instance: CourseInstance, limit: int = BRUTE_FORCE_LIMIT) -> tuple[AssignmentPlan, int]:
    """Enumerate every room assignment; same result contract as ``solve_exact``."""
    secs = instance.sections
    caps = [c.capacity for c in instance.classrooms]
    m, n = len(secs), len(caps)
    if n ** m > limit:
        raise TooLarge(f"{n}^{m} assignments exceed the brute-force limit {limit}")
    if m == 0:
        return AssignmentPlan({}), 0
    enroll = [s.enrollment for s in secs]
    conflict_pairs = [(i, j) for i, js in enumerate(_conflicts(instance)) for j in js if i < j]
    best = math.inf
    best_rooms = None
    for rooms in itertools.product(range(n), repeat=m):
        if any(caps[r] < e for r, e in zip(rooms, enroll)):
            continue
        if any(rooms[i] == rooms[j] for i, j in conflict_pairs):
            continue
        slack = sum(caps[r] for r in rooms) - sum(enroll)
        if slack < best:
            best = slack
            best_rooms = rooms
    if best_rooms is None:
        raise Unsatisfiable("no conflict-free assignment exists")
    return _to_plan(instance, list(best_rooms)), int(best)
