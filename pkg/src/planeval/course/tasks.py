"""Course-planning tasks for the three roles, and the distance oracle used for ranking."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from planeval.course.io import InstanceRecord, load_worked_example
from planeval.course.model import AssignmentPlan, CourseInstance
from planeval.course.plans import (
    DELTA,
    assess,
    corrupt_plan,
    plan_distance,
    slots_overlap,
)
from planeval.course.solver import solve_exact
from planeval.errors import DegenerateTask, UnknownReference
from planeval.eval_core import (
    Mode,
    Orientation,
    RankingTask,
    Role,
    VerifierTask,
    candidate_label,
)

HEURISTIC_GRADES = {
    2: ((1.0, 0.2), (0.5, 0.2)),
    4: ((1.0, 0.2), (0.75, 0.2), (0.5, 0.2), (0.25, 0.2)),
}

_SOLVER_INSTRUCTIONS = (
    "Give the complete assignment as a JSON object mapping each course to an object that maps "
    "each of its sections to a classroom name."
)
_RANK_INSTRUCTIONS = (
    "Each candidate below is a partial schedule, an intermediate state on the way to the optimal "
    "complete schedule. Rank the candidates from the one closest to the optimal schedule to the "
    "one farthest from it."
)
_EXEMPLAR_HEURISTIC = (
    "Heuristic: for each candidate, count the sections that are still unassigned or sit in a "
    "room where a conflict-free, minimum-slack schedule would not put them. Check each "
    "assignment against capacity and against other sections in the same room at overlapping "
    "times, and look for a smaller room that still fits. The candidate with fewer such sections "
    "is closer to the optimum."
)


class PlanDistance:
    """Oracle heuristic for course plans: sections missing or misplaced relative to gold."""

    orientation = Orientation.LOWER_BETTER

    def score(self, candidate: AssignmentPlan, gold: AssignmentPlan, problem: CourseInstance) -> float:
        return float(plan_distance(candidate, gold, problem))


def render_assignment(plan: AssignmentPlan, instance: CourseInstance) -> str:
    """Plan as nested JSON in instance order; unassigned sections are omitted."""
    nested: dict[str, dict[str, str]] = {}
    for s in instance.sections:
        room = plan.get(s.key)
        if room is not None:
            nested.setdefault(s.course_id, {})[s.section_id] = room
    return json.dumps(nested)


@dataclass
class CourseSolverTask:
    record: InstanceRecord
    mode: Mode = Mode.DIRECT
    task_id: str = ""
    environment: str = "course"
    payload: dict[str, Any] = field(default_factory=dict)

    role = Role.SOLVER

    @property
    def instance(self) -> CourseInstance:
        return self.record.instance

    @property
    def problem_text(self) -> str:
        return self.instance.text_description + "\n\n" + _SOLVER_INSTRUCTIONS

    @property
    def context(self) -> str | None:
        return None


def grade_course_solution(plan: AssignmentPlan | None, record: InstanceRecord, delta: float = DELTA) -> dict[str, Any]:
    """Completeness, feasibility, optimality and threshold pass for a proposed schedule.

    Optimal means feasible with total slack equal to the exact optimum.
    """
    if plan is None:
        return {"complete": False, "feasible": False, "optimal": False, "threshold_pass": False,
                "total_slack": None, "violations": ["no plan delivered"]}
    try:
        a = assess(plan, record.instance, delta)
    except UnknownReference as exc:
        return {"complete": False, "feasible": False, "optimal": False, "threshold_pass": False,
                "total_slack": None, "violations": [str(exc)]}
    optimum = record.optimal_score
    if optimum is None:
        optimum = solve_exact(record.instance)[1]
    return {
        "complete": a.complete,
        "feasible": a.feasible,
        "optimal": a.feasible and a.total_slack == int(optimum),
        "threshold_pass": a.threshold_pass,
        "total_slack": a.total_slack,
        "violations": list(a.violations),
    }


def _gold(record: InstanceRecord) -> AssignmentPlan:
    if record.solution is not None and len(record.solution) == len(record.instance.sections):
        return record.solution
    return solve_exact(record.instance)[0]


def _candidates(record: InstanceRecord, gold: AssignmentPlan, grades, seed: int, max_attempts: int):
    inst = record.instance
    for attempt in range(max_attempts):
        sub = np.random.SeedSequence([seed, attempt]).generate_state(len(grades), dtype=np.uint64)
        plans = [corrupt_plan(gold, inst, kf, ar, int(s)) for (kf, ar), s in zip(grades, sub)]
        dists = [plan_distance(p, gold, inst) for p in plans]
        if len(set(dists)) == len(dists):
            return plans, dists, attempt
    raise DegenerateTask(f"no candidate set with distinct distances after {max_attempts} attempts")


def one_shot_exemplar() -> str:
    """Worked two-candidate example on the bundled reference instance."""
    record = load_worked_example()
    inst = record.instance
    gold = _gold(record)
    plans, dists, _ = _candidates(record, gold, ((0.5, 0.3), (1.0, 0.0)), seed=2024, max_attempts=50)
    order = sorted(range(2), key=lambda i: dists[i])
    lines = [
        "Example problem:",
        inst.text_description,
        "",
        "Example candidates:",
    ]
    for i, p in enumerate(plans):
        lines.append(f"{candidate_label(i)}: {render_assignment(p, inst)}")
    lines += [
        "",
        _EXEMPLAR_HEURISTIC,
        "Applying it: "
        + "; ".join(
            f"candidate {candidate_label(i)} has {dists[i]} of {len(inst.sections)} sections left to fix"
            for i in range(2)
        )
        + ".",
        "Example answer:",
        "```json",
        json.dumps({"ranking": [candidate_label(i) for i in order]}),
        "```",
    ]
    return "\n".join(lines)


def build_course_heuristic_task(
    record: InstanceRecord,
    n_candidates: int,
    mode: Mode,
    seed: int,
    max_attempts: int = 50,
) -> tuple[RankingTask, list[int]]:
    mode = Mode(mode)
    if mode not in (Mode.ZERO_SHOT, Mode.ONE_SHOT):
        raise ValueError(f"course ranking supports ZeroShot and OneShot, not {mode.value}")
    grades = HEURISTIC_GRADES.get(n_candidates)
    if grades is None:
        raise ValueError("n_candidates must be 2 or 4")
    inst = record.instance
    gold = _gold(record)
    plans, dists, attempt = _candidates(record, gold, grades, seed, max_attempts)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5348]))
    perm = rng.permutation(n_candidates)
    plans = [plans[i] for i in perm]
    dists = [dists[i] for i in perm]
    task = RankingTask(
        problem_text=inst.text_description + "\n\n" + _RANK_INSTRUCTIONS,
        candidates=[f"{candidate_label(i)}: {render_assignment(p, inst)}" for i, p in enumerate(plans)],
        oracle_scores=[float(d) for d in dists],
        orientation=Orientation.LOWER_BETTER,
        context=one_shot_exemplar() if mode is Mode.ONE_SHOT else None,
        environment="course",
        mode=mode,
        task_id=f"course-rank{n_candidates}-{seed}",
        payload={
            "plans": [p.to_nested() for p in plans],
            "gold": gold.to_nested(),
            "distances": dists,
            "resamples": attempt,
        },
    )
    return task, task.oracle_order


def _force_infeasible(gold: AssignmentPlan, inst: CourseInstance, rng: np.random.Generator) -> AssignmentPlan:
    """Deterministic fallback: introduce a room conflict, else a capacity breach, else drop a section."""
    secs = list(inst.sections)
    pairs = [(a, b) for i, a in enumerate(secs) for b in secs[i + 1:] if slots_overlap(a.slot, b.slot)]
    out = dict(gold.assignments)
    if pairs:
        a, b = pairs[int(rng.integers(len(pairs)))]
        out[a.key] = out[b.key]
        return AssignmentPlan(out)
    for s in sorted(secs, key=lambda s: -s.enrollment):
        small = [c for c in inst.classrooms if c.capacity < s.enrollment]
        if small:
            out[s.key] = small[0].room_id
            return AssignmentPlan(out)
    out.pop(secs[int(rng.integers(len(secs)))].key)
    return AssignmentPlan(out)


def build_course_verifier_task(
    record: InstanceRecord,
    seed: int,
    mode: Mode = Mode.ZERO_SHOT,
    delta: float = DELTA,
    max_attempts: int = 20,
) -> tuple[VerifierTask, dict[str, bool]]:
    """Half the time the exact solution, otherwise a corrupted schedule that breaks a constraint."""
    mode = Mode(mode)
    inst = record.instance
    gold = _gold(record)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5645]))
    show_gold = bool(rng.random() < 0.5)
    source = "exact"
    plan = gold
    if not show_gold:
        source = "forced"
        for _ in range(max_attempts):
            cand = corrupt_plan(gold, inst, 1.0, 0.3, int(rng.integers(2**63)))
            if not assess(cand, inst, delta).feasible:
                plan, source = cand, "corrupted"
                break
        else:
            plan = _force_infeasible(gold, inst, rng)
    a = assess(plan, inst, delta)
    truth = {"feasible": a.feasible, "optimal": a.threshold_pass}
    task = VerifierTask(
        problem_text=inst.text_description
        + "\n\nDecide whether the schedule below satisfies every constraint (all sections assigned, "
        f"capacity, no double-booked room), and whether it keeps total assigned seats within "
        f"{delta:g} times total enrollment.",
        candidate_text=render_assignment(plan, inst),
        ground_truth=truth,
        environment="course",
        mode=mode,
        task_id=f"course-verify-{seed}",
        payload={"plan": plan.to_nested(), "source": source, "violations": list(a.violations)},
    )
    return task, truth
