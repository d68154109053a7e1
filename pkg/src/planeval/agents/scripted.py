"""Offline baseline agents that answer in the same text format a model would.

Every agent derives its randomness from its seed and the task id, so replies
do not depend on the order or thread in which tasks are evaluated.
"""

from __future__ import annotations

import zlib
from collections.abc import Sequence
from typing import Any

import numpy as np

from planeval.agents.base import AgentReply
from planeval.agents.parsing import format_answer
from planeval.course.plans import slots_overlap
from planeval.course.tasks import CourseSolverTask, _gold
from planeval.eval_core import RankingTask, VerifierTask, candidate_label
from planeval.fitness.constraints import check_feasibility
from planeval.fitness.knapsack import desired_plan
from planeval.fitness.tasks import (
    FitnessSolverTask,
    neighbor_plan,
    plan_to_dict,
    random_feasible_plan,
)


def _rng(seed: int, task: Any) -> np.random.Generator:
    parts = [seed, zlib.crc32(str(getattr(task, "task_id", "")).encode())]
    if isinstance(task, FitnessSolverTask):
        parts.append(task.state.iteration)
    return np.random.default_rng(np.random.SeedSequence(parts))


def _random_ranking(task: RankingTask, rng) -> list[str]:
    return [candidate_label(int(i)) for i in rng.permutation(len(task.candidates))]


def _random_course_plan(task: CourseSolverTask, rng) -> dict:
    rooms = [c.room_id for c in task.instance.classrooms]
    out: dict[str, dict[str, str]] = {}
    for s in task.instance.sections:
        out.setdefault(s.course_id, {})[s.section_id] = rooms[int(rng.integers(len(rooms)))]
    return out


def _first_fit(task: CourseSolverTask) -> dict:
    """Largest sections first, each into the smallest free room that seats it."""
    inst = task.instance
    rooms = sorted(inst.classrooms, key=lambda c: (c.capacity, c.room_id))
    placed: dict[str, list] = {}
    out: dict[str, dict[str, str]] = {}
    for s in sorted(inst.sections, key=lambda s: -s.enrollment):
        for c in rooms:
            if c.capacity >= s.enrollment and not any(slots_overlap(s.slot, o.slot) for o in placed.get(c.room_id, [])):
                placed.setdefault(c.room_id, []).append(s)
                out.setdefault(s.course_id, {})[s.section_id] = c.room_id
                break
    return out


class _Scripted:
    name = "scripted"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def respond(self, task: Any, messages: Sequence[dict[str, str]] = ()) -> AgentReply:
        return AgentReply(format_answer(self.answer(task)))

    def answer(self, task: Any) -> Any:
        raise NotImplementedError


class RandomAgent(_Scripted):
    """Uniform answers of the right shape: random orders, coin-flip verdicts, random plans."""

    name = "random"

    def answer(self, task: Any) -> Any:
        rng = _rng(self.seed, task)
        if isinstance(task, RankingTask):
            return {"ranking": _random_ranking(task, rng)}
        if isinstance(task, VerifierTask):
            return {"feasible": bool(rng.random() < 0.5), "optimal": bool(rng.random() < 0.5)}
        if isinstance(task, CourseSolverTask):
            return _random_course_plan(task, rng)
        if isinstance(task, FitnessSolverTask):
            reps = rng.integers(0, task.profile.max_reps + 1, size=len(task.bank))
            return {ex.name: int(r) for ex, r in zip(task.bank, reps) if r}
        raise TypeError(f"unsupported task type {type(task).__name__}")


class GreedyOracleAgent(_Scripted):
    """Reads the hidden ground truth: oracle orders, true verdicts, optimal plans."""

    name = "greedy_oracle"

    def answer(self, task: Any) -> Any:
        if isinstance(task, RankingTask):
            return {"ranking": [candidate_label(i) for i in task.oracle_order]}
        if isinstance(task, VerifierTask):
            return dict(task.ground_truth)
        if isinstance(task, CourseSolverTask):
            return _gold(task.record).to_nested()
        if isinstance(task, FitnessSolverTask):
            best = desired_plan(task.profile, task.bank, task.state.active_emergencies)
            return plan_to_dict(best, task.bank)
        raise TypeError(f"unsupported task type {type(task).__name__}")


class HillClimbAgent(_Scripted):
    """Fitness solver that explores one feasible +-1 rep move from its best-rated plan so far.

    Course plans come from a first-fit greedy pass. Ranking and verification
    fall back to random answers.
    """

    name = "hill_climb"

    def answer(self, task: Any) -> Any:
        rng = _rng(self.seed, task)
        if isinstance(task, FitnessSolverTask):
            st, prof, bank = task.state, task.profile, task.bank
            ems = st.active_emergencies
            best = None
            best_score = -float("inf")
            for plan, fb in zip(st.plan_history, st.feedback_history):
                if fb.feasible and fb.satisfaction > best_score:
                    best, best_score = plan, fb.satisfaction
            if best is None or not check_feasibility(best, prof, bank, ems)[0]:
                plan = random_feasible_plan(prof, bank, ems, rng)
            else:
                plan = neighbor_plan(best, prof, bank, ems, rng)
            return plan_to_dict(plan, bank)
        if isinstance(task, CourseSolverTask):
            return _first_fit(task)
        return RandomAgent(self.seed).answer(task)


class ZeroAgent(_Scripted):
    """Always the empty plan; ranks in presented order and calls every plan feasible."""

    name = "zero"

    def answer(self, task: Any) -> Any:
        if isinstance(task, RankingTask):
            return {"ranking": list(task.labels)}
        if isinstance(task, VerifierTask):
            return {"feasible": True, "optimal": True}
        return {}


def random_agent(seed: int = 0) -> RandomAgent:
    return RandomAgent(seed)


def greedy_oracle_agent(seed: int = 0) -> GreedyOracleAgent:
    return GreedyOracleAgent(seed)


def hill_climb_agent(seed: int = 0) -> HillClimbAgent:
    return HillClimbAgent(seed)


def zero_agent(seed: int = 0) -> ZeroAgent:
    return ZeroAgent(seed)


SCRIPTED_AGENTS = {
    "random": random_agent,
    "greedy_oracle": greedy_oracle_agent,
    "hill_climb": hill_climb_agent,
    "zero": zero_agent,
}


def make_scripted_agent(name: str, seed: int = 0):
    try:
        return SCRIPTED_AGENTS[name](seed)
    except KeyError:
        raise ValueError(f"unknown scripted agent {name!r}; choose from {sorted(SCRIPTED_AGENTS)}") from None
