"""Interactive episode loop: the simulated user scores plans and injects emergencies."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from typing import Any, Protocol

import numpy as np

from planeval.errors import AgentFailure, EpisodeFinished, MismatchedDimensions
from planeval.fitness.constraints import check_feasibility
from planeval.fitness.knapsack import desired_plan
from planeval.fitness.model import (
    EmergencyCondition,
    EpisodeConfig,
    EpisodeState,
    ExerciseSpec,
    Feedback,
    FitnessPlan,
    Intensity,
    UserProfile,
    load_emergency_bank,
)
from planeval.fitness.scoring import feedback_score

log = logging.getLogger(__name__)

NO_PLAN = "no parseable plan was delivered"
MUSCLE_GROUPS = ("arms", "back", "chest", "core", "legs", "shoulders")


class PlanAgent(Protocol):
    def propose(
        self,
        state: EpisodeState,
        profile: UserProfile,
        bank: Sequence[ExerciseSpec],
        config: EpisodeConfig,
    ) -> FitnessPlan | None: ...


def make_rng(seed: int | Sequence[int]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def step(
    state: EpisodeState,
    plan: FitnessPlan | None,
    profile: UserProfile,
    bank: Sequence[ExerciseSpec],
    config: EpisodeConfig,
    rng: np.random.Generator,
    emergency_bank: Sequence[EmergencyCondition] | None = None,
) -> Feedback:
    """Score one proposed plan, maybe inject an emergency, and advance the state.

    ``plan=None`` stands for an agent failure and is graded as infeasible.
    """
    if state.iteration >= config.iterations:
        raise EpisodeFinished(f"episode already ran {state.iteration} iterations")
    if emergency_bank is None:
        emergency_bank = load_emergency_bank()

    if plan is None:
        recorded = FitnessPlan.zeros(len(bank))
        feasible, violations, score = False, [NO_PLAN], 0.0
    else:
        if len(plan) != len(bank):
            raise MismatchedDimensions(f"plan has {len(plan)} entries, bank has {len(bank)}")
        recorded = plan
        feasible, violations = check_feasibility(plan, profile, bank, state.active_emergencies)
        score = feedback_score(plan, state, profile, bank, config) if feasible else 0.0

    # always draw so the stream does not depend on the agent's plan
    draw = rng.random()
    emergency = None
    if emergency_bank and draw < config.emergency_probability:
        emergency = emergency_bank[int(rng.integers(len(emergency_bank)))]
        if emergency not in state.active_emergencies:
            state.active_emergencies.append(emergency)

    fb = Feedback(satisfaction=score, feasible=feasible, violations=tuple(violations), emergency=emergency)
    state.plan_history.append(recorded)
    state.feedback_history.append(fb)
    state.iteration += 1
    return fb


@dataclass(frozen=True)
class SolverMetrics:
    feasibility: float
    optimality: float
    cost_utility: int
    diversity: float
    delivery_rate: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def metrics_from_transcript(records: Sequence[dict[str, Any]], k: int, fraction: float = 0.95) -> SolverMetrics:
    """Recompute solver metrics from per-iteration transcript rows.

    Each row carries ``plan`` (list or None), ``feasible``, ``satisfaction`` and
    ``max_satisfaction``. This is the single grading path used for fresh runs
    and for re-grading stored records.
    """
    n = len(records)
    if n == 0:
        return SolverMetrics(0.0, 0.0, 1, 0.0, 0.0)
    feasible = [bool(r["feasible"]) for r in records]
    scores = [float(r["satisfaction"]) if r["feasible"] else 0.0 for r in records]
    tail = scores[-3:]
    optimality = sum(max(s, 0.0) / 10.0 for s in tail) / len(tail)
    cost = n + 1
    for t, r in enumerate(records, start=1):
        if r["feasible"] and float(r["satisfaction"]) >= fraction * float(r["max_satisfaction"]):
            cost = t
            break
    used: set[int] = set()
    delivered = 0
    for r in records:
        if r["plan"] is not None:
            delivered += 1
            used.update(i for i, v in enumerate(r["plan"]) if v)
    return SolverMetrics(
        feasibility=sum(feasible) / n,
        optimality=optimality,
        cost_utility=cost,
        diversity=len(used) / k if k else 0.0,
        delivery_rate=delivered / n,
    )


def transcript_row(iteration: int, plan: FitnessPlan | None, fb: Feedback, max_satisfaction: float) -> dict[str, Any]:
    return {
        "iteration": iteration,
        "plan": list(plan.reps) if plan is not None else None,
        "feasible": fb.feasible,
        "violations": list(fb.violations),
        "satisfaction": fb.satisfaction,
        "emergency": fb.emergency.to_dict() if fb.emergency else None,
        "max_satisfaction": max_satisfaction,
    }


def max_satisfaction(
    state: EpisodeState, profile: UserProfile, bank: Sequence[ExerciseSpec], config: EpisodeConfig
) -> float:
    """Satisfaction the desired plan would earn at this point of the episode."""
    best = desired_plan(profile, bank, state.active_emergencies)
    return feedback_score(best, state, profile, bank, config)


def run_episode(
    agent: PlanAgent,
    profile: UserProfile,
    bank: Sequence[ExerciseSpec],
    config: EpisodeConfig,
    emergency_bank: Sequence[EmergencyCondition] | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[EpisodeState, SolverMetrics, list[dict[str, Any]]]:
    """Run ``config.iterations`` steps of ``agent`` against the simulated user.

    Returns the final state, the solver metrics and the per-iteration transcript.
    """
    if emergency_bank is None:
        emergency_bank = load_emergency_bank()
    rng = rng if rng is not None else make_rng(config.seed)
    state = EpisodeState()
    rows = []
    for t in range(1, config.iterations + 1):
        ceiling = max_satisfaction(state, profile, bank, config)
        try:
            plan = agent.propose(state.copy(), profile, bank, config)
            if plan is not None and len(plan) != len(bank):
                plan = None
        except AgentFailure as exc:
            log.debug("agent failed at iteration %d: %s", t, exc)
            plan = None
        fb = step(state, plan, profile, bank, config, rng, emergency_bank)
        rows.append(transcript_row(t, plan, fb, ceiling))
    metrics = metrics_from_transcript(rows, len(bank), config.cost_utility_fraction)
    return state, metrics, rows


def sample_profile(bank: Sequence[ExerciseSpec], rng: np.random.Generator) -> UserProfile:
    """Draw a random user: preferences in [0, 10] (one decimal), budget and constraints."""
    prefs = tuple(round(float(u), 1) for u in rng.uniform(0.0, 10.0, size=len(bank)))
    excluded: frozenset[str] = frozenset()
    if rng.random() < 0.2:
        excluded = frozenset({MUSCLE_GROUPS[int(rng.integers(len(MUSCLE_GROUPS)))]})
    return UserProfile(
        preferences=prefs,
        available_time_minutes=int(rng.choice([30, 45, 60, 75, 90])),
        gym_access=bool(rng.random() < 0.5),
        stamina=list(Intensity)[int(rng.integers(3))],
        max_reps=int(rng.integers(3, 6)),
        excluded_muscle_groups=excluded,
    )
