"""Text rendering and task builders (solver prompts, verifier and ranking tasks)."""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from planeval.errors import DegenerateTask
from planeval.eval_core import (
    Mode,
    Orientation,
    RankingTask,
    Role,
    VerifierTask,
    candidate_label,
)
from planeval.fitness.constraints import (
    check_feasibility,
    effective_constraints,
    total_minutes,
)
from planeval.fitness.env import make_rng, sample_profile, step
from planeval.fitness.knapsack import desired_plan
from planeval.fitness.model import (
    EmergencyCondition,
    EpisodeConfig,
    EpisodeState,
    ExerciseSpec,
    Feedback,
    FitnessPlan,
    UserProfile,
    load_emergency_bank,
    load_exercise_bank,
)
from planeval.fitness.scoring import feedback_score

# separates the rng streams of the different task builders
_VERIFIER_STREAM = 0x5645
_HEURISTIC_STREAM = 0x4855

HEURISTIC_GRADES = {2: (0, 3), 4: (0, 2, 4, 7)}


# -- rendering -----------------------------------------------------------------


def describe_bank(bank: Sequence[ExerciseSpec]) -> str:
    lines = ["Available exercises (time is minutes per rep):"]
    for ex in bank:
        lines.append(
            f"- {ex.name}: {ex.duration_minutes} min, {ex.intensity.value} intensity, "
            f"gym {'required' if ex.gym_required else 'not required'}, {ex.category.value}, "
            f"muscles: {', '.join(sorted(ex.muscle_groups)) or 'none'}"
        )
    return "\n".join(lines)


def describe_profile(
    profile: UserProfile,
    bank: Sequence[ExerciseSpec],
    emergencies: Sequence[EmergencyCondition] = (),
    show_preferences: bool = True,
) -> str:
    c = effective_constraints(profile, emergencies)
    lines = [
        f"User: {profile.name}" + (f" (goal: {profile.goal})" if profile.goal else ""),
        f"Gym access: {'yes' if profile.gym_access else 'no'}",
        f"Available time: {profile.available_time_minutes} minutes",
        f"Stamina: {profile.stamina.value}",
        f"Maximum reps per exercise: {profile.max_reps}",
        "Excluded muscle groups: " + (", ".join(sorted(profile.excluded_muscle_groups)) or "none"),
    ]
    if show_preferences:
        prefs = ", ".join(f"{ex.name}={u:g}" for ex, u in zip(bank, profile.preferences))
        lines.append(f"Exercise preferences (0-10): {prefs}")
    if emergencies:
        lines.append("Active emergencies:")
        lines.extend(f"- {em.description}" for em in emergencies)
        lines.append(
            f"Effective constraints now: {c.time_budget} minutes available; excluded muscle groups: "
            f"{', '.join(sorted(c.excluded_groups)) or 'none'}; excluded exercises: "
            f"{', '.join(sorted(c.excluded_exercises)) or 'none'}"
        )
    return "\n".join(lines)


def plan_to_dict(plan: FitnessPlan, bank: Sequence[ExerciseSpec]) -> dict[str, int]:
    return {ex.name: r for ex, r in zip(bank, plan.reps) if r}


def plan_from_dict(d: dict[str, Any], bank: Sequence[ExerciseSpec]) -> FitnessPlan:
    """Build a plan from {exercise name: reps}; unknown names raise KeyError."""
    index = {ex.name.lower(): i for i, ex in enumerate(bank)}
    reps = [0] * len(bank)
    for name, r in d.items():
        i = index[str(name).strip().lower()]
        value = int(r)
        if value < 0 or value != float(r):
            raise ValueError(f"invalid reps {r!r} for {name}")
        reps[i] = value
    return FitnessPlan(tuple(reps))


def render_plan(plan: FitnessPlan, bank: Sequence[ExerciseSpec]) -> str:
    d = plan_to_dict(plan, bank)
    if not d:
        return "(no exercises)"
    body = ", ".join(f"{name} x{r}" for name, r in d.items())
    return f"{body} [{total_minutes(plan, bank)} min]"


def render_feedback(fb: Feedback) -> str:
    if fb.feasible:
        text = f"satisfaction {fb.satisfaction:.2f}/10"
    else:
        text = "inadmissible: " + "; ".join(fb.violations)
    if fb.emergency is not None:
        text += f" | new emergency: {fb.emergency.description}"
    return text


def render_history(state: EpisodeState, bank: Sequence[ExerciseSpec]) -> str:
    """History with plans P_1..P_t and feedback F_0..F_{t-1} (F_j answers P_{j+1})."""
    lines = []
    for j, (plan, fb) in enumerate(zip(state.plan_history, state.feedback_history)):
        lines.append(f"P_{j + 1}: {render_plan(plan, bank)}")
        lines.append(f"F_{j}: {render_feedback(fb)}")
    return "\n".join(lines)


def describe_satisfaction(config: EpisodeConfig) -> str:
    w = 1.0 - config.alpha - config.beta
    return (
        "The user's satisfaction with a plan is "
        f"10 * ({config.alpha:g} * Plan + {config.beta:g} * Rep + {w:g} * Overlap), where Plan is the mean "
        "preference of the chosen exercises divided by 10, Rep is the cosine similarity between the plan's "
        "rep vector and the user's ideal rep vector times min(1, |P|/|ideal|, |ideal|/|P|), and Overlap is minus "
        f"the fraction of exercises used across the last {config.overlap_window} plans."
    )


# -- candidate construction ------------------------------------------------------


def _admissible(profile, bank, emergencies) -> list[int]:
    c = effective_constraints(profile, emergencies)
    return [i for i, ex in enumerate(bank) if c.admissible(ex)]


def random_feasible_plan(profile, bank, emergencies, rng: np.random.Generator) -> FitnessPlan:
    """Fill admissible exercises in random order with random reps that still fit the budget."""
    c = effective_constraints(profile, emergencies)
    reps = [0] * len(bank)
    budget = c.time_budget
    for i in rng.permutation(_admissible(profile, bank, emergencies)):
        t = bank[i].duration_minutes
        most = min(c.max_reps, budget // t)
        if most <= 0 or rng.random() < 0.4:
            continue
        r = int(rng.integers(1, most + 1))
        reps[i] = r
        budget -= r * t
    return FitnessPlan(tuple(reps))


def neighbor_plan(plan: FitnessPlan, profile, bank, emergencies, rng: np.random.Generator) -> FitnessPlan:
    """One feasible +-1 rep move on an admissible exercise; returns ``plan`` if none exists."""
    allowed = _admissible(profile, bank, emergencies)
    moves = [(i, d) for i in allowed for d in (-1, 1)]
    for j in rng.permutation(len(moves)):
        i, d = moves[j]
        reps = list(plan.reps)
        reps[i] += d
        if reps[i] < 0:
            continue
        cand = FitnessPlan(tuple(reps))
        if check_feasibility(cand, profile, bank, emergencies)[0]:
            return cand
    return plan


def perturb(plan: FitnessPlan, moves: int, profile, bank, emergencies, rng) -> FitnessPlan:
    for _ in range(moves):
        plan = neighbor_plan(plan, profile, bank, emergencies, rng)
    return plan


def inject_violation(
    plan: FitnessPlan, profile: UserProfile, bank: Sequence[ExerciseSpec], emergencies, rng
) -> tuple[FitnessPlan, str]:
    """Break a feasible plan with one kind of violation chosen among those applicable."""
    c = effective_constraints(profile, emergencies)
    options = []
    gym_only = [i for i, ex in enumerate(bank) if ex.gym_required]
    if not c.gym_access and gym_only:
        options.append("gym")
    excluded = [
        i for i, ex in enumerate(bank)
        if ex.name in c.excluded_exercises or ex.muscle_groups & c.excluded_groups
    ]
    if excluded:
        options.append("exclusion")
    allowed = _admissible(profile, bank, emergencies)
    if allowed:
        options.append("max_reps")
        if sum(bank[i].duration_minutes for i in allowed) * c.max_reps > c.time_budget:
            options.append("time")
    if not options:
        allowed = list(range(len(bank)))
        options.append("max_reps")
    kind = options[int(rng.integers(len(options)))]
    reps = list(plan.reps)
    if kind == "gym":
        reps[int(rng.choice(gym_only))] += 1
    elif kind == "exclusion":
        reps[int(rng.choice(excluded))] += 1
    elif kind == "max_reps":
        reps[int(rng.choice(allowed))] = c.max_reps + 1
    else:
        order = rng.permutation(allowed)
        for i in order:
            if sum(r * ex.duration_minutes for r, ex in zip(reps, bank)) > c.time_budget:
                break
            reps[i] = c.max_reps
    return FitnessPlan(tuple(reps)), kind


def _rollout(profile, bank, config, emergency_bank, rng, steps: int) -> EpisodeState:
    """History produced by a random local-search user of the environment."""
    state = EpisodeState()
    cfg = EpisodeConfig(
        alpha=config.alpha,
        beta=config.beta,
        emergency_probability=config.emergency_probability,
        overlap_window=config.overlap_window,
        iterations=steps,
        seed=config.seed,
    )
    plan = random_feasible_plan(profile, bank, [], rng)
    for _ in range(steps):
        step(state, plan, profile, bank, cfg, rng, emergency_bank)
        plan = perturb(plan, 2, profile, bank, state.active_emergencies, rng)
    return state


# -- solver ---------------------------------------------------------------------


@dataclass
class FitnessSolverTask:
    """What the planning agent sees at one iteration of an episode."""

    profile: UserProfile
    bank: Sequence[ExerciseSpec]
    state: EpisodeState
    config: EpisodeConfig
    mode: Mode = Mode.DIRECT
    task_id: str = ""
    environment: str = "fitness"
    payload: dict[str, Any] = field(default_factory=dict)

    role = Role.SOLVER

    @property
    def problem_text(self) -> str:
        parts = [
            describe_profile(self.profile, self.bank, self.state.active_emergencies),
            describe_bank(self.bank),
            f"Propose the reps for iteration {self.state.iteration + 1}. "
            "The plan must fit the available time, respect gym access, exclusions and the rep limit. "
            "You will receive a satisfaction score (0-10) or a complaint after each plan.",
        ]
        return "\n\n".join(parts)

    @property
    def context(self) -> str | None:
        if not self.state.plan_history:
            return None
        return "Previous plans and feedback:\n" + render_history(self.state, self.bank)


# -- verifier -------------------------------------------------------------------


def build_verifier_task(
    mode: Mode,
    seed: int,
    bank: Sequence[ExerciseSpec] | None = None,
    emergency_bank: Sequence[EmergencyCondition] | None = None,
    config: EpisodeConfig | None = None,
) -> tuple[VerifierTask, bool]:
    """Sample a profile and a plan to judge; half the plans carry an injected violation."""
    mode = Mode(mode)
    bank = list(bank) if bank is not None else load_exercise_bank()
    emergency_bank = emergency_bank if emergency_bank is not None else load_emergency_bank()
    config = config or EpisodeConfig(seed=seed % 2**64)
    rng = make_rng([seed, _VERIFIER_STREAM])
    profile = sample_profile(bank, rng)

    state = EpisodeState()
    if mode is Mode.FEW_SHOT:
        state = _rollout(profile, bank, config, emergency_bank, rng, int(rng.integers(2, 6)))
    emergencies = list(state.active_emergencies)

    want_feasible = bool(rng.random() < 0.5)
    if rng.random() < 0.5:
        base = perturb(desired_plan(profile, bank, emergencies), 2, profile, bank, emergencies, rng)
    else:
        base = random_feasible_plan(profile, bank, emergencies, rng)
    injected = None
    candidate = base
    if not want_feasible:
        candidate, injected = inject_violation(base, profile, bank, emergencies, rng)
    truth, _ = check_feasibility(candidate, profile, bank, emergencies)

    label = f"P_{len(state.plan_history) + 1}" if mode is Mode.FEW_SHOT else "P_0"
    problem = "\n\n".join([
        describe_profile(profile, bank, emergencies),
        describe_bank(bank),
        f"Is plan {label} admissible, i.e. does it satisfy every constraint above?",
    ])
    context = None
    if mode is Mode.FEW_SHOT:
        context = "Interaction history so far:\n" + render_history(state, bank)
    task = VerifierTask(
        problem_text=problem,
        candidate_text=f"{label}: " + json.dumps(plan_to_dict(candidate, bank)) + f" ({total_minutes(candidate, bank)} min total)",
        ground_truth={"feasible": truth, "optimal": None},
        context=context,
        environment="fitness",
        mode=mode,
        task_id=f"fitness-verify-{seed}",
        payload={
            "profile": profile.to_dict(),
            "bank": [ex.to_dict() for ex in bank],
            "candidate": list(candidate.reps),
            "active_emergencies": [em.to_dict() for em in emergencies],
            "history_plans": [list(p.reps) for p in state.plan_history],
            "injected": injected,
        },
    )
    return task, truth


# -- heuristic ranking ------------------------------------------------------------


def build_heuristic_task(
    mode: Mode,
    n_candidates: int,
    seed: int,
    bank: Sequence[ExerciseSpec] | None = None,
    emergency_bank: Sequence[EmergencyCondition] | None = None,
    config: EpisodeConfig | None = None,
    profile: UserProfile | None = None,
    max_attempts: int = 20,
) -> tuple[RankingTask, list[int]]:
    """Sample feasible candidates at graded distances from the desired plan and rank them by F."""
    mode = Mode(mode)
    if n_candidates < 2:
        raise ValueError("n_candidates must be at least 2")
    bank = list(bank) if bank is not None else load_exercise_bank()
    emergency_bank = emergency_bank if emergency_bank is not None else load_emergency_bank()
    config = config or EpisodeConfig(seed=seed % 2**64)
    grades = HEURISTIC_GRADES.get(n_candidates) or tuple(2 * i for i in range(n_candidates))
    rng = make_rng([seed, _HEURISTIC_STREAM])

    for _ in range(max_attempts):
        prof = profile or sample_profile(bank, rng)
        state = EpisodeState()
        if mode is Mode.FEW_SHOT:
            state = _rollout(prof, bank, config, emergency_bank, rng, int(rng.integers(2, 6)))
        ems = list(state.active_emergencies)
        best = desired_plan(prof, bank, ems)
        plans = [perturb(best, g, prof, bank, ems, rng) for g in grades]
        order = rng.permutation(len(plans))
        plans = [plans[i] for i in order]
        scores = [feedback_score(p, state, prof, bank, config) for p in plans]
        top = max(scores)
        if sum(1 for s in scores if s == top) == 1 and len(set(plans)) == len(plans):
            break
    else:
        raise DegenerateTask(f"no candidate set with a unique best after {max_attempts} attempts")

    problem = "\n\n".join([
        describe_profile(prof, bank, ems),
        describe_bank(bank),
        describe_satisfaction(config),
        f"Rank the {n_candidates} candidate plans from the one the user will be most satisfied with "
        "to the least satisfied.",
    ])
    context = None
    if mode is Mode.FEW_SHOT:
        context = "Interaction history so far:\n" + render_history(state, bank)
    candidates = [
        f"{candidate_label(i)}: " + json.dumps(plan_to_dict(p, bank)) + f" ({total_minutes(p, bank)} min total)"
        for i, p in enumerate(plans)
    ]
    task = RankingTask(
        problem_text=problem,
        candidates=candidates,
        oracle_scores=scores,
        orientation=Orientation.HIGHER_BETTER,
        context=context,
        environment="fitness",
        mode=mode,
        task_id=f"fitness-rank{n_candidates}-{seed}",
        payload={
            "profile": prof.to_dict(),
            "plans": [list(p.reps) for p in plans],
            "history_plans": [list(p.reps) for p in state.plan_history],
            "active_emergencies": [em.to_dict() for em in ems],
        },
    )
    return task, task.oracle_order
