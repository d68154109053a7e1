"""Static and dynamic constraints on a fitness plan."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from planeval.fitness.model import (
    EmergencyCondition,
    ExerciseSpec,
    FitnessPlan,
    UserProfile,
    check_dims,
)


@dataclass(frozen=True)
class EffectiveConstraints:
    time_budget: int
    max_reps: int
    gym_access: bool
    excluded_groups: frozenset[str]
    excluded_exercises: frozenset[str]

    def admissible(self, ex: ExerciseSpec) -> bool:
        if ex.gym_required and not self.gym_access:
            return False
        if ex.name in self.excluded_exercises:
            return False
        return not (ex.muscle_groups & self.excluded_groups)


def effective_constraints(
    profile: UserProfile, emergencies: Iterable[EmergencyCondition] = ()
) -> EffectiveConstraints:
    """Fold active emergencies into the profile's boolean and integer constraints."""
    time_budget = profile.available_time_minutes
    groups = set(profile.excluded_muscle_groups)
    names: set[str] = set()
    for em in emergencies:
        eff = em.effect
        if eff.kind == "ReduceAvailableTime":
            time_budget -= eff.delta_minutes
        elif eff.kind == "ExcludeMuscleGroup":
            groups.add(eff.group)
        elif eff.kind == "ExcludeExercise":
            names.add(eff.name)
    return EffectiveConstraints(
        time_budget=max(time_budget, 0),
        max_reps=profile.max_reps,
        gym_access=profile.gym_access,
        excluded_groups=frozenset(groups),
        excluded_exercises=frozenset(names),
    )


def total_minutes(plan: FitnessPlan, bank: Sequence[ExerciseSpec]) -> int:
    check_dims(bank, plan.reps)
    return sum(r * ex.duration_minutes for r, ex in zip(plan.reps, bank))


def check_feasibility(
    plan: FitnessPlan,
    profile: UserProfile,
    bank: Sequence[ExerciseSpec],
    active_emergencies: Iterable[EmergencyCondition] = (),
) -> tuple[bool, list[str]]:
    """Return (feasible, violations); one complaint string per violated constraint."""
    check_dims(bank, plan.reps, profile.preferences)
    c = effective_constraints(profile, active_emergencies)
    violations = []
    minutes = total_minutes(plan, bank)
    if minutes > c.time_budget:
        violations.append(
            f"time budget exceeded: plan needs {minutes} minutes but only {c.time_budget} are available"
        )
    for r, ex in zip(plan.reps, bank):
        if r == 0:
            continue
        if r > c.max_reps:
            violations.append(f"max reps exceeded: {ex.name} has {r} reps, limit is {c.max_reps}")
        if ex.gym_required and not c.gym_access:
            violations.append(f"gym required: {ex.name} needs a gym but the user has no gym access")
        if ex.name in c.excluded_exercises:
            violations.append(f"excluded exercise: {ex.name} must not be performed")
        for group in sorted(ex.muscle_groups & c.excluded_groups):
            violations.append(f"excluded muscle group: {ex.name} works the {group}")
    return not violations, violations
