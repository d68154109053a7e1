"""The simulated user's satisfaction function and its three components."""

from __future__ import annotations

import math
from collections.abc import Sequence

from planeval.errors import EmptyWindow, MismatchedDimensions
from planeval.fitness.knapsack import desired_plan
from planeval.fitness.model import (
    EpisodeConfig,
    EpisodeState,
    ExerciseSpec,
    FitnessPlan,
    UserProfile,
)


def _same_length(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise MismatchedDimensions(f"length {len(a)} != {len(b)}")


def plan_score(plan: FitnessPlan, preferences: Sequence[float]) -> float:
    """Mean preference of the selected exercises, scaled to [0, 1]; 0 for an empty plan."""
    _same_length(plan.reps, preferences)
    chosen = [u for r, u in zip(plan.reps, preferences) if r != 0]
    if not chosen:
        return 0.0
    return sum(chosen) / len(chosen) / 10.0


def rep_score(plan: FitnessPlan, desired: FitnessPlan) -> float:
    """Cosine similarity times min(1, |P|/|D|, |D|/|P|); 0 if either vector is zero."""
    _same_length(plan.reps, desired.reps)
    dot = sum(a * b for a, b in zip(plan.reps, desired.reps))
    n1 = math.sqrt(sum(a * a for a in plan.reps))
    n2 = math.sqrt(sum(b * b for b in desired.reps))
    if n1 == 0 or n2 == 0:
        return 0.0
    cosine = dot / (n1 * n2)
    ratio = min(1.0, n1 / n2, n2 / n1)
    return min(1.0, cosine) * ratio


def overlap_score(window: Sequence[FitnessPlan], positive: bool = False) -> float:
    """Minus the fraction of exercises used anywhere in the window (range [-1, 0]).

    With ``positive=True`` returns ``1 - used_fraction`` instead (range [0, 1]).
    """
    if not window:
        raise EmptyWindow("overlap needs at least one plan")
    n = len(window[0])
    used: set[int] = set()
    for plan in window:
        if len(plan) != n:
            raise MismatchedDimensions("plans in the window differ in length")
        used |= plan.used()
    if n == 0:
        return 0.0 if not positive else 1.0
    frac = len(used) / n
    return 1.0 - frac if positive else -frac


def combine(plan: float, rep: float, overlap: float, alpha: float, beta: float) -> float:
    return 10.0 * (alpha * plan + beta * rep + (1.0 - alpha - beta) * overlap)


def feedback_score(
    plan: FitnessPlan,
    state: EpisodeState,
    profile: UserProfile,
    bank: Sequence[ExerciseSpec],
    config: EpisodeConfig,
) -> float:
    """Satisfaction F_t for a feasible plan given the episode so far.

    Rep compares against the desired plan under the currently active
    emergencies; Overlap covers the last ``overlap_window`` plans including
    this one.
    """
    desired = desired_plan(profile, bank, state.active_emergencies)
    prior = state.plan_history[-(config.overlap_window - 1):] if config.overlap_window > 1 else []
    window = [*prior, plan]
    return combine(
        plan_score(plan, profile.preferences),
        rep_score(plan, desired),
        overlap_score(window, positive=config.overlap_positive),
        config.alpha,
        config.beta,
    )
