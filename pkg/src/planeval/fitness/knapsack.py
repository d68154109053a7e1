"""Exact bounded-knapsack solver for the user's desired plan."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from fractions import Fraction

from planeval.fitness.constraints import effective_constraints
from planeval.fitness.model import (
    EmergencyCondition,
    ExerciseSpec,
    FitnessPlan,
    UserProfile,
    check_dims,
)


def desired_plan(
    profile: UserProfile,
    bank: Sequence[ExerciseSpec],
    active_emergencies: Iterable[EmergencyCondition] = (),
) -> FitnessPlan:
    """Maximize sum(u_i * p_i) s.t. sum(t_i * p_i) <= T and 0 <= p_i <= max_reps.

    Inadmissible exercises (gym, exclusions, active emergencies) are pinned to
    zero. Among optimal vectors the lexicographically smallest one is returned.
    Objective arithmetic is exact (Fractions) so ties are detected reliably.
    """
    check_dims(bank, profile.preferences)
    c = effective_constraints(profile, active_emergencies)
    k = len(bank)
    cap = c.time_budget
    values = [Fraction(u) for u in profile.preferences]
    limits = [c.max_reps if c.admissible(ex) else 0 for ex in bank]
    weights = [ex.duration_minutes for ex in bank]

    # best[i][w]: optimum using exercises i..k-1 with w minutes left
    best = [[Fraction(0)] * (cap + 1) for _ in range(k + 1)]
    for i in range(k - 1, -1, -1):
        nxt = best[i + 1]
        row = best[i]
        t, v, lim = weights[i], values[i], limits[i]
        for w in range(cap + 1):
            top = nxt[w]
            for p in range(1, min(lim, w // t) + 1):
                cand = v * p + nxt[w - p * t]
                top = max(top, cand)
            row[w] = top

    # walk forward taking the smallest rep count that stays on an optimal path
    reps = []
    w = cap
    for i in range(k):
        t, v, lim = weights[i], values[i], limits[i]
        for p in range(min(lim, w // t) + 1):
            if v * p + best[i + 1][w - p * t] == best[i][w]:
                reps.append(p)
                w -= p * t
                break
    return FitnessPlan(tuple(reps))


def plan_objective(plan: FitnessPlan, profile: UserProfile) -> Fraction:
    return sum((Fraction(u) * r for u, r in zip(profile.preferences, plan.reps)), Fraction(0))
