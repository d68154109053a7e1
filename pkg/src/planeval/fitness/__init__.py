"""Interactive fitness-planning environment with a simulated user."""

from planeval.fitness.constraints import check_feasibility, effective_constraints
from planeval.fitness.env import SolverMetrics, run_episode, sample_profile, step
from planeval.fitness.knapsack import desired_plan
from planeval.fitness.model import (
    EmergencyCondition,
    EmergencyEffect,
    EpisodeConfig,
    EpisodeState,
    ExerciseSpec,
    Feedback,
    FitnessPlan,
    UserProfile,
    load_emergency_bank,
    load_exercise_bank,
    load_user_bank,
)
from planeval.fitness.scoring import (
    feedback_score,
    overlap_score,
    plan_score,
    rep_score,
)
from planeval.fitness.tasks import build_heuristic_task, build_verifier_task

__all__ = [
    "EmergencyCondition",
    "EmergencyEffect",
    "EpisodeConfig",
    "EpisodeState",
    "ExerciseSpec",
    "Feedback",
    "FitnessPlan",
    "SolverMetrics",
    "UserProfile",
    "build_heuristic_task",
    "build_verifier_task",
    "check_feasibility",
    "desired_plan",
    "effective_constraints",
    "feedback_score",
    "load_emergency_bank",
    "load_exercise_bank",
    "load_user_bank",
    "overlap_score",
    "plan_score",
    "rep_score",
    "run_episode",
    "sample_profile",
    "step",
]
