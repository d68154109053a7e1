import itertools
from fractions import Fraction

import numpy as np
import pytest

from planeval.errors import AgentFailure, EpisodeFinished, MismatchedDimensions
from planeval.eval_core import Mode
from planeval.fitness import (
    EmergencyCondition,
    EmergencyEffect,
    EpisodeConfig,
    EpisodeState,
    ExerciseSpec,
    FitnessPlan,
    UserProfile,
    build_heuristic_task,
    build_verifier_task,
    check_feasibility,
    desired_plan,
    effective_constraints,
    load_emergency_bank,
    load_exercise_bank,
    load_user_bank,
    run_episode,
    sample_profile,
    step,
)
from planeval.fitness.env import NO_PLAN, make_rng, metrics_from_transcript
from planeval.fitness.knapsack import plan_objective
from planeval.fitness.model import Category, Intensity
from planeval.fitness.tasks import (
    inject_violation,
    neighbor_plan,
    plan_from_dict,
    plan_to_dict,
    random_feasible_plan,
    render_history,
)

BANK = load_exercise_bank()
EMERGENCIES = load_emergency_bank()


def enumerate_best(profile, bank, emergencies=()):
    """Exhaustive oracle: lexicographically smallest plan with the maximum objective."""
    c = effective_constraints(profile, emergencies)
    ranges = [range(c.max_reps + 1) if c.admissible(ex) else range(1) for ex in bank]
    best, best_val = None, None
    for reps in itertools.product(*ranges):
        if sum(r * ex.duration_minutes for r, ex in zip(reps, bank)) > c.time_budget:
            continue
        val = sum(Fraction(u) * r for u, r in zip(profile.preferences, reps))
        if best_val is None or val > best_val:
            best, best_val = reps, val
    return FitnessPlan(best), best_val


def random_small_case(rng):
    k = int(rng.integers(1, 6))
    groups = ["arms", "legs", "core"]
    bank = [
        ExerciseSpec(
            name=f"ex{i}",
            duration_minutes=int(rng.integers(1, 16)),
            intensity=Intensity.LOW,
            gym_required=bool(rng.random() < 0.3),
            category=Category.AEROBIC,
            muscle_groups=frozenset({groups[int(rng.integers(3))]}),
        )
        for i in range(k)
    ]
    prof = UserProfile(
        preferences=tuple(int(x) for x in rng.integers(0, 11, size=k)),
        available_time_minutes=int(rng.integers(0, 50)),
        gym_access=bool(rng.random() < 0.5),
        max_reps=int(rng.integers(1, 4)),
        excluded_muscle_groups=frozenset({"core"}) if rng.random() < 0.3 else frozenset(),
    )
    return prof, bank


class TestKnapsack:
    def test_matches_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(150):
            prof, bank = random_small_case(rng)
            plan = desired_plan(prof, bank)
            oracle, val = enumerate_best(prof, bank)
            assert plan == oracle
            assert plan_objective(plan, prof) == val

    def test_always_feasible_under_emergencies(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            prof = sample_profile(BANK, rng)
            ems = [EMERGENCIES[int(i)] for i in rng.choice(len(EMERGENCIES), 2, replace=False)]
            plan = desired_plan(prof, BANK, ems)
            assert check_feasibility(plan, prof, BANK, ems)[0]

    def test_tie_break_is_lexicographic(self):
        bank = [
            ExerciseSpec("a", 10, Intensity.LOW, False, Category.AEROBIC),
            ExerciseSpec("b", 10, Intensity.LOW, False, Category.AEROBIC),
        ]
        prof = UserProfile((5, 5), 10, True, max_reps=1)
        assert desired_plan(prof, bank).reps == (0, 1)

    def test_zero_budget(self):
        prof = UserProfile((10,) * len(BANK), 0, True)
        assert desired_plan(prof, BANK).is_zero()


class TestConstraints:
    def test_joe_refinement_plans(self):
        joe = load_user_bank(BANK)[0]
        first = plan_from_dict({"Jogging": 1, "Jump Rope": 2, "Push-Up": 2, "Shoulder Shrugs": 1, "Lunges": 2}, BANK)
        ok, violations = check_feasibility(first, joe, BANK)
        assert not ok
        assert any("79 minutes" in v for v in violations)
        refined = plan_from_dict({"Jogging": 1, "Jump Rope": 1, "Push-Up": 3, "Lunges": 1}, BANK)
        assert check_feasibility(refined, joe, BANK) == (True, [])

    def test_each_violation_kind(self):
        prof = UserProfile((5,) * len(BANK), 30, False, max_reps=2, excluded_muscle_groups={"core"})
        reps = [0] * len(BANK)
        reps[1] = 1  # Cycling: gym, 45 minutes
        reps[4] = 3  # Push-Up over the rep limit
        reps[8] = 1  # Plank works the core
        ok, v = check_feasibility(FitnessPlan(tuple(reps)), prof, BANK)
        assert not ok
        text = " | ".join(v)
        for fragment in ("time budget", "max reps", "gym required", "excluded muscle group"):
            assert fragment in text

    def test_emergency_effects_fold(self):
        prof = UserProfile((5,) * len(BANK), 60, True)
        c = effective_constraints(prof, EMERGENCIES)
        assert c.time_budget == 35
        assert "Jogging" in c.excluded_exercises
        assert {"back", "legs"} <= c.excluded_groups

    def test_time_never_negative(self):
        prof = UserProfile((5,) * len(BANK), 5, True)
        em = EmergencyCondition("x", EmergencyEffect("ReduceAvailableTime", delta_minutes=15))
        assert effective_constraints(prof, [em]).time_budget == 0

    def test_dimension_mismatch(self):
        prof = UserProfile((5,) * len(BANK), 60, True)
        with pytest.raises(MismatchedDimensions):
            check_feasibility(FitnessPlan((1, 2)), prof, BANK)


class TestModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            UserProfile((11,), 10, True)
        with pytest.raises(ValueError):
            FitnessPlan((-1,))
        with pytest.raises(ValueError):
            EpisodeConfig(alpha=0.7, beta=0.7)
        with pytest.raises(ValueError):
            EmergencyEffect("ReduceAvailableTime", delta_minutes=0)
        with pytest.raises(ValueError):
            EmergencyEffect("Teleport")

    def test_profile_round_trip(self):
        prof = sample_profile(BANK, make_rng(5))
        assert UserProfile.from_dict(prof.to_dict()) == prof

    def test_plan_dict_round_trip(self):
        plan = FitnessPlan((1, 0, 0, 2) + (0,) * 8)
        assert plan_from_dict(plan_to_dict(plan, BANK), BANK) == plan
        with pytest.raises(KeyError):
            plan_from_dict({"Moonwalk": 1}, BANK)
        with pytest.raises(ValueError):
            plan_from_dict({"Jogging": 1.5}, BANK)


class _Fixed:
    def __init__(self, plan):
        self.plan = plan

    def propose(self, state, profile, bank, config):
        return self.plan


class _Failing:
    def propose(self, state, profile, bank, config):
        raise AgentFailure("nothing to say")


class TestEpisode:
    prof = UserProfile((5,) * len(BANK), 60, True)

    def test_step_advances_and_finishes(self):
        cfg = EpisodeConfig(iterations=2, emergency_probability=0.0)
        state = EpisodeState()
        rng = make_rng(0)
        plan = desired_plan(self.prof, BANK)
        fb = step(state, plan, self.prof, BANK, cfg, rng, EMERGENCIES)
        assert fb.feasible and fb.satisfaction > 0
        step(state, None, self.prof, BANK, cfg, rng, EMERGENCIES)
        assert state.feedback_history[-1].violations == (NO_PLAN,)
        assert state.iteration == 2
        with pytest.raises(EpisodeFinished):
            step(state, plan, self.prof, BANK, cfg, rng, EMERGENCIES)

    def test_emergencies_always_fire_with_probability_one(self):
        cfg = EpisodeConfig(iterations=5, emergency_probability=1.0)
        state, _, rows = run_episode(_Fixed(FitnessPlan.zeros(len(BANK))), self.prof, BANK, cfg, EMERGENCIES)
        assert all(r["emergency"] is not None for r in rows)
        assert len(state.active_emergencies) == len(set(state.active_emergencies))

    def test_emergency_stream_independent_of_agent(self):
        cfg = EpisodeConfig(iterations=10, emergency_probability=0.5, seed=9)
        _, _, a = run_episode(_Fixed(FitnessPlan.zeros(len(BANK))), self.prof, BANK, cfg, EMERGENCIES)
        _, _, b = run_episode(_Failing(), self.prof, BANK, cfg, EMERGENCIES)
        assert [r["emergency"] for r in a] == [r["emergency"] for r in b]

    def test_failing_agent_is_infeasible(self):
        cfg = EpisodeConfig(iterations=3)
        _, m, rows = run_episode(_Failing(), self.prof, BANK, cfg, EMERGENCIES)
        assert m.feasibility == 0.0 and m.delivery_rate == 0.0
        assert m.cost_utility == 4
        assert all(r["plan"] is None for r in rows)

    def test_desired_agent_reaches_ceiling_first_turn(self):
        class Oracle:
            def propose(self, state, profile, bank, config):
                return desired_plan(profile, bank, state.active_emergencies)

        cfg = EpisodeConfig(iterations=4, emergency_probability=0.0)
        _, m, _ = run_episode(Oracle(), self.prof, BANK, cfg, EMERGENCIES)
        assert m.feasibility == 1.0
        assert m.cost_utility == 1

    def test_metrics_regrade_matches(self):
        cfg = EpisodeConfig(iterations=6, seed=2)
        rng = make_rng(1)
        plan = random_feasible_plan(self.prof, BANK, [], rng)
        _, m, rows = run_episode(_Fixed(plan), self.prof, BANK, cfg, EMERGENCIES)
        assert metrics_from_transcript(rows, len(BANK)) == m

    def test_metrics_empty(self):
        assert metrics_from_transcript([], 12).cost_utility == 1


class TestCandidates:
    def test_random_and_neighbor_stay_feasible(self):
        rng = make_rng(4)
        for _ in range(40):
            prof = sample_profile(BANK, rng)
            p = random_feasible_plan(prof, BANK, [], rng)
            assert check_feasibility(p, prof, BANK)[0]
            q = neighbor_plan(p, prof, BANK, [], rng)
            assert check_feasibility(q, prof, BANK)[0]
            assert sum(abs(a - b) for a, b in zip(p.reps, q.reps)) <= 1

    def test_inject_violation_breaks_plan(self):
        rng = make_rng(8)
        for _ in range(40):
            prof = sample_profile(BANK, rng)
            p = random_feasible_plan(prof, BANK, [], rng)
            bad, kind = inject_violation(p, prof, BANK, [], rng)
            assert not check_feasibility(bad, prof, BANK)[0], kind


class TestTasks:
    def test_verifier_truth_matches_checker(self):
        for seed in range(30):
            task, truth = build_verifier_task(Mode.ZERO_SHOT, seed, BANK, EMERGENCIES)
            prof = UserProfile.from_dict(task.payload["profile"])
            ems = [EmergencyCondition.from_dict(e) for e in task.payload["active_emergencies"]]
            ok, _ = check_feasibility(FitnessPlan(task.payload["candidate"]), prof, BANK, ems)
            assert ok == truth == task.ground_truth["feasible"]
            assert "P_0" in task.candidate_text

    def test_verifier_balance(self):
        truths = [build_verifier_task(Mode.ZERO_SHOT, s, BANK, EMERGENCIES)[1] for s in range(200)]
        assert 0.35 < sum(truths) / len(truths) < 0.65

    def test_fewshot_verifier_labels_follow_history(self):
        task, _ = build_verifier_task(Mode.FEW_SHOT, 3, BANK, EMERGENCIES)
        n = len(task.payload["history_plans"])
        assert task.candidate_text.startswith(f"P_{n + 1}:")
        assert "F_0:" in task.context and "P_1:" in task.context

    @pytest.mark.parametrize("n", [2, 4])
    def test_heuristic_unique_best(self, n):
        for seed in range(10):
            task, order = build_heuristic_task(Mode.ZERO_SHOT, n, seed, BANK, EMERGENCIES)
            assert sorted(order) == list(range(n))
            best = task.oracle_scores[order[0]]
            assert sum(s == best for s in task.oracle_scores) == 1
            assert task.candidates[0].startswith("A:")

    def test_heuristic_deterministic(self):
        a, _ = build_heuristic_task(Mode.FEW_SHOT, 4, 17, BANK, EMERGENCIES)
        b, _ = build_heuristic_task(Mode.FEW_SHOT, 4, 17, BANK, EMERGENCIES)
        assert a.candidates == b.candidates and a.context == b.context


def test_history_rendering_indices():
    state = EpisodeState()
    cfg = EpisodeConfig(iterations=3, emergency_probability=0.0)
    prof = UserProfile((5,) * len(BANK), 60, True)
    rng = make_rng(0)
    for _ in range(2):
        step(state, FitnessPlan.zeros(len(BANK)), prof, BANK, cfg, rng, EMERGENCIES)
    lines = render_history(state, BANK).splitlines()
    assert [ln.split(":")[0] for ln in lines] == ["P_1", "F_0", "P_2", "F_1"]
