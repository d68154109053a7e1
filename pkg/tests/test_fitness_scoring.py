import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planeval.errors import EmptyWindow, MismatchedDimensions
from planeval.fitness import (
    EpisodeConfig,
    EpisodeState,
    FitnessPlan,
    feedback_score,
    load_exercise_bank,
)
from planeval.fitness.model import UserProfile
from planeval.fitness.scoring import combine, overlap_score, plan_score, rep_score


def P(*reps):
    return FitnessPlan(tuple(reps))


class TestPlanScore:
    def test_all_selected_preferences_ten(self):
        assert plan_score(P(1, 3, 0), [10, 10, 2]) == 1.0

    def test_hand_example(self):
        assert plan_score(P(1, 0, 2), [5, 0, 7]) == pytest.approx(0.6)

    def test_zero_plan(self):
        assert plan_score(P(0, 0, 0), [5, 5, 5]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(MismatchedDimensions):
            plan_score(P(1, 0), [1, 2, 3])


class TestRepScore:
    def test_identical(self):
        assert rep_score(P(1, 2, 3), P(1, 2, 3)) == pytest.approx(1.0)

    def test_double(self):
        assert rep_score(P(2, 4, 6), P(1, 2, 3)) == pytest.approx(0.5)

    def test_orthogonal(self):
        assert rep_score(P(1, 0), P(0, 1)) == 0.0

    def test_zero_vectors(self):
        assert rep_score(P(0, 0), P(1, 1)) == 0.0
        assert rep_score(P(1, 1), P(0, 0)) == 0.0

    def test_hand_computed_partial(self):
        # cos = 1/sqrt(2), norms 1 and sqrt(2)
        expected = (1 / math.sqrt(2)) * (1 / math.sqrt(2))
        assert rep_score(P(1, 0), P(1, 1)) == pytest.approx(expected)


class TestOverlap:
    def test_all_zero(self):
        assert overlap_score([P(0, 0, 0), P(0, 0, 0)]) == 0.0

    def test_everything_used(self):
        assert overlap_score([P(1, 0), P(0, 2)]) == -1.0

    def test_half(self):
        assert overlap_score([P(1, 0, 0, 0), P(0, 0, 3, 0)]) == -0.5

    def test_positive_flag(self):
        assert overlap_score([P(1, 0, 0, 0), P(0, 0, 3, 0)], positive=True) == 0.5

    def test_empty_window(self):
        with pytest.raises(EmptyWindow):
            overlap_score([])

    def test_ragged_window(self):
        with pytest.raises(MismatchedDimensions):
            overlap_score([P(1, 0), P(1, 0, 0)])


class TestCombine:
    def test_best_case(self):
        assert combine(1, 1, 0, 0.4, 0.4) == pytest.approx(8.0)

    def test_alpha_one(self):
        assert combine(0.37, 0.9, -1, 1.0, 0.0) == pytest.approx(3.7)

    def test_negative_floor(self):
        assert combine(0, 0, -1, 0.4, 0.4) == pytest.approx(-2.0)


def test_feedback_score_on_desired_plan_alone():
    bank = load_exercise_bank()[:3]
    prof = UserProfile(preferences=(10, 10, 10), available_time_minutes=60, gym_access=True, max_reps=1)
    cfg = EpisodeConfig(alpha=0.4, beta=0.4, overlap_window=1)
    # desired plan takes everything that fits: Jogging 30 + Cycling 45 > 60, so lexicographic choice decides
    from planeval.fitness import desired_plan

    best = desired_plan(prof, bank)
    f = feedback_score(best, EpisodeState(), prof, bank, cfg)
    used = sum(1 for r in best.reps if r) / 3
    assert f == pytest.approx(10 * (0.4 * 1.0 + 0.4 * 1.0 + 0.2 * -used))


reps = st.lists(st.integers(0, 6), min_size=1, max_size=8)


@settings(max_examples=300, deadline=None)
@given(reps, st.data())
def test_ranges(a, data):
    b = data.draw(st.lists(st.integers(0, 6), min_size=len(a), max_size=len(a)))
    prefs = data.draw(st.lists(st.floats(0, 10), min_size=len(a), max_size=len(a)))
    ps = plan_score(P(*a), prefs)
    rs = rep_score(P(*a), P(*b))
    ov = overlap_score([P(*a), P(*b)])
    assert 0.0 <= ps <= 1.0
    assert 0.0 <= rs <= 1.0 + 1e-12
    assert -1.0 <= ov <= 0.0
    assert rs == pytest.approx(rep_score(P(*b), P(*a)))
    alpha = data.draw(st.floats(0, 1))
    beta = data.draw(st.floats(0, 1 - alpha))
    assert -10.0 - 1e-9 <= combine(ps, rs, ov, alpha, beta) <= 10.0 + 1e-9


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=6).filter(any), st.integers(1, 5))
def test_scaling_law(x, c):
    assert rep_score(P(*[c * v for v in x]), P(*x)) == pytest.approx(min(c, 1 / c))
    assert rep_score(P(*x), P(*x)) == pytest.approx(1.0)
