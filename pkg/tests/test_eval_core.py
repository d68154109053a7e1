import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planeval.errors import BadK, EmptySet
from planeval.eval_core import (
    Orientation,
    RankingTask,
    compare,
    grade_ranking,
    grade_verdict,
    hit_at_k,
    mean,
    oracle_rank,
    order_by_scores,
    pairwise_agreement,
    pass_rate,
)


class Lookup:
    """Oracle heuristic that reads a candidate's score from a table."""

    def __init__(self, orientation=Orientation.HIGHER_BETTER):
        self.orientation = orientation

    def score(self, candidate, gold, problem):
        return problem[candidate]


def test_oracle_rank_example():
    scores = [5, 9, 1]
    assert oracle_rank(Lookup(), [0, 1, 2], None, scores) == [1, 0, 2]
    assert oracle_rank(Lookup(Orientation.LOWER_BETTER), [0, 1, 2], None, scores) == [2, 0, 1]


def test_ties_keep_input_order():
    assert order_by_scores([3, 3, 1], Orientation.HIGHER_BETTER) == [0, 1, 2]
    assert compare(Lookup(), 0, 1, None, [3, 3]) == 0
    assert compare(Lookup(), 1, 0, None, [3, 3]) == 0


def test_adjacent_transposition_agreement():
    assert pairwise_agreement([1, 0, 2, 3], [0, 1, 2, 3]) == pytest.approx(5 / 6)
    assert pairwise_agreement([3, 2, 1, 0], [0, 1, 2, 3]) == 0.0


def test_hit_at_k_bounds():
    with pytest.raises(BadK):
        hit_at_k([0, 1], [0, 1], 0)
    with pytest.raises(BadK):
        hit_at_k([0, 1], [0, 1], 3)
    assert hit_at_k([1, 0, 2], [0, 1, 2], 2)
    assert not hit_at_k([1, 0, 2], [0, 1, 2], 1)


def test_grade_ranking_malformed():
    r = grade_ranking([0, 0, 1], [0, 1, 2])
    assert r.malformed and not any(r.hit_at.values())
    assert grade_ranking(None, [0, 1]).malformed
    ok = grade_ranking([0, 1, 2], [0, 1, 2])
    assert ok.hit_at == {1: True, 2: True, 3: True} and ok.pairwise_agreement == 1.0


def test_grade_verdict_cases():
    feasible_opt = {"feasible": True, "optimal": True}
    assert grade_verdict({"feasible": True, "optimal": True}, feasible_opt)["pass"]
    assert not grade_verdict({"feasible": True, "optimal": False}, feasible_opt)["pass"]
    assert not grade_verdict(None, feasible_opt)["pass"]
    infeasible = {"feasible": False, "optimal": False}
    g = grade_verdict({"feasible": False, "optimal": True}, infeasible)
    assert g["pass"] and g["optimality_correct"] is None


def test_empty_aggregates():
    with pytest.raises(EmptySet):
        pass_rate([])
    with pytest.raises(EmptySet):
        mean([])
    assert pass_rate([True, False, True, True]) == 0.75


def test_ranking_task_validation():
    with pytest.raises(ValueError):
        RankingTask("p", ["A: x"], [1.0], Orientation.HIGHER_BETTER)
    with pytest.raises(ValueError):
        RankingTask("p", ["A: x", "B: y"], [1.0], Orientation.HIGHER_BETTER)


scores3 = st.lists(st.integers(-5, 5), min_size=3, max_size=3)


@settings(max_examples=500, deadline=None)
@given(scores3, st.sampled_from(list(Orientation)))
def test_compare_transitive_and_consistent(s, orient):
    f = Lookup(orient)
    for a, b, c in itertools.permutations(range(3)):
        if compare(f, a, b, None, s) == 0 and compare(f, b, c, None, s) == 0:
            assert compare(f, a, c, None, s) == 0
    order = oracle_rank(f, [0, 1, 2], None, s)
    for i, j in itertools.combinations(range(3), 2):
        assert compare(f, order[i], order[j], None, s) == 0


@settings(max_examples=300, deadline=None)
@given(st.permutations(list(range(5))), st.permutations(list(range(5))))
def test_hit_monotone_and_agreement_symmetric(agent, oracle):
    hits = [hit_at_k(agent, oracle, k) for k in range(1, 6)]
    assert hits == sorted(hits)
    assert hits[-1]
    assert pairwise_agreement(agent, oracle) == pytest.approx(pairwise_agreement(oracle, agent))
    assert 0.0 <= pairwise_agreement(agent, oracle) <= 1.0
