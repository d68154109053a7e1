"""Task-agnostic grading: comparative heuristic, oracle ranking and ranking/verifier metrics."""

from __future__ import annotations

import enum
import itertools
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Protocol

from planeval.errors import BadK, EmptySet


class Role(str, enum.Enum):
    SOLVER = "Solver"
    VERIFIER = "Verifier"
    HEURISTIC = "Heuristic"


class Mode(str, enum.Enum):
    DIRECT = "Direct"
    COT = "CoT"
    ZERO_SHOT = "ZeroShot"
    FEW_SHOT = "FewShot"
    ONE_SHOT = "OneShot"


VALID_MODES = {
    Role.SOLVER: {Mode.DIRECT, Mode.COT},
    Role.VERIFIER: {Mode.ZERO_SHOT, Mode.FEW_SHOT},
    Role.HEURISTIC: {Mode.ZERO_SHOT, Mode.ONE_SHOT, Mode.FEW_SHOT},
}


class Orientation(str, enum.Enum):
    HIGHER_BETTER = "HigherBetter"
    LOWER_BETTER = "LowerBetter"


class OracleHeuristic(Protocol):
    """Ground-truth-aware scorer f(candidate, gold, problem) -> real."""

    orientation: Orientation

    def score(self, candidate: Any, gold: Any, problem: Any) -> float: ...


def oriented(score: float, orientation: Orientation) -> float:
    return score if orientation is Orientation.HIGHER_BETTER else -score


def compare(f: OracleHeuristic, y1: Any, y2: Any, gold: Any, problem: Any) -> int:
    """0 if y1 is at least as good as y2 (ties favour the first), else 1."""
    s1 = oriented(f.score(y1, gold, problem), f.orientation)
    s2 = oriented(f.score(y2, gold, problem), f.orientation)
    return 0 if s1 >= s2 else 1


def order_by_scores(scores: Sequence[float], orientation: Orientation) -> list[int]:
    """Stable best-first order of candidate indices."""
    keyed = [oriented(s, orientation) for s in scores]
    return sorted(range(len(scores)), key=lambda i: -keyed[i])


def oracle_rank(f: OracleHeuristic, candidates: Sequence[Any], gold: Any, problem: Any) -> list[int]:
    if len(candidates) < 2:
        raise ValueError("ranking needs at least two candidates")
    return order_by_scores([f.score(c, gold, problem) for c in candidates], f.orientation)


def hit_at_k(agent_order: Sequence[int], oracle_order: Sequence[int], k: int) -> bool:
    n = len(oracle_order)
    if not 1 <= k <= n:
        raise BadK(f"k={k} outside [1, {n}]")
    return oracle_order[0] in list(agent_order)[:k]


def pairwise_agreement(agent_order: Sequence[int], oracle_order: Sequence[int]) -> float:
    """Fraction of candidate pairs (both present in both orders) ranked the same way.

    Pairs involving a candidate missing from ``agent_order`` are skipped; with
    no comparable pair the agreement is 0.
    """
    pos_a = {c: i for i, c in enumerate(agent_order)}
    pos_o = {c: i for i, c in enumerate(oracle_order)}
    common = [c for c in oracle_order if c in pos_a]
    pairs = agree = 0
    for a, b in itertools.combinations(common, 2):
        pairs += 1
        if (pos_a[a] < pos_a[b]) == (pos_o[a] < pos_o[b]):
            agree += 1
    return agree / pairs if pairs else 0.0


def pass_rate(records: Sequence[bool]) -> float:
    if not records:
        raise EmptySet("pass rate of an empty set")
    return sum(bool(r) for r in records) / len(records)


def mean(values: Sequence[float]) -> float:
    if not values:
        raise EmptySet("mean of an empty set")
    return sum(values) / len(values)


def is_permutation(order: Sequence[int] | None, n: int) -> bool:
    return order is not None and sorted(order) == list(range(n))


@dataclass(frozen=True)
class RankingResult:
    agent_order: tuple[int, ...]
    oracle_order: tuple[int, ...]
    hit_at: dict[int, bool]
    pairwise_agreement: float
    malformed: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "agent_order": list(self.agent_order),
            "oracle_order": list(self.oracle_order),
            "hit_at": {str(k): v for k, v in self.hit_at.items()},
            "pairwise_agreement": self.pairwise_agreement,
            "malformed": self.malformed,
        }


def grade_ranking(agent_order: Sequence[int] | None, oracle_order: Sequence[int]) -> RankingResult:
    """Grade an agent ordering; partial or malformed orders miss every hit@k."""
    n = len(oracle_order)
    order = tuple(agent_order or ())
    malformed = not is_permutation(order, n)
    if malformed:
        # keep first occurrences of valid labels only
        seen: list[int] = []
        for c in order:
            if 0 <= c < n and c not in seen:
                seen.append(c)
        hits = {k: False for k in range(1, n + 1)}
        agreement = pairwise_agreement(seen, oracle_order)
    else:
        hits = {k: hit_at_k(order, oracle_order, k) for k in range(1, n + 1)}
        agreement = pairwise_agreement(order, oracle_order)
    return RankingResult(order, tuple(oracle_order), hits, agreement, malformed)


def candidate_label(i: int) -> str:
    return chr(ord("A") + i)


@dataclass
class RankingTask:
    """N candidate plans to be ordered best-first; oracle fields are hidden from agents."""

    problem_text: str
    candidates: list[str]
    oracle_scores: list[float]
    orientation: Orientation
    context: str | None = None
    environment: str = ""
    mode: Mode = Mode.ZERO_SHOT
    task_id: str = ""
    payload: dict[str, Any] = field(default_factory=dict)

    role = Role.HEURISTIC

    def __post_init__(self):
        if len(self.candidates) < 2:
            raise ValueError("a ranking task needs at least two candidates")
        if len(self.oracle_scores) != len(self.candidates):
            raise ValueError("oracle_scores must match candidates")

    @property
    def oracle_order(self) -> list[int]:
        return order_by_scores(self.oracle_scores, self.orientation)

    @property
    def labels(self) -> list[str]:
        return [candidate_label(i) for i in range(len(self.candidates))]


@dataclass
class VerifierTask:
    """One plan to judge; ``ground_truth`` holds {"feasible": bool, "optimal": bool | None}."""

    problem_text: str
    candidate_text: str
    ground_truth: dict[str, Any]
    context: str | None = None
    environment: str = ""
    mode: Mode = Mode.ZERO_SHOT
    task_id: str = ""
    payload: dict[str, Any] = field(default_factory=dict)

    role = Role.VERIFIER


def grade_verdict(verdict: dict[str, Any] | None, truth: dict[str, Any]) -> dict[str, Any]:
    """Compare a parsed verdict with ground truth.

    Optimality is graded only when the plan is truly feasible and the task
    carries an optimality label.
    """
    if verdict is None:
        feas_ok = False
        opt_ok = False if truth.get("optimal") is not None and truth["feasible"] else None
    else:
        feas_ok = verdict.get("feasible") is not None and bool(verdict["feasible"]) == bool(truth["feasible"])
        opt_ok = None
        if truth.get("optimal") is not None and truth["feasible"]:
            opt_ok = verdict.get("optimal") is not None and bool(verdict["optimal"]) == bool(truth["optimal"])
    passed = feas_ok and (opt_ok is None or opt_ok)
    return {"feasibility_correct": feas_ok, "optimality_correct": opt_ok, "pass": passed}
