"""Domain types for the fitness-planning environment and loaders for the shipped banks."""

from __future__ import annotations

import enum
import json
from collections.abc import Sequence
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from planeval.errors import MismatchedDimensions


class Intensity(str, enum.Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"


class Category(str, enum.Enum):
    AEROBIC = "Aerobic"
    ANAEROBIC = "Anaerobic"


@dataclass(frozen=True)
class ExerciseSpec:
    name: str
    duration_minutes: int
    intensity: Intensity
    gym_required: bool
    category: Category
    muscle_groups: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.duration_minutes < 1:
            raise ValueError(f"{self.name}: duration_minutes must be >= 1")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ExerciseSpec:
        return cls(
            name=d["name"],
            duration_minutes=int(d["duration_minutes"]),
            intensity=Intensity(d["intensity"]),
            gym_required=bool(d["gym_required"]),
            category=Category(d["category"]),
            muscle_groups=frozenset(d.get("muscle_groups", ())),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "duration_minutes": self.duration_minutes,
            "intensity": self.intensity.value,
            "gym_required": self.gym_required,
            "category": self.category.value,
            "muscle_groups": sorted(self.muscle_groups),
        }


@dataclass(frozen=True)
class UserProfile:
    preferences: tuple[float, ...]
    available_time_minutes: int
    gym_access: bool
    stamina: Intensity = Intensity.MEDIUM
    max_reps: int = 5
    excluded_muscle_groups: frozenset[str] = frozenset()
    name: str = "user"
    goal: str = ""

    def __post_init__(self):
        object.__setattr__(self, "preferences", tuple(float(u) for u in self.preferences))
        object.__setattr__(self, "excluded_muscle_groups", frozenset(self.excluded_muscle_groups))
        for u in self.preferences:
            if not 0.0 <= u <= 10.0:
                raise ValueError(f"preference {u} outside [0, 10]")
        if self.available_time_minutes < 0:
            raise ValueError("available_time_minutes must be non-negative")
        if self.max_reps < 1:
            raise ValueError("max_reps must be positive")

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "goal": self.goal,
            "preferences": list(self.preferences),
            "available_time_minutes": self.available_time_minutes,
            "gym_access": self.gym_access,
            "stamina": self.stamina.value,
            "max_reps": self.max_reps,
            "excluded_muscle_groups": sorted(self.excluded_muscle_groups),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any], bank: Sequence[ExerciseSpec] | None = None) -> UserProfile:
        prefs = d["preferences"]
        if isinstance(prefs, dict):
            if bank is None:
                raise ValueError("named preferences need an exercise bank")
            prefs = [prefs.get(ex.name, 0.0) for ex in bank]
        return cls(
            preferences=tuple(prefs),
            available_time_minutes=int(d["available_time_minutes"]),
            gym_access=bool(d["gym_access"]),
            stamina=Intensity(d.get("stamina", "Medium")),
            max_reps=int(d.get("max_reps", 5)),
            excluded_muscle_groups=frozenset(d.get("excluded_muscle_groups", ())),
            name=d.get("name", "user"),
            goal=d.get("goal", ""),
        )


@dataclass(frozen=True)
class FitnessPlan:
    reps: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "reps", tuple(int(r) for r in self.reps))
        if any(r < 0 for r in self.reps):
            raise ValueError("reps must be non-negative")

    def __len__(self):
        return len(self.reps)

    @classmethod
    def zeros(cls, k: int) -> FitnessPlan:
        return cls((0,) * k)

    def used(self) -> frozenset[int]:
        return frozenset(i for i, r in enumerate(self.reps) if r)

    def is_zero(self) -> bool:
        return not any(self.reps)


@dataclass(frozen=True)
class EmergencyEffect:
    kind: str  # ExcludeMuscleGroup | ReduceAvailableTime | ExcludeExercise
    group: str | None = None
    delta_minutes: int | None = None
    name: str | None = None

    KINDS = ("ExcludeMuscleGroup", "ReduceAvailableTime", "ExcludeExercise")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown emergency effect {self.kind!r}")
        if self.kind == "ReduceAvailableTime" and (self.delta_minutes is None or self.delta_minutes < 1):
            raise ValueError("delta_minutes must be >= 1")
        if self.kind == "ExcludeMuscleGroup" and not self.group:
            raise ValueError("ExcludeMuscleGroup needs a group")
        if self.kind == "ExcludeExercise" and not self.name:
            raise ValueError("ExcludeExercise needs an exercise name")

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind}
        if self.group is not None:
            d["group"] = self.group
        if self.delta_minutes is not None:
            d["delta_minutes"] = self.delta_minutes
        if self.name is not None:
            d["name"] = self.name
        return d


@dataclass(frozen=True)
class EmergencyCondition:
    description: str
    effect: EmergencyEffect

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> EmergencyCondition:
        return cls(description=d["description"], effect=EmergencyEffect(**d["effect"]))

    def to_dict(self) -> dict[str, Any]:
        return {"description": self.description, "effect": self.effect.to_dict()}


@dataclass(frozen=True)
class EpisodeConfig:
    alpha: float = 0.4
    beta: float = 0.4
    emergency_probability: float = 0.2
    overlap_window: int = 3
    iterations: int = 20
    seed: int = 0
    overlap_positive: bool = False
    cost_utility_fraction: float = 0.95

    def __post_init__(self):
        for name in ("alpha", "beta", "emergency_probability"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.alpha + self.beta > 1.0 + 1e-12:
            raise ValueError("alpha + beta must not exceed 1")
        if self.overlap_window < 1 or self.iterations < 1:
            raise ValueError("overlap_window and iterations must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "emergency_probability": self.emergency_probability,
            "overlap_window": self.overlap_window,
            "iterations": self.iterations,
            "seed": self.seed,
            "overlap_positive": self.overlap_positive,
            "cost_utility_fraction": self.cost_utility_fraction,
        }


@dataclass(frozen=True)
class Feedback:
    satisfaction: float
    feasible: bool
    violations: tuple[str, ...] = ()
    emergency: EmergencyCondition | None = None

    def __post_init__(self):
        object.__setattr__(self, "violations", tuple(self.violations))
        if self.feasible and self.violations:
            raise ValueError("a feasible feedback carries no violations")


@dataclass
class EpisodeState:
    plan_history: list[FitnessPlan] = field(default_factory=list)
    feedback_history: list[Feedback] = field(default_factory=list)
    active_emergencies: list[EmergencyCondition] = field(default_factory=list)
    iteration: int = 0

    def copy(self) -> EpisodeState:
        return EpisodeState(
            list(self.plan_history),
            list(self.feedback_history),
            list(self.active_emergencies),
            self.iteration,
        )


def check_dims(bank: Sequence[ExerciseSpec], *vectors: Sequence) -> None:
    k = len(bank)
    for v in vectors:
        if len(v) != k:
            raise MismatchedDimensions(f"expected length {k}, got {len(v)}")


def _read_json(path: str | Path | None, default_name: str) -> dict[str, Any]:
    if path is None:
        text = resources.files("planeval.fitness").joinpath("data").joinpath(default_name).read_text("utf-8")
        return json.loads(text)
    return json.loads(Path(path).read_text("utf-8"))


def load_exercise_bank(path: str | Path | None = None) -> list[ExerciseSpec]:
    data = _read_json(path, "exercises.json")
    bank = [ExerciseSpec.from_dict(d) for d in data["exercises"]]
    names = [ex.name for ex in bank]
    if len(set(names)) != len(names):
        raise ValueError("exercise names must be unique within a bank")
    return bank


def load_emergency_bank(path: str | Path | None = None) -> list[EmergencyCondition]:
    data = _read_json(path, "emergencies.json")
    return [EmergencyCondition.from_dict(d) for d in data["emergencies"]]


def load_user_bank(bank: Sequence[ExerciseSpec], path: str | Path | None = None) -> list[UserProfile]:
    data = _read_json(path, "users.json")
    return [UserProfile.from_dict(d, bank) for d in data["users"]]
