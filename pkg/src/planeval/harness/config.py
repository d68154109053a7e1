"""Experiment configuration: YAML file, CLI overrides, validation and hashing."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from planeval.agents.client import ChatEndpointConfig
from planeval.agents.prompts import load_template
from planeval.agents.scripted import SCRIPTED_AGENTS
from planeval.course.model import Difficulty
from planeval.course.plans import DELTA
from planeval.errors import ConfigError
from planeval.eval_core import VALID_MODES, Mode, Role
from planeval.fitness.model import EpisodeConfig

ENVIRONMENTS = ("fitness", "course")
ENDPOINT_AGENT = "endpoint"
DEFAULT_EPISODES = 100

# fields that change where or how fast a run happens, not what it computes
_NOT_HASHED = {"output_path", "parallelism", "record_timing", "dataset"}


@dataclass
class ExperimentConfig:
    environment: str = "course"
    role: Role = Role.SOLVER
    mode: Mode = Mode.DIRECT
    difficulty: Difficulty = Difficulty.EASY
    episode: EpisodeConfig = field(default_factory=EpisodeConfig)
    n_instances: int = DEFAULT_EPISODES
    n_candidates: int = 4
    delta: float = DELTA
    agent: str = "random"
    endpoint: ChatEndpointConfig | None = None
    seed: int = 0
    output_path: str | None = None
    dataset: str | None = None
    parallelism: int = 1
    reask: bool = False
    record_timing: bool = True

    def __post_init__(self):
        try:
            self.role = Role(self.role)
            self.mode = Mode(self.mode)
            self.difficulty = Difficulty(self.difficulty)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        try:
            if isinstance(self.episode, Mapping):
                self.episode = EpisodeConfig(**self.episode)
            if isinstance(self.endpoint, Mapping):
                self.endpoint = ChatEndpointConfig.from_dict(self.endpoint)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        self.validate()

    def validate(self) -> None:
        if self.environment not in ENVIRONMENTS:
            raise ConfigError(f"environment must be one of {ENVIRONMENTS}")
        if self.mode not in VALID_MODES[self.role]:
            raise ConfigError(f"mode {self.mode.value} is not valid for role {self.role.value}")
        if self.environment == "course" and self.mode is Mode.FEW_SHOT:
            raise ConfigError("FewShot needs an interaction history, which only the fitness environment has")
        if self.environment == "fitness" and self.role is Role.HEURISTIC and self.mode is Mode.ONE_SHOT:
            raise ConfigError("the one-shot exemplar exists for course ranking only")
        if self.n_instances < 1:
            raise ConfigError("n_instances must be at least 1")
        if self.role is Role.HEURISTIC and self.n_candidates not in (2, 4):
            raise ConfigError("n_candidates must be 2 or 4")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be at least 1")
        if self.agent == ENDPOINT_AGENT:
            if self.endpoint is None:
                raise ConfigError("agent 'endpoint' needs an endpoint section")
        elif self.agent not in SCRIPTED_AGENTS:
            raise ConfigError(f"unknown agent {self.agent!r}; use {ENDPOINT_AGENT!r} or one of {sorted(SCRIPTED_AGENTS)}")

    @property
    def agent_name(self) -> str:
        if self.agent == ENDPOINT_AGENT and self.endpoint is not None:
            return self.endpoint.model_name
        return self.agent

    @property
    def template(self):
        return load_template(self.role, self.mode, self.environment)

    @property
    def condition(self) -> str:
        if self.environment == "course":
            cond = self.difficulty.value
        elif self.role is Role.SOLVER:
            cond = f"{self.episode.iterations} iter, emergency p={self.episode.emergency_probability:g}"
        else:
            cond = "fitness"
        if self.role is Role.HEURISTIC:
            cond += f", {self.n_candidates} candidates"
        return cond

    def to_dict(self) -> dict[str, Any]:
        return {
            "environment": self.environment,
            "role": self.role.value,
            "mode": self.mode.value,
            "difficulty": self.difficulty.value,
            "episode": self.episode.to_dict(),
            "n_instances": self.n_instances,
            "n_candidates": self.n_candidates,
            "delta": self.delta,
            "agent": self.agent,
            "endpoint": self.endpoint.to_dict() if self.endpoint else None,
            "seed": self.seed,
            "output_path": self.output_path,
            "dataset": self.dataset,
            "parallelism": self.parallelism,
            "reask": self.reask,
            "record_timing": self.record_timing,
        }

    def config_hash(self) -> str:
        """Digest of everything that determines results, including the prompt text."""
        d = {k: v for k, v in self.to_dict().items() if k not in _NOT_HASHED}
        d["template_sha256"] = self.template.sha256
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)


def load_config_file(path: str | Path) -> dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    unknown = set(data) - {f.name for f in dataclasses.fields(ExperimentConfig)}
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    return data


def build_config(file_values: Mapping[str, Any] | None = None, overrides: Mapping[str, Any] | None = None) -> ExperimentConfig:
    """File values first, then non-None overrides; nested episode/endpoint keys merge."""
    merged: dict[str, Any] = dict(file_values or {})
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("episode", "endpoint") and isinstance(value, Mapping):
            base = dict(merged.get(key) or {})
            base.update({k: v for k, v in value.items() if v is not None})
            if base:
                merged[key] = base
        else:
            merged[key] = value
    try:
        return ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
