"""Run one role evaluation over many instances and stream graded records to JSONL."""

from __future__ import annotations

import json
import logging
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from planeval.agents.base import AgentTranscript, ChatAgent
from planeval.agents.parsing import parse_answer
from planeval.agents.prompts import render_prompt
from planeval.agents.scripted import make_scripted_agent
from planeval.course.generator import generate_instance, instance_seed
from planeval.course.io import InstanceRecord, load_instance
from planeval.course.tasks import (
    CourseSolverTask,
    build_course_heuristic_task,
    build_course_verifier_task,
)
from planeval.errors import AgentFailure, ConfigError, DegenerateTask, EndpointError
from planeval.eval_core import Role
from planeval.fitness.env import make_rng, run_episode, sample_profile
from planeval.fitness.model import load_emergency_bank, load_exercise_bank
from planeval.fitness.tasks import (
    FitnessSolverTask,
    build_heuristic_task,
    build_verifier_task,
    plan_from_dict,
)
from planeval.harness.config import ENDPOINT_AGENT, ExperimentConfig
from planeval.harness.records import EvalRecord, JsonlWriter, grade, recorded_ids

log = logging.getLogger(__name__)

REASK_TEXT = "Your reply did not contain a usable answer. Reply again with only the answer block in the required format."
_ORDER_STREAM = 0x4F52
_PROFILE_STREAM = 0x5052


@dataclass(frozen=True)
class WorkItem:
    instance_id: str
    seed: int
    record: InstanceRecord | None = None


def make_agent(cfg: ExperimentConfig):
    if cfg.agent == ENDPOINT_AGENT:
        return ChatAgent(cfg.endpoint)
    return make_scripted_agent(cfg.agent, cfg.seed)


def _dataset_files(cfg: ExperimentConfig) -> list[Path]:
    root = Path(cfg.dataset)
    manifest = root / "manifest.json"
    level = cfg.difficulty.value
    if manifest.exists():
        data = json.loads(manifest.read_text(encoding="utf-8"))
        entries = data.get("levels", {}).get(level, {}).get("files", [])
        files = [root / e["file"] for e in entries]
    else:
        files = sorted(root.glob(f"{level.lower()}_*.json"))
    if not files:
        raise ConfigError(f"no {level} instances found in {root}")
    return files


def work_items(cfg: ExperimentConfig) -> list[WorkItem]:
    n = cfg.n_instances
    if cfg.environment == "course" and cfg.dataset:
        files = _dataset_files(cfg)
        if len(files) < n:
            log.warning("dataset holds %d %s instances; evaluating all of them", len(files), cfg.difficulty.value)
        return [
            WorkItem(f.stem, instance_seed(cfg.seed, i), load_instance(f)) for i, f in enumerate(files[:n])
        ]
    if cfg.environment == "course":
        prefix = cfg.difficulty.value.lower()
        return [WorkItem(f"{prefix}_{i:04d}", instance_seed(cfg.seed, i)) for i in range(n)]
    kind = {Role.SOLVER: "episode", Role.VERIFIER: "verify", Role.HEURISTIC: "rank"}[cfg.role]
    return [WorkItem(f"fitness_{kind}_{i:04d}", instance_seed(cfg.seed, i)) for i in range(n)]


def evaluation_order(cfg: ExperimentConfig, n: int) -> list[int]:
    """Seed-shuffled order, so a partial run is an unbiased sample."""
    return [int(i) for i in make_rng([cfg.seed, _ORDER_STREAM]).permutation(n)]


def _converse(agent, task, messages, role, cfg, transcript: AgentTranscript):
    for m in messages:
        transcript.add(m["role"], m["content"])
    reply = agent.respond(task, messages)
    transcript.add("agent", reply.text)
    transcript.add_usage(reply.usage)
    parsed = parse_answer(role, reply.text)
    if not parsed.ok and cfg.reask:
        follow = list(messages) + [
            {"role": "assistant", "content": reply.text},
            {"role": "user", "content": REASK_TEXT},
        ]
        transcript.add("user", REASK_TEXT)
        reply = agent.respond(task, follow)
        transcript.add("agent", reply.text)
        transcript.add_usage(reply.usage)
        parsed = parse_answer(role, reply.text)
    transcript.parsed_answer = parsed.value
    transcript.parse_errors = list(parsed.errors)
    return parsed


class _EpisodeBridge:
    """Adapts a text agent to the environment's propose() interface, logging every turn."""

    def __init__(self, agent, cfg: ExperimentConfig, episode_id: str, transcript: AgentTranscript):
        self.agent = agent
        self.cfg = cfg
        self.episode_id = episode_id
        self.transcript = transcript
        self.template = cfg.template

    def propose(self, state, profile, bank, config):
        task = FitnessSolverTask(profile, bank, state, config, self.cfg.mode, task_id=self.episode_id)
        messages = render_prompt(self.template, task)
        try:
            parsed = _converse(self.agent, task, messages, Role.SOLVER, self.cfg, self.transcript)
        except EndpointError as exc:
            self.transcript.add("error", f"{type(exc).__name__}: {exc}")
            raise AgentFailure(str(exc)) from exc
        if not parsed.ok:
            raise AgentFailure("; ".join(parsed.errors))
        try:
            return plan_from_dict(parsed.value, bank)
        except (KeyError, ValueError, TypeError) as exc:
            self.transcript.parse_errors.append(f"invalid plan: {exc}")
            raise AgentFailure(str(exc)) from exc


def _fitness_episode(cfg, agent, item: WorkItem, banks):
    bank, emergency_bank = banks
    profile = sample_profile(bank, make_rng([item.seed, _PROFILE_STREAM]))
    episode = replace(cfg.episode, seed=item.seed)
    transcript = AgentTranscript()
    bridge = _EpisodeBridge(agent, cfg, item.instance_id, transcript)
    _, _, rows = run_episode(bridge, profile, bank, episode, emergency_bank, rng=make_rng(item.seed))
    truth = {
        "k": len(bank),
        "cost_utility_fraction": episode.cost_utility_fraction,
        "profile": profile.to_dict(),
        "episode": episode.to_dict(),
    }
    t = transcript.to_dict()
    t["iterations"] = rows
    return t, truth


def _build_task(cfg: ExperimentConfig, item: WorkItem, banks):
    """Task object and its ground truth for one single-turn evaluation."""
    bank, emergency_bank = banks
    if cfg.environment == "course":
        record = item.record or generate_instance(cfg.difficulty, item.seed)
        if cfg.role is Role.SOLVER:
            task = CourseSolverTask(record, cfg.mode, task_id=item.instance_id)
            return task, {"instance": record.to_json(), "delta": cfg.delta}
        if cfg.role is Role.VERIFIER:
            task, truth = build_course_verifier_task(record, item.seed, cfg.mode, cfg.delta)
            return task, dict(truth)
        task, oracle = build_course_heuristic_task(record, cfg.n_candidates, cfg.mode, item.seed)
        return task, {"oracle_order": oracle, "oracle_scores": task.oracle_scores}
    episode = replace(cfg.episode, seed=item.seed)
    if cfg.role is Role.VERIFIER:
        task, _ = build_verifier_task(cfg.mode, item.seed, bank, emergency_bank, episode)
        return task, dict(task.ground_truth)
    task, oracle = build_heuristic_task(cfg.mode, cfg.n_candidates, item.seed, bank, emergency_bank, episode)
    return task, {"oracle_order": oracle, "oracle_scores": task.oracle_scores}


def evaluate_item(cfg: ExperimentConfig, agent, item: WorkItem, order_index: int, config_hash: str, banks) -> EvalRecord:
    start = time.perf_counter()
    error = None
    extra: dict[str, Any] = {}
    if cfg.role is Role.SOLVER and cfg.environment == "fitness":
        transcript, truth = _fitness_episode(cfg, agent, item, banks)
        outcome = grade(cfg.role, cfg.environment, transcript, truth)
    else:
        try:
            task, truth = _build_task(cfg, item, banks)
        except DegenerateTask as exc:
            task, truth, error = None, {}, f"{type(exc).__name__}: {exc}"
        if task is None:
            transcript, outcome = AgentTranscript().to_dict(), {"skipped": True}
        else:
            extra["task_payload"] = task.payload
            tr = AgentTranscript()
            try:
                _converse(agent, task, render_prompt(cfg.template, task), cfg.role, cfg, tr)
            except (EndpointError, AgentFailure) as exc:
                error = f"{type(exc).__name__}: {exc}"
                tr.parse_errors.append(error)
            transcript = tr.to_dict()
            outcome = grade(cfg.role, cfg.environment, transcript, truth)
    wall = round(time.perf_counter() - start, 6) if cfg.record_timing else None
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if cfg.record_timing else None
    return EvalRecord(
        config_hash=config_hash,
        environment=cfg.environment,
        role=cfg.role.value,
        mode=cfg.mode.value,
        agent=cfg.agent_name,
        condition=cfg.condition,
        instance_id=item.instance_id,
        seed=item.seed,
        order_index=order_index,
        transcript=transcript,
        ground_truth=truth,
        outcome=outcome,
        error=error,
        wall_time=wall,
        timestamp=stamp,
        extra=extra,
    )


def run_experiment(
    cfg: ExperimentConfig,
    agent=None,
    on_record: Callable[[EvalRecord], None] | None = None,
) -> Path:
    """Evaluate every pending instance and append its record to ``cfg.output_path``.

    Instances already recorded in the output file under the same config hash
    are skipped, so an interrupted run can simply be restarted. Records are written in the
    seed-shuffled evaluation order regardless of parallelism.
    """
    if not cfg.output_path:
        raise ConfigError("an output path is required")
    out = Path(cfg.output_path)
    items = work_items(cfg)
    config_hash = cfg.config_hash()
    done = recorded_ids(out, config_hash)
    order = evaluation_order(cfg, len(items))
    pending = [(pos, items[i]) for pos, i in enumerate(order) if items[i].instance_id not in done]
    agent = agent or make_agent(cfg)
    banks = (load_exercise_bank(), load_emergency_bank())
    with JsonlWriter(out) as writer, ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
        futures = [pool.submit(evaluate_item, cfg, agent, item, pos, config_hash, banks) for pos, item in pending]
        try:
            for fut in futures:
                rec = fut.result()
                writer.write(rec)
                if on_record is not None:
                    on_record(rec)
        except BaseException:
            for f in futures:
                f.cancel()
            raise
    return out
