"""Prompt templates stored as data files, and deterministic prompt rendering."""

from __future__ import annotations

import hashlib
import re
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cache
from importlib import resources
from typing import Any

from planeval.errors import UnboundPlaceholder
from planeval.eval_core import VALID_MODES, Mode, RankingTask, Role, VerifierTask

PLACEHOLDER = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")
SECTION_BREAK = "\n---\n"


@dataclass(frozen=True)
class PromptTemplate:
    """System text plus a user-message body with ``${name}`` placeholders.

    ``output_schema`` is appended verbatim after the rendered body.
    """

    role: Role
    mode: Mode
    template_text: str
    output_schema: str
    system_text: str = ""
    name: str = ""

    @property
    def placeholders(self) -> frozenset[str]:
        return frozenset(PLACEHOLDER.findall(self.template_text))

    @property
    def sha256(self) -> str:
        h = hashlib.sha256()
        for part in (self.system_text, self.template_text, self.output_schema):
            h.update(part.encode("utf-8"))
            h.update(b"\0")
        return h.hexdigest()

    def fill(self, bindings: Mapping[str, str]) -> str:
        missing = sorted(self.placeholders - set(bindings))
        if missing:
            raise UnboundPlaceholder(f"template {self.name or self.role.value} has unbound placeholders: {missing}")
        return PLACEHOLDER.sub(lambda m: str(bindings[m.group(1)]), self.template_text)


def _read(folder: str, name: str) -> str:
    return resources.files("planeval.agents").joinpath(folder).joinpath(name).read_text(encoding="utf-8")


@cache
def load_template(role: Role | str, mode: Mode | str, environment: str) -> PromptTemplate:
    role, mode = Role(role), Mode(mode)
    if mode not in VALID_MODES[role]:
        raise ValueError(f"mode {mode.value} is not valid for role {role.value}")
    fname = f"{role.value.lower()}_{mode.value.lower()}.txt"
    system, _, body = _read("templates", fname).partition(SECTION_BREAK)
    schema = _read("schemas", f"{environment}_{role.value.lower()}.txt")
    return PromptTemplate(
        role=role,
        mode=mode,
        template_text=body.rstrip("\n"),
        output_schema=schema.rstrip("\n"),
        system_text=system.strip(),
        name=f"{environment}/{fname}",
    )


def task_bindings(task: Any) -> dict[str, str]:
    context = (task.context or "").strip()
    out = {"problem": task.problem_text, "context": context + "\n\n" if context else ""}
    if isinstance(task, RankingTask):
        out["candidates"] = "\n".join(task.candidates)
        out["labels"] = ", ".join(task.labels)
        out["n_candidates"] = str(len(task.candidates))
    elif isinstance(task, VerifierTask):
        out["candidate"] = task.candidate_text
    return out


def render_prompt(template: PromptTemplate, task: Any) -> list[dict[str, str]]:
    """Chat messages for ``task``: a system message, then the filled body with the schema appended."""
    if Role(task.role) is not template.role:
        raise ValueError(f"template is for {template.role.value}, task is {Role(task.role).value}")
    body = template.fill(task_bindings(task)) + "\n\n" + template.output_schema
    messages = []
    if template.system_text:
        messages.append({"role": "system", "content": template.system_text})
    messages.append({"role": "user", "content": body})
    return messages
