"""Lenient extraction of structured answers from free-form model replies."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

from planeval.eval_core import Role

NO_ANSWER = "no answer found"

_FENCE = re.compile(r"```[ \t]*([A-Za-z0-9_-]*)[ \t]*\r?\n(.*?)```", re.DOTALL)
_VERDICT = re.compile(
    r"\b(not\s+feasible|infeasible|inadmissible|not\s+admissible|feasible|admissible|yes|no|true|false)\b",
    re.IGNORECASE,
)
_OPTIMAL = re.compile(r"\boptimal\b[\s\"']*[:=]?[\s\"']*(yes|no|true|false)\b", re.IGNORECASE)
_CHAIN = re.compile(r"\b[A-Z](?:\s*(?:>|,|>>)\s*[A-Z]\b)+")


@dataclass
class ParsedAnswer:
    value: Any = None
    errors: list[str] = field(default_factory=list)
    source: str = ""  # "fenced" or "fallback"

    @property
    def ok(self) -> bool:
        return self.value is not None and not self.errors

    def to_dict(self) -> dict[str, Any]:
        return {"value": self.value, "errors": list(self.errors), "source": self.source}


def format_answer(value: Any) -> str:
    """The canonical answer block every template asks for."""
    return "```json\n" + json.dumps(value) + "\n```"


def _json_objects(text: str) -> list[Any]:
    """Outermost JSON values that start with '{' or '[' in order of appearance."""
    dec = json.JSONDecoder()
    out = []
    i = 0
    while i < len(text):
        if text[i] in "{[":
            try:
                val, end = dec.raw_decode(text, i)
            except ValueError:
                i += 1
                continue
            out.append(val)
            i = end
        else:
            i += 1
    return out


def _as_bool(v: Any) -> bool | None:
    if isinstance(v, bool):
        return v
    if isinstance(v, str):
        t = v.strip().lower()
        if t in ("yes", "true", "feasible", "admissible", "optimal"):
            return True
        if t in ("no", "false", "infeasible", "inadmissible", "not feasible", "not optimal"):
            return False
    return None


def _token_bool(token: str) -> bool:
    t = " ".join(token.lower().split())
    return t in ("feasible", "admissible", "yes", "true")


def _solver(block: Any, text: str) -> tuple[Any, str]:
    if isinstance(block, dict):
        return block, "fenced"
    objs = [o for o in _json_objects(text) if isinstance(o, dict)]
    if objs:
        return objs[-1], "fallback"
    return None, ""


def _verifier(block: Any, text: str) -> tuple[Any, str]:
    if isinstance(block, dict) and _as_bool(block.get("feasible")) is not None:
        opt = _as_bool(block.get("optimal"))
        return {"feasible": _as_bool(block["feasible"]), "optimal": opt}, "fenced"
    for obj in reversed(_json_objects(text)):
        if isinstance(obj, dict) and _as_bool(obj.get("feasible")) is not None:
            return {"feasible": _as_bool(obj["feasible"]), "optimal": _as_bool(obj.get("optimal"))}, "fallback"
    # drop the optimality clause so its yes/no is not read as the feasibility verdict
    opt_match = _OPTIMAL.findall(text)
    stripped = _OPTIMAL.sub(" ", text)
    tokens = _VERDICT.findall(stripped)
    if not tokens:
        return None, ""
    optimal = _as_bool(opt_match[-1]) if opt_match else None
    return {"feasible": _token_bool(tokens[-1]), "optimal": optimal}, "fallback"


def _ranking_from(value: Any) -> list[str] | None:
    if isinstance(value, dict):
        for key in ("ranking", "order", "answer"):
            if key in value:
                return _ranking_from(value[key])
        return None
    if isinstance(value, list) and value and all(isinstance(x, str) for x in value):
        return [x.strip().upper() for x in value]
    if isinstance(value, str):
        m = _CHAIN.findall(value)
        if m:
            return re.findall(r"[A-Z]", m[-1])
    return None


def _ranker(block: Any, raw_block: str | None, text: str) -> tuple[Any, str]:
    got = _ranking_from(block) if block is not None else None
    if got is None and raw_block is not None:
        got = _ranking_from(raw_block)
    if got is not None:
        return got, "fenced"
    for obj in reversed(_json_objects(text)):
        got = _ranking_from(obj)
        if got is not None:
            return got, "fallback"
    got = _ranking_from(text)
    return (got, "fallback") if got is not None else (None, "")


def parse_answer(role: Role | str, raw_text: str | None) -> ParsedAnswer:
    """Structured value for ``role`` from a reply; failures are reported in ``errors``.

    The last fenced block wins. Without a usable block, role-specific patterns
    are tried: a JSON object for solvers, a yes/no style token for verifiers
    and a label chain such as ``B > A > D > C`` for rankers.
    """
    try:
        role = Role(role)
        text = raw_text or ""
        if not text.strip():
            return ParsedAnswer(errors=[NO_ANSWER])
        fences = _FENCE.findall(text)
        raw_block = fences[-1][1].strip() if fences else None
        block = None
        if raw_block is not None:
            try:
                block = json.loads(raw_block)
            except ValueError:
                block = None
        if role is Role.SOLVER:
            value, source = _solver(block, text)
        elif role is Role.VERIFIER:
            value, source = _verifier(block, text)
        else:
            value, source = _ranker(block, raw_block, text)
        if value is None:
            return ParsedAnswer(errors=[NO_ANSWER])
        return ParsedAnswer(value=value, source=source)
    except Exception as exc:  # garbage must never escape as an exception
        return ParsedAnswer(errors=[f"parse error: {type(exc).__name__}: {exc}"])


def labels_to_order(labels: list[str] | None, n: int) -> list[int] | None:
    """Map labels A, B, ... to candidate indices; unknown labels map to -1."""
    if labels is None:
        return None
    return [ord(x) - ord("A") if len(x) == 1 and 0 <= ord(x) - ord("A") < n else -1 for x in labels]
