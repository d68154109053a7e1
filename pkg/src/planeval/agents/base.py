"""Agent interface, transcripts, and the endpoint-backed agent."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Protocol

from planeval.agents.client import ChatClient, ChatEndpointConfig


@dataclass
class AgentReply:
    text: str
    usage: dict[str, int] | None = None
    retries: int = 0


class Agent(Protocol):
    name: str

    def respond(self, task: Any, messages: Sequence[dict[str, str]]) -> AgentReply: ...


@dataclass
class AgentTranscript:
    """Messages exchanged for one task plus what was parsed from the final reply."""

    messages: list[dict[str, str]] = field(default_factory=list)
    parsed_answer: Any = None
    parse_errors: list[str] = field(default_factory=list)
    token_usage: dict[str, int] | None = None

    def add(self, speaker: str, text: str) -> None:
        self.messages.append({"speaker": speaker, "text": text})

    def add_usage(self, usage: dict[str, int] | None) -> None:
        if not usage:
            return
        total = dict(self.token_usage or {})
        for k, v in usage.items():
            total[k] = total.get(k, 0) + v
        self.token_usage = total

    def to_dict(self) -> dict[str, Any]:
        return {
            "messages": list(self.messages),
            "parsed_answer": self.parsed_answer,
            "parse_errors": list(self.parse_errors),
            "token_usage": self.token_usage,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> AgentTranscript:
        return cls(list(d.get("messages", [])), d.get("parsed_answer"), list(d.get("parse_errors", [])),
                   d.get("token_usage"))


class ChatAgent:
    """Forwards rendered prompts to a chat-completion endpoint."""

    def __init__(self, config: ChatEndpointConfig, client: ChatClient | None = None, name: str | None = None):
        self.config = config
        self.client = client or ChatClient(config)
        self.name = name or config.model_name

    def respond(self, task: Any, messages: Sequence[dict[str, str]]) -> AgentReply:
        c = self.client.complete(messages)
        return AgentReply(c.text, c.usage, c.retries)
