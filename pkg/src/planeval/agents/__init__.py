"""Agents under evaluation: endpoint client, prompt templates, answer parsing, scripted baselines."""

from planeval.agents.base import Agent, AgentReply, AgentTranscript, ChatAgent
from planeval.agents.client import (
    DEFAULT_KEY_VARIABLE,
    ChatClient,
    ChatEndpointConfig,
    Completion,
    complete,
)
from planeval.agents.parsing import (
    NO_ANSWER,
    ParsedAnswer,
    format_answer,
    labels_to_order,
    parse_answer,
)
from planeval.agents.prompts import PromptTemplate, load_template, render_prompt
from planeval.agents.scripted import (
    SCRIPTED_AGENTS,
    greedy_oracle_agent,
    hill_climb_agent,
    make_scripted_agent,
    random_agent,
    zero_agent,
)

__all__ = [
    "DEFAULT_KEY_VARIABLE",
    "NO_ANSWER",
    "SCRIPTED_AGENTS",
    "Agent",
    "AgentReply",
    "AgentTranscript",
    "ChatAgent",
    "ChatClient",
    "ChatEndpointConfig",
    "Completion",
    "ParsedAnswer",
    "PromptTemplate",
    "complete",
    "format_answer",
    "greedy_oracle_agent",
    "hill_climb_agent",
    "labels_to_order",
    "load_template",
    "make_scripted_agent",
    "parse_answer",
    "random_agent",
    "render_prompt",
    "zero_agent",
]
