import json
import random
from pathlib import Path

import httpx
import pytest

from planeval.agents.client import ChatClient, ChatEndpointConfig

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name):
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))


class FakeClock:
    """Monotonic clock that only moves when something sleeps."""

    def __init__(self):
        self.now = 0.0
        self.sleeps = []

    def __call__(self):
        return self.now

    def sleep(self, seconds):
        self.sleeps.append(seconds)
        self.now += seconds


class StubEndpoint:
    """Replays one recorded scenario and keeps every request it received."""

    def __init__(self, scenario):
        self.responses = list(load_fixture("chat_stub_responses.json")[scenario])
        self.requests = []

    def handler(self, request):
        self.requests.append(request)
        if not self.responses:
            raise AssertionError("stub endpoint received more requests than scripted")
        entry = self.responses.pop(0)
        if entry.get("raise") == "timeout":
            raise httpx.ReadTimeout("timed out", request=request)
        if entry.get("raise") == "connect":
            raise httpx.ConnectError("connection reset", request=request)
        if "text" in entry:
            return httpx.Response(entry["status"], text=entry["text"])
        return httpx.Response(entry["status"], json=entry["body"])

    def client(self, clock=None, **cfg):
        clock = clock or FakeClock()
        config = ChatEndpointConfig(
            base_url="http://stub.invalid/v1",
            model_name="stub-model",
            api_key_source="STUB_KEY",
            **{"max_retries": 3, **cfg},
        )
        return ChatClient(
            config,
            transport=httpx.MockTransport(self.handler),
            sleep=clock.sleep,
            clock=clock,
            rng=random.Random(7),
            environ={"STUB_KEY": "sk-test"},
        )


@pytest.fixture
def stub():
    return StubEndpoint


@pytest.fixture
def fake_clock():
    return FakeClock()


@pytest.fixture(autouse=True)
def _no_network(monkeypatch):
    """Any attempt to open a real socket fails the test."""
    import socket

    def guard(*args, **kwargs):
        raise AssertionError("tests must not touch the network")

    monkeypatch.setattr(socket.socket, "connect", guard)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
