import json
import random

import pytest
from conftest import FakeClock, load_fixture

from planeval.agents import (
    AgentTranscript,
    ChatAgent,
    ChatEndpointConfig,
    PromptTemplate,
    format_answer,
    labels_to_order,
    load_template,
    make_scripted_agent,
    parse_answer,
    render_prompt,
)
from planeval.agents.client import TokenBucket, backoff_delay
from planeval.agents.prompts import task_bindings
from planeval.course import (
    Difficulty,
    build_course_heuristic_task,
    build_course_verifier_task,
    generate_instance,
)
from planeval.course.model import AssignmentPlan
from planeval.course.tasks import (
    CourseSolverTask,
    grade_course_solution,
    one_shot_exemplar,
)
from planeval.errors import (
    AuthError,
    ConfigError,
    MalformedResponse,
    RetriesExhausted,
    Timeout,
    UnboundPlaceholder,
)
from planeval.eval_core import Mode, Role, grade_ranking, grade_verdict
from planeval.fitness import (
    build_heuristic_task,
    build_verifier_task,
    load_emergency_bank,
    load_exercise_bank,
)

BANK = load_exercise_bank()
EMS = load_emergency_bank()
MSG = [{"role": "user", "content": "hi"}]


class TestClient:
    def test_echo_and_request_shape(self, stub):
        s = stub("echo")
        out = s.client(temperature=0.5).complete(MSG)
        assert out.text == "Hello from the stub."
        assert out.retries == 0 and out.usage["total_tokens"] == 17
        req = s.requests[0]
        assert str(req.url) == "http://stub.invalid/v1/chat/completions"
        assert req.headers["authorization"] == "Bearer sk-test"
        body = json.loads(req.content)
        assert body["model"] == "stub-model" and body["temperature"] == 0.5
        assert body["messages"] == MSG

    def test_rate_limited_then_ok(self, stub, fake_clock):
        s = stub("rate_limited_then_ok")
        out = s.client(clock=fake_clock).complete(MSG)
        assert out.retries == 2 and len(s.requests) == 3
        rng = random.Random(7)
        expected = [backoff_delay(1, rng.random()), backoff_delay(2, rng.random())]
        assert fake_clock.sleeps == pytest.approx(expected)
        assert parse_answer(Role.HEURISTIC, out.text).value == ["B", "A", "D", "C"]

    def test_server_down_exhausts(self, stub):
        s = stub("server_down")
        with pytest.raises(RetriesExhausted) as info:
            s.client().complete(MSG)
        assert info.value.attempts == 4 and len(s.requests) == 4

    def test_connection_reset_recovers(self, stub):
        assert stub("connection_reset_then_ok").client().complete(MSG).retries == 1

    def test_timeout_type(self, stub):
        with pytest.raises(Timeout):
            stub("always_timeout").client().complete(MSG)

    def test_unauthorized_not_retried(self, stub):
        s = stub("unauthorized")
        with pytest.raises(AuthError):
            s.client().complete(MSG)
        assert len(s.requests) == 1

    @pytest.mark.parametrize("scenario", ["malformed_body", "not_json"])
    def test_malformed(self, stub, scenario):
        with pytest.raises(MalformedResponse):
            stub(scenario).client().complete(MSG)

    def test_missing_key_fails_before_network(self, stub):
        s = stub("echo")
        client = s.client()
        client.environ = {}
        with pytest.raises(AuthError):
            client.complete(MSG)
        assert s.requests == []

    def test_backoff_schedule(self):
        assert backoff_delay(1, 0.5) == 1.0
        assert backoff_delay(3, 0.5) == 4.0
        assert backoff_delay(2, 0.0) == 1.0
        assert backoff_delay(2, 1.0) == 3.0

    def test_token_bucket_paces(self):
        clock = FakeClock()
        bucket = TokenBucket(60, clock, clock.sleep)
        waits = [bucket.acquire() for _ in range(3)]
        assert waits == [0.0, 1.0, 1.0]
        assert clock.now == 2.0

    def test_rate_limit_through_client(self, stub):
        s = stub("echo")
        s.responses = s.responses * 3
        clock = FakeClock()
        client = s.client(clock=clock, requests_per_minute=30)
        for _ in range(3):
            client.complete(MSG)
        assert clock.sleeps == [2.0, 2.0]

    def test_config_validation_and_round_trip(self):
        cfg = ChatEndpointConfig("http://x/v1", "m")
        assert ChatEndpointConfig.from_dict(cfg.to_dict()) == cfg
        assert cfg.temperature == 0
        with pytest.raises(ConfigError):
            ChatEndpointConfig("http://x/v1", "m", max_retries=-1)
        with pytest.raises(ConfigError):
            ChatEndpointConfig("", "m")


class TestChatAgentFailures:
    """Garbage replies must become graded failures, not crashes."""

    def test_garbage_ranking(self, stub):
        agent = ChatAgent(ChatEndpointConfig("http://stub.invalid/v1", "m"), client=stub("garbage_ranking").client())
        reply = agent.respond(None, MSG)
        parsed = parse_answer(Role.HEURISTIC, reply.text)
        assert not parsed.ok
        result = grade_ranking(labels_to_order(parsed.value, 4), [0, 1, 2, 3])
        assert result.malformed and not any(result.hit_at.values())

    def test_partial_ranking(self, stub):
        text = stub("partial_ranking").client().complete(MSG).text
        order = labels_to_order(parse_answer(Role.HEURISTIC, text).value, 4)
        result = grade_ranking(order, [2, 0, 1, 3])
        assert result.malformed and result.hit_at[1] is False
        assert result.pairwise_agreement == 1.0

    def test_garbage_verdict(self, stub):
        text = stub("garbage_verdict").client().complete(MSG).text
        parsed = parse_answer(Role.VERIFIER, text)
        assert not parsed.ok
        assert grade_verdict(parsed.value, {"feasible": True, "optimal": None})["pass"] is False

    def test_garbage_solver(self, stub):
        text = stub("garbage_solver").client().complete(MSG).text
        parsed = parse_answer(Role.SOLVER, text)
        assert not parsed.ok
        rec = generate_instance(Difficulty.EASY, 1)
        assert grade_course_solution(None, rec)["feasible"] is False

    def test_verifier_yes(self, stub):
        text = stub("verifier_yes").client().complete(MSG).text
        assert parse_answer(Role.VERIFIER, text).value == {"feasible": True, "optimal": True}


CORPUS = load_fixture("answer_corpus.json")["cases"]


@pytest.mark.parametrize("case", CORPUS, ids=[f"{c['role']}-{i}" for i, c in enumerate(CORPUS)])
def test_answer_corpus(case):
    parsed = parse_answer(case["role"], case["text"])
    if case["expected"] is None:
        assert not parsed.ok and parsed.errors
    else:
        assert parsed.ok, parsed.errors
        assert parsed.value == case["expected"]


class TestParsing:
    def test_never_raises(self):
        for junk in [None, "```", "```json\n", "{{{{", "A > > B", "\x00" * 5, "```json\n[1, 2]\n```"]:
            for role in Role:
                parse_answer(role, junk)

    def test_format_round_trip(self):
        for role, value in [
            (Role.SOLVER, {"Jogging": 2}),
            (Role.VERIFIER, {"feasible": False, "optimal": None}),
            (Role.HEURISTIC, ["C", "B", "A"]),
        ]:
            payload = {"ranking": value} if role is Role.HEURISTIC else value
            assert parse_answer(role, format_answer(payload)).value == value

    def test_labels_to_order(self):
        assert labels_to_order(["B", "A"], 2) == [1, 0]
        assert labels_to_order(["Z", "A"], 2) == [-1, 0]
        assert labels_to_order(None, 3) is None


class TestPrompts:
    def _rank_task(self, mode=Mode.ZERO_SHOT):
        return build_heuristic_task(mode, 4, 1, BANK, EMS)[0]

    def test_all_templates_load(self):
        combos = [
            (Role.SOLVER, Mode.DIRECT), (Role.SOLVER, Mode.COT),
            (Role.VERIFIER, Mode.ZERO_SHOT), (Role.VERIFIER, Mode.FEW_SHOT),
            (Role.HEURISTIC, Mode.ZERO_SHOT), (Role.HEURISTIC, Mode.ONE_SHOT), (Role.HEURISTIC, Mode.FEW_SHOT),
        ]
        for env in ("fitness", "course"):
            for role, mode in combos:
                t = load_template(role, mode, env)
                assert t.system_text and t.output_schema and len(t.sha256) == 64

    def test_invalid_mode(self):
        with pytest.raises(ValueError):
            load_template(Role.SOLVER, Mode.FEW_SHOT, "course")

    def test_deterministic_rendering(self):
        t = load_template(Role.HEURISTIC, Mode.ZERO_SHOT, "fitness")
        assert render_prompt(t, self._rank_task()) == render_prompt(t, self._rank_task())

    def test_labels_in_prompt(self):
        msgs = render_prompt(load_template(Role.HEURISTIC, Mode.ZERO_SHOT, "fitness"), self._rank_task())
        body = msgs[-1]["content"]
        for label in "ABCD":
            assert f"\n{label}: " in body
        assert "A, B, C, D" in body
        assert "${" not in body

    def test_fewshot_history_in_prompt(self):
        task = self._rank_task(Mode.FEW_SHOT)
        body = render_prompt(load_template(Role.HEURISTIC, Mode.FEW_SHOT, "fitness"), task)[-1]["content"]
        assert "P_1:" in body and "F_0:" in body

    def test_verifier_prompt_has_candidate(self):
        task, _ = build_verifier_task(Mode.ZERO_SHOT, 3, BANK, EMS)
        body = render_prompt(load_template(Role.VERIFIER, Mode.ZERO_SHOT, "fitness"), task)[-1]["content"]
        assert task.candidate_text in body

    def test_cot_wording(self):
        rec = generate_instance(Difficulty.EASY, 0)
        task = CourseSolverTask(rec, Mode.COT)
        body = render_prompt(load_template(Role.SOLVER, Mode.COT, "course"), task)[-1]["content"]
        assert "step by step" in body

    def test_oneshot_includes_exemplar(self):
        rec = generate_instance(Difficulty.EASY, 0)
        task, _ = build_course_heuristic_task(rec, 2, Mode.ONE_SHOT, 3)
        body = render_prompt(load_template(Role.HEURISTIC, Mode.ONE_SHOT, "course"), task)[-1]["content"]
        assert one_shot_exemplar().strip() in body

    def test_exemplar_answer_parses(self):
        assert parse_answer(Role.HEURISTIC, one_shot_exemplar()).ok

    def test_unbound_placeholder(self):
        t = PromptTemplate(Role.SOLVER, Mode.DIRECT, "Solve ${problem} for ${who}", "")
        with pytest.raises(UnboundPlaceholder):
            t.fill({"problem": "x"})

    def test_role_mismatch(self):
        with pytest.raises(ValueError):
            render_prompt(load_template(Role.VERIFIER, Mode.ZERO_SHOT, "fitness"), self._rank_task())

    def test_empty_context_binding(self):
        assert task_bindings(self._rank_task())["context"] == ""


class TestTranscript:
    def test_round_trip(self):
        t = AgentTranscript()
        t.add("user", "q")
        t.add("agent", "a")
        t.add_usage({"total_tokens": 3})
        t.add_usage({"total_tokens": 4})
        t.parsed_answer = ["A"]
        d = t.to_dict()
        assert d["token_usage"]["total_tokens"] == 7
        assert AgentTranscript.from_dict(d).to_dict() == d


class TestScripted:
    def _answer(self, agent, task):
        return agent.respond(task, []).text

    def test_greedy_oracle_is_perfect(self):
        agent = make_scripted_agent("greedy_oracle")
        for seed in range(10):
            task, order = build_heuristic_task(Mode.ZERO_SHOT, 4, seed, BANK, EMS)
            labels = parse_answer(Role.HEURISTIC, self._answer(agent, task)).value
            assert labels_to_order(labels, 4) == order
            vt, _ = build_verifier_task(Mode.ZERO_SHOT, seed, BANK, EMS)
            v = parse_answer(Role.VERIFIER, self._answer(agent, vt)).value
            assert grade_verdict(v, vt.ground_truth)["pass"]

    def test_greedy_oracle_course_solver(self):
        rec = generate_instance(Difficulty.EASY, 4)
        text = self._answer(make_scripted_agent("greedy_oracle"), CourseSolverTask(rec))
        plan = AssignmentPlan.from_nested(parse_answer(Role.SOLVER, text).value)
        assert grade_course_solution(plan, rec)["optimal"]

    def test_random_agent_deterministic_per_seed(self):
        rec = generate_instance(Difficulty.EASY, 4)
        task, _ = build_course_heuristic_task(rec, 4, Mode.ZERO_SHOT, 1)
        a = self._answer(make_scripted_agent("random", 3), task)
        b = self._answer(make_scripted_agent("random", 3), task)
        assert a == b
        assert sorted(parse_answer(Role.HEURISTIC, a).value) == list("ABCD")

    def test_random_verdict_parses(self):
        rec = generate_instance(Difficulty.EASY, 4)
        task, _ = build_course_verifier_task(rec, 1)
        assert parse_answer(Role.VERIFIER, self._answer(make_scripted_agent("random", 1), task)).ok

    def test_unknown_agent(self):
        with pytest.raises(ValueError):
            make_scripted_agent("psychic")
