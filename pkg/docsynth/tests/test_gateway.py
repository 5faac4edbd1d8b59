import json
import threading

import pytest
import requests

from docsynth.exceptions import FenceNotValidJSONError
from docsynth.exceptions import GatewayConfigError
from docsynth.exceptions import GatewayError
from docsynth.exceptions import NoFenceError
from docsynth.exceptions import ReplayMissError
from docsynth.exceptions import RetriesExhaustedError
from docsynth.gateway import ChatRequest
from docsynth.gateway import GatewayConfig
from docsynth.gateway import LLMGateway
from docsynth.gateway import ReplayStore
from docsynth.gateway import extract_json_fence
from docsynth.gateway import iter_fences
from docsynth.gateway import wrap_in_fence

from .stub_llm import ENDPOINT
from .stub_llm import StubLLM
from .stub_llm import stub_session


def echo(prompt: str) -> str:
    return f"echo: {prompt}"


def test_complete_live(gateway, stub) -> None:
    stub.responder = echo
    completion = gateway.complete(gateway.request("hello", tag="doc-qa"))
    assert completion.text == "echo: hello"
    assert completion.attempts == 1
    assert not completion.replayed
    assert completion.usage.completion_tokens == len("echo: hello") // 4

    payload = stub.requests[0]
    assert payload["model"] == "stub-chat"
    assert payload["messages"] == [{"role": "user", "content": "hello"}]
    assert payload["temperature"] == 0.7
    assert gateway.usage.calls == 1


def test_system_text_and_api_key(gateway, stub, monkeypatch) -> None:
    seen = {}

    def capture(request, *args, **kwargs):
        seen["auth"] = request.headers.get("Authorization")
        return original(request, *args, **kwargs)

    adapter = gateway.session.get_adapter(ENDPOINT)
    original = adapter.send
    monkeypatch.setattr(adapter, "send", capture)
    monkeypatch.setenv("LLM_API_KEY", "sk-test")

    stub.responder = echo
    gateway.complete(gateway.request("hi", tag="t", system_text="be brief"))
    assert stub.requests[0]["messages"][0] == {"role": "system", "content": "be brief"}
    assert seen["auth"] == "Bearer sk-test"


def test_retries_with_exponential_backoff(gateway, stub, sleeps) -> None:
    stub.responder = echo
    stub.fail(503, 429)
    completion = gateway.complete(gateway.request("retry me", tag="t"))
    assert completion.text == "echo: retry me"
    assert completion.attempts == 3
    assert stub.calls == 3
    assert sleeps == [0.5, 1.0]


def test_retry_after_header_wins(gateway, stub, sleeps) -> None:
    stub.responder = echo
    stub.fail(429, retry_after="7")
    gateway.complete(gateway.request("slow down", tag="t"))
    assert sleeps == [7.0]


def test_retries_exhausted(gateway, stub, sleeps) -> None:
    stub.fail(500, 502, 503, 504)
    with pytest.raises(RetriesExhaustedError) as exc_info:
        gateway.complete(gateway.request("never", tag="t"))
    assert exc_info.value.attempts == 4
    assert exc_info.value.last_status == 504
    assert stub.calls == 4
    assert len(sleeps) == 3


def test_client_errors_are_not_retried(gateway, stub) -> None:
    stub.fail(400)
    with pytest.raises(GatewayError, match="returned 400"):
        gateway.complete(gateway.request("bad", tag="t"))
    assert stub.calls == 1


def test_transport_errors_are_retried(gateway_config, sleeps) -> None:
    class Flaky(requests.adapters.BaseAdapter):
        calls = 0

        def send(self, request, **kwargs):
            Flaky.calls += 1
            raise requests.ConnectionError("connection refused")

        def close(self):
            pass

    session = requests.Session()
    session.mount("http://", Flaky())
    gateway = LLMGateway(gateway_config, session, sleep=sleeps.append)
    with pytest.raises(RetriesExhaustedError) as exc_info:
        gateway.complete(gateway.request("x", tag="t"))
    assert Flaky.calls == gateway_config.max_retries + 1
    assert exc_info.value.last_status is None


def test_malformed_response(gateway, stub) -> None:
    def not_chat(environ, start_response):
        start_response("200 OK", [("Content-Type", "application/json")])
        return [json.dumps({"choices": []}).encode()]

    gateway.session.get_adapter(ENDPOINT).app = not_chat
    with pytest.raises(GatewayError, match="malformed completion"):
        gateway.complete(gateway.request("x", tag="t"))


def test_max_inflight_bounds_concurrency(gateway_config, sleeps) -> None:
    stub = StubLLM(echo, delay=0.02)
    config = GatewayConfig(
        endpoint=gateway_config.endpoint, model="stub-chat", mode="live", max_inflight=2
    )
    gateway = LLMGateway(config, stub_session(stub), sleep=sleeps.append)

    def call(i: int) -> None:
        gateway.complete(gateway.request(f"prompt {i}", tag="t"))

    threads = [threading.Thread(target=call, args=(i,)) for i in range(8)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    assert stub.calls == 8
    assert stub.peak_inflight <= 2
    assert gateway.peak_inflight <= 2
    assert gateway.usage.calls == 8


def test_record_then_replay(tmp_path, stub, session) -> None:
    stub.responder = echo
    store = tmp_path / "replay"
    recorder = LLMGateway(
        GatewayConfig(endpoint=ENDPOINT, model="m", mode="record", replay_store=store), session
    )
    recorded = recorder.complete(recorder.request("what is 2+2?", tag="chart-qa-bar"))

    files = list(store.glob("*.json"))
    assert len(files) == 1
    assert files[0].name.startswith("chart-qa-bar-")
    entry = json.loads(files[0].read_text(encoding="utf-8"))
    assert entry["request"]["user_text"] == "what is 2+2?"

    replayer = LLMGateway(GatewayConfig(mode="replay", replay_store=store))
    replayed = replayer.complete(replayer.request("what is 2+2?", tag="chart-qa-bar"))
    assert replayed.text == recorded.text
    assert replayed.usage == recorded.usage
    assert replayed.replayed
    assert stub.calls == 1

    with pytest.raises(ReplayMissError):
        replayer.complete(replayer.request("what is 3+3?", tag="chart-qa-bar"))


def test_replay_key() -> None:
    request = ChatRequest("same text", tag="translate-zh")
    key = ReplayStore.key(request)
    assert key.startswith("translate-zh-")
    assert len(key.rsplit("-", 1)[1]) == 24
    assert ReplayStore.key(ChatRequest("same text", tag="../etc")).startswith("etc-")
    assert ReplayStore.key(ChatRequest("other text", tag="translate-zh")) != key


@pytest.mark.parametrize(
    "config, message",
    [
        (GatewayConfig(mode="batch"), "unknown gateway mode"),
        (GatewayConfig(mode="live"), "needs an endpoint"),
        (GatewayConfig(mode="replay"), "needs a replay store"),
        (GatewayConfig(mode="live", endpoint=ENDPOINT, max_inflight=0), "max_inflight"),
    ],
)
def test_gateway_config_errors(config, message) -> None:
    with pytest.raises(GatewayConfigError, match=message):
        LLMGateway(config)


def test_replay_store_must_exist(tmp_path) -> None:
    with pytest.raises(GatewayConfigError, match="does not exist"):
        LLMGateway(GatewayConfig(mode="replay", replay_store=tmp_path / "missing"))


def test_live_mode_ignores_the_replay_store(tmp_path, stub, session) -> None:
    stub.responder = echo
    missing = tmp_path / "missing"
    config = GatewayConfig(endpoint=ENDPOINT, model="m", mode="live", replay_store=missing)
    gateway = LLMGateway(config, session)
    assert gateway.store is None

    completion = gateway.complete(gateway.request("ping", tag="doc-qa"))
    assert completion.text == "echo: ping"
    assert stub.calls == 1
    assert not missing.exists()


def test_chat_request_validation() -> None:
    with pytest.raises(GatewayError):
        ChatRequest("   ")
    with pytest.raises(GatewayError):
        ChatRequest("x", temperature=-1)
    with pytest.raises(GatewayError):
        ChatRequest("x", max_output_tokens=0)


def test_extract_json_fence() -> None:
    text = 'Sure!\n```json\n[{"a": 1}]\n```\nand ```json\n{"b": 2}\n```'
    assert extract_json_fence(text) == [{"a": 1}]
    assert extract_json_fence("```\n{\"x\": true}\n```") == {"x": True}
    assert extract_json_fence("```python\nprint(1)\n```\n```json\n[1]\n```") == [1]
    assert extract_json_fence('```json{"inline": 1}```') == {"inline": 1}
    assert extract_json_fence(wrap_in_fence({"k": "值"})) == {"k": "值"}


def test_extract_json_fence_errors() -> None:
    with pytest.raises(NoFenceError):
        extract_json_fence('{"a": 1}')
    with pytest.raises(FenceNotValidJSONError) as exc_info:
        extract_json_fence("```json\n{broken\n```")
    assert "{broken" in exc_info.value.snippet


def test_iter_fences_labels() -> None:
    fences = list(iter_fences("```csv\na,b\n1,2\n``` then ```\nplain\n```"))
    assert fences == [("csv", "\na,b\n1,2\n"), (None, "\nplain\n")]
