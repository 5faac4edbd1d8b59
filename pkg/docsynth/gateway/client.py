import logging
import os
import threading
import time
import typing as t
from dataclasses import dataclass

import requests

from .._types import T_PATH
from .._types import T_USAGE_DICT
from ..consts import DEFAULT_API_KEY_ENV
from ..consts import DEFAULT_BACKOFF_S
from ..consts import DEFAULT_MAX_INFLIGHT
from ..consts import DEFAULT_MAX_OUTPUT_TOKENS
from ..consts import DEFAULT_MAX_RETRIES
from ..consts import DEFAULT_TEMPERATURE
from ..consts import DEFAULT_TIMEOUT_S
from ..consts import GATEWAY_MODES
from ..exceptions import GatewayConfigError
from ..exceptions import GatewayError
from ..exceptions import RetriesExhaustedError
from .replay import ReplayStore

log = logging.getLogger("docsynth.gateway")

RETRY_STATUS = frozenset({429, 500, 502, 503, 504})


@dataclass(frozen=True)
class ChatRequest:
    user_text: str
    system_text: str | None = None
    temperature: float = DEFAULT_TEMPERATURE
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS
    tag: str = ""

    def __post_init__(self) -> None:
        if not self.user_text.strip():
            raise GatewayError("user text must not be empty")
        if self.temperature < 0:
            raise GatewayError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise GatewayError("max_output_tokens must be positive")


@dataclass(frozen=True)
class TokenUsage:
    prompt_tokens: int = 0
    completion_tokens: int = 0

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage(
            self.prompt_tokens + other.prompt_tokens,
            self.completion_tokens + other.completion_tokens,
        )

    def to_dict(self) -> T_USAGE_DICT:
        return {
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
        }


@dataclass(frozen=True)
class Completion:
    text: str
    usage: TokenUsage
    attempts: int = 1
    replayed: bool = False


@dataclass(frozen=True)
class GatewayConfig:
    """
    Gateway settings, usually built from the ``[gateway]`` config section.

    :param endpoint:
        Chat-completions URL (live and record modes).
    :param model:
        Model identifier sent with every request.
    :param max_retries:
        Retries after the first attempt on 429/5xx and transport errors.
    :param max_inflight:
        Upper bound on concurrently outstanding HTTP requests.
    :param mode:
        ``live``, ``record`` or ``replay``.
    :param replay_store:
        Replay directory; must exist in replay mode, created in record mode.
    """

    endpoint: str = ""
    model: str = ""
    max_retries: int = DEFAULT_MAX_RETRIES
    max_inflight: int = DEFAULT_MAX_INFLIGHT
    mode: str = "replay"
    replay_store: T_PATH | None = None
    api_key_env: str = DEFAULT_API_KEY_ENV
    timeout: float = DEFAULT_TIMEOUT_S
    backoff: float = DEFAULT_BACKOFF_S
    temperature: float = DEFAULT_TEMPERATURE
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS

    def validate(self) -> None:
        if self.mode not in GATEWAY_MODES:
            raise GatewayConfigError(f"unknown gateway mode {self.mode!r}")
        if self.max_inflight < 1:
            raise GatewayConfigError("max_inflight must be positive")
        if self.max_retries < 0:
            raise GatewayConfigError("max_retries must not be negative")
        if self.mode in ("live", "record") and not self.endpoint:
            raise GatewayConfigError(f"{self.mode} mode needs an endpoint")
        if self.mode in ("record", "replay") and self.replay_store is None:
            raise GatewayConfigError(f"{self.mode} mode needs a replay store")


class UsageMeter:
    """
    Thread-safe running total of token usage.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._usage = TokenUsage()
        self.calls = 0

    def add(self, usage: TokenUsage) -> None:
        with self._lock:
            self._usage = self._usage + usage
            self.calls += 1

    @property
    def total(self) -> TokenUsage:
        with self._lock:
            return self._usage


class LLMGateway:
    """
    Chat-completion client shared by all pipelines.

    In ``replay`` mode every answer comes from the replay store and a
    missing entry is an error; ``record`` mode calls the endpoint and stores
    what it gets; ``live`` only calls the endpoint.

    :param config:
        Gateway configuration.
    :param session:
        ``requests`` session used for HTTP; tests mount a stub adapter on it.
    :param sleep:
        Called with the backoff delay between attempts.
    """

    def __init__(
        self,
        config: GatewayConfig,
        session: requests.Session | None = None,
        sleep: t.Callable[[float], None] = time.sleep,
    ) -> None:
        config.validate()
        self.config = config
        self.session = session or requests.Session()
        self.sleep = sleep
        self.usage = UsageMeter()

        self.store: ReplayStore | None = None
        if config.mode in ("record", "replay"):
            assert config.replay_store is not None
            self.store = ReplayStore(config.replay_store, create=config.mode == "record")
        elif config.replay_store is not None:
            log.debug("live mode, replay store %s not used", config.replay_store)

        self._slots = threading.BoundedSemaphore(config.max_inflight)
        self._lock = threading.Lock()
        self.inflight = 0
        self.peak_inflight = 0

    @property
    def model(self) -> str:
        return self.config.model

    def request(self, user_text: str, tag: str, system_text: str | None = None) -> ChatRequest:
        """
        Build a :class:`ChatRequest` with the configured decoding defaults.
        """
        return ChatRequest(
            user_text=user_text,
            system_text=system_text,
            temperature=self.config.temperature,
            max_output_tokens=self.config.max_output_tokens,
            tag=tag,
        )

    def complete(self, req: ChatRequest) -> Completion:
        if self.config.mode == "replay":
            assert self.store is not None
            completion = self.store.load(req)
        else:
            completion = self._call(req)
            if self.config.mode == "record":
                assert self.store is not None
                self.store.save(req, completion)

        self.usage.add(completion.usage)
        return completion

    def _payload(self, req: ChatRequest) -> dict[str, t.Any]:
        messages = []
        if req.system_text:
            messages.append({"role": "system", "content": req.system_text})
        messages.append({"role": "user", "content": req.user_text})
        return {
            "model": self.config.model,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        }

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        return headers

    def _enter(self) -> None:
        self._slots.acquire()
        with self._lock:
            self.inflight += 1
            self.peak_inflight = max(self.peak_inflight, self.inflight)

    def _leave(self) -> None:
        with self._lock:
            self.inflight -= 1
        self._slots.release()

    def _delay(self, attempt: int, response: requests.Response | None) -> float:
        if response is not None:
            retry_after = response.headers.get("Retry-After")
            if retry_after:
                try:
                    return max(0.0, float(retry_after))
                except ValueError:
                    pass
        return self.config.backoff * (2 ** (attempt - 1))

    def _call(self, req: ChatRequest) -> Completion:
        payload = self._payload(req)
        headers = self._headers()
        max_attempts = self.config.max_retries + 1
        last_status: int | None = None

        for attempt in range(1, max_attempts + 1):
            response: requests.Response | None = None
            self._enter()
            try:
                response = self.session.post(
                    self.config.endpoint,
                    json=payload,
                    headers=headers,
                    timeout=self.config.timeout,
                )
            except (requests.ConnectionError, requests.Timeout) as ex:
                log.warning("attempt %d/%d failed: %s", attempt, max_attempts, ex)
                last_status = None
            finally:
                self._leave()

            if response is not None:
                last_status = response.status_code
                if response.status_code == 200:
                    return self._parse(response, attempt)
                if response.status_code not in RETRY_STATUS:
                    raise GatewayError(
                        f"endpoint returned {response.status_code}: {response.text[:200]}"
                    )
                log.warning(
                    "attempt %d/%d got status %d",
                    attempt,
                    max_attempts,
                    response.status_code,
                )

            if attempt < max_attempts:
                self.sleep(self._delay(attempt, response))

        raise RetriesExhaustedError(max_attempts, last_status)

    def _parse(self, response: requests.Response, attempts: int) -> Completion:
        try:
            data = response.json()
            text = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as ex:
            raise GatewayError(f"malformed completion response: {ex}") from ex

        usage = data.get("usage") or {}
        return Completion(
            text=str(text),
            usage=TokenUsage(
                prompt_tokens=int(usage.get("prompt_tokens", 0)),
                completion_tokens=int(usage.get("completion_tokens", 0)),
            ),
            attempts=attempts,
        )
