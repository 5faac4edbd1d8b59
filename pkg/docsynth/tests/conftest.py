import os
import typing as t
from pathlib import Path

import pytest
import requests

from docsynth.config import PipelineConfig
from docsynth.config import load_config
from docsynth.consts import ENV_PREFIX
from docsynth.gateway import GatewayConfig
from docsynth.gateway import LLMGateway
from docsynth.runner import run

from .stub_llm import ENDPOINT
from .stub_llm import StubLLM
from .stub_llm import stub_session

FIXTURES = Path(__file__).parent / "fixtures"

CONFIG_TEMPLATE = """\
[gateway]
endpoint = "{endpoint}"
model = "stub-chat"
mode = "{mode}"
replay_store = "{store}"
backoff = 0.0

[docqa]
min_pairs = 3
language = "en"

[chart]
locale = "zh"
language = "zh"

[table]
language = "en"

[run]
seed = 7
workers = {workers}
out_dir = "{out}"
layouts = "{fixtures}/layouts"
chart_seeds = "{fixtures}/chart_seeds"
tables = "{fixtures}/tables"
"""


@pytest.fixture(autouse=True)
def _clean_environ(monkeypatch: pytest.MonkeyPatch) -> None:
    for key in list(os.environ):
        if key.startswith(f"{ENV_PREFIX}_"):
            monkeypatch.delenv(key)


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def stub() -> StubLLM:
    return StubLLM()


@pytest.fixture
def session(stub: StubLLM) -> requests.Session:
    return stub_session(stub)


@pytest.fixture
def sleeps() -> list[float]:
    return []


@pytest.fixture
def gateway_config() -> GatewayConfig:
    return GatewayConfig(endpoint=ENDPOINT, model="stub-chat", mode="live", backoff=0.5)


@pytest.fixture
def gateway(
    gateway_config: GatewayConfig, session: requests.Session, sleeps: list[float]
) -> LLMGateway:
    return LLMGateway(gateway_config, session, sleep=sleeps.append)


def write_config(
    root: Path,
    mode: str = "replay",
    store: Path | None = None,
    out: Path | None = None,
    workers: int = 2,
    name: str = "config.toml",
) -> Path:
    path = root / name
    path.write_text(
        CONFIG_TEMPLATE.format(
            endpoint=ENDPOINT,
            mode=mode,
            store=(store or root / "replay").as_posix(),
            out=(out or root / "out").as_posix(),
            workers=workers,
            fixtures=FIXTURES.as_posix(),
        ),
        encoding="utf-8",
    )
    return path


@pytest.fixture
def make_config(tmp_path: Path) -> t.Callable[..., PipelineConfig]:
    def factory(**kwargs: t.Any) -> PipelineConfig:
        return load_config(write_config(tmp_path, **kwargs), env_prefix=None)

    return factory


@pytest.fixture(scope="session")
def replay_store(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """
    A replay store recorded from the stub endpoint by one full run.
    """
    root = tmp_path_factory.mktemp("recording")
    store = root / "replay"
    config = load_config(
        write_config(root, mode="record", store=store, workers=1), env_prefix=None
    )
    report = run("run", config, out_dir=root / "out", session=stub_session(StubLLM()))
    assert report.exit_code == 0, report.to_json()
    return store


@pytest.fixture
def config_file(tmp_path: Path) -> t.Callable[..., Path]:
    def factory(**kwargs: t.Any) -> Path:
        return write_config(tmp_path, **kwargs)

    return factory
