import hashlib
import json
import logging
import os
import threading
import typing as t
from pathlib import Path

from werkzeug.utils import secure_filename

from .._types import T_PATH
from ..exceptions import GatewayConfigError
from ..exceptions import ReplayMissError

if t.TYPE_CHECKING:
    from .client import ChatRequest
    from .client import Completion

log = logging.getLogger("docsynth.gateway.replay")


class ReplayStore:
    """
    Directory of recorded completions, one JSON file per request.

    Files are named ``<tag>-<sha256(user_text)[:24]>.json``, so editing a
    prompt template invalidates the entries recorded with the old text.

    :param root:
        Store directory.
    :param create:
        Create the directory if it does not exist (record mode). When
        ``False`` the directory must already exist.
    """

    def __init__(self, root: T_PATH, create: bool = False) -> None:
        self.root = Path(root)
        if create:
            self.root.mkdir(parents=True, exist_ok=True)
        elif not self.root.is_dir():
            raise GatewayConfigError(f"replay store {self.root} does not exist")

    @staticmethod
    def key(request: "ChatRequest") -> str:
        digest = hashlib.sha256(request.user_text.encode("utf-8")).hexdigest()[:24]
        tag = secure_filename(request.tag) or "untagged"
        return f"{tag}-{digest}"

    def path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def __contains__(self, request: "ChatRequest") -> bool:
        return self.path(self.key(request)).is_file()

    def load(self, request: "ChatRequest") -> "Completion":
        from .client import Completion
        from .client import TokenUsage

        key = self.key(request)
        path = self.path(key)
        if not path.is_file():
            log.error("replay miss for %s (tag %r)", key, request.tag)
            raise ReplayMissError(key)

        data = json.loads(path.read_text(encoding="utf-8"))
        usage = data.get("usage") or {}
        return Completion(
            text=data["text"],
            usage=TokenUsage(
                prompt_tokens=int(usage.get("prompt_tokens", 0)),
                completion_tokens=int(usage.get("completion_tokens", 0)),
            ),
            attempts=0,
            replayed=True,
        )

    def save(self, request: "ChatRequest", completion: "Completion") -> Path:
        key = self.key(request)
        path = self.path(key)
        payload = {
            "key": key,
            "tag": request.tag,
            "request": {
                "system_text": request.system_text,
                "user_text": request.user_text,
                "temperature": request.temperature,
                "max_output_tokens": request.max_output_tokens,
            },
            "text": completion.text,
            "usage": {
                "prompt_tokens": completion.usage.prompt_tokens,
                "completion_tokens": completion.usage.completion_tokens,
            },
        }
        tmp = path.with_name(path.name + f".{os.getpid()}.{threading.get_ident()}.tmp")
        tmp.write_text(
            json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        os.replace(tmp, path)
        log.debug("recorded %s", key)
        return path
