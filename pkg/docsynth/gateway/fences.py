import json
import re
import typing as t

from .._types import T_JSON
from ..exceptions import FenceNotValidJSONError
from ..exceptions import NoFenceError

_FENCE_RE = re.compile(r"```(.*?)```", re.DOTALL)
# a format word directly after the opening backticks, e.g. ```json or ```csv
_LABEL_RE = re.compile(r"^([A-Za-z][\w+-]*)(?=[ \t\r\n{\[]|$)[ \t]*")

SNIPPET_CHARS = 200


def iter_fences(text: str) -> t.Iterator[tuple[str | None, str]]:
    """
    Yield ``(label, body)`` for every triple-backtick block in ``text``.

    ``label`` is the format word on the fence line (lower-cased) or
    ``None``; ``body`` is everything after it.
    """
    for match in _FENCE_RE.finditer(text):
        raw = match.group(1)
        label = _LABEL_RE.match(raw)
        if label is None:
            yield None, raw
        else:
            yield label.group(1).lower(), raw[label.end() :]


def _snippet(text: str) -> str:
    text = text.strip()
    if len(text) > SNIPPET_CHARS:
        return text[:SNIPPET_CHARS] + "..."
    return text


def extract_json_fence(text: str) -> T_JSON:
    """
    Return the value of the first fenced block that parses as JSON.

    Blocks labeled ``json`` and bare blocks are tried in order; blocks with
    another label are tried as a whole, so ```` ```python ```` code is
    skipped naturally.

    :raises NoFenceError:
        ``text`` contains no fenced block.
    :raises FenceNotValidJSONError:
        No block parses; the snippet is the first block.
    """
    first: str | None = None
    for label, body in iter_fences(text):
        candidate = body if label == "json" or label is None else f"{label} {body}"
        if first is None:
            first = candidate
        try:
            return json.loads(candidate)  # type: ignore[no-any-return]
        except ValueError:
            continue

    if first is None:
        raise NoFenceError("no fenced block found", _snippet(text))
    raise FenceNotValidJSONError("no fenced block holds valid JSON", _snippet(first))


def wrap_in_fence(value: T_JSON) -> str:
    return "```json\n" + json.dumps(value, ensure_ascii=False) + "\n```"
