import sys
import typing as t
from os import PathLike

if sys.version_info >= (3, 11):
    from typing import NotRequired
else:
    from typing_extensions import NotRequired


T_PATH = t.Union[str, "PathLike[str]"]
T_BBOX = tuple[float, float, float, float]
T_JSON = t.Union[dict[str, t.Any], list[t.Any], str, int, float, bool, None]


# "from" is a keyword, hence the functional form
T_TURN_DICT = t.TypedDict("T_TURN_DICT", {"from": str, "value": str})


class T_PROVENANCE_DICT(t.TypedDict):
    generator: str
    seed: int | None
    model: str | None
    validated: bool
    rejection_reason: str | None
    verdict: NotRequired[str | None]


class T_RECORD_DICT(t.TypedDict):
    id: str
    image: str
    category: str
    language: str
    task_type: str | None
    conversations: list[T_TURN_DICT]
    provenance: T_PROVENANCE_DICT


class T_LINE_DICT(t.TypedDict):
    text: str
    bbox: list[float]
    confidence: NotRequired[float]


class T_REGION_DICT(t.TypedDict):
    kind: str
    bbox: list[float]
    lines: list[T_LINE_DICT]


class T_LAYOUT_DICT(t.TypedDict):
    schema_version: int
    page_width: float
    page_height: float
    regions: list[T_REGION_DICT]
    image: NotRequired[str]
    doc_id: NotRequired[str]


class T_USAGE_DICT(t.TypedDict):
    prompt_tokens: int
    completion_tokens: int
