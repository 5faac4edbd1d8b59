"""
OCR layout documents.

A layout document is the JSON an OCR/layout-analysis engine produces for
one page::

    {
        "schema_version": 1,
        "page_width": 1240, "page_height": 1754,
        "image": "reports/p001.png",            # optional
        "doc_id": "p001",                        # optional
        "regions": [
            {"kind": "printed_text", "bbox": [x0, y0, x1, y1],
             "lines": [{"text": "...", "bbox": [x0, y0, x1, y1],
                        "confidence": 0.98}]}    # confidence optional
        ]
    }

See ``doc/layout.rst`` for the full schema.
"""

import json
import logging
import typing as t
from dataclasses import dataclass
from pathlib import Path

from ._types import T_BBOX
from ._types import T_LAYOUT_DICT
from ._types import T_LINE_DICT
from ._types import T_PATH
from ._types import T_REGION_DICT
from .consts import LAYOUT_SCHEMA_VERSION
from .consts import LINE_BBOX_TOLERANCE_PX
from .consts import REGION_KINDS
from .exceptions import LayoutSchemaError

log = logging.getLogger("docsynth.layout")


@dataclass(frozen=True)
class Line:
    text: str
    bbox: T_BBOX
    confidence: float | None = None


@dataclass(frozen=True)
class Region:
    kind: str
    bbox: T_BBOX
    lines: tuple[Line, ...]


@dataclass(frozen=True)
class LayoutDocument:
    page_width: float
    page_height: float
    regions: tuple[Region, ...]
    image: str | None = None
    doc_id: str | None = None

    def to_dict(self) -> T_LAYOUT_DICT:
        regions: list[T_REGION_DICT] = []
        for region in self.regions:
            lines: list[T_LINE_DICT] = []
            for line in region.lines:
                item: T_LINE_DICT = {"text": line.text, "bbox": list(line.bbox)}
                if line.confidence is not None:
                    item["confidence"] = line.confidence
                lines.append(item)
            regions.append(
                {"kind": region.kind, "bbox": list(region.bbox), "lines": lines}
            )

        data: T_LAYOUT_DICT = {
            "schema_version": LAYOUT_SCHEMA_VERSION,
            "page_width": self.page_width,
            "page_height": self.page_height,
            "regions": regions,
        }
        if self.image is not None:
            data["image"] = self.image
        if self.doc_id is not None:
            data["doc_id"] = self.doc_id
        return data


def _number(value: t.Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise LayoutSchemaError(path, f"expected a number, got {value!r}")
    return value


def _bbox(value: t.Any, path: str) -> T_BBOX:
    if not isinstance(value, list) or len(value) != 4:
        raise LayoutSchemaError(path, "expected [x0, y0, x1, y1]")
    x0, y0, x1, y1 = (_number(v, f"{path}[{i}]") for i, v in enumerate(value))
    if not (x0 < x1 and y0 < y1):
        raise LayoutSchemaError(path, "degenerate box, need x0 < x1 and y0 < y1")
    return (x0, y0, x1, y1)


def _within(inner: T_BBOX, outer: T_BBOX, tolerance: float = 0.0) -> bool:
    return (
        inner[0] >= outer[0] - tolerance
        and inner[1] >= outer[1] - tolerance
        and inner[2] <= outer[2] + tolerance
        and inner[3] <= outer[3] + tolerance
    )


def _object(value: t.Any, path: str, required: tuple[str, ...]) -> dict[str, t.Any]:
    if not isinstance(value, dict):
        raise LayoutSchemaError(path, "expected an object")
    for key in required:
        if key not in value:
            raise LayoutSchemaError(f"{path}.{key}", "missing required field")
    return value


def _optional_string(data: dict[str, t.Any], key: str, path: str) -> str | None:
    value = data.get(key)
    if value is not None and not isinstance(value, str):
        raise LayoutSchemaError(f"{path}.{key}", "expected a string")
    return value


def parse_layout(json_text: str | bytes) -> LayoutDocument:
    """
    Parse and validate a layout JSON document.

    :param json_text:
        Layout JSON.
    :raises LayoutSchemaError:
        With the JSON path of the first violation, e.g.
        ``$.regions[2].kind``.
    """
    try:
        raw = json.loads(json_text)
    except ValueError as ex:
        raise LayoutSchemaError("$", f"invalid JSON: {ex}") from ex

    data = _object(raw, "$", ("page_width", "page_height", "regions"))

    version = data.get("schema_version", LAYOUT_SCHEMA_VERSION)
    if version != LAYOUT_SCHEMA_VERSION:
        raise LayoutSchemaError(
            "$.schema_version", f"unsupported schema version {version!r}"
        )

    width = _number(data["page_width"], "$.page_width")
    height = _number(data["page_height"], "$.page_height")
    if width <= 0:
        raise LayoutSchemaError("$.page_width", "must be positive")
    if height <= 0:
        raise LayoutSchemaError("$.page_height", "must be positive")

    page: T_BBOX = (0, 0, width, height)

    if not isinstance(data["regions"], list):
        raise LayoutSchemaError("$.regions", "expected a list")

    regions = []
    for i, raw_region in enumerate(data["regions"]):
        rpath = f"$.regions[{i}]"
        region = _object(raw_region, rpath, ("kind", "bbox", "lines"))

        kind = region["kind"]
        if kind not in REGION_KINDS:
            raise LayoutSchemaError(
                f"{rpath}.kind",
                f"unknown region kind {kind!r}, expected one of {', '.join(REGION_KINDS)}",
            )

        bbox = _bbox(region["bbox"], f"{rpath}.bbox")
        if not _within(bbox, page):
            raise LayoutSchemaError(f"{rpath}.bbox", "box lies outside the page")

        if not isinstance(region["lines"], list):
            raise LayoutSchemaError(f"{rpath}.lines", "expected a list")

        lines = []
        for j, raw_line in enumerate(region["lines"]):
            lpath = f"{rpath}.lines[{j}]"
            line = _object(raw_line, lpath, ("text", "bbox"))
            if not isinstance(line["text"], str):
                raise LayoutSchemaError(f"{lpath}.text", "expected a string")
            line_bbox = _bbox(line["bbox"], f"{lpath}.bbox")
            if not _within(line_bbox, bbox, LINE_BBOX_TOLERANCE_PX):
                raise LayoutSchemaError(
                    f"{lpath}.bbox", "line box lies outside its region"
                )
            confidence = line.get("confidence")
            if confidence is not None:
                confidence = _number(confidence, f"{lpath}.confidence")
                if not 0 <= confidence <= 1:
                    raise LayoutSchemaError(
                        f"{lpath}.confidence", "must be within [0, 1]"
                    )
            lines.append(Line(line["text"], line_bbox, confidence))

        regions.append(Region(kind, bbox, tuple(lines)))

    return LayoutDocument(
        page_width=width,
        page_height=height,
        regions=tuple(regions),
        image=_optional_string(data, "image", "$"),
        doc_id=_optional_string(data, "doc_id", "$"),
    )


def serialize_layout(doc: LayoutDocument) -> str:
    return json.dumps(doc.to_dict(), ensure_ascii=False)


def load_layout(path: T_PATH) -> LayoutDocument:
    return parse_layout(Path(path).read_text(encoding="utf-8"))


def iter_layout_dir(path: T_PATH) -> t.Iterator[tuple[Path, LayoutDocument]]:
    """
    Yield ``(file, document)`` for every ``*.json`` file, in name order.
    """
    for file in sorted(Path(path).glob("*.json")):
        log.debug("loading layout %s", file)
        yield file, load_layout(file)


def _line_order(line: Line) -> tuple[float, float, float, float, str]:
    x0, y0, x1, y1 = line.bbox
    return (y0, x0, y1, x1, line.text)


def splice_text(doc: LayoutDocument) -> str:
    """
    Join every line of the page in reading order: top edge first, then
    left edge, one line per row of output.
    """
    lines = [line for region in doc.regions for line in region.lines]
    lines.sort(key=_line_order)
    return "\n".join(line.text for line in lines)


def kinds_present(doc: LayoutDocument) -> frozenset[str]:
    return frozenset(region.kind for region in doc.regions)


def mean_confidence(doc: LayoutDocument) -> float | None:
    """
    Mean line confidence, or ``None`` when no line reports one.
    """
    scores = [
        line.confidence
        for region in doc.regions
        for line in region.lines
        if line.confidence is not None
    ]
    if not scores:
        return None
    return sum(scores) / len(scores)
