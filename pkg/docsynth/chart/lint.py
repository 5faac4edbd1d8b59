import logging
from dataclasses import dataclass

from bs4 import BeautifulSoup
from bs4 import Tag

from .geometry import Box
from .spec import ChartSpec

log = logging.getLogger("docsynth.chart")

TEXT_OUT_OF_BOUNDS = "text-out-of-bounds"
ANNOTATION_OUT_OF_BOUNDS = "annotation-out-of-bounds"
LEGEND_CLIPPED = "legend-clipped"
LEGEND_TITLE_OVERLAP = "legend-title-overlap"
CANVAS_MISMATCH = "canvas-mismatch"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    role: str | None = None
    bbox: Box | None = None

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def _box(tag: Tag) -> Box | None:
    value = tag.get("data-bbox")
    if not isinstance(value, str):
        return None
    try:
        return Box.from_attr(value)
    except ValueError:
        return None


def _size(value: object) -> float | None:
    try:
        return float(str(value))
    except ValueError:
        return None


def lint_layout(spec: ChartSpec, rendered: bytes | str) -> list[Diagnostic]:
    """
    Check the boxes recorded in a rendered chart.

    Reported: text or annotations outside the canvas, a legend clipped by
    the canvas, a legend overlapping the title, and an SVG whose size
    differs from the spec. An empty list means the chart passed.
    """
    soup = BeautifulSoup(rendered, "html.parser")
    svg = soup.find("svg")
    canvas = Box(0.0, 0.0, float(spec.width_px), float(spec.height_px))
    found: list[Diagnostic] = []

    if not isinstance(svg, Tag):
        return [Diagnostic(CANVAS_MISMATCH, "no svg element")]

    width, height = _size(svg.get("width")), _size(svg.get("height"))
    if width != canvas.width or height != canvas.height:
        found.append(
            Diagnostic(
                CANVAS_MISMATCH,
                f"svg is {svg.get('width')}x{svg.get('height')}, "
                f"spec says {spec.width_px}x{spec.height_px}",
            )
        )

    title: Box | None = None
    legend: Box | None = None
    for tag in svg.find_all(attrs={"data-role": True}):
        role = str(tag["data-role"])
        box = _box(tag)
        if box is None:
            continue

        if role == "title":
            title = box
        if role == "legend":
            legend = box
            if not box.within(canvas):
                found.append(
                    Diagnostic(LEGEND_CLIPPED, "legend is clipped by the canvas", role, box)
                )
            continue

        if box.within(canvas):
            continue
        text = tag.get_text()
        if role == "annotation":
            found.append(
                Diagnostic(
                    ANNOTATION_OUT_OF_BOUNDS,
                    f"annotation {text!r} exceeds the canvas",
                    role,
                    box,
                )
            )
        else:
            found.append(
                Diagnostic(TEXT_OUT_OF_BOUNDS, f"{role} {text!r} exceeds the canvas", role, box)
            )

    if title is not None and legend is not None and title.intersects(legend):
        found.append(
            Diagnostic(LEGEND_TITLE_OVERLAP, "legend overlaps the title", "legend", legend)
        )

    for diagnostic in found:
        log.warning("chart %s: %s", spec.source_id or spec.title, diagnostic)
    return found
