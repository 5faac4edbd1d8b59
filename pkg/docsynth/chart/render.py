"""
SVG rendering of chart specs.

Layout is computed before anything is drawn, so every text element knows
its box. Boxes are written to the output as ``data-bbox`` attributes
(``x0 y0 x1 y1`` in canvas pixels) next to a ``data-role``; the linter
reads them back from the rendered bytes.
"""

import logging
import math
import typing as t
from dataclasses import dataclass
from dataclasses import field

import numpy as np
from colour import Color

from ..babel import Translations
from ..exceptions import ChartSpecError
from ..exceptions import RenderError
from ..prompts import env
from .geometry import Box
from .geometry import fit_text
from .geometry import fmt
from .geometry import linear
from .geometry import nice_ticks
from .geometry import text_box
from .geometry import text_height
from .geometry import text_width
from .spec import ChartSpec

log = logging.getLogger("docsynth.chart")

MARGIN = 16.0
PAD = 6.0
TITLE_SIZE = 20.0
TITLE_MIN_SIZE = 10.0
LABEL_SIZE = 13.0
TICK_SIZE = 11.0
LEGEND_SIZE = 12.0
ANNOTATION_SIZE = 12.0
SWATCH = 12.0
LEGEND_ROW = 18.0
LEGEND_GAP = 12.0
MIN_PLOT = 40.0

TEXT_COLOR = "#333333"
AXIS_COLOR = "#666666"
GRID_COLOR = "#DDDDDD"

FONT_FAMILIES = {
    "zh": ("Noto Sans CJK SC", "Source Han Sans SC", "Microsoft YaHei"),
    "en": ("DejaVu Sans", "Helvetica", "Arial"),
}
GRID_DASHES = ("", "4 4", "2 3")
BACKGROUNDS = ("#FFFFFF", "#FAFAFA", "#F7F7F2")

TEXT_ROLES = ("title", "axis-label", "tick", "value-label", "legend-label", "annotation")


@dataclass
class Element:
    tag: str
    attrs: list[tuple[str, str]] = field(default_factory=list)
    text: str | None = None
    children: list["Element"] = field(default_factory=list)


def _attrs(**values: t.Any) -> list[tuple[str, str]]:
    out = []
    for name, value in values.items():
        if value is None:
            continue
        key = name.rstrip("_").replace("_", "-")
        out.append((key, fmt(value) if isinstance(value, float) else str(value)))
    return out


def _text(
    text: str,
    size: float,
    x: float,
    baseline: float,
    role: str,
    anchor: str = "middle",
    fill: str = TEXT_COLOR,
) -> Element:
    box = text_box(text, size, x, baseline, anchor)
    return Element(
        "text",
        _attrs(
            x=float(x),
            y=float(baseline),
            font_size=float(size),
            text_anchor=anchor,
            fill=fill,
            data_role=role,
            data_bbox=box.as_attr(),
        ),
        text=text,
    )


def _line(
    x1: float, y1: float, x2: float, y2: float, stroke: str, stroke_width: float | None = None
) -> Element:
    return Element(
        "line", _attrs(x1=x1, y1=y1, x2=x2, y2=y2, stroke=stroke, stroke_width=stroke_width)
    )


def _mix(color: str, share: float) -> str:
    """
    ``color`` blended towards white; ``share`` 1 keeps the color.
    """
    r, g, b = Color(color).rgb
    share = min(max(share, 0.0), 1.0)
    mixed = tuple(1.0 - (1.0 - c) * share for c in (r, g, b))
    return str(Color(rgb=mixed).hex_l).upper()


@dataclass(frozen=True)
class LegendEntry:
    label: str
    color: str
    x: float
    y: float


@dataclass(frozen=True)
class Layout:
    """
    Where everything goes on the canvas.
    """

    canvas: Box
    plot: Box
    title: str
    title_size: float
    title_box: Box | None
    legend_box: Box | None
    legend: tuple[LegendEntry, ...]
    y_ticks: tuple[float, ...]
    x_ticks: tuple[float, ...]


class ChartRenderer:
    """
    Renders one :class:`ChartSpec`.

    :param spec:
        The chart. It is validated first.
    :param rng_seed:
        Drives cosmetic choices only: font family, grid dash pattern and
        background shade.
    """

    def __init__(self, spec: ChartSpec, rng_seed: int = 0) -> None:
        try:
            spec.validate()
        except ChartSpecError as ex:
            raise RenderError(f"cannot render: {ex}") from ex

        self.spec = spec
        self.rng_seed = rng_seed
        self.numbers = Translations(spec.locale)

        rng = np.random.default_rng(rng_seed)
        fonts = FONT_FAMILIES.get(spec.locale, FONT_FAMILIES["en"])
        self.font_family = fonts[int(rng.integers(len(fonts)))]
        self.grid_dash = GRID_DASHES[int(rng.integers(len(GRID_DASHES)))]
        self.background = BACKGROUNDS[int(rng.integers(len(BACKGROUNDS)))]

        self.layout = self._compute_layout()

    # Value domains

    def _value_range(self) -> tuple[float, float]:
        spec = self.spec
        kind = spec.chart_type
        if kind == "stacked_bar":
            n = len(spec.categories)
            pos = [sum(max(s.values[i], 0.0) for s in spec.series) for i in range(n)]
            neg = [sum(min(s.values[i], 0.0) for s in spec.series) for i in range(n)]
            return min(neg + [0.0]), max(pos + [0.0])
        values = [v for s in spec.series for v in s.values]
        lo, hi = min(values), max(values)
        if kind in ("bar", "histogram", "area"):
            lo, hi = min(lo, 0.0), max(hi, 0.0)
        return lo, hi

    def _x_range(self) -> tuple[float, float]:
        xs = [float(x) for s in self.spec.series for x in s.xs]
        return min(xs), max(xs)

    # Layout

    def _fit_title(self, width: float) -> tuple[str, float]:
        title = self.spec.title
        size = TITLE_SIZE
        while size > TITLE_MIN_SIZE and text_width(title, size) > width:
            size -= 1
        return fit_text(title, size, width), size

    def _legend_flow(
        self, labels: list[str], width: float, y0: float, centered: bool
    ) -> tuple[list[LegendEntry], Box]:
        """
        Entries laid out in rows across ``width``, starting at ``y0``.
        """
        max_label = width - SWATCH - 4
        fitted = [fit_text(label, LEGEND_SIZE, max_label) for label in labels]
        widths = [SWATCH + 4 + text_width(label, LEGEND_SIZE) for label in fitted]

        rows: list[list[int]] = [[]]
        used = 0.0
        for i, w in enumerate(widths):
            extra = w if not rows[-1] else w + LEGEND_GAP
            if rows[-1] and used + extra > width:
                rows.append([i])
                used = w
            else:
                rows[-1].append(i)
                used += extra

        entries = []
        left_edges = []
        for r, row in enumerate(rows):
            row_width = sum(widths[i] for i in row) + LEGEND_GAP * (len(row) - 1)
            x = MARGIN + ((width - row_width) / 2 if centered else 0.0)
            left_edges.append((x, x + row_width))
            for i in row:
                entries.append(
                    LegendEntry(fitted[i], self._legend_color(i), x, y0 + r * LEGEND_ROW)
                )
                x += widths[i] + LEGEND_GAP

        box = Box(
            min(x0 for x0, _ in left_edges),
            y0,
            max(x1 for _, x1 in left_edges),
            y0 + len(rows) * LEGEND_ROW,
        )
        return entries, box

    def _legend_column(
        self, labels: list[str], right: float, y0: float, bottom: float
    ) -> tuple[list[LegendEntry], Box]:
        """
        Entries stacked in columns against the right margin.
        """
        col_cap = self.spec.width_px * 0.25
        fitted = [fit_text(label, LEGEND_SIZE, col_cap - SWATCH - 4) for label in labels]
        col_width = max(SWATCH + 4 + text_width(label, LEGEND_SIZE) for label in fitted)

        per_col = max(1, int((bottom - y0) // LEGEND_ROW))
        n_cols = math.ceil(len(fitted) / per_col)
        total_width = n_cols * col_width + (n_cols - 1) * LEGEND_GAP
        x0 = right - total_width

        entries = []
        for i, label in enumerate(fitted):
            col, row = divmod(i, per_col)
            entries.append(
                LegendEntry(
                    label,
                    self._legend_color(i),
                    x0 + col * (col_width + LEGEND_GAP),
                    y0 + row * LEGEND_ROW,
                )
            )
        rows = min(len(fitted), per_col)
        return entries, Box(x0, y0, right, y0 + rows * LEGEND_ROW)

    def _legend_color(self, index: int) -> str:
        return self.spec.color(index)

    def _compute_layout(self) -> Layout:
        spec = self.spec
        width, height = float(spec.width_px), float(spec.height_px)
        canvas = Box(0.0, 0.0, width, height)
        inner = width - 2 * MARGIN
        kind = spec.chart_type

        title, title_size = self._fit_title(inner)
        title_box = None
        top = MARGIN
        if title:
            title_box = text_box(title, title_size, width / 2, MARGIN + title_size)
            top = title_box.y1 + PAD

        has_axes = kind != "pie"
        bottom = height - MARGIN
        right = width - MARGIN

        labels = spec.legend_labels()
        legend: list[LegendEntry] = []
        legend_box = None
        if labels:
            position = spec.legend_position
            if position == "bottom":
                legend, legend_box = self._legend_flow(labels, inner, 0.0, centered=True)
                shift = bottom - legend_box.y1
                legend = [LegendEntry(e.label, e.color, e.x, e.y + shift) for e in legend]
                legend_box = Box(legend_box.x0, legend_box.y0 + shift, legend_box.x1, bottom)
                bottom = legend_box.y0 - PAD
            elif position == "top":
                # drawn in the title band, the plot starts below both
                legend, legend_box = self._legend_flow(labels, inner, MARGIN, centered=True)
                top = max(top, legend_box.y1 + PAD)
            else:
                legend, legend_box = self._legend_column(labels, right, top, bottom)
                right = legend_box.x0 - PAD

        y_ticks: tuple[float, ...] = ()
        x_ticks: tuple[float, ...] = ()
        left = MARGIN
        if has_axes:
            if spec.y_label:
                top += text_height(LABEL_SIZE) + PAD
            if spec.x_label:
                bottom -= text_height(LABEL_SIZE) + PAD
            bottom -= text_height(TICK_SIZE) + 4

            if kind == "heatmap":
                tick_labels = [
                    fit_text(s.label, TICK_SIZE, width * 0.25) for s in spec.series
                ]
            else:
                y_ticks = tuple(nice_ticks(*self._value_range()))
                tick_labels = [self.numbers.format_number(v) for v in y_ticks]
            left += max(text_width(label, TICK_SIZE) for label in tick_labels) + PAD

            if kind == "scatter":
                x_ticks = tuple(nice_ticks(*self._x_range()))

        plot = Box(left, top, right, bottom)
        if plot.width < MIN_PLOT or plot.height < MIN_PLOT:
            raise RenderError(
                f"{spec.width_px}x{spec.height_px} canvas leaves no room for the "
                f"{kind} plot area"
            )

        return Layout(
            canvas=canvas,
            plot=plot,
            title=title,
            title_size=title_size,
            title_box=title_box,
            legend_box=legend_box,
            legend=tuple(legend),
            y_ticks=y_ticks,
            x_ticks=x_ticks,
        )

    # Scales

    def y_scale(self) -> t.Callable[[float], float]:
        plot = self.layout.plot
        ticks = self.layout.y_ticks
        return linear((ticks[0], ticks[-1]), (plot.y1, plot.y0))

    def x_scale(self) -> t.Callable[[float], float]:
        plot = self.layout.plot
        ticks = self.layout.x_ticks
        return linear((ticks[0], ticks[-1]), (plot.x0, plot.x1))

    def slot(self) -> float:
        return self.layout.plot.width / len(self.spec.categories)

    def slot_center(self, index: int) -> float:
        return self.layout.plot.x0 + self.slot() * (index + 0.5)

    def mark_position(self, series_index: int, point_index: int) -> tuple[float, float]:
        """
        Canvas position of the top of one data mark.
        """
        spec = self.spec
        kind = spec.chart_type
        plot = self.layout.plot
        s = spec.series[series_index]
        x_value, value = s.points[point_index]

        if kind == "pie":
            return plot.center_x, plot.center_y
        if kind == "heatmap":
            cell_h = plot.height / len(spec.series)
            return self.slot_center(point_index), plot.y0 + cell_h * series_index
        if kind == "scatter":
            return self.x_scale()(float(x_value)), self.y_scale()(value)

        y = self.y_scale()
        if kind == "bar":
            group = self.slot() * 0.8
            bar = group / len(spec.series)
            x = self.slot_center(point_index) - group / 2 + bar * (series_index + 0.5)
            return x, min(y(value), y(0.0))
        if kind == "stacked_bar":
            below = sum(
                other.values[point_index]
                for other in spec.series[:series_index]
                if (other.values[point_index] >= 0) == (value >= 0)
            )
            return self.slot_center(point_index), min(y(below), y(below + value))
        if kind == "box":
            return self.slot_center(point_index), y(spec.series[-1].values[point_index])
        return self.slot_center(point_index), y(value)

    def annotation_for(self, text: str, series_index: int, point_index: int) -> tuple[float, float]:
        """
        Anchor for an annotation above a data mark, moved so that its box
        stays inside the plot area.
        """
        plot = self.layout.plot
        x, y = self.mark_position(series_index, point_index)
        box = text_box(text, ANNOTATION_SIZE, x, y - 4)
        half = box.width / 2
        x = min(max(x, plot.x0 + half), plot.x1 - half)
        baseline = y - 4
        if baseline - ANNOTATION_SIZE < plot.y0:
            baseline = plot.y0 + ANNOTATION_SIZE
        if baseline - ANNOTATION_SIZE + text_height(ANNOTATION_SIZE) > plot.y1:
            baseline = plot.y1 - text_height(ANNOTATION_SIZE) + ANNOTATION_SIZE
        return round(x, 2), round(baseline, 2)

    # Drawing

    def _draw_title(self) -> list[Element]:
        layout = self.layout
        if not layout.title:
            return []
        return [
            _text(
                layout.title,
                layout.title_size,
                self.spec.width_px / 2,
                MARGIN + layout.title_size,
                "title",
            )
        ]

    def _draw_legend(self) -> list[Element]:
        layout = self.layout
        if layout.legend_box is None:
            return []
        baseline_offset = (LEGEND_ROW - text_height(LEGEND_SIZE)) / 2 + LEGEND_SIZE
        children = []
        for entry in layout.legend:
            children.append(
                Element(
                    "g",
                    _attrs(class_="legend-entry"),
                    children=[
                        Element(
                            "rect",
                            _attrs(
                                x=entry.x,
                                y=entry.y + (LEGEND_ROW - SWATCH) / 2,
                                width=SWATCH,
                                height=SWATCH,
                                fill=entry.color,
                            ),
                        ),
                        _text(
                            entry.label,
                            LEGEND_SIZE,
                            entry.x + SWATCH + 4,
                            entry.y + baseline_offset,
                            "legend-label",
                            anchor="start",
                        ),
                    ],
                )
            )
        return [
            Element(
                "g",
                _attrs(data_role="legend", data_bbox=layout.legend_box.as_attr()),
                children=children,
            )
        ]

    def _draw_axes(self) -> list[Element]:
        spec = self.spec
        kind = spec.chart_type
        plot = self.layout.plot
        width = float(spec.width_px)
        out: list[Element] = []
        tick_baseline = plot.y1 + 4 + TICK_SIZE

        if kind == "heatmap":
            cell_h = plot.height / len(spec.series)
            for i, s in enumerate(spec.series):
                label = fit_text(s.label, TICK_SIZE, width * 0.25)
                middle = plot.y0 + cell_h * (i + 0.5)
                out.append(
                    _text(label, TICK_SIZE, plot.x0 - PAD, middle + TICK_SIZE * 0.35, "tick", "end")
                )
        else:
            y = self.y_scale()
            for value in self.layout.y_ticks:
                pos = y(value)
                out.append(
                    Element(
                        "line",
                        _attrs(
                            x1=plot.x0,
                            y1=pos,
                            x2=plot.x1,
                            y2=pos,
                            stroke=GRID_COLOR,
                            stroke_dasharray=self.grid_dash or None,
                        ),
                    )
                )
                out.append(
                    _text(
                        self.numbers.format_number(value),
                        TICK_SIZE,
                        plot.x0 - PAD,
                        min(max(pos + TICK_SIZE * 0.35, TICK_SIZE), plot.y1 + TICK_SIZE * 0.35),
                        "tick",
                        "end",
                    )
                )

        if kind == "scatter":
            x = self.x_scale()
            for value in self.layout.x_ticks:
                label = self.numbers.format_number(value)
                half = text_width(label, TICK_SIZE) / 2
                center = min(max(x(value), half + 1), width - half - 1)
                out.append(_text(label, TICK_SIZE, center, tick_baseline, "tick"))
        else:
            slot = self.slot()
            for i, category in enumerate(spec.categories):
                label = fit_text(str(category), TICK_SIZE, slot - 2)
                if label:
                    out.append(
                        _text(label, TICK_SIZE, self.slot_center(i), tick_baseline, "tick")
                    )

        out.append(_line(plot.x0, plot.y1, plot.x1, plot.y1, AXIS_COLOR))
        out.append(_line(plot.x0, plot.y0, plot.x0, plot.y1, AXIS_COLOR))

        if spec.x_label:
            label = fit_text(spec.x_label, LABEL_SIZE, plot.width)
            baseline = tick_baseline - TICK_SIZE + text_height(TICK_SIZE) + PAD + LABEL_SIZE
            out.append(_text(label, LABEL_SIZE, plot.center_x, baseline, "axis-label"))
        if spec.y_label:
            label = fit_text(spec.y_label, LABEL_SIZE, plot.x1 - MARGIN)
            baseline = plot.y0 - PAD - text_height(LABEL_SIZE) + LABEL_SIZE
            out.append(_text(label, LABEL_SIZE, MARGIN, baseline, "axis-label", "start"))
        return out

    def _draw_bars(self) -> list[Element]:
        spec = self.spec
        y = self.y_scale()
        zero = y(0.0)
        group = self.slot() * 0.8
        bar = group / len(spec.series)
        out = []
        for si, s in enumerate(spec.series):
            for i, value in enumerate(s.values):
                x0 = self.slot_center(i) - group / 2 + bar * si
                top = y(value)
                out.append(
                    Element(
                        "rect",
                        _attrs(
                            x=x0,
                            y=min(top, zero),
                            width=bar,
                            height=abs(top - zero),
                            fill=spec.color(si),
                        ),
                    )
                )
        return out

    def _draw_stacked(self) -> list[Element]:
        spec = self.spec
        y = self.y_scale()
        width = self.slot() * 0.6
        out = []
        for i in range(len(spec.categories)):
            pos = neg = 0.0
            for si, s in enumerate(spec.series):
                value = s.values[i]
                base = pos if value >= 0 else neg
                a, b = y(base), y(base + value)
                if value >= 0:
                    pos += value
                else:
                    neg += value
                out.append(
                    Element(
                        "rect",
                        _attrs(
                            x=self.slot_center(i) - width / 2,
                            y=min(a, b),
                            width=width,
                            height=abs(a - b),
                            fill=spec.color(si),
                        ),
                    )
                )
        return out

    def _draw_histogram(self) -> list[Element]:
        spec = self.spec
        y = self.y_scale()
        zero = y(0.0)
        slot = self.slot()
        plot = self.layout.plot
        out = []
        for i, value in enumerate(spec.series[0].values):
            top = y(value)
            out.append(
                Element(
                    "rect",
                    _attrs(
                        x=plot.x0 + slot * i,
                        y=min(top, zero),
                        width=slot,
                        height=abs(top - zero),
                        fill=spec.color(0),
                        stroke="#FFFFFF",
                    ),
                )
            )
        return out

    def _polyline(self, si: int) -> Element:
        points = " ".join(
            f"{fmt(x)},{fmt(y)}"
            for x, y in (self.mark_position(si, i) for i in range(len(self.spec.series[si].points)))
        )
        return Element(
            "polyline",
            _attrs(points=points, fill="none", stroke=self.spec.color(si), stroke_width=2.0),
        )

    def _draw_lines(self) -> list[Element]:
        out = []
        for si, s in enumerate(self.spec.series):
            out.append(self._polyline(si))
            for i in range(len(s.points)):
                x, y = self.mark_position(si, i)
                out.append(Element("circle", _attrs(cx=x, cy=y, r=3.0, fill=self.spec.color(si))))
        return out

    def _draw_area(self) -> list[Element]:
        spec = self.spec
        base = self.y_scale()(0.0)
        points = [self.mark_position(0, i) for i in range(len(spec.series[0].points))]
        path = (
            f"M{fmt(points[0][0])},{fmt(base)} "
            + " ".join(f"L{fmt(x)},{fmt(y)}" for x, y in points)
            + f" L{fmt(points[-1][0])},{fmt(base)} Z"
        )
        return [
            Element("path", _attrs(d=path, fill=spec.color(0), fill_opacity=0.35, stroke="none")),
            self._polyline(0),
        ]

    def _draw_scatter(self) -> list[Element]:
        out = []
        for si, s in enumerate(self.spec.series):
            for i in range(len(s.points)):
                x, y = self.mark_position(si, i)
                out.append(
                    Element(
                        "circle",
                        _attrs(cx=x, cy=y, r=4.0, fill=self.spec.color(si), fill_opacity=0.8),
                    )
                )
        return out

    def _draw_box(self) -> list[Element]:
        spec = self.spec
        y = self.y_scale()
        width = self.slot() * 0.5
        out = []
        for i in range(len(spec.categories)):
            lo, q1, median, q3, hi = (y(s.values[i]) for s in spec.series)
            center = self.slot_center(i)
            left, right = center - width / 2, center + width / 2
            color = spec.color(i)
            cap = width / 4
            out.extend(
                [
                    _line(center, lo, center, q1, AXIS_COLOR),
                    _line(center, q3, center, hi, AXIS_COLOR),
                    _line(center - cap, lo, center + cap, lo, AXIS_COLOR),
                    _line(center - cap, hi, center + cap, hi, AXIS_COLOR),
                    Element(
                        "rect",
                        _attrs(
                            x=left,
                            y=q3,
                            width=width,
                            height=q1 - q3,
                            fill=_mix(color, 0.6),
                            stroke=color,
                        ),
                    ),
                    _line(left, median, right, median, color, 2.0),
                ]
            )
        return out

    def _draw_heatmap(self) -> list[Element]:
        spec = self.spec
        plot = self.layout.plot
        values = [v for s in spec.series for v in s.values]
        lo, hi = min(values), max(values)
        slot = self.slot()
        cell_h = plot.height / len(spec.series)
        out = []
        for si, s in enumerate(spec.series):
            for i, value in enumerate(s.values):
                share = (value - lo) / (hi - lo) if hi > lo else 1.0
                x0 = plot.x0 + slot * i
                y0 = plot.y0 + cell_h * si
                out.append(
                    Element(
                        "rect",
                        _attrs(
                            x=x0,
                            y=y0,
                            width=slot,
                            height=cell_h,
                            fill=_mix(spec.color(0), 0.15 + 0.85 * share),
                            stroke="#FFFFFF",
                        ),
                    )
                )
                label = self.numbers.format_number(value)
                fits = text_width(label, TICK_SIZE) <= slot - 4
                if fits and text_height(TICK_SIZE) <= cell_h - 2:
                    out.append(
                        _text(
                            label,
                            TICK_SIZE,
                            x0 + slot / 2,
                            y0 + (cell_h - text_height(TICK_SIZE)) / 2 + TICK_SIZE,
                            "value-label",
                            fill="#FFFFFF" if share > 0.6 else TEXT_COLOR,
                        )
                    )
        return out

    def _draw_pie(self) -> list[Element]:
        spec = self.spec
        plot = self.layout.plot
        values = spec.series[0].values
        total = sum(values)
        cx, cy = plot.center_x, plot.center_y
        radius = min(plot.width, plot.height) / 2 - 4
        out: list[Element] = []

        if total <= 0:
            empty = _attrs(cx=cx, cy=cy, r=radius, fill="none", stroke=AXIS_COLOR)
            return [Element("circle", empty)]

        angle = -math.pi / 2
        for i, value in enumerate(values):
            share = value / total
            if share <= 0:
                continue
            end = angle + share * 2 * math.pi
            if share >= 1:
                out.append(Element("circle", _attrs(cx=cx, cy=cy, r=radius, fill=spec.color(i))))
            else:
                large = 1 if share > 0.5 else 0
                d = (
                    f"M{fmt(cx)},{fmt(cy)} "
                    f"L{fmt(cx + radius * math.cos(angle))},{fmt(cy + radius * math.sin(angle))} "
                    f"A{fmt(radius)},{fmt(radius)} 0 {large} 1 "
                    f"{fmt(cx + radius * math.cos(end))},{fmt(cy + radius * math.sin(end))} Z"
                )
                out.append(Element("path", _attrs(d=d, fill=spec.color(i), stroke="#FFFFFF")))

            label = self.numbers.format_number(round(share * 100, 1)) + "%"
            middle = (angle + end) / 2
            lx = cx + radius * 0.65 * math.cos(middle)
            ly = cy + radius * 0.65 * math.sin(middle) + TICK_SIZE * 0.35
            if share >= 0.04 and text_width(label, TICK_SIZE) <= radius * 0.6:
                out.append(_text(label, TICK_SIZE, lx, ly, "value-label", fill="#FFFFFF"))
            angle = end
        return out

    def _draw_marks(self) -> list[Element]:
        draw = {
            "bar": self._draw_bars,
            "stacked_bar": self._draw_stacked,
            "histogram": self._draw_histogram,
            "line": self._draw_lines,
            "area": self._draw_area,
            "scatter": self._draw_scatter,
            "box": self._draw_box,
            "heatmap": self._draw_heatmap,
            "pie": self._draw_pie,
        }[self.spec.chart_type]
        return draw()

    def _draw_annotations(self) -> list[Element]:
        return [
            _text(a.text, ANNOTATION_SIZE, a.anchor[0], a.anchor[1], "annotation")
            for a in self.spec.annotations
        ]

    def elements(self) -> list[Element]:
        out = self._draw_title()
        if self.spec.chart_type != "pie":
            out += self._draw_axes()
        out += self._draw_marks()
        out += self._draw_legend()
        out += self._draw_annotations()
        return out

    def render(self) -> bytes:
        template = env.get_template("charts/chart.svg")
        text = template.render(
            width=self.spec.width_px,
            height=self.spec.height_px,
            font_family=self.font_family,
            chart_type=self.spec.chart_type,
            locale=self.spec.locale,
            background=self.background,
            elements=self.elements(),
        )
        return text.encode("utf-8")


def render(spec: ChartSpec, rng_seed: int = 0) -> bytes:
    """
    SVG bytes for ``spec``; identical inputs give identical bytes.

    :raises RenderError:
        The spec is invalid or the canvas is too small for its plot.
    """
    renderer = ChartRenderer(spec, rng_seed)
    log.debug("rendering %s chart %r", spec.chart_type, spec.title)
    return renderer.render()
