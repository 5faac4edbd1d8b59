"""
Chart specifications, seeds and their data tables.

Every chart type shares one table layout: the first column holds the
x values (categories, or numbers for scatter charts) and each further
column holds one series::

    Quarter,North,South
    Q1,12.5,9
    Q2,14,11.25

Box charts use the five columns ``min,q1,median,q3,max``; heatmaps use one
column per heatmap column and one row per heatmap row.
"""

import csv
import json
import math
import re
import typing as t
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from pathlib import Path

import tablib

from .._types import T_PATH
from ..consts import BOX_STATS
from ..consts import CHART_TYPES
from ..consts import LANGUAGES
from ..consts import LEGEND_POSITIONS
from ..exceptions import ChartSpecError
from ..exceptions import NoTableBlockError
from ..gateway.fences import iter_fences
from ..tools import format_number
from ..tools import parse_number

HEX_COLOR_RE = re.compile(r"^#[0-9A-Fa-f]{6}$")

# chart types whose x axis is categorical
CATEGORY_TYPES = frozenset(CHART_TYPES) - {"scatter"}
SINGLE_SERIES_TYPES = frozenset({"pie", "area", "histogram"})
NON_NEGATIVE_TYPES = frozenset({"pie", "histogram"})

TABLE_FENCE_LABELS = frozenset({"csv", "plaintext", "text", "txt", "plain"})

T_X = t.Union[str, float]


def normalize_chart_type(name: str) -> str:
    key = name.strip().lower().replace("-", "_").replace(" ", "_")
    if key.endswith("_chart"):
        key = key[: -len("_chart")]
    aliases = {"stackedbar": "stacked_bar", "hist": "histogram", "boxplot": "box"}
    return aliases.get(key, key)


@dataclass(frozen=True)
class Series:
    label: str
    points: tuple[tuple[T_X, float], ...]

    @property
    def xs(self) -> tuple[T_X, ...]:
        return tuple(x for x, _ in self.points)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(y for _, y in self.points)


@dataclass(frozen=True)
class Annotation:
    text: str
    anchor: tuple[float, float]


@dataclass(frozen=True)
class ChartSpec:
    """
    Structured description of one chart; everything the renderer draws
    comes from here.
    """

    chart_type: str
    title: str
    series: tuple[Series, ...]
    colors: tuple[str, ...]
    topic: str = ""
    width_px: int = 800
    height_px: int = 600
    x_label: str = ""
    y_label: str = ""
    annotations: tuple[Annotation, ...] = ()
    locale: str = "en"
    legend_position: str = "right"
    source_id: str | None = field(default=None, compare=True)

    @property
    def categories(self) -> tuple[T_X, ...]:
        return self.series[0].xs if self.series else ()

    def legend_labels(self) -> list[str]:
        """
        One entry per series, or per slice for pie charts. Box charts and
        heatmaps carry no legend.
        """
        if self.chart_type in ("box", "heatmap"):
            return []
        if self.chart_type == "pie":
            return [str(x) for x in self.categories]
        return [s.label for s in self.series]

    def color(self, index: int) -> str:
        return self.colors[index % len(self.colors)]

    def validate(self) -> None:
        """
        :raises ChartSpecError:
            On the first violated invariant.
        """
        if self.chart_type not in CHART_TYPES:
            raise ChartSpecError(f"unknown chart type {self.chart_type!r}")
        if self.width_px <= 0 or self.height_px <= 0:
            raise ChartSpecError("width and height must be positive")
        if not self.colors:
            raise ChartSpecError("at least one color is required")
        for color in self.colors:
            if not HEX_COLOR_RE.match(color):
                raise ChartSpecError(f"color {color!r} is not #RRGGBB")
        if self.locale not in LANGUAGES:
            raise ChartSpecError(f"unknown locale {self.locale!r}")
        if self.legend_position not in LEGEND_POSITIONS:
            raise ChartSpecError(f"unknown legend position {self.legend_position!r}")
        if not self.series:
            raise ChartSpecError("at least one series is required")
        for s in self.series:
            if not s.points:
                raise ChartSpecError(f"series {s.label!r} has no points")
            if any(not math.isfinite(y) for y in s.values):
                raise ChartSpecError(f"series {s.label!r} has a non-finite value")
        self._validate_shape()

    def _validate_shape(self) -> None:
        kind = self.chart_type
        labels = [s.label for s in self.series]
        if len(set(labels)) != len(labels):
            raise ChartSpecError("series labels must be unique")

        if kind == "scatter":
            for s in self.series:
                if any(isinstance(x, str) for x in s.xs):
                    raise ChartSpecError("scatter x values must be numbers")
                if len(set(s.xs)) != len(s.xs):
                    raise ChartSpecError(f"series {s.label!r} repeats an x value")
            return

        first = self.series[0].xs
        if any(not isinstance(x, str) for x in first):
            raise ChartSpecError(f"{kind} charts need category labels")
        if len(set(first)) != len(first):
            raise ChartSpecError("category labels must be unique")
        for s in self.series[1:]:
            if s.xs != first:
                raise ChartSpecError(
                    f"series {s.label!r} does not share the categories of "
                    f"{self.series[0].label!r}"
                )

        if kind in SINGLE_SERIES_TYPES and len(self.series) != 1:
            raise ChartSpecError(f"{kind} charts take exactly one series")
        if kind in NON_NEGATIVE_TYPES and any(
            y < 0 for s in self.series for y in s.values
        ):
            raise ChartSpecError(f"{kind} values must not be negative")
        if kind == "box":
            if tuple(labels) != BOX_STATS:
                raise ChartSpecError(f"box series must be {', '.join(BOX_STATS)}")
            for i in range(len(first)):
                stats = [s.values[i] for s in self.series]
                if stats != sorted(stats):
                    raise ChartSpecError(
                        f"box statistics of {first[i]!r} are not ordered"
                    )

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "chart_type": self.chart_type,
            "title": self.title,
            "topic": self.topic,
            "width_px": self.width_px,
            "height_px": self.height_px,
            "x_label": self.x_label,
            "y_label": self.y_label,
            "locale": self.locale,
            "legend_position": self.legend_position,
            "colors": list(self.colors),
            "series": [
                {"label": s.label, "points": [[x, y] for x, y in s.points]}
                for s in self.series
            ],
            "annotations": [
                {"text": a.text, "anchor": list(a.anchor)} for a in self.annotations
            ],
            "source_id": self.source_id,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_dict(cls, data: t.Mapping[str, t.Any]) -> "ChartSpec":
        try:
            series = tuple(
                Series(
                    label=str(s["label"]),
                    points=tuple(_point(p) for p in s.get("points") or ()),
                )
                for s in data.get("series") or ()
            )
            annotations = tuple(
                Annotation(
                    text=str(a["text"]),
                    anchor=(float(a["anchor"][0]), float(a["anchor"][1])),
                )
                for a in data.get("annotations") or ()
            )
            return cls(
                chart_type=normalize_chart_type(str(data["chart_type"])),
                title=str(data.get("title") or ""),
                topic=str(data.get("topic") or ""),
                width_px=int(data.get("width_px", 800)),
                height_px=int(data.get("height_px", 600)),
                x_label=str(data.get("x_label") or ""),
                y_label=str(data.get("y_label") or ""),
                locale=str(data.get("locale") or "en"),
                legend_position=str(data.get("legend_position") or "right"),
                colors=tuple(str(c) for c in data.get("colors") or ()),
                series=series,
                annotations=annotations,
                source_id=data.get("source_id"),
            )
        except (KeyError, IndexError, TypeError, ValueError) as ex:
            raise ChartSpecError(f"malformed chart spec: {ex}") from ex


def _point(raw: t.Any) -> tuple[T_X, float]:
    x, y = raw
    value = parse_number(y)
    if value is None:
        raise ValueError(f"not a number: {y!r}")
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return float(x), value
    return str(x), value


@dataclass(frozen=True)
class ChartSeed:
    """
    A seed chart: the plot script it came with (kept as opaque text), its
    data table and metadata.
    """

    id: str
    script_text: str
    data_table: str
    chart_type: str
    meta: t.Mapping[str, t.Any] = field(default_factory=dict)

    def validate(self) -> None:
        if normalize_chart_type(self.chart_type) not in CHART_TYPES:
            raise ChartSpecError(f"seed {self.id}: unknown chart type")
        dataset = parse_csv_table(self.data_table)
        if not dataset.headers:
            raise ChartSpecError(f"seed {self.id}: table has no header row")

    @classmethod
    def load(cls, path: T_PATH) -> "ChartSeed":
        """
        Load a seed folder holding ``script.txt``, ``table.csv`` and
        ``meta.json``.
        """
        root = Path(path)
        meta = json.loads((root / "meta.json").read_text(encoding="utf-8"))
        script = root / "script.txt"
        seed = cls(
            id=str(meta.get("id") or root.name),
            script_text=script.read_text(encoding="utf-8") if script.exists() else "",
            data_table=(root / "table.csv").read_text(encoding="utf-8"),
            chart_type=normalize_chart_type(str(meta["chart_type"])),
            meta=meta,
        )
        seed.validate()
        return seed


def load_seeds(root: T_PATH) -> list[ChartSeed]:
    return [
        ChartSeed.load(folder)
        for folder in sorted(Path(root).iterdir())
        if folder.is_dir() and (folder / "meta.json").exists()
    ]


def parse_csv_table(text: str) -> tablib.Dataset:
    """
    Parse CSV text with a header row.

    :raises ChartSpecError:
        The text is not a rectangular table with at least two columns and
        one data row.
    """
    body = text.strip()
    if not body:
        raise ChartSpecError("empty table")
    try:
        dataset = tablib.Dataset().load(body, format="csv")
    except (tablib.InvalidDimensions, csv.Error, ValueError) as ex:
        raise ChartSpecError(f"not a CSV table: {ex}") from ex

    headers = [str(h).strip() for h in dataset.headers or []]
    if len(headers) < 2 or not all(headers):
        raise ChartSpecError("table needs a header row with at least two columns")
    if dataset.height < 1:
        raise ChartSpecError("table has no data rows")

    cleaned = tablib.Dataset(headers=headers)
    for row in dataset:
        cleaned.append([str(cell).strip() for cell in row])
    return cleaned


def extract_fenced_table(llm_text: str) -> tablib.Dataset:
    """
    Return the first fenced block of ``llm_text`` that parses as a CSV
    table. A format word on the fence line (``csv``, ``plaintext``) is
    dropped; blocks labeled ``json`` are skipped.

    :raises NoTableBlockError:
        No block parses.
    """
    for label, body in iter_fences(llm_text):
        if label == "json":
            continue
        candidate = body if label is None or label in TABLE_FENCE_LABELS else label + body
        try:
            return parse_csv_table(candidate)
        except ChartSpecError:
            continue
    raise NoTableBlockError("no fenced block holds a CSV table", llm_text.strip()[:200])


def table_from_spec(spec: ChartSpec) -> tablib.Dataset:
    """
    The data table of ``spec``, cell values formatted so that parsing them
    back yields exactly the spec's values.
    """
    first_header = spec.x_label or "category"
    headers = [first_header] + [s.label for s in spec.series]
    dataset = tablib.Dataset(headers=headers)

    if spec.chart_type == "scatter":
        xs: list[T_X] = []
        for s in spec.series:
            xs.extend(x for x in s.xs if x not in xs)
        lookup = [dict(s.points) for s in spec.series]
        for x in xs:
            row = [format_number(float(x))]
            for values in lookup:
                row.append(format_number(values[x]) if x in values else "")
            dataset.append(row)
        return dataset

    for i, x in enumerate(spec.categories):
        dataset.append([str(x)] + [format_number(s.values[i]) for s in spec.series])
    return dataset


def table_csv(spec: ChartSpec) -> str:
    return dataset_csv(table_from_spec(spec))


def dataset_csv(dataset: tablib.Dataset) -> str:
    return str(dataset.export("csv", lineterminator="\n"))


def series_from_table(chart_type: str, dataset: tablib.Dataset) -> tuple[Series, ...]:
    """
    Inverse of :func:`table_from_spec`.

    :raises ChartSpecError:
        A value cell does not parse as a number.
    """
    headers = list(dataset.headers or [])
    if len(headers) < 2:
        raise ChartSpecError("table needs at least two columns")

    rows = [list(row) for row in dataset]
    series = []
    for col, label in enumerate(headers[1:], start=1):
        points: list[tuple[T_X, float]] = []
        for row in rows:
            raw_x, raw_y = row[0], row[col]
            if chart_type == "scatter":
                if str(raw_y).strip() == "":
                    continue
                x_value = parse_number(raw_x)
                if x_value is None:
                    raise ChartSpecError(f"scatter x value {raw_x!r} is not a number")
                x: T_X = x_value
            else:
                x = str(raw_x)
            y = parse_number(raw_y)
            if y is None:
                raise ChartSpecError(f"cell {raw_y!r} in column {label!r} is not a number")
            points.append((x, y))
        series.append(Series(label=str(label), points=tuple(points)))
    return tuple(series)


def spec_from_seed(seed: ChartSeed) -> ChartSpec:
    """
    Base spec of a seed: its table, type and whatever ``meta.json`` says
    about titles and colors.
    """
    dataset = parse_csv_table(seed.data_table)
    meta = seed.meta
    spec = ChartSpec(
        chart_type=normalize_chart_type(seed.chart_type),
        title=str(meta.get("title") or ""),
        topic=str(meta.get("topic") or ""),
        width_px=int(meta.get("width_px", 800)),
        height_px=int(meta.get("height_px", 600)),
        x_label=str(meta.get("x_label") or dataset.headers[0]),
        y_label=str(meta.get("y_label") or ""),
        locale=str(meta.get("locale") or "en"),
        legend_position=str(meta.get("legend_position") or "right"),
        colors=tuple(meta.get("colors") or ("#4C72B0", "#DD8452", "#55A868")),
        series=series_from_table(normalize_chart_type(seed.chart_type), dataset),
        source_id=seed.id,
    )
    spec.validate()
    return spec


def with_table(spec: ChartSpec, dataset: tablib.Dataset) -> ChartSpec:
    """
    Replace the series of ``spec`` with the content of ``dataset``.
    """
    headers = list(dataset.headers or [])
    return replace(
        spec,
        series=series_from_table(spec.chart_type, dataset),
        x_label=headers[0] if headers else spec.x_label,
    )
