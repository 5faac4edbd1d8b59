import logging
import typing as t
from dataclasses import dataclass
from dataclasses import replace

import numpy as np
from colour import Color

from ..babel import Translations
from ..babel import get_translations
from ..consts import CHART_HEIGHT_RANGE
from ..consts import CHART_WIDTH_RANGE
from ..consts import DEFAULT_CHART_LOCALE
from ..consts import DEFAULT_VALUE_SCALE
from ..exceptions import ChartSpecError
from ..gateway.fences import extract_json_fence
from ..prompts import language_name
from ..prompts import render_prompt
from .render import ChartRenderer
from .spec import Annotation
from .spec import ChartSeed
from .spec import ChartSpec
from .spec import Series
from .spec import extract_fenced_table
from .spec import spec_from_seed
from .spec import table_csv
from .spec import with_table

if t.TYPE_CHECKING:
    from ..gateway import LLMGateway

log = logging.getLogger("docsynth.chart")

RULE_BASED = "rule_based"
LLM = "llm"
MUTATION_PATHS = (RULE_BASED, LLM)

# legend positions the rule path picks from; both keep the legend clear of the title
SAFE_LEGEND_POSITIONS = ("right", "bottom")
ANNOTATED_TYPES = frozenset({"bar", "line", "area", "scatter", "stacked_bar", "histogram"})

TYPE_RULES = {
    "bar": "Generate only a grouped bar chart, one column of values per group.",
    "line": "Generate only a line chart, one column of values per line.",
    "pie": "Generate only a pie chart with one column of non-negative values.",
    "area": "Generate only an area chart with one column of value, not a stacked area chart.",
    "scatter": "Generate only a scatter chart; the first column holds numeric x values.",
    "stacked_bar": "Generate only a stacked bar chart, one column of values per stacked group.",
    "histogram": (
        "Generate only a histogram with one column of non-negative counts, one row per bin."
    ),
    "box": "Generate only a box plot with the columns min, q1, median, q3, max in that order.",
    "heatmap": "Generate only a heatmap, one column per heatmap column and one row per row.",
}


@dataclass(frozen=True)
class MutationOptions:
    value_scale: float = DEFAULT_VALUE_SCALE
    locale: str = DEFAULT_CHART_LOCALE
    width_range: tuple[int, int] = CHART_WIDTH_RANGE
    height_range: tuple[int, int] = CHART_HEIGHT_RANGE
    annotate: bool = True


@dataclass(frozen=True)
class MutationResult:
    spec: ChartSpec
    table: str


def palette(rng: np.random.Generator, count: int) -> tuple[str, ...]:
    """
    ``count`` colors with evenly spaced hues from a random starting hue.
    """
    start = float(rng.uniform(0.0, 1.0))
    saturation = float(rng.uniform(0.45, 0.75))
    lightness = float(rng.uniform(0.4, 0.55))
    colors = []
    for i in range(max(count, 1)):
        hue = (start + i / max(count, 1)) % 1.0
        colors.append(str(Color(hsl=(hue, saturation, lightness)).hex_l).upper())
    return tuple(colors)


def _perturb(spec: ChartSpec, rng: np.random.Generator, scale: float) -> tuple[Series, ...]:
    non_negative = spec.chart_type in ("pie", "histogram")
    series = []
    for s in spec.series:
        points = []
        for x, value in s.points:
            factor = 1.0 + float(rng.uniform(-scale, scale))
            new = round(value * factor, 2)
            if non_negative:
                new = max(new, 0.0)
            points.append((x, new))
        series.append(Series(s.label, tuple(points)))

    if spec.chart_type == "box":
        # perturbed statistics are re-sorted so they stay ordered
        columns = [sorted(s.values[i] for s in series) for i in range(len(spec.categories))]
        series = [
            Series(s.label, tuple((x, columns[i][k]) for i, x in enumerate(s.xs)))
            for k, s in enumerate(series)
        ]
    return tuple(series)


def _translate_spec(spec: ChartSpec, tr: Translations, topic: str) -> ChartSpec:
    """
    Every visible string of ``spec`` in the target locale.
    """
    topic_text = tr(topic)
    title = tr(spec.title) if spec.title else ""
    if title:
        title = tr.gettext("%(topic)s: %(title)s", topic=topic_text, title=title)
    else:
        title = topic_text

    series = spec.series
    if spec.chart_type != "box":
        series = tuple(Series(tr(s.label), s.points) for s in spec.series)
    if spec.chart_type != "scatter":
        series = tuple(
            Series(s.label, tuple((tr(str(x)), y) for x, y in s.points)) for s in series
        )

    return replace(
        spec,
        title=title,
        topic=topic_text,
        x_label=tr(spec.x_label),
        y_label=tr(spec.y_label),
        series=series,
        locale=tr.locale,
    )


def _peak_annotation(spec: ChartSpec, tr: Translations, rng_seed: int) -> tuple[Annotation, ...]:
    if spec.chart_type not in ANNOTATED_TYPES:
        return ()
    best = max(
        ((si, pi, value) for si, s in enumerate(spec.series) for pi, value in enumerate(s.values)),
        key=lambda item: item[2],
    )
    si, pi, value = best
    text = tr.gettext("Peak: %(value)s", value=tr.format_number(value))
    anchor = ChartRenderer(spec, rng_seed).annotation_for(text, si, pi)
    return (Annotation(text, anchor),)


def _rule_based(
    seed: ChartSeed,
    topics_pool: t.Sequence[str],
    rng_seed: int,
    options: MutationOptions,
    translator: Translations | None,
) -> ChartSpec:
    base = spec_from_seed(seed)
    rng = np.random.default_rng(rng_seed)

    series = _perturb(base, rng, options.value_scale)
    topic = topics_pool[int(rng.integers(len(topics_pool)))]
    n_colors = len(base.categories) if base.chart_type in ("pie", "box") else len(series)
    colors = palette(rng, n_colors)
    width = int(rng.integers(options.width_range[0], options.width_range[1] + 1))
    height = int(rng.integers(options.height_range[0], options.height_range[1] + 1))
    legend = SAFE_LEGEND_POSITIONS[int(rng.integers(len(SAFE_LEGEND_POSITIONS)))]

    spec = replace(
        base,
        series=series,
        colors=colors,
        width_px=width,
        height_px=height,
        legend_position=legend,
        annotations=(),
    )
    tr = translator or get_translations(options.locale)
    spec = _translate_spec(spec, tr, topic)
    if options.annotate:
        spec = replace(spec, annotations=_peak_annotation(spec, tr, rng_seed))
    return spec


def _article(name: str) -> str:
    return "an" if name[:1].lower() in "aeiou" else "a"


def build_mutation_prompt(
    spec: ChartSpec, topics_pool: t.Sequence[str], locale: str = DEFAULT_CHART_LOCALE
) -> str:
    chart_name = spec.chart_type.replace("_", " ") + " chart"
    return render_prompt(
        "chart_mutate",
        article=_article(chart_name),
        chart_name=chart_name,
        code=spec.to_json(),
        topics_pool=", ".join(f'"{topic}"' for topic in topics_pool),
        type_rule=TYPE_RULES[spec.chart_type],
        language_name=language_name(locale),
    )


def parse_mutation(base: ChartSpec, llm_text: str, locale: str) -> ChartSpec:
    """
    Spec from a mutation response: JSON spec fields over ``base``, series
    taken from the fenced table.

    :raises FenceError:
        No table block or no JSON block.
    :raises ChartSpecError:
        The JSON is not an object, changes the chart type or yields an
        invalid spec.
    """
    dataset = extract_fenced_table(llm_text)
    proposed = extract_json_fence(llm_text)
    if not isinstance(proposed, dict):
        raise ChartSpecError("mutation spec is not a JSON object")

    merged = base.to_dict()
    merged.update({k: v for k, v in proposed.items() if k in merged and k != "series"})
    merged["locale"] = locale
    merged["source_id"] = base.source_id
    spec = ChartSpec.from_dict(merged)
    if spec.chart_type != base.chart_type:
        raise ChartSpecError(
            f"model turned the {base.chart_type} chart into a {spec.chart_type} chart"
        )

    spec = with_table(spec, dataset)
    spec.validate()
    return spec


def mutate_spec(
    seed: ChartSeed,
    topics_pool: t.Sequence[str],
    rng_seed: int,
    via: str = RULE_BASED,
    *,
    options: MutationOptions | None = None,
    translator: Translations | None = None,
    gateway: "LLMGateway | None" = None,
) -> MutationResult:
    """
    A diversified, localized variant of ``seed``.

    The rule path is a pure function of ``(seed, topics_pool, rng_seed)``
    and the options. The LLM path asks ``gateway`` for a new spec and data
    table. Either way the returned table holds exactly the values of the
    returned spec.
    """
    options = options or MutationOptions()
    if not topics_pool:
        raise ChartSpecError("topics pool is empty")

    if via == RULE_BASED:
        spec = _rule_based(seed, topics_pool, rng_seed, options, translator)
    elif via == LLM:
        if gateway is None:
            raise ChartSpecError("llm mutation needs a gateway")
        base = spec_from_seed(seed)
        prompt = build_mutation_prompt(base, topics_pool, options.locale)
        completion = gateway.complete(
            gateway.request(prompt, tag=f"chart-mutate-{base.chart_type}")
        )
        spec = parse_mutation(base, completion.text, options.locale)
    else:
        raise ChartSpecError(f"unknown mutation path {via!r}")

    log.debug("mutated seed %s via %s into %r", seed.id, via, spec.title)
    return MutationResult(spec=spec, table=table_csv(spec))
