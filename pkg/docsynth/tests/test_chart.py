import re
from dataclasses import replace

import numpy as np
import pytest

from docsynth.chart import Annotation
from docsynth.chart import ChartSpec
from docsynth.chart import MutationOptions
from docsynth.chart import Series
from docsynth.chart import default_task_matrix
from docsynth.chart import extract_fenced_table
from docsynth.chart import lint_layout
from docsynth.chart import load_seeds
from docsynth.chart import mutate_spec
from docsynth.chart import render
from docsynth.chart import spec_from_seed
from docsynth.chart import table_csv
from docsynth.chart import verify_chart_answer
from docsynth.chart.lint import ANNOTATION_OUT_OF_BOUNDS
from docsynth.chart.lint import CANVAS_MISMATCH
from docsynth.chart.lint import LEGEND_TITLE_OVERLAP
from docsynth.chart.mutate import LLM
from docsynth.chart.mutate import palette
from docsynth.chart.spec import HEX_COLOR_RE
from docsynth.chart.tasks import PROPORTION
from docsynth.chart.tasks import VALUE_LOOKUP
from docsynth.chart.tasks import TaskMatrix
from docsynth.chart.tasks import normalize_task_type
from docsynth.chart.verify import ChartTable
from docsynth.consts import CHART_HEIGHT_RANGE
from docsynth.consts import CHART_WIDTH_RANGE
from docsynth.consts import DEFAULT_TOPICS
from docsynth.corpus import Provenance
from docsynth.corpus import Verdict
from docsynth.corpus import make_record
from docsynth.exceptions import ChartSpecError
from docsynth.exceptions import NoTableBlockError
from docsynth.exceptions import RenderError
from docsynth.exceptions import TaskMatrixError
from docsynth.gateway import LLMGateway
from docsynth.pipelines import gen_chart_qa

from .stub_llm import MUTATED_COLORS
from .stub_llm import MUTATED_TITLE
from .stub_llm import StubLLM
from .stub_llm import fenced
from .stub_llm import pair
from .stub_llm import stub_session


@pytest.fixture
def seeds(fixtures):
    return {seed.id: seed for seed in load_seeds(fixtures / "chart_seeds")}


@pytest.fixture
def bar(seeds):
    return spec_from_seed(seeds["bar_revenue"])


def bar_spec(**kwargs):
    spec = ChartSpec(
        chart_type="bar",
        title="Visitors",
        colors=("#4C72B0",),
        series=(Series("Count", (("Mon", 3.0), ("Tue", 5.0))),),
    )
    return replace(spec, **kwargs)


def test_seeds_load_in_folder_order(seeds) -> None:
    assert list(seeds) == [
        "area_rainfall",
        "bar_revenue",
        "box_latency",
        "heatmap_activity",
        "histogram_scores",
        "line_visitors",
        "pie_budget",
        "scatter_height",
        "stacked_sales",
    ]
    assert seeds["bar_revenue"].script_text.startswith("import matplotlib")
    assert seeds["pie_budget"].script_text == ""


def test_spec_from_seed(bar) -> None:
    assert bar.chart_type == "bar"
    assert bar.categories == ("Q1", "Q2", "Q3", "Q4")
    assert [s.label for s in bar.series] == ["North", "South"]
    assert bar.series[0].values == (120.0, 135.0, 150.0, 170.0)
    assert bar.x_label == "Quarter"
    assert bar.source_id == "bar_revenue"


def test_table_csv_matches_seed_table(bar) -> None:
    assert table_csv(bar).splitlines() == [
        "Quarter,North,South",
        "Q1,120,95",
        "Q2,135,110",
        "Q3,150,104",
        "Q4,170,128",
    ]


def test_spec_json_round_trip(bar) -> None:
    assert ChartSpec.from_dict(bar.to_dict()) == bar


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"chart_type": "radar"}, "unknown chart type"),
        ({"colors": ("red",)}, "is not #RRGGBB"),
        ({"legend_position": "left"}, "unknown legend position"),
        ({"width_px": 0}, "must be positive"),
        ({"series": ()}, "at least one series"),
        (
            {"chart_type": "pie", "series": (Series("Share", (("a", -1.0), ("b", 2.0))),)},
            "must not be negative",
        ),
        (
            {
                "chart_type": "pie",
                "series": (Series("A", (("a", 1.0),)), Series("B", (("a", 2.0),))),
            },
            "exactly one series",
        ),
        (
            {"series": (Series("A", (("a", 1.0),)), Series("B", (("b", 2.0),)))},
            "does not share the categories",
        ),
        ({"chart_type": "scatter"}, "must be numbers"),
    ],
)
def test_spec_validation(changes, message) -> None:
    with pytest.raises(ChartSpecError, match=message):
        bar_spec(**changes).validate()


def test_box_statistics_must_be_ordered() -> None:
    stats = ("min", "q1", "median", "q3", "max")
    values = (1.0, 2.0, 5.0, 4.0, 6.0)
    spec = bar_spec(
        chart_type="box",
        series=tuple(Series(label, (("Search", v),)) for label, v in zip(stats, values)),
    )
    with pytest.raises(ChartSpecError, match="not ordered"):
        spec.validate()


def test_extract_fenced_table() -> None:
    text = 'Spec:\n```json\n{"a": 1}\n```\nData:\n```csv\nQuarter,North\nQ1,3\n```'
    dataset = extract_fenced_table(text)
    assert dataset.headers == ["Quarter", "North"]
    assert list(dataset[0]) == ["Q1", "3"]


def test_extract_fenced_table_needs_a_table() -> None:
    with pytest.raises(NoTableBlockError):
        extract_fenced_table('```json\n{"a": 1}\n```')


def test_render_is_deterministic(bar) -> None:
    assert render(bar, 3) == render(bar, 3)


def test_render_writes_the_canvas(bar) -> None:
    svg = render(bar).decode("utf-8")
    assert '<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600"' in svg
    assert 'data-chart-type="bar"' in svg
    assert 'data-role="title"' in svg
    assert ">Quarterly Revenue<" in svg


def test_render_escapes_text() -> None:
    svg = render(bar_spec(title="Art & Design")).decode("utf-8")
    assert "Art &amp; Design" in svg
    assert "Art & Design" not in svg


@pytest.mark.parametrize(
    "spec, message",
    [
        (bar_spec(width_px=60, height_px=60), "leaves no room"),
        (bar_spec(colors=()), "cannot render"),
    ],
)
def test_render_errors(spec, message) -> None:
    with pytest.raises(RenderError, match=message):
        render(spec)


def test_every_seed_renders_cleanly(seeds) -> None:
    for seed in seeds.values():
        spec = spec_from_seed(seed)
        assert lint_layout(spec, render(spec)) == [], seed.id


def test_lint_finds_legend_over_title(bar) -> None:
    spec = replace(bar, legend_position="top")
    codes = [d.code for d in lint_layout(spec, render(spec))]
    assert LEGEND_TITLE_OVERLAP in codes


def test_lint_finds_annotation_outside_canvas(bar) -> None:
    spec = replace(bar, annotations=(Annotation("Peak", (2.0, 5.0)),))
    found = lint_layout(spec, render(spec))
    assert [d.code for d in found] == [ANNOTATION_OUT_OF_BOUNDS]
    assert found[0].role == "annotation"


def test_lint_finds_canvas_mismatch(bar) -> None:
    svg = render(bar)
    codes = [d.code for d in lint_layout(replace(bar, width_px=810), svg)]
    assert CANVAS_MISMATCH in codes
    assert [d.code for d in lint_layout(bar, b"<p>no chart</p>")] == [CANVAS_MISMATCH]


def test_palette() -> None:
    colors = palette(np.random.default_rng(0), 3)
    assert len(colors) == len(set(colors)) == 3
    assert all(HEX_COLOR_RE.match(c) for c in colors)


def test_rule_mutation_is_deterministic(seeds) -> None:
    first = mutate_spec(seeds["bar_revenue"], DEFAULT_TOPICS, 42)
    second = mutate_spec(seeds["bar_revenue"], DEFAULT_TOPICS, 42)
    assert first == second


def test_rule_mutation_localizes(seeds) -> None:
    result = mutate_spec(seeds["bar_revenue"], DEFAULT_TOPICS, 42)
    spec = result.spec
    assert spec.locale == "zh"
    assert spec.title in ("艺术与设计：季度营收", "科学与自然：季度营收")
    assert spec.categories == ("第一季度", "第二季度", "第三季度", "第四季度")
    assert [s.label for s in spec.series] == ["北区", "南区"]
    assert spec.x_label == "季度"
    assert spec.legend_position in ("right", "bottom")
    assert CHART_WIDTH_RANGE[0] <= spec.width_px <= CHART_WIDTH_RANGE[1]
    assert CHART_HEIGHT_RANGE[0] <= spec.height_px <= CHART_HEIGHT_RANGE[1]
    assert len(spec.annotations) == 1
    assert spec.annotations[0].text.startswith("峰值：")


def test_rule_mutation_table_matches_spec(seeds) -> None:
    result = mutate_spec(seeds["bar_revenue"], DEFAULT_TOPICS, 5)
    assert result.table == table_csv(result.spec)
    table = ChartTable.parse(result.table)
    assert [row[0] for row in table.rows] == list(result.spec.series[0].values)
    original = spec_from_seed(seeds["bar_revenue"]).series[0].values
    for new, old in zip(result.spec.series[0].values, original):
        assert old * 0.8 - 0.01 <= new <= old * 1.2 + 0.01


def test_english_mutation_keeps_source_text(seeds) -> None:
    options = MutationOptions(locale="en")
    spec = mutate_spec(seeds["bar_revenue"], ["Business"], 1, options=options).spec
    assert spec.title == "Business: Quarterly Revenue"
    assert spec.categories == ("Q1", "Q2", "Q3", "Q4")
    assert spec.annotations[0].text.startswith("Peak: ")


def test_mutated_charts_lint_cleanly(seeds) -> None:
    for index, seed in enumerate(seeds.values()):
        spec = mutate_spec(seed, DEFAULT_TOPICS, 100 + index).spec
        assert lint_layout(spec, render(spec, index)) == [], seed.id


def test_mutated_box_stays_ordered(seeds) -> None:
    for rng_seed in range(5):
        spec = mutate_spec(seeds["box_latency"], DEFAULT_TOPICS, rng_seed).spec
        spec.validate()


@pytest.mark.parametrize(
    "topics, kwargs, message",
    [
        ((), {}, "topics pool is empty"),
        (DEFAULT_TOPICS, {"via": "magic"}, "unknown mutation path"),
        (DEFAULT_TOPICS, {"via": LLM}, "needs a gateway"),
    ],
)
def test_mutation_errors(seeds, topics, kwargs, message) -> None:
    with pytest.raises(ChartSpecError, match=message):
        mutate_spec(seeds["bar_revenue"], topics, 1, **kwargs)


def test_llm_mutation(seeds, gateway, stub) -> None:
    result = mutate_spec(seeds["bar_revenue"], DEFAULT_TOPICS, 1, via=LLM, gateway=gateway)
    spec = result.spec
    assert spec.title == MUTATED_TITLE
    assert spec.colors == tuple(MUTATED_COLORS)
    assert spec.width_px == 900
    assert spec.legend_position == "bottom"
    assert spec.locale == "zh"
    assert spec.series[0].values == (240.0, 270.0, 300.0, 340.0)
    assert result.table.splitlines()[1] == "Q1,240,190"

    prompt = stub.prompts()[0]
    assert '"Art & Design", "Science & Nature"' in prompt
    assert "Generate only a grouped bar chart" in prompt
    assert "Print table data first in Chinese" in prompt


def test_llm_mutation_keeps_the_chart_type(seeds, gateway_config) -> None:
    table = "```\nQuarter,North\nQ1,1\n```\n"
    stub = StubLLM(lambda prompt: table + fenced({"chart_type": "line"}))
    gateway = LLMGateway(gateway_config, stub_session(stub))
    with pytest.raises(ChartSpecError, match="turned the bar chart into a line chart"):
        mutate_spec(seeds["bar_revenue"], DEFAULT_TOPICS, 1, via=LLM, gateway=gateway)


def test_task_matrix() -> None:
    matrix = default_task_matrix()
    assert matrix["bar"][0] == VALUE_LOOKUP
    assert matrix.allows("pie", PROPORTION)
    assert not matrix.allows("histogram", VALUE_LOOKUP)

    custom = TaskMatrix.from_mapping({"pie": ["value lookup", "proportion"]})
    assert custom["pie"] == (VALUE_LOOKUP, PROPORTION)
    assert custom["bar"] == matrix["bar"]


@pytest.mark.parametrize(
    "build, message",
    [
        (lambda: TaskMatrix.from_mapping({"pie": ["vibes"]}), "unknown task type 'vibes'"),
        (lambda: TaskMatrix.from_mapping({"pie": []}), "'pie' has no task types"),
        (lambda: TaskMatrix(tasks={"bar": (VALUE_LOOKUP,)}), "has no task types"),
    ],
)
def test_task_matrix_errors(build, message) -> None:
    with pytest.raises(TaskMatrixError, match=message):
        build()


@pytest.mark.parametrize(
    "name, expected",
    [
        ("ValueLookup", VALUE_LOOKUP),
        ("value lookup", VALUE_LOOKUP),
        ("value_lookup", VALUE_LOOKUP),
        ("Proportion", PROPORTION),
        ("vibes", None),
    ],
)
def test_normalize_task_type(name, expected) -> None:
    assert normalize_task_type(name) == expected


TABLE = "Quarter,North,South\nQ1,120,95\nQ2,135,110\nQ10,150,104\n"


def chart_record(task_type, question, answer):
    return make_record(
        "charts/c.svg", question, answer, "chart", "en", Provenance("chartqa"), task_type
    )


@pytest.mark.parametrize(
    "task_type, question, answer",
    [
        ("ValueLookup", "What is the North value in Q1?", "120"),
        ("ValueLookup", "What is the South value in Q10?", "104"),
        ("Extremum", "What is the lowest South value?", "95"),
        ("Extremum", "Which quarter has the highest South value?", "Q2"),
        ("Sum", "What is the total of North?", "405"),
        ("Average", "What is the average of South?", "103"),
        ("Count", "How many quarters are shown?", "3"),
        ("Comparison", "How much higher is North than South in Q2?", "25"),
        ("Sum", "What is the total of North?", "405.0"),
    ],
)
def test_chart_answers_verified(task_type, question, answer) -> None:
    verdict = verify_chart_answer(chart_record(task_type, question, answer), TABLE)
    assert verdict == Verdict.verified()


@pytest.mark.parametrize(
    "task_type, question, answer, expected",
    [
        ("ValueLookup", "What is the North value in Q1?", "121", "120"),
        # Q1 is not mentioned by a question about Q10
        ("ValueLookup", "What is the South value in Q10?", "999", "104"),
        ("Extremum", "What is the highest North value?", "151", "150"),
        ("Extremum", "Which quarter has the highest South value?", "Q1", "Q2"),
        ("Count", "How many quarters are shown?", "4", "3"),
    ],
)
def test_chart_answers_wrong(task_type, question, answer, expected) -> None:
    verdict = verify_chart_answer(chart_record(task_type, question, answer), TABLE)
    assert verdict == Verdict.wrong(expected)
    assert verdict.rejection_reason() == f"wrong answer (expected {expected})"


@pytest.mark.parametrize(
    "task_type, answer",
    [("Trend", "It rises."), ("Explanation", "Sales by quarter."), ("Vibes", "120")],
)
def test_chart_answers_unverifiable(task_type, answer) -> None:
    verdict = verify_chart_answer(chart_record(task_type, "Tell me.", answer), TABLE)
    assert verdict == Verdict.unverifiable()


YEARS = "Year,Visitors\n2021,120\n2022,340\n2023,210\n"


@pytest.mark.parametrize(
    "task_type, question, answer, verdict",
    [
        ("Extremum", "Which year had the most visitors?", "2022", Verdict.verified()),
        ("Extremum", "Which year had the fewest visitors?", "2021", Verdict.verified()),
        ("Extremum", "Which year had the most visitors?", "2021", Verdict.wrong("2022")),
        (
            "Comparison",
            "Which year had more visitors, 2021 or 2023?",
            "2023",
            Verdict.verified(),
        ),
        ("Extremum", "What is the highest number of visitors?", "340", Verdict.verified()),
        (
            "Comparison",
            "How did visitors change from 2022 to 2023?",
            "-130",
            Verdict.verified(),
        ),
    ],
)
def test_numeric_labels_are_answers(task_type, question, answer, verdict) -> None:
    assert verify_chart_answer(chart_record(task_type, question, answer), YEARS) == verdict


def test_chart_qa(bar, gateway) -> None:
    batch = gen_chart_qa(bar, None, None, gateway, language="en", seed=3)

    assert re.fullmatch(r"charts/bar_revenue-[0-9a-f]{16}\.svg", batch.source)
    assert len(batch.records) == 4
    assert len(batch.validated) == 3
    assert batch.under_filled

    (wrong,) = batch.rejected
    assert wrong.task_type == "Extremum"
    assert wrong.provenance.rejection_reason == "wrong answer (expected 170)"
    assert wrong.provenance.verdict == "wrong"

    by_question = {r.question: r for r in batch.records}
    assert by_question["Which Quarter has the highest North?"].provenance.verdict == "verified"
    assert by_question["What does this chart show?"].provenance.verdict == "unverifiable"
    for record in batch.records:
        assert record.category == "chart"
        assert record.provenance.seed == 3
        assert record.provenance.model == "stub-chat"


def test_chart_qa_prompt(bar, gateway, stub) -> None:
    gen_chart_qa(bar, None, None, gateway, language="en")
    prompt = stub.prompts()[0]
    assert prompt.startswith(
        "You are a highly intelligent AI familiar with data visualization and bar."
    )
    assert 'Below is the JSON specification of the bar chart: {"' in prompt
    assert "the corresponding table data: Quarter,North,South\nQ1,120,95" in prompt
    assert (
        "The task type is ValueLookup, Extremum, Comparison, Sum, Average, Count, Explanation."
        in prompt
    )


def test_chart_qa_checks_task_types(bar, gateway_config) -> None:
    items = [
        pair("Trend", "Does North grow?", "Yes"),
        pair("Vibes", "How does it feel?", "Fine"),
        {
            "conversations": [
                {"from": "human", "value": "Who drew it?"},
                {"from": "gpt", "value": "Ann"},
            ]
        },
    ]
    stub = StubLLM(lambda prompt: fenced(items))
    gateway = LLMGateway(gateway_config, stub_session(stub))

    batch = gen_chart_qa(bar, None, None, gateway, language="en")
    reasons = sorted(r.provenance.rejection_reason for r in batch.rejected)
    assert reasons == [
        "missing task type",
        "task type 'Trend' not asked for bar charts",
        "unknown task type 'Vibes'",
    ]
    assert batch.validated == []
