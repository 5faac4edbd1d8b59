import json

import pytest

from docsynth.chart.spec import ChartSeed
from docsynth.chart.spec import spec_from_seed
from docsynth.chart.spec import table_csv
from docsynth.exceptions import LayoutSchemaError
from docsynth.exceptions import PromptError
from docsynth.pipelines import build_chart_prompt
from docsynth.pipelines import build_doc_prompt
from docsynth.pipelines import build_table_prompt
from docsynth.pipelines.docqa import DOC_TEMPLATES
from docsynth.prompts import render_prompt

LAYOUT = json.dumps(
    {
        "schema_version": 1,
        "page_width": 100,
        "page_height": 100,
        "regions": [
            {
                "kind": "printed_text",
                "bbox": [0, 0, 100, 50],
                "lines": [{"text": "Annual report", "bbox": [0, 0, 100, 20]}],
            }
        ],
    }
)


def test_doc_prompt_embeds_layout_verbatim() -> None:
    prompt = build_doc_prompt(LAYOUT, DOC_TEMPLATES["en"], genre="annual report", min_pairs=4)
    assert f"document image: {LAYOUT}. Please imagine" in prompt
    assert "at least 4 Chinese instructions" in prompt
    assert "from a annual report document image" in prompt
    assert json.dumps(DOC_TEMPLATES["en"], ensure_ascii=False) in prompt
    assert "{{" not in prompt


def test_doc_prompt_language() -> None:
    prompt = build_doc_prompt(LAYOUT, DOC_TEMPLATES["en"], language="en")
    assert "English instructions" in prompt


@pytest.mark.parametrize(
    "kwargs, placeholder",
    [
        ({"layout_json": "  "}, "json_string"),
        ({"template_example": []}, "template"),
        ({"genre": ""}, "genre"),
    ],
)
def test_doc_prompt_unfilled(kwargs, placeholder) -> None:
    args = {"layout_json": LAYOUT, "template_example": DOC_TEMPLATES["zh"], **kwargs}
    with pytest.raises(PromptError, match=f"placeholder {{{placeholder}}} unfilled"):
        build_doc_prompt(**args)


def test_doc_prompt_rejects_bad_layout() -> None:
    with pytest.raises(LayoutSchemaError):
        build_doc_prompt('{"regions": []}', DOC_TEMPLATES["zh"])


def test_chart_prompt(fixtures) -> None:
    seed = ChartSeed.load(fixtures / "chart_seeds" / "stacked_sales")
    spec = spec_from_seed(seed)
    table = table_csv(spec)
    prompt = build_chart_prompt(spec, table, ["ValueLookup", "Sum"], language="en")

    assert prompt.startswith(
        "You are a highly intelligent AI familiar with data visualization and stacked bar."
    )
    assert f"table data: {table}." in prompt
    assert "The task type is ValueLookup, Sum." in prompt
    assert spec.to_json() in prompt
    assert "all in English" in prompt


def test_chart_prompt_needs_task_types(fixtures) -> None:
    spec = spec_from_seed(ChartSeed.load(fixtures / "chart_seeds" / "pie_budget"))
    with pytest.raises(PromptError, match="task_types"):
        build_chart_prompt(spec, table_csv(spec), [])


def test_table_prompt(fixtures) -> None:
    html = (fixtures / "tables" / "staff.html").read_text(encoding="utf-8")
    prompt = build_table_prompt(html)
    assert prompt.startswith("This is a table chart displayed by html code: <html>")
    for task in ("Factoid:", "Multiple Choice:", "Yes/No:", "Time Series:", "Computation:"):
        assert task in prompt
    with pytest.raises(PromptError):
        build_table_prompt("")


def test_render_prompt_missing_variable() -> None:
    with pytest.raises(PromptError, match="unfilled"):
        render_prompt("table_qa", html_code="<table></table>")
