import logging
import typing as t

from werkzeug.utils import secure_filename

from .._types import T_JSON
from ..chart.spec import ChartSpec
from ..chart.spec import table_csv
from ..chart.tasks import TaskMatrix
from ..chart.tasks import default_task_matrix
from ..chart.tasks import normalize_task_type
from ..chart.verify import ChartTable
from ..chart.verify import verify_chart_answer
from ..consts import CATEGORY_CHART
from ..corpus.record import QaRecord
from ..prompts import language_name
from ..prompts import render_prompt
from ..tools import content_hash
from .base import BasePipeline
from .base import GenerationBatch
from .base import RawPair

if t.TYPE_CHECKING:
    from ..gateway import LLMGateway

log = logging.getLogger("docsynth.pipelines.chartqa")

CHART_TEMPLATES: dict[str, T_JSON] = {
    "zh": [
        {
            "task_type": "Extremum",
            "conversations": [
                {"from": "human", "value": "哪个季度的收入最高？"},
                {"from": "gpt", "value": "第四季度"},
            ],
        }
    ],
    "en": [
        {
            "task_type": "Extremum",
            "conversations": [
                {"from": "human", "value": "Which quarter has the highest revenue?"},
                {"from": "gpt", "value": "Q4"},
            ],
        }
    ],
}


def chart_image_ref(spec: ChartSpec) -> str:
    stem = secure_filename(spec.source_id or "") or "chart"
    return f"charts/{stem}-{content_hash(spec.to_json(), length=16)}.svg"


def build_chart_prompt(
    spec: ChartSpec,
    table: str,
    task_types: t.Sequence[str],
    language: str = "zh",
    template: T_JSON = None,
) -> str:
    """
    The chart QA prompt: the chart spec stands in for the plotting code.

    :raises PromptError:
        A placeholder would stay empty, e.g. no task types.
    """
    chart_type = spec.chart_type.replace("_", " ")
    return render_prompt(
        "chart_qa",
        chart_type=chart_type,
        code=spec.to_json(),
        table_data=table,
        task_types=", ".join(task_types),
        template=template if template is not None else CHART_TEMPLATES[language],
        language_name=language_name(language),
    )


class ChartQaPipeline(BasePipeline):
    category = CATEGORY_CHART
    generator = "chartqa"

    def __init__(
        self,
        gateway: "LLMGateway",
        task_matrix: TaskMatrix | None = None,
        language: str = "zh",
        seed: int | None = None,
        template: T_JSON = None,
    ) -> None:
        super().__init__(gateway, language, seed)
        self.task_matrix = task_matrix or default_task_matrix()
        self.template = template

    def check(
        self,
        record: QaRecord,
        pair: RawPair,
        allowed: t.Sequence[str],
        table: ChartTable,
        chart_type: str,
    ) -> QaRecord:
        task = normalize_task_type(pair.label or "")
        if pair.label is None:
            return record.rejected("missing task type")
        if task is None:
            return record.rejected(f"unknown task type {pair.label!r}")
        if task not in allowed:
            return record.rejected(f"task type {task!r} not asked for {chart_type} charts")

        verdict = verify_chart_answer(record, table)
        if verdict.is_wrong:
            return record.rejected(verdict.rejection_reason() or "wrong answer", verdict.status)
        return record.with_verdict(verdict.status)

    def generate(
        self, spec: ChartSpec, table: str, image_ref: str | None = None
    ) -> GenerationBatch:
        allowed = self.task_matrix[spec.chart_type]
        image_ref = image_ref or chart_image_ref(spec)
        prompt = build_chart_prompt(spec, table, allowed, self.language, self.template)
        pairs, _ = self.ask(prompt, tag=f"chart-qa-{spec.chart_type}")

        data = ChartTable.parse(table)
        records = []
        for pair in pairs:
            task = normalize_task_type(pair.label or "")
            record = self.make(image_ref, pair, task or pair.label)
            records.append(self.check(record, pair, allowed, data, spec.chart_type))
        return self.finish(records, len(allowed), image_ref)


def gen_chart_qa(
    spec: ChartSpec,
    table: str | None,
    task_matrix: TaskMatrix | None,
    gateway: "LLMGateway",
    language: str = "zh",
    seed: int | None = None,
    image_ref: str | None = None,
) -> GenerationBatch:
    """
    Ask for QA pairs about one chart and check them against its table.

    Pairs must carry a task type the task matrix allows for the chart
    type; verifiable answers that disagree with the table are rejected as
    wrong.

    :raises TaskMatrixError:
        The task matrix has nothing for the chart type.
    :raises GatewayError:
        The gateway call failed.
    :raises FenceError:
        The response holds no JSON block.
    """
    pipeline = ChartQaPipeline(gateway, task_matrix, language, seed)
    return pipeline.generate(spec, table if table is not None else table_csv(spec), image_ref)
