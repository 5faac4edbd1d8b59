import logging
import typing as t

from .._types import T_JSON
from ..consts import CATEGORY_TABLE
from ..corpus.record import QaRecord
from ..prompts import render_prompt
from ..table.features import grid_features
from ..table.grid import TableGrid
from ..table.grid import parse_html_table
from ..table.verify import TableTaskType
from ..table.verify import verify_table_answer
from ..tools import content_hash
from .base import BasePipeline
from .base import GenerationBatch
from .base import RawPair

if t.TYPE_CHECKING:
    from ..gateway import LLMGateway

log = logging.getLogger("docsynth.pipelines.tableqa")

TABLE_TEMPLATE: T_JSON = [
    {
        "task_type": "Factoid",
        "conversations": [
            {"from": "human", "value": "2022年华东地区的销售额是多少？"},
            {"from": "gpt", "value": "328万元"},
        ],
    },
    {
        "task_type": "Computation",
        "conversations": [
            {"from": "human", "value": "各地区2022年销售额的总和是多少？"},
            {"from": "gpt", "value": "1046万元"},
        ],
    },
]


def build_table_prompt(html: str, template: T_JSON = None) -> str:
    """
    The table QA prompt with all eleven task type definitions.

    :raises PromptError:
        ``html`` or the template is empty.
    """
    return render_prompt(
        "table_qa",
        html_code=html.strip() if html else "",
        template=template if template is not None else TABLE_TEMPLATE,
    )


def table_image_ref(html: str, name: str | None = None) -> str:
    return f"tables/{name}" if name else f"tables/{content_hash(html, length=16)}.png"


class TableQaPipeline(BasePipeline):
    category = CATEGORY_TABLE
    generator = "tableqa"

    def __init__(
        self,
        gateway: "LLMGateway",
        language: str = "zh",
        seed: int | None = None,
        min_pairs: int = 1,
        template: T_JSON = None,
    ) -> None:
        super().__init__(gateway, language, seed)
        self.min_pairs = min_pairs
        self.template = template

    def check(self, record: QaRecord, pair: RawPair, grid: TableGrid) -> QaRecord:
        if TableTaskType.parse(pair.label) is None:
            return record.rejected(f"unknown task type {pair.label!r}")
        verdict = verify_table_answer(record, grid)
        if verdict.is_wrong:
            return record.rejected(verdict.rejection_reason() or "wrong answer", verdict.status)
        return record.with_verdict(verdict.status)

    def generate(self, html: str, image_ref: str | None = None) -> GenerationBatch:
        grid = parse_html_table(html)
        image_ref = image_ref or table_image_ref(html)
        features = grid_features(grid)
        log.debug(
            "%s: %dx%d table, themes %s, %d numeric columns",
            image_ref,
            features.n_rows,
            features.n_cols,
            features.themes,
            len(features.numeric_columns),
        )
        pairs, _ = self.ask(build_table_prompt(html, self.template), tag="table-qa")

        records = []
        for pair in pairs:
            task = TableTaskType.parse(pair.label)
            record = self.make(image_ref, pair, task.value if task else pair.label)
            records.append(self.check(record, pair, grid))
        return self.finish(records, self.min_pairs, image_ref)


def gen_table_qa(
    html: str,
    gateway: "LLMGateway",
    language: str = "zh",
    seed: int | None = None,
    image_ref: str | None = None,
    min_pairs: int = 1,
) -> GenerationBatch:
    """
    Ask for QA pairs about one HTML table and check them against its grid.

    :raises TableParseError:
        ``html`` holds no usable table.
    :raises GatewayError:
        The gateway call failed.
    :raises FenceError:
        The response holds no JSON block.
    """
    pipeline = TableQaPipeline(gateway, language, seed, min_pairs)
    return pipeline.generate(html, image_ref)
