import enum
import itertools
import re
import statistics

from ..consts import DEFAULT_STRIP_PUNCTUATION
from ..corpus.record import QaRecord
from ..corpus.record import Verdict
from ..tools import normalize_text
from ..tools import numbers_equal
from ..tools import parse_number
from .grid import TableGrid

YES_NO_FORMS = frozenset(
    {"yes", "no", "y", "n", "true", "false", "是", "否", "是的", "不是", "对", "不对", "有", "没有"}
)

_SPLIT_RE = re.compile(r"[,，、;；\n]|\s+and\s+|\s*和\s*")
_OPTION_RE = re.compile(r"^\(?[A-Ha-h][.)、:：]\s*")


class TableTaskType(str, enum.Enum):
    FACTOID = "Factoid"
    FREE_FORM = "FreeForm"
    MULTIPLE_CHOICE = "MultipleChoice"
    LIST = "List"
    YES_NO = "YesNo"
    EXPLANATION = "Explanation"
    COMPARISON = "Comparison"
    CAUSAL = "Causal"
    COMPUTATION = "Computation"
    CLASSIFICATION = "Classification"
    TIME_SERIES = "TimeSeries"

    @classmethod
    def parse(cls, name: str | None) -> "TableTaskType | None":
        """
        Match a task type however the model spelled it: ``"Yes/No"``,
        ``"yes_no"``, ``"Multiple Choice"``.
        """
        if not name:
            return None
        key = "".join(ch for ch in name.casefold() if ch.isalnum())
        for member in cls:
            if member.value.casefold() == key:
                return member
        return None


VERIFIABLE_TABLE_TASKS = frozenset(
    {
        TableTaskType.FACTOID,
        TableTaskType.COMPUTATION,
        TableTaskType.YES_NO,
        TableTaskType.COMPARISON,
        TableTaskType.LIST,
        TableTaskType.MULTIPLE_CHOICE,
    }
)


def _norm(text: str) -> str:
    return normalize_text(text, DEFAULT_STRIP_PUNCTUATION)


def _strip_option(token: str) -> str:
    return _OPTION_RE.sub("", token.strip(), count=1).strip()


def answer_tokens(answer: str) -> list[str]:
    """
    Items of a list-like answer, option letters removed.
    """
    parts = [_strip_option(p) for p in _SPLIT_RE.split(answer)]
    return [p for p in parts if _norm(p)]


def _cell_numbers(grid: TableGrid) -> list[float]:
    return [v for v in (parse_number(text) for text in grid.texts()) if v is not None]


def _matches_cell(token: str, cell_keys: set[str], numbers: list[float]) -> bool:
    if _norm(token) in cell_keys:
        return True
    value = parse_number(token.strip().rstrip("。."))
    return value is not None and any(numbers_equal(value, n) for n in numbers)


def aggregate_lines(grid: TableGrid) -> list[list[float]]:
    """
    Numbers of every column and every row, header cells left out.
    """
    lines = []
    for col in range(grid.n_cols):
        cells = [c for c in grid.column(col) if not c.is_header and not c.span_member]
        lines.append([v for v in (parse_number(c.text) for c in cells) if v is not None])
    for row in grid.cells:
        cells = [c for c in row if not c.is_header and not c.span_member]
        lines.append([v for v in (parse_number(c.text) for c in cells) if v is not None])
    return [line for line in lines if line]


def aggregates(grid: TableGrid) -> list[float]:
    """
    Sum, mean, min, max and signed pairwise differences over every row and
    column.
    """
    out: list[float] = []
    for line in aggregate_lines(grid):
        out += [sum(line), statistics.fmean(line), min(line), max(line)]
        out += [d for a, b in itertools.combinations(line, 2) for d in (a - b, b - a)]
    return out


def verify_table_answer(record: QaRecord, grid: TableGrid) -> Verdict:
    """
    Check the answer of a table record against the grid.

    Factoid answers must be a cell; computation answers one aggregate of a
    single row or column; yes/no answers a yes or no form; comparison,
    list and multiple-choice answers made of cells. Other task types are
    unverifiable.
    """
    task = TableTaskType.parse(record.task_type)
    if task is None or task not in VERIFIABLE_TABLE_TASKS:
        return Verdict.unverifiable()

    answer = record.answer.strip()
    cell_keys = {_norm(text) for text in grid.texts()}
    numbers = _cell_numbers(grid)

    if task is TableTaskType.FACTOID:
        if _matches_cell(answer, cell_keys, numbers):
            return Verdict.verified()
        return Verdict.wrong("a cell of the table")

    if task is TableTaskType.COMPUTATION:
        value = parse_number(answer.rstrip("。."))
        if value is not None and any(numbers_equal(value, a) for a in aggregates(grid)):
            return Verdict.verified()
        return Verdict.wrong("an aggregate of one row or column")

    if task is TableTaskType.YES_NO:
        if _norm(answer).rstrip(".") in YES_NO_FORMS:
            return Verdict.verified()
        return Verdict.wrong("yes or no")

    if _matches_cell(_strip_option(answer), cell_keys, numbers):
        return Verdict.verified()
    tokens = answer_tokens(answer)
    if tokens and all(_matches_cell(token, cell_keys, numbers) for token in tokens):
        return Verdict.verified()
    return Verdict.wrong("cells of the table")
