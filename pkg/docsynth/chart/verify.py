"""
Ground-truth checks of chart answers.

The data table is the truth. For a verifiable task type every aggregate
the question could plausibly refer to is computed by brute force, and the
answer passes if it matches one of them. Numbers are compared with a
relative tolerance after unit, percent-sign and thousands-separator
normalization; labels are compared after text normalization.
"""

import itertools
import re
import statistics
import unicodedata
from dataclasses import dataclass

import tablib

from ..consts import DEFAULT_STRIP_PUNCTUATION
from ..corpus.record import QaRecord
from ..corpus.record import Verdict
from ..tools import format_number
from ..tools import normalize_text
from ..tools import numbers_equal
from ..tools import parse_number
from .spec import parse_csv_table
from .tasks import AVERAGE
from .tasks import COMPARISON
from .tasks import COUNT
from .tasks import EXTREMUM
from .tasks import SUM
from .tasks import VALUE_LOOKUP
from .tasks import VERIFIABLE_TASK_TYPES
from .tasks import normalize_task_type

MAX_WORDS = (
    "最大", "最高", "最多", "更高", "更多", "更大",
    "highest", "maximum", "largest", "most", "peak", "max", "greatest",
    "higher", "larger", "greater", "bigger",
)  # fmt: skip
MIN_WORDS = (
    "最小", "最低", "最少", "更低", "更少", "更小",
    "lowest", "minimum", "smallest", "least", "min", "fewest",
    "lower", "smaller", "fewer",
)  # fmt: skip

_TOKEN_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class ChartTable:
    """
    A chart data table split into labels and numbers; cells that do not
    parse are ``None``.
    """

    categories: tuple[str, ...]
    series_labels: tuple[str, ...]
    rows: tuple[tuple[float | None, ...], ...]

    @classmethod
    def from_dataset(cls, dataset: tablib.Dataset) -> "ChartTable":
        headers = [str(h) for h in dataset.headers or []]
        rows = [list(row) for row in dataset]
        return cls(
            categories=tuple(str(row[0]) for row in rows),
            series_labels=tuple(headers[1:]),
            rows=tuple(tuple(parse_number(cell) for cell in row[1:]) for row in rows),
        )

    @classmethod
    def parse(cls, table: "str | tablib.Dataset") -> "ChartTable":
        return cls.from_dataset(parse_csv_table(table) if isinstance(table, str) else table)

    def column(self, index: int) -> list[float]:
        return [row[index] for row in self.rows if row[index] is not None]  # type: ignore[misc]

    def row(self, index: int) -> list[float]:
        return [v for v in self.rows[index] if v is not None]

    def columns(self) -> list[list[float]]:
        return [self.column(i) for i in range(len(self.series_labels))]

    def values(self) -> list[float]:
        return [v for row in self.rows for v in row if v is not None]


def _norm(text: str) -> str:
    return normalize_text(text, DEFAULT_STRIP_PUNCTUATION)


def _answer_number(answer: str) -> float | None:
    return parse_number(answer.strip().rstrip("。.!！"))


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(unicodedata.normalize("NFKC", text).casefold())


def _mentions(question: str, label: str) -> bool:
    """
    Whether ``label`` occurs in ``question``; latin labels must match whole
    words, so ``Q1`` is not found in ``Q10``.
    """
    key = _norm(label)
    if not key:
        return False
    words = _tokens(label)
    if not key.isascii() or not words:
        return key in _norm(question)
    found = _tokens(question)
    n = len(words)
    return any(found[i : i + n] == words for i in range(len(found) - n + 1))


def extremum_ops(question: str) -> tuple[str, ...]:
    """
    ``("max",)``, ``("min",)`` or both when the question does not say.
    """
    q = question.casefold()
    words = set(re.findall(r"[a-z]+", q))

    def hit(keys: tuple[str, ...]) -> bool:
        return any((k in words) if k.isascii() else (k in q) for k in keys)

    has_max, has_min = hit(MAX_WORDS), hit(MIN_WORDS)
    if has_max and not has_min:
        return ("max",)
    if has_min and not has_max:
        return ("min",)
    return ("max", "min")


def _pick(op: str, values: list[float]) -> float:
    return max(values) if op == "max" else min(values)


def _groups(table: ChartTable) -> list[list[float]]:
    """
    Every series with more than one point and every category row across
    more than one series.
    """
    groups = [c for c in table.columns() if len(c) > 1]
    if len(table.series_labels) > 1:
        groups += [r for r in (table.row(i) for i in range(len(table.rows))) if len(r) > 1]
    return groups


def _numeric_candidates(task: str, table: ChartTable, question: str) -> list[float]:
    values = table.values()
    groups = _groups(table)
    if task == VALUE_LOOKUP:
        return values
    if task == EXTREMUM:
        ops = extremum_ops(question)
        return [_pick(op, g) for op in ops for g in groups + [values]]
    if task == SUM:
        return [sum(g) for g in groups] + [sum(values)]
    if task == AVERAGE:
        return [statistics.fmean(g) for g in groups] + [statistics.fmean(values)]
    if task == COUNT:
        counts = {len(table.rows), len(table.series_labels), len(values)}
        counts.update(len(c) for c in table.columns())
        return [float(c) for c in sorted(counts)]
    if task == COMPARISON:
        pairs = [pair for g in groups for pair in itertools.combinations(g, 2)]
        return [d for a, b in pairs for d in (a - b, b - a)] + values
    return []


def _expected_number(task: str, table: ChartTable, question: str) -> float | None:
    values = table.values()
    if not values:
        return None
    if task == EXTREMUM:
        return _pick(extremum_ops(question)[0], values)
    if task == SUM:
        return sum(values)
    if task == AVERAGE:
        return statistics.fmean(values)
    if task == COUNT:
        return float(len(table.rows))
    if task == VALUE_LOOKUP:
        return _lookup(table, question)
    return None


def _lookup(table: ChartTable, question: str) -> float | None:
    """
    The cell a value question points at, when its labels pin one down.
    """
    rows = [i for i, c in enumerate(table.categories) if _mentions(question, c)]
    cols = [i for i, s in enumerate(table.series_labels) if _mentions(question, s)]
    if len(table.series_labels) == 1:
        cols = [0]
    if len(rows) == 1 and len(cols) == 1:
        return table.rows[rows[0]][cols[0]]
    return None


def _winner(task: str, table: ChartTable, question: str) -> list[str]:
    """
    Labels that correctly answer a "which one" question.
    """
    ops = extremum_ops(question)
    if task == COMPARISON and ops == ("max", "min"):
        ops = ("max",)

    cats = [i for i, c in enumerate(table.categories) if _mentions(question, c)]
    cols = [i for i, s in enumerate(table.series_labels) if _mentions(question, s)]
    labels: list[str] = []

    def best(scored: list[tuple[str, float | None]]) -> None:
        present = [(label, v) for label, v in scored if v is not None]
        if not present:
            return
        for op in ops:
            target = _pick(op, [v for _, v in present])
            labels.extend(label for label, v in present if numbers_equal(v, target))

    # categories ranked within a series (or by their totals)
    category_pool = (
        cats if task == COMPARISON and len(cats) >= 2 else list(range(len(table.categories)))
    )
    if task == EXTREMUM or len(cats) >= 2:
        series_pool = cols or list(range(len(table.series_labels)))
        for col in series_pool:
            best([(table.categories[i], table.rows[i][col]) for i in category_pool])
        if len(table.series_labels) > 1:
            best([(table.categories[i], sum(table.row(i))) for i in category_pool])

    # series ranked within a category (or by their totals)
    series_choice = (
        cols if task == COMPARISON and len(cols) >= 2 else list(range(len(table.series_labels)))
    )
    if len(table.series_labels) > 1 and (task == EXTREMUM or len(cols) >= 2):
        for row in cats or list(range(len(table.rows))):
            best([(table.series_labels[c], table.rows[row][c]) for c in series_choice])
        best([(table.series_labels[c], sum(table.column(c))) for c in series_choice])

    return labels


def _is_label(key: str, table: ChartTable) -> bool:
    return any(key == _norm(label) for label in table.categories + table.series_labels)


def verify_chart_answer(record: QaRecord, table: "str | tablib.Dataset | ChartTable") -> Verdict:
    """
    Check the answer of a chart record against its data table.

    Value lookup, extremum, sum, average, count and comparison answers are
    recomputed; every other task type is unverifiable.
    """
    task = normalize_task_type(record.task_type or "")
    if task is None or task not in VERIFIABLE_TASK_TYPES:
        return Verdict.unverifiable()

    data = table if isinstance(table, ChartTable) else ChartTable.parse(table)
    question, answer = record.question, record.answer
    number = _answer_number(answer)
    key = _norm(answer)

    if number is not None:
        if any(numbers_equal(number, c) for c in _numeric_candidates(task, data, question)):
            return Verdict.verified()
        # numeric labels such as years name a category, not a value
        if task in (EXTREMUM, COMPARISON) and _is_label(key, data):
            winners = _winner(task, data, question)
            if key in {_norm(w) for w in winners}:
                return Verdict.verified()
            if winners:
                return Verdict.wrong(winners[0])
        expected = _expected_number(task, data, question)
        if expected is None:
            if task == VALUE_LOOKUP:
                return Verdict.wrong("a value present in the table")
            return Verdict.unverifiable()
        return Verdict.wrong(format_number(round(expected, 6)))

    if task in (EXTREMUM, COMPARISON):
        winners = _winner(task, data, question)
        if not winners:
            return Verdict.unverifiable()
        if key in {_norm(w) for w in winners}:
            return Verdict.verified()
        return Verdict.wrong(winners[0])

    if _is_label(key, data):
        return Verdict.verified()
    return Verdict.unverifiable()
