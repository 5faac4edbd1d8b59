import typing as t
from dataclasses import dataclass
from types import MappingProxyType

from ..consts import CHART_TYPES
from ..exceptions import TaskMatrixError

VALUE_LOOKUP = "ValueLookup"
EXTREMUM = "Extremum"
SUM = "Sum"
AVERAGE = "Average"
COUNT = "Count"
COMPARISON = "Comparison"
TREND = "Trend"
PROPORTION = "Proportion"
CORRELATION = "Correlation"
DISTRIBUTION = "Distribution"
EXPLANATION = "Explanation"

CHART_TASK_TYPES = (
    VALUE_LOOKUP,
    EXTREMUM,
    SUM,
    AVERAGE,
    COUNT,
    COMPARISON,
    TREND,
    PROPORTION,
    CORRELATION,
    DISTRIBUTION,
    EXPLANATION,
)

# task types whose answers can be recomputed from the data table
VERIFIABLE_TASK_TYPES = frozenset({VALUE_LOOKUP, EXTREMUM, SUM, AVERAGE, COUNT, COMPARISON})

DEFAULT_TASKS: t.Mapping[str, tuple[str, ...]] = MappingProxyType(
    {
        "bar": (VALUE_LOOKUP, EXTREMUM, COMPARISON, SUM, AVERAGE, COUNT, EXPLANATION),
        "line": (VALUE_LOOKUP, EXTREMUM, TREND, COMPARISON, AVERAGE, EXPLANATION),
        "pie": (VALUE_LOOKUP, EXTREMUM, PROPORTION, COMPARISON, COUNT, EXPLANATION),
        "area": (VALUE_LOOKUP, EXTREMUM, TREND, SUM, EXPLANATION),
        "scatter": (VALUE_LOOKUP, EXTREMUM, CORRELATION, COUNT, EXPLANATION),
        "stacked_bar": (VALUE_LOOKUP, EXTREMUM, SUM, COMPARISON, EXPLANATION),
        "histogram": (EXTREMUM, COUNT, DISTRIBUTION, EXPLANATION),
        "box": (VALUE_LOOKUP, EXTREMUM, COMPARISON, EXPLANATION),
        "heatmap": (VALUE_LOOKUP, EXTREMUM, COMPARISON, EXPLANATION),
    }
)


def normalize_task_type(name: str) -> str | None:
    """
    Match a task type name the way models tend to spell it
    (``"value lookup"``, ``"value_lookup"``, ``"ValueLookup"``).
    """
    key = "".join(ch for ch in name.casefold() if ch.isalnum())
    for task in CHART_TASK_TYPES:
        if task.casefold() == key:
            return task
    return None


@dataclass(frozen=True)
class TaskMatrix:
    """
    Task types that may be asked about each chart type.
    """

    tasks: t.Mapping[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        for chart_type in CHART_TYPES:
            if not self.tasks.get(chart_type):
                raise TaskMatrixError(f"chart type {chart_type!r} has no task types")
        for chart_type, tasks in self.tasks.items():
            if chart_type not in CHART_TYPES:
                raise TaskMatrixError(f"unknown chart type {chart_type!r}")
            for task in tasks:
                if task not in CHART_TASK_TYPES:
                    raise TaskMatrixError(f"unknown task type {task!r} for {chart_type}")

    def __getitem__(self, chart_type: str) -> tuple[str, ...]:
        tasks = self.tasks.get(chart_type)
        if not tasks:
            raise TaskMatrixError(f"chart type {chart_type!r} has no task types")
        return tasks

    def allows(self, chart_type: str, task_type: str) -> bool:
        return task_type in self.tasks.get(chart_type, ())

    @classmethod
    def from_mapping(
        cls, overrides: t.Mapping[str, t.Sequence[str]] | None = None
    ) -> "TaskMatrix":
        """
        Defaults updated with ``overrides``; task names are normalized.
        """
        tasks = dict(DEFAULT_TASKS)
        for chart_type, names in (overrides or {}).items():
            normalized = []
            for name in names:
                task = normalize_task_type(name)
                if task is None:
                    raise TaskMatrixError(f"unknown task type {name!r} for {chart_type}")
                normalized.append(task)
            tasks[chart_type] = tuple(normalized)
        return cls(tasks=MappingProxyType(tasks))


def default_task_matrix() -> TaskMatrix:
    return TaskMatrix(tasks=DEFAULT_TASKS)
