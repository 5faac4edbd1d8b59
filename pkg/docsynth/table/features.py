import statistics
import typing as t
from dataclasses import asdict
from dataclasses import dataclass

from ..consts import NUMERIC_COLUMN_SHARE
from ..tools import parse_number
from .grid import TableGrid


@dataclass(frozen=True)
class ColumnStats:
    col: int
    header: str
    min: float
    max: float
    sum: float
    mean: float


@dataclass(frozen=True)
class TableFeatures:
    themes: tuple[str, ...]
    numeric_columns: tuple[ColumnStats, ...]
    n_rows: int
    n_cols: int

    def to_dict(self) -> dict[str, t.Any]:
        return asdict(self)


def column_values(grid: TableGrid, col: int) -> tuple[list[float], int]:
    """
    Parsed numbers of the non-header source cells of ``col`` and how many
    such cells there are.
    """
    cells = [c for c in grid.column(col) if not c.is_header and not c.span_member]
    values = [v for v in (parse_number(c.text) for c in cells) if v is not None]
    return values, len(cells)


def grid_features(grid: TableGrid) -> TableFeatures:
    """
    Themes (caption and header texts) and statistics of numeric columns.

    A column is numeric when at least 80% of its non-header cells parse as
    numbers; statistics cover the parsed values only.
    """
    themes: list[str] = []
    for text in ([grid.caption] if grid.caption else []) + grid.header_texts():
        if text not in themes:
            themes.append(text)

    numeric = []
    for col in range(grid.n_cols):
        values, total = column_values(grid, col)
        if not total or not values or len(values) / total < NUMERIC_COLUMN_SHARE:
            continue
        headers = [c.text for c in grid.column(col) if c.is_header and c.text]
        numeric.append(
            ColumnStats(
                col=col,
                header=headers[-1] if headers else "",
                min=min(values),
                max=max(values),
                sum=sum(values),
                mean=statistics.fmean(values),
            )
        )

    return TableFeatures(
        themes=tuple(themes),
        numeric_columns=tuple(numeric),
        n_rows=grid.n_rows,
        n_cols=grid.n_cols,
    )
