import re
import typing as t
from dataclasses import dataclass

from bs4 import BeautifulSoup
from bs4 import Tag

from ..exceptions import OverlappingSpanError
from ..exceptions import RaggedTableError
from ..exceptions import TableParseError

_SPACE_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class GridCell:
    text: str
    origin: tuple[int, int]
    is_header: bool = False
    span_member: bool = False


@dataclass(frozen=True)
class TableGrid:
    """
    Dense cell matrix of an HTML table after rowspan/colspan expansion.

    A cell covered by a span repeats the text of the cell the span starts
    at; ``origin`` points at that cell and ``span_member`` is set.
    """

    n_rows: int
    n_cols: int
    cells: tuple[tuple[GridCell, ...], ...]
    caption: str = ""

    def cell(self, row: int, col: int) -> GridCell:
        return self.cells[row][col]

    def column(self, col: int) -> list[GridCell]:
        return [row[col] for row in self.cells]

    def origins(self) -> list[GridCell]:
        """
        One cell per source cell, in row-major order.
        """
        return [c for row in self.cells for c in row if not c.span_member]

    def texts(self) -> list[str]:
        return [c.text for c in self.origins()]

    def header_texts(self) -> list[str]:
        return [c.text for c in self.origins() if c.is_header and c.text]


def _span(tag: Tag, name: str) -> int:
    try:
        value = int(str(tag.get(name) or "1").strip())
    except ValueError:
        return 1
    return max(value, 1)


def _text(tag: Tag) -> str:
    return _SPACE_RE.sub(" ", tag.get_text(" ", strip=True)).strip()


def _rows(table: Tag) -> t.Iterator[tuple[Tag, bool]]:
    """
    ``(tr, in_thead)`` for every row of ``table`` in document order.
    """
    for tr in table.find_all("tr"):
        yield tr, tr.find_parent("thead") is not None


def parse_html_table(html: str) -> TableGrid:
    """
    Parse the single table of ``html`` into a :class:`TableGrid`.

    Cells are ``th`` headers, or any cell of a ``thead`` row. Row spans
    reaching past the last row are cut at the table end.

    :raises TableParseError:
        No table, several tables or nested tables, or no cells.
    :raises OverlappingSpanError:
        Two cells claim the same grid position.
    :raises RaggedTableError:
        A grid position is left empty.
    """
    soup = BeautifulSoup(html or "", "html.parser")
    tables = soup.find_all("table")
    if not tables:
        raise TableParseError("no table element")
    for table in tables:
        if table.find("table") is not None:
            raise TableParseError("nested tables are not supported")
    if len(tables) > 1:
        raise TableParseError(f"expected one table, found {len(tables)}")

    table = tables[0]
    caption_tag = table.find("caption")
    caption = _text(caption_tag) if isinstance(caption_tag, Tag) else ""

    rows = list(_rows(table))
    n_rows = len(rows)
    occupied: dict[tuple[int, int], GridCell] = {}

    for r, (tr, in_thead) in enumerate(rows):
        c = 0
        for td in tr.find_all(["td", "th"], recursive=False):
            while (r, c) in occupied:
                c += 1
            rowspan, colspan = _span(td, "rowspan"), _span(td, "colspan")
            text = _text(td)
            header = in_thead or td.name == "th"
            for dr in range(rowspan):
                if r + dr >= n_rows:
                    break
                for dc in range(colspan):
                    pos = (r + dr, c + dc)
                    if pos in occupied:
                        raise OverlappingSpanError(
                            f"cell at row {r}, column {c} overlaps the cell "
                            f"starting at row {occupied[pos].origin[0]}, "
                            f"column {occupied[pos].origin[1]}"
                        )
                    occupied[pos] = GridCell(
                        text=text,
                        origin=(r, c),
                        is_header=header,
                        span_member=(dr, dc) != (0, 0),
                    )
            c += colspan

    if not occupied:
        raise TableParseError("table has no cells")

    n_cols = max(col for _, col in occupied) + 1
    cells = []
    for r in range(n_rows):
        row = []
        for c in range(n_cols):
            cell = occupied.get((r, c))
            if cell is None:
                raise RaggedTableError(f"row {r} has no cell at column {c}")
            row.append(cell)
        cells.append(tuple(row))

    return TableGrid(n_rows=n_rows, n_cols=n_cols, cells=tuple(cells), caption=caption)
