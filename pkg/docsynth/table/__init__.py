# flake8: noqa
from .features import ColumnStats
from .features import TableFeatures
from .features import grid_features
from .grid import GridCell
from .grid import TableGrid
from .grid import parse_html_table
from .verify import TableTaskType
from .verify import verify_table_answer
