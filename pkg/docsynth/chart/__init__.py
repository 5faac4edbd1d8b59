# flake8: noqa
from .lint import Diagnostic
from .lint import lint_layout
from .mutate import MutationOptions
from .mutate import MutationResult
from .mutate import mutate_spec
from .render import ChartRenderer
from .render import render
from .spec import Annotation
from .spec import ChartSeed
from .spec import ChartSpec
from .spec import Series
from .spec import extract_fenced_table
from .spec import load_seeds
from .spec import spec_from_seed
from .spec import table_csv
from .tasks import TaskMatrix
from .tasks import default_task_matrix
from .verify import verify_chart_answer
