# flake8: noqa
from .base import BasePipeline
from .base import GenerationBatch
from .base import RawPair
from .base import coerce_pairs
from .chartqa import ChartQaPipeline
from .chartqa import build_chart_prompt
from .chartqa import gen_chart_qa
from .docqa import CoverageReport
from .docqa import DocQaConfig
from .docqa import DocQaPipeline
from .docqa import build_doc_prompt
from .docqa import coverage_report
from .docqa import generate_doc_qa
from .docqa import validate_doc_qa
from .tableqa import TableQaPipeline
from .tableqa import build_table_prompt
from .tableqa import gen_table_qa
