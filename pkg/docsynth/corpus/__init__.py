# flake8: noqa
from .jsonl import dumps_record
from .jsonl import merge_records
from .jsonl import read_jsonl
from .jsonl import rejects_path
from .jsonl import write_dataset
from .jsonl import write_jsonl
from .manifest import ManifestStats
from .manifest import compute_manifest
from .record import Provenance
from .record import QaRecord
from .record import Turn
from .record import VERDICTS
from .record import Verdict
from .record import group_conversations
from .record import make_record
from .record import record_id
from .record import validate_record
