import json
import logging
import os
import typing as t
from pathlib import Path

from .._types import T_PATH
from ..exceptions import DuplicateRecordError
from ..exceptions import InvalidRecordError
from ..tools import canonical_json
from .record import QaRecord
from .record import validate_record

log = logging.getLogger("docsynth.corpus")


def dumps_record(record: QaRecord) -> str:
    """
    One JSONL line, field order fixed by :meth:`QaRecord.to_dict`.
    """
    return json.dumps(record.to_dict(), ensure_ascii=False, separators=(",", ":"))


def _check(records: t.Sequence[QaRecord]) -> None:
    seen: set[str] = set()
    for record in records:
        violations = validate_record(record)
        if record.id in seen:
            violations.append("duplicate id")
        if violations:
            raise InvalidRecordError(record.id, violations)
        seen.add(record.id)


def write_jsonl(records: t.Sequence[QaRecord], path: T_PATH) -> int:
    """
    Write ``records`` to ``path``, one JSON document per line.

    Every record is checked before anything is written; the first invalid
    record aborts the write with :class:`InvalidRecordError`. The file is
    replaced atomically.

    :return:
        Number of lines written.
    """
    _check(records)

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(target.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fp:
        for record in records:
            fp.write(dumps_record(record))
            fp.write("\n")
    os.replace(tmp, target)

    log.debug("wrote %d records to %s", len(records), target)
    return len(records)


def read_jsonl(path: T_PATH) -> list[QaRecord]:
    records = []
    with open(path, encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(QaRecord.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as ex:
                raise InvalidRecordError(f"{path}:{lineno}", [str(ex)]) from ex
    return records


def rejects_path(path: T_PATH) -> Path:
    """
    ``out/doc.jsonl`` -> ``out/doc.rejects.jsonl``
    """
    target = Path(path)
    return target.with_name(f"{target.stem}.rejects{target.suffix or '.jsonl'}")


def write_dataset(records: t.Iterable[QaRecord], path: T_PATH) -> tuple[int, int]:
    """
    Write validated records to ``path`` and rejected ones to the sibling
    rejects file. Both files are sorted by id.

    :return:
        ``(validated, rejected)`` counts.
    """
    ordered = sorted(records, key=lambda r: r.id)
    kept = [r for r in ordered if r.validated]
    rejected = [r for r in ordered if not r.validated]
    write_jsonl(kept, path)
    write_jsonl(rejected, rejects_path(path))
    return len(kept), len(rejected)


def merge_records(sources: t.Iterable[t.Iterable[QaRecord]]) -> list[QaRecord]:
    """
    Concatenate record sets, drop exact duplicates and sort by id.

    Raises :class:`DuplicateRecordError` when one id carries two different
    records.
    """
    by_id: dict[str, QaRecord] = {}
    fingerprints: dict[str, str] = {}
    for source in sources:
        for record in source:
            fingerprint = canonical_json(record.to_dict())
            known = fingerprints.get(record.id)
            if known is None:
                by_id[record.id] = record
                fingerprints[record.id] = fingerprint
            elif known != fingerprint:
                raise DuplicateRecordError(record.id)
    return [by_id[key] for key in sorted(by_id)]
