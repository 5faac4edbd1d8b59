"""
Run reports.

Every command writes a ``report.json`` next to its outputs; the schema is
described in ``doc/report.rst``.
"""

import json
import os
import re
import threading
import typing as t
from collections import Counter
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

from ._types import T_PATH
from .corpus.record import QaRecord
from .gateway import TokenUsage

REPORT_NAME = "report.json"

_DETAIL_RE = re.compile(r"\s*\(expected .*\)$")


def reason_key(reason: str | None) -> str:
    """
    Group rejection reasons: ``wrong answer (expected 7)`` and
    ``wrong answer (expected 9)`` both count as ``wrong answer``.
    """
    text = (reason or "unspecified").split("; ", 1)[0]
    return _DETAIL_RE.sub("", text)


@dataclass
class PipelineCounts:
    generated: int = 0
    validated: int = 0
    rejected_by_reason: Counter[str] = field(default_factory=Counter)
    under_filled: int = 0
    failed_items: int = 0

    @property
    def rejected(self) -> int:
        return sum(self.rejected_by_reason.values())

    def add(self, records: t.Iterable[QaRecord], under_filled: bool = False) -> None:
        for record in records:
            self.generated += 1
            if record.validated:
                self.validated += 1
            else:
                self.rejected_by_reason[reason_key(record.provenance.rejection_reason)] += 1
        if under_filled:
            self.under_filled += 1

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "generated": self.generated,
            "validated": self.validated,
            "rejected": self.rejected,
            "rejected_by_reason": dict(sorted(self.rejected_by_reason.items())),
            "under_filled": self.under_filled,
            "failed_items": self.failed_items,
        }


class RunReport:
    """
    Counts, token usage, timing and outputs of one command.
    """

    def __init__(self, command: str, seed: int, config_hash: str) -> None:
        self.command = command
        self.seed = seed
        self.config_hash = config_hash
        self.pipelines: dict[str, PipelineCounts] = {}
        self.usage = TokenUsage()
        self.llm_calls = 0
        self.wall_time_s = 0.0
        self.outputs: list[str] = []
        self.extra: dict[str, t.Any] = {}
        self.exit_code = 0
        self._lock = threading.Lock()

    def counts(self, pipeline: str) -> PipelineCounts:
        with self._lock:
            return self.pipelines.setdefault(pipeline, PipelineCounts())

    def add_output(self, path: T_PATH) -> None:
        with self._lock:
            self.outputs.append(os.fspath(path))

    @property
    def balanced(self) -> bool:
        """
        Every generated record is either validated or rejected.
        """
        return all(
            c.generated == c.validated + c.rejected for c in self.pipelines.values()
        )

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "command": self.command,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "exit_code": self.exit_code,
            "pipelines": {k: v.to_dict() for k, v in sorted(self.pipelines.items())},
            "usage": {
                **self.usage.to_dict(),
                "total_tokens": self.usage.total_tokens,
                "calls": self.llm_calls,
            },
            "wall_time_s": round(self.wall_time_s, 3),
            "outputs": sorted(self.outputs),
            **({"extra": self.extra} if self.extra else {}),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"

    def write(self, out_dir: T_PATH) -> Path:
        target = Path(out_dir) / REPORT_NAME
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self.to_json(), encoding="utf-8")
        return target
