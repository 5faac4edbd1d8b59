import json
import typing as t
from collections import Counter
from dataclasses import dataclass

from ..consts import CATEGORIES
from ..consts import LANGUAGES
from .record import QaRecord


def _fractions(counts: t.Mapping[str, int], total: int) -> dict[str, float]:
    if total <= 0:
        return {key: 0.0 for key in counts}
    return {key: value / total for key, value in counts.items()}


@dataclass(frozen=True)
class ManifestStats:
    """
    Distribution of a dataset over categories, languages and task types.
    """

    category_counts: dict[str, int]
    language_counts: dict[str, int]
    task_type_counts: dict[str, int]
    total: int

    @classmethod
    def from_counts(
        cls,
        categories: t.Mapping[str, int],
        languages: t.Mapping[str, int] | None = None,
        task_types: t.Mapping[str, int] | None = None,
    ) -> "ManifestStats":
        """
        Build a manifest from raw counts, for corpus-scale arithmetic
        without materializing records.

        ``languages`` may cover only part of the total (e.g. only the
        Chinese share); missing categories and languages count as zero.
        """
        category_counts = {c: int(categories.get(c, 0)) for c in CATEGORIES}
        language_counts = {k: int((languages or {}).get(k, 0)) for k in LANGUAGES}
        return cls(
            category_counts=category_counts,
            language_counts=language_counts,
            task_type_counts=dict(sorted((task_types or {}).items())),
            total=sum(category_counts.values()),
        )

    @property
    def category_fractions(self) -> dict[str, float]:
        return _fractions(self.category_counts, self.total)

    @property
    def language_fractions(self) -> dict[str, float]:
        return _fractions(self.language_counts, self.total)

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "total": self.total,
            "category_counts": self.category_counts,
            "category_fractions": self.category_fractions,
            "language_counts": self.language_counts,
            "language_fractions": self.language_fractions,
            "task_type_counts": self.task_type_counts,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"


def compute_manifest(records: t.Iterable[QaRecord]) -> ManifestStats:
    """
    Count records per category, language and task type.

    The result only depends on the multiset of records, not their order.
    """
    categories: Counter[str] = Counter()
    languages: Counter[str] = Counter()
    task_types: Counter[str] = Counter()
    for record in records:
        categories[record.category] += 1
        languages[record.language] += 1
        if record.task_type:
            task_types[f"{record.category}/{record.task_type}"] += 1

    category_counts = {c: categories.get(c, 0) for c in CATEGORIES}
    # unknown values are kept so that counts still add up to the total
    for key in sorted(set(categories) - set(CATEGORIES)):
        category_counts[key] = categories[key]
    language_counts = {k: languages.get(k, 0) for k in LANGUAGES}
    for key in sorted(set(languages) - set(LANGUAGES)):
        language_counts[key] = languages[key]

    return ManifestStats(
        category_counts=category_counts,
        language_counts=language_counts,
        task_type_counts=dict(sorted(task_types.items())),
        total=sum(categories.values()),
    )
