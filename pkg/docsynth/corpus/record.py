import typing as t
from dataclasses import dataclass
from dataclasses import replace

from .._types import T_PROVENANCE_DICT
from .._types import T_RECORD_DICT
from .._types import T_TURN_DICT
from ..consts import CATEGORIES
from ..consts import LANGUAGES
from ..consts import ROLE_GPT
from ..consts import ROLE_HUMAN
from ..tools import content_hash

VERIFIED = "verified"
UNVERIFIABLE = "unverifiable"
WRONG = "wrong"
VERDICTS = (VERIFIED, UNVERIFIABLE, WRONG)


@dataclass(frozen=True)
class Verdict:
    """
    Outcome of checking an answer against ground truth; ``expected`` is set
    for wrong answers.
    """

    status: str
    expected: str | None = None

    @classmethod
    def verified(cls) -> "Verdict":
        return cls(VERIFIED)

    @classmethod
    def unverifiable(cls) -> "Verdict":
        return cls(UNVERIFIABLE)

    @classmethod
    def wrong(cls, expected: str) -> "Verdict":
        return cls(WRONG, expected)

    @property
    def is_wrong(self) -> bool:
        return self.status == WRONG

    def rejection_reason(self) -> str | None:
        if self.status != WRONG:
            return None
        return f"wrong answer (expected {self.expected})"


@dataclass(frozen=True)
class Turn:
    role: str
    text: str


@dataclass(frozen=True)
class Provenance:
    generator: str
    seed: int | None = None
    model: str | None = None
    validated: bool = True
    rejection_reason: str | None = None
    verdict: str | None = None

    def to_dict(self) -> T_PROVENANCE_DICT:
        return {
            "generator": self.generator,
            "seed": self.seed,
            "model": self.model,
            "validated": self.validated,
            "rejection_reason": self.rejection_reason,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class QaRecord:
    """
    One image-grounded conversation sample.
    """

    id: str
    image_ref: str
    conversations: tuple[Turn, ...]
    category: str
    language: str
    provenance: Provenance
    task_type: str | None = None

    @property
    def question(self) -> str:
        """Text of the first human turn."""
        for turn in self.conversations:
            if turn.role == ROLE_HUMAN:
                return turn.text
        return ""

    @property
    def answer(self) -> str:
        """Text of the last gpt turn."""
        for turn in reversed(self.conversations):
            if turn.role == ROLE_GPT:
                return turn.text
        return ""

    @property
    def validated(self) -> bool:
        return self.provenance.validated

    def rejected(self, reason: str, verdict: str | None = None) -> "QaRecord":
        provenance = replace(
            self.provenance,
            validated=False,
            rejection_reason=reason,
            verdict=verdict if verdict is not None else self.provenance.verdict,
        )
        return replace(self, provenance=provenance)

    def with_verdict(self, verdict: str) -> "QaRecord":
        return replace(self, provenance=replace(self.provenance, verdict=verdict))

    def to_dict(self) -> T_RECORD_DICT:
        conversations: list[T_TURN_DICT] = [
            {"from": turn.role, "value": turn.text} for turn in self.conversations
        ]
        return {
            "id": self.id,
            "image": self.image_ref,
            "category": self.category,
            "language": self.language,
            "task_type": self.task_type,
            "conversations": conversations,
            "provenance": self.provenance.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: t.Mapping[str, t.Any]) -> "QaRecord":
        prov = data.get("provenance") or {}
        return cls(
            id=str(data["id"]),
            image_ref=str(data["image"]),
            conversations=tuple(
                Turn(role=str(turn["from"]), text=str(turn["value"]))
                for turn in data.get("conversations") or ()
            ),
            category=str(data["category"]),
            language=str(data["language"]),
            task_type=data.get("task_type"),
            provenance=Provenance(
                generator=str(prov.get("generator", "")),
                seed=prov.get("seed"),
                model=prov.get("model"),
                validated=bool(prov.get("validated", False)),
                rejection_reason=prov.get("rejection_reason"),
                verdict=prov.get("verdict"),
            ),
        )


def record_id(image_ref: str, first_human_text: str) -> str:
    """
    Content hash of an image reference and the first question, so that
    regenerating the same sample yields the same id.
    """
    return content_hash(image_ref, first_human_text)


def make_record(
    image_ref: str,
    question: str,
    answer: str,
    category: str,
    language: str,
    provenance: Provenance,
    task_type: str | None = None,
) -> QaRecord:
    return QaRecord(
        id=record_id(image_ref, question),
        image_ref=image_ref,
        conversations=(Turn(ROLE_HUMAN, question), Turn(ROLE_GPT, answer)),
        category=category,
        language=language,
        provenance=provenance,
        task_type=task_type,
    )


def validate_record(record: QaRecord) -> list[str]:
    """
    Return every record invariant ``record`` violates; empty means ok.

    Id uniqueness is a property of a whole dataset and is checked by the
    writers, not here.
    """
    violations: list[str] = []

    if not record.id:
        violations.append("empty id")
    if not record.image_ref:
        violations.append("empty image reference")

    turns = record.conversations
    if not turns:
        violations.append("empty conversation")
    else:
        roles = [turn.role for turn in turns]
        unknown = sorted({r for r in roles if r not in (ROLE_HUMAN, ROLE_GPT)})
        for role in unknown:
            violations.append(f"unknown role {role!r}")
        if any(a == b for a, b in zip(roles, roles[1:])):
            violations.append("non-alternating roles")
        if roles[0] != ROLE_HUMAN:
            violations.append("first role must be human")
        if roles[-1] != ROLE_GPT:
            violations.append("last role must be gpt")

    if record.category not in CATEGORIES:
        violations.append(f"invalid category {record.category!r}")
    if record.language not in LANGUAGES:
        violations.append(f"invalid language {record.language!r}")

    prov = record.provenance
    if not prov.validated and not (prov.rejection_reason or "").strip():
        violations.append("missing rejection reason")
    if prov.verdict is not None and prov.verdict not in VERDICTS:
        violations.append(f"invalid verdict {prov.verdict!r}")

    return violations


def group_conversations(records: t.Iterable[QaRecord]) -> list[QaRecord]:
    """
    Merge validated records of the same image and category into one
    multi-turn record each.

    Turns are concatenated in id order; rejected records are left out. The
    merged id hashes the image reference with the first question of the
    merged conversation.
    """
    groups: dict[tuple[str, str], list[QaRecord]] = {}
    for record in sorted(records, key=lambda r: r.id):
        if record.validated:
            groups.setdefault((record.image_ref, record.category), []).append(record)

    merged: list[QaRecord] = []
    for (image_ref, _category), members in groups.items():
        if len(members) == 1:
            merged.append(members[0])
            continue

        head = members[0]
        turns = tuple(turn for member in members for turn in member.conversations)
        task_types = sorted({m.task_type for m in members if m.task_type})
        merged.append(
            replace(
                head,
                id=record_id(image_ref, head.question),
                conversations=turns,
                task_type=",".join(task_types) or None,
                provenance=replace(head.provenance, verdict=None),
            )
        )

    return sorted(merged, key=lambda r: r.id)


__all__ = [
    "Provenance",
    "QaRecord",
    "Turn",
    "VERDICTS",
    "group_conversations",
    "make_record",
    "record_id",
    "validate_record",
]
