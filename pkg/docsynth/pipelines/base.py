import logging
import typing as t
from dataclasses import dataclass

from .._types import T_JSON
from ..consts import ROLE_GPT
from ..consts import ROLE_HUMAN
from ..corpus.record import Provenance
from ..corpus.record import QaRecord
from ..corpus.record import make_record
from ..gateway.client import Completion
from ..gateway.fences import extract_json_fence

if t.TYPE_CHECKING:
    from ..gateway import LLMGateway

log = logging.getLogger("docsynth.pipelines")

QUESTION_KEYS = ("human", "question", "instruction", "q", "query")
ANSWER_KEYS = ("gpt", "answer", "a", "response", "output")
LABEL_KEYS = ("task_type", "type", "task", "kind", "category")


@dataclass(frozen=True)
class RawPair:
    """
    One question/answer pair as the model wrote it; ``label`` is the task
    type or region kind it claimed, if any.
    """

    question: str
    answer: str
    label: str | None = None


@dataclass(frozen=True)
class GenerationBatch:
    """
    Records generated from one source (a page, a chart or a table).

    ``under_filled`` is set when fewer validated records came back than
    were asked for; the batch is kept either way.
    """

    records: tuple[QaRecord, ...]
    under_filled: bool
    source: str

    @property
    def validated(self) -> list[QaRecord]:
        return [r for r in self.records if r.validated]

    @property
    def rejected(self) -> list[QaRecord]:
        return [r for r in self.records if not r.validated]


def _text(value: t.Any) -> str | None:
    if value is None or isinstance(value, (dict, list)):
        return None
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value).strip()


def _pick(item: t.Mapping[str, t.Any], keys: tuple[str, ...]) -> t.Any:
    lowered = {str(k).casefold(): v for k, v in item.items()}
    for key in keys:
        if key in lowered:
            return lowered[key]
    return None


def _items(value: T_JSON) -> list[t.Any]:
    if isinstance(value, list):
        return value
    if isinstance(value, dict):
        if _pick(value, QUESTION_KEYS) is not None or "conversations" in value:
            return [value]
        for inner in value.values():
            if isinstance(inner, list):
                return inner
    return []


def _from_conversation(turns: list[t.Any], label: str | None) -> list[RawPair]:
    pairs = []
    question: str | None = None
    for turn in turns:
        if not isinstance(turn, dict):
            continue
        role = str(turn.get("from") or turn.get("role") or "").casefold()
        text = _text(turn.get("value", turn.get("content")))
        if not text:
            continue
        if role in (ROLE_HUMAN, "user"):
            question = text
        elif role in (ROLE_GPT, "assistant") and question:
            pairs.append(RawPair(question, text, label))
            question = None
    return pairs


def coerce_pairs(value: T_JSON) -> list[RawPair]:
    """
    Question/answer pairs from whatever JSON shape the model chose.

    Accepted: a list (or an object holding a list) of items, each either
    ``{"conversations": [{"from": "human", ...}, {"from": "gpt", ...}]}``
    or a flat object with question and answer keys (``human``/``gpt``,
    ``question``/``answer``, ``instruction``/``answer``). Items that fit
    none of these are skipped.
    """
    pairs: list[RawPair] = []
    skipped = 0
    for item in _items(value):
        if not isinstance(item, dict):
            skipped += 1
            continue
        label = _text(_pick(item, LABEL_KEYS))
        conversations = item.get("conversations")
        if isinstance(conversations, list):
            found = _from_conversation(conversations, label or None)
            skipped += 0 if found else 1
            pairs.extend(found)
            continue
        question = _text(_pick(item, QUESTION_KEYS))
        answer = _text(_pick(item, ANSWER_KEYS))
        if question and answer:
            pairs.append(RawPair(question, answer, label or None))
        else:
            skipped += 1

    if skipped:
        log.debug("skipped %d malformed QA items", skipped)
    return pairs


class BasePipeline:
    """
    Shared plumbing of the QA pipelines: ask the gateway, pull the pairs
    out of the fenced JSON and turn them into records.

    Subclasses set :attr:`category` and :attr:`generator`.
    """

    category: str = ""
    generator: str = ""

    def __init__(self, gateway: "LLMGateway", language: str, seed: int | None = None) -> None:
        self.gateway = gateway
        self.language = language
        self.seed = seed

    def ask(self, prompt: str, tag: str) -> tuple[list[RawPair], Completion]:
        """
        :raises GatewayError:
            The call failed.
        :raises FenceError:
            The response holds no parsable JSON block.
        """
        completion = self.gateway.complete(self.gateway.request(prompt, tag=tag))
        return coerce_pairs(extract_json_fence(completion.text)), completion

    def provenance(self) -> Provenance:
        return Provenance(generator=self.generator, seed=self.seed, model=self.gateway.model)

    def make(self, image_ref: str, pair: RawPair, task_type: str | None) -> QaRecord:
        return make_record(
            image_ref=image_ref,
            question=pair.question,
            answer=pair.answer,
            category=self.category,
            language=self.language,
            provenance=self.provenance(),
            task_type=task_type,
        )

    def finish(self, records: list[QaRecord], wanted: int, source: str) -> GenerationBatch:
        """
        Batch of ``records``, deduplicated by id and sorted.
        """
        unique: dict[str, QaRecord] = {}
        for record in records:
            if record.id in unique:
                log.debug("%s: dropped repeated question %s", source, record.id)
                continue
            unique[record.id] = record
        ordered = tuple(sorted(unique.values(), key=lambda r: r.id))
        validated = sum(1 for r in ordered if r.validated)
        under_filled = validated < wanted
        if under_filled:
            log.info("%s: %d validated of %d wanted", source, validated, wanted)
        return GenerationBatch(records=ordered, under_filled=under_filled, source=source)
