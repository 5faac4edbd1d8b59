import logging
import re
import typing as t
from dataclasses import dataclass

from .._types import T_JSON
from ..consts import CATEGORY_DOC
from ..consts import DEFAULT_BANNED_LAYOUT_WORDS
from ..consts import DEFAULT_BANNED_PREFIXES
from ..consts import DEFAULT_DOC_GENRE
from ..consts import DEFAULT_MIN_PAIRS
from ..consts import DEFAULT_STRIP_PUNCTUATION
from ..consts import LANGUAGES
from ..consts import REGION_KINDS
from ..corpus.record import QaRecord
from ..exceptions import ConfigError
from ..exceptions import PromptError
from ..layout import LayoutDocument
from ..layout import kinds_present
from ..layout import parse_layout
from ..layout import serialize_layout
from ..layout import splice_text
from ..prompts import language_name
from ..prompts import render_prompt
from ..tools import content_hash
from ..tools import normalize_text
from .base import BasePipeline
from .base import GenerationBatch

if t.TYPE_CHECKING:
    from ..gateway import LLMGateway

log = logging.getLogger("docsynth.pipelines.docqa")

DOC_TEMPLATES: dict[str, T_JSON] = {
    "zh": [
        {
            "type": "printed_text",
            "conversations": [
                {"from": "human", "value": "这份报告的发布机构是哪家？"},
                {"from": "gpt", "value": "中信证券研究部"},
            ],
        },
        {
            "type": "table",
            "conversations": [
                {"from": "human", "value": "2023年的营业收入是多少？"},
                {"from": "gpt", "value": "12.5亿元"},
            ],
        },
    ],
    "en": [
        {
            "type": "printed_text",
            "conversations": [
                {"from": "human", "value": "Which institution published this report?"},
                {"from": "gpt", "value": "Northwind Research"},
            ],
        },
        {
            "type": "table",
            "conversations": [
                {"from": "human", "value": "What was the operating revenue in 2023?"},
                {"from": "gpt", "value": "1.25 billion USD"},
            ],
        },
    ],
}

_KIND_ALIASES = {
    "text": "printed_text",
    "printedtext": "printed_text",
    "tables": "table",
    "charts": "chart",
    "formula": "printed_formula",
    "formulas": "printed_formula",
    "printedformula": "printed_formula",
    "seals": "seal",
    "stamp": "seal",
}


@dataclass(frozen=True)
class DocQaConfig:
    """
    Settings of the document QA pipeline (``[docqa]`` section).

    :param min_pairs:
        Pairs asked for per page; fewer validated pairs flag the batch as
        under-filled.
    :param require_present_kind:
        Also reject pairs labeled with a region kind the page does not have.
    """

    min_pairs: int = DEFAULT_MIN_PAIRS
    banned_instruction_prefixes: tuple[str, ...] = DEFAULT_BANNED_PREFIXES
    banned_layout_words: tuple[str, ...] = DEFAULT_BANNED_LAYOUT_WORDS
    strip_punctuation: str = DEFAULT_STRIP_PUNCTUATION
    genre: str = DEFAULT_DOC_GENRE
    language: str = "zh"
    require_present_kind: bool = False
    template: T_JSON = None

    def __post_init__(self) -> None:
        errors: dict[str, list[str]] = {}
        if self.min_pairs < 1:
            errors["docqa.min_pairs"] = ["must be at least 1"]
        if self.language not in LANGUAGES:
            errors["docqa.language"] = [f"must be one of {', '.join(LANGUAGES)}"]
        if not self.genre.strip():
            errors["docqa.genre"] = ["must not be empty"]
        if errors:
            raise ConfigError(errors)

    def template_example(self) -> T_JSON:
        return self.template if self.template is not None else DOC_TEMPLATES[self.language]

    def normalize(self, text: str) -> str:
        return normalize_text(text, self.strip_punctuation)


def normalize_region_kind(label: str | None) -> str | None:
    if not label:
        return None
    key = re.sub(r"[\s\-]+", "_", label.strip().casefold())
    if key in REGION_KINDS:
        return key
    return _KIND_ALIASES.get(key.replace("_", ""), _KIND_ALIASES.get(key))


def image_ref_for(doc: LayoutDocument) -> str:
    """
    The page image reference, or a content hash of the layout when the
    layout names no image.
    """
    return doc.image or doc.doc_id or "sha256:" + content_hash(serialize_layout(doc))


def build_doc_prompt(
    layout_json: str,
    template_example: T_JSON,
    genre: str = DEFAULT_DOC_GENRE,
    min_pairs: int = DEFAULT_MIN_PAIRS,
    language: str = "zh",
) -> str:
    """
    The document QA prompt for one page.

    :raises LayoutSchemaError:
        ``layout_json`` is not a valid layout document.
    :raises PromptError:
        A placeholder would stay empty.
    """
    if not str(layout_json).strip():
        raise PromptError("placeholder {json_string} unfilled")
    parse_layout(layout_json)
    return render_prompt(
        "doc_qa",
        genre=genre,
        json_string=layout_json,
        min_pairs=str(min_pairs),
        language_name=language_name(language),
        template=template_example,
    )


def _contains_word(text: str, word: str) -> bool:
    if word.isascii():
        pattern = r"(?<![A-Za-z0-9])" + re.escape(word.casefold()) + r"(?![A-Za-z0-9])"
        return re.search(pattern, text.casefold()) is not None
    return word in text


def doc_qa_violations(
    record: QaRecord,
    spliced_text: str,
    kinds: t.AbstractSet[str],
    cfg: DocQaConfig,
) -> list[str]:
    """
    Every rule ``record`` breaks, in rule order.
    """
    reasons = []
    question, answer = record.question, record.answer

    answer_key = cfg.normalize(answer)
    if not answer_key or answer_key not in cfg.normalize(spliced_text):
        reasons.append("answer not grounded")

    head = question.lstrip()
    for prefix in cfg.banned_instruction_prefixes:
        if head.casefold().startswith(prefix.casefold()):
            reasons.append(f"banned instruction prefix {prefix!r}")

    for word in cfg.banned_layout_words:
        if _contains_word(question, word) or _contains_word(answer, word):
            reasons.append(f"banned layout word {word!r}")

    if cfg.require_present_kind and record.task_type and record.task_type not in kinds:
        reasons.append(f"region kind {record.task_type!r} not on the page")
    return reasons


def validate_doc_qa(
    record: QaRecord,
    spliced_text: str,
    kinds: t.AbstractSet[str],
    cfg: DocQaConfig | None = None,
) -> QaRecord:
    """
    ``record`` as it is when it passes, or rejected with every fired rule
    joined into the rejection reason.
    """
    reasons = doc_qa_violations(record, spliced_text, kinds, cfg or DocQaConfig())
    if not reasons:
        return record
    log.debug("rejected %s: %s", record.id, "; ".join(reasons))
    return record.rejected("; ".join(reasons))


class DocQaPipeline(BasePipeline):
    category = CATEGORY_DOC
    generator = "docqa"

    def __init__(
        self, gateway: "LLMGateway", cfg: DocQaConfig | None = None, seed: int | None = None
    ) -> None:
        self.cfg = cfg or DocQaConfig()
        super().__init__(gateway, self.cfg.language, seed)

    def build_prompt(self, doc: LayoutDocument) -> str:
        cfg = self.cfg
        return build_doc_prompt(
            serialize_layout(doc),
            cfg.template_example(),
            genre=cfg.genre,
            min_pairs=cfg.min_pairs,
            language=cfg.language,
        )

    def generate(self, doc: LayoutDocument) -> GenerationBatch:
        image_ref = image_ref_for(doc)
        spliced = splice_text(doc)
        kinds = kinds_present(doc)

        pairs, _ = self.ask(self.build_prompt(doc), tag="doc-qa")
        records = []
        for pair in pairs:
            record = self.make(image_ref, pair, normalize_region_kind(pair.label) or pair.label)
            records.append(validate_doc_qa(record, spliced, kinds, self.cfg))
        return self.finish(records, self.cfg.min_pairs, image_ref)


def generate_doc_qa(
    doc: LayoutDocument,
    cfg: DocQaConfig | None,
    gateway: "LLMGateway",
    seed: int | None = None,
) -> GenerationBatch:
    """
    Ask for QA pairs about one page and validate them against its text.

    :raises GatewayError:
        The gateway call failed.
    :raises FenceError:
        The response holds no JSON block.
    """
    return DocQaPipeline(gateway, cfg, seed).generate(doc)


@dataclass(frozen=True)
class CoverageReport:
    counts: dict[str, int]
    gaps: tuple[str, ...]

    def to_dict(self) -> dict[str, t.Any]:
        return {"counts": dict(self.counts), "gaps": list(self.gaps)}


def coverage_report(records: t.Iterable[QaRecord], kinds: t.AbstractSet[str]) -> CoverageReport:
    """
    Validated records per region kind present on the page; kinds without
    any record are gaps.
    """
    counts = {kind: 0 for kind in REGION_KINDS if kind in kinds}
    for record in records:
        if record.validated and record.task_type in counts:
            counts[record.task_type] += 1
    gaps = tuple(kind for kind, count in counts.items() if count == 0)
    return CoverageReport(counts=counts, gaps=gaps)
