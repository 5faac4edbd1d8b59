"""
OCR context for visual questions at inference time.

An augmented question reads::

    <OCR_PROMPT_PREFIX>```
    <ocr text>
    ```
    <question>

The prefix ends in a space and is kept byte for byte. Augmentation is
meant for pages with little, cleanly recognized text; :func:`should_augment`
is the gate.
"""

import logging
from dataclasses import dataclass

from .consts import DEFAULT_MAX_OCR_CHARS
from .consts import DEFAULT_MIN_MEAN_CONFIDENCE
from .consts import OCR_PROMPT_PREFIX
from .exceptions import AlreadyAugmentedError
from .exceptions import AugmentError
from .layout import LayoutDocument
from .layout import mean_confidence
from .layout import splice_text

log = logging.getLogger("docsynth.augment")

FENCE = "```"


@dataclass(frozen=True)
class AugmentPolicy:
    max_ocr_chars: int = DEFAULT_MAX_OCR_CHARS
    min_mean_confidence: float = DEFAULT_MIN_MEAN_CONFIDENCE
    always: bool = False
    never: bool = False

    def __post_init__(self) -> None:
        if self.max_ocr_chars <= 0:
            raise AugmentError("max_ocr_chars must be positive")
        if not 0.0 <= self.min_mean_confidence <= 1.0:
            raise AugmentError("min_mean_confidence must be within [0, 1]")
        if self.always and self.never:
            raise AugmentError("always and never are mutually exclusive")


def should_augment(
    ocr_text: str, mean_confidence: float | None, policy: AugmentPolicy | None = None
) -> bool:
    """
    True for non-empty OCR text within the character budget whose mean
    line confidence reaches the policy minimum. Unknown confidence never
    passes. ``always``/``never`` decide on their own.
    """
    policy = policy or AugmentPolicy()
    if policy.never:
        return False
    if policy.always:
        return True
    if not 0 < len(ocr_text) <= policy.max_ocr_chars:
        return False
    return mean_confidence is not None and mean_confidence >= policy.min_mean_confidence


def is_augmented(question: str) -> bool:
    return question.startswith(OCR_PROMPT_PREFIX)


def augment_question(question: str, ocr_text: str) -> str:
    """
    Prepend the OCR prefix and the OCR text block to ``question``.

    :raises AugmentError:
        ``question`` is empty.
    :raises AlreadyAugmentedError:
        ``question`` already starts with the OCR prefix.
    """
    if not question.strip():
        raise AugmentError("question must not be empty")
    if is_augmented(question):
        raise AlreadyAugmentedError("question is already augmented with OCR context")
    return f"{OCR_PROMPT_PREFIX}{FENCE}\n{ocr_text}\n{FENCE}\n{question}"


def augment_with_layout(
    question: str,
    doc: LayoutDocument,
    policy: AugmentPolicy | None = None,
) -> tuple[str, bool]:
    """
    Augment ``question`` with the spliced text of ``doc`` if the gate
    lets it through.

    :return:
        ``(question text, whether augmentation was applied)``
    """
    text = splice_text(doc)
    if not should_augment(text, mean_confidence(doc), policy):
        log.debug("OCR gate closed for %d chars of text", len(text))
        return question, False
    return augment_question(question, text), True
