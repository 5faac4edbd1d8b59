import pytest

from docsynth.augment import AugmentPolicy
from docsynth.augment import augment_question
from docsynth.augment import augment_with_layout
from docsynth.augment import is_augmented
from docsynth.augment import should_augment
from docsynth.exceptions import AlreadyAugmentedError
from docsynth.exceptions import AugmentError
from docsynth.layout import load_layout
from docsynth.layout import parse_layout


@pytest.fixture
def p001(fixtures):
    return load_layout(fixtures / "layouts" / "report_p001.json")


def test_augment_question_format() -> None:
    augmented = augment_question("What is the net profit?", "Net profit: 1.8\nGross margin: 34%")
    assert augmented == (
        "Use the image and the OCR result as context and answer the following question: "
        "```\nNet profit: 1.8\nGross margin: 34%\n```\nWhat is the net profit?"
    )
    assert is_augmented(augmented)
    assert not is_augmented("What is the net profit?")


def test_augment_question_errors() -> None:
    with pytest.raises(AugmentError, match="must not be empty"):
        augment_question("  ", "text")

    once = augment_question("Why?", "text")
    with pytest.raises(AlreadyAugmentedError):
        augment_question(once, "text")
    assert issubclass(AlreadyAugmentedError, AugmentError)


@pytest.mark.parametrize(
    "text, confidence, expected",
    [
        ("Total: 42", 0.95, True),
        ("Total: 42", 0.9, True),
        ("Total: 42", 0.89, False),
        ("Total: 42", None, False),
        ("", 0.99, False),
        ("x" * 2000, 0.99, True),
        ("x" * 2001, 0.99, False),
    ],
)
def test_gate(text, confidence, expected) -> None:
    assert should_augment(text, confidence) is expected


def test_gate_overrides() -> None:
    assert should_augment("", None, AugmentPolicy(always=True))
    assert not should_augment("Total: 42", 1.0, AugmentPolicy(never=True))
    assert should_augment("x" * 30, 0.5, AugmentPolicy(max_ocr_chars=30, min_mean_confidence=0.5))


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"always": True, "never": True}, "mutually exclusive"),
        ({"max_ocr_chars": 0}, "max_ocr_chars"),
        ({"min_mean_confidence": 1.5}, "min_mean_confidence"),
    ],
)
def test_policy_validation(kwargs, message) -> None:
    with pytest.raises(AugmentError, match=message):
        AugmentPolicy(**kwargs)


def test_augment_with_layout(p001) -> None:
    question, applied = augment_with_layout("Who prepared the outlook?", p001)
    assert applied
    lines = question.split("\n")
    assert lines[1] == "Northwind Research Annual Outlook 2024"
    assert lines[7] == "Northwind Research Seal"
    assert lines[-1] == "Who prepared the outlook?"


def test_augment_with_layout_strict_policy(p001) -> None:
    policy = AugmentPolicy(min_mean_confidence=0.95)
    assert augment_with_layout("Who prepared it?", p001, policy) == ("Who prepared it?", False)


def test_layout_without_confidence_is_not_augmented() -> None:
    doc = parse_layout(
        '{"schema_version": 1, "page_width": 100, "page_height": 100, "regions": ['
        '{"kind": "printed_text", "bbox": [0, 0, 100, 100], "lines": ['
        '{"text": "Total", "bbox": [0, 0, 50, 20]}]}]}'
    )
    assert augment_with_layout("What is shown?", doc) == ("What is shown?", False)
