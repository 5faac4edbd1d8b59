import pytest

from docsynth.corpus import Provenance
from docsynth.corpus import make_record
from docsynth.corpus import validate_record
from docsynth.exceptions import ConfigError
from docsynth.exceptions import FenceError
from docsynth.layout import kinds_present
from docsynth.layout import load_layout
from docsynth.layout import splice_text
from docsynth.pipelines import DocQaConfig
from docsynth.pipelines import coverage_report
from docsynth.pipelines import generate_doc_qa
from docsynth.pipelines import validate_doc_qa
from docsynth.pipelines.docqa import image_ref_for
from docsynth.pipelines.docqa import normalize_region_kind

from .stub_llm import UNGROUNDED_ANSWER


@pytest.fixture
def page(fixtures):
    return load_layout(fixtures / "layouts" / "report_p001.json")


def record(question, answer, task_type="printed_text", language="zh"):
    return make_record(
        "reports/p.png", question, answer, "doc", language, Provenance("docqa"), task_type
    )


SPLICED = "中信证券研究部\n2023年营业收入：12.5亿元\nGross margin: 34.2%"


def test_grounded_answer_passes() -> None:
    checked = validate_doc_qa(
        record("2023年的营业收入是多少？", "12.5亿元"), SPLICED, {"printed_text"}
    )
    assert checked.validated


def test_grounding_ignores_space_and_punctuation() -> None:
    checked = validate_doc_qa(
        record("What is the gross margin?", "gross margin 34.2%"), SPLICED, {"table"}
    )
    assert checked.validated


def test_ungrounded_answer_is_rejected() -> None:
    checked = validate_doc_qa(record("营业收入是多少？", "13亿元"), SPLICED, {"table"})
    assert not checked.validated
    assert checked.provenance.rejection_reason == "answer not grounded"


@pytest.mark.parametrize(
    "question, reason",
    [
        ("请问发布机构是哪家？", "banned instruction prefix '请问'"),
        ("Please answer: who published it?", "banned instruction prefix 'Please answer'"),
        ("左上角写的机构是哪家？", "banned layout word '左上角'"),
        ("Which institution appears in the top left?", "banned layout word 'top left'"),
    ],
)
def test_banned_wording(question, reason) -> None:
    checked = validate_doc_qa(record(question, "中信证券研究部"), SPLICED, {"printed_text"})
    assert not checked.validated
    assert checked.provenance.rejection_reason == reason


def test_latin_banned_words_match_whole_words() -> None:
    checked = validate_doc_qa(
        record("Who handled the layouting work?", "中信证券研究部"), SPLICED, set()
    )
    assert checked.validated


def test_all_fired_rules_are_reported() -> None:
    checked = validate_doc_qa(record("请问表格里的数字？", "99"), SPLICED, set())
    assert checked.provenance.rejection_reason == (
        "answer not grounded; banned instruction prefix '请问'; banned layout word '表格'"
    )
    assert validate_record(checked) == []


def test_region_kind_must_be_present_when_required() -> None:
    strict = DocQaConfig(require_present_kind=True)
    item = record("营业收入是多少？", "12.5亿元", task_type="seal")
    assert validate_doc_qa(item, SPLICED, {"table"}).validated
    rejected = validate_doc_qa(item, SPLICED, {"table"}, strict)
    assert rejected.provenance.rejection_reason == "region kind 'seal' not on the page"


@pytest.mark.parametrize(
    "label, kind",
    [
        ("printed_text", "printed_text"),
        ("Printed Text", "printed_text"),
        ("formula", "printed_formula"),
        ("stamp", "seal"),
        ("charts", "chart"),
        ("footnote", None),
        (None, None),
    ],
)
def test_normalize_region_kind(label, kind) -> None:
    assert normalize_region_kind(label) == kind


def test_config_validation() -> None:
    with pytest.raises(ConfigError) as exc_info:
        DocQaConfig(min_pairs=0, language="fr")
    assert set(exc_info.value.errors) == {"docqa.min_pairs", "docqa.language"}


def test_generate_doc_qa(page, gateway, stub) -> None:
    batch = generate_doc_qa(page, DocQaConfig(min_pairs=3, language="en"), gateway, seed=11)

    assert stub.calls == 1
    assert stub.requests[0]["messages"][0]["content"].startswith("You are a document data")
    assert len(batch.records) == 8
    assert len(batch.validated) == 7
    assert not batch.under_filled

    rejected = batch.rejected
    assert len(rejected) == 1
    assert rejected[0].answer == UNGROUNDED_ANSWER
    assert rejected[0].provenance.rejection_reason == "answer not grounded"

    first = batch.records[0]
    assert first.image_ref == "reports/northwind/p001.png"
    assert first.category == "doc"
    assert first.language == "en"
    assert first.provenance.generator == "docqa"
    assert first.provenance.seed == 11
    assert first.provenance.model == "stub-chat"
    assert [r.id for r in batch.records] == sorted(r.id for r in batch.records)
    assert {r.task_type for r in batch.validated} == {"printed_text", "table", "seal"}
    assert all(validate_record(r) == [] for r in batch.records)


def test_under_filled_page(page, gateway) -> None:
    batch = generate_doc_qa(page, DocQaConfig(min_pairs=20), gateway)
    assert batch.under_filled
    assert len(batch.validated) == 7


def test_image_ref_fallback(fixtures) -> None:
    doc = load_layout(fixtures / "layouts" / "report_p003.json")
    assert image_ref_for(doc) == "reports/zhongxin/p003.png"
    anonymous = type(doc)(doc.page_width, doc.page_height, doc.regions)
    assert image_ref_for(anonymous).startswith("sha256:")


def test_fence_errors_propagate(page, gateway, stub) -> None:
    stub.responder = lambda prompt: "I'd rather not."
    with pytest.raises(FenceError):
        generate_doc_qa(page, None, gateway)


def test_coverage_report(page, gateway) -> None:
    batch = generate_doc_qa(page, DocQaConfig(min_pairs=3), gateway)
    report = coverage_report(batch.records, kinds_present(page))
    assert report.counts == {"printed_text": 3, "table": 3, "seal": 1}
    assert report.gaps == ()

    report = coverage_report(batch.records, {"printed_text", "chart"})
    assert report.gaps == ("chart",)


def test_spliced_text_holds_every_answer(page, gateway) -> None:
    batch = generate_doc_qa(page, DocQaConfig(min_pairs=3), gateway)
    spliced = splice_text(page)
    for item in batch.validated:
        assert item.answer in spliced
