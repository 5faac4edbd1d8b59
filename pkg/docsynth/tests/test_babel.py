import pytest

from docsynth.babel import GatewayTranslator
from docsynth.babel import Translations
from docsynth.babel import get_translations
from docsynth.babel import gettext
from docsynth.babel import load_catalog


def test_chinese_catalog() -> None:
    tr = get_translations("zh")
    assert tr.locale == "zh"
    assert tr("Art & Design") == "艺术与设计"
    assert tr("Quarterly Revenue") == "季度营收"
    assert tr("Not in the catalog") == "Not in the catalog"
    assert tr("") == ""


def test_python_format_entries() -> None:
    tr = get_translations("zh")
    assert tr.gettext("%(topic)s: %(title)s", topic="商业", title="季度营收") == "商业：季度营收"
    assert tr.gettext("Peak: %(value)s", value="1,234") == "峰值：1,234"


def test_english_is_identity() -> None:
    tr = get_translations("en")
    assert tr.catalog is None
    assert tr("Art & Design") == "Art & Design"
    assert tr.gettext("Peak: %(value)s", value="3") == "Peak: 3"


def test_unknown_locale_falls_back(caplog) -> None:
    tr = get_translations("fr")
    assert tr("Business") == "Business"
    assert "no fr catalog" in caplog.text


def test_load_catalog_is_cached() -> None:
    assert load_catalog("zh") is load_catalog("zh")
    assert load_catalog("xx") is None


@pytest.mark.parametrize(
    "locale, value, expected",
    [("en", 1234.5, "1,234.5"), ("zh", 1234.5, "1,234.5"), ("en", 3.0, "3"), ("en", 0.125, "0.12")],
)
def test_format_number(locale, value, expected) -> None:
    assert Translations(locale).format_number(value) == expected


def test_ngettext() -> None:
    tr = Translations("en")
    assert tr.ngettext("%(num)d bar", "%(num)d bars", 1) == "1 bar"
    assert tr.ngettext("%(num)d bar", "%(num)d bars", 3) == "3 bars"


def test_gettext_marker() -> None:
    assert gettext("Expected a table.") == "Expected a table."
    assert gettext("Expected %(key)s.", key="x") == "Expected x."


def test_gateway_translator_asks_once(gateway, stub) -> None:
    tr = GatewayTranslator("zh", gateway, load_catalog("zh"))
    assert tr("Business") == "商业"
    assert stub.calls == 0

    assert tr("Quarterly Headcount") == "译:Quarterly Headcount"
    assert tr("Quarterly Headcount") == "译:Quarterly Headcount"
    assert stub.calls == 1
    assert "into Chinese" in stub.prompts()[0]
