import logging
import os
import threading
import typing as t
from functools import lru_cache

from babel.messages.catalog import Catalog
from babel.messages.pofile import read_po
from babel.numbers import format_decimal

from . import translations

if t.TYPE_CHECKING:
    from .gateway import LLMGateway

log = logging.getLogger("docsynth.babel")

DEFAULT_DOMAIN = "charts"


class Translations:
    """
    Strings of one locale, backed by a PO catalog.

    Used both for chart text coming from data (``translations(text)``) and
    for strings defined in code (``translations.gettext(...)``). Missing
    entries fall back to the source text.
    """

    def __init__(self, locale: str, catalog: Catalog | None = None) -> None:
        self.locale = locale
        self.catalog = catalog

    def lookup(self, string: str) -> str | None:
        if self.catalog is None or not string:
            return None
        message = self.catalog.get(string)
        if message is None or not message.string:
            return None
        return str(message.string)

    def gettext(self, string: str, **variables: t.Any) -> str:
        translated = self.lookup(string)
        if translated is None:
            translated = string
        return translated % variables if variables else translated

    def ngettext(self, singular: str, plural: str, num: int, **variables: t.Any) -> str:
        variables.setdefault("num", num)
        return self.gettext(singular if num == 1 else plural, **variables)

    def __call__(self, text: str) -> str:
        translated = self.lookup(text)
        if translated is None:
            if self.catalog is not None and text:
                log.debug("no %s translation for %r", self.locale, text)
            return text
        return translated

    def format_number(self, value: float) -> str:
        return format_decimal(value, format="#,##0.##", locale=_babel_locale(self.locale))


class GatewayTranslator(Translations):
    """
    Translations asked from the LLM for strings the catalog lacks.

    Answers are cached per string, so a run asks for each string once.
    """

    def __init__(self, locale: str, gateway: "LLMGateway", catalog: Catalog | None = None) -> None:
        super().__init__(locale, catalog)
        self.gateway = gateway
        self._cache: dict[str, str] = {}
        self._lock = threading.Lock()

    def __call__(self, text: str) -> str:
        known = self.lookup(text)
        if known is not None or not text.strip():
            return known if known is not None else text

        with self._lock:
            if text in self._cache:
                return self._cache[text]

        from .prompts import language_name

        request = self.gateway.request(
            "Translate the following chart text into "
            f"{language_name(self.locale)}. Keep numbers, units and symbols "
            f"unchanged and reply with the translation only:\n{text}",
            tag=f"translate-{self.locale}",
        )
        translated = self.gateway.complete(request).text.strip() or text
        with self._lock:
            self._cache[text] = translated
        return translated


def _babel_locale(locale: str) -> str:
    return {"zh": "zh_Hans_CN", "en": "en_US"}.get(locale, locale)


@lru_cache(maxsize=16)
def load_catalog(
    locale: str, domain: str = DEFAULT_DOMAIN, dirname: str | None = None
) -> Catalog | None:
    """
    Read ``<dirname>/<locale>/LC_MESSAGES/<domain>.po``; ``None`` if absent.
    """
    root = dirname or translations.__path__[0]
    path = os.path.join(root, locale, "LC_MESSAGES", f"{domain}.po")
    if not os.path.exists(path):
        return None
    with open(path, "rb") as fp:
        return read_po(fp, locale=_babel_locale(locale), domain=domain)


def get_translations(locale: str, dirname: str | None = None) -> Translations:
    """
    Translations for ``locale``. English is the source language and gets an
    identity translator.
    """
    if locale == "en":
        return Translations(locale)
    catalog = load_catalog(locale, DEFAULT_DOMAIN, dirname)
    if catalog is None:
        log.warning("no %s catalog found, chart text stays untranslated", locale)
    return Translations(locale, catalog)


def gettext(string: str, **variables: t.Any) -> str:
    """
    Marker for extraction; returns the source string.
    """
    return string if not variables else string % variables
