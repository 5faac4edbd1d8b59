import hashlib
import json
import math
import re
import typing as t
import unicodedata
from concurrent.futures import ThreadPoolExecutor

from .consts import NUMERIC_ABS_TOL
from .consts import NUMERIC_REL_TOL

T = t.TypeVar("T")
R = t.TypeVar("R")

_THOUSANDS_RE = re.compile(r"(?<=\d),(?=\d{3}(?!\d))")
_NUMERIC_RE = re.compile(
    r"""^
    (?P<sign>[+-]?)\s*
    [$¥€£]?\s*
    (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)\s*
    (?P<unit>%|°[CF]?|[^\W\d_]{1,4}%?)?
    $""",
    re.VERBOSE,
)
_WHITESPACE_RE = re.compile(r"\s+")


def parse_number(text: t.Any) -> float | None:
    """
    Parse a number the way it appears in charts, tables and answers.

    Thousands separators, a leading currency sign, a trailing percent sign
    and a short unit suffix (``kg``, ``万元``) are ignored, so ``"1,234"``,
    ``"12.5%"`` and ``"42万元"`` parse to 1234, 12.5 and 42. Returns ``None``
    for anything that is not a single number.

    :param text:
        Text to parse. Numbers are returned as floats unchanged.
    """
    if isinstance(text, bool):
        return None
    if isinstance(text, (int, float)):
        return float(text) if math.isfinite(text) else None

    s = unicodedata.normalize("NFKC", str(text)).strip()
    if not s:
        return None

    s = s.replace("−", "-")
    s = _THOUSANDS_RE.sub("", s)

    match = _NUMERIC_RE.match(s)
    if match is None:
        return None

    value = float(match.group("num"))
    if not math.isfinite(value):
        return None
    return -value if match.group("sign") == "-" else value


def numbers_equal(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=NUMERIC_REL_TOL, abs_tol=NUMERIC_ABS_TOL)


def normalize_text(text: str, strip_chars: str = "", casefold: bool = True) -> str:
    """
    NFKC-normalize ``text``, drop all whitespace and every character in
    ``strip_chars``.
    """
    s = unicodedata.normalize("NFKC", text)
    s = _WHITESPACE_RE.sub("", s)
    if strip_chars:
        drop = set(unicodedata.normalize("NFKC", strip_chars)) | set(strip_chars)
        s = "".join(ch for ch in s if ch not in drop)
    return s.casefold() if casefold else s


def format_number(value: float) -> str:
    """
    Shortest text that parses back to exactly ``value``.
    """
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def content_hash(*parts: str, length: int = 32) -> str:
    digest = hashlib.sha256("\x00".join(parts).encode("utf-8")).hexdigest()
    return digest[:length]


def derive_seed(*parts: t.Any) -> int:
    """
    Derive a 63-bit seed from a run seed and item identifiers.
    """
    text = "\x00".join(str(p) for p in parts)
    return int(hashlib.sha256(text.encode("utf-8")).hexdigest()[:16], 16) >> 1


def canonical_json(obj: t.Any) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def is_cjk(ch: str) -> bool:
    return unicodedata.east_asian_width(ch) in ("W", "F")


def map_ordered(
    func: t.Callable[[T], R], items: t.Sequence[T], workers: int = 1
) -> list[R]:
    """
    Apply ``func`` to every item on a bounded thread pool.

    Results come back in input order whatever the scheduling was. The first
    exception raised by ``func`` propagates.
    """
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
