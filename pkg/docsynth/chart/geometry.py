import math
import typing as t
from dataclasses import dataclass

from ..tools import is_cjk

# glyph advance as a share of the font size
NARROW_ADVANCE = 0.6
WIDE_ADVANCE = 1.0
LINE_HEIGHT = 1.2

ELLIPSIS = "…"


@dataclass(frozen=True)
class Box:
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def center_x(self) -> float:
        return (self.x0 + self.x1) / 2

    @property
    def center_y(self) -> float:
        return (self.y0 + self.y1) / 2

    def within(self, other: "Box", eps: float = 0.01) -> bool:
        return (
            self.x0 >= other.x0 - eps
            and self.y0 >= other.y0 - eps
            and self.x1 <= other.x1 + eps
            and self.y1 <= other.y1 + eps
        )

    def intersects(self, other: "Box") -> bool:
        return (
            min(self.x1, other.x1) > max(self.x0, other.x0)
            and min(self.y1, other.y1) > max(self.y0, other.y0)
        )

    def as_attr(self) -> str:
        return " ".join(fmt(v) for v in (self.x0, self.y0, self.x1, self.y1))

    @classmethod
    def from_attr(cls, value: str) -> "Box":
        x0, y0, x1, y1 = (float(v) for v in value.split())
        return cls(x0, y0, x1, y1)


def fmt(value: float) -> str:
    """
    Coordinates with at most two decimals, no trailing zeros.
    """
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def text_width(text: str, size: float) -> float:
    return sum(size * (WIDE_ADVANCE if is_cjk(ch) else NARROW_ADVANCE) for ch in text)


def text_height(size: float) -> float:
    return size * LINE_HEIGHT


def fit_text(text: str, size: float, max_width: float) -> str:
    """
    ``text`` cut down with an ellipsis until it is at most ``max_width``
    wide; empty if not even the ellipsis fits.
    """
    if text_width(text, size) <= max_width:
        return text
    for end in range(len(text) - 1, 0, -1):
        candidate = text[:end] + ELLIPSIS
        if text_width(candidate, size) <= max_width:
            return candidate
    return ELLIPSIS if text_width(ELLIPSIS, size) <= max_width else ""


def text_box(text: str, size: float, x: float, baseline: float, anchor: str = "middle") -> Box:
    """
    Box of a single text line drawn at ``(x, baseline)``.
    """
    width = text_width(text, size)
    height = text_height(size)
    if anchor == "start":
        x0 = x
    elif anchor == "end":
        x0 = x - width
    else:
        x0 = x - width / 2
    top = baseline - size
    return Box(x0, top, x0 + width, top + height)


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    """
    Round tick values covering ``[lo, hi]`` with a 1/2/2.5/5 step.
    """
    if hi < lo:
        lo, hi = hi, lo
    if hi == lo:
        if lo == 0:
            hi = 1.0
        else:
            pad = abs(lo) * 0.1
            lo, hi = lo - pad, hi + pad

    raw = (hi - lo) / count
    magnitude = 10 ** math.floor(math.log10(raw))
    step = magnitude
    for multiple in (1, 2, 2.5, 5, 10):
        step = multiple * magnitude
        if step >= raw:
            break

    start = math.floor(lo / step + 1e-9) * step
    stop = math.ceil(hi / step - 1e-9) * step
    n = int(round((stop - start) / step))
    return [round(start + i * step, 10) for i in range(n + 1)]


def linear(domain: tuple[float, float], span: tuple[float, float]) -> t.Callable[[float], float]:
    d0, d1 = domain
    r0, r1 = span
    scale = (r1 - r0) / (d1 - d0) if d1 != d0 else 0.0
    return lambda value: r0 + (value - d0) * scale
