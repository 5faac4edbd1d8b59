import threading
import time

import pytest

from docsynth import tools


@pytest.mark.parametrize(
    "text, expected",
    [
        ("42", 42.0),
        ("1,234", 1234.0),
        ("1,234,567.5", 1234567.5),
        ("12.5%", 12.5),
        ("42万元", 42.0),
        ("$3.50", 3.5),
        ("-7", -7.0),
        ("−7", -7.0),
        ("１２３", 123.0),
        ("3.2kg", 3.2),
        (" 18 ", 18.0),
        (5, 5.0),
        (2.5, 2.5),
    ],
)
def test_parse_number(text, expected) -> None:
    assert tools.parse_number(text) == expected


@pytest.mark.parametrize(
    "text", ["", "abc", "1 2", "1,23", "Q4", True, float("nan"), float("inf"), None]
)
def test_parse_number_rejects(text) -> None:
    assert tools.parse_number(text) is None


def test_numbers_equal() -> None:
    assert tools.numbers_equal(0.1 + 0.2, 0.3)
    assert tools.numbers_equal(1_000_000.0, 1_000_000.5)
    assert not tools.numbers_equal(1.0, 1.001)
    assert tools.numbers_equal(0.0, 1e-12)


def test_normalize_text() -> None:
    assert tools.normalize_text("Ａ Ｂ\tc") == "abc"
    assert tools.normalize_text("12.5 亿元。", "。") == "12.5亿元"
    assert tools.normalize_text("North", casefold=False) == "North"


def test_format_number() -> None:
    assert tools.format_number(3.0) == "3"
    assert tools.format_number(-12.0) == "-12"
    assert tools.format_number(2.5) == "2.5"
    assert tools.parse_number(tools.format_number(0.1 + 0.2)) == 0.1 + 0.2


def test_hashes_and_seeds() -> None:
    assert len(tools.content_hash("a", "b")) == 32
    assert len(tools.content_hash("a", length=16)) == 16
    assert tools.content_hash("a", "b") != tools.content_hash("ab")

    seed = tools.derive_seed(7, "doc", "p001.json")
    assert seed == tools.derive_seed(7, "doc", "p001.json")
    assert seed != tools.derive_seed(8, "doc", "p001.json")
    assert 0 <= seed < 2**63


def test_canonical_json() -> None:
    assert tools.canonical_json({"b": 1, "a": [1, "é"]}) == '{"a":[1,"é"],"b":1}'


def test_map_ordered_keeps_input_order() -> None:
    def slow_square(n: int) -> int:
        time.sleep(0.001 * (10 - n))
        return n * n

    assert tools.map_ordered(slow_square, list(range(10)), workers=4) == [
        n * n for n in range(10)
    ]


def test_map_ordered_uses_threads() -> None:
    seen = set()

    def record(n: int) -> int:
        seen.add(threading.get_ident())
        time.sleep(0.01)
        return n

    assert tools.map_ordered(record, list(range(8)), workers=4) == list(range(8))
    assert len(seen) > 1


def test_map_ordered_propagates_errors() -> None:
    def boom(n: int) -> int:
        if n == 3:
            raise ValueError("three")
        return n

    with pytest.raises(ValueError, match="three"):
        tools.map_ordered(boom, list(range(5)), workers=2)
