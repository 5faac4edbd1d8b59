import json
import math
from collections import Counter

import numpy as np
import pytest

from docsynth.exceptions import MixPlanError
from docsynth.sampler import MixPlan
from docsynth.sampler import SourceSpec
from docsynth.sampler import empirical_fractions
from docsynth.sampler import expected_fraction
from docsynth.sampler import load_plan
from docsynth.sampler import natural_fraction
from docsynth.sampler import sample_epoch
from docsynth.sampler import save_plan
from docsynth.sampler import solve_weights
from docsynth.sampler import synthetic_fraction

PUBLIC = SourceSpec("public", 3_300_000, False)
SYNTHETIC = SourceSpec("synthetic", 477_000, True)


@pytest.fixture
def desk(fixtures):
    return load_plan(fixtures / "plans" / "desk.json")


def small_plan(p=0.4):
    return solve_weights([SourceSpec("pub", 300, False), SourceSpec("syn", 100, True)], p)


def test_solve_weights() -> None:
    plan = solve_weights([PUBLIC, SYNTHETIC], 0.2)
    assert plan.repetition["synthetic"] == pytest.approx(1.7296, abs=1e-4)
    assert plan.repetition["public"] == 1.0
    assert expected_fraction(plan) == pytest.approx(0.2)


def test_natural_fraction_gives_unit_repetition() -> None:
    p = natural_fraction([PUBLIC, SYNTHETIC])
    plan = solve_weights([PUBLIC, SYNTHETIC], p)
    assert plan.repetition["synthetic"] == 1.0


def test_low_target_reads_synthetic_data_partially() -> None:
    plan = solve_weights([PUBLIC, SYNTHETIC], 0.05)
    assert 0 < plan.repetition["synthetic"] < 1
    assert expected_fraction(plan) == pytest.approx(0.05)


def test_weights_scale_repetition() -> None:
    sources = [
        SourceSpec("public", 1000, False, weight=2.0),
        SourceSpec("syn-a", 100, True),
        SourceSpec("syn-b", 100, True, weight=3.0),
    ]
    plan = solve_weights(sources, 0.5)
    assert plan.repetition["public"] == 2.0
    assert plan.repetition["syn-b"] == pytest.approx(3 * plan.repetition["syn-a"])
    assert expected_fraction(plan) == pytest.approx(0.5)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_target_must_be_open_unit_interval(p) -> None:
    with pytest.raises(MixPlanError, match=r"must be in \(0, 1\)"):
        solve_weights([PUBLIC, SYNTHETIC], p)


@pytest.mark.parametrize(
    "sources, message",
    [
        ([PUBLIC], "no synthetic source"),
        ([SYNTHETIC], "no public source"),
        ([PUBLIC, SYNTHETIC, SourceSpec("public", 5, True)], "must be unique"),
        ([], "no synthetic source"),
    ],
)
def test_plan_errors(sources, message) -> None:
    with pytest.raises(MixPlanError, match=message):
        solve_weights(sources, 0.2)


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"name": "", "size": 1, "is_synthetic": True}, "must not be empty"),
        ({"name": "a", "size": 0, "is_synthetic": True}, "at least 1"),
        ({"name": "a", "size": 5, "is_synthetic": True, "weight": 0.0}, "weight must be positive"),
    ],
)
def test_source_validation(kwargs, message) -> None:
    with pytest.raises(MixPlanError, match=message):
        SourceSpec(**kwargs)


def test_source_from_dict() -> None:
    spec = SourceSpec.from_dict({"name": "a", "size": "12", "is_synthetic": True})
    assert spec == SourceSpec("a", 12, True, 1.0)
    with pytest.raises(MixPlanError, match="missing 'is_synthetic'"):
        SourceSpec.from_dict({"name": "a", "size": 12})


def test_repetition_must_cover_sources() -> None:
    with pytest.raises(MixPlanError, match="cover exactly"):
        MixPlan((PUBLIC, SYNTHETIC), 0.2, {"public": 1.0})


def test_desk_plan(desk) -> None:
    assert [s.name for s in desk.sources] == ["public-docvqa", "synth-doc"]
    assert desk.repetition["synth-doc"] == pytest.approx(1.7296, abs=1e-4)
    assert desk.epoch_length == round(33_000 + desk.repetition["synth-doc"] * 4_770)


def test_desk_epochs_hit_the_target(desk) -> None:
    fractions = [synthetic_fraction(sample_epoch(desk, seed), desk) for seed in range(10)]
    assert sum(fractions) / len(fractions) == pytest.approx(0.2, abs=0.005)


def test_epoch_is_seeded(desk) -> None:
    first = sample_epoch(desk, 3)
    second = sample_epoch(desk, 3)
    assert np.array_equal(first.indices, second.indices)
    assert np.array_equal(first.source_ids, second.source_ids)
    assert not np.array_equal(first.indices, sample_epoch(desk, 4).indices)


def test_epoch_repeats_records_at_most_ceil_r(desk) -> None:
    stream = sample_epoch(desk, 1)
    seen = Counter(stream)
    ceiling = math.ceil(desk.repetition["synth-doc"])

    public = [n for (name, _), n in seen.items() if name == "public-docvqa"]
    assert len(public) == 33_000
    assert set(public) == {1}
    assert max(n for (name, _), n in seen.items() if name == "synth-doc") <= ceiling
    # the whole passes cover every synthetic record
    assert sum(1 for name, _ in seen if name == "synth-doc") == 4_770


def test_epoch_is_shuffled(desk) -> None:
    names = [name for name, _ in sample_epoch(desk, 2)]
    assert set(names[:500]) == {"public-docvqa", "synth-doc"}


def test_unit_plan_reads_everything_once() -> None:
    plan = solve_weights([SourceSpec("pub", 30, False), SourceSpec("syn", 10, True)], 0.25)
    stream = sample_epoch(plan, 0)
    expected = [("pub", i) for i in range(30)] + [("syn", i) for i in range(10)]
    assert sorted(stream) == sorted(expected)
    assert empirical_fractions(stream, plan) == {"pub": 0.75, "syn": 0.25}


def test_summary(desk) -> None:
    summary = desk.summary()
    assert summary["target_synthetic_fraction"] == 0.2
    assert summary["expected_synthetic_fraction"] == pytest.approx(0.2)
    assert [s["name"] for s in summary["sources"]] == ["public-docvqa", "synth-doc"]
    assert sum(s["expected_fraction"] for s in summary["sources"]) == pytest.approx(1.0)


def test_write_jsonl(tmp_path) -> None:
    plan = small_plan()
    stream = sample_epoch(plan, 5)
    path = tmp_path / "epoch" / "draws.jsonl"
    assert stream.write_jsonl(path) == len(stream)

    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == len(stream)
    first = json.loads(lines[0])
    assert set(first) == {"source", "index"}
    assert first["source"] in ("pub", "syn")


def test_save_and_load_plan(tmp_path) -> None:
    plan = small_plan()
    save_plan(plan, tmp_path / "plan.json")
    assert load_plan(tmp_path / "plan.json") == plan


def test_load_plan_checks_given_factors(tmp_path) -> None:
    data = {
        "target_synthetic_fraction": 0.4,
        "sources": [
            {"name": "pub", "size": 300, "is_synthetic": False},
            {"name": "syn", "size": 100, "is_synthetic": True},
        ],
        "repetition": {"pub": 1.0, "syn": 1.0},
    }
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(MixPlanError, match="synthetic fraction of 0.250000, not 0.4"):
        load_plan(path)


@pytest.mark.parametrize(
    "text, message",
    [("{not json", "not valid JSON"), ("[]", "expected an object"), ("{}", "expected an object")],
)
def test_load_plan_errors(tmp_path, text, message) -> None:
    path = tmp_path / "plan.json"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(MixPlanError, match=message):
        load_plan(path)
