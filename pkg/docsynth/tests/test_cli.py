import json

import pytest
from click.testing import CliRunner

from docsynth.cli import cli
from docsynth.consts import OCR_PROMPT_PREFIX


@pytest.fixture
def runner():
    return CliRunner()


def test_help(runner) -> None:
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    for command in ("gen-doc", "gen-chart", "gen-table", "validate", "assemble", "sample"):
        assert command in result.output


def test_bad_config_exits_2(runner, tmp_path) -> None:
    path = tmp_path / "config.toml"
    path.write_text("[docqa]\nbogus = 1\n", encoding="utf-8")
    result = runner.invoke(cli, ["-c", str(path), "preprocess", "--w", "10", "--h", "10"])
    assert result.exit_code == 2
    assert "docqa.bogus: unknown key" in result.output


@pytest.mark.parametrize(
    "args, expected",
    [
        (
            ["--w", "400", "--h", "300", "--mode", "infer"],
            {"width": 392, "height": 308, "tokens": 154, "resolution": "low"},
        ),
        (
            ["--w", "3000", "--h", "1000", "--mode", "train", "--seed", "4"],
            None,
        ),
    ],
)
def test_preprocess(runner, args, expected) -> None:
    result = runner.invoke(cli, ["preprocess", *args])
    assert result.exit_code == 0
    data = json.loads(result.output)
    if expected is not None:
        assert data == expected
    else:
        assert data["width"] % 28 == 0 and data["height"] % 28 == 0
        assert data["tokens"] == (data["width"] // 28) * (data["height"] // 28)
        assert data["resolution"] == "conventional"


def test_preprocess_rejects_bad_sizes(runner) -> None:
    result = runner.invoke(cli, ["preprocess", "--w", "0", "--h", "10"])
    assert result.exit_code == 2


def test_augment_layout(runner, fixtures) -> None:
    layout = fixtures / "layouts" / "report_p001.json"
    result = runner.invoke(
        cli, ["augment", "--question", "Who prepared the outlook?", "--ocr-file", str(layout)]
    )
    assert result.exit_code == 0
    assert result.output.startswith(OCR_PROMPT_PREFIX + "```\nNorthwind Research")
    assert result.output.endswith("Who prepared the outlook?\n")


@pytest.mark.parametrize(
    "extra, augmented",
    [([], False), (["--confidence", "0.95"], True), (["--force"], True)],
)
def test_augment_text_file(runner, tmp_path, extra, augmented) -> None:
    ocr = tmp_path / "ocr.txt"
    ocr.write_text("Total due: 42.00\n", encoding="utf-8")
    result = runner.invoke(
        cli, ["augment", "--question", "How much is due?", "--ocr-file", str(ocr), *extra]
    )
    assert result.exit_code == 0
    assert (OCR_PROMPT_PREFIX in result.output) is augmented


def test_validate_exits_1_on_invalid_records(runner, config_file, tmp_path) -> None:
    bad = tmp_path / "bad.jsonl"
    record = {
        "id": "r1",
        "image": "",
        "conversations": [{"from": "human", "value": "Q"}, {"from": "gpt", "value": "A"}],
        "category": "doc",
        "language": "en",
        "provenance": {"generator": "docqa", "validated": True},
    }
    bad.write_text(json.dumps(record) + "\n", encoding="utf-8")
    config = config_file()
    result = runner.invoke(
        cli, ["-c", str(config), "validate", str(bad), "--out", str(tmp_path / "v")]
    )
    assert result.exit_code == 1
    report = json.loads((tmp_path / "v" / "report.json").read_text(encoding="utf-8"))
    assert report["extra"]["invalid"] == {"r1": ["empty image reference"]}


def test_sample_command(runner, config_file, tmp_path, fixtures) -> None:
    config = config_file()
    out = tmp_path / "mix"
    result = runner.invoke(
        cli,
        [
            "-c", str(config), "sample",
            "--plan", str(fixtures / "plans" / "desk.json"),
            "--seed", "2", "--out", str(out), "--emit-stats",
        ],
    )  # fmt: skip
    assert result.exit_code == 0
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["seed"] == 2
    assert report["extra"]["mix"]["target_synthetic_fraction"] == 0.2


def test_run_replays_byte_identical(runner, config_file, replay_store, tmp_path) -> None:
    config = config_file(mode="replay", store=replay_store)
    outputs = []
    for name in ("one", "two"):
        out = tmp_path / name
        result = runner.invoke(cli, ["-c", str(config), "run", "--out", str(out)])
        assert result.exit_code == 0, result.output
        outputs.append(out)

    for name in ("dataset.jsonl", "dataset.rejects.jsonl", "manifest.json", "chart.jsonl"):
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()
