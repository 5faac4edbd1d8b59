"""
Commands behind the ``docsynth`` command line.

Each command takes a validated :class:`~docsynth.config.PipelineConfig`,
does its work and fills a :class:`~docsynth.report.RunReport`. Work items
(pages, chart seeds, tables) fan out to ``run.workers`` threads; outputs
are sorted before they are written, so files do not depend on scheduling.
"""

import logging
import time
import typing as t
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

import requests
from werkzeug.utils import secure_filename

from ._types import T_PATH
from .augment import augment_question
from .augment import augment_with_layout
from .augment import should_augment
from .babel import GatewayTranslator
from .babel import load_catalog
from .chart.lint import lint_layout
from .chart.mutate import mutate_spec
from .chart.render import render
from .chart.spec import ChartSeed
from .chart.spec import load_seeds
from .config import PipelineConfig
from .corpus.jsonl import merge_records
from .corpus.jsonl import read_jsonl
from .corpus.jsonl import write_dataset
from .corpus.manifest import compute_manifest
from .corpus.record import QaRecord
from .corpus.record import group_conversations
from .corpus.record import validate_record
from .exceptions import ChartSpecError
from .exceptions import ConfigError
from .exceptions import DocsynthError
from .exceptions import FenceError
from .exceptions import LayoutSchemaError
from .exceptions import RenderError
from .exceptions import TableParseError
from .gateway import LLMGateway
from .layout import iter_layout_dir
from .layout import load_layout
from .layout import splice_text
from .pipelines.base import GenerationBatch
from .pipelines.chartqa import chart_image_ref
from .pipelines.chartqa import gen_chart_qa
from .pipelines.docqa import generate_doc_qa
from .pipelines.tableqa import gen_table_qa
from .pipelines.tableqa import table_image_ref
from .preprocess import classify_resolution
from .preprocess import smart_resize
from .preprocess import token_count
from .report import RunReport
from .sampler import empirical_fractions
from .sampler import load_plan
from .sampler import sample_epoch
from .sampler import synthetic_fraction
from .tools import derive_seed
from .tools import map_ordered

log = logging.getLogger("docsynth.runner")

DATASET_NAME = "dataset.jsonl"
MANIFEST_NAME = "manifest.json"
STREAM_NAME = "stream.jsonl"

# per-item failures that skip the item instead of failing the run
ITEM_ERRORS = (FenceError, ChartSpecError, RenderError, TableParseError, LayoutSchemaError)


@dataclass
class RunContext:
    config: PipelineConfig
    seed: int
    report: RunReport
    out_dir: Path
    session: requests.Session | None = None
    sleep: t.Callable[[float], None] = time.sleep
    client: LLMGateway | None = field(default=None, repr=False)

    @property
    def gateway(self) -> LLMGateway:
        if self.client is None:
            self.client = LLMGateway(self.config.gateway, self.session, self.sleep)
        return self.client

    def input_dir(self, given: T_PATH | None, key: str) -> Path:
        value = given or getattr(self.config.run, key)
        if not value:
            raise ConfigError({f"run.{key}": ["no input directory configured"]})
        path = Path(value)
        if not path.is_dir():
            raise ConfigError({f"run.{key}": [f"{path} is not a directory"]})
        return path


def _collect(
    ctx: RunContext, pipeline: str, batches: t.Sequence[GenerationBatch | None]
) -> list[QaRecord]:
    counts = ctx.report.counts(pipeline)
    records: list[QaRecord] = []
    for batch in batches:
        if batch is None:
            counts.failed_items += 1
            continue
        counts.add(batch.records, batch.under_filled)
        records.extend(batch.records)
    return records


def _write(ctx: RunContext, records: list[QaRecord], name: str) -> Path:
    target = ctx.out_dir / name
    kept, rejected = write_dataset(records, target)
    ctx.report.add_output(target)
    log.info("%s: %d validated, %d rejected", target, kept, rejected)
    return target


def gen_doc(ctx: RunContext, layouts: T_PATH | None = None) -> Path:
    source = ctx.input_dir(layouts, "layouts")
    items = list(iter_layout_dir(source))
    gateway = ctx.gateway

    def work(item: tuple[Path, t.Any]) -> GenerationBatch | None:
        path, doc = item
        seed = derive_seed(ctx.seed, "doc", path.name)
        try:
            return generate_doc_qa(doc, ctx.config.docqa, gateway, seed)
        except ITEM_ERRORS as ex:
            log.warning("skipping %s: %s", path.name, ex)
            return None

    batches = map_ordered(work, items, ctx.config.run.workers)
    return _write(ctx, _collect(ctx, "doc", batches), "doc.jsonl")


def _chart_item(
    ctx: RunContext, gateway: LLMGateway, seed: ChartSeed, index: int
) -> GenerationBatch | None:
    chart = ctx.config.chart
    rng_seed = derive_seed(ctx.seed, "chart", seed.id, index)
    translator = None
    if ctx.config.gateway.mode == "live" and chart.options.locale != "en":
        locale = chart.options.locale
        translator = GatewayTranslator(locale, gateway, load_catalog(locale))

    try:
        result = mutate_spec(
            seed,
            chart.topics,
            rng_seed,
            chart.via,
            options=chart.options,
            translator=translator,
            gateway=gateway,
        )
        svg = render(result.spec, rng_seed)
    except ITEM_ERRORS as ex:
        log.warning("skipping seed %s #%d: %s", seed.id, index, ex)
        return None

    diagnostics = lint_layout(result.spec, svg)
    if diagnostics:
        log.warning(
            "skipping seed %s #%d: %s", seed.id, index, ", ".join(d.code for d in diagnostics)
        )
        return None

    image_ref = chart_image_ref(result.spec)
    target = ctx.out_dir / image_ref
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(svg)
    target.with_suffix(".csv").write_text(result.table, encoding="utf-8")
    target.with_suffix(".json").write_text(result.spec.to_json(), encoding="utf-8")

    try:
        return gen_chart_qa(
            result.spec,
            result.table,
            chart.task_matrix,
            gateway,
            chart.language,
            seed=rng_seed,
            image_ref=image_ref,
        )
    except ITEM_ERRORS as ex:
        log.warning("no QA for %s: %s", image_ref, ex)
        return None


def gen_chart(ctx: RunContext, seeds: T_PATH | None = None) -> Path:
    source = ctx.input_dir(seeds, "chart_seeds")
    items = [
        (seed, index)
        for seed in load_seeds(source)
        for index in range(ctx.config.chart.mutations_per_seed)
    ]
    gateway = ctx.gateway
    batches = map_ordered(
        lambda item: _chart_item(ctx, gateway, *item), items, ctx.config.run.workers
    )
    return _write(ctx, _collect(ctx, "chart", batches), "chart.jsonl")


def gen_table(ctx: RunContext, tables: T_PATH | None = None) -> Path:
    source = ctx.input_dir(tables, "tables")
    files = sorted(source.glob("*.html"))
    gateway = ctx.gateway

    def work(path: Path) -> GenerationBatch | None:
        html = path.read_text(encoding="utf-8")
        name = secure_filename(path.stem) or "table"
        try:
            return gen_table_qa(
                html,
                gateway,
                ctx.config.table.language,
                seed=derive_seed(ctx.seed, "table", path.name),
                image_ref=table_image_ref(html, f"{name}.png"),
                min_pairs=ctx.config.table.min_pairs,
            )
        except ITEM_ERRORS as ex:
            log.warning("skipping %s: %s", path.name, ex)
            return None

    batches = map_ordered(work, files, ctx.config.run.workers)
    return _write(ctx, _collect(ctx, "table", batches), "table.jsonl")


def validate(ctx: RunContext, inputs: t.Sequence[T_PATH]) -> int:
    """
    Check records of existing JSONL files; returns the number of invalid
    records.
    """
    invalid: dict[str, list[str]] = {}
    for path in inputs:
        counts = ctx.report.counts(Path(path).name)
        records = read_jsonl(path)
        counts.add(records)
        for record in records:
            violations = validate_record(record)
            if violations:
                invalid[record.id] = violations
    ctx.report.extra["invalid"] = dict(sorted(invalid.items()))
    return len(invalid)


def assemble(
    ctx: RunContext,
    inputs: t.Sequence[T_PATH],
    out: T_PATH | None = None,
    group_by_image: bool | None = None,
) -> Path:
    """
    Merge datasets into one id-sorted dataset plus manifest.

    :raises DuplicateRecordError:
        Two inputs hold different records under one id.
    """
    records = merge_records(read_jsonl(path) for path in inputs)
    if group_by_image is None:
        group_by_image = ctx.config.run.group_by_image
    if group_by_image:
        rejected = [r for r in records if not r.validated]
        records = group_conversations(records) + rejected

    target = Path(out) if out else ctx.out_dir / DATASET_NAME
    kept, _ = write_dataset(records, target)
    manifest = compute_manifest(r for r in records if r.validated)
    manifest_path = target.with_name(MANIFEST_NAME)
    manifest_path.write_text(manifest.to_json(), encoding="utf-8")

    ctx.report.counts("assemble").add(records)
    ctx.report.add_output(target)
    ctx.report.add_output(manifest_path)
    ctx.report.extra["manifest"] = manifest.to_dict()
    log.info("assembled %d records into %s", kept, target)
    return target


def sample(
    ctx: RunContext, plan: T_PATH | None = None, emit_stats: bool = False
) -> Path:
    mix_plan = load_plan(plan) if plan else ctx.config.mix.build_plan()
    stream = sample_epoch(mix_plan, ctx.seed)
    target = ctx.out_dir / STREAM_NAME
    stream.write_jsonl(target)
    ctx.report.add_output(target)
    if emit_stats:
        ctx.report.extra["mix"] = {
            **mix_plan.summary(),
            "stream_length": len(stream),
            "empirical_fractions": empirical_fractions(stream, mix_plan),
            "empirical_synthetic_fraction": synthetic_fraction(stream, mix_plan),
        }
    return target


def resize(config: PipelineConfig, w: int, h: int, mode: str, seed: int) -> dict[str, t.Any]:
    policy = config.preprocess
    w2, h2 = smart_resize(w, h, policy, mode, seed)
    return {
        "width": w2,
        "height": h2,
        "tokens": token_count(w2, h2, policy),
        "resolution": classify_resolution(w, h, policy),
    }


def augment_file(
    config: PipelineConfig,
    question: str,
    ocr_file: T_PATH,
    confidence: float | None = None,
    force: bool = False,
) -> tuple[str, bool]:
    """
    Augment ``question`` with the OCR text of ``ocr_file``: a layout JSON
    document, or plain text whose confidence is given separately.
    """
    path = Path(ocr_file)
    policy = config.augment
    if path.suffix.lower() == ".json":
        doc = load_layout(path)
        if force:
            return augment_question(question, splice_text(doc)), True
        return augment_with_layout(question, doc, policy)

    text = path.read_text(encoding="utf-8").strip()
    if force or should_augment(text, confidence, policy):
        return augment_question(question, text), True
    return question, False


def run_all(ctx: RunContext) -> Path:
    """
    Generate every configured category, then assemble them.
    """
    outputs = []
    if ctx.config.run.layouts:
        outputs.append(gen_doc(ctx))
    if ctx.config.run.chart_seeds:
        outputs.append(gen_chart(ctx))
    if ctx.config.run.tables:
        outputs.append(gen_table(ctx))
    if not outputs:
        raise ConfigError({"run": ["no inputs configured (layouts, chart_seeds, tables)"]})
    return assemble(ctx, outputs)


COMMANDS: dict[str, t.Callable[..., t.Any]] = {
    "gen-doc": gen_doc,
    "gen-chart": gen_chart,
    "gen-table": gen_table,
    "validate": validate,
    "assemble": assemble,
    "sample": sample,
    "run": run_all,
}


def run(
    subcommand: str,
    config: PipelineConfig,
    seed: int | None = None,
    *,
    out_dir: T_PATH | None = None,
    session: requests.Session | None = None,
    sleep: t.Callable[[float], None] = time.sleep,
    write_report: bool = True,
    **params: t.Any,
) -> RunReport:
    """
    Run one command and report on it.

    Failures do not propagate: they set ``report.exit_code`` to 2 for
    configuration errors and 1 for anything else raised by docsynth.
    """
    handler = COMMANDS.get(subcommand)
    if handler is None:
        raise ValueError(f"unknown command {subcommand!r}")

    seed = config.run.seed if seed is None else seed
    report = RunReport(subcommand, seed, config.config_hash)
    ctx = RunContext(
        config=config,
        seed=seed,
        report=report,
        out_dir=Path(out_dir or config.run.out_dir),
        session=session,
        sleep=sleep,
    )

    started = time.perf_counter()
    try:
        result = handler(ctx, **params)
        if subcommand == "validate" and result:
            report.exit_code = 1
    except ConfigError as ex:
        log.error("configuration error: %s", ex)
        report.exit_code = 2
    except DocsynthError as ex:
        log.error("%s failed: %s", subcommand, ex)
        report.exit_code = 1
    finally:
        report.wall_time_s = time.perf_counter() - started
        if ctx.client is not None:
            report.usage = ctx.client.usage.total
            report.llm_calls = ctx.client.usage.calls

    log.info(
        "%s finished with exit code %d in %.2fs",
        subcommand,
        report.exit_code,
        report.wall_time_s,
    )
    if write_report:
        report.write(ctx.out_dir)
    return report
