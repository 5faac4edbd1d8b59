import json
import logging
import sys
import typing as t
from pathlib import Path

import click

from .config import PipelineConfig
from .config import load_config
from .exceptions import ConfigError
from .exceptions import DocsynthError
from .preprocess import MODES
from .runner import augment_file
from .runner import resize
from .runner import run

VERBOSITY = {0: logging.WARNING, 1: logging.INFO}


class ConfigProblem(click.ClickException):
    exit_code = 2


def _configure_logging(verbose: int) -> None:
    logging.basicConfig(
        level=VERBOSITY.get(verbose, logging.DEBUG),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _config(ctx: click.Context) -> PipelineConfig:
    return t.cast(PipelineConfig, ctx.find_root().obj)


def _finish(subcommand: str, ctx: click.Context, **kwargs: t.Any) -> None:
    report = run(subcommand, _config(ctx), **kwargs)
    click.echo(report.to_json(), nl=False)
    ctx.exit(report.exit_code)


seed_option = click.option("--seed", type=int, default=None, help="Run seed (default: run.seed).")
out_option = click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Output directory (default: run.out_dir).",
)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "-c",
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    envvar="DOCSYNTH_CONFIG",
    default=None,
    help="TOML configuration file.",
)
@click.option("-v", "--verbose", count=True, help="Log more (repeat for debug).")
@click.version_option(package_name="DocSynth")
@click.pass_context
def cli(ctx: click.Context, config_path: str | None, verbose: int) -> None:
    """
    Synthesize and check document, chart and table QA training data.
    """
    _configure_logging(verbose)
    try:
        ctx.obj = load_config(config_path)
    except ConfigError as ex:
        for path, messages in ex.errors.items():
            for message in messages:
                click.echo(f"{path}: {message}", err=True)
        raise ConfigProblem("invalid configuration") from ex


@cli.command("gen-doc")
@click.option("--layouts", type=click.Path(exists=True, file_okay=False), default=None)
@seed_option
@out_option
@click.pass_context
def gen_doc_command(
    ctx: click.Context, layouts: str | None, seed: int | None, out_dir: str | None
) -> None:
    """
    Generate document QA from a directory of layout JSON files.
    """
    _finish("gen-doc", ctx, seed=seed, out_dir=out_dir, layouts=layouts)


@cli.command("gen-chart")
@click.option("--seeds", type=click.Path(exists=True, file_okay=False), default=None)
@seed_option
@out_option
@click.pass_context
def gen_chart_command(
    ctx: click.Context, seeds: str | None, seed: int | None, out_dir: str | None
) -> None:
    """
    Mutate chart seeds, render them and generate chart QA.
    """
    _finish("gen-chart", ctx, seed=seed, out_dir=out_dir, seeds=seeds)


@cli.command("gen-table")
@click.option("--tables", type=click.Path(exists=True, file_okay=False), default=None)
@seed_option
@out_option
@click.pass_context
def gen_table_command(
    ctx: click.Context, tables: str | None, seed: int | None, out_dir: str | None
) -> None:
    """
    Generate table QA from a directory of HTML tables.
    """
    _finish("gen-table", ctx, seed=seed, out_dir=out_dir, tables=tables)


@cli.command("validate")
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@out_option
@click.pass_context
def validate_command(ctx: click.Context, inputs: tuple[str, ...], out_dir: str | None) -> None:
    """
    Check the records of JSONL datasets.
    """
    _finish("validate", ctx, out_dir=out_dir, inputs=list(inputs))


@cli.command("assemble")
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Dataset file.")
@click.option("--group-by-image/--no-group-by-image", default=None)
@click.pass_context
def assemble_command(
    ctx: click.Context, inputs: tuple[str, ...], out: str, group_by_image: bool | None
) -> None:
    """
    Merge datasets into one sorted dataset and its manifest.
    """
    _finish(
        "assemble",
        ctx,
        out_dir=str(Path(out).parent),
        inputs=list(inputs),
        out=out,
        group_by_image=group_by_image,
    )


@cli.command("sample")
@click.option("--plan", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--emit-stats", is_flag=True, help="Add plan and stream statistics to the report.")
@seed_option
@out_option
@click.pass_context
def sample_command(
    ctx: click.Context,
    plan: str | None,
    emit_stats: bool,
    seed: int | None,
    out_dir: str | None,
) -> None:
    """
    Write one epoch of (source, index) draws for a mix plan.
    """
    _finish("sample", ctx, seed=seed, out_dir=out_dir, plan=plan, emit_stats=emit_stats)


@cli.command("run")
@seed_option
@out_option
@click.pass_context
def run_command(ctx: click.Context, seed: int | None, out_dir: str | None) -> None:
    """
    Generate all configured categories and assemble them.
    """
    _finish("run", ctx, seed=seed, out_dir=out_dir)


@cli.command("preprocess")
@click.option("--w", "width", type=click.IntRange(min=1), required=True)
@click.option("--h", "height", type=click.IntRange(min=1), required=True)
@click.option("--mode", type=click.Choice(MODES), default="train", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def preprocess_command(ctx: click.Context, width: int, height: int, mode: str, seed: int) -> None:
    """
    Print the patch-aligned size and visual token count of an image.
    """
    try:
        result = resize(_config(ctx), width, height, mode, seed)
    except DocsynthError as ex:
        raise click.ClickException(str(ex)) from ex
    click.echo(json.dumps(result))


@cli.command("augment")
@click.option("--question", required=True)
@click.option("--ocr-file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option(
    "--confidence",
    type=click.FloatRange(0.0, 1.0),
    default=None,
    help="Mean OCR confidence of a plain text file.",
)
@click.option("--force", is_flag=True, help="Skip the clear-and-limited-text gate.")
@click.pass_context
def augment_command(
    ctx: click.Context,
    question: str,
    ocr_file: str,
    confidence: float | None,
    force: bool,
) -> None:
    """
    Print the question with OCR context prepended when the gate allows it.
    """
    try:
        text, applied = augment_file(_config(ctx), question, ocr_file, confidence, force)
    except DocsynthError as ex:
        raise click.ClickException(str(ex)) from ex
    if not applied:
        click.echo("OCR gate closed, question left unchanged", err=True)
    click.echo(text)


def main() -> None:
    cli(prog_name="docsynth")


if __name__ == "__main__":
    main()
