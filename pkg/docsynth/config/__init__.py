"""
Configuration loading.

A configuration is one TOML file with the sections ``[gateway]``,
``[docqa]``, ``[chart]``, ``[table]``, ``[preprocess]``, ``[mix]``,
``[augment]`` and ``[run]``. Values can be overridden from the
environment, e.g. ``DOCSYNTH_GATEWAY__MODE=replay``. Relative paths are
resolved against the directory of the configuration file.
"""

import hashlib
import logging
import os
import typing as t
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

from flask import Config

from .._compat import load_toml
from .._types import T_PATH
from ..augment import AugmentPolicy
from ..chart.mutate import MutationOptions
from ..chart.tasks import TaskMatrix
from ..consts import ENV_PREFIX
from ..exceptions import ConfigError
from ..exceptions import MixPlanError
from ..gateway import GatewayConfig
from ..pipelines.docqa import DocQaConfig
from ..preprocess import ResizePolicy
from ..sampler import MixPlan
from ..sampler import SourceSpec
from ..sampler import load_plan
from ..sampler import solve_weights
from ..tools import canonical_json
from .forms import SECTION_FORMS

__all__ = [
    "ChartConfig",
    "MixConfig",
    "PipelineConfig",
    "RunConfig",
    "TableConfig",
    "load_config",
]

log = logging.getLogger("docsynth.config")


@dataclass(frozen=True)
class ChartConfig:
    topics: tuple[str, ...]
    language: str
    via: str
    options: MutationOptions
    task_matrix: TaskMatrix
    mutations_per_seed: int = 1


@dataclass(frozen=True)
class TableConfig:
    language: str = "zh"
    min_pairs: int = 1


@dataclass(frozen=True)
class MixConfig:
    target_synthetic_fraction: float
    sources: tuple[SourceSpec, ...] = ()
    plan: str | None = None

    def build_plan(self) -> MixPlan:
        """
        The plan file when one is configured, else the sources solved for
        the target fraction.
        """
        if self.plan:
            return load_plan(self.plan)
        if not self.sources:
            raise MixPlanError("[mix] needs either a plan file or sources")
        return solve_weights(self.sources, self.target_synthetic_fraction)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    workers: int = 1
    out_dir: str = "out"
    layouts: str | None = None
    chart_seeds: str | None = None
    tables: str | None = None
    group_by_image: bool = False


@dataclass(frozen=True)
class PipelineConfig:
    gateway: GatewayConfig
    docqa: DocQaConfig
    chart: ChartConfig
    table: TableConfig
    preprocess: ResizePolicy
    mix: MixConfig
    augment: AugmentPolicy
    run: RunConfig
    resolved: dict[str, dict[str, t.Any]] = field(default_factory=dict, repr=False)

    @property
    def config_hash(self) -> str:
        """
        sha256 of the validated settings, independent of key order and of
        where the configuration file lives.
        """
        return hashlib.sha256(canonical_json(self.resolved).encode("utf-8")).hexdigest()


def _flatten(prefix: str, errors: t.Any, out: dict[str, list[str]]) -> None:
    if isinstance(errors, dict):
        for key, value in errors.items():
            if key is None:
                _flatten(prefix, value, out)
            else:
                _flatten(f"{prefix}.{key}", value, out)
    elif isinstance(errors, (list, tuple)):
        if all(isinstance(item, str) for item in errors):
            if errors:
                out.setdefault(prefix, []).extend(errors)
        else:
            for index, item in enumerate(errors):
                if item:
                    _flatten(f"{prefix}.{index}", item, out)


def _lower_keys(section: t.Mapping[str, t.Any]) -> dict[str, t.Any]:
    # environment overrides arrive upper-case after the file's keys
    return {str(key).lower(): value for key, value in section.items()}


def _validate_sections(
    raw: t.Mapping[str, t.Any],
) -> tuple[dict[str, dict[str, t.Any]], dict[str, list[str]]]:
    errors: dict[str, list[str]] = {}
    resolved: dict[str, dict[str, t.Any]] = {}

    for key in raw:
        name = key.lower()
        if name not in SECTION_FORMS:
            errors.setdefault(name, []).append("unknown section")
        elif not isinstance(raw[key], dict):
            errors.setdefault(name, []).append("expected a table")

    for name, form_class in SECTION_FORMS.items():
        value = raw.get(name.upper())
        section = _lower_keys(value) if isinstance(value, dict) else {}

        form = form_class(data=section)
        for key in section:
            if key not in form._fields:
                errors.setdefault(f"{name}.{key}", []).append("unknown key")
        if name == "mix":
            for index, source in enumerate(section.get("sources") or []):
                if isinstance(source, dict):
                    for key in source:
                        if key not in ("name", "size", "is_synthetic", "weight"):
                            errors.setdefault(f"mix.sources.{index}.{key}", []).append(
                                "unknown key"
                            )

        if not form.validate():
            _flatten(name, form.errors, errors)
        resolved[name] = form.data

    return resolved, errors


def _path(root: Path, value: str | None) -> str | None:
    if not value:
        return None
    path = Path(value)
    return os.fspath(path if path.is_absolute() else root / path)


def _build(resolved: dict[str, dict[str, t.Any]], root: Path) -> PipelineConfig:
    gw = resolved["gateway"]
    doc = resolved["docqa"]
    chart = resolved["chart"]
    table = resolved["table"]
    pre = resolved["preprocess"]
    mix = resolved["mix"]
    aug = resolved["augment"]
    run = resolved["run"]

    return PipelineConfig(
        gateway=GatewayConfig(
            endpoint=gw["endpoint"] or "",
            model=gw["model"] or "",
            max_retries=gw["max_retries"],
            max_inflight=gw["max_inflight"],
            mode=gw["mode"],
            replay_store=_path(root, gw["replay_store"]),
            api_key_env=gw["api_key_env"],
            timeout=gw["timeout"],
            backoff=gw["backoff"],
            temperature=gw["temperature"],
            max_output_tokens=gw["max_output_tokens"],
        ),
        docqa=DocQaConfig(
            min_pairs=doc["min_pairs"],
            banned_instruction_prefixes=doc["banned_instruction_prefixes"],
            banned_layout_words=doc["banned_layout_words"],
            strip_punctuation=doc["strip_punctuation"] or "",
            genre=doc["genre"],
            language=doc["language"],
            require_present_kind=doc["require_present_kind"],
        ),
        chart=ChartConfig(
            topics=chart["topics"],
            language=chart["language"],
            via=chart["via"],
            options=MutationOptions(
                value_scale=chart["value_scale"],
                locale=chart["locale"],
                width_range=(chart["width_min"], chart["width_max"]),
                height_range=(chart["height_min"], chart["height_max"]),
                annotate=chart["annotate"],
            ),
            task_matrix=TaskMatrix.from_mapping(chart["task_matrix"]),
            mutations_per_seed=chart["mutations_per_seed"],
        ),
        table=TableConfig(language=table["language"], min_pairs=table["min_pairs"]),
        preprocess=ResizePolicy(**pre),
        mix=MixConfig(
            target_synthetic_fraction=mix["target_synthetic_fraction"],
            sources=tuple(SourceSpec(**source) for source in mix["sources"]),
            plan=_path(root, mix["plan"]),
        ),
        augment=AugmentPolicy(**aug),
        run=RunConfig(
            seed=run["seed"],
            workers=run["workers"],
            out_dir=_path(root, run["out_dir"]) or "out",
            layouts=_path(root, run["layouts"]),
            chart_seeds=_path(root, run["chart_seeds"]),
            tables=_path(root, run["tables"]),
            group_by_image=run["group_by_image"],
        ),
        resolved=resolved,
    )


def load_config(
    path: T_PATH | None = None,
    overrides: t.Mapping[str, t.Mapping[str, t.Any]] | None = None,
    env_prefix: str | None = ENV_PREFIX,
) -> PipelineConfig:
    """
    Read, override and validate a configuration.

    :param path:
        TOML file; ``None`` uses the defaults.
    :param overrides:
        Section values applied last, e.g. from command line options.
    :param env_prefix:
        Prefix of environment overrides; ``None`` ignores the environment.
    :raises ConfigError:
        Any section or key is unknown or invalid. ``errors`` maps key
        paths such as ``docqa.min_pairs`` to messages.
    """
    root = Path(path).resolve().parent if path is not None else Path.cwd()
    config = Config(os.fspath(root))
    if path is not None:
        try:
            config.from_file(os.fspath(Path(path).resolve()), load=load_toml, text=False)
        except ValueError as ex:
            raise ConfigError({os.fspath(path): [f"not valid TOML ({ex})"]}) from ex
        except OSError as ex:
            raise ConfigError({os.fspath(path): [ex.strerror or str(ex)]}) from ex
    if env_prefix:
        config.from_prefixed_env(env_prefix)

    for section, values in (overrides or {}).items():
        target = config.setdefault(section.upper(), {})
        if not isinstance(target, dict):
            continue
        for key, value in values.items():
            if value is None:
                continue
            for existing in [k for k in target if str(k).lower() == key.lower()]:
                del target[existing]
            target[key] = value

    resolved, errors = _validate_sections(config)
    if errors:
        raise ConfigError(errors)

    try:
        pipeline_config = _build(resolved, root)
    except ValueError as ex:
        raise ConfigError({"config": [str(ex)]}) from ex

    log.debug("loaded configuration %s", pipeline_config.config_hash[:12])
    return pipeline_config
