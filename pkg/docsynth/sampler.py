"""
Ratio sampling of synthetic and public training data.

Public sources are read once per epoch. Synthetic sources share one
repetition factor ``r`` chosen so that synthetic records make up the
target fraction ``p`` of the epoch in expectation::

    r * S / (P + r * S) = p   =>   r = p * P / ((1 - p) * S)

with ``S`` and ``P`` the weighted synthetic and public record totals.
The whole part of a factor becomes full permutation passes over a
source; the fractional part becomes one extra pass in which every
record is kept with that probability.
"""

import json
import logging
import math
import os
import typing as t
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

import numpy as np

from ._types import T_PATH
from .exceptions import MixPlanError

log = logging.getLogger("docsynth.sampler")

# r is snapped to exactly 1.0 this close to the natural fraction
_UNIT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SourceSpec:
    name: str
    size: int
    is_synthetic: bool
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not self.name:
            raise MixPlanError("source name must not be empty")
        if self.size < 1:
            raise MixPlanError(f"source {self.name!r}: size must be at least 1")
        if not self.weight > 0:
            raise MixPlanError(f"source {self.name!r}: weight must be positive")

    @classmethod
    def from_dict(cls, data: t.Mapping[str, t.Any]) -> "SourceSpec":
        try:
            return cls(
                name=str(data["name"]),
                size=int(data["size"]),
                is_synthetic=bool(data["is_synthetic"]),
                weight=float(data.get("weight", 1.0)),
            )
        except KeyError as ex:
            raise MixPlanError(f"source entry is missing {ex.args[0]!r}") from ex


@dataclass(frozen=True)
class MixPlan:
    """
    Sources plus the repetition factor solved for each of them.
    """

    sources: tuple[SourceSpec, ...]
    target_synthetic_fraction: float
    repetition: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        names = [s.name for s in self.sources]
        if not names:
            raise MixPlanError("a plan needs at least one source")
        if len(set(names)) != len(names):
            raise MixPlanError("source names must be unique")
        if set(self.repetition) != set(names):
            raise MixPlanError("repetition factors must cover exactly the plan's sources")
        for name, r in self.repetition.items():
            if not (r >= 0 and math.isfinite(r)):
                raise MixPlanError(f"source {name!r}: invalid repetition factor {r!r}")

    @property
    def epoch_length(self) -> int:
        """
        Expected number of draws in one epoch.
        """
        return round(sum(self.repetition[s.name] * s.size for s in self.sources))

    def source(self, name: str) -> SourceSpec:
        for spec in self.sources:
            if spec.name == name:
                return spec
        raise KeyError(name)

    def summary(self) -> dict[str, t.Any]:
        length = sum(self.repetition[s.name] * s.size for s in self.sources)
        return {
            "target_synthetic_fraction": self.target_synthetic_fraction,
            "expected_synthetic_fraction": expected_fraction(self),
            "epoch_length": self.epoch_length,
            "sources": [
                {
                    "name": s.name,
                    "size": s.size,
                    "is_synthetic": s.is_synthetic,
                    "repetition": self.repetition[s.name],
                    "expected_fraction": self.repetition[s.name] * s.size / length
                    if length
                    else 0.0,
                }
                for s in self.sources
            ],
        }

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "target_synthetic_fraction": self.target_synthetic_fraction,
            "sources": [asdict(s) for s in self.sources],
            "repetition": dict(self.repetition),
        }


def _weighted_totals(sources: t.Sequence[SourceSpec]) -> tuple[float, float]:
    synthetic = sum(s.size * s.weight for s in sources if s.is_synthetic)
    public = sum(s.size * s.weight for s in sources if not s.is_synthetic)
    return synthetic, public


def natural_fraction(sources: t.Sequence[SourceSpec]) -> float:
    """
    Synthetic share when every source is read once (weights applied).
    """
    synthetic, public = _weighted_totals(sources)
    return synthetic / (synthetic + public)


def solve_weights(
    sources: t.Sequence[SourceSpec], p: float
) -> MixPlan:
    """
    Solve the synthetic repetition factor for target fraction ``p``.

    Public sources keep their weight as factor; synthetic sources get
    ``r * weight``.

    :raises MixPlanError:
        ``p`` is not strictly between 0 and 1, or the sources lack a
        synthetic or a public member.
    """
    if not (0.0 < p < 1.0):
        raise MixPlanError(f"target synthetic fraction must be in (0, 1), got {p!r}")
    sources = tuple(sources)
    synthetic, public = _weighted_totals(sources)
    if synthetic == 0:
        raise MixPlanError("no synthetic source in the plan")
    if public == 0:
        raise MixPlanError("no public source in the plan")

    r = p * public / ((1.0 - p) * synthetic)
    if abs(r - 1.0) <= _UNIT_TOLERANCE:
        r = 1.0

    repetition = {s.name: (r * s.weight if s.is_synthetic else s.weight) for s in sources}
    plan = MixPlan(sources, p, repetition)
    log.info("solved mix for p=%.4f: synthetic repetition factor %.6f", p, r)
    return plan


def expected_fraction(plan: MixPlan) -> float:
    """
    Synthetic share of an epoch in expectation under ``plan``.
    """
    synthetic = sum(plan.repetition[s.name] * s.size for s in plan.sources if s.is_synthetic)
    total = sum(plan.repetition[s.name] * s.size for s in plan.sources)
    return synthetic / total if total else 0.0


class EpochStream:
    """
    One epoch of ``(source name, record index)`` draws in training order.
    """

    def __init__(
        self, names: t.Sequence[str], source_ids: np.ndarray, indices: np.ndarray
    ) -> None:
        self.names = tuple(names)
        self.source_ids = source_ids
        self.indices = indices

    def __len__(self) -> int:
        return int(self.indices.shape[0])

    def __iter__(self) -> t.Iterator[tuple[str, int]]:
        for source_id, index in zip(self.source_ids.tolist(), self.indices.tolist()):
            yield self.names[source_id], index

    def counts(self) -> dict[str, int]:
        per_source = np.bincount(self.source_ids, minlength=len(self.names))
        return {name: int(n) for name, n in zip(self.names, per_source)}

    def write_jsonl(self, path: T_PATH) -> int:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_name(target.name + ".tmp")
        with open(tmp, "w", encoding="utf-8", newline="\n") as fp:
            for name, index in self:
                fp.write(json.dumps({"source": name, "index": index}, ensure_ascii=False))
                fp.write("\n")
        os.replace(tmp, target)
        return len(self)


def sample_epoch(plan: MixPlan, seed: int) -> EpochStream:
    """
    Draw one epoch under ``plan``.

    Each source contributes ``floor(r)`` seeded permutations of its
    indices plus one Bernoulli pass keeping each index with probability
    ``r - floor(r)``; the union is then shuffled. No record appears more
    than ``ceil(r)`` times. The result depends only on ``plan`` and
    ``seed``.
    """
    rng = np.random.default_rng(seed)
    source_parts: list[np.ndarray] = []
    index_parts: list[np.ndarray] = []

    for source_id, spec in enumerate(plan.sources):
        r = plan.repetition[spec.name]
        whole = int(math.floor(r))
        frac = r - whole
        passes = [rng.permutation(spec.size) for _ in range(whole)]
        if frac > 0:
            passes.append(np.flatnonzero(rng.random(spec.size) < frac))
        for part in passes:
            index_parts.append(part)
            source_parts.append(np.full(part.shape[0], source_id, dtype=np.int64))

    if index_parts:
        indices = np.concatenate(index_parts).astype(np.int64)
        source_ids = np.concatenate(source_parts)
    else:
        indices = np.zeros(0, dtype=np.int64)
        source_ids = np.zeros(0, dtype=np.int64)

    order = rng.permutation(indices.shape[0])
    stream = EpochStream([s.name for s in plan.sources], source_ids[order], indices[order])
    log.debug("sampled epoch of %d draws with seed %d", len(stream), seed)
    return stream


def empirical_fractions(stream: EpochStream, plan: MixPlan) -> dict[str, float]:
    """
    Share of ``stream`` drawn from each of ``plan``'s sources.
    """
    counts = stream.counts()
    total = len(stream)
    return {s.name: (counts.get(s.name, 0) / total if total else 0.0) for s in plan.sources}


def synthetic_fraction(stream: EpochStream, plan: MixPlan) -> float:
    fractions = empirical_fractions(stream, plan)
    return sum(fractions[s.name] for s in plan.sources if s.is_synthetic)


def load_plan(path: T_PATH) -> MixPlan:
    """
    Read a plan file.

    A file with ``repetition`` factors is taken as solved and checked;
    a file with only sources and a target is solved on load.

    :raises MixPlanError:
        The file is malformed or its factors do not reach the target.
    """
    try:
        with open(path, encoding="utf-8") as fp:
            data = json.load(fp)
    except json.JSONDecodeError as ex:
        raise MixPlanError(f"{path}: not valid JSON ({ex.msg})") from ex

    if not isinstance(data, dict) or not isinstance(data.get("sources"), list):
        raise MixPlanError(f"{path}: expected an object with a 'sources' list")
    sources = tuple(SourceSpec.from_dict(entry) for entry in data["sources"])
    p = float(data.get("target_synthetic_fraction", 0.0))

    if "repetition" not in data:
        return solve_weights(sources, p)

    plan = MixPlan(sources, p, {k: float(v) for k, v in data["repetition"].items()})
    has_both = any(s.is_synthetic for s in sources) and any(
        not s.is_synthetic for s in sources
    )
    if has_both and abs(expected_fraction(plan) - p) > 1e-9:
        raise MixPlanError(
            f"{path}: repetition factors give a synthetic fraction of "
            f"{expected_fraction(plan):.6f}, not {p}"
        )
    return plan


def save_plan(plan: MixPlan, path: T_PATH) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(plan.to_dict(), indent=2) + "\n", encoding="utf-8")
