"""
Patch-aligned image geometry.

Images are cut into square patches of ``patch_px`` pixels, one visual
token each. Training images are scaled so their longest side stays under
a threshold drawn per image; inference images of conventional resolution
are upscaled by a factor drawn per image. Only sizes are computed here,
no pixels are touched.
"""

import math
from dataclasses import dataclass

import numpy as np

from .consts import INFER_UPSCALE_MAX
from .consts import INFER_UPSCALE_MIN
from .consts import LOW_RES_CUTOFF
from .consts import PATCH_PX
from .consts import TRAIN_THRESHOLD_MAX
from .consts import TRAIN_THRESHOLD_MIN
from .exceptions import PolicyError

TRAIN = "train"
INFER = "infer"
MODES = (TRAIN, INFER)

CONVENTIONAL = "conventional"
LOW = "low"


@dataclass(frozen=True)
class ResizePolicy:
    patch_px: int = PATCH_PX
    train_threshold_min: int = TRAIN_THRESHOLD_MIN
    train_threshold_max: int = TRAIN_THRESHOLD_MAX
    infer_upscale_min: float = INFER_UPSCALE_MIN
    infer_upscale_max: float = INFER_UPSCALE_MAX
    low_res_cutoff: int = LOW_RES_CUTOFF
    max_tokens: int | None = None

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.patch_px <= 0:
            raise PolicyError("patch_px must be positive")
        if self.train_threshold_min <= 0 or self.train_threshold_max <= 0:
            raise PolicyError("train thresholds must be positive")
        if self.train_threshold_min > self.train_threshold_max:
            raise PolicyError("train_threshold_min must not exceed train_threshold_max")
        if self.infer_upscale_min <= 0 or self.infer_upscale_min > self.infer_upscale_max:
            raise PolicyError("infer upscale range must be positive and ordered")
        if self.low_res_cutoff <= 0:
            raise PolicyError("low_res_cutoff must be positive")
        if self.max_tokens is not None and self.max_tokens < 1:
            raise PolicyError("max_tokens must be at least 1")


def _check_size(w: float, h: float) -> None:
    if w < 1 or h < 1:
        raise PolicyError(f"image size must be at least 1x1, got {w}x{h}")


def align(value: float, patch: int = PATCH_PX) -> int:
    """
    Nearest multiple of ``patch`` (halves round up), at least one patch.
    """
    return max(patch, int(math.floor(value / patch + 0.5)) * patch)


def _align_below(value: float, limit: float, patch: int) -> int:
    aligned = align(value, patch)
    if aligned > limit:
        aligned = max(patch, int(math.floor(value / patch)) * patch)
    return aligned


def resize_to_threshold(
    w: int, h: int, threshold: float, policy: ResizePolicy | None = None
) -> tuple[int, int]:
    """
    Shrink so the longest side is at most ``threshold``, then align both
    sides to the patch grid without going over the threshold.
    """
    policy = policy or ResizePolicy()
    _check_size(w, h)
    scale = min(1.0, threshold / max(w, h))
    patch = policy.patch_px
    limit = max(threshold, patch)
    return _align_below(w * scale, limit, patch), _align_below(h * scale, limit, patch)


def scale_and_align(
    w: int, h: int, factor: float, policy: ResizePolicy | None = None
) -> tuple[int, int]:
    policy = policy or ResizePolicy()
    _check_size(w, h)
    return align(w * factor, policy.patch_px), align(h * factor, policy.patch_px)


def token_count(w2: int, h2: int, policy: ResizePolicy | None = None) -> int:
    """
    :raises PolicyError:
        A side is not a positive multiple of the patch size.
    """
    patch = (policy or ResizePolicy()).patch_px
    if w2 < patch or h2 < patch or w2 % patch or h2 % patch:
        raise PolicyError(f"{w2}x{h2} is not aligned to {patch}px patches")
    return (w2 // patch) * (h2 // patch)


def classify_resolution(w: int, h: int, policy: ResizePolicy | None = None) -> str:
    policy = policy or ResizePolicy()
    _check_size(w, h)
    return LOW if max(w, h) < policy.low_res_cutoff else CONVENTIONAL


def _cap_tokens(w: int, h: int, w2: int, h2: int, policy: ResizePolicy) -> tuple[int, int]:
    cap = policy.max_tokens
    if cap is None:
        return w2, h2
    patch = policy.patch_px
    scale = min(w2 / w, h2 / h)
    while token_count(w2, h2, policy) > cap:
        scale *= min(math.sqrt(cap / token_count(w2, h2, policy)), 0.99)
        w2 = max(patch, int(math.floor(w * scale / patch)) * patch)
        h2 = max(patch, int(math.floor(h * scale / patch)) * patch)
    return w2, h2


def smart_resize(
    w: int,
    h: int,
    policy: ResizePolicy | None = None,
    mode: str = TRAIN,
    rng_seed: int = 0,
) -> tuple[int, int]:
    """
    Patch-aligned target size of a ``w`` x ``h`` image.

    ``train``: a threshold is drawn from the train range and the image is
    fitted under it. ``infer``: conventional-resolution images are scaled
    by a factor drawn from the upscale range; low-resolution images are
    only aligned. With ``max_tokens`` set, the result is shrunk further
    until it fits.
    """
    policy = policy or ResizePolicy()
    _check_size(w, h)
    if mode not in MODES:
        raise PolicyError(f"unknown resize mode {mode!r}")

    rng = np.random.default_rng(rng_seed)
    if mode == TRAIN:
        threshold = int(rng.integers(policy.train_threshold_min, policy.train_threshold_max + 1))
        w2, h2 = resize_to_threshold(w, h, threshold, policy)
    elif classify_resolution(w, h, policy) == CONVENTIONAL:
        factor = float(rng.uniform(policy.infer_upscale_min, policy.infer_upscale_max))
        w2, h2 = scale_and_align(w, h, factor, policy)
    else:
        w2, h2 = scale_and_align(w, h, 1.0, policy)

    return _cap_tokens(w, h, w2, h2, policy)
