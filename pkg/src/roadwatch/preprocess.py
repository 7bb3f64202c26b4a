"""Deterministic image preparation.

Covers the ego-vehicle crop applied to dashcam-style sources, model-input
resizing, training-set normalization statistics, and the stochastic training
augmentations. Images move through this module as HxWx3 arrays: uint8 for
storage-facing steps, float64 in [0, 1] for numeric steps.

Crop rounding is pinned down so outputs are bit-exact across
implementations: with the default rule the output keeps rows
0 .. floor(0.75*H)-1 and columns floor(0.125*W) .. floor(0.125*W) +
floor(0.75*W) - 1, i.e. both output sides are floored at 75% of the input,
which preserves the aspect ratio to within one pixel's rounding.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image
from scipy import ndimage


class PreprocessError(ValueError):
    pass


@dataclass(frozen=True)
class CropRule:
    """Remove the bottom slice (ego-vehicle bonnet/dashboard) and matching
    side slices so the aspect ratio survives."""

    bottom_fraction: float = 0.25
    side_fraction: float = 0.125

    def __post_init__(self):
        if not (0 <= self.bottom_fraction < 1 and 0 <= self.side_fraction < 0.5):
            raise PreprocessError(f"degenerate crop fractions {self}")


def crop_ego(image: np.ndarray, rule: CropRule = CropRule()) -> np.ndarray:
    """Crop the ego-vehicle band off the bottom plus both side margins.

    E.g. 1280x720 -> 960x540 (rows 0..539, columns 160..1119).
    """
    h, w = image.shape[:2]
    if h < 4 or w < 8:
        raise PreprocessError(f"image too small to crop: {w}x{h}")
    out_h = math.floor((1.0 - rule.bottom_fraction) * h)
    out_w = math.floor((1.0 - 2.0 * rule.side_fraction) * w)
    left = math.floor(rule.side_fraction * w)
    if out_h < 1 or out_w < 1:
        raise PreprocessError(f"crop leaves nothing of {w}x{h}")
    return image[:out_h, left : left + out_w]


def resize_to_model(image: np.ndarray, size: int = 224) -> np.ndarray:
    """Bilinear resize to a square model input; identity when already sized."""
    h, w = image.shape[:2]
    if (h, w) == (size, size):
        return image.copy()
    if image.dtype == np.uint8:
        pil = Image.fromarray(image)
        return np.asarray(pil.resize((size, size), Image.Resampling.BILINEAR))
    # Float path: round-trip through uint8 would lose precision; use ndimage.
    zoom = (size / h, size / w) + (1,) * (image.ndim - 2)
    return ndimage.zoom(image, zoom, order=1, mode="nearest", grid_mode=True)


def to_float01(image: np.ndarray) -> np.ndarray:
    if image.dtype == np.uint8:
        return image.astype(np.float64) / 255.0
    return image.astype(np.float64)


@dataclass(frozen=True)
class NormStats:
    """Per-channel mean/std of the training split, in [0,1] intensity units."""

    mean: tuple[float, float, float]
    std: tuple[float, float, float]

    def __post_init__(self):
        if any(s <= 0 for s in self.std):
            raise PreprocessError("zero-variance: channel std must be positive")

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps({"mean": self.mean, "std": self.std}, indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "NormStats":
        doc = json.loads(Path(path).read_text())
        return cls(mean=tuple(doc["mean"]), std=tuple(doc["std"]))


def compute_norm_stats(images: Iterable[np.ndarray]) -> NormStats:
    """Population mean/std per channel over every pixel of every image.

    Accumulates in float64. Images should already be cropped/resized; both
    uint8 and float [0,1] inputs are accepted.
    """
    count = 0
    total = np.zeros(3, dtype=np.float64)
    total_sq = np.zeros(3, dtype=np.float64)
    for image in images:
        x = to_float01(image).reshape(-1, 3)
        count += x.shape[0]
        total += x.sum(axis=0)
        total_sq += (x * x).sum(axis=0)
    if count == 0:
        raise PreprocessError("empty training split")
    mean = total / count
    var = total_sq / count - mean * mean
    var = np.maximum(var, 0.0)
    if np.any(var < 1e-24):
        raise PreprocessError("zero-variance: at least one channel is constant")
    std = np.sqrt(var)
    return NormStats(mean=tuple(mean.tolist()), std=tuple(std.tolist()))


def normalize(image: np.ndarray, stats: NormStats) -> np.ndarray:
    x = to_float01(image)
    return (x - np.asarray(stats.mean)) / np.asarray(stats.std)


# -- augmentation -------------------------------------------------------------


@dataclass(frozen=True)
class AugmentPolicy:
    """Each augmentation fires independently with its own probability."""

    flip_p: float = 0.5
    grayscale_p: float = 0.5
    rotation_p: float = 0.5
    rotation_max_deg: float = 5.0
    jitter_p: float = 0.5
    jitter_factor: float = 0.05


_LUMA = np.array([0.299, 0.587, 0.114])


def _to_grayscale(image: np.ndarray) -> np.ndarray:
    gray = image @ _LUMA
    return np.repeat(gray[..., None], 3, axis=-1)


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    v = maxc
    delta = maxc - minc
    s = np.where(maxc > 0, delta / np.where(maxc == 0, 1.0, maxc), 0.0)
    safe = np.where(delta == 0, 1.0, delta)
    rc = (maxc - r) / safe
    gc = (maxc - g) / safe
    bc = (maxc - b) / safe
    h = np.where(maxc == r, bc - gc, np.where(maxc == g, 2.0 + rc - bc, 4.0 + gc - rc))
    h = np.where(delta == 0, 0.0, (h / 6.0) % 1.0)
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    i = i.astype(int) % 6
    conds = [i == k for k in range(6)]
    r = np.select(conds, [v, q, p, p, t, v])
    g = np.select(conds, [t, v, v, q, p, p])
    b = np.select(conds, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def augment(image: np.ndarray, policy: AugmentPolicy, rng: np.random.Generator) -> np.ndarray:
    """Apply the stochastic training augmentations.

    All random draws happen unconditionally so the generator stream advances
    identically whether or not each augmentation fires; a fixed rng state
    therefore reproduces the output bit-for-bit.
    """
    x = to_float01(image)
    gates = rng.random(4)
    angle = rng.uniform(-policy.rotation_max_deg, policy.rotation_max_deg)
    f = policy.jitter_factor
    hue_shift = rng.uniform(-f, f)
    brightness, contrast, saturation = rng.uniform(1.0 - f, 1.0 + f, size=3)

    if gates[0] < policy.flip_p:
        x = x[:, ::-1]
    if gates[1] < policy.grayscale_p:
        x = _to_grayscale(x)
    if gates[2] < policy.rotation_p:
        x = ndimage.rotate(x, angle, axes=(1, 0), reshape=False, order=1, mode="nearest")
        x = np.clip(x, 0.0, 1.0)
    if gates[3] < policy.jitter_p:
        hsv = rgb_to_hsv(np.clip(x, 0.0, 1.0))
        hsv[..., 0] = (hsv[..., 0] + hue_shift) % 1.0
        x = hsv_to_rgb(hsv)
        x = np.clip(x * brightness, 0.0, 1.0)
        mean = x.mean()
        x = np.clip((x - mean) * contrast + mean, 0.0, 1.0)
        gray = _to_grayscale(x)
        x = np.clip(gray + (x - gray) * saturation, 0.0, 1.0)
    return np.ascontiguousarray(x)


def decode_bytes(image_bytes: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(image_bytes)) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def prepare_for_model(
    image: np.ndarray | bytes,
    crop: bool = False,
    size: int = 224,
    stats: NormStats | None = None,
) -> np.ndarray:
    """The deterministic eval-time pipeline: decode, crop if flagged, resize,
    scale to [0,1], and normalize when stats are given."""
    if isinstance(image, (bytes, bytearray)):
        image = decode_bytes(bytes(image))
    if crop:
        image = crop_ego(image)
    image = resize_to_model(image, size=size)
    x = to_float01(image)
    if stats is not None:
        x = (x - np.asarray(stats.mean)) / np.asarray(stats.std)
    return x
