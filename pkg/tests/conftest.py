"""Shared test fixtures: synthetic images and manifest factories."""

from __future__ import annotations

import io

import numpy as np
import pytest
from PIL import Image

from roadwatch.manifest import Geotag, ImageRecord, Manifest


def encode_png(arr: np.ndarray, compress_level: int = 6) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG", compress_level=compress_level)
    return buf.getvalue()


def textured_image(seed: int, size: int = 120) -> np.ndarray:
    """Natural-ish uint8 RGB test image: smooth gradients plus soft blobs."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size] / size
    img = np.zeros((size, size, 3))
    for c in range(3):
        img[..., c] = (
            0.5
            + 0.3 * np.sin(2 * np.pi * (rng.uniform(0.5, 2) * x + rng.uniform()))
            + 0.3 * np.cos(2 * np.pi * (rng.uniform(0.5, 2) * y + rng.uniform()))
        )
        for _ in range(6):
            cx, cy, r = rng.uniform(0, 1, 3)
            img[..., c] += 0.4 * rng.choice([-1, 1]) * np.exp(
                -(((x - cx) ** 2 + (y - cy) ** 2)) / (0.02 + 0.08 * r)
            )
    img = (img - img.min()) / (img.max() - img.min())
    return (img * 255).astype(np.uint8)


def pattern_image(kind: str, size: int, rng: np.random.Generator) -> np.ndarray:
    """Float [0,1] image from a family separable under the augmentation set:
    patterns and levels survive flips, small rotations, grayscaling and 5%
    jitter."""
    y, x = np.mgrid[0:size, 0:size]
    if kind == "hstripes":
        base = ((y // 4) % 2).astype(float)
    elif kind == "vstripes":
        base = ((x // 4) % 2).astype(float)
    elif kind == "checker":
        base = (((x // 4) + (y // 4)) % 2).astype(float)
    elif kind == "bright":
        base = np.full((size, size), 0.9)
    elif kind == "dark":
        base = np.full((size, size), 0.1)
    else:
        raise ValueError(kind)
    img = np.repeat(base[..., None], 3, axis=-1)
    if kind in ("hstripes", "vstripes", "checker"):
        img = 0.15 + 0.7 * img
    img = img + rng.normal(0, 0.01, size=img.shape)
    return np.clip(img, 0, 1)


PATTERN_KINDS = ("hstripes", "vstripes", "checker", "bright", "dark")


def pattern_dataset(n_per_class: int = 10, size: int = 32, seed: int = 7):
    rng = np.random.default_rng(seed)
    data = []
    for c, kind in enumerate(PATTERN_KINDS):
        for _ in range(n_per_class):
            data.append((pattern_image(kind, size, rng), c))
    return data


def make_record(
    record_id: str,
    label: str = "snow",
    provider: str = "google",
    language: str | None = "en",
    status: str = "pending",
    checksum: str | None = None,
    rank: int | None = 1,
    region: str | None = None,
    lat: float | None = None,
    lon: float | None = None,
    split: str | None = None,
    crop_flag: bool = False,
) -> ImageRecord:
    geotag = None
    if region is not None or lat is not None:
        geotag = Geotag(
            lat=lat if lat is not None else 52.0,
            lon=lon if lon is not None else -1.5,
            region=region,
        )
    return ImageRecord(
        id=record_id,
        blob_checksum=checksum or f"sum-{record_id}",
        provider=provider,
        label=label,
        query_text="road snow" if language else None,
        query_language=language,
        rank=rank,
        curation_status=status,
        geotag=geotag,
        split=split,
        crop_flag=crop_flag,
    )


@pytest.fixture
def manifest(tmp_path):
    with Manifest(tmp_path / "m.db") as m:
        yield m


@pytest.fixture
def memory_manifest():
    with Manifest(":memory:") as m:
        yield m
