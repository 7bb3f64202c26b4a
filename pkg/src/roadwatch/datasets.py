"""Bridging the manifest/blob store to in-memory training data."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .harvest.store import BlobStore
from .manifest.store import Manifest
from .preprocess import crop_ego, decode_bytes, resize_to_model, to_float01
from .taxonomy import DEFAULT_CLASS_ORDER


def load_split_data(
    manifest: Manifest,
    store: BlobStore,
    split: str,
    class_order: Sequence[str] = DEFAULT_CLASS_ORDER,
    size: int = 224,
) -> list[tuple[np.ndarray, int]]:
    """Materialize one split as (float01 image, label index) pairs.

    Ego-crop is applied where flagged; images land at the model input size,
    un-normalized (the training loop owns normalization so augmentation can
    run in [0, 1]). Records with missing blobs are skipped.
    """
    index = {c: i for i, c in enumerate(class_order)}
    data: list[tuple[np.ndarray, int]] = []
    for rec in manifest.records(status="accepted", split=split):
        if rec.label not in index:
            continue
        try:
            raw = store.read(rec.blob_checksum)
        except KeyError:
            continue
        image = decode_bytes(raw)
        if rec.crop_flag:
            image = crop_ego(image)
        image = resize_to_model(image, size=size)
        data.append((to_float01(image), index[rec.label]))
    return data


def split_images(
    manifest: Manifest,
    store: BlobStore,
    split: str,
    size: int = 224,
):
    """Yield cropped+resized uint8 images for one split (for stats passes)."""
    for rec in manifest.records(status="accepted", split=split):
        try:
            raw = store.read(rec.blob_checksum)
        except KeyError:
            continue
        image = decode_bytes(raw)
        if rec.crop_flag:
            image = crop_ego(image)
        yield resize_to_model(image, size=size)
