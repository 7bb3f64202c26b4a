"""Class activation mapping.

For a network ending in global average pooling plus one fully-connected
layer, the evidence the FC layer sees for class k at spatial position (x, y)
is the FC-weight-weighted sum over channels of the final conv features. The
raw weighted sum is linear in the FC weights; the rendered map is the raw
map ReLU-clamped, bilinearly upsampled to the input resolution and min-max
normalized to [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from ..trainer.train import Checkpoint


class CamError(ValueError):
    pass


@dataclass(frozen=True)
class ActivationMap:
    values: np.ndarray  # (H, W) in [0, 1], aligned to the input image
    class_id: str


def cam_from_features(features: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Raw linear map: sum_ch weights[ch] * features[ch, :, :].

    No clamping or normalization here, so the result is exactly linear in
    ``weights``.
    """
    features = np.asarray(features, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if features.ndim != 3 or weights.ndim != 1 or features.shape[0] != weights.shape[0]:
        raise CamError(
            f"need (C,H,W) features and (C,) weights, got {features.shape} and {weights.shape}"
        )
    return np.tensordot(weights, features, axes=1)


def bilinear_resize(values: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear upsample of a 2-D map, corners mapped to corners."""
    h, w = values.shape
    if (h, w) == (out_h, out_w):
        return values.astype(np.float64)
    ys = np.linspace(0, h - 1, out_h)
    xs = np.linspace(0, w - 1, out_w)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    v = values.astype(np.float64)
    top = v[np.ix_(y0, x0)] * (1 - fx) + v[np.ix_(y0, x1)] * fx
    bottom = v[np.ix_(y1, x0)] * (1 - fx) + v[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bottom * fy


def cam(checkpoint: Checkpoint, image: np.ndarray, class_id: str) -> ActivationMap:
    """Activation map for one class over one preprocessed HxWx3 image."""
    if class_id not in checkpoint.class_order:
        raise CamError(f"unknown class {class_id!r}")
    model = checkpoint.model()
    if not hasattr(model, "forward_features") or not hasattr(model, "fc"):
        raise CamError("model lacks the global-pool + FC head this map requires")
    with torch.no_grad():
        x = torch.as_tensor(
            np.transpose(image, (2, 0, 1))[None], dtype=torch.float32
        )
        features = model.forward_features(x)[0].numpy()
        weights = model.fc.weight[checkpoint.class_order.index(class_id)].numpy()
    raw = cam_from_features(features, weights)
    clamped = np.maximum(raw, 0.0)
    upsampled = bilinear_resize(clamped, image.shape[0], image.shape[1])
    peak = upsampled.max()
    lo = upsampled.min()
    if peak - lo > 0:
        normalized = (upsampled - lo) / (peak - lo)
    else:
        normalized = np.zeros_like(upsampled)
    return ActivationMap(values=normalized, class_id=class_id)


# Blue -> cyan -> yellow -> red ramp; enough for an overlay without pulling
# in a plotting stack.
_RAMP = np.array(
    [[0.0, 0.0, 0.5], [0.0, 0.8, 1.0], [1.0, 1.0, 0.0], [1.0, 0.0, 0.0]]
)


def render_overlay(image: np.ndarray, activation: ActivationMap, alpha: float = 0.5) -> np.ndarray:
    """Blend a heat colormap of the map onto the image; returns uint8 RGB."""
    base = image.astype(np.float64)
    if base.max() > 1.0:
        base = base / 255.0
    t = activation.values * (len(_RAMP) - 1)
    idx = np.clip(np.floor(t).astype(int), 0, len(_RAMP) - 2)
    frac = (t - idx)[..., None]
    heat = _RAMP[idx] * (1 - frac) + _RAMP[idx + 1] * frac
    blended = np.clip(base * (1 - alpha) + heat * alpha, 0.0, 1.0)
    return (blended * 255).round().astype(np.uint8)
