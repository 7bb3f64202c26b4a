"""Class-frequency loss weighting.

Class imbalance (tens of thousands of negatives against a few hundred
images for the rarest incidents) is countered by scaling each sample's loss
by one minus its class's share of the dataset:

    w_k = 1 - n_k / N

so an abundant class contributes less per sample and a rare class close to
its full loss.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import torch
import torch.nn.functional as F


class WeightError(ValueError):
    pass


@dataclass(frozen=True)
class ClassFrequencyTable:
    """Accepted-image counts per label, negatives included."""

    counts: Mapping[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def from_labels(cls, labels: Sequence[str]) -> "ClassFrequencyTable":
        counts: dict[str, int] = {}
        for label in labels:
            counts[label] = counts.get(label, 0) + 1
        return cls(counts=counts)


@dataclass(frozen=True)
class ClassWeights:
    weights: Mapping[str, float]

    def as_tensor(self, class_order: Sequence[str], dtype=torch.float32) -> torch.Tensor:
        # Classes missing from the table never occur, so their weight is the
        # n_k = 0 limit, 1.
        return torch.tensor(
            [self.weights.get(c, 1.0) for c in class_order], dtype=dtype
        )


def class_weights(table: ClassFrequencyTable) -> ClassWeights:
    """w_k = 1 - n_k / N for every class in the table."""
    n = table.total
    if n <= 0:
        raise WeightError("class frequency table is empty")
    represented = [k for k, v in table.counts.items() if v > 0]
    if len(represented) <= 1:
        raise WeightError(
            "degenerate-weights: a single-class table weights every sample at 0"
        )
    return ClassWeights(weights={k: 1.0 - v / n for k, v in table.counts.items()})


def weighted_loss(
    logits: torch.Tensor, labels: torch.Tensor, weights: torch.Tensor
) -> torch.Tensor:
    """Cross-entropy scaled by the true class's weight; mean over the batch.

    ``logits``: (K,) or (B, K); ``labels``: scalar or (B,) class indices;
    ``weights``: (K,) per-class scale factors. Differentiable in logits.
    """
    if logits.dim() == 1:
        logits = logits.unsqueeze(0)
    labels = torch.atleast_1d(torch.as_tensor(labels, device=logits.device))
    if not torch.isfinite(logits).all():
        raise WeightError("non-finite logits")
    log_probs = F.log_softmax(logits, dim=-1)
    picked = log_probs.gather(1, labels.view(-1, 1)).squeeze(1)
    w = weights.to(logits.dtype)[labels]
    return (-picked * w).mean()
