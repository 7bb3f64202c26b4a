"""The training loop and checkpointing.

The regime: batch size 10, RMSprop (no momentum) at an initial learning rate
of 1e-4 decayed by a fixed factor at epochs 10/30/40, L2 strength 1e-4,
per-batch stochastic augmentation, and class-frequency loss weighting. The
best checkpoint is kept by validation loss (or accuracy, configurable).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from ..preprocess import AugmentPolicy, NormStats, augment
from ..taxonomy import DEFAULT_CLASS_ORDER
from .model import IncidentNet, ModelArchitecture
from .rmsprop import RMSPropNoMomentum
from .weights import ClassFrequencyTable, ClassWeights, class_weights, weighted_loss


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    batch_size: int = 10
    initial_lr: float = 1e-4
    lr_decay_epochs: tuple[int, ...] = (10, 30, 40)
    lr_decay_factor: float = 0.1
    l2_strength: float = 1e-4
    rho: float = 0.9
    eps: float = 1e-8
    max_epochs: int = 50
    best_criterion: str = "val_loss"  # "val_loss" | "val_accuracy"
    seed: int = 0
    deterministic: bool = True
    augment: bool = True
    augment_policy: AugmentPolicy = field(default_factory=AugmentPolicy)

    def __post_init__(self):
        if self.batch_size <= 0 or self.initial_lr <= 0 or self.max_epochs <= 0:
            raise ValueError("batch_size, initial_lr and max_epochs must be positive")
        if self.l2_strength < 0 or self.lr_decay_factor <= 0:
            raise ValueError("l2_strength must be >= 0 and lr_decay_factor > 0")
        if self.best_criterion not in ("val_loss", "val_accuracy"):
            raise ValueError(f"unknown best criterion {self.best_criterion!r}")


def lr_at_epoch(config: TrainConfig, epoch: int) -> float:
    """Step-decayed learning rate for a 1-indexed epoch."""
    decays = sum(1 for d in config.lr_decay_epochs if epoch >= d)
    return config.initial_lr * config.lr_decay_factor**decays


@dataclass
class Checkpoint:
    architecture: ModelArchitecture
    class_order: tuple[str, ...]
    model_state: dict
    optimizer_state: dict
    epoch: int
    best_epoch: int
    curves: dict[str, list[float]]
    norm_stats: NormStats | None = None
    _model: IncidentNet | None = field(default=None, repr=False, compare=False)

    def model(self) -> IncidentNet:
        if self._model is None:
            net = IncidentNet(self.architecture)
            net.load_state_dict(self.model_state)
            net.eval()
            self._model = net
        return self._model

    def save(self, path: str | Path) -> None:
        payload = {
            "architecture": self.architecture.to_dict(),
            "class_order": list(self.class_order),
            "model_state": self.model_state,
            "optimizer_state": self.optimizer_state,
            "epoch": self.epoch,
            "best_epoch": self.best_epoch,
            "curves": self.curves,
            "norm_stats": (
                {"mean": list(self.norm_stats.mean), "std": list(self.norm_stats.std)}
                if self.norm_stats
                else None
            ),
        }
        torch.save(payload, str(path))

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        payload = torch.load(str(path), weights_only=True)
        stats = payload.get("norm_stats")
        return cls(
            architecture=ModelArchitecture.from_dict(payload["architecture"]),
            class_order=tuple(payload["class_order"]),
            model_state=payload["model_state"],
            optimizer_state=payload["optimizer_state"],
            epoch=payload["epoch"],
            best_epoch=payload["best_epoch"],
            curves=payload["curves"],
            norm_stats=NormStats(mean=tuple(stats["mean"]), std=tuple(stats["std"]))
            if stats
            else None,
        )


@dataclass
class PredictResult:
    class_id: str
    probabilities: np.ndarray
    embedding: np.ndarray


def _to_batch(images: Sequence[np.ndarray], dtype=torch.float32) -> torch.Tensor:
    stacked = np.stack([np.transpose(img, (2, 0, 1)) for img in images])
    return torch.as_tensor(stacked, dtype=dtype)


def _normalize(img: np.ndarray, stats: NormStats | None) -> np.ndarray:
    if stats is None:
        return img
    return (img - np.asarray(stats.mean)) / np.asarray(stats.std)


@torch.no_grad()
def _evaluate(model, data, weights_t, stats, batch_size=64) -> tuple[float, float]:
    """Mean weighted loss and accuracy over a dataset, eval mode."""
    model.eval()
    losses, correct, total = [], 0, 0
    for start in range(0, len(data), batch_size):
        chunk = [data[i] for i in range(start, min(start + batch_size, len(data)))]
        images = _to_batch([_normalize(img, stats) for img, _ in chunk])
        labels = torch.tensor([label for _, label in chunk], dtype=torch.long)
        logits = model(images)
        losses.append(float(weighted_loss(logits, labels, weights_t)) * len(chunk))
        correct += int((logits.argmax(dim=1) == labels).sum())
        total += len(chunk)
    return sum(losses) / total, correct / total


def train(
    config: TrainConfig,
    train_data: Sequence[tuple[np.ndarray, int]],
    val_data: Sequence[tuple[np.ndarray, int]] | None = None,
    class_order: Sequence[str] = DEFAULT_CLASS_ORDER,
    architecture: ModelArchitecture | None = None,
    counts: ClassFrequencyTable | None = None,
    norm_stats: NormStats | None = None,
) -> Checkpoint:
    """Train on (image, label-index) pairs; images are HxWx3 floats in [0,1].

    Loss weights come from the training-split label counts unless an explicit
    frequency table is passed. Deterministic mode pins torch to one thread
    and seeds every source of randomness, making reruns bit-reproducible.
    """
    if len(train_data) == 0:
        raise TrainingError("empty training split")
    if val_data is None or len(val_data) == 0:
        val_data = train_data

    if config.deterministic:
        torch.set_num_threads(1)
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)

    class_order = tuple(class_order)
    if counts is None:
        counts = ClassFrequencyTable.from_labels(
            [class_order[label] for _, label in train_data]
        )
    weights: ClassWeights = class_weights(counts)
    weights_t = weights.as_tensor(class_order)

    sample_h = train_data[0][0].shape[0]
    arch = architecture or ModelArchitecture(input_size=sample_h)
    model = IncidentNet(arch)
    optimizer = RMSPropNoMomentum(
        model.parameters(), lr=config.initial_lr, rho=config.rho, eps=config.eps,
        l2=config.l2_strength,
    )

    curves: dict[str, list[float]] = {
        "train_loss": [], "val_loss": [], "train_accuracy": [], "val_accuracy": [],
    }
    best_metric = None
    best_state = None
    best_epoch = 0

    n = len(train_data)
    for epoch in range(1, config.max_epochs + 1):
        lr = lr_at_epoch(config, epoch)
        for group in optimizer.param_groups:
            group["lr"] = lr

        model.train()
        order = rng.permutation(n)
        epoch_loss, seen = 0.0, 0
        for start in range(0, n, config.batch_size):
            batch_idx = order[start : start + config.batch_size]
            images, labels = [], []
            for i in batch_idx:
                img, label = train_data[int(i)]
                if config.augment:
                    img = augment(img, config.augment_policy, rng)
                images.append(_normalize(img, norm_stats))
                labels.append(label)
            x = _to_batch(images)
            y = torch.tensor(labels, dtype=torch.long)
            optimizer.zero_grad()
            loss = weighted_loss(model(x), y, weights_t)
            if not torch.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch} (lr={lr}); aborting"
                )
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(batch_idx)
            seen += len(batch_idx)

        train_loss, train_acc = _evaluate(model, train_data, weights_t, norm_stats)
        val_loss, val_acc = _evaluate(model, val_data, weights_t, norm_stats)
        curves["train_loss"].append(train_loss)
        curves["val_loss"].append(val_loss)
        curves["train_accuracy"].append(train_acc)
        curves["val_accuracy"].append(val_acc)

        metric = val_loss if config.best_criterion == "val_loss" else -val_acc
        if best_metric is None or metric < best_metric:
            best_metric = metric
            best_epoch = epoch
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}

    return Checkpoint(
        architecture=arch,
        class_order=class_order,
        model_state=best_state,
        optimizer_state=optimizer.state_dict(),
        epoch=config.max_epochs,
        best_epoch=best_epoch,
        curves=curves,
        norm_stats=norm_stats,
    )


def predict(checkpoint: Checkpoint, image: np.ndarray) -> PredictResult:
    """Classify one preprocessed HxWx3 image.

    Returns the argmax class, the full softmax probability vector (ordered by
    the checkpoint's class order) and the pooled embedding the FC layer saw.
    """
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected HxWx3 image, got shape {image.shape}")
    model = checkpoint.model()
    with torch.no_grad():
        x = _to_batch([image])
        logits, embedding = model.forward_with_embedding(x)
        probs = torch.softmax(logits[0], dim=0).numpy()
    return PredictResult(
        class_id=checkpoint.class_order[int(probs.argmax())],
        probabilities=probs,
        embedding=embedding[0].numpy(),
    )
