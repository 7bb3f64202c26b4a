"""Compact residual CNN.

Stem conv, three residual blocks (two 3x3 convs with batch norm and an
identity/projection skip each), global average pooling, and a single
fully-connected layer to the class logits. The architecture is driven by a
serializable descriptor so a deeper network can be slotted in without
touching the training loop; the global-pool + FC head is a hard requirement
(class activation maps and embeddings both read from it).
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F


@dataclass(frozen=True)
class ModelArchitecture:
    input_size: int = 224
    stem_channels: int = 32
    block_channels: tuple[int, ...] = (32, 64, 128)
    num_classes: int = 9

    @property
    def embedding_dim(self) -> int:
        return self.block_channels[-1]

    def to_dict(self) -> dict:
        return {
            "input_size": self.input_size,
            "stem_channels": self.stem_channels,
            "block_channels": list(self.block_channels),
            "num_classes": self.num_classes,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelArchitecture":
        return cls(
            input_size=int(doc["input_size"]),
            stem_channels=int(doc["stem_channels"]),
            block_channels=tuple(int(c) for c in doc["block_channels"]),
            num_classes=int(doc["num_classes"]),
        )


class ResidualBlock(nn.Module):
    """Two 3x3 convs with batch norm; identity skip, or a 1x1 projection
    when the shape changes."""

    def __init__(self, in_channels: int, out_channels: int, stride: int = 1):
        super().__init__()
        self.conv1 = nn.Conv2d(
            in_channels, out_channels, kernel_size=3, stride=stride, padding=1, bias=False
        )
        self.bn1 = nn.BatchNorm2d(out_channels)
        self.conv2 = nn.Conv2d(
            out_channels, out_channels, kernel_size=3, stride=1, padding=1, bias=False
        )
        self.bn2 = nn.BatchNorm2d(out_channels)
        if stride != 1 or in_channels != out_channels:
            self.shortcut = nn.Sequential(
                nn.Conv2d(in_channels, out_channels, kernel_size=1, stride=stride, bias=False),
                nn.BatchNorm2d(out_channels),
            )
        else:
            self.shortcut = nn.Identity()

    def forward(self, x):
        out = F.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        out = out + self.shortcut(x)
        return F.relu(out)


class IncidentNet(nn.Module):
    def __init__(self, arch: ModelArchitecture = ModelArchitecture()):
        super().__init__()
        self.arch = arch
        self.stem = nn.Sequential(
            nn.Conv2d(3, arch.stem_channels, kernel_size=3, stride=1, padding=1, bias=False),
            nn.BatchNorm2d(arch.stem_channels),
            nn.ReLU(inplace=True),
        )
        blocks = []
        in_ch = arch.stem_channels
        for out_ch in arch.block_channels:
            blocks.append(ResidualBlock(in_ch, out_ch, stride=2))
            in_ch = out_ch
        self.blocks = nn.Sequential(*blocks)
        self.fc = nn.Linear(arch.embedding_dim, arch.num_classes)
        # Zero-initialized head: with logits starting at exactly zero, the
        # first consistent updates already rank classes instead of having to
        # fight random initial scores. Helps markedly at small learning rates.
        nn.init.zeros_(self.fc.weight)
        nn.init.zeros_(self.fc.bias)

    def forward_features(self, x: torch.Tensor) -> torch.Tensor:
        """Final conv feature maps, shape (B, C, H', W')."""
        return self.blocks(self.stem(x))

    def embed(self, x: torch.Tensor) -> torch.Tensor:
        """Global-average-pooled feature vector: the FC layer's input."""
        features = self.forward_features(x)
        return features.mean(dim=(2, 3))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.fc(self.embed(x))

    def forward_with_embedding(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        embedding = self.embed(x)
        return self.fc(embedding), embedding
