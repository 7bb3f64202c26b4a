"""Model diagnostics: class activation maps over the final conv features and
a from-scratch exact t-SNE of the pooled embeddings."""

from .cam import ActivationMap, cam, cam_from_features, render_overlay
from .tsne import (
    EmbeddingSet,
    PerplexityInfeasibleError,
    TsneConfig,
    TsneResult,
    collect_embeddings,
    conditional_affinities,
    joint_affinities,
    tsne,
)

__all__ = [
    "ActivationMap",
    "EmbeddingSet",
    "PerplexityInfeasibleError",
    "TsneConfig",
    "TsneResult",
    "cam",
    "cam_from_features",
    "collect_embeddings",
    "conditional_affinities",
    "joint_affinities",
    "render_overlay",
    "tsne",
]
