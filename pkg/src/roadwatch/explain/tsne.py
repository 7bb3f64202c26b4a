"""Exact t-SNE.

Dense O(N^2) implementation: per-point Gaussian bandwidths calibrated by
bisection so every conditional distribution's entropy hits
log2(perplexity), symmetrized joint affinities, and gradient descent with
early exaggeration, momentum and per-dimension gain adaptation on the
Student-t low-dimensional kernel. Exact rather than tree-approximated: the
embedding sets this tool sees are a few thousand points at most, and the
dense gradient is easy to verify.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class PerplexityInfeasibleError(ValueError):
    pass


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 50.0
    learning_rate: float = 500.0
    iterations: int = 1000
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    initial_momentum: float = 0.5
    final_momentum: float = 0.8
    momentum_switch_iter: int = 250
    min_gain: float = 0.01
    entropy_tol_bits: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if self.iterations <= 0:
            raise ValueError("iterations must be positive")
        if self.perplexity <= 1:
            raise ValueError("perplexity must exceed 1")


@dataclass
class EmbeddingSet:
    """Pooled feature vectors plus their labels, one row per image."""

    vectors: np.ndarray  # (N, D)
    true_labels: tuple[str, ...] = ()
    predicted_labels: tuple[str, ...] = ()
    ids: tuple[str, ...] = ()

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.vectors.shape[0] < 2:
            raise ValueError("need an (N, D) matrix with N >= 2")
        if not np.isfinite(self.vectors).all():
            raise ValueError("non-finite embedding values")

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass
class TsneResult:
    coords: np.ndarray  # (N, 2)
    kl_history: list[float] = field(default_factory=list)
    row_entropies_bits: np.ndarray | None = None


def _squared_distances(x: np.ndarray) -> np.ndarray:
    sq = (x * x).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def _row_entropy_bits(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def _calibrate_row(d2_row: np.ndarray, i: int, target_bits: float, tol: float) -> tuple[np.ndarray, float, float]:
    """Bisection on the precision beta until the conditional entropy matches."""
    d2 = d2_row.copy()
    d2[i] = np.inf
    # Shifting distances by their minimum rescales all kernels uniformly,
    # leaving the conditionals (and entropy) unchanged while avoiding underflow.
    shift = d2.min()
    beta, beta_lo, beta_hi = 1.0, 0.0, np.inf
    p = np.zeros_like(d2)
    entropy = 0.0
    for _ in range(256):
        p = np.exp(-(d2 - shift) * beta)
        p[i] = 0.0
        total = p.sum()
        p = p / total
        entropy = _row_entropy_bits(p)
        if abs(entropy - target_bits) <= tol:
            break
        if entropy > target_bits:
            beta_lo = beta
            beta = beta * 2.0 if np.isinf(beta_hi) else 0.5 * (beta_lo + beta_hi)
        else:
            beta_hi = beta
            beta = beta / 2.0 if beta_lo == 0.0 else 0.5 * (beta_lo + beta_hi)
    return p, beta, entropy


def conditional_affinities(
    vectors: np.ndarray, perplexity: float, tol_bits: float = 1e-5
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-row calibrated conditionals p(j|i).

    Returns (P_cond, betas, row entropies in bits); each row's entropy is
    within ``tol_bits`` of log2(perplexity).
    """
    n = vectors.shape[0]
    d2 = _squared_distances(vectors)
    target = np.log2(perplexity)
    p_cond = np.zeros((n, n))
    betas = np.zeros(n)
    entropies = np.zeros(n)
    for i in range(n):
        p_cond[i], betas[i], entropies[i] = _calibrate_row(d2[i], i, target, tol_bits)
    return p_cond, betas, entropies


def joint_affinities(p_cond: np.ndarray) -> np.ndarray:
    """Symmetrized joint distribution: sums to 1, zero diagonal."""
    n = p_cond.shape[0]
    return (p_cond + p_cond.T) / (2.0 * n)


def _kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    p_safe = np.maximum(p, 1e-12)
    q_safe = np.maximum(q, 1e-12)
    mask = p > 0
    return float((p[mask] * (np.log(p_safe[mask]) - np.log(q_safe[mask]))).sum())


def tsne(embeddings: EmbeddingSet, config: TsneConfig = TsneConfig()) -> TsneResult:
    """Project an embedding set to 2-D.

    Preconditions: N > 3 * perplexity (otherwise the bandwidth calibration
    has no room) and finite inputs. The KL history is reported against the
    un-exaggerated joint distribution for every iteration.
    """
    n = len(embeddings)
    if n <= 3 * config.perplexity:
        raise PerplexityInfeasibleError(
            f"perplexity-infeasible: need N > {3 * config.perplexity:.0f}, got {n}"
        )
    p_cond, _, entropies = conditional_affinities(
        embeddings.vectors, config.perplexity, config.entropy_tol_bits
    )
    p = joint_affinities(p_cond)

    rng = np.random.default_rng(config.seed)
    y = rng.standard_normal((n, 2)) * 1e-4
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    kl_history: list[float] = []

    for it in range(config.iterations):
        p_eff = p * config.early_exaggeration if it < config.exaggeration_iters else p
        momentum = (
            config.initial_momentum
            if it < config.momentum_switch_iter
            else config.final_momentum
        )

        d2 = _squared_distances(y)
        num = 1.0 / (1.0 + d2)
        np.fill_diagonal(num, 0.0)
        q = num / num.sum()

        pq = (p_eff - q) * num
        grad = 4.0 * (pq.sum(axis=1)[:, None] * y - pq @ y)

        flipped = np.sign(grad) != np.sign(velocity)
        gains = np.where(flipped, gains + 0.2, gains * 0.8)
        gains = np.maximum(gains, config.min_gain)
        velocity = momentum * velocity - config.learning_rate * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)

        kl_history.append(_kl_divergence(p, q))

    return TsneResult(coords=y, kl_history=kl_history, row_entropies_bits=entropies)


def collect_embeddings(checkpoint, manifest, blob_store, split: str | None = None) -> EmbeddingSet:
    """Run the model over a manifest's accepted records and gather the pooled
    embeddings plus true/predicted labels (feeds the 2-D projection)."""
    from ..preprocess import prepare_for_model
    from ..trainer.train import predict

    vectors, truths, preds, ids = [], [], [], []
    for rec in manifest.records(status="accepted", split=split):
        try:
            data = blob_store.read(rec.blob_checksum)
        except KeyError:
            continue
        image = prepare_for_model(
            data,
            crop=rec.crop_flag,
            size=checkpoint.architecture.input_size,
            stats=checkpoint.norm_stats,
        )
        result = predict(checkpoint, image)
        vectors.append(result.embedding)
        truths.append(rec.label)
        preds.append(result.class_id)
        ids.append(rec.id)
    return EmbeddingSet(
        vectors=np.array(vectors),
        true_labels=tuple(truths),
        predicted_labels=tuple(preds),
        ids=tuple(ids),
    )
