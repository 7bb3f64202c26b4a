import numpy as np
import pytest

from roadwatch.explain import (
    EmbeddingSet,
    PerplexityInfeasibleError,
    TsneConfig,
    cam,
    cam_from_features,
    conditional_affinities,
    joint_affinities,
    render_overlay,
    tsne,
)
from roadwatch.explain.cam import CamError, bilinear_resize

from conftest import pattern_dataset
from test_trainer import FIVE_CLASSES, SMALL_ARCH, checkpoint  # noqa: F401


class TestCamFromFeatures:
    def test_hand_computed_toy_tensor(self):
        # two 2x2 channels with weights (2, -1):
        features = np.array(
            [
                [[1.0, 2.0], [3.0, 4.0]],
                [[5.0, 6.0], [7.0, 8.0]],
            ]
        )
        weights = np.array([2.0, -1.0])
        expected = np.array([[2 * 1 - 5, 2 * 2 - 6], [2 * 3 - 7, 2 * 4 - 8]])
        assert np.array_equal(cam_from_features(features, weights), expected)

    def test_zero_weights_give_zero_map(self):
        features = np.random.default_rng(0).random((4, 3, 3))
        assert np.array_equal(cam_from_features(features, np.zeros(4)), np.zeros((3, 3)))

    def test_single_channel_unit_weight_is_identity(self):
        features = np.random.default_rng(1).random((1, 5, 5))
        assert np.array_equal(cam_from_features(features, np.ones(1)), features[0])

    def test_linear_in_weights(self):
        rng = np.random.default_rng(2)
        features = rng.random((6, 4, 4))
        w1, w2 = rng.random(6), rng.random(6)
        lhs = cam_from_features(features, w1 + w2)
        rhs = cam_from_features(features, w1) + cam_from_features(features, w2)
        assert np.abs(lhs - rhs).max() < 1e-9

    def test_shape_mismatch_rejected(self):
        with pytest.raises(CamError):
            cam_from_features(np.zeros((2, 3, 3)), np.zeros(3))


class TestBilinearResize:
    def test_identity(self):
        values = np.random.default_rng(0).random((4, 4))
        assert np.array_equal(bilinear_resize(values, 4, 4), values)

    def test_constant_preserved(self):
        values = np.full((2, 2), 3.5)
        out = bilinear_resize(values, 9, 7)
        assert np.allclose(out, 3.5)

    def test_corners_map_to_corners(self):
        values = np.array([[0.0, 1.0], [2.0, 3.0]])
        out = bilinear_resize(values, 5, 5)
        assert out[0, 0] == 0.0 and out[0, -1] == 1.0
        assert out[-1, 0] == 2.0 and out[-1, -1] == 3.0


class TestCamEndToEnd:
    def test_map_shape_and_range(self, checkpoint):  # noqa: F811
        img = pattern_dataset(n_per_class=1, size=32, seed=5)[0][0]
        activation = cam(checkpoint, img, FIVE_CLASSES[0])
        assert activation.values.shape == (32, 32)
        assert activation.values.min() >= 0.0
        assert activation.values.max() <= 1.0

    def test_unknown_class_rejected(self, checkpoint):  # noqa: F811
        img = pattern_dataset(n_per_class=1, size=32, seed=5)[0][0]
        with pytest.raises(CamError):
            cam(checkpoint, img, "tsunami")

    def test_zero_head_gives_zero_map(self):
        import torch

        from roadwatch.trainer import Checkpoint, IncidentNet

        model = IncidentNet(SMALL_ARCH)  # zero-initialized head
        ckpt = Checkpoint(
            architecture=SMALL_ARCH,
            class_order=FIVE_CLASSES,
            model_state={k: v.clone() for k, v in model.state_dict().items()},
            optimizer_state={}, epoch=0, best_epoch=0, curves={},
        )
        img = pattern_dataset(n_per_class=1, size=32, seed=6)[0][0]
        activation = cam(ckpt, img, FIVE_CLASSES[1])
        assert np.array_equal(activation.values, np.zeros((32, 32)))

    def test_overlay_is_valid_rgb(self, checkpoint):  # noqa: F811
        img = pattern_dataset(n_per_class=1, size=32, seed=7)[0][0]
        activation = cam(checkpoint, img, FIVE_CLASSES[2])
        overlay = render_overlay(img, activation)
        assert overlay.shape == (32, 32, 3)
        assert overlay.dtype == np.uint8


def two_clusters(n_half=100, d=10, gap=12.0, seed=42):
    rng = np.random.default_rng(seed)
    a = rng.normal(0, 1.0, size=(n_half, d)) + gap
    b = rng.normal(0, 1.0, size=(n_half, d)) - gap
    labels = np.array([0] * n_half + [1] * n_half)
    return np.vstack([a, b]), labels


class TestAffinities:
    def test_row_entropies_hit_target(self):
        X, _ = two_clusters(n_half=60)
        _, _, entropies = conditional_affinities(X, perplexity=20.0, tol_bits=1e-5)
        assert np.abs(entropies - np.log2(20.0)).max() <= 1e-5

    def test_joint_is_probability_distribution(self):
        X, _ = two_clusters(n_half=40)
        p_cond, _, _ = conditional_affinities(X, perplexity=10.0)
        P = joint_affinities(p_cond)
        assert P.min() >= 0.0
        assert P.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(P, P.T)
        assert np.allclose(np.diag(P), 0.0)


class TestTsne:
    def test_perplexity_infeasible_rejected(self):
        X = np.random.default_rng(0).random((20, 4))
        with pytest.raises(PerplexityInfeasibleError):
            tsne(EmbeddingSet(vectors=X), TsneConfig(perplexity=10.0, iterations=5))

    def test_non_finite_rejected(self):
        X = np.full((40, 3), np.nan)
        with pytest.raises(ValueError):
            EmbeddingSet(vectors=X)

    def test_two_clusters_separate(self):
        from sklearn.metrics import silhouette_score

        X, labels = two_clusters(n_half=60)
        config = TsneConfig(perplexity=15.0, learning_rate=200.0, iterations=500, seed=0)
        result = tsne(EmbeddingSet(vectors=X), config)
        assert result.coords.shape == (120, 2)
        assert silhouette_score(result.coords, labels) > 0.5

    def test_kl_non_increasing_in_windows_after_exaggeration(self):
        X, _ = two_clusters(n_half=60)
        config = TsneConfig(perplexity=15.0, learning_rate=200.0, iterations=500, seed=1)
        result = tsne(EmbeddingSet(vectors=X), config)
        kl = result.kl_history
        for i in range(config.exaggeration_iters, len(kl) - 50):
            assert kl[i + 50] <= kl[i] + 1e-9, f"KL rose over window [{i}, {i + 50}]"

    def test_duplicated_points_land_together(self):
        """Duplicating every point of a clustered embedding set puts each
        duplicate pair at a distance far below the cluster scale (checked via
        nearest neighbours, the embedding-duplicate detection use case)."""
        rng = np.random.default_rng(3)
        centers = rng.normal(size=(6, 8)) * 10
        base = np.vstack([c + 0.5 * rng.normal(size=(10, 8)) for c in centers])
        X = np.vstack([base, base])  # duplicate of every point
        config = TsneConfig(perplexity=10.0, learning_rate=100.0, iterations=500, seed=2)
        result = tsne(EmbeddingSet(vectors=X), config)
        coords = result.coords
        n = len(base)
        scale = np.linalg.norm(coords - coords.mean(axis=0), axis=1).mean()
        pair_distances = np.array(
            [np.linalg.norm(coords[i] - coords[n + i]) for i in range(n)]
        )
        assert pair_distances.mean() < 0.05 * scale
        assert (pair_distances < 0.25 * scale).all()

    def test_neighbor_ranking_stable_across_seeds(self):
        """On a separable fixture (12 tight clusters of 10) the top-10
        neighbour sets agree across seeds even though the layout rotates."""
        rng = np.random.default_rng(40)
        centers = rng.normal(size=(12, 10)) * 12
        X = np.vstack([c + 0.5 * rng.normal(size=(10, 10)) for c in centers])

        def top10_sets(coords):
            d2 = ((coords[:, None, :] - coords[None, :, :]) ** 2).sum(-1)
            np.fill_diagonal(d2, np.inf)
            return [set(np.argsort(row)[:10]) for row in d2]

        config_a = TsneConfig(perplexity=10.0, learning_rate=200.0, iterations=500, seed=10)
        config_b = TsneConfig(perplexity=10.0, learning_rate=200.0, iterations=500, seed=20)
        na = top10_sets(tsne(EmbeddingSet(vectors=X), config_a).coords)
        nb = top10_sets(tsne(EmbeddingSet(vectors=X), config_b).coords)
        overlaps = [len(a & b) / 10 for a, b in zip(na, nb)]
        assert np.mean(overlaps) >= 0.6

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            TsneConfig(iterations=0)
        with pytest.raises(ValueError):
            TsneConfig(perplexity=1.0)
