import numpy as np
import pytest

from interpopt import trees
from interpopt.trees import TreeHyperparams, TreeModel


def manual_tree(feature, threshold, left, right, counts):
    """Assemble a TreeModel from parallel lists (for fixtures with an exact
    known shape)."""
    feature = np.asarray(feature, dtype=np.int64)
    return TreeModel(
        feature=feature,
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        class_counts=np.asarray(counts, dtype=np.int64),
        n_features=int(max(feature.max() + 1, 1)),
        hyperparams=TreeHyperparams(max_depth=7),
    )


def stump(feature=0, threshold=0.5, left_label=0, right_label=1, n_features=None):
    t = manual_tree(
        [feature, -1, -1],
        [threshold, np.nan, np.nan],
        [1, -1, -1],
        [2, -1, -1],
        [[10, 10], [10, 0] if left_label == 0 else [0, 10], [0, 10] if right_label == 1 else [10, 0]],
    )
    if n_features:
        t.n_features = n_features
    return t


class TestFitTree:
    def test_separable_1d_stump(self):
        X = np.linspace(0, 1, 50).reshape(-1, 1)
        y = (X[:, 0] > 0.5).astype(int)
        t = trees.fit_tree(X, y, TreeHyperparams(max_depth=1))
        assert trees.accuracy(t, X, y) == 1.0
        assert t.node_count == 3

    def test_deterministic(self, toy_mixed_dataset):
        X, y = toy_mixed_dataset.partition("train")
        hp = TreeHyperparams(max_depth=5, min_samples_leaf=1, max_features=3, splitter="random", seed=11)
        a, b = trees.fit_tree(X, y, hp), trees.fit_tree(X, y, hp)
        assert np.array_equal(a.feature, b.feature)
        assert np.array_equal(a.threshold, b.threshold, equal_nan=True)
        assert np.array_equal(a.class_counts, b.class_counts)

    def test_empty_and_single_class_rejected(self):
        with pytest.raises(ValueError):
            trees.fit_tree(np.zeros((0, 2)), np.zeros(0, dtype=int), TreeHyperparams(1))
        with pytest.raises(ValueError):
            trees.fit_tree(np.zeros((4, 2)), np.zeros(4, dtype=int), TreeHyperparams(1))

    def test_depth_bound(self, toy_mixed_dataset):
        X, y = toy_mixed_dataset.partition("train")
        for depth in (1, 2, 3):
            t = trees.fit_tree(X, y, TreeHyperparams(max_depth=depth, seed=2))
            assert t.depth() <= depth

    def test_min_samples_leaf_respected(self, toy_mixed_dataset):
        X, y = toy_mixed_dataset.partition("train")
        t = trees.fit_tree(X, y, TreeHyperparams(max_depth=7, min_samples_leaf=25, seed=3))
        leaf_sizes = t.class_counts[t.is_leaf].sum(axis=1)
        assert leaf_sizes.min() >= 25

    def test_tie_breaks_to_lowest_feature(self):
        # two identical columns: the split must use column 0
        x = np.r_[np.zeros(10), np.ones(10)]
        X = np.column_stack([x, x])
        y = x.astype(int)
        t = trees.fit_tree(X, y, TreeHyperparams(max_depth=1))
        assert t.feature[0] == 0


class TestPredictAndPath:
    def test_stump_goes_left(self):
        t = stump()
        x = np.array([0.0])
        assert trees.predict(t, x) == 0
        assert trees.path(t, x) == [0, 1]

    def test_single_leaf_constant(self):
        t = manual_tree([-1], [np.nan], [-1], [-1], [[3, 7]])
        for v in (-10.0, 0.0, 10.0):
            assert trees.predict(t, np.array([v])) == 1

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            trees.predict(stump(), np.array([1.0, 2.0]))

    def test_path_oracle_on_random_points(self, toy_mixed_dataset, rng):
        X, y = toy_mixed_dataset.partition("train")
        t = trees.fit_tree(X, y, TreeHyperparams(max_depth=6, seed=7))
        pts = rng.normal(size=(1000, X.shape[1]))
        batch = trees.predict_batch(t, pts)
        for i in range(0, 1000, 37):
            p = trees.path(t, pts[i])
            assert p[0] == 0
            # follow the splits manually
            for a, b in zip(p[:-1], p[1:]):
                j, thr = t.feature[a], t.threshold[a]
                expected = t.left[a] if pts[i][j] <= thr else t.right[a]
                assert expected == b
            assert t.feature[p[-1]] == -1
            assert batch[i] == t.leaf_labels[p[-1]]


class TestPrune:
    def test_same_label_siblings_collapse(self):
        # both leaves predict 1: collapsing cannot change accuracy
        t = manual_tree(
            [0, -1, -1],
            [0.5, np.nan, np.nan],
            [1, -1, -1],
            [2, -1, -1],
            [[2, 10], [1, 5], [1, 5]],
        )
        X = np.array([[0.0], [1.0]])
        y = np.array([1, 1])
        pruned = trees.prune(t, X, y)
        assert pruned.node_count == 1

    def test_single_leaf_unchanged(self):
        t = manual_tree([-1], [np.nan], [-1], [-1], [[3, 7]])
        pruned = trees.prune(t, np.array([[0.0]]), np.array([1]))
        assert pruned.node_count == 1

    def test_never_hurts_accuracy_or_size(self, toy_mixed_dataset, rng):
        X, y = toy_mixed_dataset.partition("train")
        Xv, yv = toy_mixed_dataset.partition("validate")
        for i in range(30):
            hp = TreeHyperparams(
                max_depth=int(rng.integers(1, 8)),
                min_samples_leaf=int(rng.choice([1, 10])),
                max_features=int(rng.integers(2, X.shape[1] + 1)),
                splitter=str(rng.choice(["best", "random"])),
                seed=int(rng.integers(0, 2**31)),
            )
            t = trees.fit_tree(X, y, hp)
            p = trees.prune(t, Xv, yv)
            assert trees.accuracy(p, Xv, yv) >= trees.accuracy(t, Xv, yv)
            assert p.node_count <= t.node_count


class TestImportances:
    def test_stump_concentrates(self):
        X = np.zeros((20, 5))
        X[:, 3] = np.r_[np.zeros(10), np.ones(10)]
        y = X[:, 3].astype(int)
        t = trees.fit_tree(X, y, TreeHyperparams(max_depth=1))
        imp = trees.feature_importances(t)
        assert imp[3] == 1.0
        assert imp.sum() == 1.0

    def test_single_leaf_all_zero(self):
        t = manual_tree([-1], [np.nan], [-1], [-1], [[3, 7]])
        assert np.all(trees.feature_importances(t) == 0.0)

    def test_two_split_hand_computed(self):
        # 6 points; root splits feature 0 (gain 2/9), the right child splits
        # feature 1 (weighted gain 2/9): normalized importances (0.5, 0.5)
        X = np.array([[0, 0], [0, 1], [0, 0], [1, 0], [1, 0], [1, 1]], dtype=float)
        y = np.array([0, 0, 0, 1, 1, 0])
        t = trees.fit_tree(X, y, TreeHyperparams(max_depth=2))
        assert t.node_count == 5
        assert t.feature[0] == 0
        np.testing.assert_allclose(trees.feature_importances(t), [0.5, 0.5], atol=1e-12)

    def test_normalization_property(self, toy_mixed_dataset, rng):
        X, y = toy_mixed_dataset.partition("train")
        for seed in range(10):
            t = trees.fit_tree(X, y, TreeHyperparams(max_depth=4, max_features=2, seed=seed))
            total = trees.feature_importances(t).sum()
            assert total == 0.0 or abs(total - 1.0) < 1e-9


class TestProxyScores:
    def test_single_leaf(self):
        t = manual_tree([-1], [np.nan], [-1], [-1], [[3, 7]])
        ps = trees.proxy_scores(t, np.zeros((5, 1)))
        assert (ps.mean_path_length, ps.mean_distinct_features, ps.node_count, ps.nonzero_features) == (0, 0, 1, 0)

    def test_stump(self):
        ps = trees.proxy_scores(stump(), np.array([[0.0], [1.0], [0.3]]))
        assert (ps.mean_path_length, ps.mean_distinct_features, ps.node_count, ps.nonzero_features) == (1, 1, 3, 1)

    def test_depth2_complete_tree_brute_force(self):
        # root on f0; left child splits f1, right child splits f2
        t = manual_tree(
            [0, 1, 2, -1, -1, -1, -1],
            [0.5, 0.5, 0.5, np.nan, np.nan, np.nan, np.nan],
            [1, 3, 5, -1, -1, -1, -1],
            [2, 4, 6, -1, -1, -1, -1],
            [[4, 4], [2, 2], [2, 2], [2, 0], [0, 2], [2, 0], [0, 2]],
        )
        pts = np.array([[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)], dtype=float)

        def walk(x):  # independent path enumeration
            node, n_internal, feats = 0, 0, set()
            while t.feature[node] >= 0:
                feats.add(int(t.feature[node]))
                n_internal += 1
                node = t.left[node] if x[t.feature[node]] <= t.threshold[node] else t.right[node]
            return n_internal, len(feats)

        expected = np.array([walk(x) for x in pts], dtype=float)
        ps = trees.proxy_scores(t, pts)
        assert ps.node_count == 7
        assert ps.mean_path_length == expected[:, 0].mean() == 2.0
        assert ps.mean_distinct_features == expected[:, 1].mean() == 2.0
        assert ps.nonzero_features == 3

    def test_one_hot_groups_count_parent_column(self, toy_mixed_dataset):
        ds = toy_mixed_dataset
        X, y = ds.partition("train")
        t = trees.fit_tree(X, y, TreeHyperparams(max_depth=7, seed=0))
        g = ds.feature_groups["color"]
        used_encoded = set(int(j) for j in t.feature[t.feature >= 0])
        color_splits = [j for j in used_encoded if g.start <= j < g.stop]
        ps = trees.proxy_scores(t, X[:50], ds.feature_groups)
        raw = trees.proxy_scores(t, X[:50])
        if len(color_splits) > 1:
            assert ps.nonzero_features < raw.nonzero_features

    def test_distinct_never_exceeds_path(self, toy_mixed_dataset, rng):
        X, y = toy_mixed_dataset.partition("train")
        for seed in range(8):
            t = trees.fit_tree(X, y, TreeHyperparams(max_depth=6, max_features=3, seed=seed))
            lengths, distinct = trees.path_stats(t, X[:100])
            assert np.all(distinct <= lengths) or t.node_count == 1

    def test_empty_points_rejected(self):
        with pytest.raises(ValueError):
            trees.proxy_scores(stump(), np.zeros((0, 1)))


class TestSerialization:
    def test_round_trip(self, toy_mixed_dataset, tmp_path):
        X, y = toy_mixed_dataset.partition("train")
        t = trees.fit_tree(X, y, TreeHyperparams(max_depth=4, seed=1))
        t.meta["encoded_features"] = [{"column": "a", "value": None}]
        path = tmp_path / "tree.json"
        trees.save_tree(t, path)
        loaded = trees.load_tree(path)
        assert np.array_equal(loaded.feature, t.feature)
        assert np.array_equal(loaded.threshold, t.threshold, equal_nan=True)
        assert np.array_equal(loaded.class_counts, t.class_counts)
        assert loaded.hyperparams == t.hyperparams
        assert loaded.meta == t.meta
        assert np.array_equal(
            trees.predict_batch(loaded, X[:20]), trees.predict_batch(t, X[:20])
        )

    def test_rejects_unknown_format(self):
        with pytest.raises(ValueError):
            trees.tree_from_dict({"format": "something-else"})
