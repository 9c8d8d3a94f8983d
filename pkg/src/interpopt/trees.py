"""CART decision trees with randomized hyperparameters, validation-guided
post-pruning, Gini importances and the four interpretability proxy metrics.

Trees are stored as parallel arrays in preorder (root at index 0). Child
convention: left answers "feature value <= threshold". Fitting is a pure
function of (data, hyperparameters, seed); candidate thresholds are midpoints
between consecutive sorted unique values, and split ties break toward the
lowest feature index, then the lowest threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

GAIN_TOL = 1e-12


@dataclass(frozen=True)
class TreeHyperparams:
    """Training knobs. The zoo's random menu draws max_depth in 1..7,
    min_samples_leaf in {1,10,100} and max_features in 2..P; local surrogate
    fitting reuses this record with its own wider depth range."""

    max_depth: int
    min_samples_leaf: int = 1
    max_features: int | None = None  # None = all features
    splitter: str = "best"
    seed: int = 0

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError("max_features must be >= 1")
        if self.splitter not in ("best", "random"):
            raise ValueError(f"unknown splitter {self.splitter!r}")

    def to_dict(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
            "splitter": self.splitter,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "TreeHyperparams":
        return TreeHyperparams(
            d["max_depth"], d["min_samples_leaf"], d["max_features"], d["splitter"], d["seed"]
        )


@dataclass
class TreeModel:
    """Binary decision tree over an encoded feature matrix."""

    feature: np.ndarray  # (n_nodes,) int64; -1 marks a leaf
    threshold: np.ndarray  # (n_nodes,) float64; nan at leaves
    left: np.ndarray  # (n_nodes,) int64; -1 at leaves
    right: np.ndarray
    class_counts: np.ndarray  # (n_nodes, 2) training counts
    n_features: int
    hyperparams: TreeHyperparams
    meta: dict = field(default_factory=dict)

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature < 0

    @property
    def leaf_labels(self) -> np.ndarray:
        # argmax breaks count ties toward label 0
        return np.argmax(self.class_counts, axis=1)

    def depth(self) -> int:
        depths = np.zeros(self.node_count, dtype=int)
        out = 0
        for i in range(self.node_count):  # preorder: parents precede children
            if self.feature[i] >= 0:
                for child in (self.left[i], self.right[i]):
                    depths[child] = depths[i] + 1
                    out = max(out, depths[child])
        return out


def _gini(counts: np.ndarray) -> np.ndarray:
    """Gini impurity for one or many (c0, c1) count pairs."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum(axis=-1)
    n = np.where(n == 0, 1.0, n)
    p = counts / n[..., None]
    return 1.0 - (p**2).sum(axis=-1)


def _best_threshold(x: np.ndarray, y: np.ndarray, msl: int) -> tuple[float, float] | None:
    """Best midpoint threshold for one feature; returns (gain_numerator, thr).

    gain_numerator = n * parent_gini - (nL*giniL + nR*giniR); dividing by n
    is deferred so comparisons stay exact. Returns None when no position
    satisfies min_samples_leaf or the feature is constant.
    """
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = len(xs)
    # candidate boundary after position i (0-based): left = first i+1 rows
    cum1 = np.cumsum(ys)
    positions = np.arange(n - 1)
    valid = (xs[positions] != xs[positions + 1]) & (positions + 1 >= msl) & (n - positions - 1 >= msl)
    if not valid.any():
        return None
    pos = positions[valid]
    n_left = (pos + 1).astype(np.float64)
    n_right = n - n_left
    ones_left = cum1[pos].astype(np.float64)
    ones_right = cum1[-1] - ones_left
    gini_left = 1.0 - ((ones_left / n_left) ** 2 + ((n_left - ones_left) / n_left) ** 2)
    gini_right = 1.0 - ((ones_right / n_right) ** 2 + ((n_right - ones_right) / n_right) ** 2)
    child_sum = n_left * gini_left + n_right * gini_right
    best = int(np.argmin(child_sum))  # first minimum = lowest threshold
    parent = n * _gini(np.array([n - cum1[-1], cum1[-1]]))
    thr = (xs[pos[best]] + xs[pos[best] + 1]) / 2.0
    return float(parent - child_sum[best]), float(thr)


def _binary_split_gains(
    Xsub: np.ndarray, y: np.ndarray, msl: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized gain for 0/1 columns (threshold fixed at 0.5).

    Returns (gain_numerators, valid_mask); invalid columns get -inf.
    """
    n = Xsub.shape[0]
    onehot = np.stack([1.0 - y, y.astype(np.float64)], axis=1)
    right_counts = Xsub.T @ onehot  # rows with value 1 go right
    total = onehot.sum(axis=0)
    left_counts = total - right_counts
    n_left = left_counts.sum(axis=1)
    n_right = right_counts.sum(axis=1)
    valid = (n_left >= msl) & (n_right >= msl)
    child_sum = n_left * _gini(left_counts) + n_right * _gini(right_counts)
    parent = n * _gini(total)
    gains = np.where(valid, parent - child_sum, -np.inf)
    return gains, valid


def fit_tree(X: np.ndarray, y: np.ndarray, hp: TreeHyperparams) -> TreeModel:
    """Grow a CART tree by greedy Gini search over seeded feature subsets.

    splitter="best" scans all midpoint thresholds; splitter="random" draws one
    uniform threshold inside each candidate feature's observed range and keeps
    the best-scoring candidate.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise ValueError("training partition is empty")
    if len(np.unique(y)) < 2:
        raise ValueError("training partition must contain both classes")
    n_features = X.shape[1]
    k = n_features if hp.max_features is None else min(hp.max_features, n_features)
    rng = np.random.default_rng(hp.seed)
    is_binary_col = np.all((X == 0.0) | (X == 1.0), axis=0)

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    counts: list[tuple[int, int]] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        counts.append((0, 0))
        return len(feature) - 1

    def grow(idx: np.ndarray, depth: int) -> int:
        node = new_node()
        ysub = y[idx]
        c1 = int(ysub.sum())
        counts[node] = (len(idx) - c1, c1)
        pure = c1 == 0 or c1 == len(idx)
        if depth >= hp.max_depth or pure or len(idx) < 2 * hp.min_samples_leaf:
            return node

        cand = np.sort(rng.choice(n_features, size=k, replace=False))
        best_gain, best_j, best_thr = GAIN_TOL, -1, np.nan
        if hp.splitter == "best":
            binary_cand = cand[is_binary_col[cand]]
            if len(binary_cand):
                gains, _ = _binary_split_gains(X[np.ix_(idx, binary_cand)], ysub, hp.min_samples_leaf)
                j = int(np.argmax(gains))  # first max = lowest feature index
                if gains[j] > best_gain:
                    best_gain, best_j, best_thr = float(gains[j]), int(binary_cand[j]), 0.5
            for j in cand[~is_binary_col[cand]]:
                found = _best_threshold(X[idx, j], ysub, hp.min_samples_leaf)
                if found is not None and found[0] > best_gain:
                    best_gain, best_j, best_thr = found[0], int(j), found[1]
        else:
            parent = len(idx) * _gini(np.array(counts[node]))
            for j in cand:
                xj = X[idx, j]
                lo, hi = float(xj.min()), float(xj.max())
                if lo == hi:
                    continue
                thr = float(rng.uniform(lo, hi))
                go_left = xj <= thr
                n_l = int(go_left.sum())
                if n_l < hp.min_samples_leaf or len(idx) - n_l < hp.min_samples_leaf:
                    continue
                c1_l = int(ysub[go_left].sum())
                c1_r = c1 - c1_l
                child = n_l * _gini(np.array([n_l - c1_l, c1_l])) + (len(idx) - n_l) * _gini(
                    np.array([len(idx) - n_l - c1_r, c1_r])
                )
                gain = float(parent - child)
                if gain > best_gain:
                    best_gain, best_j, best_thr = gain, int(j), thr

        if best_j < 0:
            return node
        go_left = X[idx, best_j] <= best_thr
        feature[node] = best_j
        threshold[node] = best_thr
        left[node] = grow(idx[go_left], depth + 1)
        right[node] = grow(idx[~go_left], depth + 1)
        return node

    grow(np.arange(len(X)), 0)
    return TreeModel(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        class_counts=np.asarray(counts, dtype=np.int64),
        n_features=n_features,
        hyperparams=hp,
    )


def predict(tree: TreeModel, x: np.ndarray) -> int:
    return int(tree.leaf_labels[path(tree, x)[-1]])


def path(tree: TreeModel, x: np.ndarray) -> list[int]:
    """Node indices from the root to the predicting leaf, inclusive."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (tree.n_features,):
        raise ValueError(f"expected {tree.n_features} features, got {x.shape}")
    nodes = [0]
    while tree.feature[nodes[-1]] >= 0:
        i = nodes[-1]
        nxt = tree.left[i] if x[tree.feature[i]] <= tree.threshold[i] else tree.right[i]
        nodes.append(int(nxt))
    return nodes


def predict_batch(tree: TreeModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != tree.n_features:
        raise ValueError(f"expected (n, {tree.n_features}) matrix, got {X.shape}")
    idx = np.zeros(len(X), dtype=np.int64)
    labels = tree.leaf_labels
    while True:
        active = tree.feature[idx] >= 0
        if not active.any():
            break
        rows = np.flatnonzero(active)
        cur = idx[rows]
        go_left = X[rows, tree.feature[cur]] <= tree.threshold[cur]
        idx[rows] = np.where(go_left, tree.left[cur], tree.right[cur])
    return labels[idx]


def accuracy(tree: TreeModel, X: np.ndarray, y: np.ndarray) -> float:
    return float((predict_batch(tree, X) == np.asarray(y)).mean())


def _leaf_assignment_paths(tree: TreeModel, X: np.ndarray) -> np.ndarray:
    """(n, depth+1) matrix of visited node ids per row, padded with -1."""
    n = len(X)
    max_len = tree.depth() + 1
    visited = np.full((n, max_len), -1, dtype=np.int64)
    idx = np.zeros(n, dtype=np.int64)
    visited[:, 0] = 0
    for step in range(1, max_len):
        active = tree.feature[idx] >= 0
        if not active.any():
            break
        rows = np.flatnonzero(active)
        cur = idx[rows]
        go_left = X[rows, tree.feature[cur]] <= tree.threshold[cur]
        idx[rows] = np.where(go_left, tree.left[cur], tree.right[cur])
        visited[rows, step] = idx[rows]
    return visited


def path_stats(tree: TreeModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row (internal nodes traversed, distinct feature indices on path)."""
    X = np.asarray(X, dtype=np.float64)
    visited = _leaf_assignment_paths(tree, X)
    lengths = (visited >= 0).sum(axis=1) - 1  # leaf itself is not a split
    feats = np.where(visited >= 0, tree.feature[np.maximum(visited, 0)], -1)
    feats = np.where(feats >= 0, feats, -1)
    feats.sort(axis=1)
    distinct = ((feats[:, 1:] != feats[:, :-1]) & (feats[:, 1:] >= 0)).sum(axis=1) + (
        feats[:, 0] >= 0
    ).astype(np.int64)
    return lengths.astype(np.float64), distinct.astype(np.float64)


def prune(tree: TreeModel, X_val: np.ndarray, y_val: np.ndarray) -> TreeModel:
    """Collapse leaf-pair parents whenever validation accuracy does not drop.

    Scans candidates in node order, collapsing the first that qualifies, and
    repeats until none qualifies. Accuracy is monotone non-decreasing and the
    node count non-increasing by construction.
    """
    if len(X_val) == 0:
        raise ValueError("validation partition is empty")
    X_val = np.asarray(X_val, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.int64)
    visited = _leaf_assignment_paths(tree, X_val)
    labels = tree.leaf_labels
    # correct[i]: validation rows through node i that match its majority label
    flat = visited.ravel()
    ys = np.repeat(y_val, visited.shape[1])
    ok = flat >= 0
    reach = np.zeros((tree.node_count, 2), dtype=np.int64)
    np.add.at(reach, (flat[ok], ys[ok]), 1)
    correct = reach[np.arange(tree.node_count), labels]

    feature = tree.feature.copy()
    changed = True
    while changed:
        changed = False
        for i in range(tree.node_count):
            if feature[i] < 0:
                continue
            l, r = tree.left[i], tree.right[i]
            if feature[l] >= 0 or feature[r] >= 0:
                continue
            if correct[i] >= correct[l] + correct[r]:
                feature[i] = -1  # collapse to leaf with the node's majority label
                changed = True
                break

    # compact: keep nodes reachable under the new leaf flags, in preorder
    keep: list[int] = []
    stack = [0]
    while stack:
        i = stack.pop()
        keep.append(i)
        if feature[i] >= 0:
            stack.append(int(tree.right[i]))
            stack.append(int(tree.left[i]))
    keep_arr = np.asarray(sorted(keep), dtype=np.int64)
    remap = -np.ones(tree.node_count, dtype=np.int64)
    remap[keep_arr] = np.arange(len(keep_arr))
    new_feature = feature[keep_arr]
    new_left = np.where(new_feature >= 0, remap[tree.left[keep_arr]], -1)
    new_right = np.where(new_feature >= 0, remap[tree.right[keep_arr]], -1)
    return TreeModel(
        feature=new_feature,
        threshold=np.where(new_feature >= 0, tree.threshold[keep_arr], np.nan),
        left=new_left,
        right=new_right,
        class_counts=tree.class_counts[keep_arr],
        n_features=tree.n_features,
        hyperparams=tree.hyperparams,
        meta=dict(tree.meta),
    )


def feature_importances(tree: TreeModel) -> np.ndarray:
    """Gini importance: weighted impurity decrease per feature, normalized to
    sum 1; all zeros for a single-leaf tree."""
    imp = np.zeros(tree.n_features, dtype=np.float64)
    n_root = tree.class_counts[0].sum()
    for i in range(tree.node_count):
        if tree.feature[i] < 0:
            continue
        l, r = tree.left[i], tree.right[i]
        n_i = tree.class_counts[i].sum()
        n_l = tree.class_counts[l].sum()
        n_r = tree.class_counts[r].sum()
        decrease = _gini(tree.class_counts[i]) - (
            n_l * _gini(tree.class_counts[l]) + n_r * _gini(tree.class_counts[r])
        ) / n_i
        imp[tree.feature[i]] += (n_i / n_root) * decrease
    total = imp.sum()
    return imp / total if total > 0 else imp


@dataclass(frozen=True)
class ProxyScores:
    """The four interpretability proxies; lower is better for all of them."""

    mean_path_length: float
    mean_distinct_features: float
    node_count: int
    nonzero_features: int

    def as_dict(self) -> dict:
        return {
            "mean_path_length": self.mean_path_length,
            "mean_distinct_features": self.mean_distinct_features,
            "node_count": self.node_count,
            "nonzero_features": self.nonzero_features,
        }


PROXIES = ("mean_path_length", "mean_distinct_features", "node_count", "nonzero_features")

BEST_POSSIBLE_PROXIES = ProxyScores(0.0, 0.0, 1, 0)  # a single leaf


def columns_used(tree: TreeModel, feature_groups=None) -> set:
    """Original columns split on anywhere in the tree; one-hot members count
    as their parent column. Without groups, raw feature indices are used."""
    used = set(int(j) for j in tree.feature[tree.feature >= 0])
    if feature_groups is None:
        return used
    names = set()
    for g in feature_groups.values():
        if any(g.start <= j < g.stop for j in used):
            names.add(g.name)
    return names


def proxy_scores(tree: TreeModel, X_points: np.ndarray, feature_groups=None) -> ProxyScores:
    if len(X_points) == 0:
        raise ValueError("empty point set")
    lengths, distinct = path_stats(tree, X_points)
    return ProxyScores(
        mean_path_length=float(lengths.mean()),
        mean_distinct_features=float(distinct.mean()),
        node_count=tree.node_count,
        nonzero_features=len(columns_used(tree, feature_groups)),
    )


# --- wire format ---------------------------------------------------------------

TREE_FORMAT = "interpopt.tree/1"


def tree_to_dict(tree: TreeModel) -> dict:
    nodes = []
    for i in range(tree.node_count):
        internal = tree.feature[i] >= 0
        nodes.append(
            {
                "feature": int(tree.feature[i]) if internal else None,
                "threshold": float(tree.threshold[i]) if internal else None,
                "left": int(tree.left[i]),
                "right": int(tree.right[i]),
                "counts": [int(c) for c in tree.class_counts[i]],
                "label": int(tree.leaf_labels[i]),
            }
        )
    return {
        "format": TREE_FORMAT,
        "root": 0,
        "n_features": tree.n_features,
        "nodes": nodes,
        "hyperparams": tree.hyperparams.to_dict(),
        "meta": tree.meta,
    }


def tree_from_dict(doc: dict) -> TreeModel:
    if doc.get("format") != TREE_FORMAT:
        raise ValueError(f"unsupported tree document format {doc.get('format')!r}")
    nodes = doc["nodes"]
    feature = np.asarray([n["feature"] if n["feature"] is not None else -1 for n in nodes], dtype=np.int64)
    return TreeModel(
        feature=feature,
        threshold=np.asarray(
            [n["threshold"] if n["threshold"] is not None else np.nan for n in nodes], dtype=np.float64
        ),
        left=np.asarray([n["left"] for n in nodes], dtype=np.int64),
        right=np.asarray([n["right"] for n in nodes], dtype=np.int64),
        class_counts=np.asarray([n["counts"] for n in nodes], dtype=np.int64),
        n_features=int(doc["n_features"]),
        hyperparams=TreeHyperparams.from_dict(doc["hyperparams"]),
        meta=dict(doc.get("meta", {})),
    )


def save_tree(tree: TreeModel, path) -> None:
    Path(path).write_text(json.dumps(tree_to_dict(tree), indent=1, sort_keys=True))


def load_tree(path) -> TreeModel:
    return tree_from_dict(json.loads(Path(path).read_text()))
