"""Local surrogate extraction for black-box models.

For a point x we sample perturbations scaled to its nearest-neighborhood,
binarize the black-box predictions to "matches the prediction at x", and fit
the shallowest pruned tree whose held-out fidelity clears a threshold.
Points whose perturbation labels are too one-sided are treated as lying off
the decision boundary and get no surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import trees
from .data import Dataset


@dataclass(frozen=True)
class LocalRegionConfig:
    k_neighbors: int = 20
    n_perturbations: int = 10_000
    variance_scale: float = 0.01
    categorical_mix: float = 0.05
    imbalance_cutoff: float = 0.75
    fidelity_threshold: float = 0.90
    max_local_depth: int = 10
    min_leaf: int = 5
    local_validate_fraction: float = 0.20

    def __post_init__(self):
        for name in ("imbalance_cutoff", "fidelity_threshold", "local_validate_fraction"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0,1), got {v}")
        if self.max_local_depth < 1:
            raise ValueError("max_local_depth must be >= 1")


OFF_BOUNDARY = "off-boundary"
NO_FAITHFUL_SURROGATE = "no-faithful-surrogate"
OK = "ok"


@dataclass
class LocalExplanation:
    anchor_index: int | None
    surrogate: trees.TreeModel | None
    fidelity: float | None
    depth: int | None
    reason: str

    @property
    def on_boundary(self) -> bool:
        return self.reason != OFF_BOUNDARY


@dataclass
class NeighborStats:
    """Empirical spread of a point's k nearest rows, used to scale perturbations."""

    anchor: np.ndarray
    neighbor_indices: np.ndarray
    continuous_var: dict  # column name -> empirical (population) variance
    categorical_dist: dict  # column name -> probabilities over the schema values
    feature_groups: dict


def neighborhood_stats(dataset: Dataset, x: np.ndarray, k: int) -> NeighborStats:
    """k nearest rows to x in preprocessed space (Euclidean, exhaustive scan)."""
    if k > dataset.n_rows:
        raise ValueError(f"k={k} exceeds dataset size {dataset.n_rows}")
    x = np.asarray(x, dtype=np.float64)
    d2 = ((dataset.features - x) ** 2).sum(axis=1)
    order = np.argsort(d2, kind="stable")
    nn = order[:k]
    cont_var, cat_dist = {}, {}
    for g in dataset.feature_groups.values():
        if g.kind == "continuous":
            cont_var[g.name] = float(dataset.features[nn, g.start].var())
        else:
            counts = dataset.features[nn, g.start : g.stop].sum(axis=0)
            cat_dist[g.name] = counts / counts.sum()
    return NeighborStats(x, nn, cont_var, cat_dist, dataset.feature_groups)


def sample_perturbations(
    x: np.ndarray, stats: NeighborStats, cfg: LocalRegionConfig, seed: int = 0
) -> np.ndarray:
    """Draw cfg.n_perturbations points around x.

    Continuous feature j ~ Normal(x_j, variance_scale * neighborhood variance);
    categorical features mix the neighborhood's empirical value distribution
    with a uniform distribution over the schema's values, then re-encode.
    """
    x = np.asarray(x, dtype=np.float64)
    rng = np.random.default_rng(seed)
    n = cfg.n_perturbations
    out = np.tile(x, (n, 1))
    for g in stats.feature_groups.values():
        if g.kind == "continuous":
            sd = np.sqrt(cfg.variance_scale * stats.continuous_var[g.name])
            out[:, g.start] = x[g.start] + sd * rng.standard_normal(n)
        else:
            width = g.stop - g.start
            probs = (1.0 - cfg.categorical_mix) * stats.categorical_dist[g.name]
            probs = probs + cfg.categorical_mix / width
            probs = probs / probs.sum()
            draws = rng.choice(width, size=n, p=probs)
            block = np.zeros((n, width))
            block[np.arange(n), draws] = 1.0
            out[:, g.start : g.stop] = block
    return out


def fit_local_proxy(
    predict_fn,
    x: np.ndarray,
    dataset: Dataset,
    cfg: LocalRegionConfig = LocalRegionConfig(),
    seed: int = 0,
    anchor_index: int | None = None,
) -> LocalExplanation:
    """Fit the shallowest faithful local tree around x, or report why not.

    predict_fn maps an (n, P) matrix to integer labels. Labels for the
    surrogate are binarized to "matches predict_fn at x". If one binary class
    exceeds the imbalance cutoff the point is off the boundary; otherwise
    classes are balanced by subsampling, a validation fraction is held out,
    and pruned trees of depth 1..max_local_depth are tried in order.
    """
    x = np.asarray(x, dtype=np.float64)
    stats = neighborhood_stats(dataset, x, cfg.k_neighbors)
    Xp = sample_perturbations(x, stats, cfg, seed=seed)
    anchor_label = int(predict_fn(x[None, :])[0])
    match = (np.asarray(predict_fn(Xp)) == anchor_label).astype(np.int64)

    frac_match = float(match.mean())
    if max(frac_match, 1.0 - frac_match) > cfg.imbalance_cutoff:
        return LocalExplanation(anchor_index, None, None, None, OFF_BOUNDARY)

    rng = np.random.default_rng(seed + 1)
    ones = np.flatnonzero(match == 1)
    zeros = np.flatnonzero(match == 0)
    m = min(len(ones), len(zeros))
    keep = np.concatenate(
        [rng.choice(ones, m, replace=False), rng.choice(zeros, m, replace=False)]
    )
    keep = rng.permutation(keep)
    Xb, yb = Xp[keep], match[keep]

    n_val = max(1, int(round(cfg.local_validate_fraction * len(Xb))))
    X_val, y_val = Xb[:n_val], yb[:n_val]
    X_tr, y_tr = Xb[n_val:], yb[n_val:]
    if len(np.unique(y_tr)) < 2:
        return LocalExplanation(anchor_index, None, None, None, NO_FAITHFUL_SURROGATE)

    for depth in range(1, cfg.max_local_depth + 1):
        hp = trees.TreeHyperparams(
            max_depth=depth, min_samples_leaf=cfg.min_leaf, max_features=None,
            splitter="best", seed=seed,
        )
        tree = trees.prune(trees.fit_tree(X_tr, y_tr, hp), X_val, y_val)
        fidelity = trees.accuracy(tree, X_val, y_val)
        if fidelity >= cfg.fidelity_threshold:
            return LocalExplanation(anchor_index, tree, float(fidelity), depth, OK)
    return LocalExplanation(anchor_index, None, None, None, NO_FAITHFUL_SURROGATE)


def boundary_scan(
    predict_fn,
    point_indices,
    dataset: Dataset,
    cfg: LocalRegionConfig = LocalRegionConfig(),
    seed: int = 0,
) -> tuple[float, dict]:
    """Boundary-membership fraction over a point set, with cached explanations.

    Membership is decided by the perturbation imbalance test alone; members
    whose fidelity loop fails stay members but carry no surrogate.
    """
    point_indices = list(point_indices)
    if not point_indices:
        raise ValueError("empty point set")
    explanations = {}
    members = 0
    for j, idx in enumerate(point_indices):
        exp = fit_local_proxy(
            predict_fn, dataset.features[idx], dataset, cfg,
            seed=seed + 7919 * j, anchor_index=int(idx),
        )
        explanations[int(idx)] = exp
        members += int(exp.on_boundary)
    return members / len(point_indices), explanations


def local_proxy_scores(
    explanations: dict, dataset: Dataset
) -> trees.ProxyScores:
    """Average the tree proxies of each point's surrogate over a point set.

    Points without a surrogate (off the boundary, or no faithful fit)
    contribute the best possible score, mirroring the convention that an
    unexplainable-because-trivial region costs a reader nothing.
    """
    if not explanations:
        raise ValueError("no explanations given")
    best = trees.BEST_POSSIBLE_PROXIES
    path_lengths, distincts, node_counts, nonzeros = [], [], [], []
    for idx, exp in explanations.items():
        if exp.surrogate is None:
            path_lengths.append(best.mean_path_length)
            distincts.append(best.mean_distinct_features)
            node_counts.append(best.node_count)
            nonzeros.append(best.nonzero_features)
        else:
            lengths, distinct = trees.path_stats(exp.surrogate, dataset.features[[idx]])
            path_lengths.append(float(lengths[0]))
            distincts.append(float(distinct[0]))
            node_counts.append(exp.surrogate.node_count)
            nonzeros.append(len(trees.columns_used(exp.surrogate, dataset.feature_groups)))
    return trees.ProxyScores(
        mean_path_length=float(np.mean(path_lengths)),
        mean_distinct_features=float(np.mean(distincts)),
        node_count=float(np.mean(node_counts)),
        nonzero_features=float(np.mean(nonzeros)),
    )


def sensitivity_grid(
    predict_fns: dict,
    point_indices,
    dataset: Dataset,
    variance_scales=(0.001, 0.01, 0.1),
    mixes=(0.01, 0.05, 0.1),
    base_cfg: LocalRegionConfig = LocalRegionConfig(),
    seed: int = 0,
):
    """Cross-setting rank table over the local-region hyperparameter grid.

    For every (variance_scale, mix) setting, find each proxy's best model;
    then report that model's rank under every other setting. Returns a list
    of row dicts (proxy, setting_a, setting_b, rank).
    """
    from dataclasses import replace

    from .experiments import rank_of

    settings = [(vs, mix) for vs in variance_scales for mix in mixes]
    scores = {}  # (setting, proxy) -> per-model score list in id order
    ids = sorted(predict_fns)
    for setting in settings:
        cfg = replace(base_cfg, variance_scale=setting[0], categorical_mix=setting[1])
        for proxy in trees.PROXIES:
            scores[(setting, proxy)] = []
        for mid in ids:
            _, exps = boundary_scan(predict_fns[mid], point_indices, dataset, cfg, seed=seed)
            proxies = local_proxy_scores(exps, dataset).as_dict()
            for proxy in trees.PROXIES:
                scores[(setting, proxy)].append(proxies[proxy])
    rows = []
    for proxy in trees.PROXIES:
        for sa in settings:
            sA = np.asarray(scores[(sa, proxy)])
            best_group = [ids[i] for i in np.flatnonzero(sA == sA.min())]
            for sb in settings:
                sB = dict(zip(ids, scores[(sb, proxy)]))
                rank = min(rank_of(sB, m) for m in best_group)
                rows.append(
                    {
                        "proxy": proxy,
                        "variance_scale_a": sa[0], "mix_a": sa[1],
                        "variance_scale_b": sb[0], "mix_b": sb[1],
                        "rank": rank,
                    }
                )
    return rows
