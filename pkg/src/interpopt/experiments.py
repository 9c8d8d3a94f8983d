"""Ranking analyses over model zoos: cross-proxy mis-ranking, rank curves
under subsampled evaluation points, and the sequential pipeline compared to
random model draws. All reports are lists of flat row dicts ready for
delimiter-separated export.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from . import bayesopt, explain, mlp, oracle, trees
from .zoo import ModelZoo


def rank_of(scores: dict, model_id, lower_is_better: bool = True) -> int:
    """Tie-aware rank: the lowest sorted position of the model's tie group,
    i.e. the number of models scoring strictly better."""
    if model_id not in scores:
        raise KeyError(f"unknown model id {model_id}")
    values = np.asarray(list(scores.values()), dtype=np.float64)
    target = scores[model_id]
    if lower_is_better:
        return int((values < target).sum())
    return int((values > target).sum())


def _best_group(scores: dict) -> list:
    values = np.asarray(list(scores.values()), dtype=np.float64)
    ids = list(scores.keys())
    best = values.min()
    return [ids[i] for i in np.flatnonzero(values == best)]


def cross_proxy_ranks(model_zoo: ModelZoo, proxies=trees.PROXIES) -> list:
    """For each ordered proxy pair (A, B): the rank under B of A's best
    model(s), taking the minimum over A's tie group."""
    if len(model_zoo) < 2:
        raise ValueError("need a zoo with at least 2 models")
    rows = []
    for a in proxies:
        best_a = _best_group(model_zoo.proxy_scores(a))
        for b in proxies:
            scores_b = model_zoo.proxy_scores(b)
            rank = min(rank_of(scores_b, m) for m in best_a)
            rows.append({"proxy_a": a, "proxy_b": b, "rank": rank})
    return rows


def per_point_proxy_matrix(
    model_zoo: ModelZoo,
    proxy: str,
    region_cfg: explain.LocalRegionConfig = explain.LocalRegionConfig(),
    seed: int = 0,
) -> np.ndarray:
    """(n_models, n_eval_points) contributions whose row means equal the
    cached full-sample proxy scores.

    Tree zoos read path statistics directly (global proxies give constant
    rows). Black-box zoos take each point's surrogate metrics, with
    best-possible values off the boundary.
    """
    pts = list(model_zoo.eval_points.indices)
    X = model_zoo.dataset.features[pts]
    out = np.zeros((len(model_zoo.records), len(pts)))
    for i, rec in enumerate(model_zoo.records):
        if rec.kind == "tree":
            lengths, distinct = trees.path_stats(rec.model, X)
            if proxy == "mean_path_length":
                out[i] = lengths
            elif proxy == "mean_distinct_features":
                out[i] = distinct
            elif proxy == "node_count":
                out[i] = rec.model.node_count
            elif proxy == "nonzero_features":
                out[i] = len(trees.columns_used(rec.model, model_zoo.dataset.feature_groups))
            else:
                raise ValueError(f"unknown proxy {proxy!r}")
        else:
            _, exps = explain.boundary_scan(
                lambda Z: mlp.predict_batch(rec.model, Z), pts, model_zoo.dataset,
                region_cfg, seed=seed,
            )
            best = trees.BEST_POSSIBLE_PROXIES.as_dict()[proxy]
            for j, p in enumerate(pts):
                e = exps[p]
                if e.surrogate is None:
                    out[i, j] = best
                elif proxy == "mean_path_length":
                    out[i, j] = trees.path_stats(e.surrogate, X[[j]])[0][0]
                elif proxy == "mean_distinct_features":
                    out[i, j] = trees.path_stats(e.surrogate, X[[j]])[1][0]
                elif proxy == "node_count":
                    out[i, j] = e.surrogate.node_count
                elif proxy == "nonzero_features":
                    out[i, j] = len(trees.columns_used(e.surrogate, model_zoo.dataset.feature_groups))
                else:
                    raise ValueError(f"unknown proxy {proxy!r}")
    return out


def sampled_rank_curve(
    model_zoo: ModelZoo,
    proxy: str,
    sizes=(8, 16, 32, 64, 128, 256, 512, 1000),
    repetitions: int = 50,
    seed: int = 0,
    matrix: np.ndarray | None = None,
) -> list:
    """Rank (under the full-sample proxy) of the best model found when the
    proxy is recomputed on small point subsamples."""
    ids = [r.id for r in model_zoo.records]
    if matrix is None:
        matrix = per_point_proxy_matrix(model_zoo, proxy)
    n_points = matrix.shape[1]
    full_scores = dict(zip(ids, matrix.mean(axis=1)))
    rows = []
    rng = np.random.default_rng(seed)
    for size in sizes:
        if size > n_points:
            raise ValueError(f"sample size {size} exceeds evaluation set {n_points}")
        for rep in range(repetitions):
            cols = rng.choice(n_points, size=size, replace=False)
            sub_scores = dict(zip(ids, matrix[:, cols].mean(axis=1)))
            rank = min(rank_of(full_scores, m) for m in _best_group(sub_scores))
            rows.append({"proxy": proxy, "size": size, "repetition": rep, "rank": rank})
    return rows


def curve_means(rows) -> dict:
    """size -> mean rank across repetitions."""
    acc: dict = {}
    for r in rows:
        acc.setdefault(r["size"], []).append(r["rank"])
    return {s: float(np.mean(v)) for s, v in sorted(acc.items())}


def pipeline_vs_random(
    model_zoo: ModelZoo,
    proxy: str,
    trials: int = 100,
    draws: int = 1000,
    k: int = 10,
    kappa: float = 1.0,
    seed: int = 0,
    cfg: oracle.ScoreConfig = oracle.ScoreConfig(),
) -> dict:
    """Best tie-aware rank per iteration for the zero-noise proxy-driven
    pipeline versus uniform random draws of the same size.

    Returns {"rows": per-iteration means, "pipeline_ranks": (trials, k),
    "random_ranks": (draws, k)} with prefix-minimum rank trajectories.
    """
    if k > len(model_zoo):
        raise ValueError(f"k={k} exceeds zoo size {len(model_zoo)}")
    full_scores = model_zoo.proxy_scores(proxy)
    spec = oracle.spec_for_proxy(proxy, weight=1.0, noise_sd=0.0, seed=seed)
    backend = oracle.SimulatedOracle(spec, model_zoo.dataset.feature_groups)

    pipeline_ranks = np.zeros((trials, k), dtype=np.int64)
    for t in range(trials):
        trace = bayesopt.run_pipeline(
            model_zoo, backend, iterations=k, kappa=kappa, cfg=cfg, seed=seed + 1000 * t
        )
        best = None
        for j, rec in enumerate(trace.iterations):
            r = rank_of(full_scores, rec.model_id)
            best = r if best is None else min(best, r)
            pipeline_ranks[t, j] = best

    ids = list(full_scores.keys())
    rng = np.random.default_rng(seed + 777)
    random_ranks = np.zeros((draws, k), dtype=np.int64)
    for d in range(draws):
        chosen = rng.choice(ids, size=k, replace=False)
        best = None
        for j, mid in enumerate(chosen):
            r = rank_of(full_scores, int(mid))
            best = r if best is None else min(best, r)
            random_ranks[d, j] = best

    rows = [
        {
            "proxy": proxy,
            "iteration": j + 1,
            "pipeline_mean_rank": float(pipeline_ranks[:, j].mean()),
            "random_mean_rank": float(random_ranks[:, j].mean()),
        }
        for j in range(k)
    ]
    return {"rows": rows, "pipeline_ranks": pipeline_ranks, "random_ranks": random_ranks}


# --- tabular export --------------------------------------------------------------


def export_report(rows, path, header=None) -> None:
    """Column-labeled comma-separated export; floats use repr so a re-import
    reproduces values exactly. An empty report writes a header-only file
    (pass `header` explicitly when there are no rows to infer it from)."""
    path = Path(path)
    rows = list(rows)
    if header is None:
        header = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(row[h]) for h in header])


def _format_cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _parse_cell(s: str):
    for parse in (int, float):
        try:
            return parse(s)
        except ValueError:
            continue
    return s


def import_report(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return []
        return [dict(zip(header, map(_parse_cell, row))) for row in reader]
