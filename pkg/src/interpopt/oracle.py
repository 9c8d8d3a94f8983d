"""Response-time oracles and interpretability-prior estimation.

The prior of a model is the average, over sampled points, of an
interpretability score: a response-time cap minus the mean time users take
to forward-simulate the model's prediction at a point. Two backends supply
response times: a simulated oracle (a seeded function of the explanation
shown) and aggregation of recorded human quiz responses. The raw mean
response time per model is kept alongside the score because downstream
regression works on times, not scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import explain, trees
from .data import Dataset


@dataclass(frozen=True)
class ScoreConfig:
    """Scoring knobs: the response-time cap and how many question points
    each model is evaluated on."""

    max_rt: float = 60.0
    questions_per_model: int = 8

    def __post_init__(self):
        if self.max_rt <= 0:
            raise ValueError("max_rt must be > 0")
        if self.questions_per_model < 1:
            raise ValueError("questions_per_model must be >= 1")


def interpretability_score(mean_rt: float, cfg: ScoreConfig) -> float:
    """max_rt - mean_rt, clamped to 0 above the cap. A mean response time of
    zero (nothing to ask) scores the full cap."""
    if mean_rt < 0:
        raise ValueError(f"mean_rt must be >= 0, got {mean_rt}")
    if mean_rt > cfg.max_rt:
        return 0.0
    return cfg.max_rt - mean_rt


@dataclass(frozen=True)
class QuizResponse:
    user: str
    model_id: int
    point_id: int
    rt: float  # seconds
    correct: bool


@dataclass
class OracleResult:
    point_id: int
    mean_rt: float
    score: float
    source: str  # "simulated" | "human"
    responses: tuple = ()


@dataclass(frozen=True)
class SimulatedOracleSpec:
    """Response-time model: base + weighted explanation metrics + noise.

    The weights apply to the explanation actually shown for the answered
    point: its path length and distinct-feature count at that point, and the
    explanation's node count and nonzero-feature count.
    """

    base_rt: float = 0.0
    weight_path_length: float = 0.0
    weight_distinct_features: float = 0.0
    weight_node_count: float = 0.0
    weight_nonzero_features: float = 0.0
    noise_sd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.base_rt < 0 or self.noise_sd < 0:
            raise ValueError("base_rt and noise_sd must be >= 0")

    def to_dict(self) -> dict:
        return {
            "base_rt": self.base_rt,
            "weight_path_length": self.weight_path_length,
            "weight_distinct_features": self.weight_distinct_features,
            "weight_node_count": self.weight_node_count,
            "weight_nonzero_features": self.weight_nonzero_features,
            "noise_sd": self.noise_sd,
            "seed": self.seed,
        }


_PROXY_WEIGHT_FIELD = {
    "mean_path_length": "weight_path_length",
    "mean_distinct_features": "weight_distinct_features",
    "node_count": "weight_node_count",
    "nonzero_features": "weight_nonzero_features",
}


def spec_for_proxy(proxy: str, weight: float = 1.0, noise_sd: float = 0.0, seed: int = 0) -> SimulatedOracleSpec:
    """Oracle whose signal is exactly one proxy metric."""
    if proxy not in _PROXY_WEIGHT_FIELD:
        raise ValueError(f"unknown proxy {proxy!r}")
    return SimulatedOracleSpec(noise_sd=noise_sd, seed=seed, **{_PROXY_WEIGHT_FIELD[proxy]: weight})


def save_oracle_spec(spec: SimulatedOracleSpec, path) -> None:
    lines = [f"{k} = {v!r}" for k, v in spec.to_dict().items()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_oracle_spec(path) -> SimulatedOracleSpec:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key] = int(val) if key == "seed" else float(val)
    return SimulatedOracleSpec(**values)


class SimulatedOracle:
    """Deterministic stand-in for human subjects.

    Response times are a pure function of (seed, model id, point id, draw
    index), so repeated runs and parallel workers agree exactly.
    """

    source = "simulated"

    def __init__(self, spec: SimulatedOracleSpec, feature_groups=None):
        self.spec = spec
        self.feature_groups = feature_groups

    def _metrics(self, explanation: trees.TreeModel, x: np.ndarray) -> np.ndarray:
        lengths, distinct = trees.path_stats(explanation, x[None, :])
        nonzero = len(trees.columns_used(explanation, self.feature_groups))
        return np.array([lengths[0], distinct[0], explanation.node_count, nonzero])

    def response_time(self, model_id: int, explanation: trees.TreeModel, x, point_id: int, draw: int = 0) -> float:
        s = self.spec
        weights = np.array(
            [s.weight_path_length, s.weight_distinct_features, s.weight_node_count, s.weight_nonzero_features]
        )
        rt = s.base_rt + float(weights @ self._metrics(explanation, np.asarray(x, dtype=np.float64)))
        if s.noise_sd > 0:
            rng = np.random.default_rng([s.seed, model_id, point_id, draw])
            rt += s.noise_sd * float(rng.standard_normal())
        return max(0.0, rt)

    def mean_rt(self, model_id: int, explanation: trees.TreeModel, x, point_id: int, n_draws: int = 1) -> float:
        if n_draws < 1:
            raise ValueError("n_draws must be >= 1")
        return float(
            np.mean([self.response_time(model_id, explanation, x, point_id, d) for d in range(n_draws)])
        )

    def mean_rt_batch(self, model_id: int, explanation: trees.TreeModel, X, point_ids, n_draws: int = 1) -> np.ndarray:
        """Vectorized mean_rt over many points of one explanation; identical
        values to the scalar path (noise streams are still per-point)."""
        X = np.asarray(X, dtype=np.float64)
        s = self.spec
        lengths, distinct = trees.path_stats(explanation, X)
        nonzero = len(trees.columns_used(explanation, self.feature_groups))
        rts = (
            s.base_rt
            + s.weight_path_length * lengths
            + s.weight_distinct_features * distinct
            + s.weight_node_count * explanation.node_count
            + s.weight_nonzero_features * nonzero
        )
        if s.noise_sd > 0:
            out = np.empty(len(X))
            for i, pid in enumerate(point_ids):
                draws = [
                    max(0.0, rts[i] + s.noise_sd * float(
                        np.random.default_rng([s.seed, model_id, int(pid), d]).standard_normal()
                    ))
                    for d in range(n_draws)
                ]
                out[i] = float(np.mean(draws))
            return out
        return np.maximum(rts, 0.0)


@dataclass
class PriorEstimate:
    prior: float  # mean interpretability score over question points
    mean_rt: float  # the quantity downstream regression consumes
    per_point: list
    boundary_fraction: float | None = None
    warnings: tuple = ()


def estimate_prior_global(
    explanation: trees.TreeModel,
    model_id: int,
    X_points: np.ndarray,
    point_ids,
    oracle_backend,
    cfg: ScoreConfig = ScoreConfig(),
    n_draws: int = 1,
) -> PriorEstimate:
    """Monte-Carlo prior for a directly-readable model: one oracle call per
    question point, scores averaged."""
    point_ids = list(point_ids)
    if not point_ids:
        raise ValueError("no question points supplied")
    batch = getattr(oracle_backend, "mean_rt_batch", None)
    if batch is not None:
        try:
            rts = [float(v) for v in batch(model_id, explanation, X_points, point_ids, n_draws)]
        except Exception as err:
            raise RuntimeError(f"oracle failed on batch: {err}") from err
    else:
        rts = []
        for x, pid in zip(np.asarray(X_points, dtype=np.float64), point_ids):
            try:
                rts.append(oracle_backend.mean_rt(model_id, explanation, x, int(pid), n_draws))
            except Exception as err:
                raise RuntimeError(f"oracle failed at point {pid}: {err}") from err
    results = [
        OracleResult(int(pid), rt, interpretability_score(rt, cfg), oracle_backend.source)
        for pid, rt in zip(point_ids, rts)
    ]
    prior = float(np.mean([r.score for r in results]))
    mean_rt = float(np.mean([r.mean_rt for r in results]))
    return PriorEstimate(prior, mean_rt, results)


def estimate_prior_local(
    predict_fn,
    model_id: int,
    dataset: Dataset,
    oracle_backend,
    cfg: ScoreConfig = ScoreConfig(),
    region_cfg: explain.LocalRegionConfig = explain.LocalRegionConfig(),
    scan_point_ids=None,
    seed: int = 0,
    n_draws: int = 1,
) -> PriorEstimate:
    """Boundary-decomposed prior for a black-box model.

    The boundary fraction q comes from a surrogate scan with no oracle
    calls; the oracle is asked only about boundary members' surrogates.
    Returns q * mean score + (1-q) * max_rt, with mean_rt defined as the
    boundary-weighted mean response time (max_rt minus the prior).
    """
    if scan_point_ids is None:
        raise ValueError("scan_point_ids is required")
    q, exps = explain.boundary_scan(predict_fn, scan_point_ids, dataset, region_cfg, seed=seed)
    warnings = []
    members = [e for e in exps.values() if e.surrogate is not None]
    if q > 0 and not members:
        warnings.append("boundary members found but none has a faithful surrogate; treating q as 0")
        q = 0.0
    results = []
    if q > 0:
        ask = members[: cfg.questions_per_model]
        for exp in ask:
            x = dataset.features[exp.anchor_index]
            try:
                rt = oracle_backend.mean_rt(model_id, exp.surrogate, x, exp.anchor_index, n_draws)
            except Exception as err:
                raise RuntimeError(f"oracle failed at point {exp.anchor_index}: {err}") from err
            results.append(
                OracleResult(exp.anchor_index, rt, interpretability_score(rt, cfg), oracle_backend.source)
            )
        mean_score = float(np.mean([r.score for r in results]))
    else:
        mean_score = 0.0
    prior = q * mean_score + (1.0 - q) * cfg.max_rt
    return PriorEstimate(prior, cfg.max_rt - prior, results, boundary_fraction=q, warnings=tuple(warnings))


def aggregate_quiz(
    responses,
    cfg: ScoreConfig = ScoreConfig(),
    exclude_extremes: bool = False,
    min_rt: float = 5.0,
    max_rt_exclusion: float = 300.0,
):
    """Mean response times from recorded human answers.

    Returns (per_point, per_model): per (model, point) an OracleResult with
    the mean over users, and per model the mean of its per-point means.
    With exclusion on, responses faster than 5 s or slower than 5 minutes
    are dropped first; a point left with no responses is an error.
    """
    responses = list(responses)
    kept = [
        r
        for r in responses
        if not exclude_extremes or (min_rt <= r.rt <= max_rt_exclusion)
    ]
    by_point: dict = {}
    for r in responses:
        by_point.setdefault((r.model_id, r.point_id), [])
    for r in kept:
        by_point[(r.model_id, r.point_id)].append(r)
    per_point = {}
    for (mid, pid), rs in sorted(by_point.items()):
        if not rs:
            raise ValueError(f"no usable responses for model {mid}, point {pid}")
        # summation over sorted values: exactly permutation-invariant
        mean = float(np.mean(np.sort([r.rt for r in rs])))
        per_point[(mid, pid)] = OracleResult(
            pid, mean, interpretability_score(mean, cfg), "human", tuple(rs)
        )
    per_model = {}
    for (mid, _), result in per_point.items():
        per_model.setdefault(mid, []).append(result.mean_rt)
    return per_point, {mid: float(np.mean(v)) for mid, v in per_model.items()}
