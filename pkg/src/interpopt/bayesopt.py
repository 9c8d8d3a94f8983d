"""Gaussian-process regression over model feature vectors, lower-confidence-
bound acquisition, and the sequential evaluation loop that hunts for the
most interpretable accurate model in as few oracle queries as possible.

The GP regresses each evaluated model's mean response time against its
kernel feature vector (an RBF between importance vectors), with observations
standardized internally and hyperparameters refit each iteration by
restarted gradient ascent on the log marginal likelihood.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky
from scipy.optimize import minimize

from . import explain, mlp, oracle, trees
from .zoo import ModelZoo

JITTER = 1e-7
LOG_BOUNDS = (math.log(1e-4), math.log(1e4))
RESTART_RANGE = (1e-2, 1e2)


@dataclass(frozen=True)
class KernelParams:
    signal_variance: float
    length_scale: float
    jitter: float = JITTER

    def __post_init__(self):
        if self.signal_variance <= 0 or self.length_scale <= 0:
            raise ValueError("kernel parameters must be positive")


def rbf_kernel(f1: np.ndarray, f2: np.ndarray, params: KernelParams) -> float:
    f1 = np.asarray(f1, dtype=np.float64)
    f2 = np.asarray(f2, dtype=np.float64)
    if f1.shape != f2.shape:
        raise ValueError(f"dimension mismatch: {f1.shape} vs {f2.shape}")
    d2 = float(((f1 - f2) ** 2).sum())
    return params.signal_variance * math.exp(-d2 / (2.0 * params.length_scale**2))


def _sqdist(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    return ((F[:, None, :] - G[None, :, :]) ** 2).sum(axis=2)


def _kernel_matrix(D2: np.ndarray, params: KernelParams) -> np.ndarray:
    return params.signal_variance * np.exp(-D2 / (2.0 * params.length_scale**2))


def log_marginal_likelihood(
    D2: np.ndarray, y_norm: np.ndarray, params: KernelParams
) -> tuple[float, np.ndarray]:
    """LML and its gradient with respect to (log signal_variance, log length_scale)."""
    n = len(y_norm)
    K = _kernel_matrix(D2, params) + params.jitter * np.eye(n)
    try:
        L = cholesky(K, lower=True)
    except np.linalg.LinAlgError:
        return -np.inf, np.array([np.nan, np.nan])
    alpha = cho_solve((L, True), y_norm)
    lml = -0.5 * float(y_norm @ alpha) - float(np.log(np.diag(L)).sum()) - 0.5 * n * math.log(2 * math.pi)
    # dLML/dtheta = 0.5 tr((alpha alpha^T - K^-1) dK/dtheta), theta in log space
    K_inv = cho_solve((L, True), np.eye(n))
    outer = np.outer(alpha, alpha) - K_inv
    K_rbf = _kernel_matrix(D2, params)
    d_sv = 0.5 * float((outer * K_rbf).sum())
    d_ls = 0.5 * float((outer * (K_rbf * D2 / params.length_scale**2)).sum())
    return lml, np.array([d_sv, d_ls])


@dataclass
class GPState:
    """Fitted posterior over model feature vectors."""

    model_ids: list
    F: np.ndarray  # (n, P) feature vectors
    y: np.ndarray  # raw observations (seconds)
    y_mean: float
    y_sd: float
    params: KernelParams
    lml: float
    _chol: np.ndarray = field(repr=False, default=None)
    _alpha: np.ndarray = field(repr=False, default=None)


def _finalize_state(model_ids, F, y, y_mean, y_sd, params, lml) -> GPState:
    y_norm = (y - y_mean) / y_sd
    K = _kernel_matrix(_sqdist(F, F), params) + params.jitter * np.eye(len(y))
    L = cholesky(K, lower=True)
    alpha = cho_solve((L, True), y_norm)
    return GPState(list(model_ids), F, y, y_mean, y_sd, params, lml, L, alpha)


def make_gp(model_ids, F, y, params: KernelParams) -> GPState:
    """GP with fixed hyperparameters (no marginal-likelihood fitting)."""
    F = np.asarray(F, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    y_mean = float(y.mean())
    y_sd = float(y.std()) or 1.0
    D2 = _sqdist(F, F)
    lml, _ = log_marginal_likelihood(D2, (y - y_mean) / y_sd, params)
    return _finalize_state(model_ids, F, y, y_mean, y_sd, params, lml)


def gp_fit(model_ids, F, y, restarts: int = 10, seed: int = 0) -> GPState:
    """Maximize the log marginal likelihood from `restarts` log-uniform
    starting points in [1e-2, 1e2]^2; the best restart wins."""
    F = np.asarray(F, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(F) < 1:
        raise ValueError("need at least one labeled model")
    if not np.isfinite(F).all():
        raise ValueError("feature vectors must be finite")
    y_mean = float(y.mean())
    y_sd = float(y.std()) or 1.0
    y_norm = (y - y_mean) / y_sd
    D2 = _sqdist(F, F)

    def objective(log_theta):
        params = KernelParams(math.exp(log_theta[0]), math.exp(log_theta[1]))
        lml, grad = log_marginal_likelihood(D2, y_norm, params)
        if not np.isfinite(lml):
            return 1e25, np.zeros(2)
        return -lml, -grad

    rng = np.random.default_rng(seed)
    lo, hi = np.log(RESTART_RANGE[0]), np.log(RESTART_RANGE[1])
    best = None
    for _ in range(restarts):
        x0 = rng.uniform(lo, hi, size=2)
        res = minimize(
            objective, x0, jac=True, method="L-BFGS-B",
            bounds=[LOG_BOUNDS, LOG_BOUNDS],
        )
        if not np.isfinite(res.fun):
            continue
        if best is None or res.fun < best.fun:
            best = res
    if best is None:
        raise RuntimeError("log marginal likelihood was non-finite at every restart")
    params = KernelParams(math.exp(best.x[0]), math.exp(best.x[1]))
    return _finalize_state(model_ids, F, y, y_mean, y_sd, params, -float(best.fun))


def gp_predict(gp: GPState, f: np.ndarray) -> tuple[float, float]:
    """Posterior mean and standard deviation at f, in observation units."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (gp.F.shape[1],):
        raise ValueError(f"expected feature vector of length {gp.F.shape[1]}, got {f.shape}")
    k_star = _kernel_matrix(_sqdist(gp.F, f[None, :]), gp.params)[:, 0]
    mu_norm = float(k_star @ gp._alpha)
    v = cho_solve((gp._chol, True), k_star)
    var_norm = gp.params.signal_variance - float(k_star @ v)
    var_norm = max(var_norm, 0.0)  # clamp round-off
    return mu_norm * gp.y_sd + gp.y_mean, math.sqrt(var_norm) * gp.y_sd


def acquire(gp: GPState, candidates, kappa: float = 1.0) -> int:
    """Lower-confidence-bound winner: argmin of mu - kappa*sigma over the
    unlabeled candidates [(model_id, feature_vector), ...]; ties go to the
    lowest model id."""
    candidates = sorted(candidates, key=lambda c: c[0])
    if not candidates:
        raise ValueError("no unlabeled candidates")
    best_id, best_val = None, None
    for model_id, f in candidates:
        mu, sigma = gp_predict(gp, f)
        val = mu - kappa * sigma
        if best_val is None or val < best_val:
            best_id, best_val = model_id, val
    return best_id


@dataclass
class IterationRecord:
    iteration: int
    model_id: int
    acquisition_value: float | None  # None for the seeded first pick
    observed_mean_rt: float
    estimated_prior: float
    posterior: list  # [(candidate id, mu, sigma)] over the remaining pool

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "model_id": self.model_id,
            "acquisition_value": self.acquisition_value,
            "observed_mean_rt": self.observed_mean_rt,
            "estimated_prior": self.estimated_prior,
            "posterior": [[i, m, s] for i, m, s in self.posterior],
        }


@dataclass
class PipelineTrace:
    iterations: list
    final_model_id: int
    seed: int
    kappa: float

    def evaluated_ids(self) -> list:
        return [rec.model_id for rec in self.iterations]

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / "trace.jsonl", "w") as fh:
            for rec in self.iterations:
                fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")
        summary = {
            "final_model_id": self.final_model_id,
            "seed": self.seed,
            "kappa": self.kappa,
            "iterations": len(self.iterations),
            "evaluated": self.evaluated_ids(),
        }
        (directory / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True))


class PipelineAborted(RuntimeError):
    """Oracle failure mid-run; carries the iterations completed so far."""

    def __init__(self, message: str, partial: list):
        super().__init__(message)
        self.partial = partial


def run_pipeline(
    model_zoo: ModelZoo,
    oracle_backend,
    iterations: int = 10,
    kappa: float = 1.0,
    cfg: oracle.ScoreConfig = oracle.ScoreConfig(),
    seed: int = 0,
    question_point_ids=None,
    region_cfg: explain.LocalRegionConfig = explain.LocalRegionConfig(),
    scan_point_count: int = 100,
    gp_restarts: int = 10,
    n_draws: int = 1,
) -> PipelineTrace:
    """Sequentially evaluate `iterations` zoo models, starting from a seeded
    random pick and then following the LCB acquisition, refitting the GP on
    all labels each round. The reported final model maximizes
    likelihood x estimated prior among the evaluated ones.
    """
    if len(model_zoo) == 0:
        raise ValueError("empty zoo")
    if iterations > len(model_zoo):
        raise ValueError(f"iterations={iterations} exceeds zoo size {len(model_zoo)}")
    rng = np.random.default_rng(seed)
    if question_point_ids is None:
        pool = list(model_zoo.eval_points.indices)
        take = min(cfg.questions_per_model, len(pool))
        question_point_ids = [pool[i] for i in rng.choice(len(pool), size=take, replace=False)]
    else:
        question_point_ids = list(question_point_ids)
    Xq = model_zoo.dataset.features[question_point_ids]

    def evaluate(record) -> oracle.PriorEstimate:
        if record.kind == "tree":
            return oracle.estimate_prior_global(
                record.model, record.id, Xq, question_point_ids, oracle_backend, cfg, n_draws
            )
        scan_ids = list(model_zoo.eval_points.indices)[:scan_point_count]
        return oracle.estimate_prior_local(
            lambda Z: mlp.predict_batch(record.model, Z),
            record.id,
            model_zoo.dataset,
            oracle_backend,
            cfg,
            region_cfg,
            scan_point_ids=scan_ids,
            seed=seed,
            n_draws=n_draws,
        )

    by_id = {r.id: r for r in model_zoo.records}
    labeled: list[IterationRecord] = []
    unlabeled = sorted(by_id)
    first = int(rng.choice(unlabeled))

    current, acq_val = first, None
    for it in range(1, iterations + 1):
        record = by_id[current]
        try:
            estimate = evaluate(record)
        except RuntimeError as err:
            raise PipelineAborted(str(err), labeled) from err
        unlabeled.remove(current)
        posterior: list = []
        if unlabeled and len(labeled) + 1 < iterations:
            gp = gp_fit(
                [rec.model_id for rec in labeled] + [current],
                np.vstack([by_id[rec.model_id].importances for rec in labeled] + [record.importances]),
                np.asarray([rec.observed_mean_rt for rec in labeled] + [estimate.mean_rt]),
                restarts=gp_restarts,
                seed=seed + it,
            )
            posterior = [
                (mid, *gp_predict(gp, by_id[mid].importances)) for mid in unlabeled
            ]
        labeled.append(
            IterationRecord(it, current, acq_val, estimate.mean_rt, estimate.prior, posterior)
        )
        if unlabeled and len(labeled) < iterations:
            best_id, best_val = None, None
            for mid, mu, sigma in posterior:
                val = mu - kappa * sigma
                if best_val is None or val < best_val:
                    best_id, best_val = mid, val
            current, acq_val = best_id, best_val

    def map_key(rec: IterationRecord):
        score = by_id[rec.model_id].silf_likelihood * rec.estimated_prior
        return (-score, rec.observed_mean_rt, rec.model_id)

    final = min(labeled, key=map_key).model_id
    return PipelineTrace(labeled, final, seed, kappa)
