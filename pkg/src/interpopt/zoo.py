"""Generation of the diverse, accuracy-filtered candidate model collection.

Candidates are fit with hyperparameters drawn uniformly from fixed menus,
post-pruned (trees), filtered by a validation accuracy threshold expressed
through a soft insensitive loss (SILF) likelihood, deduplicated, and stored
with their kernel feature vector and interpretability proxy scores.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import explain, mlp, trees
from .data import VALIDATE, Dataset, PointSet, load_dataset, sample_points, save_dataset

THRESHOLD_IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class SilfParams:
    """SILF likelihood parameters; flat above the implied accuracy threshold."""

    epsilon: float
    beta: float
    c: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must be in (0,1]")
        if self.c <= 0:
            raise ValueError("c must be > 0")

    @property
    def accuracy_threshold(self) -> float:
        return 1.0 - (1.0 - self.beta) * self.epsilon

    @staticmethod
    def for_threshold(threshold: float, beta: float = 0.5, c: float = 100.0) -> "SilfParams":
        """Solve for epsilon so the flat region starts exactly at `threshold`."""
        if not 0.0 < threshold < 1.0:
            raise ValueError("threshold must be in (0,1)")
        epsilon = (1.0 - threshold) / (1.0 - beta)
        p = SilfParams(epsilon, beta, c)
        assert abs(p.accuracy_threshold - threshold) < THRESHOLD_IDENTITY_TOL
        return p

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "beta": self.beta, "c": self.c}


def soft_insensitive_loss(y: float, epsilon: float, beta: float) -> float:
    """Piecewise SILF: zero inside the insensitive band, quadratic across the
    transition, linear beyond it."""
    if y < 0:
        raise ValueError(f"SILF argument must be >= 0, got {y}")
    lo = (1.0 - beta) * epsilon
    hi = (1.0 + beta) * epsilon
    if y <= lo:
        return 0.0
    if y <= hi:
        return (y - lo) ** 2 / (4.0 * beta * epsilon)
    return y - epsilon


def likelihood(accuracy: float, params: SilfParams) -> float:
    """Unnormalized model likelihood exp(-c * SILF(1 - accuracy))."""
    return math.exp(-params.c * soft_insensitive_loss(1.0 - accuracy, params.epsilon, params.beta))


@dataclass
class ModelRecord:
    id: int
    kind: str  # "tree" | "mlp"
    model: object
    accuracy: float
    silf_likelihood: float
    importances: np.ndarray
    proxies: trees.ProxyScores
    hyperparams: dict


@dataclass
class ModelZoo:
    dataset: Dataset
    records: list
    seed: int
    eval_points: PointSet
    silf: SilfParams
    model_class: str

    def __len__(self) -> int:
        return len(self.records)

    def record(self, model_id: int) -> ModelRecord:
        for r in self.records:
            if r.id == model_id:
                return r
        raise KeyError(f"no model with id {model_id}")

    def proxy_scores(self, proxy: str) -> dict:
        return {r.id: r.proxies.as_dict()[proxy] for r in self.records}


class ZooGenerationError(RuntimeError):
    pass


def sample_tree_hyperparams(rng: np.random.Generator, n_features: int) -> trees.TreeHyperparams:
    """The randomized tree menu: depth 1-7, leaf minimum {1,10,100},
    feature-subset size 2..P, best or random splitting."""
    return trees.TreeHyperparams(
        max_depth=int(rng.integers(1, 8)),
        min_samples_leaf=int(rng.choice([1, 10, 100])),
        max_features=int(rng.integers(2, n_features + 1)),
        splitter=str(rng.choice(["best", "random"])),
        seed=int(rng.integers(0, 2**31)),
    )


def sample_mlp_hyperparams(rng: np.random.Generator) -> mlp.MlpHyperparams:
    """The randomized network menu: five architectures, relu/tanh, and the
    {0, 1e-4, 1e-3, 1e-2} weight-penalty grids. The input-gradient penalty
    menu is pinned to zero here (no second-order backprop in this trainer)."""
    return mlp.MlpHyperparams(
        architecture=mlp.ARCHITECTURE_MENU[int(rng.integers(len(mlp.ARCHITECTURE_MENU)))],
        activation=str(rng.choice(mlp.ACTIVATIONS)),
        l1_weight=float(rng.choice(mlp.PENALTY_MENU)),
        l2_weight=float(rng.choice(mlp.PENALTY_MENU)),
        epochs=50,
        batch_size=512,
        seed=int(rng.integers(0, 2**31)),
    )


def _encoded_feature_meta(dataset: Dataset) -> list:
    meta = []
    for g in dataset.feature_groups.values():
        if g.kind == "continuous":
            meta.append({"column": g.name, "value": None})
        else:
            meta.extend({"column": g.name, "value": v} for v in g.values)
    return meta


def generate_zoo(
    dataset: Dataset,
    model_class: str,
    count: int,
    silf_params: SilfParams,
    seed: int = 0,
    restarts: int | None = None,
    eval_point_count: int = 1000,
    mlp_proxy_points: int = 100,
    region_cfg: explain.LocalRegionConfig | None = None,
) -> ModelZoo:
    """Fit randomized candidates until `count` survive the accuracy threshold
    or the restart budget (default 10x count) runs out.

    Survivors get a kernel feature vector (Gini importances for trees,
    gradient importances for networks), proxy scores on a shared evaluation
    point set, and exact-duplicate elimination on (importances, proxies).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if model_class not in ("tree", "mlp"):
        raise ValueError(f"unknown model class {model_class!r}")
    budget = 10 * count if restarts is None else restarts
    threshold = silf_params.accuracy_threshold
    if threshold > 1.0:
        raise ZooGenerationError(f"accuracy threshold {threshold} is unreachable")

    X_train, y_train = dataset.partition("train")
    X_val, y_val = dataset.partition(VALIDATE)
    n_val = len(dataset.rows_in(VALIDATE))
    eval_points = sample_points(dataset, VALIDATE, min(eval_point_count, n_val), seed)
    X_eval = dataset.features[list(eval_points.indices)]
    feature_meta = _encoded_feature_meta(dataset)

    rng = np.random.default_rng(seed)
    records: list[ModelRecord] = []
    seen = set()
    best_seen = 0.0
    region_cfg = region_cfg or explain.LocalRegionConfig()

    for attempt in range(budget):
        if len(records) >= count:
            break
        if model_class == "tree":
            hp = sample_tree_hyperparams(rng, dataset.n_features)
            model = trees.prune(trees.fit_tree(X_train, y_train, hp), X_val, y_val)
            acc = trees.accuracy(model, X_val, y_val)
        else:
            hp = sample_mlp_hyperparams(rng)
            try:
                model = mlp.fit_mlp(X_train, y_train, hp)
            except mlp.TrainingDiverged:
                continue
            acc = mlp.accuracy(model, X_val, y_val)
        best_seen = max(best_seen, acc)
        if acc < threshold:
            continue

        if model_class == "tree":
            model.meta["encoded_features"] = feature_meta
            importances = trees.feature_importances(model)
            proxies = trees.proxy_scores(model, X_eval, dataset.feature_groups)
        else:
            importances = mlp.gradient_importances(model, X_eval)
            scan_points = list(eval_points.indices)[: min(mlp_proxy_points, len(eval_points))]
            _, exps = explain.boundary_scan(
                lambda Z: mlp.predict_batch(model, Z), scan_points, dataset, region_cfg,
                seed=seed + attempt,
            )
            proxies = explain.local_proxy_scores(exps, dataset)

        signature = (importances.tobytes(), tuple(proxies.as_dict().values()))
        if signature in seen:
            continue
        seen.add(signature)
        records.append(
            ModelRecord(
                id=len(records),
                kind=model_class,
                model=model,
                accuracy=float(acc),
                silf_likelihood=likelihood(float(acc), silf_params),
                importances=importances,
                proxies=proxies,
                hyperparams=hp.to_dict(),
            )
        )

    if not records:
        raise ZooGenerationError(
            f"no model reached accuracy {threshold} in {budget} restarts (best seen: {best_seen:.4f})"
        )
    return ModelZoo(dataset, records, seed, eval_points, silf_params, model_class)


# --- persistence ---------------------------------------------------------------


def save_zoo(zoo: ModelZoo, directory) -> None:
    """Zoo directory: manifest.json + dataset.npz + one model file per record."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_dataset(zoo.dataset, directory / "dataset.npz")
    manifest = {
        "format": "interpopt.zoo/1",
        "model_class": zoo.model_class,
        "seed": zoo.seed,
        "silf": zoo.silf.to_dict(),
        "eval_points": {
            "indices": list(zoo.eval_points.indices),
            "partition": zoo.eval_points.partition,
            "seed": zoo.eval_points.seed,
        },
        "records": [],
    }
    for r in zoo.records:
        fname = f"model_{r.id:04d}." + ("json" if r.kind == "tree" else "npz")
        if r.kind == "tree":
            trees.save_tree(r.model, directory / fname)
        else:
            mlp.save_mlp(r.model, directory / fname)
        manifest["records"].append(
            {
                "id": r.id,
                "kind": r.kind,
                "accuracy": r.accuracy,
                "silf_likelihood": r.silf_likelihood,
                "importances": [float(v) for v in r.importances],
                "proxies": r.proxies.as_dict(),
                "hyperparams": r.hyperparams,
                "model_file": fname,
            }
        )
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=1))


def load_zoo(directory) -> ModelZoo:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    if manifest.get("format") != "interpopt.zoo/1":
        raise ValueError("unrecognized zoo manifest format")
    dataset = load_dataset(directory / "dataset.npz")
    records = []
    for rec in manifest["records"]:
        if rec["kind"] == "tree":
            model = trees.load_tree(directory / rec["model_file"])
        else:
            model = mlp.load_mlp(directory / rec["model_file"])
        proxies = trees.ProxyScores(**rec["proxies"])
        records.append(
            ModelRecord(
                id=rec["id"],
                kind=rec["kind"],
                model=model,
                accuracy=rec["accuracy"],
                silf_likelihood=rec["silf_likelihood"],
                importances=np.asarray(rec["importances"]),
                proxies=proxies,
                hyperparams=rec["hyperparams"],
            )
        )
    ep = manifest["eval_points"]
    return ModelZoo(
        dataset=dataset,
        records=records,
        seed=manifest["seed"],
        eval_points=PointSet(tuple(ep["indices"]), ep["partition"], ep["seed"]),
        silf=SilfParams(**manifest["silf"]),
        model_class=manifest["model_class"],
    )
