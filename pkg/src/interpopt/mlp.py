"""Small feed-forward classifiers used as the non-interpretable model class.

Plain numpy: manual forward/backward passes, adaptive-moment (Adam) updates,
softmax cross-entropy with optional L1/L2 weight penalties, and input
gradients for the model-similarity kernel. Training is deterministic per
seed. An empty architecture tuple gives a linear (logistic) model, used by
tests as a convex fixture.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ARCHITECTURE_MENU = ((100, 100, 100), (100, 100), (100,), (25,), (250,))
PENALTY_MENU = (0.0, 1e-4, 1e-3, 1e-2)
ACTIVATIONS = ("relu", "tanh")


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"non-finite loss at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class MlpHyperparams:
    architecture: tuple[int, ...]
    activation: str = "relu"
    l1_weight: float = 0.0
    l2_weight: float = 0.0
    epochs: int = 50
    batch_size: int = 512
    learning_rate: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if any(w < 1 for w in self.architecture):
            raise ValueError("layer widths must be positive")

    def to_dict(self) -> dict:
        return {
            "architecture": list(self.architecture),
            "activation": self.activation,
            "l1_weight": self.l1_weight,
            "l2_weight": self.l2_weight,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "MlpHyperparams":
        d = dict(d)
        d["architecture"] = tuple(d["architecture"])
        return MlpHyperparams(**d)


@dataclass
class MlpModel:
    weights: list  # [(fan_in, fan_out) arrays], output layer last (2 logits)
    biases: list
    activation: str
    hyperparams: MlpHyperparams
    loss_history: list = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]


def _act(z: np.ndarray, kind: str) -> np.ndarray:
    return np.maximum(z, 0.0) if kind == "relu" else np.tanh(z)


def _act_grad(z: np.ndarray, kind: str) -> np.ndarray:
    return (z > 0).astype(np.float64) if kind == "relu" else 1.0 - np.tanh(z) ** 2


def _forward(model_w, model_b, activation, X):
    """Returns (logits, pre-activations per hidden layer)."""
    a = X
    zs = []
    for W, b in zip(model_w[:-1], model_b[:-1]):
        z = a @ W + b
        zs.append(z)
        a = _act(z, activation)
    logits = a @ model_w[-1] + model_b[-1]
    return logits, zs


def logits(model: MlpModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise ValueError(f"expected {model.n_features} features, got {x.shape}")
    out, _ = _forward(model.weights, model.biases, model.activation, x[None, :])
    return out[0]


def logits_batch(model: MlpModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected (n, {model.n_features}) matrix, got {X.shape}")
    out, _ = _forward(model.weights, model.biases, model.activation, X)
    return out


def predict_mlp(model: MlpModel, x: np.ndarray) -> int:
    return int(np.argmax(logits(model, x)))  # tie breaks to label 0


def predict_batch(model: MlpModel, X: np.ndarray) -> np.ndarray:
    return np.argmax(logits_batch(model, X), axis=1)


def accuracy(model: MlpModel, X: np.ndarray, y: np.ndarray) -> float:
    return float((predict_batch(model, X) == np.asarray(y)).mean())


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _loss(weights, biases, activation, X, y, l1, l2) -> float:
    out, _ = _forward(weights, biases, activation, X)
    p = _softmax(out)
    nll = -np.log(np.clip(p[np.arange(len(y)), y], 1e-300, None)).mean()
    penalty = sum(l1 * np.abs(W).sum() + l2 * (W**2).sum() for W in weights)
    return float(nll + penalty)


def fit_mlp(X: np.ndarray, y: np.ndarray, hp: MlpHyperparams) -> MlpModel:
    """Train with Adam on cross-entropy plus L1/L2 weight penalties.

    Full-batch loss is recorded after every epoch; a non-finite loss raises
    TrainingDiverged naming the epoch.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise ValueError("training partition is empty")
    if len(np.unique(y)) < 2:
        raise ValueError("training partition must contain both classes")
    rng = np.random.default_rng(hp.seed)
    sizes = [X.shape[1], *hp.architecture, 2]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = np.sqrt(2.0 / fan_in) if hp.activation == "relu" else np.sqrt(1.0 / fan_in)
        weights.append(rng.standard_normal((fan_in, fan_out)) * scale)
        biases.append(np.zeros(fan_out))

    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m_w = [np.zeros_like(W) for W in weights]
    v_w = [np.zeros_like(W) for W in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]
    step = 0
    batch = min(hp.batch_size, len(X))
    history = []
    for epoch in range(hp.epochs):
        order = rng.permutation(len(X))
        for start in range(0, len(X), batch):
            idx = order[start : start + batch]
            Xb, yb = X[idx], y[idx]
            # forward with caches
            a = Xb
            acts = [a]
            zs = []
            for W, b in zip(weights[:-1], biases[:-1]):
                z = a @ W + b
                zs.append(z)
                a = _act(z, hp.activation)
                acts.append(a)
            out = a @ weights[-1] + biases[-1]
            p = _softmax(out)
            delta = p.copy()
            delta[np.arange(len(yb)), yb] -= 1.0
            delta /= len(yb)
            # backward
            grads_w = [None] * len(weights)
            grads_b = [None] * len(biases)
            for layer in range(len(weights) - 1, -1, -1):
                grads_w[layer] = acts[layer].T @ delta
                grads_b[layer] = delta.sum(axis=0)
                if layer > 0:
                    delta = (delta @ weights[layer].T) * _act_grad(zs[layer - 1], hp.activation)
            step += 1
            corr1 = 1.0 - beta1**step
            corr2 = 1.0 - beta2**step
            for layer, (gW, gb) in enumerate(zip(grads_w, grads_b)):
                gW = gW + hp.l1_weight * np.sign(weights[layer]) + 2.0 * hp.l2_weight * weights[layer]
                m_w[layer] = beta1 * m_w[layer] + (1 - beta1) * gW
                v_w[layer] = beta2 * v_w[layer] + (1 - beta2) * gW**2
                weights[layer] -= hp.learning_rate * (m_w[layer] / corr1) / (np.sqrt(v_w[layer] / corr2) + eps)
                m_b[layer] = beta1 * m_b[layer] + (1 - beta1) * gb
                v_b[layer] = beta2 * v_b[layer] + (1 - beta2) * gb**2
                biases[layer] -= hp.learning_rate * (m_b[layer] / corr1) / (np.sqrt(v_b[layer] / corr2) + eps)
        epoch_loss = _loss(weights, biases, hp.activation, X, y, hp.l1_weight, hp.l2_weight)
        if not np.isfinite(epoch_loss):
            raise TrainingDiverged(epoch)
        history.append(epoch_loss)
    return MlpModel(weights, biases, hp.activation, hp, history)


def input_gradients(model: MlpModel, X: np.ndarray, class_index: int) -> np.ndarray:
    """d logit[class_index] / d x for every row of X; shape (n, P)."""
    X = np.asarray(X, dtype=np.float64)
    _, zs = _forward(model.weights, model.biases, model.activation, X)
    delta = np.zeros((len(X), 2))
    delta[:, class_index] = 1.0
    for layer in range(len(model.weights) - 1, 0, -1):
        delta = (delta @ model.weights[layer].T) * _act_grad(zs[layer - 1], model.activation)
    return delta @ model.weights[0].T


def gradient_importances(model: MlpModel, X: np.ndarray) -> np.ndarray:
    """Kernel feature vector: mean over points and class logits of the
    absolute unit-normalized input gradient (zero gradients stay zero)."""
    X = np.asarray(X, dtype=np.float64)
    if len(X) == 0:
        raise ValueError("empty point set")
    total = np.zeros(model.n_features)
    for c in (0, 1):
        G = input_gradients(model, X, c)
        norms = np.linalg.norm(G, axis=1, keepdims=True)
        unit = np.divide(G, norms, out=np.zeros_like(G), where=norms > 0)
        total += np.abs(unit).sum(axis=0)
    return total / (2.0 * len(X))


# --- persistence ---------------------------------------------------------------


def save_mlp(model: MlpModel, path) -> None:
    """Binary container with shape headers (.npz)."""
    import json

    arrays = {}
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        arrays[f"W{i}"] = W
        arrays[f"b{i}"] = b
    arrays["hyperparams_json"] = np.asarray(json.dumps(model.hyperparams.to_dict()))
    arrays["loss_history"] = np.asarray(model.loss_history)
    np.savez_compressed(path, **arrays)


def load_mlp(path) -> MlpModel:
    import json

    with np.load(path, allow_pickle=False) as z:
        hp = MlpHyperparams.from_dict(json.loads(str(z["hyperparams_json"])))
        n_layers = len(hp.architecture) + 1
        weights = [z[f"W{i}"] for i in range(n_layers)]
        biases = [z[f"b{i}"] for i in range(n_layers)]
        return MlpModel(weights, biases, hp.activation, hp, list(z["loss_history"]))
