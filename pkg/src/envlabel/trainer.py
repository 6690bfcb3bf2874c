"""Desk-scale multi-head classifier trained with the summed focal loss.

One shared fully-connected trunk maps a feature vector to a representation
consumed by six small heads (two fully connected layers each), one per
taxonomy category. Feature vectors are synthetic stand-ins for an image
backbone's output; what the trainer preserves is the architecture's defining
property: a single representation feeding all six classification tasks.

Training is plain mini-batch gradient descent with analytic gradients, kept
dependency-free so runs are exactly reproducible from the seed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .focal import FocalLossParams, focal_grad_wrt_logits, focal_loss_batch, softmax
from .labels import CATEGORIES, CATEGORY_CLASSES

DEFAULT_CLASS_COUNTS = tuple(len(CATEGORY_CLASSES[c]) for c in CATEGORIES)  # (3, 3, 3, 4, 4, 4)


class TrainingDivergedError(RuntimeError):
    """The loss became non-finite; learning rate is almost certainly too high."""


@dataclass(frozen=True)
class ToyModelConfig:
    input_dim: int = 16
    trunk_widths: tuple[int, ...] = (32,)
    head_hidden: int = 16
    class_counts: tuple[int, ...] = DEFAULT_CLASS_COUNTS
    learning_rate: float = 0.5
    epochs: int = 120
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        if self.input_dim < 1 or self.head_hidden < 1:
            raise ValueError("dimensions must be >= 1")
        if any(w < 1 for w in self.trunk_widths):
            raise ValueError("trunk widths must be >= 1")
        if len(self.class_counts) != 6:
            raise ValueError("exactly six heads are required")
        if any(k < 1 for k in self.class_counts):
            raise ValueError("class counts must be >= 1")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")


@dataclass
class Layer:
    w: np.ndarray  # (out, in)
    b: np.ndarray  # (out,)


@dataclass
class ToyModel:
    trunk: list[Layer]
    heads: list[tuple[Layer, Layer]]  # per category: (hidden, output)
    config: ToyModelConfig

    def all_finite(self) -> bool:
        layers = list(self.trunk) + [l for pair in self.heads for l in pair]
        return all(np.isfinite(l.w).all() and np.isfinite(l.b).all() for l in layers)


@dataclass(frozen=True)
class SyntheticSample:
    features: tuple[float, ...]
    targets: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.targets) != 6:
            raise ValueError("a sample carries exactly six targets")


@dataclass
class Prediction:
    """Argmax class per head plus the full softmax score vectors."""

    class_indices: tuple[int, ...]
    scores: tuple[tuple[float, ...], ...]

    def category_values(self) -> dict[str, str]:
        """Map head outputs to taxonomy value names (default class layout only)."""
        values: dict[str, str] = {}
        for category, index in zip(CATEGORIES, self.class_indices):
            classes = CATEGORY_CLASSES[category]
            if index >= len(classes):
                raise ValueError(
                    f"head for {category!r} has more classes than the taxonomy defines"
                )
            values[category] = classes[index]
        return values


def init_model(config: ToyModelConfig, rng: np.random.Generator | None = None) -> ToyModel:
    rng = rng or np.random.default_rng(config.seed)

    def layer(n_in: int, n_out: int) -> Layer:
        return Layer(w=rng.normal(0.0, 1.0 / np.sqrt(n_in), (n_out, n_in)), b=np.zeros(n_out))

    trunk = []
    width = config.input_dim
    for out in config.trunk_widths:
        trunk.append(layer(width, out))
        width = out
    heads = [
        (layer(width, config.head_hidden), layer(config.head_hidden, k))
        for k in config.class_counts
    ]
    return ToyModel(trunk=trunk, heads=heads, config=config)


def zero_like(model: ToyModel) -> ToyModel:
    return ToyModel(
        trunk=[Layer(np.zeros_like(l.w), np.zeros_like(l.b)) for l in model.trunk],
        heads=[
            (
                Layer(np.zeros_like(h.w), np.zeros_like(h.b)),
                Layer(np.zeros_like(o.w), np.zeros_like(o.b)),
            )
            for h, o in model.heads
        ],
        config=model.config,
    )


def forward(model: ToyModel, features: np.ndarray) -> tuple[list[np.ndarray], dict]:
    """Per-head probabilities for a feature batch, plus the backprop cache."""
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if x.shape[1] != model.config.input_dim:
        raise ValueError(f"feature dim {x.shape[1]} != input_dim {model.config.input_dim}")
    activations = [x]
    for layer in model.trunk:
        x = np.tanh(x @ layer.w.T + layer.b)
        activations.append(x)
    trunk_out = x
    head_hidden: list[np.ndarray] = []
    head_probs: list[np.ndarray] = []
    for hidden, output in model.heads:
        h = np.tanh(trunk_out @ hidden.w.T + hidden.b)
        head_hidden.append(h)
        head_probs.append(softmax(h @ output.w.T + output.b))
    cache = {"activations": activations, "trunk_out": trunk_out, "head_hidden": head_hidden}
    return head_probs, cache


def batch_loss(
    model: ToyModel,
    features: np.ndarray,
    targets: np.ndarray,
    params: FocalLossParams = FocalLossParams(),
) -> float:
    """Mean over the batch of the summed per-category focal losses."""
    head_probs, _ = forward(model, features)
    targets = np.atleast_2d(np.asarray(targets, dtype=int))
    total = np.zeros(targets.shape[0])
    for c, probs in enumerate(head_probs):
        weights = params.weights_for(c, model.config.class_counts[c])
        total += focal_loss_batch(probs, targets[:, c], params.gamma, weights)
    return float(total.mean())


def loss_gradient(
    model: ToyModel,
    features: np.ndarray,
    targets: np.ndarray,
    params: FocalLossParams = FocalLossParams(),
) -> tuple[float, ToyModel]:
    """Batch-mean total loss and its analytic gradients (same shapes as the model)."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    targets = np.atleast_2d(np.asarray(targets, dtype=int))
    n = features.shape[0]
    head_probs, cache = forward(model, features)
    grads = zero_like(model)

    loss_total = np.zeros(n)
    d_trunk_out = np.zeros_like(cache["trunk_out"])
    for c, probs in enumerate(head_probs):
        weights = params.weights_for(c, model.config.class_counts[c])
        t = targets[:, c]
        loss_total += focal_loss_batch(probs, t, params.gamma, weights)
        d_logits = focal_grad_wrt_logits(probs, t, params.gamma, weights) / n
        hidden, output = model.heads[c]
        g_hidden, g_output = grads.heads[c]
        h = cache["head_hidden"][c]
        g_output.w += d_logits.T @ h
        g_output.b += d_logits.sum(axis=0)
        d_h = d_logits @ output.w
        d_zh = d_h * (1.0 - h * h)
        g_hidden.w += d_zh.T @ cache["trunk_out"]
        g_hidden.b += d_zh.sum(axis=0)
        d_trunk_out += d_zh @ hidden.w

    delta = d_trunk_out
    for layer_index in range(len(model.trunk) - 1, -1, -1):
        a_out = cache["activations"][layer_index + 1]
        a_in = cache["activations"][layer_index]
        d_z = delta * (1.0 - a_out * a_out)
        grads.trunk[layer_index].w += d_z.T @ a_in
        grads.trunk[layer_index].b += d_z.sum(axis=0)
        if layer_index > 0:
            delta = d_z @ model.trunk[layer_index].w

    return float(loss_total.mean()), grads


def _stack(samples: Sequence[SyntheticSample]) -> tuple[np.ndarray, np.ndarray]:
    features = np.array([s.features for s in samples], dtype=np.float64)
    targets = np.array([s.targets for s in samples], dtype=int)
    return features, targets


@dataclass
class TrainResult:
    model: ToyModel
    loss_history: list[float]


def train(
    samples: Sequence[SyntheticSample],
    config: ToyModelConfig,
    params: FocalLossParams = FocalLossParams(),
) -> TrainResult:
    """Mini-batch gradient descent; deterministic for a fixed config seed."""
    if not samples:
        raise ValueError("training needs a non-empty dataset")
    features, targets = _stack(samples)
    if features.shape[1] != config.input_dim:
        raise ValueError(f"feature dim {features.shape[1]} != input_dim {config.input_dim}")
    for c, k in enumerate(config.class_counts):
        if targets[:, c].max() >= k or targets[:, c].min() < 0:
            raise ValueError(f"category {c} targets exceed class count {k}")

    rng = np.random.default_rng(config.seed)
    model = init_model(config, rng)
    n = features.shape[0]
    history: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            loss, grads = loss_gradient(model, features[batch], targets[batch], params)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}"
                )
            epoch_loss += loss * len(batch)
            for layer, grad in zip(model.trunk, grads.trunk):
                layer.w -= config.learning_rate * grad.w
                layer.b -= config.learning_rate * grad.b
            for (h, o), (gh, go) in zip(model.heads, grads.heads):
                h.w -= config.learning_rate * gh.w
                h.b -= config.learning_rate * gh.b
                o.w -= config.learning_rate * go.w
                o.b -= config.learning_rate * go.b
        history.append(epoch_loss / n)
        if not model.all_finite():
            raise TrainingDivergedError(f"non-finite parameters after epoch {epoch}")
    return TrainResult(model=model, loss_history=history)


def predict(model: ToyModel, features: Sequence[float] | np.ndarray) -> Prediction:
    """Per-head argmax and score vectors for a single feature vector."""
    vec = np.asarray(features, dtype=np.float64).reshape(1, -1)
    head_probs, _ = forward(model, vec)
    indices = tuple(int(np.argmax(p[0])) for p in head_probs)
    scores = tuple(tuple(float(x) for x in p[0]) for p in head_probs)
    return Prediction(class_indices=indices, scores=scores)


def per_category_accuracy(model: ToyModel, samples: Sequence[SyntheticSample]) -> tuple[float, ...]:
    features, targets = _stack(samples)
    head_probs, _ = forward(model, features)
    return tuple(
        float((np.argmax(head_probs[c], axis=1) == targets[:, c]).mean()) for c in range(6)
    )


def save_checkpoint(model: ToyModel, path: str | Path) -> None:
    """Self-describing JSON checkpoint: config echo plus parameter arrays."""
    payload = {
        "format": "envlabel-toy-checkpoint/1",
        "config": asdict(model.config),
        "trunk": [{"w": l.w.tolist(), "b": l.b.tolist()} for l in model.trunk],
        "heads": [
            [{"w": l.w.tolist(), "b": l.b.tolist()} for l in pair] for pair in model.heads
        ],
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_checkpoint(path: str | Path) -> ToyModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != "envlabel-toy-checkpoint/1":
        raise ValueError("not a toy-model checkpoint")
    raw = payload["config"]
    config = ToyModelConfig(
        input_dim=raw["input_dim"],
        trunk_widths=tuple(raw["trunk_widths"]),
        head_hidden=raw["head_hidden"],
        class_counts=tuple(raw["class_counts"]),
        learning_rate=raw["learning_rate"],
        epochs=raw["epochs"],
        batch_size=raw["batch_size"],
        seed=raw["seed"],
    )
    def to_layer(obj: dict) -> Layer:
        return Layer(w=np.asarray(obj["w"], dtype=np.float64), b=np.asarray(obj["b"], dtype=np.float64))

    model = ToyModel(
        trunk=[to_layer(o) for o in payload["trunk"]],
        heads=[(to_layer(a), to_layer(b)) for a, b in payload["heads"]],
        config=config,
    )
    expected = init_model(config)
    for got, want in zip(model.trunk, expected.trunk):
        if got.w.shape != want.w.shape or got.b.shape != want.b.shape:
            raise ValueError("checkpoint trunk shapes do not match its config")
    for (gh, go), (wh, wo) in zip(model.heads, expected.heads):
        if gh.w.shape != wh.w.shape or go.w.shape != wo.w.shape:
            raise ValueError("checkpoint head shapes do not match its config")
    return model


def save_samples(samples: Sequence[SyntheticSample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps({"features": list(s.features), "targets": list(s.targets)}) + "\n")


def load_samples(path: str | Path) -> list[SyntheticSample]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                out.append(
                    SyntheticSample(
                        features=tuple(float(x) for x in raw["features"]),
                        targets=tuple(int(t) for t in raw["targets"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad sample record: {exc}") from exc
    return out


def make_separable_dataset(
    n_samples: int,
    *,
    input_dim: int = 16,
    class_counts: tuple[int, ...] = DEFAULT_CLASS_COUNTS,
    n_clusters: int = 12,
    separation: float = 4.0,
    noise: float = 0.25,
    seed: int = 0,
) -> list[SyntheticSample]:
    """Gaussian clusters, each carrying one joint six-category label.

    Cluster centers are kept at least ``separation`` apart while samples
    scatter with ``noise`` standard deviation, so every category is
    comfortably separable and a small model can reach near-perfect accuracy.
    """
    rng = np.random.default_rng(seed)
    centers: list[np.ndarray] = []
    attempts = 0
    while len(centers) < n_clusters:
        attempts += 1
        if attempts > 10_000:
            raise ValueError("could not place that many clusters at this separation")
        direction = rng.normal(size=input_dim)
        direction /= np.linalg.norm(direction)
        candidate = direction * separation * (1.0 + 0.4 * rng.random())
        if all(np.linalg.norm(candidate - c) >= separation for c in centers):
            centers.append(candidate)
    labels = [tuple(int(rng.integers(k)) for k in class_counts) for _ in centers]
    samples = []
    for _ in range(n_samples):
        idx = int(rng.integers(n_clusters))
        point = centers[idx] + rng.normal(0.0, noise, input_dim)
        samples.append(SyntheticSample(features=tuple(float(x) for x in point), targets=labels[idx]))
    return samples
