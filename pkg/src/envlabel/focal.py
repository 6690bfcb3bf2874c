"""Multi-class focal loss shared by the six classification heads.

For a head's probability vector p and true class t the loss is

    -alpha_t * (1 - p_t)^gamma * log(p_t)

with gamma down-weighting well-classified samples and alpha_t re-weighting
classes; gamma=0 with unit weights reduces exactly to cross-entropy. The
six per-category losses are summed into the training objective, with the
class weight applied once, inside each per-category term.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

#: Floor on p_t; keeps the loss finite when a head assigns (numerically)
#: zero probability to the true class.
P_EPSILON = 1e-12


@dataclass(frozen=True)
class FocalLossParams:
    """Loss configuration: one gamma, one weight vector per category.

    ``class_weights[c][k]`` multiplies the loss of category ``c`` samples
    whose true class is ``k``. None means unit weights.
    """

    gamma: float = 2.0
    class_weights: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.class_weights is not None:
            for c, weights in enumerate(self.class_weights):
                if any(w <= 0 for w in weights):
                    raise ValueError(f"class weights for category {c} must be > 0")

    def weights_for(self, category: int, n_classes: int) -> np.ndarray:
        if self.class_weights is None:
            return np.ones(n_classes)
        weights = np.asarray(self.class_weights[category], dtype=np.float64)
        if weights.shape[0] != n_classes:
            raise ValueError(
                f"category {category}: {weights.shape[0]} weights for {n_classes} classes"
            )
        return weights


def inverse_frequency_weights(targets: np.ndarray, n_classes: int) -> tuple[float, ...]:
    """Per-class weights proportional to 1/frequency, normalized to mean 1.

    Classes absent from ``targets`` get weight 1 before normalization (there
    is nothing to balance against).
    """
    counts = np.bincount(np.asarray(targets, dtype=int), minlength=n_classes).astype(np.float64)
    weights = np.ones(n_classes)
    present = counts > 0
    weights[present] = counts[present].mean() / counts[present]
    return tuple(float(w) for w in weights / weights.mean())


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax along the last axis (max is subtracted before exp)."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def focal_loss(
    probs: np.ndarray,
    target: int,
    gamma: float,
    class_weights: np.ndarray | None = None,
) -> float:
    """Focal loss of one probability vector against its true class."""
    probs = np.asarray(probs, dtype=np.float64)
    if not 0 <= target < probs.shape[-1]:
        raise IndexError(f"target {target} out of range for {probs.shape[-1]} classes")
    p_t = float(probs[target])
    if p_t <= 0.0:
        log.warning("true-class probability %.3g clamped to %.0e", p_t, P_EPSILON)
        p_t = P_EPSILON
    alpha = 1.0 if class_weights is None else float(class_weights[target])
    if p_t >= 1.0:
        return 0.0
    return -alpha * (1.0 - p_t) ** gamma * np.log(p_t)


def focal_loss_batch(
    probs: np.ndarray, targets: np.ndarray, gamma: float, class_weights: np.ndarray | None = None
) -> np.ndarray:
    """Vectorized focal loss: (n, k) probabilities against (n,) targets."""
    probs = np.asarray(probs, dtype=np.float64)
    targets = np.asarray(targets, dtype=int)
    p_t = np.clip(probs[np.arange(len(targets)), targets], P_EPSILON, 1.0)
    alpha = 1.0 if class_weights is None else np.asarray(class_weights)[targets]
    return -alpha * (1.0 - p_t) ** gamma * np.log(p_t)


def total_loss(
    head_probs: list[np.ndarray] | tuple[np.ndarray, ...],
    targets: list[int] | tuple[int, ...] | np.ndarray,
    params: FocalLossParams = FocalLossParams(),
) -> float:
    """Sum of the per-category focal losses for one sample."""
    if len(head_probs) != len(targets):
        raise ValueError(f"{len(head_probs)} heads but {len(targets)} targets")
    loss = 0.0
    for c, (probs, target) in enumerate(zip(head_probs, targets)):
        weights = params.weights_for(c, np.asarray(probs).shape[-1])
        loss += focal_loss(probs, int(target), params.gamma, weights)
    return float(loss)


def focal_grad_wrt_logits(
    probs: np.ndarray, targets: np.ndarray, gamma: float, class_weights: np.ndarray | None = None
) -> np.ndarray:
    """d(focal loss)/d(logits) for a batch, via the softmax chain rule.

    With p = softmax(z) and t the true class:
        dL/dz_j = dL/dp_t * p_t * (delta_tj - p_j)
        dL/dp_t = alpha_t * (gamma * (1-p_t)^(gamma-1) * log(p_t) - (1-p_t)^gamma / p_t)
    At p_t == 1 the loss is identically 0 in a neighborhood direction of
    interest and the gradient limit is 0 for gamma > 0 (cross-entropy keeps
    its usual p - onehot form at gamma == 0).
    """
    probs = np.asarray(probs, dtype=np.float64)
    targets = np.asarray(targets, dtype=int)
    n, k = probs.shape
    rows = np.arange(n)
    p_t = np.clip(probs[rows, targets], P_EPSILON, 1.0)
    alpha = np.ones(n) if class_weights is None else np.asarray(class_weights)[targets]

    one_minus = 1.0 - p_t
    at_one = one_minus <= 0.0
    safe_one_minus = np.where(at_one, 1.0, one_minus)
    if gamma == 0.0:
        dl_dpt = -alpha / p_t
    else:
        dl_dpt = alpha * (
            gamma * safe_one_minus ** (gamma - 1.0) * np.log(p_t)
            - safe_one_minus**gamma / p_t
        )
        dl_dpt = np.where(at_one, 0.0, dl_dpt)

    onehot = np.zeros((n, k))
    onehot[rows, targets] = 1.0
    dpt_dz = p_t[:, None] * (onehot - probs)
    return dl_dpt[:, None] * dpt_dz
