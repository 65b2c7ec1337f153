# -*- coding: utf-8 -*-
"""
models/network.py
Feed-forward binary classifier with hand-derived gradients. ReLU hidden layers, two output
logits, softmax cross-entropy with optional per-sample weights and an optional
equalized-odds penalty, inverted dropout, and plain SGD updates. Everything is float64.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import log_softmax, softmax

from util.errors import InsufficientSamplesError, ShapeMismatchError
from util.prng import DROPOUT_STREAM, PrngState, prng_from, uniforms

N_CLASSES = 2


@dataclass(frozen=True)
class Layer:
    weights: np.ndarray  # out x in
    biases: np.ndarray   # out


@dataclass(frozen=True)
class Model:
    """Ordered affine layers; ReLU between them, identity on the last one."""
    layers: tuple[Layer, ...]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("a model needs at least one layer")
        for index, layer in enumerate(self.layers):
            if layer.weights.ndim != 2 or layer.biases.shape != (layer.weights.shape[0],):
                raise ValueError(f"layer {index}: weights {layer.weights.shape} and biases "
                                 f"{layer.biases.shape} are not congruent")
            if index and layer.weights.shape[1] != self.layers[index - 1].weights.shape[0]:
                raise ShapeMismatchError(index, self.layers[index - 1].weights.shape[0],
                                         layer.weights.shape[1])
            if not (np.all(np.isfinite(layer.weights)) and np.all(np.isfinite(layer.biases))):
                raise ValueError(f"layer {index} has non-finite parameters")

    @property
    def input_dim(self) -> int:
        return self.layers[0].weights.shape[1]

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return tuple(layer.weights.shape[0] for layer in self.layers[:-1])


@dataclass(frozen=True)
class Gradients:
    """Partial derivatives of the scalar loss, congruent with Model.layers."""
    layers: tuple[Layer, ...]

    def norm(self) -> float:
        total = sum(float(np.sum(g.weights ** 2) + np.sum(g.biases ** 2)) for g in self.layers)
        return math.sqrt(total)


@dataclass(frozen=True)
class EOTerm:
    """Equalized-odds penalty settings: sensitive value per batch row and weight lambda."""
    groups: np.ndarray
    lam: float = 1.0


@dataclass
class ForwardCache:
    model: Model
    inputs: np.ndarray
    pre_activations: list[np.ndarray] = field(default_factory=list)
    masks: list[np.ndarray | None] = field(default_factory=list)  # scaled keep-masks
    activations: list[np.ndarray] = field(default_factory=list)   # after dropout
    logits: np.ndarray | None = None
    dropout_prng: PrngState | None = None  # stream state after this pass


def init_model(input_dim: int, hidden_sizes: Sequence[int], weight_seed: int) -> Model:
    """
    Uniform fan-in initialization, U[-sqrt(6/fan_in), +sqrt(6/fan_in)], biases zero.

    Layer l draws from prng_from(weight_seed, l), so the result depends only on the
    dimensions and the weight seed.
    """
    if input_dim < 1:
        raise ValueError(f"input_dim must be >= 1, got {input_dim}")
    dims = [input_dim, *hidden_sizes, N_CLASSES]
    layers = []
    for index, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        limit = math.sqrt(6.0 / fan_in)
        u, _ = uniforms(prng_from(weight_seed, index), fan_out * fan_in)
        weights = ((2.0 * u - 1.0) * limit).reshape(fan_out, fan_in)
        layers.append(Layer(weights=weights, biases=np.zeros(fan_out)))
    return Model(tuple(layers))


def forward(
    model: Model,
    inputs: np.ndarray,
    dropout_rate: float = 0.0,
    dropout_prng: PrngState | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """
    Forward pass for a B x d batch.

    With dropout_rate > 0 every hidden unit is zeroed with that probability and the
    survivors are scaled by 1/(1 - rate). Masks consume the dropout stream layer by
    layer; the advanced stream is returned in the cache.
    """
    if (dropout_rate > 0.0) != (dropout_prng is not None):
        raise ValueError("dropout_prng must be given exactly when dropout_rate > 0")
    if not 0.0 <= dropout_rate < 1.0:
        raise ValueError(f"dropout_rate must lie in [0, 1), got {dropout_rate}")
    h = np.asarray(inputs, dtype=np.float64)
    if h.ndim == 1:
        h = h.reshape(1, -1)
    cache = ForwardCache(model=model, inputs=h, dropout_prng=dropout_prng)
    last = len(model.layers) - 1
    for index, layer in enumerate(model.layers):
        if h.shape[1] != layer.weights.shape[1]:
            raise ShapeMismatchError(index, layer.weights.shape[1], h.shape[1])
        z = h @ layer.weights.T + layer.biases
        if index == last:
            cache.logits = z
            break
        a = np.maximum(z, 0.0)
        mask = None
        if dropout_rate > 0.0:
            u, cache.dropout_prng = uniforms(cache.dropout_prng, a.size)
            mask = (u.reshape(a.shape) >= dropout_rate) / (1.0 - dropout_rate)
            a = a * mask
        cache.pre_activations.append(z)
        cache.masks.append(mask)
        cache.activations.append(a)
        h = a
    return cache.logits, cache


def _check_batch(logits: np.ndarray, labels: np.ndarray,
                 sample_weights: np.ndarray | None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.shape[0] == 0:
        raise InsufficientSamplesError("loss of an empty batch is undefined")
    if labels.shape != (logits.shape[0],):
        raise ValueError(f"{labels.shape[0]} labels for {logits.shape[0]} logit rows")
    if sample_weights is None:
        weights = np.ones(logits.shape[0])
    else:
        weights = np.asarray(sample_weights, dtype=np.float64)
        if weights.shape != labels.shape:
            raise ValueError(f"{weights.shape[0]} sample weights for {labels.shape[0]} rows")
    return logits, labels, weights


def _eo_cells(labels: np.ndarray, groups: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    # (group 0 rows, group 1 rows) for y = 1 (TPR) and y = 0 (FPR); a label value missing
    # from either group contributes nothing
    cells = []
    for y in (1, 0):
        rows0 = (labels == y) & (groups == 0)
        rows1 = (labels == y) & (groups == 1)
        if rows0.any() and rows1.any():
            cells.append((rows0, rows1))
    return cells


def eo_penalty(p1: np.ndarray, labels: np.ndarray, eo_term: EOTerm) -> float:
    """lambda/2 * (|soft-TPR gap| + |soft-FPR gap|) over the batch."""
    groups = np.asarray(eo_term.groups)
    if groups.shape != labels.shape:
        raise ValueError(f"{groups.shape[0]} group values for {labels.shape[0]} rows")
    gaps = [abs(p1[rows0].mean() - p1[rows1].mean()) for rows0, rows1 in _eo_cells(labels, groups)]
    return eo_term.lam / 2.0 * float(sum(gaps))


def loss(
    logits: np.ndarray,
    labels: np.ndarray,
    sample_weights: np.ndarray | None = None,
    eo_term: EOTerm | None = None,
) -> float:
    """Batch mean of w_i * CE_i, plus the equalized-odds penalty when eo_term is given."""
    logits, labels, weights = _check_batch(logits, labels, sample_weights)
    nll = -log_softmax(logits, axis=1)[np.arange(labels.size), labels]
    value = float(np.mean(weights * nll))
    if eo_term is not None:
        value += eo_penalty(softmax(logits, axis=1)[:, 1], labels, eo_term)
    return value


def backward(
    cache: ForwardCache,
    labels: np.ndarray,
    sample_weights: np.ndarray | None = None,
    eo_term: EOTerm | None = None,
) -> Gradients:
    """Exact gradients of loss() for the batch that produced `cache`."""
    logits, labels, weights = _check_batch(cache.logits, labels, sample_weights)
    batch = labels.size
    probs = softmax(logits, axis=1)
    onehot = np.zeros_like(probs)
    onehot[np.arange(batch), labels] = 1.0
    upstream = weights[:, None] * (probs - onehot) / batch

    if eo_term is not None and eo_term.lam > 0.0:
        groups = np.asarray(eo_term.groups)
        p1 = probs[:, 1]
        d_p1 = np.zeros(batch)
        for rows0, rows1 in _eo_cells(labels, groups):
            sign = np.sign(p1[rows0].mean() - p1[rows1].mean())
            d_p1[rows0] += eo_term.lam / 2.0 * sign / rows0.sum()
            d_p1[rows1] -= eo_term.lam / 2.0 * sign / rows1.sum()
        # dp1/dz1 = p0 p1 = -dp1/dz0
        d_logit = d_p1 * probs[:, 0] * probs[:, 1]
        upstream[:, 0] -= d_logit
        upstream[:, 1] += d_logit

    model = cache.model
    grads: list[Layer] = []
    for index in range(len(model.layers) - 1, -1, -1):
        below = cache.inputs if index == 0 else cache.activations[index - 1]
        grads.append(Layer(weights=upstream.T @ below, biases=upstream.sum(axis=0)))
        if index > 0:
            d_hidden = upstream @ model.layers[index].weights
            mask = cache.masks[index - 1]
            if mask is not None:
                d_hidden = d_hidden * mask
            upstream = d_hidden * (cache.pre_activations[index - 1] > 0.0)
    return Gradients(tuple(reversed(grads)))


def sgd_step(model: Model, grads: Gradients, learning_rate: float) -> Model:
    """theta <- theta - lr * g; returns a new Model."""
    if len(grads.layers) != len(model.layers):
        raise ValueError(f"{len(grads.layers)} gradient layers for {len(model.layers)} model layers")
    updated = []
    for index, (layer, grad) in enumerate(zip(model.layers, grads.layers)):
        if grad.weights.shape != layer.weights.shape or grad.biases.shape != layer.biases.shape:
            raise ShapeMismatchError(index, layer.weights.shape[1], grad.weights.shape[1])
        updated.append(Layer(weights=layer.weights - learning_rate * grad.weights,
                             biases=layer.biases - learning_rate * grad.biases))
    return Model(tuple(updated))


def predict_proba(model: Model, inputs: np.ndarray) -> np.ndarray:
    """Evaluation-mode probability of class 1."""
    logits, _ = forward(model, inputs)
    return softmax(logits, axis=1)[:, 1]


def predict(model: Model, inputs: np.ndarray) -> np.ndarray:
    """Argmax class; ties go to class 0."""
    logits, _ = forward(model, inputs)
    return (logits[:, 1] > logits[:, 0]).astype(np.int64)


def mc_dropout_uncertainty(
    model: Model,
    inputs: np.ndarray,
    passes: int,
    dropout_rate: float,
    seed: int,
) -> np.ndarray:
    """
    Population standard deviation of p(class 1) over `passes` stochastic forward
    passes with dropout active. Running moments keep memory at O(n).
    """
    if not 0.0 < dropout_rate < 1.0:
        raise ValueError(f"MC dropout needs a dropout_rate in (0, 1), got {dropout_rate}")
    if passes < 2:
        raise ValueError(f"MC dropout needs at least 2 passes, got {passes}")
    stream = prng_from(seed, DROPOUT_STREAM)
    mean = None
    m2 = None
    for count in range(1, passes + 1):
        logits, cache = forward(model, inputs, dropout_rate, stream)
        stream = cache.dropout_prng
        p1 = softmax(logits, axis=1)[:, 1]
        if mean is None:
            mean = np.zeros_like(p1)
            m2 = np.zeros_like(p1)
        delta = p1 - mean
        mean += delta / count
        m2 += delta * (p1 - mean)
    return np.sqrt(m2 / passes)
