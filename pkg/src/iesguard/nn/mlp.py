"""
Dense ReLU networks with manual reverse-mode gradients.

``MlpParams`` is an immutable value type: every update produces a new record
with ``version`` incremented, and a forward cache remembers the version it
was computed with so a backward pass against newer parameters is refused.

All arrays are float64. Inputs may be a single vector ``(in,)`` or a batch
``(batch, in)``; outputs follow the same rank.
"""
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError, StaleCacheError


@dataclass(frozen=True)
class MlpParams:
    """Weights ``(out, in)`` and biases ``(out,)`` per layer; ReLU between layers, linear output."""
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]
    version: int = 0

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.biases) or not self.weights:
            raise DimensionMismatchError("an MLP needs one bias vector per weight matrix")
        weights = tuple(np.asarray(w, dtype=np.float64) for w in self.weights)
        biases = tuple(np.asarray(b, dtype=np.float64).reshape(-1) for b in self.biases)
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.ndim != 2 or w.shape[0] != b.shape[0]:
                raise DimensionMismatchError(f"layer {i}: weight {w.shape} does not match bias {b.shape}")
            if i > 0 and w.shape[1] != weights[i - 1].shape[0]:
                raise DimensionMismatchError(
                    f"layer {i} expects {w.shape[1]} inputs, previous layer emits {weights[i - 1].shape[0]}"
                )
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'biases', biases)

    @classmethod
    def init(cls, sizes: Sequence[int], rng: np.random.Generator) -> 'MlpParams':
        """Uniform(±1/sqrt(fan_in)) initialization for layer widths ``sizes``."""
        if len(sizes) < 2:
            raise DimensionMismatchError("sizes needs at least input and output widths")
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(tuple(weights), tuple(biases))

    @property
    def sizes(self) -> Tuple[int, ...]:
        return (self.weights[0].shape[1],) + tuple(w.shape[0] for w in self.weights)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[0]

    def arrays(self) -> List[np.ndarray]:
        """Flat parameter list ``[W0, b0, W1, b1, ...]``."""
        out: List[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def with_arrays(self, arrays: Sequence[np.ndarray], bump: bool = True) -> 'MlpParams':
        """Return a copy holding ``arrays`` (same layout as :meth:`arrays`)."""
        if len(arrays) != 2 * self.n_layers:
            raise DimensionMismatchError(f"expected {2 * self.n_layers} arrays, got {len(arrays)}")
        for new, old in zip(arrays, self.arrays()):
            if np.shape(new) != old.shape:
                raise DimensionMismatchError(f"array shape {np.shape(new)} does not match {old.shape}")
        return MlpParams(tuple(arrays[0::2]), tuple(arrays[1::2]), self.version + (1 if bump else 0))

    def slice_outputs(self, stop: int) -> 'MlpParams':
        """Network restricted to the first ``stop`` outputs of the last layer."""
        weights = self.weights[:-1] + (self.weights[-1][:stop],)
        biases = self.biases[:-1] + (self.biases[-1][:stop],)
        return MlpParams(weights, biases, self.version)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())


class MlpCache(NamedTuple):
    inputs: Tuple[np.ndarray, ...]
    preacts: Tuple[np.ndarray, ...]
    version: int
    squeeze: bool


class MlpGrads(NamedTuple):
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]
    dx: np.ndarray

    def arrays(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out


def _as_batch(net: MlpParams, x: np.ndarray) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.in_dim:
        raise DimensionMismatchError(f"network expects input width {net.in_dim}, got shape {x.shape}")
    return x, squeeze


def forward(net: MlpParams, x: np.ndarray) -> Tuple[np.ndarray, MlpCache]:
    """Evaluate the network and keep the activations needed by :func:`backward`.

    Raises:
        DimensionMismatchError: If ``x`` does not match the input width
    """
    h, squeeze = _as_batch(net, x)
    inputs, preacts = [], []
    last = net.n_layers - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append(h)
        z = h @ w.T + b
        preacts.append(z)
        h = z if i == last else np.maximum(z, 0.0)
    y = h[0] if squeeze else h
    return y, MlpCache(tuple(inputs), tuple(preacts), net.version, squeeze)


def predict(net: MlpParams, x: np.ndarray) -> np.ndarray:
    """Forward pass without a cache."""
    return forward(net, x)[0]


def backward(net: MlpParams, cache: MlpCache, dy: np.ndarray) -> MlpGrads:
    """Reverse-mode gradients of a scalar loss whose output gradient is ``dy``.

    Parameter gradients are summed over the batch.

    Raises:
        StaleCacheError: If ``cache`` was produced by another parameter version
        DimensionMismatchError: If ``dy`` does not match the output shape
    """
    if cache.version != net.version:
        raise StaleCacheError(f"cache from version {cache.version}, network is at version {net.version}")
    dy = np.asarray(dy, dtype=np.float64)
    if cache.squeeze:
        dy = dy[None, :] if dy.ndim == 1 else dy
    if dy.shape != cache.preacts[-1].shape:
        raise DimensionMismatchError(f"output gradient {dy.shape} does not match output {cache.preacts[-1].shape}")

    grad_w: List[np.ndarray] = [np.empty(0)] * net.n_layers
    grad_b: List[np.ndarray] = [np.empty(0)] * net.n_layers
    g = dy
    for i in range(net.n_layers - 1, -1, -1):
        if i < net.n_layers - 1:
            g = g * (cache.preacts[i] > 0.0)
        grad_w[i] = g.T @ cache.inputs[i]
        grad_b[i] = g.sum(axis=0)
        g = g @ net.weights[i]
    dx = g[0] if cache.squeeze else g
    return MlpGrads(tuple(grad_w), tuple(grad_b), dx)


def soft_update(target: MlpParams, online: MlpParams, tau: float) -> MlpParams:
    """Polyak blend ``tau * online + (1 - tau) * target``.

    Raises:
        DimensionMismatchError: If the two networks differ in shape
    """
    if target.sizes != online.sizes:
        raise DimensionMismatchError(f"soft update between {target.sizes} and {online.sizes}")
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    blended = [tau * o + (1.0 - tau) * t for t, o in zip(target.arrays(), online.arrays())]
    return target.with_arrays(blended)


__all__ = ['MlpParams', 'MlpCache', 'MlpGrads', 'forward', 'predict', 'backward', 'soft_update']
