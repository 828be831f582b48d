"""
Certified output bounds of a ReLU network over an ℓ∞ input box.

* :func:`ibp` pushes the interval ``[x − ε, x + ε]`` forward through every
  layer (center/radius form with ``|W|``).
* :func:`crown` propagates linear relaxations backward from the output.
  Stable neurons pass through exactly; an unstable neuron (``l < 0 < u``)
  is bounded above by the chord ``u/(u − l)·(z − l)`` and below by ``z``
  when ``u > −l`` or by ``0`` otherwise. Intermediate pre-activation bounds
  come from IBP and the concretized box is intersected with the IBP box.
* :func:`crown_ibp` is the convex mix ``(1 − β)·IBP + β·CROWN``.
* :func:`sa_regularizer` is the batch mean of the squared width of the
  mixed box, with exact gradients with respect to the network parameters
  (relaxation slope choices are treated as constants).

Every function accepts a single center ``(d,)`` or a batch ``(batch, d)``.
"""
from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

import numpy as np

from .exceptions import DimensionMismatchError
from .nn.mlp import MlpParams


@dataclass(frozen=True)
class BoxBound:
    """Output box plus the IBP pre-activation bounds of every layer."""
    lower: np.ndarray
    upper: np.ndarray
    layers: Tuple[Tuple[np.ndarray, np.ndarray], ...] = ()

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, y: np.ndarray, tol: float = 1e-9) -> bool:
        return bool(np.all(y >= self.lower - tol) and np.all(y <= self.upper + tol))


@dataclass(frozen=True)
class LinearBound:
    """``lower_A·x + lower_b ≤ f(x) ≤ upper_A·x + upper_b`` over the input box."""
    lower_A: np.ndarray
    lower_b: np.ndarray
    upper_A: np.ndarray
    upper_b: np.ndarray

    def concretize(self, center: np.ndarray, eps: float) -> Tuple[np.ndarray, np.ndarray]:
        center = np.asarray(center, dtype=np.float64)
        lo = np.einsum('...mi,...i->...m', self.lower_A, center) - eps * np.abs(self.lower_A).sum(-1) + self.lower_b
        hi = np.einsum('...mi,...i->...m', self.upper_A, center) + eps * np.abs(self.upper_A).sum(-1) + self.upper_b
        return lo, hi


@dataclass(frozen=True)
class MixSchedule:
    """Regularizer setting for one training episode."""
    beta: float = 1.0
    epsilon: float = 0.0
    kappa: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        if self.epsilon < 0 or self.kappa < 0:
            raise ValueError("epsilon and kappa must be >= 0")

    @property
    def active(self) -> bool:
        return self.kappa > 0 and self.epsilon > 0


def _prepare(net: MlpParams, center: np.ndarray, eps: float) -> Tuple[np.ndarray, bool]:
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    x = np.asarray(center, dtype=np.float64)
    squeeze = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != net.in_dim:
        raise DimensionMismatchError(f"network expects input width {net.in_dim}, got {x.shape[1]}")
    return x, squeeze


class _IbpTape(NamedTuple):
    mids: List[np.ndarray]
    rads: List[np.ndarray]
    lowers: List[np.ndarray]
    uppers: List[np.ndarray]


def _ibp_forward(net: MlpParams, x: np.ndarray, eps: float) -> _IbpTape:
    tape = _IbpTape([], [], [], [])
    h_lo, h_hi = x - eps, x + eps
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        mid = (h_hi + h_lo) / 2.0
        rad = (h_hi - h_lo) / 2.0
        zc = mid @ w.T + b
        zr = rad @ np.abs(w).T
        lo, hi = zc - zr, zc + zr
        tape.mids.append(mid)
        tape.rads.append(rad)
        tape.lowers.append(lo)
        tape.uppers.append(hi)
        h_lo, h_hi = np.maximum(lo, 0.0), np.maximum(hi, 0.0)
    return tape


def _squeeze(a: np.ndarray, squeeze: bool) -> np.ndarray:
    return a[0] if squeeze else a


def ibp(net: MlpParams, center: np.ndarray, eps: float) -> BoxBound:
    """Interval bound propagation of ``[center − eps, center + eps]``."""
    x, squeeze = _prepare(net, center, eps)
    tape = _ibp_forward(net, x, eps)
    layers = tuple((_squeeze(lo, squeeze), _squeeze(hi, squeeze)) for lo, hi in zip(tape.lowers, tape.uppers))
    return BoxBound(_squeeze(tape.lowers[-1], squeeze), _squeeze(tape.uppers[-1], squeeze), layers)


class _Relaxation(NamedTuple):
    slope_u: np.ndarray
    intercept_u: np.ndarray
    slope_l: np.ndarray
    unstable: np.ndarray


def _relax(lo: np.ndarray, hi: np.ndarray) -> _Relaxation:
    active = lo >= 0.0
    unstable = (lo < 0.0) & (hi > 0.0)
    span = np.where(unstable, hi - lo, 1.0)
    slope_u = np.where(active, 1.0, np.where(unstable, hi / span, 0.0))
    intercept_u = np.where(unstable, -lo * hi / span, 0.0)
    slope_l = np.where(active, 1.0, np.where(unstable & (hi > -lo), 1.0, 0.0))
    return _Relaxation(slope_u, intercept_u, slope_l, unstable)


class _CrownTape(NamedTuple):
    lin_inputs: List[np.ndarray]
    relu_inputs: List[np.ndarray]
    relaxations: List[_Relaxation]


def _crown_side(net: MlpParams, ibp_tape: _IbpTape, upper: bool) -> Tuple[np.ndarray, np.ndarray, _CrownTape]:
    batch = ibp_tape.lowers[0].shape[0]
    m = net.out_dim
    A = np.broadcast_to(np.eye(m), (batch, m, m)).copy()
    bias = np.zeros((batch, m))
    tape = _CrownTape([None] * net.n_layers, [None] * net.n_layers, [None] * net.n_layers)
    for k in range(net.n_layers - 1, -1, -1):
        if k < net.n_layers - 1:
            relax = _relax(ibp_tape.lowers[k], ibp_tape.uppers[k])
            tape.relu_inputs[k] = A
            tape.relaxations[k] = relax
            pos, neg = np.maximum(A, 0.0), np.minimum(A, 0.0)
            if upper:
                bias = bias + np.einsum('bmn,bn->bm', pos, relax.intercept_u)
                A = pos * relax.slope_u[:, None, :] + neg * relax.slope_l[:, None, :]
            else:
                bias = bias + np.einsum('bmn,bn->bm', neg, relax.intercept_u)
                A = pos * relax.slope_l[:, None, :] + neg * relax.slope_u[:, None, :]
        tape.lin_inputs[k] = A
        bias = bias + A @ net.biases[k]
        A = A @ net.weights[k]
    return A, bias, tape


def _crown(net: MlpParams, x: np.ndarray, eps: float, ibp_tape: _IbpTape):
    lower_A, lower_b, tape_l = _crown_side(net, ibp_tape, upper=False)
    upper_A, upper_b, tape_u = _crown_side(net, ibp_tape, upper=True)
    linear = LinearBound(lower_A, lower_b, upper_A, upper_b)
    raw_lo, raw_hi = linear.concretize(x, eps)
    return linear, raw_lo, raw_hi, tape_l, tape_u


def crown(net: MlpParams, center: np.ndarray, eps: float) -> Tuple[LinearBound, BoxBound]:
    """Backward linear relaxation; returns the linear bound and its concretized box."""
    x, squeeze = _prepare(net, center, eps)
    ibp_tape = _ibp_forward(net, x, eps)
    linear, raw_lo, raw_hi, _, _ = _crown(net, x, eps, ibp_tape)
    lower = np.maximum(raw_lo, ibp_tape.lowers[-1])
    upper = np.minimum(raw_hi, ibp_tape.uppers[-1])
    layers = tuple((_squeeze(lo, squeeze), _squeeze(hi, squeeze))
                   for lo, hi in zip(ibp_tape.lowers, ibp_tape.uppers))
    if squeeze:
        linear = LinearBound(linear.lower_A[0], linear.lower_b[0], linear.upper_A[0], linear.upper_b[0])
    return linear, BoxBound(_squeeze(lower, squeeze), _squeeze(upper, squeeze), layers)


def crown_ibp(net: MlpParams, center: np.ndarray, eps: float, beta: float) -> BoxBound:
    """Elementwise ``(1 − β)·IBP + β·CROWN`` box."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    box_ibp = ibp(net, center, eps)
    _, box_crown = crown(net, center, eps)
    return BoxBound(
        (1.0 - beta) * box_ibp.lower + beta * box_crown.lower,
        (1.0 - beta) * box_ibp.upper + beta * box_crown.upper,
        box_ibp.layers,
    )


# ---------------------------------------------------------------------------
# Regularizer and its gradient
# ---------------------------------------------------------------------------

def _crown_reverse(net: MlpParams, ibp_tape: _IbpTape, tape: _CrownTape, g_A: np.ndarray, g_bias: np.ndarray,
                   upper: bool, g_w: List[np.ndarray], g_b: List[np.ndarray],
                   g_lo: List[np.ndarray], g_hi: List[np.ndarray]) -> None:
    """Accumulate parameter and intermediate-bound gradients of one CROWN side."""
    gb3 = g_bias[:, :, None]
    for k in range(net.n_layers):
        A_in = tape.lin_inputs[k]
        g_w[k] += np.einsum('bmn,bmj->nj', A_in, g_A)
        g_b[k] += np.einsum('bm,bmn->n', g_bias, A_in)
        g_A = g_A @ net.weights[k].T + gb3 * net.biases[k][None, None, :]
        if k == net.n_layers - 1:
            break

        A_relu = tape.relu_inputs[k]
        relax = tape.relaxations[k]
        pos_mask = A_relu > 0.0
        side = pos_mask if upper else ~pos_mask
        chord_part = np.where(side, A_relu, 0.0)
        g_slope_u = np.einsum('bmn,bmn->bn', g_A, chord_part)
        g_int_u = np.einsum('bm,bmn->bn', g_bias, chord_part)
        su, iu, sl = relax.slope_u[:, None, :], relax.intercept_u[:, None, :], relax.slope_l[:, None, :]
        g_A = np.where(side, g_A * su + gb3 * iu, g_A * sl)

        lo, hi = ibp_tape.lowers[k], ibp_tape.uppers[k]
        span2 = np.where(relax.unstable, (hi - lo) ** 2, 1.0)
        g_hi[k] += np.where(relax.unstable, (g_slope_u * -lo + g_int_u * lo ** 2) / span2, 0.0)
        g_lo[k] += np.where(relax.unstable, (g_slope_u * hi - g_int_u * hi ** 2) / span2, 0.0)


def _ibp_reverse(net: MlpParams, ibp_tape: _IbpTape, g_w: List[np.ndarray], g_b: List[np.ndarray],
                 g_lo: List[np.ndarray], g_hi: List[np.ndarray]) -> None:
    for k in range(net.n_layers - 1, -1, -1):
        w = net.weights[k]
        g_c = g_lo[k] + g_hi[k]
        g_r = g_hi[k] - g_lo[k]
        g_w[k] += g_c.T @ ibp_tape.mids[k] + (g_r.T @ ibp_tape.rads[k]) * np.sign(w)
        g_b[k] += g_c.sum(axis=0)
        if k == 0:
            break
        g_mid = g_c @ w
        g_rad = g_r @ np.abs(w)
        g_hi[k - 1] += 0.5 * (g_mid + g_rad) * (ibp_tape.uppers[k - 1] > 0.0)
        g_lo[k - 1] += 0.5 * (g_mid - g_rad) * (ibp_tape.lowers[k - 1] > 0.0)


def sa_regularizer(net: MlpParams, obs_batch: np.ndarray, eps: float,
                   beta: float) -> Tuple[float, List[np.ndarray]]:
    """Mean squared width of the CROWN-IBP box and its parameter gradients.

    Args:
        net: Policy mean head
        obs_batch: Centers ``(batch, d)`` (a single ``(d,)`` vector is accepted)
        eps: ℓ∞ radius
        beta: CROWN weight of the mix

    Returns:
        ``(loss, grads)`` with ``grads`` laid out like ``net.arrays()``
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    x, _ = _prepare(net, obs_batch, eps)
    zeros = [np.zeros_like(a) for a in net.arrays()]
    if eps == 0.0:
        return 0.0, zeros

    batch = x.shape[0]
    ibp_tape = _ibp_forward(net, x, eps)
    linear, raw_lo, raw_hi, tape_l, tape_u = _crown(net, x, eps, ibp_tape)
    ibp_lo, ibp_hi = ibp_tape.lowers[-1], ibp_tape.uppers[-1]
    crown_lo_wins = raw_lo >= ibp_lo
    crown_hi_wins = raw_hi <= ibp_hi
    lower = (1.0 - beta) * ibp_lo + beta * np.where(crown_lo_wins, raw_lo, ibp_lo)
    upper = (1.0 - beta) * ibp_hi + beta * np.where(crown_hi_wins, raw_hi, ibp_hi)
    width = upper - lower
    loss = float(np.sum(width ** 2) / batch)

    g_upper = 2.0 * width / batch
    g_lower = -g_upper

    g_w = [np.zeros_like(w) for w in net.weights]
    g_b = [np.zeros_like(b) for b in net.biases]
    g_lo = [np.zeros_like(lo) for lo in ibp_tape.lowers]
    g_hi = [np.zeros_like(hi) for hi in ibp_tape.uppers]
    g_lo[-1] += (1.0 - beta) * g_lower + beta * np.where(crown_lo_wins, 0.0, g_lower)
    g_hi[-1] += (1.0 - beta) * g_upper + beta * np.where(crown_hi_wins, 0.0, g_upper)

    g_raw_lo = beta * np.where(crown_lo_wins, g_lower, 0.0)
    g_raw_hi = beta * np.where(crown_hi_wins, g_upper, 0.0)
    if beta > 0.0:
        x3 = x[:, None, :]
        g_A_u = g_raw_hi[:, :, None] * (x3 + eps * np.sign(linear.upper_A))
        g_A_l = g_raw_lo[:, :, None] * (x3 - eps * np.sign(linear.lower_A))
        _crown_reverse(net, ibp_tape, tape_u, g_A_u, g_raw_hi, True, g_w, g_b, g_lo, g_hi)
        _crown_reverse(net, ibp_tape, tape_l, g_A_l, g_raw_lo, False, g_w, g_b, g_lo, g_hi)

    _ibp_reverse(net, ibp_tape, g_w, g_b, g_lo, g_hi)
    grads: List[np.ndarray] = []
    for gw, gb in zip(g_w, g_b):
        grads.extend((gw, gb))
    return loss, grads


__all__ = [
    'BoxBound', 'LinearBound', 'MixSchedule', 'ibp', 'crown', 'crown_ibp', 'sa_regularizer',
]
