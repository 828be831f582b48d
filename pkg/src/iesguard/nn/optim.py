"""
Adam over lists of numpy arrays.

The optimizer state is a value record; ``adam_update`` returns the new
arrays together with the new state and never mutates its inputs.
"""
from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError
from .mlp import MlpParams


@dataclass(frozen=True)
class AdamState:
    m: Tuple[np.ndarray, ...]
    v: Tuple[np.ndarray, ...]
    step: int = 0
    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, arrays: Sequence[np.ndarray], lr: float, **kwargs) -> 'AdamState':
        zeros = tuple(np.zeros_like(np.asarray(a, dtype=np.float64)) for a in arrays)
        return cls(m=zeros, v=tuple(z.copy() for z in zeros), lr=lr, **kwargs)

    @classmethod
    def for_net(cls, net: MlpParams, lr: float, **kwargs) -> 'AdamState':
        return cls.zeros_like(net.arrays(), lr, **kwargs)

    def with_lr(self, lr: float) -> 'AdamState':
        return replace(self, lr=lr)


def adam_update(arrays: Sequence[np.ndarray], grads: Sequence[np.ndarray],
                st: AdamState) -> Tuple[List[np.ndarray], AdamState]:
    """One bias-corrected Adam step.

    Raises:
        DimensionMismatchError: If gradients do not match the parameters or the state
    """
    if not len(arrays) == len(grads) == len(st.m):
        raise DimensionMismatchError(
            f"Adam got {len(arrays)} parameters, {len(grads)} gradients and {len(st.m)} moments"
        )
    step = st.step + 1
    c1 = 1.0 - st.beta1 ** step
    c2 = 1.0 - st.beta2 ** step
    new_arrays, new_m, new_v = [], [], []
    for p, g, m, v in zip(arrays, grads, st.m, st.v):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != np.shape(p) or m.shape != g.shape:
            raise DimensionMismatchError(f"gradient shape {g.shape} does not match parameter {np.shape(p)}")
        m = st.beta1 * m + (1.0 - st.beta1) * g
        v = st.beta2 * v + (1.0 - st.beta2) * g * g
        new_arrays.append(p - st.lr * (m / c1) / (np.sqrt(v / c2) + st.eps))
        new_m.append(m)
        new_v.append(v)
    return new_arrays, replace(st, m=tuple(new_m), v=tuple(new_v), step=step)


def adam_step(net: MlpParams, grads: Sequence[np.ndarray], st: AdamState) -> Tuple[MlpParams, AdamState]:
    """Adam step on a network; the returned parameters carry ``version + 1``."""
    arrays, st = adam_update(net.arrays(), grads, st)
    return net.with_arrays(arrays), st


__all__ = ['AdamState', 'adam_update', 'adam_step']
