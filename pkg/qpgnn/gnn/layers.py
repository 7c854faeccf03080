"""Dense building blocks with hand-written reverse mode.

Parameters live in a flat dict keyed ``"<map>.<k>.W"`` / ``"<map>.<k>.b"``. Forward functions
return their output and a cache; backward functions take that cache and the output gradient,
add parameter gradients into ``grads`` and return the input gradient.
"""
from typing import Dict, List, Tuple

import numpy as np

Params = Dict[str, np.ndarray]


def orthogonal(fan_in: int, fan_out: int, rng: np.random.Generator, gain: float = 1.0) -> np.ndarray:
    "A (semi-)orthogonal fan_in x fan_out matrix: orthonormal columns or rows, whichever fit"
    rows, cols = max(fan_in, fan_out), min(fan_in, fan_out)
    G = rng.standard_normal((rows, cols))
    Qm, R = np.linalg.qr(G)
    Qm = Qm * np.where(np.diag(R) < 0, -1.0, 1.0)
    if fan_in < fan_out:
        Qm = Qm.T
    return gain * Qm


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def init_linear(params: Params, name: str, fan_in: int, fan_out: int, rng: np.random.Generator) -> None:
    params[name + '.W'] = orthogonal(fan_in, fan_out, rng)
    params[name + '.b'] = np.zeros(fan_out)


def linear(params: Params, name: str, x: np.ndarray) -> np.ndarray:
    return x @ params[name + '.W'] + params[name + '.b']


def linear_backward(params: Params, name: str, x: np.ndarray, dy: np.ndarray, grads: Params) -> np.ndarray:
    grads[name + '.W'] += x.T @ dy
    grads[name + '.b'] += dy.sum(axis=0)
    return dy @ params[name + '.W'].T


def init_mlp(params: Params, name: str, sizes: List[int], rng: np.random.Generator) -> None:
    "Linear layers between consecutive ``sizes``, rectified except after the last"
    for k, (a, b) in enumerate(zip(sizes, sizes[1:])):
        init_linear(params, '%s.%d' % (name, k), a, b, rng)


def mlp_depth(params: Params, name: str) -> int:
    k = 0
    while '%s.%d.W' % (name, k) in params:
        k += 1
    return k


def mlp(params: Params, name: str, x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    "Returns the output and the inputs of every linear layer"
    inputs = []
    depth = mlp_depth(params, name)
    for k in range(depth):
        inputs.append(x)
        x = linear(params, '%s.%d' % (name, k), x)
        if k < depth - 1:
            x = relu(x)
    return x, inputs


def mlp_backward(params: Params, name: str, inputs: List[np.ndarray], dy: np.ndarray, grads: Params) -> np.ndarray:
    for k in reversed(range(len(inputs))):
        if k < len(inputs) - 1:
            # inputs[k + 1] is relu(pre-activation), positive exactly where the unit was active
            dy = dy * (inputs[k + 1] > 0)
        dy = linear_backward(params, '%s.%d' % (name, k), inputs[k], dy, grads)
    return dy


def embed(params: Params, name: str, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    "Linear layer followed by ReLU; returns (output, pre-activation)"
    pre = linear(params, name, x)
    return relu(pre), pre


def embed_backward(params: Params, name: str, x: np.ndarray, pre: np.ndarray, dy: np.ndarray, grads: Params) -> np.ndarray:
    return linear_backward(params, name, x, dy * (pre > 0), grads)
