"""Pure-numpy implementations of the hot network kernels.

Reference backend: the compiled extension in `_kernels.pyx` mirrors these
signatures exactly and is preferred at import time when available.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def mlp_forward(weights: list, biases: list, x: np.ndarray) -> np.ndarray:
    """Dense ReLU stack with a linear last layer; x is (n, d_in)."""
    h = x
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        h = h @ w + b
        if i != last:
            np.maximum(h, 0.0, out=h)
    return h


def mlp_backward(weights: list, biases: list, x: np.ndarray,
                 actions: np.ndarray, targets: np.ndarray,
                 sample_weights: np.ndarray):
    """Weighted squared error on the selected outputs.

    loss = sum_i w_i * (q_i[a_i] - t_i)^2 / sum_i w_i
    Returns (loss, weight_grads, bias_grads).
    """
    last = len(weights) - 1
    acts = [x]
    pre = []
    h = x
    for i, (w, b) in enumerate(zip(weights, biases)):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if i != last else z
        acts.append(h)

    n = x.shape[0]
    rows = np.arange(n)
    resid = acts[-1][rows, actions] - targets
    wsum = float(sample_weights.sum())
    loss = float(np.dot(sample_weights, resid * resid) / wsum)

    delta = np.zeros_like(acts[-1])
    delta[rows, actions] = 2.0 * sample_weights * resid / wsum

    grad_w = [None] * len(weights)
    grad_b = [None] * len(weights)
    for i in range(last, -1, -1):
        grad_w[i] = acts[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ weights[i].T
            delta[pre[i - 1] <= 0.0] = 0.0
    return loss, grad_w, grad_b


def double_q_values(policy_w: list, policy_b: list, target_w: list,
                    target_b: list, x: np.ndarray) -> np.ndarray:
    """Per row: target-network value of the policy-argmax action."""
    q_policy = mlp_forward(policy_w, policy_b, x)
    best = np.argmax(q_policy, axis=1)
    q_target = mlp_forward(target_w, target_b, x)
    return q_target[np.arange(x.shape[0]), best]


def adam_update(params: list, grads: list, m: list, v: list, t: int,
                lr: float, beta1: float, beta2: float, eps: float) -> None:
    """One bias-corrected Adam step, in place; t is the 1-based step count."""
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    for p, g, mi, vi in zip(params, grads, m, v):
        mi *= beta1
        mi += (1.0 - beta1) * g
        vi *= beta2
        vi += (1.0 - beta2) * (g * g)
        p -= lr * (mi / bc1) / (np.sqrt(vi / bc2) + eps)


def soft_update_arrays(targets: list, sources: list, tau: float) -> None:
    """target <- tau * source + (1 - tau) * target, in place."""
    for t_arr, s_arr in zip(targets, sources):
        t_arr *= 1.0 - tau
        t_arr += tau * s_arr
