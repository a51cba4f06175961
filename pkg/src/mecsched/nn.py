"""Feed-forward Q-network with Adam and Polyak averaging.

Parameters live in plain float64 numpy arrays.  The heavy kernels (forward,
backward, Adam, soft update) are dispatched to the compiled extension when
it is importable, otherwise to the numpy reference implementation.  Set
MECSCHED_KERNELS=py or =c to force a backend.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _kernels_c
except ImportError:  # extension not built; numpy fallback stays in charge
    _kernels_c = None

__all__ = [
    "Mlp",
    "AdamState",
    "NonFiniteLossError",
    "active_backend",
    "init_mlp",
    "clone",
    "forward",
    "double_q",
    "backward_and_step",
    "soft_update",
    "save_params",
    "load_params",
]

_MAGIC = b"MLPW"


def _select_backend():
    forced = os.environ.get("MECSCHED_KERNELS", "auto").strip().lower()
    if forced in ("py", "numpy"):
        return _kernels_py, _kernels_py
    if forced in ("c", "compiled"):
        if _kernels_c is None:
            raise ImportError("MECSCHED_KERNELS=c but the compiled extension is missing")
        return _kernels_c, _kernels_c
    if forced not in ("", "auto"):
        raise ValueError(f"MECSCHED_KERNELS={forced!r} not one of auto|py|c")
    if _kernels_c is None:
        return _kernels_py, _kernels_py
    # auto: compiled loops beat BLAS on single rows (per-slot decisions),
    # BLAS wins on training batches; parameter-wide ops go compiled
    return _kernels_c, _kernels_py


_K_SMALL, _K_BATCH = _select_backend()

# rows at or below this go to the small-batch kernels in auto mode
_SMALL_BATCH_ROWS = 4


def _K(n_rows: int):
    return _K_SMALL if n_rows <= _SMALL_BATCH_ROWS else _K_BATCH


def active_backend() -> str:
    if _K_SMALL is _K_BATCH:
        return _K_SMALL.BACKEND
    return "mixed"


class NonFiniteLossError(RuntimeError):
    """Training produced a NaN/Inf loss; the update was aborted."""


@dataclass
class Mlp:
    sizes: tuple
    weights: list = field(repr=False)
    biases: list = field(repr=False)

    @property
    def n_inputs(self) -> int:
        return self.sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.sizes[-1]

    def param_arrays(self) -> list:
        return list(self.weights) + list(self.biases)


def init_mlp(sizes, rng: np.random.Generator) -> Mlp:
    """Fan-in scaled uniform initialization, U(-1/sqrt(fan_in), +1/sqrt(fan_in))."""
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) < 2:
        raise ValueError("need at least an input and an output size")
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return Mlp(sizes, weights, biases)


def clone(net: Mlp) -> Mlp:
    return Mlp(net.sizes, [w.copy() for w in net.weights], [b.copy() for b in net.biases])


def forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Q-values for a single feature vector or a (n, d_in) batch."""
    single = x.ndim == 1
    if single:
        x = x.reshape(1, -1)
    if x.shape[1] != net.n_inputs:
        raise ValueError(f"input dim {x.shape[1]} != {net.n_inputs}")
    out = _K(x.shape[0]).mlp_forward(net.weights, net.biases,
                                     np.ascontiguousarray(x, dtype=np.float64))
    return out[0] if single else out


def double_q(policy: Mlp, target: Mlp, x: np.ndarray) -> np.ndarray:
    """Target-network value of the policy-greedy action, per input row."""
    single = x.ndim == 1
    if single:
        x = x.reshape(1, -1)
    out = _K(x.shape[0]).double_q_values(policy.weights, policy.biases,
                                         target.weights, target.biases,
                                         np.ascontiguousarray(x, dtype=np.float64))
    return out[0] if single else out


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list, repr=False)
    v: list = field(default_factory=list, repr=False)

    @classmethod
    def for_net(cls, net: Mlp, lr: float = 1e-3) -> "AdamState":
        params = net.param_arrays()
        return cls(lr=lr,
                   m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params])


def backward_and_step(net: Mlp, adam: AdamState, x: np.ndarray,
                      actions: np.ndarray, targets: np.ndarray,
                      sample_weights: np.ndarray) -> float:
    """One Adam step on the weighted squared error of the selected outputs.

    Returns the pre-step loss.  Aborts (raising NonFiniteLossError) without
    touching the parameters when the loss or a gradient is not finite.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("batch must be a non-empty 2-D array")
    actions = np.ascontiguousarray(actions, dtype=np.int64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    sample_weights = np.ascontiguousarray(sample_weights, dtype=np.float64)
    if np.any(sample_weights < 0.0):
        raise ValueError("sample weights must be non-negative")

    loss, grad_w, grad_b = _K(x.shape[0]).mlp_backward(
        net.weights, net.biases, x, actions, targets, sample_weights)
    if not np.isfinite(loss):
        raise NonFiniteLossError(
            f"non-finite loss {loss!r} (|targets| max "
            f"{float(np.abs(targets).max())}, step {adam.t})")
    adam.t += 1
    _K_SMALL.adam_update(net.param_arrays(), list(grad_w) + list(grad_b),
                         adam.m, adam.v, adam.t, adam.lr, adam.beta1, adam.beta2, adam.eps)
    return loss


def soft_update(target: Mlp, policy: Mlp, tau: float) -> None:
    """target <- tau * policy + (1 - tau) * target, parameter-wise."""
    if target.sizes != policy.sizes:
        raise ValueError(f"architecture mismatch: {target.sizes} vs {policy.sizes}")
    _K_SMALL.soft_update_arrays(target.param_arrays(), policy.param_arrays(), tau)


def save_params(net: Mlp, path) -> None:
    """Little-endian dump: magic, layer-size header, then flat float64 params."""
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<I", len(net.sizes)))
        f.write(struct.pack(f"<{len(net.sizes)}I", *net.sizes))
        for w, b in zip(net.weights, net.biases):
            f.write(w.astype("<f8").tobytes())
            f.write(b.astype("<f8").tobytes())


def load_params(path) -> Mlp:
    with open(path, "rb") as f:
        if f.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a network parameter file")
        (n,) = struct.unpack("<I", f.read(4))
        sizes = struct.unpack(f"<{n}I", f.read(4 * n))
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            w = np.frombuffer(f.read(8 * fan_in * fan_out), dtype="<f8")
            weights.append(np.ascontiguousarray(w.reshape(fan_in, fan_out).astype(np.float64)))
            biases.append(np.frombuffer(f.read(8 * fan_out), dtype="<f8").astype(np.float64))
        if f.read(1):
            raise ValueError(f"{path}: trailing bytes after parameters")
    return Mlp(tuple(int(s) for s in sizes), weights, biases)
