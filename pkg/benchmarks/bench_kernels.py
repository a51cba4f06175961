#!/usr/bin/env python3
"""Compare the compiled and numpy kernel backends on the hot paths.

Covers the isolated kernels (realistic sparse inputs) and a full training
episode per backend, plus the mixed auto dispatch the package uses by
default.  Run after `pip install -e .`:

    python benchmarks/bench_kernels.py [--episodes N]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def bench(fn, repeat=2000):
    fn()  # warm
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat * 1e6


def realistic_batch(rng, n, dim, sparsity=0.5):
    x = rng.random((n, dim))
    x[rng.random((n, dim)) < sparsity] = 0.0
    return np.ascontiguousarray(x)


def kernel_table():
    from mecsched import _kernels_py
    from mecsched import nn

    try:
        from mecsched import _kernels as _kernels_c
    except ImportError:
        print("compiled extension not built; only the numpy backend is available")
        _kernels_c = None

    rng = np.random.default_rng(0)
    net = nn.init_mlp((50, 128, 128, 11), rng)
    tgt = nn.clone(net)
    x1 = realistic_batch(rng, 1, 50)
    x16 = realistic_batch(rng, 16, 50)
    actions = rng.integers(0, 11, 16)
    targets = rng.standard_normal(16)
    ones = np.ones(16)
    params = net.param_arrays()
    grads = [0.01 * p for p in params]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]

    backends = [("numpy", _kernels_py)]
    if _kernels_c is not None:
        backends.insert(0, ("compiled", _kernels_c))

    rows = {}
    for name, K in backends:
        rows[name] = {
            "forward 1x50": bench(lambda: K.mlp_forward(net.weights, net.biases, x1)),
            "forward 16x50": bench(lambda: K.mlp_forward(net.weights, net.biases, x16)),
            "double-Q 1x50": bench(lambda: K.double_q_values(
                net.weights, net.biases, tgt.weights, tgt.biases, x1)),
            "double-Q 16x50": bench(lambda: K.double_q_values(
                net.weights, net.biases, tgt.weights, tgt.biases, x16), 800),
            "backward 16x50": bench(lambda: K.mlp_backward(
                net.weights, net.biases, x16, actions, targets, ones), 800),
            "adam 37k params": bench(lambda: K.adam_update(
                params, grads, m, v, 5, 1e-3, 0.9, 0.999, 1e-8), 800),
            "soft update 37k": bench(lambda: K.soft_update_arrays(params, grads, 0.005), 800),
        }

    names = list(rows)
    width = max(len(k) for k in rows[names[0]])
    header = f"{'kernel':<{width}}" + "".join(f"{n:>12}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for key in rows[names[0]]:
        line = f"{key:<{width}}"
        for n in names:
            line += f"{rows[n][key]:>10.1f}us"
        if len(names) == 2:
            line += f"{rows[names[1]][key] / rows[names[0]][key]:>9.2f}x"
        print(line)


def episode_time(backend, episodes):
    """Measure in a subprocess so the backend choice applies at import."""
    code = (
        "import time\n"
        "from mecsched.harness import resolve_config, build_components, run_episode\n"
        "cfg = resolve_config({'policy': 'pts', 'n_slot': '1000', 'seeds': '1'})\n"
        "comp = build_components(cfg, 1)\n"
        "running = {'episodes': 0, 'sum_reward': 0.0}\n"
        "run_episode(comp, 0, 0.3, True, running)\n"
        "t = time.perf_counter()\n"
        f"for ep in range(1, 1 + {episodes}):\n"
        "    run_episode(comp, ep, 0.3, True, running)\n"
        f"print((time.perf_counter() - t) / {episodes})\n"
    )
    env = dict(os.environ, MECSCHED_KERNELS=backend)
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=3,
                        help="episodes per backend for the end-to-end row")
    args = parser.parse_args()

    from mecsched import nn
    print(f"default backend: {nn.active_backend()}\n")
    kernel_table()

    print("\nend-to-end training episode (1000 slots, periodic training):")
    for backend in ("py", "c", "auto"):
        try:
            dt = episode_time(backend, args.episodes)
        except subprocess.CalledProcessError as exc:
            print(f"  {backend:5s}: unavailable ({exc.stderr.strip().splitlines()[-1]})")
            continue
        print(f"  {backend:5s}: {dt * 1000:7.1f} ms/episode")


if __name__ == "__main__":
    main()
