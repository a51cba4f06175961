"""Command-line entry points.

    mec-sched run   --config FILE [--seed N] [--out DIR] [--override k=v ...]
    mec-sched eval  --weights FILE --config FILE [--out DIR] [--override k=v ...]
    mec-sched sweep --param NAME --values v1,v2,... --config FILE [--out DIR]

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigurationError
from .harness import parse_config_file, resolve_config, run_experiment

# friendly aliases for sweep/override parameter names
_PARAM_ALIASES = {"T_ell": "train_period", "t_ell": "train_period"}


def _add_common(sub):
    sub.add_argument("--config", required=True, help="flat key=value config file")
    sub.add_argument("--out", default=None, help="output directory (overrides out_dir)")
    sub.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config key (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mec-sched",
                                     description="MEC scheduling experiments")
    subs = parser.add_subparsers(dest="command", required=True)

    run_p = subs.add_parser("run", help="train then evaluate one configuration")
    _add_common(run_p)
    run_p.add_argument("--seed", type=int, default=None,
                       help="run a single seed instead of the config's list")

    eval_p = subs.add_parser("eval", help="evaluate saved weights, no training")
    _add_common(eval_p)
    eval_p.add_argument("--weights", required=True,
                        help="parameter file; {seed} is substituted per seed")
    eval_p.add_argument("--seed", type=int, default=None)

    sweep_p = subs.add_parser("sweep", help="run one configuration per parameter value")
    _add_common(sweep_p)
    sweep_p.add_argument("--param", required=True, help="config key to vary (e.g. T_ell)")
    sweep_p.add_argument("--values", required=True, help="comma-separated values")
    return parser


def _load_config(args, extra_overrides=()):
    mapping = parse_config_file(args.config)
    overrides = list(args.override) + list(extra_overrides)
    if getattr(args, "seed", None) is not None:
        overrides.append(f"seeds={args.seed}")
    cfg = resolve_config(mapping, overrides)
    return cfg


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    paths = run_experiment(cfg, args.out)
    print(f"wrote {paths['out_dir']}")
    return 0


def _cmd_eval(args) -> int:
    overrides = [f"weights={args.weights}", "n_train=0"]
    cfg = _load_config(args, overrides)
    if cfg.policy == "sjf":
        raise ConfigurationError("eval needs a learning policy (weights are unused by sjf)")
    if cfg.policy != "fixed":
        # any learning policy evaluates greedily; reuse the frozen-weights path
        cfg.policy = "fixed"
    paths = run_experiment(cfg, args.out)
    print(f"wrote {paths['out_dir']}")
    return 0


def _cmd_sweep(args) -> int:
    import os

    key = _PARAM_ALIASES.get(args.param, args.param)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigurationError("sweep needs at least one value")
    base_cfg = _load_config(args)
    base_out = args.out if args.out is not None else base_cfg.out_dir
    for value in values:
        cfg = _load_config(args, [f"{key}={value}"])
        sub = os.path.join(base_out, f"{key}_{value}")
        paths = run_experiment(cfg, sub)
        print(f"wrote {paths['out_dir']}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "eval": _cmd_eval, "sweep": _cmd_sweep}
    try:
        return handlers[args.command](args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
