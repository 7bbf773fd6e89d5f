"""Command-line entry point: ``dynalab run | heatmap | oracle``."""

from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from dynalab.agent import run
from dynalab.envs import make_env
from dynalab.errors import ConfigError
from dynalab.harness.config import load_config, preset_names
from dynalab.harness.heatmap import emit_heatmap, pgm_path
from dynalab.harness.oracle import value_iteration_oracle
from dynalab.harness.sweep import run_experiment, write_outputs


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.paper_scale:
        cfg.apply_full_scale()
    if args.seeds is not None:
        cfg.seeds = list(range(args.seeds))
    out = args.out or cfg.out
    t0 = time.perf_counter()
    result = run_experiment(cfg, parallel=args.parallel)
    write_outputs(result, out, heatmaps=cfg.heatmaps)
    for label, s in sorted(result.best_by_label().items()):
        print(f"{label:32s} best alpha={s.alpha:.4g} beta={s.beta:g} "
              f"auc={s.auc_mean:.4f}±{s.auc_stderr:.4f} final={s.final_mean:.1f}")
    aborted = sum(r.aborted for r in result.runs)
    print(f"{len(result.runs)} runs ({aborted} aborted) in {time.perf_counter() - t0:.1f}s; "
          f"results in {out}")
    return 0


def _cmd_heatmap(args) -> int:
    cfg = load_config(args.config)
    entry, alpha, beta = next(iter(cfg.settings()))
    runlog = run(cfg.run_spec(entry, alpha, beta), cfg.seeds[0])
    emit_heatmap(runlog.qf, runlog.env, args.out)
    print(f"{entry.label} alpha={alpha:g} beta={beta:g} seed={cfg.seeds[0]}: "
          f"wrote {args.out} and {pgm_path(args.out)}")
    return 0


def _cmd_oracle(args) -> int:
    env = make_env(args.env, rng=np.random.default_rng(0))
    grid = value_iteration_oracle(env, args.gamma, args.tol)
    for row in grid:
        print(",".join("nan" if np.isnan(v) else f"{v:.6f}" for v in row))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynalab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a sweep described by a config file or preset")
    p.add_argument("--config", required=True,
                   help=f"config file path or preset name ({', '.join(preset_names())})")
    p.add_argument("--seeds", type=int, help="use seeds 0..k-1 instead of the config's list")
    p.add_argument("--out", help="output directory (default: the config's 'out' key)")
    p.add_argument("--paper-scale", action="store_true",
                   help="30 seeds and 20 sampled step sizes instead of the desk defaults")
    p.add_argument("--parallel", type=int, default=1, help="worker processes")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("heatmap", help="run the config's first setting and write max_a Q")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="CSV path; a .pgm is written beside it")
    p.set_defaults(func=_cmd_heatmap)

    p = sub.add_parser("oracle", help="print V* from value iteration")
    p.add_argument("--env", default="borderworld")
    p.add_argument("--gamma", type=float, default=0.95)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
