"""Command line entry point: ``gfnoma run | codebook | eigens``."""

import argparse
import logging
import sys

from .harness import ConfigError, eigen_profiles, emit_csv, emit_eigen_csv, format_csv, load_config, parse_overrides
from .harness.report import format_eigen_csv
from .signatures import coherence, generate_grassmannian, save_codebook, welch_bound

log = logging.getLogger("gfnoma")


def _config(args):
    overrides = parse_overrides(args.set or [])
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    return load_config(args.config, **overrides)


def cmd_run(args) -> int:
    from .harness import run_sweep

    cfg = _config(args)

    def progress(s):
        log.info("sweep %s: decoded %.3f, miss %.4f, fa %.4f, ka_hat %.2f",
                 s.sweep_value, s.mean_decoded, s.miss_rate, s.fa_rate, s.mean_ka_hat)

    summaries = run_sweep(cfg, progress=progress)
    if args.out:
        emit_csv(summaries, args.out)
    else:
        sys.stdout.write(format_csv(summaries))
    return 0


def cmd_codebook(args) -> int:
    cb = generate_grassmannian(args.length, args.size, seed=args.seed, iterations=args.iterations)
    save_codebook(cb, args.out)
    if cb.size > 1:
        log.info("%dx%d codebook: coherence %.4f (Welch bound %.4f)",
                 cb.length, cb.size, coherence(cb), welch_bound(cb.length, cb.size))
    return 0


def cmd_eigens(args) -> int:
    cfg = _config(args)
    rows = eigen_profiles(cfg, args.realizations)
    if args.out:
        emit_eigen_csv(rows, args.out)
    else:
        sys.stdout.write(format_eigen_csv(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gfnoma", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_args(sp):
        sp.add_argument("config", nargs="?", help="key = value scenario file")
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        sp.add_argument("--out", help="output CSV (stdout if omitted)")

    run = sub.add_parser("run", help="Monte-Carlo sweep to CSV")
    scenario_args(run)
    run.add_argument("--trials", type=int)
    run.add_argument("--workers", type=int)
    run.set_defaults(func=cmd_run)

    cb = sub.add_parser("codebook", help="generate and save a Grassmannian codebook")
    cb.add_argument("--length", type=int, required=True)
    cb.add_argument("--size", type=int, required=True)
    cb.add_argument("--seed", type=int, default=0)
    cb.add_argument("--iterations", type=int, default=1000)
    cb.add_argument("--out", required=True)
    cb.set_defaults(func=cmd_codebook)

    eig = sub.add_parser("eigens", help="eigenvalue profiles of single realizations")
    scenario_args(eig)
    eig.add_argument("--realizations", type=int, default=1)
    eig.set_defaults(func=cmd_eigens)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        log.error("error: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
