"""``sim`` command line: psd, ber, linearize, validate.

Exit status is 0 on success, 1 when validation fails, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, load_config
from .experiments import run_ber, run_linearize, run_psd, run_validate


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="flat YAML experiment config")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument(
        "--trials", type=int, default=None,
        help="Monte-Carlo size: frames for psd and validate, channel realizations for ber",
    )
    common.add_argument("--workers", type=int, default=1, help="worker processes")

    parser = argparse.ArgumentParser(prog="sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("psd", "analytic vs simulated PSD per subcarrier"),
        ("ber", "analytic vs simulated ZF/QPSK bit error rate over the SNR grid"),
        ("linearize", "dump Bussgang gains and per-subcarrier distortion power"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--out", required=True, help="output CSV path")
    p = sub.add_parser("validate", parents=[common], help="reduced-scale self-check")
    p.add_argument("--literal-composition", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2

    if args.command == "psd":
        run_psd(cfg, args.out, seed=args.seed, n_frames=args.trials, workers=args.workers)
    elif args.command == "ber":
        run_ber(cfg, args.out, seed=args.seed, n_channels=args.trials, workers=args.workers)
    elif args.command == "linearize":
        run_linearize(cfg, args.out, seed=args.seed)
    else:
        kwargs = {} if args.trials is None else {"psd_frames": args.trials}
        report = run_validate(
            cfg, seed=args.seed, literal_composition=args.literal_composition,
            workers=args.workers, **kwargs,
        )
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0 if report["passed"] else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
