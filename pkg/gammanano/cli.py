#!/usr/bin/env python3
"""CLI for gammanano with one subcommand per pipeline stage."""

import sys
import asyncio
import argparse
import logging
from pathlib import Path

from gammanano.config import EXIT_OK, EXIT_SELFTEST, SELFTEST_FILE
from gammanano.core import analyze, curves, decode, encode, simulate, simulate_async
from gammanano.errors import GammaNanoError
from gammanano.experiment import config_digest, load_config, with_overrides
from gammanano.selftest import run_selftest
from gammanano.utils import print_stats, write_json


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Experiment JSON file (default: built-in defaults)')
    common.add_argument('--seed', type=int, default=None, help='Override the random seed')
    common.add_argument('--out', default=None, help='Output directory')
    common.add_argument('--mode', choices=['micro', 'macro'], default=None,
                        help='Monte Carlo mode (default: from config)')
    common.add_argument('--offset-hz', type=float, default=None,
                        help='Start-rate mismatch delta in Hz (default: from config)')
    common.add_argument('--threads', type=int, default=None,
                        help='Worker threads for the simulation (default: from config)')
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='gammanano',
        description='gammanano - gamma-photon phase-modulation messaging simulator',
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    common = _common_flags()
    subparsers = parser.add_subparsers(dest='command', help='Commands')

    subparsers.add_parser('encode', parents=[common], help='Encode the message into a pulse train')
    subparsers.add_parser('curves', parents=[common], help='Write the analytic curves as CSV')

    simulate_parser = subparsers.add_parser('simulate', parents=[common],
                                            help='Simulate detections and accumulate the TAC histogram')
    simulate_parser.add_argument('--records', action='store_true',
                                 help='Also write the detection records CSV')
    simulate_parser.add_argument('--duration', type=float, default=None,
                                 help='Simulated acquisition time in seconds')

    decode_parser = subparsers.add_parser('decode', parents=[common], help='Decode a histogram CSV')
    decode_parser.add_argument('histogram', help='Histogram CSV written by simulate')

    subparsers.add_parser('analyze', parents=[common], help='Stealth report and compensating filter')

    selftest_parser = subparsers.add_parser('selftest', parents=[common], help='Run the acceptance checks')
    selftest_parser.add_argument('--full', action='store_true',
                                 help='Full statistics instead of the quick run')
    return parser


def _selftest(cfg, full: bool) -> int:
    results = run_selftest(cfg, quick=not full)
    failed = [r for r in results if not r.passed]
    write_json(Path(cfg.output_dir) / SELFTEST_FILE, {
        "passed": not failed,
        "checks": [r._asdict() for r in results],
    }, config_digest(cfg), cfg.seed)
    print_stats({"checks": len(results), "passed": len(results) - len(failed), "failed": len(failed)},
                "SELF-TEST")
    for r in failed:
        print(f"✗ {r.name}: observed {r.observed}, expected {r.expected}")
    return EXIT_OK if not failed else EXIT_SELFTEST


def main(argv=None) -> int:
    """Main CLI entry point. Returns the process exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return EXIT_OK

    try:
        cfg = with_overrides(
            load_config(args.config),
            seed=args.seed,
            mode=args.mode,
            offset_hz=args.offset_hz,
            output_dir=args.out,
            threads=args.threads,
            duration_s=getattr(args, 'duration', None),
        )

        # Handle commands
        if args.command == 'encode':
            encode(cfg)

        elif args.command == 'curves':
            curves(cfg)

        elif args.command == 'simulate':
            if cfg.threads > 1:
                asyncio.run(simulate_async(cfg, save_records=args.records))
            else:
                simulate(cfg, save_records=args.records)

        elif args.command == 'decode':
            result = decode(args.histogram, cfg)
            print(f"Peaks ({result.peaks.size}): " + " ".join(f"{p:.1f}" for p in result.peaks))
            print(f"Message: {result.text.decode('latin-1')}")

        elif args.command == 'analyze':
            analyze(cfg)

        elif args.command == 'selftest':
            return _selftest(cfg, args.full)

    except GammaNanoError as e:
        logging.error(f"✗ {type(e).__name__}: {e}")
        return e.exit_code

    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
