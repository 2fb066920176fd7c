"""
Command line entry point.

Examples
--------
    txrx-duality single --seed 3
    txrx-duality sweep-gamma --gamma-db -10,-5,0,5,10 --trials 100 --out fig2.csv
    txrx-duality sweep-weight --weights 1,2,5,10,20 --out fig4.jsonl --format jsonl
    txrx-duality verify-link --trials 10

Exit codes: 0 success, 1 bad configuration, 2 every trial failed or was
infeasible, 3 I/O error.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace

from .. import __version__
from ..errors import ConfigError
from ..model import load_config
from ..solver import SolveOptions
from .experiments import ExperimentSpec, paper_config, run_experiment, summarize
from .results import build_metadata, emit_results

EXIT_OK, EXIT_CONFIG, EXIT_NO_RESULTS, EXIT_IO = 0, 1, 2, 3

COMMANDS = {'single': 'single', 'sweep-gamma': 'sweep_gamma',
            'sweep-weight': 'sweep_weight', 'verify-link': 'verify_link'}


def _floats(text):
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog='txrx-duality',
        description='Weighted sum-power minimization with SINR targets for the '
                    'multiuser MIMO downlink.')
    parser.add_argument('--version', action='version', version=__version__)
    sub = parser.add_subparsers(dest='command', required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument('--config', help='JSON system configuration (default: 8-antenna '
                                         'base station, 4 users with 2 antennas, 2 substreams)')
        p.add_argument('--users', type=int, help='number of users for the default configuration')
        p.add_argument('--seed', type=int, default=0, help='first seed')
        p.add_argument('--trials', type=int, default=None)
        p.add_argument('--out', help='result file (rows); metadata goes to <out>.meta.json')
        p.add_argument('--format', choices=('csv', 'jsonl'), default='csv')
        p.add_argument('--gamma-db', type=_floats, help='SINR target grid in dB')
        p.add_argument('--weights', type=_floats, help="user 1's weight grid")
        p.add_argument('--epsilon', type=float)
        p.add_argument('--max-iters', type=int)
        p.add_argument('--mean-db', action='store_true',
                       help='average powers in dB instead of linear')
        p.add_argument('--retries', type=int, default=3,
                       help='single: target relaxations after an infeasible run')
        p.add_argument('--backoff', type=float, default=0.5,
                       help='single: target multiplier per relaxation')
        p.add_argument('--n-sym', type=int, default=100_000,
                       help='verify-link: QPSK symbols per substream')
        p.add_argument('-v', '--verbose', action='store_true')
    return parser


def _spec_from_args(args):
    if args.config:
        config = load_config(args.config)
        if args.users:
            raise ConfigError(["--users only applies to the default configuration"])
    else:
        config = paper_config(K=args.users or 4)
    if args.epsilon is not None:
        config = replace(config, epsilon=args.epsilon)
    if args.max_iters is not None:
        config = replace(config, max_iters=args.max_iters)
    kind = COMMANDS[args.command]
    values = ()
    if kind == 'sweep_gamma':
        values = args.gamma_db or [-10, -5, 0, 5, 10]
    elif kind == 'sweep_weight':
        values = args.weights or [1, 2, 5, 10, 20]
    trials = args.trials or (1 if kind == 'single' else 10 if kind == 'verify_link' else 100)
    return ExperimentSpec(
        kind=kind, config=config, values=values, trials=trials, seed0=args.seed,
        backoff=args.backoff, max_retries=args.retries if kind == 'single' else 0,
        options=SolveOptions.from_config(config), n_sym=args.n_sym, mean_db=args.mean_db)


def _print_rows(rows, spec, out):
    if spec.kind in ('single', 'verify_link'):
        for r in rows:
            extra = ''
            if r.empirical_sinr_db:
                extra = '  empirical SINR dB: ' + ' '.join(f"{x:.2f}" for x in r.empirical_sinr_db)
            print(f"seed {r.seed}: {r.status} after {r.iterations} iterations, "
                  f"total power {r.total_power_db:.3f} dB, gap {r.duality_gap:.2e}{extra}",
                  file=out)
        return
    label = 'gamma_dB' if spec.kind == 'sweep_gamma' else 'weight'
    print(f"{label:>9} {'trials':>6} {'feas':>5} {'infeas':>6} {'fail':>5} "
          f"{'P_tot dB':>9} {'P_1 dB':>8}", file=out)
    for s in summarize(rows, spec.mean_db):
        print(f"{s.value:9.3g} {s.trials:6d} {s.feasible:5d} {s.infeasible:6d} {s.failed:5d} "
              f"{s.mean_total_power_db:9.3f} {s.mean_user1_power_db:8.3f}", file=out)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        spec = _spec_from_args(args)
        rows = run_experiment(spec)
    except (ConfigError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    _print_rows(rows, spec, sys.stdout)
    if args.out:
        try:
            emit_results(rows, args.out, args.format, build_metadata(spec, __version__))
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    if not any(r.feasible for r in rows):
        return EXIT_NO_RESULTS
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
