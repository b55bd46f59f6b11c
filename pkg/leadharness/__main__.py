import json
import logging
import os
import sys
from argparse import ArgumentParser

from . import __version__, experiment, puzzle, transcript
from .config import AGENT_KINDS, apply_overrides, read_config
from .errors import ConfigError, HarnessError
from .step import CHECKERS, HANOI, format_listing


log = logging.getLogger(__name__)


def make_parser():
    parser = ArgumentParser(
        prog='leadharness',
        description='Stepwise puzzle solving experiments')
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--config", help="Configuration file, or preset:<name>")
    parser.add_argument("--seed", type=int, help="Override the plan seed")
    parser.add_argument("--out-dir", help="Directory for run outputs")
    parser.add_argument(
        "--parallel", type=int, help="Episodes to run at once")
    parser.add_argument(
        "--agent", choices=AGENT_KINDS, help="Override the agent kind")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0,
        help="Log progress, twice for every step")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="Print the oracle solution")
    solve.add_argument("puzzle", choices=(CHECKERS, HANOI))
    solve.add_argument("n", type=int)
    solve.add_argument(
        "--step-ids", action="store_true", help="Number the steps")

    run = commands.add_parser("run", help="Run a strategy experiment")
    run.add_argument("--run-id", help="Name of the run directory")
    run.add_argument(
        "--require-success", action="store_true",
        help="Exit with 1 unless every episode succeeds")

    profile = commands.add_parser(
        "profile", help="Profile per-step errors of the agent")
    profile.add_argument(
        "--compare-lookahead", action="store_true",
        help="Also profile first steps of depth-k rollouts")

    analyze = commands.add_parser(
        "analyze", help="Summary tables from run transcripts")
    analyze.add_argument("paths", nargs="+", help="Run directories")
    analyze.add_argument(
        "--splits", type=int, default=10,
        help="Random splits for the self distance baseline")

    replay = commands.add_parser(
        "replay", help="Regrade an episode transcript")
    replay.add_argument("transcript")
    return parser


def _config(args):
    if args.config is None:
        raise ConfigError([('--config', 'required for %s' % args.command)])
    return apply_overrides(
        read_config(args.config), args.seed, args.out_dir, args.parallel,
        args.agent)


def solve(args):
    if args.n < 1:
        raise ConfigError([('n', 'must be at least 1')])
    steps = puzzle.oracle_trajectory(args.puzzle, args.n)
    print(format_listing(steps, with_step_id=args.step_ids))
    return 0


def run(args):
    config = _config(args)
    run_dir, manifest, records = experiment.run_experiment(
        config, args.run_id)
    totals = manifest.totals
    print('%s: %d of %d episodes succeeded' % (
        run_dir, totals['successes'], totals['episodes']))
    if args.require_success and totals['successes'] < totals['episodes']:
        return 1
    return 0


def profile(args):
    config = _config(args)
    for directory in experiment.run_profile(
            config, compare_lookahead=args.compare_lookahead):
        print(directory)
    return 0


def analyze(args):
    out_dir = os.path.join(args.out_dir or 'runs', 'analysis')
    for path in experiment.analyze(
            args.paths, out_dir, args.splits, args.seed or 0):
        print(path)
    return 0


def replay(args):
    record = transcript.replay(args.transcript)
    print(json.dumps(record.summary(), sort_keys=True, indent=2))
    return 0


COMMANDS = {
    'solve': solve,
    'run': run,
    'profile': profile,
    'analyze': analyze,
    'replay': replay,
}


def main(args=None):
    args = make_parser().parse_args(args)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][
            min(args.verbose, 2)],
        format='%(levelname)s %(name)s: %(message)s')
    try:
        return COMMANDS[args.command](args)
    except ConfigError as error:
        sys.stderr.write('leadharness: configuration error: %s\n' % error)
        return 2
    except HarnessError as error:
        log.debug('Command failed', exc_info=True)
        sys.stderr.write('leadharness: %s\n' % error)
        return 1


if __name__ == "__main__":
    sys.exit(main())
