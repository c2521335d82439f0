#!/usr/bin/env python3
"""
Quasigroup Prolongation
-----------------------
Command line tool for extending Latin squares by one element, searching
complete and quasicomplete mappings, deciding isotopy of small squares and
scanning reduced squares for short maximum partial transversals.
"""

import argparse
import itertools
import logging
import os
import sys

import numpy as np

from quasigroup_prolong.utils.core import (
    Permutation,
    QuasigroupError,
    group_table,
    parse_table,
    random_square,
    validate,
)
from quasigroup_prolong.utils.data_manager import DataManager
from quasigroup_prolong.utils.harness import (
    BrualdiCounterexampleError,
    RunConfig,
    brualdi_scan,
    prolong_any,
)
from quasigroup_prolong.utils.isotopy import are_isotopic, witness_to_text
from quasigroup_prolong.utils.mappings import MappingKind, classify, iter_mappings
from quasigroup_prolong.utils.prolong import Method, ProlongationSpec, eligible_mappings, prolong

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT_ERROR = 2


def get_version():
    """Get version from version.txt next to the package"""
    try:
        version_path = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'version.txt')
        with open(version_path, 'r') as f:
            return f.read().strip()
    except OSError:
        return "0.1"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="quasigroup-prolong",
        description="Prolongations of quasigroups given as Latin square tables",
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {get_version()}")
    parser.add_argument('-v', '--verbose', action='store_true', help='Log search details to stderr')
    parser.add_argument('--config-dir', help='Directory holding config.json (default: user data directory)')
    commands = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')

    cmd = commands.add_parser('validate', help='Check that a table is a Latin square')
    cmd.add_argument('file')

    cmd = commands.add_parser('mappings', help='List complete and/or quasicomplete mappings')
    cmd.add_argument('file')
    cmd.add_argument('--kind', choices=['complete', 'quasicomplete', 'all'], default='all')
    cmd.add_argument('--limit', type=int, help='Stop after this many mappings')

    cmd = commands.add_parser('prolong', help='Build the order n+1 prolongation of a square')
    cmd.add_argument('file')
    cmd.add_argument('--method', required=True, choices=[m.value for m in Method])
    cmd.add_argument('--sigma', help='Mapping as comma separated images, e.g. 4,2,1,5,3 (default: first eligible)')
    cmd.add_argument('--a', type=int, help='Element kept on the track (belyavskaya)')
    cmd.add_argument('--x1', type=int, help='Special preimage that keeps a (dd, default: the smaller one)')
    cmd.add_argument('--output', help='Write the result to this file instead of stdout')

    cmd = commands.add_parser('prolong-any', help='Prolong through a maximum partial transversal')
    cmd.add_argument('file')
    cmd.add_argument('--output', help='Write the result to this file instead of stdout')

    cmd = commands.add_parser('isotopy', help='Decide whether two squares are isotopic')
    cmd.add_argument('file1')
    cmd.add_argument('file2')

    cmd = commands.add_parser('brualdi', help='Scan every reduced square of an order')
    cmd.add_argument('--order', type=int, required=True)
    cmd.add_argument('--threads', type=int, help='Worker processes for the scan')
    cmd.add_argument('--progress', action='store_true', help='Show a progress bar')

    cmd = commands.add_parser('gen', help='Print a group table, a random square or a bundled fixture')
    source = cmd.add_mutually_exclusive_group(required=True)
    source.add_argument('--cyclic', type=int, metavar='N', help='Addition table of Z_N')
    source.add_argument('--klein', action='store_true', help='Klein four-group table')
    source.add_argument('--random', type=int, metavar='N', help='Random Latin square of order N')
    source.add_argument('--fixture', metavar='NAME', help='Bundled table, stored text as is')
    cmd.add_argument('--seed', type=int, help='Seed for --random')
    cmd.add_argument('--output', help='Write the result to this file instead of stdout')

    return parser


def build_run_config(args, config):
    """Merge parsed flags over the stored configuration"""
    if args.command == 'isotopy':
        inputs = (args.file1, args.file2)
    elif hasattr(args, 'file'):
        inputs = (args.file,)
    else:
        inputs = ()

    threads = getattr(args, 'threads', None)
    limit = getattr(args, 'limit', None)
    run = RunConfig(
        command=args.command,
        inputs=inputs,
        kind=getattr(args, 'kind', 'all'),
        limit=limit if limit is not None else config.get('mapping_limit'),
        method=getattr(args, 'method', None),
        sigma=getattr(args, 'sigma', None),
        a=getattr(args, 'a', None),
        x1=getattr(args, 'x1', None),
        order=getattr(args, 'order', None),
        threads=threads if threads is not None else config.get('threads', 1),
        progress=getattr(args, 'progress', False) or bool(config.get('progress', False)),
        output=getattr(args, 'output', None),
        isotopy_max_order=config.get('isotopy_max_order', RunConfig.isotopy_max_order),
    )
    run.check()
    return run


def _load(data_manager, path):
    success, message, square = data_manager.load_square(path)
    if not success:
        raise QuasigroupError(message)
    return square


def _emit(text, run, data_manager):
    if run.output is None:
        print(text, end='')
        return EXIT_OK
    success, message = data_manager.save_text(text, run.output)
    if not success:
        logger.error(message)
        return EXIT_INPUT_ERROR
    logger.info(message)
    return EXIT_OK


def run_validate(run, args, data_manager):
    success, message, text = data_manager.read_text(run.inputs[0])
    if not success:
        raise QuasigroupError(message)
    result = validate(parse_table(text))
    if result.valid:
        print(result.message)
        return EXIT_OK
    print(f"invalid: {result.message}")
    return EXIT_NEGATIVE


def run_mappings(run, args, data_manager):
    square = _load(data_manager, run.inputs[0])
    kind = None if run.kind == 'all' else MappingKind(run.kind)
    found = 0
    for sigma, sigma_kind in itertools.islice(iter_mappings(square, kind), run.limit):
        print(f"{sigma} {sigma_kind.value}" if kind is None else str(sigma))
        found += 1
    if not found:
        print(f"no {run.kind if kind else 'complete or quasicomplete'} mappings", file=sys.stderr)
        return EXIT_NEGATIVE
    return EXIT_OK


def run_prolong(run, args, data_manager):
    square = _load(data_manager, run.inputs[0])
    method = Method.from_name(run.method)

    if run.sigma is not None:
        sigma = Permutation.parse(run.sigma)
    else:
        candidates = eligible_mappings(square, method, limit=1)
        if not candidates:
            wanted = 'quasicomplete' if method is Method.DD else 'complete'
            print(f"no {wanted} mapping exists, {method.value} prolongation impossible", file=sys.stderr)
            return EXIT_NEGATIVE
        sigma = candidates[0]
        logger.info("Using first eligible mapping %s", sigma)

    x1 = run.x1
    if method is Method.DD and x1 is None:
        info = classify(square, sigma)
        if info.kind is MappingKind.QUASICOMPLETE:
            x1 = min(info.special_preimages)

    result = prolong(square, ProlongationSpec(method, sigma, a=run.a, x1=x1))
    return _emit(result.to_text(), run, data_manager)


def run_prolong_any(run, args, data_manager):
    square = _load(data_manager, run.inputs[0])
    try:
        result = prolong_any(square)
    except BrualdiCounterexampleError as e:
        logger.error("%s", e)
        print(e.square.to_text(), end='', file=sys.stderr)
        return EXIT_NEGATIVE
    return _emit(result.to_text(), run, data_manager)


def run_isotopy(run, args, data_manager):
    left = _load(data_manager, run.inputs[0])
    right = _load(data_manager, run.inputs[1])
    witness = are_isotopic(left, right, max_order=run.isotopy_max_order)
    if witness is None:
        print("not-isotopic")
        return EXIT_NEGATIVE
    print("isotopic")
    print(witness_to_text(witness), end='')
    return EXIT_OK


def run_brualdi(run, args, data_manager):
    report = brualdi_scan(run.order, threads=run.threads, progress=run.progress)
    print(report.summary())
    return EXIT_NEGATIVE if report.witnesses else EXIT_OK


def run_gen(run, args, data_manager):
    if args.fixture is not None:
        success, message, text = data_manager.read_fixture_text(args.fixture)
        if not success:
            raise QuasigroupError(message)
        return _emit(text, run, data_manager)

    if args.random is not None:
        square = random_square(args.random, np.random.default_rng(args.seed))
        comments = [f"random order {args.random}, seed {args.seed}"]
    elif args.klein:
        square = group_table('klein')
        comments = ["Klein four-group"]
    else:
        square = group_table('cyclic', args.cyclic)
        comments = [f"Z_{args.cyclic} under addition, residue k written as k+1"]
    return _emit(square.to_text(comments), run, data_manager)


HANDLERS = {
    'validate': run_validate,
    'mappings': run_mappings,
    'prolong': run_prolong,
    'prolong-any': run_prolong_any,
    'isotopy': run_isotopy,
    'brualdi': run_brualdi,
    'gen': run_gen,
}


def main(argv=None, data_manager=None):
    """Run one command; returns the process exit code"""
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )

    if data_manager is None:
        data_manager = DataManager(args.config_dir)

    try:
        run = build_run_config(args, data_manager.load_config())
        return HANDLERS[run.command](run, args, data_manager)
    except QuasigroupError as e:
        logger.error("%s", e)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
