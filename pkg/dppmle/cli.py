#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Command line driver: dppmle {solve, verify, sample, regions, bench}
"""
import argparse, logging, sys
import dppmle
from . import model, dpp, solver, analysis, io
from .exceptions import DppMleError, IncompleteSet, NoRealSolution, UsageError
from .utils import timer
logger = logging.getLogger('dppmle')

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INCOMPLETE = 2
EXIT_VERIFY = 3


class RunConfig(object):
    """
    Validated command line settings for one run
    """
    def __init__(self, args):
        super(RunConfig, self).__init__()
        self.command = args.command
        self.n = getattr(args, 'n', None)
        if not self.n is None and self.n < 3:
            raise ValueError('n must be >= 3, got {0}'.format(self.n))
        self.u_path = getattr(args, 'u', None)
        self.seed = dppmle.CONFIG.seed if args.seed is None else args.seed
        self.deterministic = args.deterministic
        workers = dppmle.CONFIG.workers if args.workers is None else args.workers
        if workers < 1:
            raise ValueError('workers must be >= 1, got {0}'.format(workers))
        self.workers = 1 if self.deterministic else workers
        self.out_path = args.out
        self.target_count = getattr(args, 'target_count', None)
        self.tracker = dppmle.CONFIG.tracker_config(
            stall_limit = getattr(args, 'stall_limit', None),
            dedup_tol = getattr(args, 'dedup_tol', None),
            reality_tol = getattr(args, 'reality_tol', None),
            )
        self.args = args

    def __repr__(self):
        return '<RunConfig {0} n={1} seed={2} workers={3} deterministic={4}>'.format(
            self.command, self.n, self.seed, self.workers, self.deterministic
            )


class PipelineResult(object):
    def __init__(self, counts, solutions, mle, implicit_count, timings_ms, complete):
        super(PipelineResult, self).__init__()
        self.counts = counts
        self.solutions = solutions
        self.mle = mle
        self.implicit_count = implicit_count
        self.timings_ms = timings_ms
        self.complete = complete


def run_pipeline(counts, cfg):
    """
    monodromy_solve -> solve_at -> classify_hessians -> select_mle for one
    data vector. An incomplete monodromy run is carried through with the
    partial set and flagged.
    """
    S = solver.GradientSystem(counts.n)
    timings = {}
    complete = True
    with timer('monodromy') as t:
        try:
            warmstart = solver.monodromy_solve(
                S, cfg.seed, target_count=cfg.target_count, cfg=cfg.tracker, workers=cfg.workers
                )
        except IncompleteSet as e:
            logger.warning('Continuing with the incomplete set: %s', e)
            warmstart = (e.u0, e.solutions)
            complete = False
    timings['monodromy'] = t.ms
    with timer('homotopy') as t:
        solutions = solver.solve_at(
            S, counts, warmstart, cfg=cfg.tracker, seed=cfg.seed, workers=cfg.workers
            )
    timings['homotopy'] = t.ms
    with timer('analysis') as t:
        solutions = analysis.classify_hessians(solutions, counts)
        implicit_count = len(analysis.implicit_points(solutions))
        try:
            mle = analysis.select_mle(solutions, counts)
        except NoRealSolution as e:
            logger.warning('No estimate: %s', e)
            mle = None
    timings['analysis'] = t.ms
    target = model.critical_point_count(counts.n) if cfg.target_count is None else cfg.target_count
    if solutions.count < target:
        complete = False
    return PipelineResult(
        counts, solutions, mle, implicit_count,
        None if cfg.deterministic else timings, complete
        )

def summary_line(result):
    n = result.counts.n
    line = '{0} critical points, {1} real, {2} implicit (ML degree {3}: {4})'.format(
        result.solutions.count, result.solutions.count_real, result.implicit_count,
        model.ml_degree(n), 'ok' if result.implicit_count == model.ml_degree(n) else 'MISMATCH'
        )
    if not result.mle is None:
        line += '; MLE q = [{0}]'.format(', '.join('{0:.6g}'.format(v) for v in result.mle.implicit.q))
    return line


# ____________________________________________________
# Commands

def cmd_solve(cfg):
    counts = io.parse_counts(cfg.u_path, n=cfg.n, seed=cfg.seed, max_count=dppmle.CONFIG.max_count)
    logger.info('Solving for %s with %s', counts, cfg)
    result = run_pipeline(counts, cfg)
    if cfg.out_path:
        io.write_result(
            cfg.out_path, counts, result.solutions, result.implicit_count,
            mle=result.mle, timings_ms=result.timings_ms
            )
    print(summary_line(result))
    return EXIT_OK if result.complete else EXIT_INCOMPLETE

def cmd_verify(cfg):
    if not 3 <= cfg.n <= 7:
        raise ValueError('verify supports 3 <= n <= 7, got {0}'.format(cfg.n))
    regions = analysis.enumerate_regions(cfg.n, seed=cfg.seed)
    reports = []
    for trial in range(cfg.args.trials):
        counts = dpp.random_counts(cfg.n, dppmle.CONFIG.max_count, cfg.seed + trial)
        result = run_pipeline(counts, cfg)
        report = analysis.verify_counts(cfg.n, counts, result.solutions, regions=regions)
        d = report.as_dict()
        d['u'] = counts.as_dict()
        reports.append(d)
        logger.info('Trial %s: %s', trial, report)
    passed = all(d['passed'] for d in reports)
    out = { 'n' : cfg.n, 'seed' : cfg.seed, 'trials' : reports, 'passed' : passed }
    if cfg.out_path:
        io.write_json(out, cfg.out_path)
    print(io.format_json(out))
    return EXIT_OK if passed else EXIT_VERIFY

def cmd_sample(cfg):
    args = cfg.args
    if args.matrix:
        M = io.parse_matrix(args.matrix)
    elif cfg.n is None:
        raise ValueError('sample needs --matrix or --n')
    else:
        M = dpp.random_subspace(cfg.n, 2, cfg.seed)
    kernel = dpp.projection_from_rows(M)
    counts = dpp.sample_counts(kernel, args.N, cfg.seed)
    if cfg.out_path:
        io.write_counts(counts, cfg.out_path)
    print(io.format_json(io.counts_to_dict(counts)))
    return EXIT_OK

def cmd_regions(cfg):
    regions = analysis.enumerate_regions(cfg.n, seed=cfg.seed)
    print(len(regions))
    if cfg.out_path:
        out = {
            'n' : cfg.n,
            'count' : len(regions),
            'expected' : model.critical_point_count(cfg.n),
            }
        if cfg.args.full:
            out['sign_vectors'] = sorted(list(r.s) for r in regions)
        io.write_json(out, cfg.out_path)
    return EXIT_OK

def cmd_bench(cfg):
    if cfg.n < 4:
        raise ValueError('bench runs n = 4..N and needs --n >= 4, got {0}'.format(cfg.n))
    rows = []
    complete = True
    for n in range(4, cfg.n+1):
        counts = dpp.random_counts(n, dppmle.CONFIG.max_count, cfg.seed)
        with timer('bench n={0}'.format(n)) as t:
            result = run_pipeline(counts, cfg)
        complete = complete and result.complete
        rows.append({ 'n' : n, 'runtime_s' : t.ms / 1000., 'count' : result.solutions.count })

    width = 10
    fmt = lambda label, values: '{0:<22}'.format(label) + ''.join('{0:>{1}}'.format(v, width) for v in values)
    print(fmt('n', [ r['n'] for r in rows ]))
    print(fmt('Runtime', [ '{0:.1f}s'.format(r['runtime_s']) for r in rows ]))
    print(fmt('Number of Solutions', [ r['count'] for r in rows ]))
    if cfg.out_path:
        if cfg.deterministic:
            for r in rows: r['runtime_s'] = None
        io.write_json({ 'seed' : cfg.seed, 'rows' : rows }, cfg.out_path)
    return EXIT_OK if complete else EXIT_INCOMPLETE


COMMANDS = {
    'solve' : cmd_solve,
    'verify' : cmd_verify,
    'sample' : cmd_sample,
    'regions' : cmd_regions,
    'bench' : cmd_bench,
    }


# ____________________________________________________
# Argument parsing

class ArgumentParser(argparse.ArgumentParser):
    """
    Raises UsageError instead of exiting
    """
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError('{0}: {1}'.format(self.prog, message))

def get_parser():
    common = ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', action='store_true', help='Debug level logging')
    common.add_argument('-q', '--quiet', action='store_true', help='Only log warnings and errors')
    common.add_argument('--log-file', type=str, help='Also log to this (rotated) file')
    common.add_argument('--conf', type=str, help='Configuration section to use')
    common.add_argument('--seed', type=int, help='Random seed (default from configuration)')
    common.add_argument('--workers', type=int, help='Worker processes (default DPPMLE_WORKERS or configuration)')
    common.add_argument('--deterministic', action='store_true', help='Single worker, no timings in output files')
    common.add_argument('--out', type=str, help='Output JSON file')

    tracker = ArgumentParser(add_help=False)
    tracker.add_argument('--target-count', type=int, help='Override the expected number of solutions')
    tracker.add_argument('--stall-limit', type=int, help='Monodromy loops without progress before giving up')
    tracker.add_argument('--dedup-tol', type=float, help='Relative distance below which solutions coincide')
    tracker.add_argument('--reality-tol', type=float, help='Tolerance for classifying a solution as real')

    parser = ArgumentParser(
        prog='dppmle',
        description='Maximum likelihood estimation for rank-2 projection DPPs by numerical homotopy',
        )
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    p = sub.add_parser('solve', parents=[common, tracker], help='All critical points and the MLE for given counts')
    p.add_argument('--n', type=int, help='Number of items; inferred from --u when omitted')
    p.add_argument('--u', type=str, required=True, help='Counts file, inline comma separated counts, or "random"')

    p = sub.add_parser('verify', parents=[common, tracker], help='Check counts, reality and maximality on random data')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--trials', type=int, default=1, help='Number of random data vectors')

    p = sub.add_parser('sample', parents=[common], help='Draw counts from a projection DPP')
    p.add_argument('--n', type=int, help='Size of a random subspace, if no --matrix is given')
    p.add_argument('--matrix', type=str, help='2 x n row block, JSON file or inline "1,0,1;0,1,1"')
    p.add_argument('--N', type=int, default=300, help='Number of draws')

    p = sub.add_parser('regions', parents=[common], help='Count the sign vectors of the regions of X_n')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--full', action='store_true', help='Write every sign vector to --out')

    p = sub.add_parser('bench', parents=[common, tracker], help='Runtimes and solution counts for n = 4..N')
    p.add_argument('--n', type=int, required=True)

    return parser

def main(argv=None):
    try:
        args = get_parser().parse_args(argv)
    except UsageError as e:
        logger.error('%s: %s', e.__class__.__name__, e)
        return EXIT_INPUT
    dppmle.set_verbosity(args.verbose, args.quiet)
    if args.log_file:
        dppmle.add_rotating_file_handler(args.log_file)
    try:
        if args.conf:
            dppmle.CONFIG = dppmle.reload_config(args.conf)
        cfg = RunConfig(args)
        return COMMANDS[cfg.command](cfg)
    except (DppMleError, OSError, ValueError) as e:
        logger.error('%s: %s', e.__class__.__name__, e)
        return EXIT_INPUT

if __name__ == '__main__':
    sys.exit(main())
