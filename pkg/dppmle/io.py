#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
JSON files: counts, result files and reports. Pairs are keyed by
concatenated indices ("12", "13", ...), or "i,j" once n >= 10.
"""
import json, logging, re
import os.path as osp
import numpy as np
from . import model
from .exceptions import SchemaError
from .utils import ensure_parent_directory
logger = logging.getLogger('dppmle')


def format_json(obj, indent=2, _level=0):
    """
    JSON text like json.dumps(obj, indent=indent), except that floats are
    written with 17 significant digits
    """
    if isinstance(obj, float):
        if not np.isfinite(obj):
            return json.dumps(obj)
        s = '{0:.17g}'.format(obj)
        # Keep floats recognizable as floats when read back
        return s if any(c in s for c in '.en') else s + '.0'
    if isinstance(obj, dict):
        items = [ (json.dumps(str(k)), v) for k, v in obj.items() ]
        opening, closing = '{', '}'
    elif isinstance(obj, (list, tuple)):
        items = [ (None, v) for v in obj ]
        opening, closing = '[', ']'
    else:
        return json.dumps(obj)
    if not items:
        return opening + closing
    pad = ' ' * (indent * (_level+1))
    lines = [
        pad + ('' if key is None else key + ': ') + format_json(value, indent, _level+1)
        for key, value in items
        ]
    return opening + '\n' + ',\n'.join(lines) + '\n' + ' ' * (indent * _level) + closing

def write_json(obj, path):
    """
    Writes obj with a trailing newline, floats with 17 significant digits
    """
    ensure_parent_directory(path)
    with open(path, 'w') as f:
        f.write(format_json(obj) + '\n')
    logger.info('Wrote %s', path)

def read_json(path):
    if not osp.isfile(path):
        raise SchemaError('No such file', path=path)
    with open(path, 'r') as f:
        try:
            return json.load(f)
        except ValueError as e:
            raise SchemaError('Invalid JSON: {0}'.format(e), path=path)


# ____________________________________________________
# Counts

def parse_pair_key(key, n):
    """
    Inverse of model.pair_key
    """
    if n >= 10:
        match = re.match(r'^(\d+),(\d+)$', key)
        if not match:
            raise ValueError('Pair key {0!r} is not of the form "i,j"'.format(key))
        i, j = int(match.group(1)), int(match.group(2))
    else:
        if not re.match(r'^\d\d$', key):
            raise ValueError('Pair key {0!r} is not two digits'.format(key))
        i, j = int(key[0]), int(key[1])
    if not 1 <= i < j <= n:
        raise ValueError('Pair key {0!r} is not a pair i < j in 1..{1}'.format(key, n))
    return i, j

def counts_to_dict(counts):
    return {
        'n' : counts.n,
        'u' : counts.as_dict(),
        'total' : counts.total,
        'generic' : counts.generic,
        }

def counts_from_dict(d, path=None):
    if not isinstance(d, dict):
        raise SchemaError('Top level must be an object', path=path)
    n = d.get('n')
    if not isinstance(n, int) or isinstance(n, bool) or n < 3:
        raise SchemaError('n must be an integer >= 3, got {0!r}'.format(n), path=path, field='n')
    u = d.get('u')
    if not isinstance(u, dict):
        raise SchemaError('u must be an object keyed by pairs', path=path, field='u')
    values = {}
    for key, value in u.items():
        try:
            pair = parse_pair_key(key, n)
        except ValueError as e:
            raise SchemaError(str(e), path=path, field='u.{0}'.format(key))
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise SchemaError(
                'Count must be a nonnegative integer, got {0!r}'.format(value),
                path=path, field='u.{0}'.format(key)
                )
        values[pair] = value
    missing = [ model.pair_key(i, j, n) for i, j in model.pairs(n) if not (i, j) in values ]
    if missing:
        raise SchemaError('Missing counts for pairs {0}'.format(missing), path=path, field='u')
    try:
        counts = model.DataCounts(n, [ values[pair] for pair in model.pairs(n) ])
    except ValueError as e:
        raise SchemaError(str(e), path=path, field='u')
    if 'total' in d and d['total'] != counts.total:
        raise SchemaError(
            'total is {0} but the counts sum to {1}'.format(d['total'], counts.total),
            path=path, field='total'
            )
    return counts

def write_counts(counts, path):
    write_json(counts_to_dict(counts), path)

def read_counts(path):
    return counts_from_dict(read_json(path), path=path)

def parse_counts(source, n=None, seed=42, max_count=1000):
    """
    Reads counts from a file path, an inline comma separated list in
    lexicographic pair order, or the word 'random'
    """
    if source is None:
        raise ValueError('No counts given')
    if source == 'random':
        if n is None:
            raise ValueError('Random counts need n')
        from .dpp import random_counts
        return random_counts(n, max_count, seed)
    if osp.isfile(source):
        counts = read_counts(source)
    else:
        try:
            values = [ int(v) for v in source.split(',') ]
        except ValueError:
            raise SchemaError('{0!r} is neither a file nor a comma separated list of integers'.format(source))
        k = len(values)
        # C(n,2) = k
        n_inline = int(round((1. + np.sqrt(1. + 8.*k)) / 2.))
        if n_inline*(n_inline-1)//2 != k or n_inline < 3:
            raise SchemaError('{0} inline counts do not match C(n,2) for any n >= 3'.format(k))
        counts = model.DataCounts(n_inline, values)
    if not n is None and counts.n != n:
        raise ValueError('Counts are for n={0}, but n={1} was requested'.format(counts.n, n))
    return counts

def parse_matrix(source):
    """
    A real matrix from a JSON file (list of rows) or inline as '1,0,1;0,1,1'
    """
    if osp.isfile(source):
        rows = read_json(source)
    else:
        try:
            rows = [ [ float(v) for v in row.split(',') ] for row in source.split(';') ]
        except ValueError:
            raise SchemaError('{0!r} is neither a file nor an inline matrix'.format(source))
    M = np.array(rows, dtype=float)
    if M.ndim != 2:
        raise SchemaError('Matrix rows must all have the same length', field='matrix')
    return M


# ____________________________________________________
# Results

def _floats(a):
    return [ float(v) for v in np.asarray(a).ravel() ]

def solution_to_dict(solution, n):
    from .analysis import sign_vector
    signs = None
    if solution.is_real:
        signs = list(sign_vector(model.MatrixParam.from_vector(n, solution.real_point)).s)
    return {
        'point_re' : _floats(solution.point.real),
        'point_im' : _floats(solution.point.imag),
        'residual' : float(solution.residual),
        'is_real' : solution.is_real,
        'loglik' : None if solution.loglik is None else float(np.real(solution.loglik)),
        'hessian_class' : solution.hessian_class,
        'sign_vector' : signs,
        }

def result_to_dict(counts, solutions, implicit_count, mle=None, timings_ms=None):
    return {
        'n' : counts.n,
        'u' : counts.as_dict(),
        'count' : solutions.count,
        'count_real' : solutions.count_real,
        'implicit_count' : implicit_count,
        'solutions' : [ solution_to_dict(s, counts.n) for s in solutions ],
        'mle' : None if mle is None else { 'q' : _floats(mle.implicit.q), 'loglik' : float(mle.loglik) },
        'timings_ms' : timings_ms,
        }

def write_result(path, counts, solutions, implicit_count, mle=None, timings_ms=None):
    write_json(result_to_dict(counts, solutions, implicit_count, mle, timings_ms), path)
