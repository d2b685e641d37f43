#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Statistical conclusions from a solution set: the MLE, the implicit points,
Hessian classes, and the sign-vector count of the regions of X_n over R.
"""
import itertools, logging
import numpy as np
from . import model
from .exceptions import DomainError, NoRealSolution, DegenerateInstance
from .solver import SolutionSet
logger = logging.getLogger('dppmle')

IMPLICIT_TOL = 1e-8
TIE_TOL = 1e-9
EIGEN_TOL = 1e-7


def _n_from_point(point):
    return len(point)//2 + 2


class ImplicitPoint(object):
    """
    Point of sGr(2,n) in squared Pluecker coordinates, normalized to sum 1
    """
    def __init__(self, n, q):
        super(ImplicitPoint, self).__init__()
        q = np.array(q, dtype=float)
        if q.shape != (model.n_pairs(n),):
            raise ValueError('Expected {0} coordinates, got {1}'.format(model.n_pairs(n), q.shape))
        if np.any(q <= 0):
            raise DomainError('Implicit coordinates must be positive, got {0}'.format(q.tolist()))
        q = q / np.sum(q)
        q.setflags(write=False)
        self.n = n
        self.q = q

    def distance(self, other):
        """
        Total variation distance
        """
        return 0.5 * float(np.sum(np.abs(self.q - other.q)))

    def loglik(self, u):
        return model.log_likelihood_implicit(self.q, u)

    def __getitem__(self, pair):
        return self.q[model.pair_index(self.n)[tuple(pair)]]

    def __repr__(self):
        return '<ImplicitPoint n={0} q={1}>'.format(self.n, np.round(self.q, 6).tolist())


class SignVector(object):
    """
    Signs of the minors p_ij, (i, j) != (1, 2), lexicographic
    """
    def __init__(self, n, s):
        super(SignVector, self).__init__()
        s = tuple(int(v) for v in s)
        if len(s) != model.n_pairs(n) - 1:
            raise ValueError('Expected {0} signs, got {1}'.format(model.n_pairs(n) - 1, len(s)))
        if any(not v in (1, -1) for v in s):
            raise ValueError('Sign vector entries must be +1 or -1, got {0}'.format(s))
        self.n = n
        self.s = s

    @classmethod
    def from_key(cls, n, key):
        k = model.n_pairs(n) - 1
        return cls(n, [ 1 if (key >> b) & 1 else -1 for b in range(k) ])

    @property
    def key(self):
        """
        Packed bits, bit b set iff entry b is +1
        """
        return sum(1 << b for b, v in enumerate(self.s) if v == 1)

    def __eq__(self, other):
        return isinstance(other, SignVector) and self.n == other.n and self.s == other.s

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.n, self.s))

    def __repr__(self):
        return '<SignVector n={0} {1}>'.format(self.n, ''.join('+' if v == 1 else '-' for v in self.s))


class MleEstimate(object):
    """
    Outcome of select_mle. Unpacks as (implicit point, solution).
    `candidates` lists the distinct implicit points whose likelihood ties
    with the maximum.
    """
    def __init__(self, implicit, solution, loglik, candidates):
        super(MleEstimate, self).__init__()
        self.implicit = implicit
        self.solution = solution
        self.loglik = loglik
        self.candidates = candidates

    @property
    def tied(self):
        return len(self.candidates) > 1

    def __iter__(self):
        return iter((self.implicit, self.solution))

    def __repr__(self):
        return '<MleEstimate {0} loglik={1} candidates={2}>'.format(self.implicit, self.loglik, len(self.candidates))


class VerificationReport(object):
    """
    Counts and pass/fail status of the checks on one solved instance
    """
    def __init__(self, n):
        super(VerificationReport, self).__init__()
        self.n = n
        self.count = None
        self.count_real = None
        self.implicit_count = None
        self.regions_matched = None
        self.all_max = None
        self.fiber_sizes = []
        self.failures = []

    @property
    def passed(self):
        return len(self.failures) == 0

    def fail(self, message, *args):
        message = message.format(*args)
        logger.warning('Verification n=%s: %s', self.n, message)
        self.failures.append(message)

    def counts(self):
        return (self.count, self.count_real, self.implicit_count, self.regions_matched)

    def as_dict(self):
        return {
            'n' : self.n,
            'count' : self.count,
            'count_real' : self.count_real,
            'implicit_count' : self.implicit_count,
            'regions_matched' : self.regions_matched,
            'all_max' : self.all_max,
            'fiber_sizes' : sorted(set(self.fiber_sizes)),
            'expected' : {
                'count' : model.critical_point_count(self.n),
                'implicit_count' : model.ml_degree(self.n),
                'fiber_size' : 2**(self.n-1),
                },
            'passed' : self.passed,
            'failures' : list(self.failures),
            }

    def __repr__(self):
        return '<VerificationReport n={0} counts={1} passed={2}>'.format(self.n, self.counts(), self.passed)


# ____________________________________________________
# Operations

def to_implicit(solution):
    """
    Squared Pluecker coordinates p_ij^2 / Q_n of a real solution
    """
    if not solution.is_real:
        raise DomainError('Only real solutions have an implicit image, got {0}'.format(solution))
    z = solution.real_point
    n = _n_from_point(z)
    p = model.minors(n, z)
    return ImplicitPoint(n, p**2 / np.sum(p**2))

def implicit_points(solutions, tol=IMPLICIT_TOL):
    """
    Distinct implicit images of the real solutions, with the indices (into
    `solutions`) of the real solutions over each of them
    """
    groups = []
    for i, sol in enumerate(solutions):
        if not sol.is_real: continue
        q = to_implicit(sol)
        for point, members in groups:
            if point.distance(q) <= tol:
                members.append(i)
                break
        else:
            groups.append((q, [i]))
    return groups

def _loglik(solution, u):
    if solution.loglik is not None:
        return solution.loglik
    n = _n_from_point(solution.point)
    return model.log_likelihood_parametric(model.MatrixParam.from_vector(n, solution.real_point), u)

def select_mle(solutions, u):
    """
    Evaluates the likelihood at every real solution and returns the maximizer
    together with its implicit image
    """
    real = [ s for s in solutions if s.is_real ]
    if len(real) == 0:
        raise NoRealSolution('No real critical point among {0} solutions'.format(len(solutions)))
    values = np.array([ _loglik(s, u) for s in real ])
    best = int(np.argmax(values))
    tol = TIE_TOL * max(1., abs(values[best]))
    candidates = []
    for i in np.flatnonzero(values >= values[best] - tol):
        q = to_implicit(real[i])
        if not any(c.distance(q) <= IMPLICIT_TOL for c in candidates):
            candidates.append(q)
    if len(candidates) > 1:
        logger.warning(
            'Likelihood tie between %s distinct implicit points at %s; reporting all',
            len(candidates), values[best]
            )
    implicit = to_implicit(real[best])
    logger.info('MLE %s with log-likelihood %s', implicit, values[best])
    return MleEstimate(implicit, real[best], float(values[best]), candidates)

def classify_hessians(solutions, u):
    """
    Returns a copy of the set with hessian_class filled in for every real
    solution from the eigenvalue signs of the Hessian
    """
    n = solutions.n
    out = []
    for sol in solutions:
        if not sol.is_real:
            out.append(sol.copy(hessian_class='unknown'))
            continue
        H = model.hessian(model.MatrixParam.from_vector(n, sol.real_point), u)
        eig = np.linalg.eigvalsh(H)
        if np.any(np.abs(eig) <= EIGEN_TOL):
            cls = 'unknown'
        elif np.all(eig < 0):
            cls = 'max'
        elif np.all(eig > 0):
            cls = 'min'
        else:
            cls = 'saddle'
        logger.debug('Hessian eigenvalues %s -> %s', eig, cls)
        out.append(sol.copy(hessian_class=cls))
    return SolutionSet(n, solutions.params, out, dedup_tol=solutions.dedup_tol, lost=solutions.lost)

def sign_vector(M):
    """
    Signs of all p_ij except p_12
    """
    if not M.is_real:
        raise ValueError('Sign vectors are defined for real points only')
    p = model._require_domain(M)
    return SignVector(M.n, np.sign(p[1:]))

def _region_keys(n, xs, ys):
    """
    Packed sign vectors of every column permutation and column sign flip of
    the block (xs, ys)
    """
    k = n - 2
    lay = model.layout(n)
    perms = np.array(list(itertools.permutations(range(k))))
    flips = np.array(list(itertools.product((1., -1.), repeat=k)))
    X = (xs[perms][:,np.newaxis,:] * flips[np.newaxis,:,:]).reshape(-1, k)
    Y = (ys[perms][:,np.newaxis,:] * flips[np.newaxis,:,:]).reshape(-1, k)
    N = len(X)
    a = np.hstack((np.ones((N, 1)), np.zeros((N, 1)), X))
    b = np.hstack((np.zeros((N, 1)), np.ones((N, 1)), Y))
    p = a[:,lay.I]*b[:,lay.J] - b[:,lay.I]*a[:,lay.J]
    norms = np.linalg.norm(p, axis=1)
    if np.min(np.abs(p) / norms[:,np.newaxis]) <= model.zero_tol():
        raise DegenerateInstance('Permuted instance has a vanishing minor')
    bits = (p[:,1:] > 0).astype(np.int64)
    return set((bits * (1 << np.arange(bits.shape[1], dtype=np.int64))).sum(axis=1).tolist())

def enumerate_regions(n, seed=0, retries=3):
    """
    The sign vectors of the regions of the real part of X_n. For each k in 2..n a
    generic positive block with x_3..x_k negated is permuted and column-flipped
    in every way.
    """
    n = model._check_n(n)
    if n > 8:
        raise ValueError('Region enumeration is limited to n <= 8, got {0}'.format(n))
    expected = model.critical_point_count(n)
    rng = np.random.default_rng(seed)
    for attempt in range(retries):
        keys = set()
        try:
            for k in range(2, n+1):
                xs = rng.uniform(0.5, 2., n-2)
                ys = rng.uniform(0.5, 2., n-2)
                xs[:k-2] *= -1
                if not model.in_domain(model.MatrixParam(n, xs, ys)):
                    raise DegenerateInstance('Base block for k={0} is not in X_{1}'.format(k, n))
                keys |= _region_keys(n, xs, ys)
        except DegenerateInstance as e:
            logger.warning('Region enumeration attempt %s: %s', attempt, e)
            continue
        if len(keys) == expected:
            logger.info('Enumerated %s sign vectors for n=%s', len(keys), n)
            return frozenset(SignVector.from_key(n, key) for key in keys)
        logger.warning(
            'Region enumeration attempt %s found %s sign vectors, expected %s', attempt, len(keys), expected
            )
    raise DegenerateInstance('Could not enumerate {0} regions for n={1}'.format(expected, n))

def verify_counts(n, u, solutions, regions=None):
    """
    Checks a solved instance: full count, all real, (n-1)!/2 implicit points
    with fibers of size 2^(n-1), sign vectors matching the regions one to one,
    and every Hessian negative definite
    """
    report = VerificationReport(n)
    expected = model.critical_point_count(n)
    report.count = solutions.count
    report.count_real = solutions.count_real
    if report.count != expected:
        report.fail('{0} critical points, expected {1}', report.count, expected)
    if report.count_real != report.count:
        complex_ = [ s for s in solutions if not s.is_real ]
        report.fail('{0} non-real solutions, e.g. {1}', len(complex_), complex_[0])

    groups = implicit_points(solutions)
    report.implicit_count = len(groups)
    report.fiber_sizes = [ len(members) for q, members in groups ]
    if report.implicit_count != model.ml_degree(n):
        report.fail('{0} implicit points, expected {1}', report.implicit_count, model.ml_degree(n))
    bad_fibers = [ (q, len(m)) for q, m in groups if len(m) != 2**(n-1) ]
    if bad_fibers:
        report.fail('Fibers with size other than {0}: {1}', 2**(n-1), bad_fibers)

    regions = enumerate_regions(n) if regions is None else regions
    signs = []
    for s in solutions.real_solutions():
        try:
            signs.append(sign_vector(model.MatrixParam.from_vector(n, s.real_point)))
        except DomainError as e:
            report.fail('Real solution outside X_n: {0}', e)
    distinct = set(signs)
    report.regions_matched = len(distinct & set(regions))
    if len(distinct) != len(signs):
        report.fail('{0} real solutions share {1} sign vectors', len(signs), len(distinct))
    if distinct != set(regions):
        report.fail(
            'Sign vectors differ from the regions: {0} missing, {1} unexpected',
            len(set(regions) - distinct), len(distinct - set(regions))
            )

    if any(s.is_real and s.hessian_class == 'unknown' for s in solutions):
        solutions = classify_hessians(solutions, u)
    not_max = [ s for s in solutions if s.is_real and s.hessian_class != 'max' ]
    report.all_max = len(not_max) == 0
    if not_max:
        report.fail('{0} real solutions are not local maxima, e.g. {1}', len(not_max), not_max[0])
    logger.info('Verification n=%s: %s', n, report)
    return report
