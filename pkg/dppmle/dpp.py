#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Projection DPPs: kernels, their distributions over d-subsets, and synthetic data
"""
import logging
import numpy as np
from scipy.linalg import orth
from .exceptions import RankError, KernelError
from .model import DataCounts, pairs, _check_n
logger = logging.getLogger('dppmle')

SYMMETRY_TOL = 1e-12
IDEMPOTENCE_TOL = 1e-10
SUM_TOL = 1e-12


class ProjectionKernel(object):
    """
    Orthogonal projection P of rank d onto a subspace of R^n.

    :param P: Symmetric idempotent n x n matrix
    :param d: Rank; inferred from the trace if not given
    :param basis: n x d matrix with orthonormal columns spanning the range of P;
        taken from the top eigenvectors of P if not given
    """
    def __init__(self, P, d=None, basis=None):
        super(ProjectionKernel, self).__init__()
        P = np.array(P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise KernelError('Kernel must be a square matrix, got shape {0}'.format(P.shape))
        self.n = P.shape[0]
        self.d = int(round(np.trace(P))) if d is None else int(d)
        if np.max(np.abs(P - P.T)) > SYMMETRY_TOL:
            raise KernelError('Kernel is not symmetric: max |P - P^T| = {0}'.format(np.max(np.abs(P - P.T))))
        if np.max(np.abs(P.dot(P) - P)) > IDEMPOTENCE_TOL:
            raise KernelError('Kernel is not idempotent: max |P^2 - P| = {0}'.format(np.max(np.abs(P.dot(P) - P))))
        if abs(np.trace(P) - self.d) > IDEMPOTENCE_TOL:
            raise KernelError('Kernel trace {0} differs from rank {1}'.format(np.trace(P), self.d))
        P.setflags(write=False)
        self.P = P
        if basis is None:
            w, V = np.linalg.eigh(P)
            basis = V[:,np.argsort(w)[::-1][:self.d]]
        basis = np.array(basis, dtype=float)
        if basis.shape != (self.n, self.d):
            raise KernelError('Basis must have shape {0}, got {1}'.format((self.n, self.d), basis.shape))
        basis.setflags(write=False)
        self.basis = basis

    def __repr__(self):
        return '<ProjectionKernel n={0} d={1}>'.format(self.n, self.d)


class DppDistribution(object):
    """
    Probabilities of the d-subsets of [n], subsets in lexicographic order
    """
    def __init__(self, n, d, probs):
        super(DppDistribution, self).__init__()
        self.n = n
        self.d = d
        self.subsets = pairs(n, d)
        probs = np.array(probs, dtype=float)
        if probs.shape != (len(self.subsets),):
            raise ValueError('Expected {0} probabilities, got {1}'.format(len(self.subsets), probs.shape))
        if np.any(probs < 0) or abs(np.sum(probs) - 1.) > SUM_TOL:
            raise KernelError('Not a probability vector: {0} (sum {1})'.format(probs.tolist(), np.sum(probs)))
        probs.setflags(write=False)
        self.probs = probs

    def __getitem__(self, subset):
        return self.probs[self.subsets.index(tuple(subset))]

    def __repr__(self):
        return '<DppDistribution n={0} d={1} probs={2}>'.format(self.n, self.d, self.probs.tolist())


def projection_from_rows(M):
    """
    Kernel of the orthogonal projection onto the row span of a full-rank d x n matrix.
    Built as P = B B^T from an orthonormal basis B of the span, so P only
    depends on the span and not on the chosen rows.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    d, n = M.shape
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise RankError(
            'Row block of shape {0} is rank deficient: singular values {1}'
            .format(M.shape, s.tolist())
            )
    B = orth(M.T)
    P = B.dot(B.T)
    return ProjectionKernel(0.5*(P + P.T), d=d, basis=B)

def dpp_distribution(kernel):
    """
    Distribution of the projection DPP over the d-subsets I. With P = B B^T,
    det(P_I) = det(B_I)^2, which is nonnegative and sums to 1 by Cauchy-Binet.
    """
    subsets = pairs(kernel.n, kernel.d)
    idx = np.array(subsets) - 1
    probs = np.linalg.det(kernel.basis[idx]) ** 2
    return DppDistribution(kernel.n, kernel.d, probs / np.sum(probs))

def sample_counts(kernel, N, seed):
    """
    Draws N subsets from a rank-2 projection DPP and counts them per pair.
    Zero counts are kept; the returned DataCounts is then non-generic.

    :param seed: Seed or numpy Generator
    """
    if kernel.d != 2:
        raise ValueError('Sampling counts needs d = 2, got d = {0}'.format(kernel.d))
    if N < 1:
        raise ValueError('Need N >= 1, got {0}'.format(N))
    dist = dpp_distribution(kernel)
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(dist.probs)
    draws = np.searchsorted(cdf, rng.random(N), side='right')
    draws = np.minimum(draws, len(cdf)-1)
    counts = np.bincount(draws, minlength=len(cdf))
    logger.info('Sampled %s subsets from %s', N, kernel)
    return DataCounts(kernel.n, counts)

def random_counts(n, max_count, seed):
    """
    Counts drawn uniformly from {1, ..., max_count}, one per pair
    """
    n = _check_n(n)
    if max_count < 1:
        raise ValueError('max_count must be >= 1, got {0}'.format(max_count))
    rng = np.random.default_rng(seed)
    return DataCounts(n, rng.integers(1, max_count+1, size=n*(n-1)//2))

def random_subspace(n, d, seed):
    """
    Gauge-fixed d x n row block [I_d | X] with standard normal X
    """
    rng = np.random.default_rng(seed)
    return np.hstack((np.eye(d), rng.standard_normal((d, n-d))))
