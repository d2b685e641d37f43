#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Geometry of the gauge-fixed parameterization of sGr(2,n).

A point is the 2 x n matrix

    M_n = [[1, 0, x_3, ..., x_n],
           [0, 1, y_3, ..., y_n]]

of which only the free block is stored, as the unknown vector
z = (x_3, ..., x_n, y_3, ..., y_n). Pairs (i, j), 1 <= i < j <= n, are always
laid out in lexicographic order.
"""
import itertools, logging, math
from functools import lru_cache
import numpy as np
import dppmle
from .exceptions import DomainError
logger = logging.getLogger('dppmle')


def zero_tol():
    """
    Relative threshold below which a minor or Q_n counts as vanishing;
    the zero_tol setting of the active configuration
    """
    return dppmle.CONFIG.zero_tol


# ____________________________________________________
# Pair layout

@lru_cache(maxsize=None)
def pairs(n, d=2):
    """
    All d-subsets of {1..n} (1-based) in lexicographic order
    """
    if n < d:
        raise ValueError('Need n >= d, got n={0}, d={1}'.format(n, d))
    return tuple(itertools.combinations(range(1, n+1), d))

@lru_cache(maxsize=None)
def pair_index(n):
    """
    Dict from pair (i, j) to its position in the lexicographic layout
    """
    return { pair : k for k, pair in enumerate(pairs(n)) }

def pair_key(i, j, n):
    """
    Key of pair (i, j) in the JSON files: '12' for n < 10, '1,2' otherwise
    """
    if n < 10:
        return '{0}{1}'.format(i, j)
    return '{0},{1}'.format(i, j)

def n_pairs(n):
    return n*(n-1)//2

def critical_point_count(n):
    """
    Number of complex critical points of the parametric log-likelihood
    """
    n = _check_n(n)
    return 2**(n-2) * math.factorial(n-1)

def ml_degree(n):
    """
    ML degree of sGr(2,n)
    """
    n = _check_n(n)
    return math.factorial(n-1) // 2

def _check_n(n):
    if int(n) != n or n < 3:
        raise ValueError('n must be an integer >= 3, got {0}'.format(n))
    return int(n)


class _PluckerLayout(object):
    """
    Constant data of the minors as functions of z: every p_ij is
    c0 + g.z + z.H.z/2 with g and H fixed for a given n
    """
    def __init__(self, n):
        super(_PluckerLayout, self).__init__()
        self.n = n
        self.m = 2*(n-2)
        self.n_pairs = n_pairs(n)
        cols = np.array(pairs(n)) - 1
        self.I = cols[:,0]
        self.J = cols[:,1]
        self.g = np.zeros((self.n_pairs, self.m))
        self.H = np.zeros((self.n_pairs, self.m, self.m))
        x = lambda c: c - 2
        y = lambda c: self.m//2 + c - 2
        for k, (I, J) in enumerate(zip(self.I, self.J)):
            if I == 0 and J >= 2:
                self.g[k, y(J)] = 1.
            elif I == 1:
                self.g[k, x(J)] = -1.
            elif I >= 2:
                # x_I y_J - y_I x_J
                self.H[k, x(I), y(J)] = self.H[k, y(J), x(I)] = 1.
                self.H[k, y(I), x(J)] = self.H[k, x(J), y(I)] = -1.

@lru_cache(maxsize=None)
def layout(n):
    return _PluckerLayout(_check_n(n))


# ____________________________________________________
# Vectorized kernels on z; used by the solver in its inner loops

def full_matrix(n, z):
    z = np.asarray(z)
    k = n - 2
    M = np.zeros((2, n), dtype=np.result_type(z.dtype, float))
    M[0,0] = M[1,1] = 1
    M[0,2:] = z[:k]
    M[1,2:] = z[k:]
    return M

def minors(n, z):
    """
    All p_ij at z, lexicographic
    """
    M = full_matrix(n, z)
    lay = layout(n)
    return M[0,lay.I]*M[1,lay.J] - M[1,lay.I]*M[0,lay.J]

def minor_gradients(n, z):
    """
    Matrix G with G[k] the gradient of the k-th minor with respect to z
    """
    lay = layout(n)
    return lay.g + np.einsum('kij,j->ki', lay.H, np.asarray(z))

def residual_matrix(n, z, p=None, G=None):
    """
    The 2(n-2) x C(n,2) matrix A(z) with gradient(z; u) = A(z) u.
    Column k is 2 grad(p_k)/p_k - grad(Q)/Q.
    """
    if p is None: p = minors(n, z)
    if G is None: G = minor_gradients(n, z)
    Q = np.sum(p**2)
    dQ = 2. * G.T.dot(p)
    return 2.*G.T/p - dQ[:,np.newaxis]/Q

def residual(n, z, u):
    return residual_matrix(n, z).dot(u)

def residual_jacobian(n, z, u, p=None, G=None):
    """
    Analytic Jacobian of the gradient map z -> A(z) u (holomorphic, no conjugation)
    """
    lay = layout(n)
    if p is None: p = minors(n, z)
    if G is None: G = minor_gradients(n, z)
    u = np.asarray(u)
    total = np.sum(u)
    Q = np.sum(p**2)
    dQ = 2. * G.T.dot(p)
    HQ = 2. * (G.T.dot(G) + np.einsum('k,kij->ij', p, lay.H))
    J = (
        2. * np.einsum('k,kij->ij', u/p, lay.H)
        - 2. * np.einsum('k,ki,kj->ij', u/p**2, G, G)
        - total * (HQ/Q - np.outer(dQ, dQ)/Q**2)
        )
    return J

def cleared_residual(n, z, u):
    """
    The gradient multiplied by Q_n times the product of all minors: a polynomial
    system with the same zeros inside X_n, finite on the pole locus
    """
    p = minors(n, z)
    G = minor_gradients(n, z)
    u = np.asarray(u)
    Q = np.sum(p**2)
    dQ = 2. * G.T.dot(p)
    k = len(p)
    # product of all minors except the l-th, without dividing
    others = np.array([ np.prod(np.delete(p, l)) for l in range(k) ])
    return 2.*Q*G.T.dot(u*others) - np.sum(u)*dQ*np.prod(p)

def cleared_gradient(M, u):
    return cleared_residual(M.n, M.vector, _weights(u, M.n))

def domain_margin(p, Q=None):
    """
    Smallest of |p_ij|/||p|| and |Q|/||p||^2
    """
    if Q is None: Q = np.sum(p**2)
    norm = np.linalg.norm(p)
    if norm == 0:
        return 0.
    return min(np.min(np.abs(p))/norm, abs(Q)/norm**2)


# ____________________________________________________
# Value types

def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


class MatrixParam(object):
    """
    The free 2 x (n-2) block of M_n. Entries are real or complex; the
    2 x 2 identity prefix is implicit.

    :param n: Number of columns of M_n
    :type n: int
    :param xs: Entries x_3..x_n
    :param ys: Entries y_3..y_n
    """
    def __init__(self, n, xs, ys):
        super(MatrixParam, self).__init__()
        self.n = _check_n(n)
        xs = np.atleast_1d(np.asarray(xs))
        ys = np.atleast_1d(np.asarray(ys))
        if xs.shape != (n-2,) or ys.shape != (n-2,):
            raise ValueError(
                'Expected {0} x- and y-entries for n={1}, got {2} and {3}'
                .format(n-2, n, xs.shape, ys.shape)
                )
        dtype = complex if (np.iscomplexobj(xs) or np.iscomplexobj(ys)) else float
        self.xs = _frozen(xs.astype(dtype))
        self.ys = _frozen(ys.astype(dtype))
        self.field = 'complex' if dtype is complex else 'real'

    @classmethod
    def from_vector(cls, n, z):
        z = np.asarray(z)
        return cls(n, z[:n-2], z[n-2:])

    @classmethod
    def from_matrix(cls, M):
        """
        Reads the free block of a gauge-fixed 2 x n matrix
        """
        M = np.asarray(M)
        if M.ndim != 2 or M.shape[0] != 2 or not np.allclose(M[:,:2], np.eye(2)):
            raise ValueError('Expected a 2 x n matrix with identity prefix, got {0}'.format(M))
        return cls(M.shape[1], M[0,2:], M[1,2:])

    @property
    def vector(self):
        return np.concatenate((self.xs, self.ys))

    @property
    def is_real(self):
        return self.field == 'real'

    def full(self):
        return full_matrix(self.n, self.vector)

    def __repr__(self):
        return '<MatrixParam n={0} xs={1} ys={2}>'.format(self.n, self.xs.tolist(), self.ys.tolist())


class PlueckerVector(object):
    """
    Minors p_ij of M_n in lexicographic order, plus Q_n = sum of p_ij^2
    """
    def __init__(self, n, p):
        super(PlueckerVector, self).__init__()
        self.n = n
        self.p = _frozen(p)
        self.q_n = np.sum(self.p**2)

    def __getitem__(self, pair):
        return self.p[pair_index(self.n)[tuple(pair)]]

    def __repr__(self):
        return '<PlueckerVector n={0} p={1} Q={2}>'.format(self.n, self.p.tolist(), self.q_n)


class DataCounts(object):
    """
    Observed counts u_ij, one per pair in lexicographic order.
    Zero counts are accepted but make the data non-generic.
    """
    def __init__(self, n, u):
        super(DataCounts, self).__init__()
        self.n = _check_n(n)
        u = np.atleast_1d(np.asarray(u))
        if u.shape != (n_pairs(n),):
            raise ValueError(
                'Expected {0} counts for n={1}, got {2}'
                .format(n_pairs(n), n, u.shape)
                )
        if not np.all(np.equal(np.mod(u, 1), 0)):
            raise ValueError('Counts must be integers, got {0}'.format(u))
        u = u.astype(np.int64)
        if np.any(u < 0):
            raise ValueError('Counts must be nonnegative, got {0}'.format(u))
        self.u = _frozen(u)
        self.total = int(np.sum(u))
        if self.total == 0:
            raise ValueError('At least one count must be positive')
        if not self.generic:
            logger.warning(
                'Counts %s contain zeros for pairs %s; data is non-generic',
                self.u.tolist(), self.zero_pairs()
                )

    @property
    def generic(self):
        return bool(np.all(self.u >= 1))

    def zero_pairs(self):
        return [ pair for pair, c in zip(pairs(self.n), self.u) if c == 0 ]

    def __getitem__(self, pair):
        return self.u[pair_index(self.n)[tuple(pair)]]

    def as_dict(self):
        return { pair_key(i, j, self.n) : int(c) for (i, j), c in zip(pairs(self.n), self.u) }

    def __repr__(self):
        return '<DataCounts n={0} u={1}>'.format(self.n, self.u.tolist())


def _weights(u, n):
    """
    Count vector as an array; accepts DataCounts or anything array-like
    """
    if isinstance(u, DataCounts):
        if u.n != n:
            raise ValueError('Counts are for n={0}, point is for n={1}'.format(u.n, n))
        return u.u
    u = np.asarray(u)
    if u.shape != (n_pairs(n),):
        raise ValueError('Expected {0} counts, got shape {1}'.format(n_pairs(n), u.shape))
    return u


# ____________________________________________________
# Operations

def plucker(M):
    return PlueckerVector(M.n, minors(M.n, M.vector))

def in_domain(M, tol=None):
    """
    True iff every |p_ij| > tol * ||p|| and |Q_n| > tol * ||p||^2.
    tol defaults to the configured zero_tol.
    """
    p = minors(M.n, M.vector)
    return bool(domain_margin(p) > (zero_tol() if tol is None else tol))

def _require_domain(M):
    p = minors(M.n, M.vector)
    if not domain_margin(p) > zero_tol():
        raise DomainError('{0} is not in X_{1}: minors {2}'.format(M, M.n, p.tolist()))
    return p

def log_likelihood_parametric(M, u):
    """
    sum_ij u_ij log p_ij^2 - (sum u) log Q_n. Pairs with u_ij = 0 are dropped.
    For complex M the principal branch is used and the imaginary part is
    reduced to (-pi, pi].
    """
    p = _require_domain(M)
    u = _weights(u, M.n)
    keep = u != 0
    value = np.sum(u[keep] * np.log(p[keep]**2)) - np.sum(u) * np.log(np.sum(p**2))
    if M.is_real:
        return float(np.real(value))
    return complex(value.real, np.angle(np.exp(1j*value.imag)))

def log_likelihood_implicit(q, u):
    """
    sum_ij u_ij log q_ij - (sum u) log(sum q_ij), for a positive vector q over pairs
    """
    q = np.asarray(q, dtype=float)
    u = np.asarray(u.u if isinstance(u, DataCounts) else u, dtype=float)
    if q.shape != u.shape:
        raise ValueError('q and u must have the same shape, got {0} and {1}'.format(q.shape, u.shape))
    if np.any(q <= 0):
        raise DomainError('Implicit likelihood needs q > 0, got {0}'.format(q.tolist()))
    keep = u != 0
    return float(np.sum(u[keep]*np.log(q[keep])) - np.sum(u)*np.log(np.sum(q)))

def gradient(M, u):
    """
    Analytic gradient of the parametric log-likelihood with respect to
    (x_3..x_n, y_3..y_n)
    """
    p = _require_domain(M)
    return residual_matrix(M.n, M.vector, p=p).dot(_weights(u, M.n))

def hessian(M, u, step=None):
    """
    Symmetric matrix of second partials, from central differences of the
    analytic gradient
    """
    if not M.is_real:
        raise ValueError('hessian is only defined for real points')
    _require_domain(M)
    u = _weights(u, M.n)
    z = M.vector
    h = 1e-5 * (1. + np.max(np.abs(z))) if step is None else step
    m = len(z)
    H = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        H[:,j] = (residual(M.n, z+e, u) - residual(M.n, z-e, u)) / (2.*h)
    return 0.5*(H + H.T)


# ____________________________________________________
# General d

def plucker_general(M):
    """
    All maximal minors of a d x n matrix, d-subsets in lexicographic order
    """
    M = np.asarray(M)
    d, n = M.shape
    idx = np.array(pairs(n, d)) - 1
    return np.linalg.det(np.transpose(M[:, idx], (1, 0, 2)))

def log_likelihood_general_d(M, u):
    """
    Parametric log-likelihood for a d x n matrix with counts over d-subsets
    """
    M = np.asarray(M, dtype=float)
    d, n = M.shape
    if d < 2:
        raise ValueError('Need d >= 2, got {0}'.format(d))
    u = np.asarray(u.u if isinstance(u, DataCounts) else u, dtype=float)
    if u.shape != (len(pairs(n, d)),):
        raise ValueError('Expected {0} counts for d={1}, n={2}'.format(len(pairs(n, d)), d, n))
    minors_ = plucker_general(M)
    if domain_margin(minors_) <= zero_tol():
        raise DomainError('Vanishing maximal minor: {0}'.format(minors_.tolist()))
    keep = u != 0
    return float(np.sum(u[keep]*np.log(minors_[keep]**2)) - np.sum(u)*np.log(np.sum(minors_**2)))

def gradient_general_d(M, u, step=1e-6):
    """
    Central finite-difference gradient over the free entries (columns d+1..n)
    """
    M = np.array(M, dtype=float)
    d, n = M.shape
    grad = np.zeros((d, n-d))
    for a in range(d):
        for b in range(d, n):
            plus, minus = M.copy(), M.copy()
            plus[a,b] += step
            minus[a,b] -= step
            grad[a,b-d] = (log_likelihood_general_d(plus, u) - log_likelihood_general_d(minus, u)) / (2.*step)
    return grad


# ____________________________________________________
# Symmetries and auxiliary constructions

def flip_column(M, i):
    """
    Negates column i (3 <= i <= n) of M_n
    """
    if not 3 <= i <= M.n:
        raise ValueError('Only columns 3..{0} can be flipped, got {1}'.format(M.n, i))
    xs, ys = M.xs.copy(), M.ys.copy()
    xs[i-3] *= -1
    ys[i-3] *= -1
    return MatrixParam(M.n, xs, ys)

def flip_x(M):
    """
    Negates all x entries: flip column 1, then restore the gauge by negating row 1
    """
    return MatrixParam(M.n, -M.xs, M.ys)

@lru_cache(maxsize=None)
def deck_signs(n):
    """
    The 2^(n-1) deck transformations as sign vectors acting on z, identity first
    """
    k = n - 2
    signs = []
    for bits in itertools.product((1., -1.), repeat=k+1):
        cols, xflip = np.array(bits[:k]), bits[k]
        signs.append(np.concatenate((xflip*cols, cols)))
    signs = np.array(signs)
    signs.setflags(write=False)
    return signs

def deck_transformations(n):
    """
    The deck group as functions MatrixParam -> MatrixParam, identity first
    """
    return [ (lambda M, s=s: MatrixParam.from_vector(M.n, s*M.vector)) for s in deck_signs(n) ]

def deck_orbit(n, z):
    """
    All images of z under the deck group, shape (2^(n-1), 2(n-2))
    """
    return deck_signs(n) * np.asarray(z)[np.newaxis,:]

def extend(M, x, y):
    """
    Appends column (x, y) to M_n, giving M_{n+1}
    """
    return MatrixParam(M.n+1, np.append(M.xs, x), np.append(M.ys, y))

def discriminant_matrix(M):
    """
    The symmetric 3 x 3 matrix D with Q_{n+1} = (1, x, y) D (1, x, y)^T when
    column (x, y) is appended to M_n
    """
    Qn = plucker(M).q_n
    sxx = np.sum(M.xs**2)
    syy = np.sum(M.ys**2)
    sxy = np.sum(M.xs*M.ys)
    return np.array([
        [Qn, 0., 0.],
        [0., 1. + syy, -sxy],
        [0., -sxy, 1. + sxx],
        ])

def closed_form_n3(u):
    """
    The four critical points for n = 3, (+-sqrt(u23/u12), +-sqrt(u13/u12)), as z vectors
    """
    u12, u13, u23 = np.asarray(u.u if isinstance(u, DataCounts) else u, dtype=float)
    x, y = np.sqrt(u23/u12), np.sqrt(u13/u12)
    return np.array([ [sx*x, sy*y] for sx in (1., -1.) for sy in (1., -1.) ])
