#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Numerical solving of the critical equations grad L_u(M_n) = 0.

The unknowns are z = (x_3..x_n, y_3..y_n) in C^{2(n-2)}, the parameters are the
C(n,2) counts u, allowed to be complex. The residual is linear in u, which
is what makes the start pair for monodromy cheap to construct.
"""
import logging
from functools import partial
import numpy as np
from scipy.linalg import null_space
import dppmle
from . import model
from .exceptions import (
    SingularJacobian, Diverged, PathFailure, PoleHit, SeedFailure, IncompleteSet
    )
from .utils import worker_pool
logger = logging.getLogger('dppmle')

HESSIAN_CLASSES = ('max', 'min', 'saddle', 'unknown')

# Beyond this the Newton system is treated as singular
MAX_CONDITION = 1e12
# Points whose imaginary part is below this (relative) get a real-restricted refinement
NEAR_REAL_TOL = 1e-4
SEED_RETRIES = 10


class TrackerConfig(object):
    """
    Numerical settings for Newton refinement, path tracking and monodromy.
    Built from the configuration file via Config.tracker_config.
    """
    def __init__(
            self, step_init=0.1, step_min=1e-7, newton_tol=1e-11, residual_tol=1e-9,
            corrector_tol=1e-9, max_corrector_iters=3, max_refine_iters=50, max_steps=10000,
            dedup_tol=1e-6, reality_tol=1e-8, stall_limit=30, use_deck_symmetry=True
            ):
        super(TrackerConfig, self).__init__()
        self.step_init = float(step_init)
        self.step_min = float(step_min)
        self.newton_tol = float(newton_tol)
        self.residual_tol = float(residual_tol)
        self.corrector_tol = float(corrector_tol)
        self.max_corrector_iters = int(max_corrector_iters)
        self.max_refine_iters = int(max_refine_iters)
        self.max_steps = int(max_steps)
        self.dedup_tol = float(dedup_tol)
        self.reality_tol = float(reality_tol)
        self.stall_limit = int(stall_limit)
        self.use_deck_symmetry = bool(use_deck_symmetry)
        for key, value in self.as_dict().items():
            if key == 'use_deck_symmetry': continue
            if not value > 0:
                raise ValueError('Tracker setting {0} must be positive, got {1}'.format(key, value))
        if not self.step_min < self.step_init:
            raise ValueError(
                'step_min ({0}) must be smaller than step_init ({1})'
                .format(self.step_min, self.step_init)
                )

    def as_dict(self):
        return dict(vars(self))

    def replace(self, **kwargs):
        d = self.as_dict()
        d.update({ k : v for k, v in kwargs.items() if v is not None })
        return TrackerConfig(**d)

    def __repr__(self):
        return '<TrackerConfig {0}>'.format(self.as_dict())


class GradientSystem(object):
    """
    The square system grad L_u(z) = A(z) u = 0 for a given n
    """
    def __init__(self, n):
        super(GradientSystem, self).__init__()
        self.n = model._check_n(n)
        self.arity = 2*(n-2)
        self.n_params = model.n_pairs(n)

    def parameter_matrix(self, z):
        return model.residual_matrix(self.n, z)

    def residual(self, z, u):
        return model.residual(self.n, z, u)

    def jacobian(self, z, u):
        return model.residual_jacobian(self.n, z, u)

    def scaled_norm(self, F, u):
        return float(np.max(np.abs(F)) / np.sum(np.abs(u)))

    def scaled_residual(self, z, u):
        return self.scaled_norm(self.residual(z, u), u)

    def margin(self, z):
        return model.domain_margin(model.minors(self.n, z))

    def velocity(self, z, u, du):
        """
        Tangent dz/dt of the solution path for parameters moving with du/dt = du
        (Davidenko equation J dz/dt = -A(z) du)
        """
        p = model.minors(self.n, z)
        G = model.minor_gradients(self.n, z)
        J = model.residual_jacobian(self.n, z, u, p=p, G=G)
        rhs = model.residual_matrix(self.n, z, p=p, G=G).dot(du)
        return np.linalg.solve(J, -rhs)

    def __repr__(self):
        return '<GradientSystem n={0} unknowns={1} params={2}>'.format(self.n, self.arity, self.n_params)


class Solution(object):
    """
    One refined critical point
    """
    def __init__(self, point, residual, is_real=False, loglik=None, hessian_class='unknown', iterations=0):
        super(Solution, self).__init__()
        self.point = np.asarray(point, dtype=complex)
        self.residual = float(residual)
        self.is_real = bool(is_real)
        self.loglik = loglik
        if not hessian_class in HESSIAN_CLASSES:
            raise ValueError('Unknown hessian class {0}'.format(hessian_class))
        self.hessian_class = hessian_class
        self.iterations = iterations

    @property
    def real_point(self):
        if not self.is_real:
            raise ValueError('{0} is not real'.format(self))
        return self.point.real.copy()

    def copy(self, **kwargs):
        d = dict(
            point=self.point, residual=self.residual, is_real=self.is_real,
            loglik=self.loglik, hessian_class=self.hessian_class, iterations=self.iterations
            )
        d.update(kwargs)
        return Solution(**d)

    def __repr__(self):
        return '<Solution point={0} residual={1:.2e} real={2} class={3}>'.format(
            np.round(self.point, 6).tolist(), self.residual, self.is_real, self.hessian_class
            )


def _rel_dist(points, z):
    """
    Relative sup-norm distance from every row of `points` to z
    """
    z = np.asarray(z)
    scale = max(1., float(np.max(np.abs(z))))
    return np.max(np.abs(np.asarray(points) - z[np.newaxis,:]), axis=1) / scale


class SolutionSet(object):
    """
    Distinct solutions of the system at one parameter vector

    :param n: Number of columns of M_n
    :param params: The parameter vector u the solutions belong to
    :param dedup_tol: Relative sup-norm below which two points are the same
    """
    def __init__(self, n, params, solutions=None, dedup_tol=1e-6, lost=0):
        super(SolutionSet, self).__init__()
        self.n = n
        self.params = np.asarray(params)
        self.dedup_tol = dedup_tol
        self.lost = lost
        self.solutions = []
        self._points = np.zeros((0, 2*(n-2)), dtype=complex)
        for sol in (solutions or []):
            self.add(sol)

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def __getitem__(self, i):
        return self.solutions[i]

    @property
    def count(self):
        return len(self.solutions)

    @property
    def count_real(self):
        return sum(1 for s in self.solutions if s.is_real)

    @property
    def points(self):
        return self._points.copy()

    def real_solutions(self):
        return [ s for s in self.solutions if s.is_real ]

    def match(self, z):
        """
        Index of the solution within dedup_tol of z, or None
        """
        if len(self.solutions) == 0: return None
        d = _rel_dist(self._points, z)
        i = int(np.argmin(d))
        return i if d[i] <= self.dedup_tol else None

    def add(self, solution):
        """
        Adds a solution unless it duplicates one already present; returns whether it was added
        """
        if not self.match(solution.point) is None:
            return False
        self.solutions.append(solution)
        self._points = np.vstack((self._points, solution.point[np.newaxis,:]))
        return True

    def sorted(self):
        """
        Copy in deterministic order: lexicographic on rounded coordinates
        """
        key = lambda s: tuple(np.round(s.point.real, 8)) + tuple(np.round(s.point.imag, 8))
        return SolutionSet(
            self.n, self.params, sorted(self.solutions, key=key),
            dedup_tol=self.dedup_tol, lost=self.lost
            )

    def conjugate_pairs(self):
        """
        Index pairs (i, j) of complex solutions with solution j the conjugate of solution i
        """
        out = []
        for i, s in enumerate(self.solutions):
            if s.is_real: continue
            j = self.match(np.conj(s.point))
            if not j is None and i < j: out.append((i, j))
        return out

    def conjugate_closed(self):
        return all(
            s.is_real or not self.match(np.conj(s.point)) is None
            for s in self.solutions
            )

    def deck_closed(self):
        """
        True iff every deck image of every solution is in the set
        """
        for s in self.solutions:
            for image in model.deck_orbit(self.n, s.point):
                if self.match(image) is None:
                    return False
        return True

    def __repr__(self):
        return '<SolutionSet n={0} count={1} real={2} lost={3}>'.format(
            self.n, self.count, self.count_real, self.lost
            )


# ____________________________________________________
# Newton

def _newton_direction(S, z, u):
    p = model.minors(S.n, z)
    G = model.minor_gradients(S.n, z)
    F = model.residual_matrix(S.n, z, p=p, G=G).dot(u)
    J = model.residual_jacobian(S.n, z, u, p=p, G=G)
    return F, J

def newton_refine(S, z, u, cfg=None, max_iters=None):
    """
    Damped Newton iteration on S at parameters u, started from z.
    Returns a Solution with residual <= newton_tol, or <= residual_tol when
    roundoff stalls the iteration before that.
    """
    cfg = dppmle.CONFIG.tracker_config() if cfg is None else cfg
    max_iters = cfg.max_refine_iters if max_iters is None else max_iters
    u = np.asarray(u)
    z = np.array(z, dtype=np.result_type(np.asarray(z).dtype, u.dtype, float))
    with np.errstate(divide='raise', invalid='raise', over='raise'):
        try:
            if S.margin(z) <= model.zero_tol():
                raise Diverged('Start point {0} lies on the pole locus'.format(z))
            F, J = _newton_direction(S, z, u)
            res = S.scaled_norm(F, u)
            for it in range(max_iters + 1):
                if res <= cfg.newton_tol:
                    return Solution(z, res, iterations=it)
                if it == max_iters:
                    break
                if np.linalg.cond(J) > MAX_CONDITION:
                    raise SingularJacobian(
                        'Jacobian condition number {0:.3e} at {1}'.format(np.linalg.cond(J), z)
                        )
                dz = np.linalg.solve(J, -F)
                step = 1.
                for _ in range(12):
                    trial = z + step*dz
                    if S.margin(trial) > model.zero_tol():
                        F_trial, J_trial = _newton_direction(S, trial, u)
                        res_trial = S.scaled_norm(F_trial, u)
                        if res_trial < res:
                            break
                    step *= 0.5
                else:
                    # No decrease even for tiny steps: roundoff floor
                    break
                z, F, J, res = trial, F_trial, J_trial, res_trial
        except (FloatingPointError, ZeroDivisionError, np.linalg.LinAlgError) as e:
            raise Diverged('Newton failed at {0}: {1}'.format(z, e))
    if res <= cfg.residual_tol:
        logger.debug('Newton stalled at residual %.2e, accepting', res)
        return Solution(z, res, iterations=it)
    raise Diverged('Newton ended at residual {0:.3e} after {1} iterations'.format(res, it))


# ____________________________________________________
# Path tracking

def _rk4(S, z, ua, du, t, h):
    v = lambda zz, tt: S.velocity(zz, ua + tt*du, du)
    k1 = v(z, t)
    k2 = v(z + 0.5*h*k1, t + 0.5*h)
    k3 = v(z + 0.5*h*k2, t + 0.5*h)
    k4 = v(z + h*k3, t + h)
    return z + (h/6.)*(k1 + 2.*k2 + 2.*k3 + k4)

def _correct(S, z, u, cfg):
    """
    Plain Newton corrector; returns (point, converged, near_pole). The step
    sizes must contract, which keeps the corrector from wandering onto a
    neighbouring path.
    """
    previous = None
    for _ in range(cfg.max_corrector_iters):
        if S.margin(z) <= model.zero_tol():
            return z, False, True
        F, J = _newton_direction(S, z, u)
        dz = np.linalg.solve(J, -F)
        z = z + dz
        size = float(np.max(np.abs(dz)))
        if not previous is None and size > 0.5*previous:
            return z, False, False
        if size <= cfg.corrector_tol * (1. + float(np.max(np.abs(z)))):
            return z, True, False
        previous = size
    return z, False, False

def _track_segment(S, z, ua, ub, cfg):
    du = ub - ua
    t = 0.
    h = cfg.step_init
    successes = 0
    near_pole = False
    for _ in range(cfg.max_steps):
        if t >= 1.:
            return z
        last = h >= 1. - t
        if last: h = 1. - t
        t_new = 1. if last else t + h
        try:
            with np.errstate(divide='raise', invalid='raise', over='raise'):
                z_pred = _rk4(S, z, ua, du, t, h)
                z_new, ok, near_pole = _correct(S, z_pred, ua + t_new*du, cfg)
        except (FloatingPointError, ZeroDivisionError, np.linalg.LinAlgError):
            ok, near_pole = False, True
        if ok:
            z, t = z_new, t_new
            successes += 1
            if successes >= 4:
                h *= 1.5
                successes = 0
        else:
            h *= 0.5
            successes = 0
            if h < cfg.step_min:
                if near_pole:
                    raise PoleHit('Path ran into the pole locus at t={0}'.format(t))
                raise PathFailure('Step size underflow at t={0}'.format(t))
    if t >= 1.:
        return z
    raise PathFailure('No convergence within {0} steps (t={1})'.format(cfg.max_steps, t))

def track_path(S, z0, upath, cfg=None):
    """
    Continues the solution z0 along a piecewise linear parameter path and refines
    the endpoint.

    :param z0: Refined solution at the first parameter vertex
    :param upath: Parameter vertices [u(0), ..., u(1)]; two vertices give a straight segment
    :returns: Solution at the last vertex
    """
    cfg = dppmle.CONFIG.tracker_config() if cfg is None else cfg
    vertices = [ np.asarray(u, dtype=complex) for u in upath ]
    if len(vertices) < 2:
        raise ValueError('A path needs at least two parameter vertices')
    z = np.array(z0, dtype=complex)
    for ua, ub in zip(vertices[:-1], vertices[1:]):
        z = _track_segment(S, z, ua, ub, cfg)
    return newton_refine(S, z, vertices[-1], cfg)

def _track_job(n, vertices, cfg, z0):
    """
    Worker entry point: never raises, returns (point or None, error message)
    """
    S = GradientSystem(n)
    try:
        return track_path(S, z0, vertices, cfg).point, None
    except (PathFailure, Diverged, SingularJacobian) as e:
        return None, '{0}: {1}'.format(e.__class__.__name__, e)

def _track_many(S, points, vertices, cfg, pool=None):
    job = partial(_track_job, S.n, vertices, cfg)
    if pool is None:
        results = [ job(z) for z in points ]
    else:
        results = list(pool.map(job, points))
    for (z, error), z0 in zip(results, points):
        if not error is None:
            logger.debug('Lost path from %s: %s', np.round(z0, 6).tolist(), error)
    return [ z for z, error in results ]


# ____________________________________________________
# Start pair and monodromy

def _random_sphere(rng, dim, radius):
    v = rng.standard_normal(dim) + 1j*rng.standard_normal(dim)
    return radius * v / np.linalg.norm(v)

def seed_solution(n, seed):
    """
    Random start pair (u0, z0) with grad L_{u0}(z0) = 0: z0 is drawn first, then
    u0 is taken from the null space of A(z0)
    """
    n = model._check_n(n)
    rng = np.random.default_rng(seed)
    m = 2*(n-2)
    k = model.n_pairs(n)
    z0 = rng.uniform(0.5, 1.5, m) * np.exp(2j*np.pi*rng.random(m))
    if model.domain_margin(model.minors(n, z0)) <= model.zero_tol():
        raise SeedFailure('Random start point {0} is not in X_{1}'.format(z0, n))
    A = model.residual_matrix(n, z0)
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise SeedFailure('A(z0) is numerically rank deficient: singular values {0}'.format(s))
    kernel = null_space(A)
    if kernel.shape[1] != k - m:
        raise SeedFailure(
            'Null space of A(z0) has dimension {0}, expected {1}'.format(kernel.shape[1], k - m)
            )
    coeffs = rng.standard_normal(kernel.shape[1]) + 1j*rng.standard_normal(kernel.shape[1])
    u0 = kernel.dot(coeffs)
    u0 *= k / np.linalg.norm(u0)
    err = np.max(np.abs(A.dot(u0)))
    if err > 1e-12 * max(1., np.max(np.abs(A))):
        raise SeedFailure('Start pair residual {0:.3e} too large'.format(err))
    logger.debug('Start pair for n=%s: |A(z0) u0| = %.2e', n, err)
    return u0, z0

def _seed_with_retries(S, rng, cfg):
    for attempt in range(SEED_RETRIES):
        try:
            u0, z0 = seed_solution(S.n, int(rng.integers(2**31)))
            return u0, newton_refine(S, z0, u0, cfg)
        except (SeedFailure, Diverged, SingularJacobian) as e:
            logger.warning('Start pair attempt %s failed: %s', attempt, e)
    raise SeedFailure('No start pair after {0} attempts'.format(SEED_RETRIES))

class _OrbitRegistry(object):
    """
    Known points, with representatives of deck orbits when symmetry is used
    """
    def __init__(self, n, dedup_tol, use_symmetry):
        super(_OrbitRegistry, self).__init__()
        self.n = n
        self.dedup_tol = dedup_tol
        self.use_symmetry = use_symmetry
        self.points = np.zeros((0, 2*(n-2)), dtype=complex)
        self.representatives = []

    def __len__(self):
        return len(self.points)

    def known(self, z):
        return len(self.points) > 0 and np.min(_rel_dist(self.points, z)) <= self.dedup_tol

    def add(self, z):
        """
        Registers z (and its orbit) if new; returns whether it was new
        """
        if self.known(z):
            return False
        self.representatives.append(np.asarray(z))
        if self.use_symmetry:
            for image in model.deck_orbit(self.n, z):
                if not self.known(image):
                    self.points = np.vstack((self.points, image[np.newaxis,:]))
        else:
            self.points = np.vstack((self.points, np.asarray(z)[np.newaxis,:]))
        return True

def monodromy_solve(S, seed, target_count=None, cfg=None, workers=1):
    """
    Populates the solution set at a random complex start parameter by tracking
    known solutions around random triangle loops u0 -> g1 -> g2 -> u0.

    :returns: (u0, SolutionSet at u0)
    :raises IncompleteSet: after stall_limit loops without a new solution; the
        exception carries u0 and the partial set
    """
    cfg = dppmle.CONFIG.tracker_config() if cfg is None else cfg
    target = model.critical_point_count(S.n) if target_count is None else int(target_count)
    rng = np.random.default_rng(seed)
    u0, start = _seed_with_retries(S, rng, cfg)
    radius = np.linalg.norm(u0)
    registry = _OrbitRegistry(S.n, cfg.dedup_tol, cfg.use_deck_symmetry)
    registry.add(start.point)
    logger.info('Monodromy for n=%s: target %s solutions, start orbit gives %s', S.n, target, len(registry))

    stall = 0
    loop = 0
    with worker_pool(workers) as pool:
        while len(registry) < target and stall < cfg.stall_limit:
            loop += 1
            vertices = [u0, _random_sphere(rng, S.n_params, radius), _random_sphere(rng, S.n_params, radius), u0]
            queue = list(registry.representatives)
            n_new = 0
            while queue and len(registry) < target:
                endpoints = _track_many(S, queue, vertices, cfg, pool)
                queue = []
                for z in endpoints:
                    if not z is None and registry.add(z):
                        n_new += 1
                        queue.append(z)
            stall = 0 if n_new else stall + 1
            logger.info('Loop %s: %s new, %s/%s known', loop, n_new, len(registry), target)

    solutions = SolutionSet(S.n, u0, dedup_tol=cfg.dedup_tol)
    for z in registry.points:
        try:
            solutions.add(newton_refine(S, z, u0, cfg))
        except (Diverged, SingularJacobian) as e:
            logger.warning('Dropping point that failed to refine at u0: %s', e)
    solutions = solutions.sorted()
    if solutions.count < target:
        logger.warning(
            'Monodromy stalled after %s loops with %s of %s solutions', loop, solutions.count, target
            )
        raise IncompleteSet(
            'Found {0} of {1} solutions'.format(solutions.count, target), u0=u0, solutions=solutions
            )
    logger.info('Monodromy complete after %s loops: %s solutions', loop, solutions.count)
    return u0, solutions


# ____________________________________________________
# Parameter homotopy to the data

def _classify_reality(S, sol, u, cfg):
    """
    Marks sol real if a real-restricted Newton refinement of Re(z) lands within
    reality_tol of it; the real refinement then replaces the point
    """
    z = sol.point
    scale = 1. + float(np.max(np.abs(z.real)))
    if np.max(np.abs(z.imag)) > NEAR_REAL_TOL * scale:
        return sol
    try:
        real = newton_refine(S, z.real.copy(), np.real(u), cfg)
    except (Diverged, SingularJacobian):
        return sol
    zr = real.point.real
    if np.max(np.abs(z - zr)) <= cfg.reality_tol * (1. + float(np.max(np.abs(zr)))):
        loglik = model.log_likelihood_parametric(model.MatrixParam.from_vector(S.n, zr), np.real(u))
        return sol.copy(point=zr, residual=real.residual, is_real=True, loglik=loglik)
    return sol

def _representatives(points, n, dedup_tol):
    registry = _OrbitRegistry(n, dedup_tol, True)
    for z in points:
        registry.add(z)
    return registry.representatives

def solve_at(S, u_target, warmstart, cfg=None, seed=0, workers=1):
    """
    Moves every start solution from u0 to u_target along u0 -> gamma*u_mid -> u_target,
    then refines, deduplicates and classifies reality at u_target.

    :param warmstart: (u0, SolutionSet at u0), typically from monodromy_solve
    """
    cfg = dppmle.CONFIG.tracker_config() if cfg is None else cfg
    u0, start = warmstart
    u_target = np.asarray(u_target.u if isinstance(u_target, model.DataCounts) else u_target)
    if u_target.shape != (S.n_params,):
        raise ValueError('Expected {0} parameters, got shape {1}'.format(S.n_params, u_target.shape))
    rng = np.random.default_rng(seed)
    radius = np.linalg.norm(u_target)

    if cfg.use_deck_symmetry:
        starts = _representatives(start.points, S.n, cfg.dedup_tol)
    else:
        starts = list(start.points)
    logger.info('Tracking %s paths from u0 to %s', len(starts), u_target)

    detour = lambda: [
        u0, np.exp(2j*np.pi*rng.random()) * _random_sphere(rng, S.n_params, radius), u_target
        ]
    with worker_pool(workers) as pool:
        endpoints = _track_many(S, starts, detour(), cfg, pool)
        failed = [ i for i, z in enumerate(endpoints) if z is None ]
        if failed:
            logger.info('Retrying %s failed paths with a new detour', len(failed))
            retried = _track_many(S, [ starts[i] for i in failed ], detour(), cfg, pool)
            for i, z in zip(failed, retried):
                endpoints[i] = z
    lost = sum(1 for z in endpoints if z is None)
    if lost:
        logger.warning('%s paths lost on the way to u_target', lost)

    points = []
    for z in endpoints:
        if z is None: continue
        points.extend(model.deck_orbit(S.n, z) if cfg.use_deck_symmetry else [z])

    solutions = SolutionSet(S.n, u_target, dedup_tol=cfg.dedup_tol, lost=lost)
    for z in points:
        try:
            sol = newton_refine(S, z, u_target, cfg)
        except (Diverged, SingularJacobian) as e:
            logger.warning('Dropping endpoint that failed to refine: %s', e)
            continue
        solutions.add(_classify_reality(S, sol, u_target, cfg))
    solutions = solutions.sorted()
    logger.info(
        'Solutions at target: %s (%s real, %s conjugate pairs, %s lost)',
        solutions.count, solutions.count_real, len(solutions.conjugate_pairs()), lost
        )
    if solutions.count < start.count:
        logger.warning('Only %s of %s start solutions reached the target', solutions.count, start.count)
    return solutions
