from unittest import TestCase
import logging, os
import os.path as osp
import numpy as np
import numpy.testing as npt


def setup_testlogger():
    formatter = logging.Formatter(
        fmt = '[dpptestlogger|%(levelname)8s|%(asctime)s|%(module)s]: %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
        )
    handler = logging.StreamHandler()
    handler.setFormatter(formatter)
    logger = logging.getLogger('testlogger')
    logger.setLevel(logging.DEBUG)
    logger.addHandler(handler)
    return logger
logger = setup_testlogger()

tests_dir = osp.dirname(osp.abspath(__file__))
os.environ['DPPMLE_DIR'] = tests_dir
os.environ['DPPMLE_CONF'] = 'test'
import dppmle
from dppmle import dpp


class TestKernel(TestCase):

    def test_rejects_non_symmetric(self):
        with self.assertRaises(dppmle.KernelError):
            dpp.ProjectionKernel([[1., 1.], [0., 0.]])

    def test_rejects_non_idempotent(self):
        with self.assertRaises(dppmle.KernelError):
            dpp.ProjectionKernel(0.5*np.eye(3), d=1)

    def test_projection_from_rows(self):
        kernel = dpp.projection_from_rows([[1., 0., 1.], [0., 1., 1.]])
        self.assertEqual((kernel.n, kernel.d), (3, 2))
        npt.assert_allclose(kernel.P.dot(kernel.P), kernel.P, atol=1e-12)
        self.assertAlmostEqual(np.trace(kernel.P), 2.)

    def test_projection_of_known_rows(self):
        kernel = dpp.projection_from_rows([[1., 0., 1.], [0., 1., 1.]])
        expected = np.array([[2., -1., 1.], [-1., 2., 1.], [1., 1., 2.]]) / 3.
        npt.assert_allclose(kernel.P, expected, atol=1e-14)
        npt.assert_allclose(kernel.basis.T.dot(kernel.basis), np.eye(2), atol=1e-14)

    def test_coordinate_rows(self):
        kernel = dpp.projection_from_rows([[1., 0., 0.], [0., 1., 0.]])
        npt.assert_allclose(kernel.P, np.diag([1., 1., 0.]), atol=1e-14)

    def test_projection_depends_only_on_row_span(self):
        rng = np.random.default_rng(5)
        for n in (3, 5, 8):
            M = dpp.random_subspace(n, 2, rng)
            G = rng.standard_normal((2, 2)) + 2.*np.eye(2)
            npt.assert_allclose(
                dpp.projection_from_rows(G.dot(M)).P, dpp.projection_from_rows(M).P, atol=1e-10
                )

    def test_kernel_basis_from_eigenvectors(self):
        kernel = dpp.ProjectionKernel(np.diag([1., 1., 0.]))
        self.assertEqual(kernel.d, 2)
        npt.assert_allclose(kernel.basis.dot(kernel.basis.T), kernel.P, atol=1e-14)

    def test_rank_deficient_rows(self):
        with self.assertRaises(dppmle.RankError):
            dpp.projection_from_rows([[1., 2., 3.], [2., 4., 6.]])


class TestDistribution(TestCase):

    def test_uniform_example(self):
        # p = (1, 1, -1), so every pair has probability 1/3
        dist = dpp.dpp_distribution(dpp.projection_from_rows([[1., 0., 1.], [0., 1., 1.]]))
        self.assertEqual(list(dist.subsets), [(1,2), (1,3), (2,3)])
        npt.assert_allclose(dist.probs, [1./3, 1./3, 1./3], rtol=1e-12)
        self.assertAlmostEqual(dist[(1,3)], 1./3)

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(0)
        for n, d in ((5, 2), (6, 3), (8, 2)):
            dist = dpp.dpp_distribution(dpp.projection_from_rows(dpp.random_subspace(n, d, rng)))
            self.assertAlmostEqual(float(np.sum(dist.probs)), 1., places=10)
            self.assertLessEqual(abs(float(np.sum(dist.probs)) - 1.), 1e-12)
            self.assertTrue(np.all(dist.probs >= 0))

    def test_degenerate_kernel(self):
        dist = dpp.dpp_distribution(dpp.ProjectionKernel(np.diag([1., 1., 0.])))
        npt.assert_allclose(dist.probs, [1., 0., 0.], atol=1e-14)

    def test_repr_shows_plain_floats(self):
        dist = dpp.DppDistribution(3, 2, [0.5, 0.25, 0.25])
        self.assertEqual(repr(dist), '<DppDistribution n=3 d=2 probs=[0.5, 0.25, 0.25]>')

    def test_invalid_probabilities(self):
        with self.assertRaises(dppmle.KernelError):
            dpp.DppDistribution(3, 2, [0.5, 0.5, 0.5])
        with self.assertRaises(ValueError):
            dpp.DppDistribution(3, 2, [0.5, 0.5])


class TestSampling(TestCase):

    def setUp(self):
        self.kernel = dpp.projection_from_rows([[1., 0., 1.], [0., 1., 1.]])

    def test_sample_counts_reproducible(self):
        a = dpp.sample_counts(self.kernel, 300, 7)
        b = dpp.sample_counts(self.kernel, 300, 7)
        npt.assert_array_equal(a.u, b.u)
        self.assertEqual(a.total, 300)
        self.assertEqual(a.n, 3)

    def test_sample_frequencies(self):
        N = 30000
        counts = dpp.sample_counts(self.kernel, N, 11)
        sigma = np.sqrt(N * (1./3) * (2./3))
        self.assertTrue(np.all(np.abs(counts.u - N/3.) < 5.*sigma), counts)

    def test_sample_degenerate_kernel(self):
        kernel = dpp.ProjectionKernel(np.diag([1., 1., 0.]))
        with self.assertLogs('dppmle', level='WARNING'):
            counts = dpp.sample_counts(kernel, 100, 1)
        npt.assert_array_equal(counts.u, [100, 0, 0])
        self.assertFalse(counts.generic)

    def test_sample_needs_rank_two(self):
        kernel = dpp.projection_from_rows(dpp.random_subspace(5, 3, 1))
        with self.assertRaises(ValueError):
            dpp.sample_counts(kernel, 10, 1)

    def test_random_counts_range(self):
        counts = dpp.random_counts(6, 1000, 42)
        self.assertEqual(len(counts.u), 15)
        self.assertTrue(np.all((counts.u >= 1) & (counts.u <= 1000)))
        npt.assert_array_equal(counts.u, dpp.random_counts(6, 1000, 42).u)

    def test_random_counts_max_one(self):
        npt.assert_array_equal(dpp.random_counts(5, 1, 3).u, np.ones(10))

    def test_random_counts_depend_on_seed(self):
        self.assertFalse(np.array_equal(dpp.random_counts(5, 1000, 1).u, dpp.random_counts(5, 1000, 2).u))

    def test_random_subspace_is_gauge_fixed(self):
        M = dpp.random_subspace(5, 2, 3)
        self.assertEqual(M.shape, (2, 5))
        npt.assert_array_equal(M[:,:2], np.eye(2))
