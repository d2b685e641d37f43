from unittest import TestCase
try:
    from mock import Mock, MagicMock, patch
except ImportError:
    from unittest.mock import Mock, MagicMock, patch
import logging, os, sys, json, glob, shutil, tempfile, contextlib
import io as stdio
import os.path as osp
import numpy as np
import numpy.testing as npt


def setup_testlogger():
    formatter = logging.Formatter(
        fmt = '[clitestlogger|%(levelname)8s|%(asctime)s|%(module)s]: %(message)s',
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
import dppmle.cli
from dppmle import model


def run(*argv):
    """Runs the CLI, returns (exit code, stdout)"""
    out = stdio.StringIO()
    with contextlib.redirect_stdout(out):
        code = dppmle.cli.main(list(argv))
    return code, out.getvalue()


class TmpDirTestCase(TestCase):

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def path(self, name):
        return osp.join(self.tmpdir, name)

    def write(self, name, contents):
        with open(self.path(name), 'w') as f:
            f.write(contents)
        return self.path(name)


class TestCountsFiles(TmpDirTestCase):

    def test_write_read(self):
        counts = model.DataCounts(4, [1, 2, 3, 4, 5, 6])
        dppmle.io.write_counts(counts, self.path('counts.json'))
        with open(self.path('counts.json')) as f:
            d = json.load(f)
        self.assertEqual(d['u'], {'12': 1, '13': 2, '14': 3, '23': 4, '24': 5, '34': 6})
        self.assertEqual(d['total'], 21)
        self.assertTrue(d['generic'])
        npt.assert_array_equal(dppmle.io.read_counts(self.path('counts.json')).u, counts.u)

    def test_keys_for_large_n(self):
        counts = dppmle.random_counts(10, 5, 1)
        d = dppmle.io.counts_to_dict(counts)
        self.assertIn('1,10', d['u'])
        npt.assert_array_equal(dppmle.io.counts_from_dict(d).u, counts.u)

    def test_missing_pair(self):
        path = self.write('bad.json', '{"n": 3, "u": {"12": 1, "13": 2}}')
        with self.assertRaises(dppmle.SchemaError) as ctx:
            dppmle.io.read_counts(path)
        self.assertIn('bad.json', str(ctx.exception))
        self.assertEqual(ctx.exception.field, 'u')

    def test_bad_count(self):
        path = self.write('bad.json', '{"n": 3, "u": {"12": 1, "13": -2, "23": 3}}')
        with self.assertRaises(dppmle.SchemaError) as ctx:
            dppmle.io.read_counts(path)
        self.assertEqual(ctx.exception.field, 'u.13')

    def test_wrong_total(self):
        path = self.write('bad.json', '{"n": 3, "u": {"12": 1, "13": 2, "23": 3}, "total": 7}')
        with self.assertRaises(dppmle.SchemaError) as ctx:
            dppmle.io.read_counts(path)
        self.assertEqual(ctx.exception.field, 'total')

    def test_invalid_json(self):
        path = self.write('bad.json', '{"n": 3, "u": ')
        with self.assertRaises(dppmle.SchemaError):
            dppmle.io.read_counts(path)

    def test_parse_inline(self):
        counts = dppmle.io.parse_counts('1,2,3')
        self.assertEqual(counts.n, 3)
        with self.assertRaises(dppmle.SchemaError):
            dppmle.io.parse_counts('1,2,3,4')
        with self.assertRaises(ValueError):
            dppmle.io.parse_counts('1,2,3', n=4)

    def test_floats_written_with_17_digits(self):
        dppmle.io.write_json({'a' : [0.1, 1.0, 1e-20], 'b' : {'c' : 2}, 'd' : []}, self.path('f.json'))
        with open(self.path('f.json')) as f:
            text = f.read()
        self.assertIn('0.10000000000000001', text)
        self.assertIn('1.0,', text)
        self.assertIn('9.9999999999999995e-21', text)
        d = json.loads(text)
        self.assertEqual(d, {'a' : [0.1, 1.0, 1e-20], 'b' : {'c' : 2}, 'd' : []})
        self.assertIsInstance(d['a'][1], float)

    def test_write_json_creates_parent_directories(self):
        path = osp.join(self.tmpdir, 'a', 'b', 'f.json')
        dppmle.io.write_json({'x' : 1}, path)
        self.assertTrue(osp.isfile(path))
        with self.assertRaises(OSError):
            dppmle.io.write_json({'x' : 1}, osp.join(path, 'g.json'))

    def test_format_json_layout_matches_json_module(self):
        obj = {'n' : 3, 'u' : {'12' : 1}, 'ok' : True, 'none' : None, 's' : ['x', []]}
        self.assertEqual(dppmle.io.format_json(obj), json.dumps(obj, indent=2))

    def test_parse_random(self):
        counts = dppmle.io.parse_counts('random', n=5, seed=42)
        npt.assert_array_equal(counts.u, dppmle.random_counts(5, 1000, 42).u)


class TestCommands(TmpDirTestCase):

    def test_regions(self):
        code, out = run('regions', '--n', '4')
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), '24')

    def test_regions_full_file(self):
        code, out = run('regions', '--n', '3', '--full', '--out', self.path('regions.json'))
        self.assertEqual(code, 0)
        with open(self.path('regions.json')) as f:
            d = json.load(f)
        self.assertEqual(d['count'], 4)
        self.assertEqual(len(d['sign_vectors']), 4)

    def test_solve_n3(self):
        out_path = self.path('result.json')
        code, out = run('solve', '--u', '1,2,3', '--out', out_path, '--deterministic')
        self.assertEqual(code, 0)
        self.assertIn('4 critical points, 4 real, 1 implicit', out)
        with open(out_path) as f:
            d = json.load(f)
        self.assertEqual((d['n'], d['count'], d['count_real'], d['implicit_count']), (3, 4, 4, 1))
        npt.assert_allclose(d['mle']['q'], [1./6, 1./3, 1./2], rtol=1e-10)
        self.assertIsNone(d['timings_ms'])
        for sol in d['solutions']:
            self.assertEqual(sol['hessian_class'], 'max')
            self.assertEqual(len(sol['sign_vector']), 2)
            self.assertEqual(sol['point_im'], [0.0, 0.0])

    def test_solve_n4_summary(self):
        code, out = run('solve', '--n', '4', '--u', 'random', '--seed', '42')
        self.assertEqual(code, 0)
        self.assertIn('24 critical points, 24 real, 3 implicit', out)

    def test_deterministic_output_is_identical(self):
        for name in ('a.json', 'b.json'):
            code, out = run('solve', '--n', '4', '--u', 'random', '--deterministic', '--out', self.path(name))
            self.assertEqual(code, 0)
        with open(self.path('a.json'), 'rb') as fa, open(self.path('b.json'), 'rb') as fb:
            self.assertEqual(fa.read(), fb.read())

    def test_sample_then_solve(self):
        counts_path = self.path('counts.json')
        code, out = run(
            'sample', '--matrix', '1,0,1;0,1,1', '--N', '300', '--seed', '1', '--out', counts_path
            )
        self.assertEqual(code, 0)
        counts = dppmle.io.read_counts(counts_path)
        self.assertEqual(counts.total, 300)
        code, out = run('solve', '--u', counts_path, '--deterministic')
        self.assertEqual(code, 0)

    def test_sample_random_subspace(self):
        code, out = run('sample', '--n', '5', '--N', '50', '--seed', '3')
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)['total'], 50)

    def test_verify_n3(self):
        code, out = run('verify', '--n', '3', '--trials', '2', '--deterministic')
        self.assertEqual(code, 0)
        report = json.loads(out)
        self.assertTrue(report['passed'])
        self.assertEqual(len(report['trials']), 2)
        t = report['trials'][0]
        self.assertEqual((t['count'], t['count_real'], t['implicit_count'], t['regions_matched']), (4, 4, 1, 4))

    def test_bench_table(self):
        code, out = run('bench', '--n', '4', '--deterministic', '--out', self.path('bench.json'))
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertTrue(lines[0].startswith('n'))
        self.assertTrue(lines[2].startswith('Number of Solutions'))
        self.assertTrue(lines[2].rstrip().endswith('24'))
        with open(self.path('bench.json')) as f:
            self.assertEqual(json.load(f)['rows'][0]['count'], 24)


class TestExitCodes(TmpDirTestCase):

    def test_schema_error_exits_1(self):
        path = self.write('bad.json', '{"n": 3, "u": {"12": 1}}')
        code, out = run('solve', '--u', path)
        self.assertEqual(code, 1)

    def test_invalid_n_exits_1(self):
        self.assertEqual(run('regions', '--n', '2')[0], 1)
        self.assertEqual(run('verify', '--n', '9')[0], 1)

    def test_rank_deficient_matrix_exits_1(self):
        self.assertEqual(run('sample', '--matrix', '1,2,3;2,4,6')[0], 1)

    def test_incomplete_exits_2(self):
        code, out = run('solve', '--u', '1,2,3', '--target-count', '8', '--stall-limit', '2')
        self.assertEqual(code, 2)

    def test_failed_verification_exits_3(self):
        failing = dppmle.VerificationReport(3)
        failing.fail('forced')
        with patch('dppmle.analysis.verify_counts', return_value=failing):
            code, out = run('verify', '--n', '3')
        self.assertEqual(code, 3)

    def test_unknown_conf_exits_1(self):
        self.assertEqual(run('regions', '--n', '3', '--conf', 'nonexistent')[0], 1)

    def test_bad_arguments_exit_1(self):
        with contextlib.redirect_stderr(stdio.StringIO()) as err:
            self.assertEqual(run('solve')[0], 1)
            self.assertEqual(run('regions', '--n', 'abc')[0], 1)
            self.assertEqual(run('nonsense')[0], 1)
        self.assertIn('usage', err.getvalue())

    def test_help_still_exits_0(self):
        with contextlib.redirect_stderr(stdio.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                run('--help')
        self.assertEqual(ctx.exception.code, 0)


class TestRotatingFileHandler(TestCase):

    filename = osp.join(osp.dirname(__file__), 'rotatingtest.log')

    def tearDown(self):
        for handler in list(dppmle.logger.handlers):
            if isinstance(handler, logging.FileHandler) and handler.baseFilename == self.filename:
                handler.close()
                dppmle.logger.removeHandler(handler)
        for f in self.get_files():
            os.remove(f)

    def get_files(self):
        return glob.glob(self.filename + '*')

    def count(self):
        return len(self.get_files())

    def logfile_contains(self, logfile, text):
        if not osp.isfile(logfile):
            logger.error('%s does not exist', logfile)
            return False
        with open(logfile) as f:
            contents = f.read()
        return text in contents

    def test_basic_rotating_file_handler(self):
        self.assertEqual(self.count(), 0)
        handler = dppmle.RotatingFileHandler(self.filename)
        self.assertEqual(self.count(), 1)

        tmp_logger = logging.getLogger('tmp')
        tmp_logger.setLevel(logging.INFO)
        tmp_logger.addHandler(handler)
        try:
            tmp_logger.info('####test1####')
            self.assertTrue(self.logfile_contains(self.filename, '####test1####'))

            handler.perform_rotation()
            self.assertEqual(self.count(), 2)
            self.assertTrue(self.logfile_contains(self.filename + '.1', '####test1####'))

            tmp_logger.info('####test2####')
            self.assertTrue(self.logfile_contains(self.filename, '####test2####'))
        finally:
            tmp_logger.removeHandler(handler)
            handler.close()

    def test_get_index(self):
        handler = dppmle.RotatingFileHandler(self.filename)
        try:
            self.assertEqual(handler.get_index(self.filename), 0)
            self.assertEqual(handler.get_index(self.filename + '.3'), 3)
            self.assertIsNone(handler.get_index(self.filename + '.bak'))
        finally:
            handler.close()

    def test_log_file_flag_rotates(self):
        with open(self.filename, 'w') as f:
            f.write('previous run\n')
        code, out = run('regions', '--n', '3', '--log-file', self.filename)
        self.assertEqual(code, 0)
        self.assertTrue(self.logfile_contains(self.filename + '.1', 'previous run'))
        self.assertTrue(self.logfile_contains(self.filename, 'Enumerated 4 sign vectors'))
