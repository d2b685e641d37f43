#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os, logging, time
import os.path as osp
from concurrent.futures import ProcessPoolExecutor
logger = logging.getLogger('dppmle')

def create_directory(dirname):
    """
    Creates a directory (and its parents) if it does not exist yet.

    :param dirname: Name of the directory to be created
    :type dirname: str
    """
    if dirname == '': return
    if osp.isfile(dirname):
        raise OSError('{0} is a file'.format(dirname))
    if osp.isdir(dirname): return
    logger.info('Creating directory %s', dirname)
    os.makedirs(dirname)

def ensure_parent_directory(path):
    create_directory(osp.dirname(osp.abspath(path)))


class worker_pool(object):
    """
    Context manager that yields a process pool for path tracking, or None
    when a single worker is requested (everything then runs in-process).

    :param workers: Number of worker processes
    :type workers: int
    """
    def __init__(self, workers=1):
        super(worker_pool, self).__init__()
        if workers < 1:
            raise ValueError('workers must be >= 1, got {0}'.format(workers))
        self.workers = workers
        self.executor = None

    def __enter__(self):
        if self.workers == 1:
            return None
        logger.debug('Starting %s worker processes', self.workers)
        self.executor = ProcessPoolExecutor(max_workers=self.workers)
        return self.executor

    def __exit__(self, type, value, traceback):
        if self.executor is None:
            return
        self.executor.shutdown(wait=True)
        self.executor = None


class timer(object):
    """
    Context manager that stores the elapsed wall time in milliseconds in `ms`
    """
    def __init__(self, label=None):
        super(timer, self).__init__()
        self.label = label
        self.ms = None

    def __enter__(self):
        self._start = time.perf_counter()
        return self

    def __exit__(self, type, value, traceback):
        self.ms = 1000. * (time.perf_counter() - self._start)
        if self.label:
            logger.debug('%s took %.1f ms', self.label, self.ms)
