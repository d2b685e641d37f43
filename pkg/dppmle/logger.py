#!/usr/bin/env python
# -*- coding: utf-8 -*-
import logging, os, glob
import os.path as osp

DEFAULT_LOGGER_FORMATTER = logging.Formatter(
    fmt = '[dppmle|%(levelname)8s|%(asctime)s|%(module)s]: %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
    )

DEFAULT_LOGGER_NAME = 'dppmle'

def setup_logger(name=DEFAULT_LOGGER_NAME, formatter=DEFAULT_LOGGER_FORMATTER, level=logging.INFO):
    """
    Creates the package logger with a single stream handler

    :param name: Name of the logger
    :type name: str, optional
    :param formatter: logging.Formatter object which determines the log string format
    :type formatter: logging.Formatter
    :param level: Initial level of the logger
    :type level: int, optional
    """
    logger = logging.getLogger(name)
    # Re-importing the package (e.g. in worker processes) should not stack handlers
    if not any(getattr(h, '_dppmle_stream', False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(formatter)
        handler._dppmle_stream = True
        logger.addHandler(handler)
    logger.setLevel(level)
    return logger

def set_verbosity(verbose=False, quiet=False, name=DEFAULT_LOGGER_NAME):
    """
    Maps the CLI verbosity flags onto a logger level
    """
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    else:
        level = logging.INFO
    logging.getLogger(name).setLevel(level)
    return level

def add_rotating_file_handler(filename, formatter=DEFAULT_LOGGER_FORMATTER, delete_other_handlers=False):
    """
    Adds a file handler to the package logger that rolls over the file if it
    already exists, and throws away old logs.
    """
    # The handler opens the file on construction, so check for a previous run first
    should_perform_rotation = osp.isfile(filename)
    handler = RotatingFileHandler(filename)
    if should_perform_rotation: handler.perform_rotation()
    handler.setFormatter(formatter)
    handler.setLevel(logging.DEBUG)
    logger = logging.getLogger(DEFAULT_LOGGER_NAME)
    if delete_other_handlers:
        logger.handlers = []
    logger.addHandler(handler)
    logger.info('Started logging to %s', filename)
    if delete_other_handlers:
        logger.info('Other logging handlers were destroyed')
    return handler


class RotatingFileHandler(logging.FileHandler):
    """
    File handler that moves an existing log to a numbered backup when asked.
    Keeps at most `n_backups` files; `perform_rotation` must be called explicitly,
    typically once per CLI run.
    """

    n_backups = 10

    def __init__(self, filename, **kwargs):
        super(RotatingFileHandler, self).__init__(filename, **kwargs)
        self.basename = osp.basename(filename)

    def get_index(self, logfile):
        """
        Returns the backup index of `logfile`: 0 for the live file, k for `<name>.k`,
        None for anything else that happens to share the prefix
        """
        if len(logfile) == 0:
            raise ValueError('Log filename should have a length of at least 1')
        suffix = osp.basename(logfile)[len(self.basename):]
        if suffix == '':
            return 0
        if not suffix.startswith('.'):
            return None
        try:
            return int(suffix[1:])
        except ValueError:
            return None

    def perform_rotation(self):
        logfiles = glob.glob(self.baseFilename + '*')
        pairs = sorted(
            (index, logfile) for index, logfile in
            ((self.get_index(f), f) for f in logfiles)
            if index is not None
            )
        if len(pairs) == 0:
            return

        self.close()
        # Walk backwards so no backup is overwritten before it is moved
        for index, logfile in pairs[::-1]:
            if index >= self.n_backups - 1:
                continue
            os.rename(logfile, self.baseFilename + '.{0}'.format(index+1))
        self.stream = self._open()

        logging.getLogger(DEFAULT_LOGGER_NAME).debug(
            'Rotated log files %s', [ f for i, f in pairs ]
            )
