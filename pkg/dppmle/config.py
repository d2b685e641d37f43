#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os.path as osp
import logging, os, configparser
logger = logging.getLogger('dppmle')


class ConfigCollection(object):
    """
    Reads a config file with one or more named configurations
    """
    def __init__(self, config_file):
        super(ConfigCollection, self).__init__()
        self.config_file = config_file
        if not osp.isfile(config_file):
            raise OSError(
                'Tried to obtain configuration for dppmle from {0}, '
                'but no such file exists.'
                .format(self.config_file)
                )
        logger.debug('Using config file %s', self.config_file)
        self.config = configparser.ConfigParser()
        self.config.read(config_file)

    def sections(self):
        return [ k for k in self.config.keys() if not k == 'DEFAULT' ]

    def get_config(self, config_name):
        if config_name is None:
            config_name = self.sections()[0]
            logger.warning('No specific config specified, picking configuration %s', config_name)
        if not config_name in self.sections():
            raise ValueError(
                'No configuration {0} found in {1}'
                .format(config_name, self.config_file)
                )
        return Config(config_name, self.config[config_name])


class Config(object):
    """
    Typed view on one section of the config file.
    Should be instantiated via ConfigCollection.get_config.
    """

    # key: (type, default)
    tracker_keys = {
        'step_init'           : (float, 0.1),
        'step_min'            : (float, 1e-7),
        'newton_tol'          : (float, 1e-11),
        'residual_tol'        : (float, 1e-9),
        'corrector_tol'       : (float, 1e-9),
        'max_corrector_iters' : (int, 3),
        'max_refine_iters'    : (int, 50),
        'max_steps'           : (int, 10000),
        'dedup_tol'           : (float, 1e-6),
        'reality_tol'         : (float, 1e-8),
        'stall_limit'         : (int, 30),
        'use_deck_symmetry'   : (bool, True),
        }

    def __init__(self, name, section=None):
        super(Config, self).__init__()
        self.name = name
        self.section = {} if section is None else section

        self.tracker = {}
        for key, (cast, default) in self.tracker_keys.items():
            self.tracker[key] = self._get(key, cast, default)
        self.zero_tol = self._get('zero_tol', float, 1e-12)
        self.seed = self._get('seed', int, 42)
        self.max_count = self._get('max_count', int, 1000)
        self.workers = self._resolve_workers()
        logger.debug(
            'Configuration %s: tracker %s, zero_tol %s, seed %s, workers %s',
            self.name, self.tracker, self.zero_tol, self.seed, self.workers
            )

    def _get(self, key, cast, default):
        if not key in self.section or str(self.section[key]).strip() == '':
            return default
        raw = str(self.section[key]).strip()
        try:
            if cast is bool:
                if raw.lower() in ('1', 'yes', 'true', 'on'): return True
                if raw.lower() in ('0', 'no', 'false', 'off'): return False
                raise ValueError(raw)
            return cast(raw)
        except ValueError:
            raise ValueError(
                'Configuration {0}: cannot read {1} = {2!r} as {3}'
                .format(self.name, key, raw, cast.__name__)
                )

    def _resolve_workers(self):
        workers = self._get('workers', int, None)
        if workers is None and 'DPPMLE_WORKERS' in os.environ:
            workers = int(os.environ['DPPMLE_WORKERS'])
        if workers is None:
            workers = os.cpu_count() or 1
        if workers < 1:
            raise ValueError('workers must be >= 1, got {0}'.format(workers))
        return workers

    def tracker_config(self, **overrides):
        """
        Returns a TrackerConfig from this configuration; keyword arguments
        that are not None replace the configured values
        """
        from .solver import TrackerConfig
        kwargs = dict(self.tracker)
        for key, value in overrides.items():
            if value is None: continue
            if not key in self.tracker_keys:
                raise ValueError('Unknown tracker setting {0}'.format(key))
            kwargs[key] = value
        return TrackerConfig(**kwargs)
