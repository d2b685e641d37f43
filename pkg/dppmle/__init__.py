#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os, sys
import os.path as osp
from .logger import (
    setup_logger, set_verbosity, add_rotating_file_handler, RotatingFileHandler
    )
logger = setup_logger()

if 'DPPMLE_ROTFILEHANDLER' in os.environ:
    # Fix logging to a file before any other configuration to also save the logging
    # emitted *during* the configuration
    add_rotating_file_handler(os.environ['DPPMLE_ROTFILEHANDLER'])

# Default dir for user files of the package
if 'DPPMLE_DIR' in os.environ:
    DPPMLE_DIR = os.environ['DPPMLE_DIR']
else:
    DPPMLE_DIR = osp.expanduser('~/.dppmle')

def find_config_file():
    if 'DPPMLE_CONF_FILE' in os.environ:
        return os.environ['DPPMLE_CONF_FILE']
    for config_file in [
        osp.join(DPPMLE_DIR, 'config'),
        osp.expanduser('~/.dppmle/config'),
        osp.join(osp.dirname(osp.abspath(__file__)), 'data', 'config'),
        ]:
        if osp.isfile(config_file):
            return config_file
    else:
        # The shipped config file, data/config, should always exist
        raise OSError('Could not find any existing configuration file')
DPPMLE_CONF_FILE = find_config_file()

# Name of the configuration in the config file to be used
DPPMLE_CONF = os.environ.get('DPPMLE_CONF', None)

from .config import ConfigCollection, Config
def reload_config(config_name=None, config_file=None):
    configcollection = ConfigCollection(DPPMLE_CONF_FILE if config_file is None else config_file)
    return configcollection.get_config(config_name)

CONFIG = reload_config(DPPMLE_CONF)

from . import exceptions, utils, model, dpp, solver, analysis, io
from .exceptions import *
from .model import (
    MatrixParam, PlueckerVector, DataCounts, plucker, in_domain,
    log_likelihood_parametric, log_likelihood_implicit, log_likelihood_general_d,
    gradient, hessian, critical_point_count, ml_degree,
    )
from .dpp import (
    ProjectionKernel, DppDistribution, projection_from_rows, dpp_distribution,
    sample_counts, random_counts, random_subspace,
    )
from .solver import (
    GradientSystem, TrackerConfig, Solution, SolutionSet,
    newton_refine, track_path, seed_solution, monodromy_solve, solve_at,
    )
from .analysis import (
    ImplicitPoint, SignVector, VerificationReport, to_implicit, implicit_points,
    select_mle, classify_hessians, sign_vector, enumerate_regions, verify_counts,
    )
