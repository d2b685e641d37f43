#!/usr/bin/env python
# -*- coding: utf-8 -*-


class DppMleError(Exception):
    """Base class for all errors raised by dppmle"""


class DomainError(DppMleError):
    """A point lies outside X_n: some Pluecker coordinate or Q_n vanishes"""


class RankError(DppMleError):
    """A row block that should span a d-dimensional space is rank deficient"""


class KernelError(DppMleError):
    """A matrix fails the projection kernel checks"""


class SingularJacobian(DppMleError):
    """The Jacobian of the critical system is numerically singular"""


class Diverged(DppMleError):
    """Newton's method did not reach the residual tolerance"""


class PathFailure(DppMleError):
    """The step size of a path tracker dropped below the minimum"""


class PoleHit(PathFailure):
    """A tracked path ran into the pole locus of the rational system"""


class SeedFailure(DppMleError):
    """The start pair for monodromy could not be constructed cleanly"""


class NoRealSolution(DppMleError):
    """No real critical point is available to select an estimate from"""


class DegenerateInstance(DppMleError):
    """A generated matrix is not in X_n"""


class IncompleteSet(DppMleError):
    """
    Monodromy stalled before finding the expected number of solutions.
    The partial result is attached and stays usable.
    """
    def __init__(self, message, u0=None, solutions=None):
        super(IncompleteSet, self).__init__(message)
        self.u0 = u0
        self.solutions = solutions


class SchemaError(DppMleError):
    """An input file does not follow the expected JSON schema"""
    def __init__(self, message, path=None, field=None):
        super(SchemaError, self).__init__(message)
        self.path = path
        self.field = field

    def __str__(self):
        where = []
        if self.path is not None: where.append('file {0}'.format(self.path))
        if self.field is not None: where.append('field {0}'.format(self.field))
        msg = super(SchemaError, self).__str__()
        if where:
            msg = '{0} ({1})'.format(msg, ', '.join(where))
        return msg


class UsageError(DppMleError):
    """The command line arguments could not be parsed"""
