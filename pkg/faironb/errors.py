#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Exception hierarchy for fair-onb.

Every error carries the exit code the command line reports for it:
1 for usage/configuration problems, 2 for data and schema problems,
3 for failures while running the method itself.
"""


class FairOnbError(Exception):
    """Base class for all fair-onb errors"""
    exit_code = 3


class ConfigurationError(FairOnbError, ValueError):
    """Invalid flags, schema settings or threshold/FAWOS configuration"""
    exit_code = 1


class DataError(FairOnbError, ValueError):
    """Input data that cannot be turned into a Dataset"""
    exit_code = 2


class SchemaError(DataError):
    """Schema file missing or inconsistent with the CSV header"""


class ValidationError(DataError):
    """A value violates a declared column kind (binary, protected, class)"""


class ParseError(DataError):
    """A numeric cell could not be parsed"""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class InfeasibleFoldsError(FairOnbError):
    """Stratified folds cannot be built for the requested k"""


class UndefinedMetricError(FairOnbError, ArithmeticError):
    """A metric's conditional probability has an empty conditioning set"""


class EmptyCoverageError(FairOnbError):
    """Thresholds requested over an empty set of balls"""
