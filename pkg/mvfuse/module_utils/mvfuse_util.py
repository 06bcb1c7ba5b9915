# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#
#

"""This module provides utility classes and function useful for mvfuse."""

DOCUMENTATION = r'''
---
module: mvfuse_util

short_description: This module provides utility classes and function useful for mvfuse

version_added: "1.0.0"

description:
    - init_log function:       an utility function to initialize the log framework
    - get_log function:        returns the package logger (bootstrapping it if needed)
    - set_verbosity function:  maps a verbosity count on a log level
    - MvfuseError class:       the root of the mvfuse exception tree
    - is_true function:        converts config file booleans

author:
    - The mvfuse authors

requirements:
    - python >= 3.9
    - numpy >= 1.22
'''

# ##Should be fixed later on then removed:
# pylint: disable=missing-class-docstring

import os
import sys
import logging

FORMAT_VERSION = "1.0"
GENERATOR = "mvfuse"

LOG_FORMAT = '[%(asctime)s] %(levelname)s - %(filename)s[%(lineno)d]: %(message)s'
LOG_DATEFMT = '%Y/%m/%d %H:%M:%S %z'


# Initialize logging system
_log = None


def init_log(name, stream=None):
    """Initialize the package logger: stderr handler, ERROR level until told otherwise."""
    # pylint: disable=global-statement
    global _log
    # pylint: enable=global-statement
    _log = logging.getLogger(name)
    for handler in list(_log.handlers):
        _log.removeHandler(handler)
    logh = logging.StreamHandler(stream if stream is not None else sys.stderr)
    logh.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATEFMT))
    logh.setLevel(logging.DEBUG)
    _log.addHandler(logh)
    _log.setLevel(logging.ERROR)
    if os.getenv('DEBUGGING', None):
        _log.setLevel(logging.DEBUG)
    return _log


def get_log():
    if not _log:
        init_log("mvfuse")
    return _log


def set_verbosity(level):
    """Map a -v count on the logger level (0: ERROR, 1: WARNING, 2: INFO, 3+: DEBUG)."""
    log = get_log()
    if os.getenv('DEBUGGING', None) or level >= 3:
        log.setLevel(logging.DEBUG)
    elif level == 2:
        log.setLevel(logging.INFO)
    elif level == 1:
        log.setLevel(logging.WARNING)
    else:
        log.setLevel(logging.ERROR)
    return log.level


def is_true(val):
    if isinstance(val, bool):
        return val
    if isinstance(val, (int, float)):
        return val != 0
    return str(val).strip().lower() in ("true", "yes", "on", "1")


class MvfuseError(Exception):
    """Base class of every error raised by mvfuse."""


class ValidationError(MvfuseError, ValueError):
    """An input violates a documented invariant."""


class FormatError(ValidationError):
    """A file could not be parsed. Carries the path, the 1-based line and the field when known."""

    def __init__(self, msg, path=None, line=None, field=None):
        self.path = None if path is None else str(path)
        self.line = line
        self.field = field
        where = []
        if self.path:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        prefix = f"{':'.join(where)}: " if where else ""
        super().__init__(f"{prefix}{msg}")


class BehindCamera(MvfuseError):
    def __init__(self, depth, z_min, camera_id=None):
        self.depth = float(depth)
        self.z_min = float(z_min)
        self.camera_id = camera_id
        cam = f" in camera {camera_id}" if camera_id is not None else ""
        super().__init__(f"Point is behind the camera{cam}: depth {self.depth:.6g} m <= z_min {self.z_min:.3g} m")


class JointUnresolvable(MvfuseError):
    def __init__(self, joints, msg=None):
        self.joints = tuple(int(j) for j in joints)
        super().__init__(msg or f"Cannot resolve joints {list(self.joints)}: not enough usable views")


class NonFiniteObjective(MvfuseError):
    """The refinement objective is NaN or infinite (corrupt input)."""
