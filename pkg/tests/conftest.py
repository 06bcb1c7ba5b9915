# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#
#

"""This module contains the pytest helpers"""

import os
import sys
import logging
import subprocess
from pathlib import Path
import numpy as np
import pytest

from mvfuse.module_utils.mvfuse_skeleton import default_convention
from mvfuse.module_utils.mvfuse_synth import RigSpec, make_rig

BASE = str(Path(__file__).parent.parent)  # the repository root


class MvfuseTest:
    """ instances of this class is generated by mvfusetest fixture.
        it provides initialization and some utilies used by the tests.
    """

    def __init__(self, caplog):
        self.debugging = False
        self.caplog = caplog
        self.log = None
        self.result = None
        caplog.set_level(logging.INFO)
        if os.getenv('DEBUGGING', None):
            caplog.set_level(logging.DEBUG)
            self.debugging = True

    def get_log(self, name):
        """Return the current logger."""
        self.log = logging.getLogger(name)
        self.log.info('get_log: name={%s} __file__={%s}', name, __file__)
        return self.log

    def _log_stdio(self, name, result, log_func):
        """Log strings from subprocess.run result associated with stdio members."""
        text = getattr(result, name, None)
        if text:
            for line in text.split('\n'):
                log_func('  %s: %s', name.upper(), line)

    def _log_run_result(self, result, errmsg = None):
        """Displays subprocess.run result in a pretty way."""
        if errmsg:
            log_func = self.log.error
            log_func("%s", errmsg)
        else:
            log_func = self.log.info
        log_func('Running: %s', str(result.args))
        log_func('  ReturnCode: %d', result.returncode)
        self._log_stdio('stdout', result, log_func)
        self._log_stdio('stderr', result, log_func)

    def run_cli(self, *args, env=None, cwd=None):
        """Run mvfuse command line in a subprocess and return the subprocess.run result."""
        if self.log is None:
            self.get_log(__name__)
        cmd = [sys.executable, '-m', 'mvfuse', *[str(arg) for arg in args]]
        runenv = dict(os.environ)
        runenv.pop('MVFUSE_CONFIG', None)
        runenv['PYTHONPATH'] = os.pathsep.join(p for p in (BASE, runenv.get('PYTHONPATH')) if p)
        if env:
            runenv.update(env)
        result = subprocess.run(cmd, capture_output=True, encoding='utf-8', env=runenv, cwd=cwd) # pylint: disable=subprocess-run-check
        self.result = result
        if result.returncode not in (0, 1, 2):
            self._log_run_result(result, errmsg="Unexpected return code.")
        else:
            self._log_run_result(result)
        return result

    def run_ok(self, *args, **kwargs):
        """Run mvfuse and check it succeeded."""
        result = self.run_cli(*args, **kwargs)
        if result.returncode != 0:
            self._log_run_result(result, errmsg="mvfuse failed.")
        assert result.returncode == 0
        return result


@pytest.fixture(scope='function')
def mvfusetest(caplog):
    """Provide an MvfuseTest instance."""
    return MvfuseTest(caplog)


@pytest.fixture
def conv():
    """The 17 joints Human3.6M convention."""
    return default_convention()


@pytest.fixture
def rig():
    """4 cameras ring, 4 m radius, looking at (0, 0, 1)."""
    return make_rig(RigSpec())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
