# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

""" This module contains the testcases for the option table and the run configuration."""

# Disable pylint warning triggered by standard fixture usage
# pylint: disable=redefined-outer-name
# pylint: disable=unused-argument

import logging
import pytest

from mvfuse.module_utils.mvfuse_util import ValidationError, get_log, set_verbosity
from mvfuse.module_utils.mvfuse_options import OPTIONS, OPTIONS_BY_NAME, Option, RunConfig, options_markdown


def test_option_convert():
    """Test option value conversion.
        Result: strings from the command line and YAML scalars are converted, bad values rejected
    """
    assert OPTIONS_BY_NAME['jobs'].convert('3') == 3
    assert OPTIONS_BY_NAME['epsilon'].convert(1) == 1.0
    assert OPTIONS_BY_NAME['optimize'].convert('no') is False
    assert OPTIONS_BY_NAME['look_at'].convert('0,0,1.2') == [0.0, 0.0, 1.2]
    assert OPTIONS_BY_NAME['drop_cameras'].convert('cam1, cam2') == ['cam1', 'cam2']
    assert OPTIONS_BY_NAME['fov'].convert(None) is None
    with pytest.raises(ValidationError):
        OPTIONS_BY_NAME['jobs'].convert('2.5')
    with pytest.raises(ValidationError):
        OPTIONS_BY_NAME['optimize'].convert('maybe')
    with pytest.raises(ValidationError, match="expects 3 values"):
        OPTIONS_BY_NAME['look_at'].convert('0,1')
    with pytest.raises(ValidationError, match="not one of"):
        OPTIONS_BY_NAME['weights_strategy'].convert('median')


def test_option_flag_and_unfold():
    option = Option("lambda_sym", "A   folded\n   description.")
    assert option.flag == '--lambda-sym'
    assert '  ' not in option.desc
    assert 'lambda_sym' in repr(option)


def test_run_config_defaults_and_builders():
    """Test the configuration builders.
        Step 1: default RunConfig
        Result 1: builders give the documented library defaults
        Step 2: update with overrides
        Result 2: the overrides reach the library config objects
    """
    cfg = RunConfig()
    assert cfg.fusion_config().strategy == 'per_joint_reprojection'
    assert cfg.objective_config().lambda_sym == 1.0
    assert cfg.rig_spec().camera_count == 4
    assert cfg.corruption_spec().occluded_view_count == 3
    assert cfg.motion_spec().kind == 'sinusoidal'
    assert cfg.metric_options().exclude_pelvis is False
    cfg.update({'weights_strategy': 'confidence', 'lambda_sym': '0.5', 'camera_count': 6, 'seed': 8})
    assert cfg.fusion_config().strategy == 'confidence'
    assert cfg.objective_config().lambda_sym == 0.5
    assert cfg.rig_spec().camera_count == 6
    assert cfg.corruption_spec().seed == 8
    assert sorted(cfg.todict()) == sorted(option.name for option in OPTIONS)


def test_run_config_errors(tmp_path):
    cfg = RunConfig()
    with pytest.raises(ValidationError, match="Unexpected parameters"):
        cfg.update({'lamda': 1})
    with pytest.raises(ValidationError, match="Missing mandatory parameter cameras"):
        cfg.check_paths('cameras')
    cfg.set('cameras', str(tmp_path / 'nothere.json'))
    with pytest.raises(ValidationError, match="does not exist"):
        cfg.check_paths('cameras')
    with pytest.raises(ValidationError):
        RunConfig.from_dict(['a'])
    assert RunConfig.from_dict(None).seed == 0


def test_options_markdown():
    text = options_markdown()
    for option in OPTIONS:
        assert f"`{option.flag}`" in text
    assert "## Refinement" in text


def test_set_verbosity():
    assert set_verbosity(0) in (logging.ERROR, logging.DEBUG)
    assert set_verbosity(3) == logging.DEBUG
    set_verbosity(0)
    assert get_log().name == 'mvfuse'
