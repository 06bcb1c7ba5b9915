# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

"""This module provides the option table and the run configuration of mvfuse."""

DOCUMENTATION = r'''
---
module: mvfuse_options

short_description: Option definitions and run configuration

version_added: "1.0.0"

description:
    - Option class:      one configurable parameter (name, description, default, type, choices)
    - OPTIONS tuple:     every parameter accepted in a config file or on the command line
    - RunConfig class:   validated flat configuration with builders for the library config objects
    - options_markdown:  human readable table of the options (used by utils/gendoc.py)

author:
    - The mvfuse authors

requirements:
    - python >= 3.9
    - pyyaml
'''

### I found fstring more readable than lazy % formatting even if it is a bit slower:
# pylint: disable=logging-fstring-interpolation
### Option class gave a lot of parameters and variables (dict would limit the number)
### but would also be less readable.
# pylint: disable=too-many-instance-attributes
# pylint: disable=too-many-arguments

import re
from pathlib import Path

from .mvfuse_util import ValidationError, get_log, is_true
from .mvfuse_fusion import FALLBACKS, STRATEGIES, FusionConfig
from .mvfuse_optimizer import ObjectiveConfig
from .mvfuse_metrics import MetricOptions
from .mvfuse_synth import MOTION_KINDS, OCCLUDER_MODES, CorruptionSpec, MotionSpec, RigSpec

METHODS = ('fusion', 'triangulation')
PATH_OPTIONS = ('cameras', 'sequence', 'convention', 'poses')


class Option:
    """A mvfuse parameter."""
    def __init__(self, name, desc, vdef=None, otype="str", choice=None, group="run", size=None):
        self.name = name                 # Config file key (CLI flag is --name with '-' instead of '_')
        self.desc = Option.unfold(desc)  # Human readable description
        self.vdef = vdef                 # Default value
        self.otype = otype               # str, int, float, bool, path, floats, strs
        self.choice = choice             # Allowed values if option is a choice
        self.group = group               # Documentation section
        self.size = size                 # Expected length of list values

    @staticmethod
    def unfold(desc):
        """ This method remove consecutive spaces that are added when folding long lines."""
        return re.sub("  +", " ", desc)

    @property
    def flag(self):
        return f"--{self.name.replace('_', '-')}"

    def __repr__(self):
        return f"Option({self.name}, vdef={self.vdef!r}, otype={self.otype}, choice={self.choice})"

    def _convert_scalar(self, val, otype):
        if otype == "int":
            if isinstance(val, bool) or (isinstance(val, float) and not val.is_integer()):
                raise ValueError(val)
            return int(val)
        if otype == "float":
            if isinstance(val, bool):
                raise ValueError(val)
            return float(val)
        if otype == "bool":
            if isinstance(val, str) and val.strip().lower() not in ("true", "false", "yes", "no", "on", "off", "1", "0"):
                raise ValueError(val)
            return is_true(val)
        return str(val)

    def convert(self, val):
        """Return val converted to the option type, raises ValidationError."""
        if val is None:
            return None
        try:
            if self.otype in ("floats", "strs"):
                if isinstance(val, str):
                    val = [item for item in val.split(',') if item.strip() != '']
                res = [self._convert_scalar(item, "float" if self.otype == "floats" else "str") for item in val]
                if self.otype == "strs":
                    res = [item.strip() for item in res]
                if self.size is not None and len(res) != self.size:
                    raise ValidationError(f"Option {self.name} expects {self.size} values, got {len(res)}")
                return res
            res = self._convert_scalar(val, self.otype)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"Option {self.name}: cannot convert {val!r} to {self.otype}") from exc
        if self.choice and res not in self.choice:
            raise ValidationError(f"Option {self.name}: value {res!r} is not one of {list(self.choice)}")
        return res


OPTIONS = (
    # Paths
    Option("cameras", "Camera calibration JSON file.", otype="path", group="paths"),
    Option("sequence", "Sequence JSON Lines file.", otype="path", group="paths"),
    Option("convention", "Joint convention JSON file (default: 17 joints Human3.6M).", otype="path", group="paths"),
    Option("poses", "Predicted poses JSON Lines file scored by the evaluate command.", otype="path", group="paths"),
    Option("output", "Output directory.", "mvfuse-out", otype="path", group="paths"),
    # Fusion
    Option("weights_strategy", "Fusion weighting strategy.", "per_joint_reprojection", choice=STRATEGIES, group="fusion"),
    Option("epsilon", "Floor (px^2) applied to the mean reprojection error before inversion.", 1e-6,
           otype="float", group="fusion"),
    Option("min_views", "Minimum number of usable views needed to resolve a joint.", 1, otype="int", group="fusion"),
    Option("fallback", "What to do with unresolved joints: 'uniform' mean of the predictions or 'none' (fail).",
           "uniform", choice=FALLBACKS, group="fusion"),
    # Objective
    Option("optimize", "Refine the fused pose (false is the fusion only pipeline).", True, otype="bool",
           group="objective"),
    Option("lambda_sym", "Weight of the limb symmetry cost (m^2) against the reprojection error (px^2).", 1.0,
           otype="float", group="objective"),
    Option("max_iters", "Refinement iteration budget.", 100, otype="int", group="objective"),
    Option("grad_tol", "Refinement stops when the gradient infinity norm is below this value.", 1e-8,
           otype="float", group="objective"),
    Option("step_tol", "Refinement stops when the step infinity norm (m) is below this value.", 1e-10,
           otype="float", group="objective"),
    Option("initial_damping", "Initial Levenberg-Marquardt damping, relative to max diag(J^T J).", 1e-3,
           otype="float", group="objective"),
    Option("z_min", "Minimum camera frame depth (m) of a projected point.", 1e-6, otype="float", group="objective"),
    # Metrics
    Option("exclude_pelvis", "Exclude the pelvis from the pelvis aligned MPJPE average.", False, otype="bool",
           group="metrics"),
    Option("include_clamped", "Score frames whose desync offset was clamped at a sequence boundary.", False,
           otype="bool", group="metrics"),
    Option("metric", "MPJPE column used by the compare command.", "abs", choice=("abs", "rel"), group="metrics"),
    # Run
    Option("method", "3D reconstruction method: 'fusion' or the 'triangulation' (DLT) baseline.", "fusion",
           choice=METHODS),
    Option("drop_cameras", "Comma separated camera ids removed before processing.", [], otype="strs"),
    Option("jobs", "Number of worker processes used to process frames.", 1, otype="int"),
    Option("seed", "Random seed.", 0, otype="int"),
    Option("baseline", "Add the uniform weights / no refinement control rows to the ablations.", False, otype="bool"),
    # Synthetic scene
    Option("camera_count", "Number of cameras of the synthetic ring.", 4, otype="int", group="synth"),
    Option("rig_radius", "Ring radius (m).", 4.0, otype="float", group="synth"),
    Option("rig_height", "Camera height (m).", 1.5, otype="float", group="synth"),
    Option("look_at", "Point (x,y,z) every camera looks at.", [0.0, 0.0, 1.0], otype="floats", size=3, group="synth"),
    Option("focal_length", "Focal length (px).", 1000.0, otype="float", group="synth"),
    Option("fov", "Horizontal field of view (degrees); overrides focal_length when set.", otype="float", group="synth"),
    Option("image_width", "Image width (px).", 1000, otype="int", group="synth"),
    Option("image_height", "Image height (px).", 1000, otype="int", group="synth"),
    Option("motion", "Ground truth motion kind.", "sinusoidal", choice=MOTION_KINDS, group="synth"),
    Option("frames", "Sequence length.", 100, otype="int", group="synth"),
    Option("fps", "Frame rate of the simulated cameras.", 50.0, otype="float", group="synth"),
    Option("label", "Sequence label (action name) used by the summaries.", "synthetic", group="synth"),
    Option("symmetric", "Generate ground truth skeletons with equal left/right bone lengths.", True, otype="bool",
           group="synth"),
    Option("bone_jitter", "Relative random jitter of the subject bone lengths.", 0.03, otype="float", group="synth"),
    Option("root_speed", "Pelvis speed (m/frame).", 0.01, otype="float", group="synth"),
    Option("root_radius", "Radius (m) of the circular walk of the sinusoidal motion.", 0.5, otype="float",
           group="synth"),
    Option("motion_amplitude", "Scale of the joint angle ranges.", 1.0, otype="float", group="synth"),
    Option("sigma_2d", "2D detection noise (px).", 3.0, otype="float", group="synth"),
    Option("sigma_3d", "Per joint 3D prediction noise (mm).", 20.0, otype="float", group="synth"),
    Option("sigma_occ", "Extra noise (mm) of the hallucinated occluded joints.", 150.0, otype="float", group="synth"),
    Option("ray_scale", "Interval of the per view scale factor applied along the viewing rays.", [0.9, 1.1],
           otype="floats", size=2, group="synth"),
    Option("occluded_views", "Number of occluded views per frame.", 3, otype="int", group="synth"),
    Option("occluded_joint_fraction", "Fraction of joints corrupted in an occluded view ('joints' occluders).", 0.4,
           otype="float", group="synth"),
    Option("detection_drop_prob", "Probability that an occluded joint is not detected.", 0.5, otype="float",
           group="synth"),
    Option("occluder_mode", "'joints': random joint subset; 'boxes': random rectangles over the person box.",
           "joints", choice=OCCLUDER_MODES, group="synth"),
    Option("occluders_per_view", "Number of rectangles of the 'boxes' occluder mode.", 2, otype="int", group="synth"),
    Option("occluder_size", "Interval of the occluder sides, relative to the person box.", [0.3, 0.6],
           otype="floats", size=2, group="synth"),
    Option("desync_cameras", "Comma separated camera ids served from frame t+e, e drawn in -2, -1, +1, +2.",
           [], otype="strs", group="synth"),
)

OPTIONS_BY_NAME = {option.name: option for option in OPTIONS}


class RunConfig:
    """Flat configuration. Precedence: defaults < config file < command line."""

    def __init__(self, values=None):
        for option in OPTIONS:
            vdef = option.vdef
            setattr(self, option.name, list(vdef) if isinstance(vdef, list) else vdef)
        if values:
            self.update(values)

    def set(self, key, val):
        option = OPTIONS_BY_NAME.get(key)
        if option is None:
            raise ValidationError(f"Unexpected parameters {[key]} in configuration")
        setattr(self, key, option.convert(val))

    def update(self, values):
        unexpected = sorted(key for key in values if key not in OPTIONS_BY_NAME)
        if unexpected:
            raise ValidationError(f"Unexpected parameters {unexpected} in configuration")
        for key, val in values.items():
            self.set(key, val)
        return self

    @staticmethod
    def from_dict(data, source=None):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ValidationError(f"Configuration {source or ''} must be a mapping, got {type(data).__name__}")
        get_log().debug(f"RunConfig.from_dict: source={source} keys={sorted(data)}")
        return RunConfig(data)

    def todict(self):
        return {option.name: getattr(self, option.name) for option in OPTIONS}

    def check_paths(self, *names):
        """Verify that the referenced files exist."""
        for name in names or PATH_OPTIONS:
            val = getattr(self, name)
            if val is None:
                raise ValidationError(f"Missing mandatory parameter {name}")
            if not Path(val).is_file():
                raise ValidationError(f"Option {name}: file {val} does not exist")

    def fusion_config(self):
        return FusionConfig(self.weights_strategy, self.epsilon, self.min_views, self.fallback)

    def objective_config(self):
        return ObjectiveConfig(self.lambda_sym, self.max_iters, self.grad_tol, self.step_tol,
                               self.initial_damping, self.z_min)

    def metric_options(self):
        return MetricOptions(self.exclude_pelvis, self.include_clamped)

    def rig_spec(self):
        return RigSpec(self.camera_count, self.rig_radius, self.rig_height, tuple(self.look_at),
                       self.focal_length, self.fov, self.image_width, self.image_height)

    def motion_spec(self):
        return MotionSpec(self.motion, self.fps, self.motion_amplitude, self.root_speed, self.root_radius,
                          self.symmetric, self.bone_jitter, self.label)

    def corruption_spec(self):
        return CorruptionSpec(self.sigma_2d, self.sigma_3d, self.sigma_occ, tuple(self.ray_scale),
                              self.occluded_views, self.occluded_joint_fraction, self.detection_drop_prob,
                              self.occluder_mode, self.occluders_per_view, tuple(self.occluder_size), self.seed)


GROUP_TITLES = (
    ("paths", "Paths"),
    ("fusion", "Fusion"),
    ("objective", "Refinement"),
    ("metrics", "Metrics"),
    ("run", "Run"),
    ("synth", "Synthetic scene"),
)


def options_markdown():
    """Markdown tables of every option, grouped by section."""
    lines = ["# mvfuse options", "",
             "Options are read from a YAML mapping (`--config` or `MVFUSE_CONFIG`) and from the command line.",
             "Command line flags take precedence over the config file, which takes precedence over defaults.", ""]
    for group, title in GROUP_TITLES:
        lines += [f"## {title}", "", "| Option | Flag | Type | Default | Description |", "|---|---|---|---|---|"]
        for option in OPTIONS:
            if option.group != group:
                continue
            desc = option.desc
            if option.choice:
                desc += f" Choices: {', '.join(option.choice)}."
            lines.append(f"| {option.name} | `{option.flag}` | {option.otype} | {option.vdef!r} | {desc} |")
        lines.append("")
    return "\n".join(lines)
