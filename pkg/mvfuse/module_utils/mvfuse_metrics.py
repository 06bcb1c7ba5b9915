# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

"""Absolute and pelvis aligned MPJPE with per frame and per label aggregation."""

DOCUMENTATION = r'''
---
module: mvfuse_metrics

short_description: Pose error metrics

version_added: "1.0.0"

description:
    - FrameMetrics class:      absolute / relative MPJPE of one frame and the per joint errors (mm)
    - SequenceSummary class:   mean and median over the frames sharing a label
    - MetricOptions class:     pelvis exclusion and clamped frame handling
    - mpjpe_absolute:          mean euclidean joint error in mm
    - mpjpe_relative:          same after translating the prediction pelvis onto the ground truth pelvis
    - aggregate:               per label summaries sorted by label

author:
    - The mvfuse authors

requirements:
    - python >= 3.9
    - numpy >= 1.22
'''

# pylint: disable=invalid-name

from dataclasses import dataclass
from typing import Tuple
import numpy as np

from .mvfuse_util import ValidationError

AVG_LABEL = 'Avg'


@dataclass(frozen=True)
class MetricOptions:
    exclude_pelvis: bool = False
    include_clamped: bool = False


@dataclass(frozen=True, eq=False)
class FrameMetrics:
    frame_id: int
    mpjpe_abs: float
    mpjpe_rel: float
    per_joint_abs: Tuple[float, ...]
    label: str = 'default'


@dataclass(frozen=True)
class SequenceSummary:
    label: str
    frame_count: int
    mean_mpjpe_abs: float
    median_mpjpe_abs: float
    mean_mpjpe_rel: float
    median_mpjpe_rel: float


def _joints(pose):
    return np.asarray(getattr(pose, 'joints', pose), dtype=float)


def _check_pair(pred, gt):
    p, g = _joints(pred), _joints(gt)
    if p.shape != g.shape:
        raise ValidationError(f"Joint count mismatch: prediction {p.shape[0]} joints, ground truth {g.shape[0]}")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(g))):
        bad = np.flatnonzero(~(np.all(np.isfinite(p), axis=1) & np.all(np.isfinite(g), axis=1)))
        raise ValidationError(f"Non-finite joints {bad.tolist()} at metric time")
    return p, g


def per_joint_errors_mm(pred, gt):
    p, g = _check_pair(pred, gt)
    return np.sqrt(np.sum((p - g) ** 2, axis=1)) * 1000.0


def mpjpe_absolute(pred, gt):
    return float(np.mean(per_joint_errors_mm(pred, gt)))


def mpjpe_relative(pred, gt, conv, exclude_pelvis=False):
    p, g = _check_pair(pred, gt)
    pelvis = conv.pelvis_index
    diff = (p - p[pelvis]) - (g - g[pelvis])
    err = np.sqrt(np.sum(diff ** 2, axis=1)) * 1000.0
    if exclude_pelvis:
        err = np.delete(err, pelvis)
    return float(np.mean(err))


def frame_metrics(frame_id, pred, gt, conv, label='default', options=MetricOptions()):
    per_joint = per_joint_errors_mm(pred, gt)
    return FrameMetrics(
        frame_id=int(frame_id),
        mpjpe_abs=float(np.mean(per_joint)),
        mpjpe_rel=mpjpe_relative(pred, gt, conv, options.exclude_pelvis),
        per_joint_abs=tuple(float(v) for v in per_joint),
        label=str(label),
    )


def _summary(label, frames):
    absv = np.array([f.mpjpe_abs for f in frames])
    relv = np.array([f.mpjpe_rel for f in frames])
    return SequenceSummary(label, len(frames), float(np.mean(absv)), float(np.median(absv)),
                           float(np.mean(relv)), float(np.median(relv)))


def aggregate(frames, labels=None):
    """Group frames by label (their own, or the matching entry of `labels`), sorted by label."""
    frames = list(frames)
    if not frames:
        raise ValidationError("Cannot aggregate an empty list of frame metrics")
    if labels is None:
        labels = [f.label for f in frames]
    elif len(labels) != len(frames):
        raise ValidationError(f"Got {len(labels)} labels for {len(frames)} frames")
    groups = {}
    for label, frame in zip(labels, frames):
        groups.setdefault(str(label), []).append(frame)
    return [_summary(label, groups[label]) for label in sorted(groups)]


def overall_summary(frames):
    """Summary of all frames pooled together, labelled Avg."""
    frames = list(frames)
    if not frames:
        raise ValidationError("Cannot summarize an empty list of frame metrics")
    return _summary(AVG_LABEL, frames)
