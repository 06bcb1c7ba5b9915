# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

"""Per joint reprojection weighted fusion of per camera 3D pose predictions."""

DOCUMENTATION = r'''
---
module: mvfuse_fusion

short_description: Fuse per view 3D skeletons into a single pose

version_added: "1.0.0"

description:
    - ViewPrediction class:  the 3D pose and 2D detection produced from one camera
    - WeightMatrix class:    J x C weights and mean squared reprojection errors
    - FusionConfig class:    weighting strategy, error floor, minimum usable views, fallback
    - per_joint_errors:      mean squared reprojection error of every view prediction over every camera
    - per_joint_weights:     weights derived from the errors (or from confidence / distance)
    - fuse:                  per joint weighted average
    - fuse_frame:            errors, weights and fusion in one call, with the uniform fallback

author:
    - The mvfuse authors

requirements:
    - python >= 3.9
    - numpy >= 1.22
'''

### I found fstring more readable than lazy % formatting even if it is a bit slower:
# pylint: disable=logging-fstring-interpolation
# pylint: disable=invalid-name

from dataclasses import dataclass
from typing import Optional, Tuple
import numpy as np

from .mvfuse_util import JointUnresolvable, ValidationError, get_log
from .mvfuse_geometry import Z_MIN, index_rig, project_points
from .mvfuse_skeleton import Detection2D, Pose3D

STRATEGIES = ('per_joint_reprojection', 'confidence', 'inverse_distance', 'uniform')
FALLBACKS = ('uniform', 'none')


@dataclass(frozen=True, eq=False)
class ViewPrediction:
    camera_id: str
    pose3d: Pose3D
    detection2d: Detection2D

    def __post_init__(self):
        if self.pose3d.joint_count != self.detection2d.joint_count:
            raise ValidationError(f"View {self.camera_id}: pose has {self.pose3d.joint_count} joints"
                                  f" but detection has {self.detection2d.joint_count}")

    @property
    def joint_count(self):
        return self.pose3d.joint_count


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Column i refers to camera_ids[i]."""
    weights: np.ndarray
    errors: np.ndarray
    camera_ids: Tuple[str, ...] = ()

    def column(self, camera_id):
        return self.camera_ids.index(camera_id)


@dataclass(frozen=True)
class FusionConfig:
    strategy: str = 'per_joint_reprojection'
    epsilon: float = 1e-6
    min_views: int = 1
    fallback: str = 'uniform'

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"Unknown fusion strategy '{self.strategy}', expected one of {STRATEGIES}")
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.min_views) != self.min_views or self.min_views < 1:
            raise ValidationError(f"min_views must be an integer >= 1, got {self.min_views}")
        if self.fallback not in FALLBACKS:
            raise ValidationError(f"Unknown fusion fallback '{self.fallback}', expected one of {FALLBACKS}")


def _check_preds(preds, cameras=None):
    if not preds:
        raise ValidationError("Fusion needs at least one view prediction")
    J = preds[0].joint_count
    ids = [pred.camera_id for pred in preds]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"Duplicate camera ids in view predictions: {ids}")
    for pred in preds:
        if pred.joint_count != J:
            raise ValidationError(f"View {pred.camera_id} has {pred.joint_count} joints, expected {J}")
    if cameras is None:
        return None
    rig = cameras if isinstance(cameras, dict) else index_rig(cameras)
    unknown = [cid for cid in ids if cid not in rig]
    if unknown:
        raise ValidationError(f"Unknown camera ids {unknown}: not in rig {sorted(rig)}")
    return rig


def _sorted_columns(preds):
    return sorted(range(len(preds)), key=lambda i: preds[i].camera_id)


def per_joint_errors(preds, cameras, z_min=Z_MIN):
    """J x C matrix: e[j][i] is the mean over the cameras k seeing joint j of the
    squared distance between the projection of view i's joint j and detection k.
    +inf when no camera contributes."""
    rig = _check_preds(preds, cameras)
    C = len(preds)
    J = preds[0].joint_count
    stacked = np.stack([pred.pose3d.joints for pred in preds])      # (C, J, 3)
    total = np.zeros((C, J))
    count = np.zeros((C, J), dtype=int)
    for k in _sorted_columns(preds):
        det = preds[k].detection2d
        uv, valid = project_points(rig[preds[k].camera_id], stacked.reshape(-1, 3), z_min)
        uv = uv.reshape(C, J, 2)
        ok = valid.reshape(C, J) & det.visible[None, :]
        diff = np.where(ok[..., None], uv - np.where(det.visible[:, None], det.joints, 0.0)[None], 0.0)
        total += np.sum(diff * diff, axis=-1)
        count += ok
    with np.errstate(invalid='ignore', divide='ignore'):
        errors = np.where(count > 0, total / np.maximum(count, 1), np.inf)
    get_log().debug(f"per_joint_errors: {C} views, {int(np.sum(count == 0))} unusable (view, joint) cells")
    return errors.T


def view_weights(preds, cameras, strategy):
    """Per view weights (length C) of the confidence and inverse_distance strategies."""
    if strategy == 'confidence':
        res = []
        for pred in preds:
            det = pred.detection2d
            res.append(float(np.mean(det.confidence[det.visible])) if np.any(det.visible) else 0.0)
        return np.array(res)
    if strategy == 'inverse_distance':
        if cameras is None:
            raise ValidationError("inverse_distance weighting needs the camera rig")
        rig = _check_preds(preds, cameras)
        res = []
        for pred in preds:
            finite = np.all(np.isfinite(pred.pose3d.joints), axis=1)
            if not np.any(finite):
                res.append(0.0)
                continue
            centroid = np.mean(pred.pose3d.joints[finite], axis=0)
            dist = np.linalg.norm(rig[pred.camera_id].center - centroid)
            res.append(1.0 / max(dist, 1e-12))
        return np.array(res)
    raise ValidationError(f"Strategy '{strategy}' has no per view weights")


def per_joint_weights(errors, config=FusionConfig(), preds=None, cameras=None):
    errors = np.asarray(errors, dtype=float)
    if np.any(errors < 0) or np.any(np.isnan(errors)):
        raise ValidationError("Reprojection errors must be non-negative or +inf")
    camera_ids = tuple(pred.camera_id for pred in preds) if preds else ()
    if preds:
        usable_pred = np.stack([np.all(np.isfinite(p.pose3d.joints), axis=1) for p in preds], axis=1)
    else:
        usable_pred = np.ones(errors.shape, dtype=bool)
    if config.strategy == 'per_joint_reprojection':
        usable = np.isfinite(errors) & usable_pred
        weights = np.where(usable, 1.0 / np.maximum(np.where(usable, errors, 1.0), config.epsilon), 0.0)
    elif config.strategy == 'uniform':
        weights = np.where(usable_pred, 1.0, 0.0)
    else:
        if not preds:
            raise ValidationError(f"Strategy '{config.strategy}' needs the view predictions")
        weights = np.where(usable_pred, view_weights(preds, cameras, config.strategy)[None, :], 0.0)
    return WeightMatrix(weights, errors, camera_ids)


def _fuse_arrays(preds, weights):
    """Weighted mean around the first usable view (sorted camera id order).

    Returns (joints, mass, usable count); joints of massless rows are NaN.
    """
    W = np.asarray(weights.weights, dtype=float)
    J = preds[0].joint_count
    if W.shape != (J, len(preds)):
        raise ValidationError(f"Weight matrix shape {W.shape} does not match {J} joints x {len(preds)} views")
    if np.any(W < 0) or not np.all(np.isfinite(W)):
        raise ValidationError("Fusion weights must be finite and non-negative")
    order = _sorted_columns(preds)
    ref = np.full((J, 3), np.nan)
    for i in reversed(order):
        use = W[:, i] > 0
        ref[use] = preds[i].pose3d.joints[use]
    acc = np.zeros((J, 3))
    mass = np.zeros(J)
    usable = np.zeros(J, dtype=int)
    for i in order:
        w = W[:, i]
        use = w > 0
        acc[use] += w[use, None] * (preds[i].pose3d.joints[use] - ref[use])
        mass += w
        usable += use
    with np.errstate(invalid='ignore', divide='ignore'):
        joints = ref + acc / mass[:, None]
    return joints, mass, usable


def _confidence(mass):
    top = np.max(mass) if mass.size else 0.0
    return mass / top if top > 0 else np.zeros_like(mass)


def fuse(preds, weights, config=FusionConfig()):
    _check_preds(preds)
    joints, mass, usable = _fuse_arrays(preds, weights)
    unresolved = np.flatnonzero(usable < config.min_views)
    if unresolved.size:
        raise JointUnresolvable(unresolved)
    return Pose3D(joints, _confidence(mass))


def detections_by_camera(preds):
    return {pred.camera_id: pred.detection2d for pred in preds}


def fuse_frame(preds, cameras, config=FusionConfig(), z_min=Z_MIN):
    """Errors, weights and fusion. Unresolved joints get the unweighted mean of the
    finite predictions (confidence 0) unless fallback is 'none'."""
    errors = per_joint_errors(preds, cameras, z_min)
    weights = per_joint_weights(errors, config, preds, cameras)
    joints, mass, usable = _fuse_arrays(preds, weights)
    unresolved = np.flatnonzero(usable < config.min_views)
    conf = _confidence(np.where(usable >= config.min_views, mass, 0.0))
    if unresolved.size:
        if config.fallback == 'none':
            raise JointUnresolvable(unresolved)
        stacked = np.stack([preds[i].pose3d.joints[unresolved] for i in _sorted_columns(preds)])
        finite = np.all(np.isfinite(stacked), axis=-1)
        lost = unresolved[~np.any(finite, axis=0)]
        if lost.size:
            raise JointUnresolvable(lost, f"Joints {lost.tolist()} have no finite prediction in any view")
        sums = np.sum(np.where(finite[..., None], stacked, 0.0), axis=0)
        joints[unresolved] = sums / np.sum(finite, axis=0)[:, None]
        conf[unresolved] = 0.0
        get_log().info(f"fuse_frame: uniform fallback used for joints {unresolved.tolist()}")
    return Pose3D(joints, conf), weights
