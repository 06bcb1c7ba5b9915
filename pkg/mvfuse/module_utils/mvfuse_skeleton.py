# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

"""Joint convention, pose containers, bone lengths and left/right limb symmetry."""

DOCUMENTATION = r'''
---
module: mvfuse_skeleton

short_description: Skeleton topology and pose containers

version_added: "1.0.0"

description:
    - JointConvention class:  ordered joints, pelvis index, symmetric bone pairs and optional parents
    - Pose3D class:           world frame 3D joints (meters) with per joint confidence
    - Detection2D class:      pixel frame 2D joints with confidence and visibility
    - bone_length function:   distance between two joints
    - symmetry_residuals:     left minus right length for each symmetric bone pair
    - validate functions:     diagnostics listing invariant violations

author:
    - The mvfuse authors

requirements:
    - python >= 3.9
    - numpy >= 1.22
'''

# pylint: disable=invalid-name

from dataclasses import dataclass
from typing import Optional, Tuple
import numpy as np

from .mvfuse_util import ValidationError

H36M_JOINTS = (
    'pelvis', 'r_hip', 'r_knee', 'r_ankle', 'l_hip', 'l_knee', 'l_ankle',
    'spine', 'thorax', 'neck_nose', 'head',
    'l_shoulder', 'l_elbow', 'l_wrist', 'r_shoulder', 'r_elbow', 'r_wrist',
)
H36M_PARENTS = (-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 8, 11, 12, 8, 14, 15)
# upper arm, lower arm, upper leg, lower leg
H36M_SYMMETRIC_PAIRS = (
    ((11, 12), (14, 15)),
    ((12, 13), (15, 16)),
    ((4, 5), (1, 2)),
    ((5, 6), (2, 3)),
)


def _readonly(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class JointConvention:
    joint_names: Tuple[str, ...]
    pelvis_index: int
    symmetric_bone_pairs: Tuple[Tuple[Tuple[int, int], Tuple[int, int]], ...]
    parents: Optional[Tuple[int, ...]] = None
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, 'joint_names', tuple(str(n) for n in self.joint_names))
        try:
            pairs = tuple(((int(l[0]), int(l[1])), (int(r[0]), int(r[1]))) for l, r in self.symmetric_bone_pairs)
        except (TypeError, ValueError, IndexError) as exc:
            raise ValidationError(f"Malformed symmetric_bone_pairs: {self.symmetric_bone_pairs}") from exc
        object.__setattr__(self, 'symmetric_bone_pairs', pairs)
        object.__setattr__(self, 'pelvis_index', int(self.pelvis_index))
        if self.parents is not None:
            object.__setattr__(self, 'parents', tuple(int(p) for p in self.parents))
        self._check()

    def _check(self):
        J = len(self.joint_names)
        if J < 2:
            raise ValidationError(f"A joint convention needs at least 2 joints, got {J}")
        if len(set(self.joint_names)) != J:
            raise ValidationError(f"Duplicate joint names in {self.joint_names}")
        if not 0 <= self.pelvis_index < J:
            raise ValidationError(f"pelvis_index {self.pelvis_index} out of range [0, {J})")
        for k, (left, right) in enumerate(self.symmetric_bone_pairs):
            for idx in (*left, *right):
                if not 0 <= idx < J:
                    raise ValidationError(f"Bone pair {k}: joint index {idx} out of range [0, {J})")
            if left[0] == left[1] or right[0] == right[1]:
                raise ValidationError(f"Bone pair {k}: a bone must join two distinct joints")
            if set(left) & set(right):
                raise ValidationError(f"Bone pair {k}: left bone {left} and right bone {right} share a joint")
        if self.parents is not None:
            self._check_parents(J)

    def _check_parents(self, J):
        if len(self.parents) != J:
            raise ValidationError(f"parents has {len(self.parents)} entries, expected {J}")
        roots = [j for j, p in enumerate(self.parents) if p == -1]
        if roots != [self.pelvis_index]:
            raise ValidationError(f"The only root of the kinematic tree must be the pelvis, got roots {roots}")
        for j, p in enumerate(self.parents):
            if p != -1 and not 0 <= p < J:
                raise ValidationError(f"Joint {j}: parent index {p} out of range")
        for j in range(J):
            seen = set()
            while j != -1:
                if j in seen:
                    raise ValidationError(f"Cycle in kinematic tree through joint {j}")
                seen.add(j)
                j = self.parents[j]

    @property
    def joint_count(self):
        return len(self.joint_names)

    def index(self, name):
        try:
            return self.joint_names.index(name)
        except ValueError:
            raise ValidationError(f"Unknown joint name '{name}'") from None

    def kinematic_order(self):
        """Joint indices sorted so that every parent comes before its children."""
        if self.parents is None:
            raise ValidationError(f"Convention {self.name} has no kinematic parents")
        depth = []
        for j in range(self.joint_count):
            d, k = 0, j
            while self.parents[k] != -1:
                k = self.parents[k]
                d += 1
            depth.append(d)
        return sorted(range(self.joint_count), key=lambda j: (depth[j], j))

    def to_dict(self):
        res = {
            'name': self.name,
            'joint_names': list(self.joint_names),
            'pelvis_index': self.pelvis_index,
            'symmetric_bone_pairs': [[list(l), list(r)] for l, r in self.symmetric_bone_pairs],
        }
        if self.parents is not None:
            res['parents'] = list(self.parents)
        return res

    @staticmethod
    def from_dict(data):
        missing = [key for key in ('joint_names', 'pelvis_index', 'symmetric_bone_pairs') if key not in data]
        if missing:
            raise ValidationError(f"Missing mandatory convention fields {missing}")
        unexpected = set(data) - {'name', 'joint_names', 'pelvis_index', 'symmetric_bone_pairs', 'parents'}
        if unexpected:
            raise ValidationError(f"Unexpected parameters {sorted(unexpected)} in joint convention")
        return JointConvention(joint_names=data['joint_names'], pelvis_index=data['pelvis_index'],
                               symmetric_bone_pairs=data['symmetric_bone_pairs'],
                               parents=data.get('parents'), name=data.get('name', 'custom'))


def default_convention():
    """The 17 joints Human3.6M skeleton, pelvis rooted."""
    return JointConvention(H36M_JOINTS, 0, H36M_SYMMETRIC_PAIRS, H36M_PARENTS, name='h36m17')


@dataclass(frozen=True, eq=False)
class Pose3D:
    joints: np.ndarray
    confidence: Optional[np.ndarray] = None
    source_camera: Optional[str] = None

    def __post_init__(self):
        joints = np.array(self.joints, dtype=float)
        if joints.ndim != 2 or joints.shape[1] != 3:
            raise ValidationError(f"Pose3D joints must have shape (J, 3), got {joints.shape}")
        conf = np.ones(len(joints)) if self.confidence is None else np.array(self.confidence, dtype=float)
        if conf.shape != (len(joints),):
            raise ValidationError(f"Pose3D confidence must have shape ({len(joints)},), got {conf.shape}")
        object.__setattr__(self, 'joints', _readonly(joints))
        object.__setattr__(self, 'confidence', _readonly(conf))

    @property
    def joint_count(self):
        return len(self.joints)

    def with_joints(self, joints, confidence=None):
        return Pose3D(joints, self.confidence if confidence is None else confidence, self.source_camera)


@dataclass(frozen=True, eq=False)
class Detection2D:
    """2D keypoints. Coordinates of invisible joints are NaN."""
    joints: np.ndarray
    confidence: np.ndarray
    visible: np.ndarray
    bbox: Optional[Tuple[float, float, float, float]] = None

    def __post_init__(self):
        joints = np.array(self.joints, dtype=float)
        if joints.ndim != 2 or joints.shape[1] != 2:
            raise ValidationError(f"Detection2D joints must have shape (J, 2), got {joints.shape}")
        J = len(joints)
        conf = np.array(self.confidence, dtype=float)
        visible = np.array(self.visible, dtype=bool)
        if conf.shape != (J,) or visible.shape != (J,):
            raise ValidationError(f"Detection2D confidence and visible must have shape ({J},)")
        bad = np.flatnonzero(visible & ~np.all(np.isfinite(joints), axis=1))
        if bad.size:
            raise ValidationError(f"Detection2D visible joints {bad.tolist()} have non-finite coordinates")
        joints[~visible] = np.nan
        if self.bbox is not None:
            bbox = tuple(float(v) for v in self.bbox)
            if len(bbox) != 4:
                raise ValidationError(f"Detection2D bbox must be (x, y, w, h), got {self.bbox}")
            object.__setattr__(self, 'bbox', bbox)
        object.__setattr__(self, 'joints', _readonly(joints))
        object.__setattr__(self, 'confidence', _readonly(conf))
        object.__setattr__(self, 'visible', _readonly(visible))

    @property
    def joint_count(self):
        return len(self.joints)


def _check_index(pose, idx):
    if not 0 <= idx < pose.joint_count:
        raise ValidationError(f"Joint index {idx} out of range [0, {pose.joint_count})")


def bone_length(pose, a, b):
    _check_index(pose, a)
    _check_index(pose, b)
    if a == b:
        raise ValidationError(f"A bone needs two distinct joints, got {a} twice")
    return float(np.linalg.norm(pose.joints[a] - pose.joints[b]))


def symmetry_residuals(pose, conv):
    """Entry k is left length minus right length of bone pair k (meters)."""
    if pose.joint_count != conv.joint_count:
        raise ValidationError(f"Pose has {pose.joint_count} joints, convention {conv.name} expects {conv.joint_count}")
    return np.array([bone_length(pose, *left) - bone_length(pose, *right)
                     for left, right in conv.symmetric_bone_pairs])


def validate(pose):
    """Return the list of violations (empty when the pose is valid)."""
    violations = []
    for j in np.flatnonzero(~np.all(np.isfinite(pose.joints), axis=1)):
        violations.append(f"joint {j}: non-finite coordinates {pose.joints[j].tolist()}")
    for j in np.flatnonzero(~((pose.confidence >= 0) & (pose.confidence <= 1))):
        violations.append(f"joint {j}: confidence {pose.confidence[j]} outside [0, 1]")
    return violations


def validate_detection(det):
    violations = []
    for j in np.flatnonzero(~((det.confidence >= 0) & (det.confidence <= 1))):
        violations.append(f"joint {j}: confidence {det.confidence[j]} outside [0, 1]")
    if det.bbox is not None and (det.bbox[2] < 0 or det.bbox[3] < 0):
        violations.append(f"bbox {det.bbox} has a negative size")
    return violations


def mirror_pose(pose, conv):
    """Give every right bone of the symmetric pairs the length of its left counterpart.

    Right bone directions are kept. Pairs are processed parents first so chained
    limbs (upper then lower arm) end up with the requested lengths.
    """
    joints = np.array(pose.joints)
    pending = list(conv.symmetric_bone_pairs)
    while pending:
        moved_children = {right[1] for _, right in pending}
        ready = [pair for pair in pending if pair[1][0] not in moved_children] or pending[:1]
        for left, right in ready:
            pending.remove((left, right))
            length = np.linalg.norm(joints[left[1]] - joints[left[0]])
            old = pose.joints[right[1]] - pose.joints[right[0]]
            norm = np.linalg.norm(old)
            if norm > 0:
                direction = old / norm
            else:
                direction = (joints[left[1]] - joints[left[0]]) / max(length, 1e-300)
            joints[right[1]] = joints[right[0]] + direction * length
    return pose.with_joints(joints)
