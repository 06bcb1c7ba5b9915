# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

"""Deterministic multi camera scene simulator.

Produces a camera ring, articulated ground truth sequences and per view
predictions carrying the monocular failure modes fusion has to cope with:
depth/scale ambiguity along the viewing ray, per joint noise, hallucinated
occluded joints, dropped detections and camera de-synchronization.
All randomness flows through one numpy Generator, so a seed fully
determines the output.
"""

DOCUMENTATION = r'''
---
module: mvfuse_synth

short_description: Synthetic multi view benchmark generator

version_added: "1.0.0"

description:
    - RigSpec class:          camera ring description
    - MotionSpec class:       ground truth trajectory description
    - CorruptionSpec class:   per view prediction / detection corruption model
    - Frame class:            one time instant of a sequence
    - make_rig:               evenly spaced cameras on a horizontal circle
    - sample_pose:            forward kinematic pose with bounded random joint angles
    - corrupt_view:           per view prediction and detection from the ground truth
    - occlude_views:          random subset of occluded views
    - desync_offset:          frame offset drawn from {-2, -1, +1, +2}
    - apply_desync:           serve desynchronized cameras from shifted frames
    - generate_sequence:      full sequence + manifest

author:
    - The mvfuse authors

requirements:
    - python >= 3.9
    - numpy >= 1.22
'''

### I found fstring more readable than lazy % formatting even if it is a bit slower:
# pylint: disable=logging-fstring-interpolation
### Spec classes gave a lot of parameters
# pylint: disable=too-many-instance-attributes
# pylint: disable=too-many-arguments
# pylint: disable=too-many-locals
# pylint: disable=invalid-name

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, Optional, Tuple
import numpy as np

from .mvfuse_util import FORMAT_VERSION, GENERATOR, ValidationError, get_log
from .mvfuse_geometry import Camera, CameraIntrinsics, in_image, index_rig, look_at, project_points, transform_to_camera
from .mvfuse_skeleton import Detection2D, Pose3D, default_convention
from .mvfuse_fusion import ViewPrediction

DESYNC_OFFSETS = np.array([-2, -1, 1, 2])
MIN_DESYNC_LENGTH = 5
PELVIS_HEIGHT = 0.95    # meters
MOTION_KINDS = ('sinusoidal', 'static', 'linear')
OCCLUDER_MODES = ('joints', 'boxes')

# T-pose: the person faces -y, +x is the person's left, z is up.
REST_DIRECTIONS = {
    'r_hip': (-1, 0, 0), 'r_knee': (0, 0, -1), 'r_ankle': (0, 0, -1),
    'l_hip': (1, 0, 0), 'l_knee': (0, 0, -1), 'l_ankle': (0, 0, -1),
    'spine': (0, 0, 1), 'thorax': (0, 0, 1), 'neck_nose': (0, -0.5, 1), 'head': (0, 0.3, 1),
    'l_shoulder': (1, 0, 0), 'l_elbow': (1, 0, 0), 'l_wrist': (1, 0, 0),
    'r_shoulder': (-1, 0, 0), 'r_elbow': (-1, 0, 0), 'r_wrist': (-1, 0, 0),
}
DEFAULT_BONE_LENGTHS = {
    'r_hip': 0.13, 'r_knee': 0.45, 'r_ankle': 0.44,
    'l_hip': 0.13, 'l_knee': 0.45, 'l_ankle': 0.44,
    'spine': 0.23, 'thorax': 0.25, 'neck_nose': 0.11, 'head': 0.12,
    'l_shoulder': 0.15, 'l_elbow': 0.28, 'l_wrist': 0.25,
    'r_shoulder': 0.15, 'r_elbow': 0.28, 'r_wrist': 0.25,
}
GENERIC_BONE_LENGTH = 0.2
# Half range of the x, y, z euler angles (radians) of the bone ending at each joint.
ANGLE_RANGES = {
    'pelvis': (0.1, 0.1, 0.3),
    'r_hip': (0.1, 0.1, 0.1), 'r_knee': (0.5, 0.15, 0.1), 'r_ankle': (0.6, 0.05, 0.05),
    'l_hip': (0.1, 0.1, 0.1), 'l_knee': (0.5, 0.15, 0.1), 'l_ankle': (0.6, 0.05, 0.05),
    'spine': (0.15, 0.1, 0.1), 'thorax': (0.1, 0.1, 0.1), 'neck_nose': (0.2, 0.1, 0.2), 'head': (0.2, 0.1, 0.2),
    'l_shoulder': (0.1, 0.1, 0.1), 'l_elbow': (0.6, 0.5, 0.6), 'l_wrist': (0.5, 0.5, 0.7),
    'r_shoulder': (0.1, 0.1, 0.1), 'r_elbow': (0.6, 0.5, 0.6), 'r_wrist': (0.5, 0.5, 0.7),
}
GENERIC_ANGLE_RANGE = (0.2, 0.2, 0.2)


@dataclass(frozen=True)
class RigSpec:
    camera_count: int = 4
    radius: float = 4.0
    height: float = 1.5
    look_at: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    focal_length: float = 1000.0
    fov: Optional[float] = None     # horizontal, degrees; overrides focal_length
    image_width: int = 1000
    image_height: int = 1000

    def __post_init__(self):
        object.__setattr__(self, 'look_at', tuple(float(v) for v in self.look_at))
        if len(self.look_at) != 3:
            raise ValidationError(f"look_at must be a 3D point, got {self.look_at}")
        if int(self.camera_count) != self.camera_count or self.camera_count < 1:
            raise ValidationError(f"camera_count must be an integer >= 1, got {self.camera_count}")
        if not self.radius > 0:
            raise ValidationError(f"radius must be positive, got {self.radius}")
        if self.fov is not None and not 0 < self.fov < 180:
            raise ValidationError(f"fov must be in (0, 180) degrees, got {self.fov}")
        if not self.focal_length > 0 or self.image_width <= 0 or self.image_height <= 0:
            raise ValidationError("focal_length and image size must be positive")

    @property
    def focal_pixels(self):
        if self.fov is None:
            return float(self.focal_length)
        return self.image_width / 2.0 / math.tan(math.radians(self.fov) / 2.0)


@dataclass(frozen=True)
class MotionSpec:
    kind: str = 'sinusoidal'
    fps: float = 50.0
    amplitude: float = 1.0
    root_speed: float = 0.01      # meters per frame
    root_radius: float = 0.5      # circular walk of the sinusoidal motion
    symmetric: bool = True
    bone_jitter: float = 0.03
    label: str = 'synthetic'

    def __post_init__(self):
        if self.kind not in MOTION_KINDS:
            raise ValidationError(f"Unknown motion kind '{self.kind}', expected one of {MOTION_KINDS}")
        if not self.fps > 0:
            raise ValidationError(f"fps must be positive, got {self.fps}")
        if self.amplitude < 0 or self.root_speed < 0 or not self.root_radius > 0:
            raise ValidationError("amplitude and root_speed must be >= 0, root_radius > 0")
        if not 0 <= self.bone_jitter < 1:
            raise ValidationError(f"bone_jitter must be in [0, 1), got {self.bone_jitter}")


@dataclass(frozen=True)
class CorruptionSpec:
    sigma_2d: float = 3.0           # px
    sigma_3d: float = 20.0          # mm
    sigma_occ: float = 150.0        # mm
    ray_scale_range: Tuple[float, float] = (0.9, 1.1)
    occluded_view_count: int = 3
    occluded_joint_fraction: float = 0.4
    detection_drop_prob: float = 0.5
    occluder_mode: str = 'joints'
    occluders_per_view: int = 2
    occluder_size_range: Tuple[float, float] = (0.3, 0.6)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'ray_scale_range', tuple(float(v) for v in self.ray_scale_range))
        object.__setattr__(self, 'occluder_size_range', tuple(float(v) for v in self.occluder_size_range))
        for name in ('sigma_2d', 'sigma_3d', 'sigma_occ'):
            if not getattr(self, name) >= 0:
                raise ValidationError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ('occluded_joint_fraction', 'detection_drop_prob'):
            if not 0 <= getattr(self, name) <= 1:
                raise ValidationError(f"{name} must be in [0, 1], got {getattr(self, name)}")
        lo, hi = self.ray_scale_range
        if not 0 < lo <= hi:
            raise ValidationError(f"ray_scale_range must satisfy 0 < low <= high, got {self.ray_scale_range}")
        lo, hi = self.occluder_size_range
        if not 0 < lo <= hi <= 1:
            raise ValidationError(f"occluder_size_range must satisfy 0 < low <= high <= 1, got {self.occluder_size_range}")
        if self.occluded_view_count < 0 or self.occluders_per_view < 0:
            raise ValidationError("occluded_view_count and occluders_per_view must be >= 0")
        if self.occluder_mode not in OCCLUDER_MODES:
            raise ValidationError(f"Unknown occluder mode '{self.occluder_mode}', expected one of {OCCLUDER_MODES}")

    @staticmethod
    def noise_free(seed=0):
        return CorruptionSpec(0.0, 0.0, 0.0, (1.0, 1.0), 0, 0.0, 0.0, seed=seed)


@dataclass(frozen=True, eq=False)
class Frame:
    frame_id: int
    gt: Pose3D
    views: Tuple[ViewPrediction, ...]
    occluded_views: Tuple[str, ...] = ()
    occluded_joints: Dict[str, np.ndarray] = field(default_factory=dict)
    label: str = 'synthetic'
    desync: Dict[str, int] = field(default_factory=dict)
    clamped: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'views', tuple(self.views))
        object.__setattr__(self, 'occluded_views', tuple(sorted(self.occluded_views)))
        ids = [view.camera_id for view in self.views]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"Frame {self.frame_id}: duplicate camera ids {ids}")
        masks = {}
        for view in self.views:
            mask = np.array(self.occluded_joints.get(view.camera_id, np.zeros(view.joint_count)), dtype=bool)
            if mask.shape != (view.joint_count,):
                raise ValidationError(f"Frame {self.frame_id}: occluded joint mask of {view.camera_id} has shape {mask.shape}")
            hidden = np.flatnonzero(~view.detection2d.visible & ~mask)
            if hidden.size:
                raise ValidationError(f"Frame {self.frame_id}, camera {view.camera_id}: invisible joints"
                                      f" {hidden.tolist()} missing from the occluded joint mask")
            mask.setflags(write=False)
            masks[view.camera_id] = mask
        object.__setattr__(self, 'occluded_joints', masks)

    @property
    def camera_ids(self):
        return tuple(view.camera_id for view in self.views)

    def view(self, camera_id):
        for view in self.views:
            if view.camera_id == camera_id:
                return view
        raise ValidationError(f"Frame {self.frame_id} has no view for camera {camera_id}")


def make_rig(spec=RigSpec()):
    focal = spec.focal_pixels
    intr = CameraIntrinsics(focal, focal, spec.image_width / 2.0, spec.image_height / 2.0,
                            spec.image_width, spec.image_height)
    target = np.array(spec.look_at)
    cameras = []
    for k in range(spec.camera_count):
        angle = 2.0 * math.pi * k / spec.camera_count
        center = (target[0] + spec.radius * math.cos(angle), target[1] + spec.radius * math.sin(angle), spec.height)
        cameras.append(Camera(f"cam{k}", intr, look_at(center, target)))
    get_log().debug(f"make_rig: {cameras}")
    return cameras


def _rotation(angles):
    """Rz @ Ry @ Rx."""
    ax, ay, az = angles
    cx, sx, cy, sy, cz, sz = math.cos(ax), math.sin(ax), math.cos(ay), math.sin(ay), math.cos(az), math.sin(az)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rz @ ry @ rx


def _require_parents(conv):
    if conv.parents is None:
        raise ValidationError(f"Convention {conv.name} has no kinematic parents: cannot synthesize poses")


def rest_directions(conv):
    _require_parents(conv)
    dirs = np.array([REST_DIRECTIONS.get(name, (0.0, 0.0, 1.0)) for name in conv.joint_names], dtype=float)
    return dirs / np.linalg.norm(dirs, axis=1)[:, None]


def angle_ranges(conv):
    return np.array([ANGLE_RANGES.get(name, GENERIC_ANGLE_RANGE) for name in conv.joint_names], dtype=float)


def default_bone_lengths(conv):
    """Length of the bone ending at each joint (0 for the root)."""
    _require_parents(conv)
    lengths = np.array([DEFAULT_BONE_LENGTHS.get(name, GENERIC_BONE_LENGTH) for name in conv.joint_names])
    lengths[conv.pelvis_index] = 0.0
    return lengths


def symmetrize_bone_lengths(conv, lengths):
    """Copy left lengths onto right bones: l_/r_ named joints and the symmetric bone pairs."""
    _require_parents(conv)
    lengths = np.array(lengths, dtype=float)
    names = conv.joint_names
    for j, name in enumerate(names):
        if name.startswith('l_') and f"r_{name[2:]}" in names:
            lengths[names.index(f"r_{name[2:]}")] = lengths[j]
    for (ul, vl), (ur, vr) in conv.symmetric_bone_pairs:
        if conv.parents[vl] == ul and conv.parents[vr] == ur:
            lengths[vr] = lengths[vl]
    return lengths


def sample_bone_lengths(rng, conv, jitter=0.03, symmetric=True):
    lengths = default_bone_lengths(conv) * (1.0 + jitter * rng.uniform(-1.0, 1.0, conv.joint_count))
    if symmetric:
        lengths = symmetrize_bone_lengths(conv, lengths)
    return lengths


def forward_kinematics(conv, bone_lengths, angles, root=(0.0, 0.0, PELVIS_HEIGHT), yaw=0.0):
    """Joint positions from per joint euler angles; every bone keeps its length."""
    _require_parents(conv)
    bone_lengths = np.asarray(bone_lengths, dtype=float)
    if bone_lengths.shape != (conv.joint_count,):
        raise ValidationError(f"Expected {conv.joint_count} bone lengths, got {bone_lengths.shape}")
    if np.any(np.delete(bone_lengths, conv.pelvis_index) <= 0):
        raise ValidationError("Bone lengths must be positive")
    dirs = rest_directions(conv)
    order = conv.kinematic_order()
    orient = [None] * conv.joint_count
    joints = np.zeros((conv.joint_count, 3))
    root_idx = order[0]
    orient[root_idx] = _rotation((0.0, 0.0, yaw)) @ _rotation(angles[root_idx])
    joints[root_idx] = root
    for j in order[1:]:
        parent = conv.parents[j]
        orient[j] = orient[parent] @ _rotation(angles[j])
        joints[j] = joints[parent] + orient[j] @ (dirs[j] * bone_lengths[j])
    return joints


def sample_pose(rng, conv, bone_lengths, angle_scale=1.0, root=(0.0, 0.0, PELVIS_HEIGHT), yaw=0.0, symmetric=False):
    """Forward kinematic sample, joint angles uniform in +/- angle_scale * ANGLE_RANGES."""
    if symmetric:
        bone_lengths = symmetrize_bone_lengths(conv, bone_lengths)
    angles = rng.uniform(-1.0, 1.0, (conv.joint_count, 3)) * angle_ranges(conv) * angle_scale
    return Pose3D(forward_kinematics(conv, bone_lengths, angles, root, yaw))


class _Trajectory:
    """Ground truth generator of one sequence; all random draws happen at construction."""

    def __init__(self, rng, conv, motion, length):
        self.conv = conv
        self.motion = motion
        self.length = length
        self.ranges = angle_ranges(conv) * motion.amplitude
        self.freq = rng.uniform(0.3, 1.0, (conv.joint_count, 3))
        self.phase = rng.uniform(0.0, 2.0 * math.pi, (conv.joint_count, 3))
        self.root_phase = rng.uniform(0.0, 2.0 * math.pi)

    def angles(self, t):
        if self.motion.kind == 'sinusoidal':
            return self.ranges * np.sin(2.0 * math.pi * self.freq * t / self.motion.fps + self.phase)
        return self.ranges * np.sin(self.phase)

    def root(self, t):
        motion = self.motion
        if motion.kind == 'sinusoidal':
            heading = self.root_phase + motion.root_speed / motion.root_radius * t
            pos = (motion.root_radius * math.cos(heading), motion.root_radius * math.sin(heading), PELVIS_HEIGHT)
            return pos, heading
        if motion.kind == 'linear':
            return (motion.root_speed * (t - (self.length - 1) / 2.0), 0.0, PELVIS_HEIGHT), 0.0
        return (0.0, 0.0, PELVIS_HEIGHT), 0.0


def _person_bbox(camera, gt):
    uv, valid = project_points(camera, gt.joints)
    inside = valid & in_image(camera, uv)
    if not np.any(inside):
        return None, uv, inside
    lo = np.min(uv[inside], axis=0)
    hi = np.max(uv[inside], axis=0)
    pad = 0.1 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    return (float(lo[0]), float(lo[1]), float(hi[0] - lo[0]), float(hi[1] - lo[1])), uv, inside


def draw_occluded_joints(rng, spec, gt, camera):
    """Occluded joint mask of one occluded view."""
    J = gt.joint_count
    mask = np.zeros(J, dtype=bool)
    if spec.occluder_mode == 'joints':
        count = int(round(spec.occluded_joint_fraction * J))
        mask[rng.choice(J, count, replace=False)] = True
        return mask
    bbox, uv, inside = _person_bbox(camera, gt)
    if bbox is None:
        return mask
    bx, by, bw, bh = bbox
    lo, hi = spec.occluder_size_range
    for _ in range(spec.occluders_per_view):
        w = rng.uniform(lo, hi) * bw
        h = rng.uniform(lo, hi) * bh
        x0 = rng.uniform(bx, bx + bw - w)
        y0 = rng.uniform(by, by + bh - h)
        mask |= inside & (uv[:, 0] >= x0) & (uv[:, 0] <= x0 + w) & (uv[:, 1] >= y0) & (uv[:, 1] <= y0 + h)
    return mask


def _render_view(gt, camera, spec, occluded, rng, occluded_joints=None):
    """ViewPrediction plus the recorded occluded mask (includes joints out of the image)."""
    J = gt.joint_count
    joints = np.array(gt.joints)
    scale = rng.uniform(*spec.ray_scale_range)
    if scale != 1.0:
        ext = camera.extrinsics
        q = transform_to_camera(ext, joints) * scale
        joints = (q - ext.translation) @ ext.rotation
    joints = joints + rng.normal(0.0, spec.sigma_3d / 1000.0, (J, 3))
    bbox, uv, inside = _person_bbox(camera, gt)
    mask = np.zeros(J, dtype=bool)
    drop = np.zeros(J, dtype=bool)
    if occluded:
        if occluded_joints is None:
            mask = draw_occluded_joints(rng, spec, gt, camera)
        else:
            mask = np.array(occluded_joints, dtype=bool)
        occ_noise = rng.normal(0.0, spec.sigma_occ / 1000.0, (J, 3))
        joints[mask] += occ_noise[mask]
        drop = mask & (rng.random(J) < spec.detection_drop_prob)
    visible = inside & ~drop
    det = np.where(visible[:, None], uv + rng.normal(0.0, spec.sigma_2d, (J, 2)), np.nan)
    conf = np.where(mask, rng.uniform(0.1, 0.6, J), rng.uniform(0.6, 1.0, J))
    view = ViewPrediction(camera.id, Pose3D(joints, conf, camera.id),
                          Detection2D(det, np.where(visible, conf, 0.0), visible, bbox))
    return view, mask | ~inside


def corrupt_view(gt, camera, spec, occluded, rng, occluded_joints=None):
    return _render_view(gt, camera, spec, occluded, rng, occluded_joints)[0]


def choose_occluded_views(rng, camera_ids, count):
    camera_ids = list(camera_ids)
    if not 0 <= count <= len(camera_ids):
        raise ValidationError(f"Cannot occlude {count} views out of {len(camera_ids)}")
    picked = rng.choice(len(camera_ids), count, replace=False)
    return tuple(sorted(camera_ids[i] for i in picked))


def _render_frame(frame_id, gt, cameras, spec, occluded_ids, rng, label):
    views, masks = [], {}
    for cam in cameras:
        view, mask = _render_view(gt, cam, spec, cam.id in occluded_ids, rng)
        views.append(view)
        masks[cam.id] = mask
    return Frame(frame_id, gt, views, occluded_ids, masks, label)


def occlude_views(frame, count, rng, cameras, spec=CorruptionSpec()):
    """Re-render every view of the frame with a random size-count subset occluded."""
    rig = cameras if isinstance(cameras, dict) else index_rig(cameras)
    chosen = choose_occluded_views(rng, frame.camera_ids, count)
    res = _render_frame(frame.frame_id, frame.gt, [rig[cid] for cid in frame.camera_ids], spec, chosen, rng, frame.label)
    return replace(res, desync=dict(frame.desync), clamped=frame.clamped)


def desync_offset(rng):
    return int(DESYNC_OFFSETS[rng.integers(len(DESYNC_OFFSETS))])


def desync_offsets(rng, size):
    return DESYNC_OFFSETS[rng.integers(len(DESYNC_OFFSETS), size=size)]


def apply_desync(sequence, desynced_camera_ids, rng):
    """Frame t of every desynced camera is served from frame t+e, e drawn per frame and camera.

    Offsets are clamped to the sequence bounds; frames where it happens are flagged clamped.
    """
    sequence = list(sequence)
    if len(sequence) < MIN_DESYNC_LENGTH:
        raise ValidationError(f"De-synchronization needs at least {MIN_DESYNC_LENGTH} frames, got {len(sequence)}")
    ids = sorted(set(desynced_camera_ids))
    if not ids:
        return sequence
    for cid in ids:
        if cid not in sequence[0].camera_ids:
            raise ValidationError(f"Cannot desynchronize unknown camera {cid}")
    n = len(sequence)
    res = []
    for t, frame in enumerate(sequence):
        views = {view.camera_id: view for view in frame.views}
        masks = dict(frame.occluded_joints)
        occluded = set(frame.occluded_views)
        desync = dict(frame.desync)
        clamped = frame.clamped
        for cid in ids:
            offset = desync_offset(rng)
            src = min(max(t + offset, 0), n - 1)
            clamped = clamped or src != t + offset
            source = sequence[src]
            views[cid] = source.view(cid)
            masks[cid] = source.occluded_joints[cid]
            occluded.discard(cid)
            if cid in source.occluded_views:
                occluded.add(cid)
            desync[cid] = offset
        res.append(replace(frame, views=tuple(views[view.camera_id] for view in frame.views),
                           occluded_views=tuple(sorted(occluded)), occluded_joints=masks, desync=desync, clamped=clamped))
    get_log().debug(f"apply_desync: cameras {ids}, {sum(f.clamped for f in res)} clamped frames")
    return res


def generate_sequence(rig, motion=MotionSpec(), corruption=CorruptionSpec(), length=100, rng=None, conv=None,
                      desynced=()):
    """Return (frames, manifest). rig is a RigSpec or a list of cameras.

    desynced cameras go through apply_desync once the whole sequence is rendered; the manifest
    lists them with the frames whose offset was clamped.
    """
    conv = conv or default_convention()
    rig_spec = rig if isinstance(rig, RigSpec) else None
    cameras = make_rig(rig) if rig_spec else list(rig)
    index_rig(cameras)
    if length < 1:
        raise ValidationError(f"Sequence length must be >= 1, got {length}")
    if corruption.occluded_view_count > len(cameras):
        raise ValidationError(f"Cannot occlude {corruption.occluded_view_count} views with {len(cameras)} cameras")
    rng = rng if rng is not None else np.random.default_rng(corruption.seed)
    lengths = sample_bone_lengths(rng, conv, motion.bone_jitter, motion.symmetric)
    trajectory = _Trajectory(rng, conv, motion, length)
    ids = [cam.id for cam in cameras]
    frames = []
    for t in range(length):
        root, yaw = trajectory.root(t)
        gt = Pose3D(forward_kinematics(conv, lengths, trajectory.angles(t), root, yaw))
        occluded = choose_occluded_views(rng, ids, corruption.occluded_view_count)
        frames.append(_render_frame(t, gt, cameras, corruption, occluded, rng, motion.label))
    desynced = sorted(set(desynced))
    if desynced:
        frames = apply_desync(frames, desynced, rng)
    manifest = {
        'format_version': FORMAT_VERSION,
        'generator': GENERATOR,
        'seed': corruption.seed,
        'length': length,
        'convention': conv.name,
        'joint_count': conv.joint_count,
        'camera_ids': ids,
        'rig': asdict(rig_spec) if rig_spec else None,
        'motion': asdict(motion),
        'corruption': asdict(corruption),
        'bone_lengths': [float(v) for v in lengths],
        'desynced_cameras': desynced,
        'clamped_frames': [frame.frame_id for frame in frames if frame.clamped],
    }
    get_log().info(f"generate_sequence: {length} frames, {len(cameras)} cameras, seed {corruption.seed}")
    return frames, manifest
