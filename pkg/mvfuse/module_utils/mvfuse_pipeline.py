# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

"""Frame pipeline (fusion, refinement, scoring) and the two robustness ablations."""

DOCUMENTATION = r'''
---
module: mvfuse_pipeline

short_description: Per frame processing, sequence runs and ablations

version_added: "1.0.0"

description:
    - PipelineConfig class:  reconstruction method, fusion / refinement configs, metric options
    - FrameResult class:     fused pose, final pose, weights, refinement result and metrics of one frame
    - process_frame:         fuse_frame, then refine unless disabled, then score against the ground truth
    - run_sequence:          process every frame, optionally in a process pool; results ordered by frame_id
    - summarize:             frame metrics (clamped frames excluded by default) and per label summaries
    - select_views / drop_views: restrict frames to a camera subset
    - ablate_desync:         MPJPE against the number of desynchronized cameras
    - ablate_views:          MPJPE against the number of available cameras

author:
    - The mvfuse authors

requirements:
    - python >= 3.9
    - numpy >= 1.22
'''

### I found fstring more readable than lazy % formatting even if it is a bit slower:
# pylint: disable=logging-fstring-interpolation
# pylint: disable=too-many-arguments

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Optional
import numpy as np

from .mvfuse_util import ValidationError, get_log
from .mvfuse_geometry import index_rig, triangulate
from .mvfuse_skeleton import Pose3D
from .mvfuse_fusion import FusionConfig, WeightMatrix, detections_by_camera, fuse_frame
from .mvfuse_optimizer import ObjectiveConfig, OptimizationResult, refine
from .mvfuse_metrics import FrameMetrics, MetricOptions, aggregate, frame_metrics
from .mvfuse_synth import apply_desync

METHODS = ('fusion', 'triangulation')


@dataclass(frozen=True)
class PipelineConfig:
    method: str = 'fusion'
    fusion: FusionConfig = field(default_factory=FusionConfig)
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    optimize: bool = True
    metrics: MetricOptions = field(default_factory=MetricOptions)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"Unknown method '{self.method}', expected one of {METHODS}")

    @staticmethod
    def from_run_config(cfg):
        return PipelineConfig(cfg.method, cfg.fusion_config(), cfg.objective_config(), cfg.optimize,
                              cfg.metric_options())

    def baseline(self):
        """Naive control: uniform weights, no refinement."""
        return replace(self, method='fusion', fusion=replace(self.fusion, strategy='uniform'), optimize=False)


@dataclass(frozen=True, eq=False)
class FrameResult:
    frame_id: int
    label: str
    fused: Pose3D
    pose: Pose3D
    weights: WeightMatrix
    optimization: Optional[OptimizationResult]
    metrics: FrameMetrics
    clamped: bool = False


@dataclass(frozen=True)
class AblationRow:
    method: str
    count: int
    mpjpe_abs: float
    mpjpe_rel: float
    frames: int


def triangulate_pose(views, rig, fallback):
    """Per joint DLT over the views detecting it (two or more); other joints keep the fallback pose."""
    joints = np.array(fallback.joints)
    for j in range(fallback.joint_count):
        seen = [view for view in views if view.detection2d.visible[j]]
        if len(seen) < 2:
            continue
        try:
            joints[j] = triangulate([rig[view.camera_id] for view in seen],
                                    [view.detection2d.joints[j] for view in seen])
        except ValidationError as exc:
            get_log().debug(f"triangulate_pose: joint {j} kept from fusion ({exc})")
    return Pose3D(joints, fallback.confidence)


def process_frame(frame, cameras, conv, config=PipelineConfig()):
    rig = cameras if isinstance(cameras, dict) else index_rig(cameras)
    views = [view for view in frame.views if view.camera_id in rig]
    if not views:
        raise ValidationError(f"Frame {frame.frame_id} has no view from the rig cameras")
    fused, weights = fuse_frame(views, rig, config.fusion, config.objective.z_min)
    initial = fused
    if config.method == 'triangulation':
        initial = triangulate_pose(views, rig, fused)
    optimization = None
    pose = initial
    if config.optimize:
        optimization = refine(initial, rig, detections_by_camera(views), config.objective, conv)
        pose = optimization.pose
    metrics = frame_metrics(frame.frame_id, pose, frame.gt, conv, frame.label, config.metrics)
    get_log().debug(f"process_frame: frame {frame.frame_id} mpjpe_abs={metrics.mpjpe_abs:.3f} mm")
    return FrameResult(frame.frame_id, frame.label, fused, pose, weights, optimization, metrics, frame.clamped)


def run_sequence(frames, cameras, conv, config=PipelineConfig(), jobs=1):
    """Process every frame. Results are ordered by frame_id whatever the completion order."""
    frames = list(frames)
    worker = partial(process_frame, cameras=index_rig(cameras) if not isinstance(cameras, dict) else cameras,
                     conv=conv, config=config)
    if jobs > 1 and len(frames) > 1:
        chunksize = max(1, len(frames) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(worker, frames, chunksize=chunksize))
    else:
        results = [worker(frame) for frame in frames]
    get_log().info(f"run_sequence: {len(results)} frames processed (method={config.method},"
                   f" strategy={config.fusion.strategy}, optimize={config.optimize})")
    return sorted(results, key=lambda res: res.frame_id)


def summarize(results, options=MetricOptions()):
    """Return (frame metrics, per label summaries); clamped frames are skipped unless included."""
    kept = [res.metrics for res in results if options.include_clamped or not res.clamped]
    if not kept:
        raise ValidationError("No frame left to score (every frame is clamped)")
    return kept, aggregate(kept)


def select_views(frames, camera_ids):
    keep = set(camera_ids)
    res = []
    for frame in frames:
        views = tuple(view for view in frame.views if view.camera_id in keep)
        res.append(replace(frame, views=views,
                           occluded_views=tuple(cid for cid in frame.occluded_views if cid in keep),
                           occluded_joints={cid: mask for cid, mask in frame.occluded_joints.items() if cid in keep},
                           desync={cid: off for cid, off in frame.desync.items() if cid in keep}))
    return res


def drop_views(frames, camera_ids):
    frames = list(frames)
    drop = set(camera_ids)
    known = set().union(*(frame.camera_ids for frame in frames)) if frames else set()
    unknown = sorted(drop - known)
    if unknown:
        raise ValidationError(f"Cannot drop unknown cameras {unknown}")
    if known and known <= drop:
        raise ValidationError("Dropping every camera leaves nothing to process")
    return select_views(frames, known - drop)


def _row(method, count, results, options):
    kept, _ = summarize(results, options)
    return AblationRow(method, count, float(np.mean([m.mpjpe_abs for m in kept])),
                       float(np.mean([m.mpjpe_rel for m in kept])), len(kept))


def _methods(config, baseline):
    methods = [(config.method, config)]
    if baseline:
        methods.append(('baseline', config.baseline()))
    return methods


def ablate_desync(frames, cameras, conv, config=PipelineConfig(), rng=None, baseline=False, jobs=1):
    """Rows for 0 .. C-1 desynchronized cameras (random subsets, fresh offsets per frame)."""
    rng = rng if rng is not None else np.random.default_rng(0)
    frames = list(frames)
    ids = sorted(frames[0].camera_ids)
    rows = []
    for count in range(len(ids)):
        desynced = sorted(ids[i] for i in rng.choice(len(ids), count, replace=False))
        sequence = apply_desync(frames, desynced, rng)
        for method, cfg in _methods(config, baseline):
            rows.append(_row(method, count, run_sequence(sequence, cameras, conv, cfg, jobs), cfg.metrics))
        get_log().info(f"ablate_desync: {count} desynchronized cameras {desynced}")
    return rows


def ablate_views(frames, cameras, conv, config=PipelineConfig(), rng=None, baseline=False, jobs=1):
    """Rows for C, C-1, .., 2 available cameras (random subset per frame)."""
    rng = rng if rng is not None else np.random.default_rng(0)
    frames = list(frames)
    ids = list(frames[0].camera_ids)
    if len(ids) < 2:
        raise ValidationError(f"View ablation needs at least 2 cameras, got {len(ids)}")
    rows = []
    for size in range(len(ids), 1, -1):
        subset = []
        for frame in frames:
            picked = [ids[i] for i in rng.choice(len(ids), size, replace=False)]
            subset.extend(select_views([frame], picked))
        for method, cfg in _methods(config, baseline):
            rows.append(_row(method, size, run_sequence(subset, cameras, conv, cfg, jobs), cfg.metrics))
        get_log().info(f"ablate_views: {size} cameras")
    return rows
