# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

"""Versioned file formats: cameras, conventions, sequences, manifests, poses, configs and metrics."""

DOCUMENTATION = r'''
---
module: mvfuse_io

short_description: Load and save mvfuse files with strict validation

version_added: "1.0.0"

description:
    - cameras:      JSON array of {id, fx, fy, cx, cy, width, height, R (9 floats row major), t (3 floats)}
    - convention:   JSON {joint_names, pelvis_index, symmetric_bone_pairs, parents (optional)}
    - sequence:     JSON Lines, optional header record then one frame per line
    - manifest:     JSON record of every simulator parameter, the seed and the format version
    - poses:        JSON Lines of per frame output poses
    - config:       flat YAML mapping mirroring the option table
    - metrics:      per frame CSV and per label summary CSV with a leading '# format_version=.. seed=..' line

author:
    - The mvfuse authors

requirements:
    - python >= 3.9
    - numpy >= 1.22
    - pyyaml
'''

### I found fstring more readable than lazy % formatting even if it is a bit slower:
# pylint: disable=logging-fstring-interpolation

import io
import csv
import json
from pathlib import Path
import numpy as np
import yaml

from .mvfuse_util import FORMAT_VERSION, GENERATOR, FormatError, ValidationError, get_log
from .mvfuse_geometry import Camera, CameraExtrinsics, CameraIntrinsics, index_rig
from .mvfuse_skeleton import Detection2D, JointConvention, Pose3D
from .mvfuse_fusion import ViewPrediction
from .mvfuse_metrics import FrameMetrics, SequenceSummary
from .mvfuse_synth import Frame
from .mvfuse_options import RunConfig

CAMERA_FIELDS = ('id', 'fx', 'fy', 'cx', 'cy', 'width', 'height', 'R', 't')
SUMMARY_COLUMNS = ('label', 'frames', 'mean_mpjpe_abs_mm', 'median_mpjpe_abs_mm',
                   'mean_mpjpe_rel_mm', 'median_mpjpe_rel_mm')


def _read_json(path):
    try:
        with open(path, 'rt', encoding='utf-8') as file:
            return json.load(file)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", path, exc.lineno) from exc


def _write_text(path, text):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wt', encoding='utf-8', newline='\n') as file:
        file.write(text)


def _write_json(path, data):
    _write_text(path, json.dumps(data, indent=2, allow_nan=False) + "\n")


def _header(seed):
    return {'format_version': FORMAT_VERSION, 'generator': GENERATOR, 'seed': seed}


def _comment_line(seed):
    return f"# format_version={FORMAT_VERSION} seed={seed}"


def _nulls(arr):
    """Nested list with NaN replaced by None."""
    return [[None if not np.isfinite(v) else float(v) for v in row] for row in np.asarray(arr)]


def _floats(data, shape, path, line, field):
    try:
        arr = np.array([[np.nan if v is None else v for v in row] for row in data], dtype=float) \
            if len(shape) == 2 else np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"expected numbers, got {data!r}", path, line, field) from exc
    if len(shape) == 2 and arr.size == 0:
        arr = arr.reshape(0, shape[1])
    if arr.ndim != len(shape) or any(s is not None and s != a for s, a in zip(shape, arr.shape)):
        raise FormatError(f"expected shape {shape}, got {arr.shape}", path, line, field)
    return arr


# Cameras

def camera_to_dict(camera):
    intr, ext = camera.intrinsics, camera.extrinsics
    return {
        'id': camera.id, 'fx': float(intr.fx), 'fy': float(intr.fy), 'cx': float(intr.cx), 'cy': float(intr.cy),
        'width': intr.width, 'height': intr.height,
        'R': [float(v) for v in ext.rotation.ravel()], 't': [float(v) for v in ext.translation],
    }


def camera_from_dict(data, path=None, index=None):
    where = f"camera #{index}" if index is not None else "camera"
    if not isinstance(data, dict):
        raise FormatError(f"{where} must be an object", path, field=where)
    missing = [key for key in CAMERA_FIELDS if key not in data]
    if missing:
        raise FormatError(f"{where} ({data.get('id', '?')}) misses fields {missing}", path, field=missing[0])
    unexpected = sorted(set(data) - set(CAMERA_FIELDS) - {'distortion'})
    if unexpected:
        raise FormatError(f"Unexpected parameters {unexpected} in camera {data['id']}", path, field=unexpected[0])
    cid = str(data['id'])
    distortion = data.get('distortion')
    try:
        if distortion is not None and any(float(v) != 0.0 for v in distortion):
            raise ValidationError(f"lens distortion is not supported (nonzero distortion {distortion})")
        intr = CameraIntrinsics(float(data['fx']), float(data['fy']), float(data['cx']), float(data['cy']),
                                int(data['width']), int(data['height']))
        rotation = np.array(data['R'], dtype=float)
        if rotation.shape != (9,):
            raise ValidationError(f"R must hold 9 floats, got {rotation.size}")
        ext = CameraExtrinsics(rotation.reshape(3, 3), np.array(data['t'], dtype=float))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"Camera {cid}: {exc}") from exc
    return Camera(cid, intr, ext)


def load_cameras(path):
    data = _read_json(path)
    if not isinstance(data, list):
        raise FormatError("camera file must hold a JSON array", path)
    cameras = [camera_from_dict(item, path, k) for k, item in enumerate(data)]
    index_rig(cameras)
    get_log().info(f"load_cameras: {len(cameras)} cameras from {path}")
    return cameras


def save_cameras(cameras, path):
    index_rig(cameras)
    _write_json(path, [camera_to_dict(cam) for cam in cameras])


# Conventions

def load_convention(path):
    data = _read_json(path)
    if not isinstance(data, dict):
        raise FormatError("convention file must hold a JSON object", path)
    data = dict(data)
    version = data.pop('format_version', None)
    data.pop('seed', None)
    if version is not None and str(version).split('.', maxsplit=1)[0] != FORMAT_VERSION.split('.', maxsplit=1)[0]:
        raise FormatError(f"unsupported format version {version}", path, None, 'format_version')
    try:
        return JointConvention.from_dict(data)
    except ValidationError as exc:
        raise FormatError(str(exc), path) from exc


def save_convention(conv, path, seed=None):
    _write_json(path, {**conv.to_dict(), 'format_version': FORMAT_VERSION, 'seed': seed})


# Sequences

def _pose_to_dict(pose):
    return {'joints': _nulls(pose.joints), 'conf': [float(v) for v in pose.confidence]}


def frame_to_dict(frame):
    views = []
    for view in frame.views:
        det = view.detection2d
        views.append({
            'camera_id': view.camera_id,
            'pose3d': _pose_to_dict(view.pose3d),
            'det2d': {'joints': _nulls(det.joints), 'conf': [float(v) for v in det.confidence],
                      'visible': [bool(v) for v in det.visible],
                      'bbox': None if det.bbox is None else list(det.bbox)},
        })
    return {
        'frame_id': frame.frame_id,
        'label': frame.label,
        'gt': _pose_to_dict(frame.gt),
        'views': views,
        'occluded_views': list(frame.occluded_views),
        'occluded_joints': {cid: np.flatnonzero(mask).tolist() for cid, mask in frame.occluded_joints.items()},
        'desync': dict(frame.desync),
        'clamped': frame.clamped,
    }


def _pose_from_dict(data, J, path, line, field, source=None):
    if not isinstance(data, dict) or 'joints' not in data:
        raise FormatError("expected an object with 'joints'", path, line, field)
    joints = _floats(data['joints'], (None, 3), path, line, f"{field}.joints")
    if J is not None and len(joints) != J:
        raise FormatError(f"joint count mismatch: expected {J} joints, got {len(joints)}", path, line, field)
    conf = data.get('conf')
    conf = None if conf is None else _floats(conf, (len(joints),), path, line, f"{field}.conf")
    return Pose3D(joints, conf, source)


def frame_from_dict(data, conv=None, path=None, line=None):
    if not isinstance(data, dict):
        raise FormatError("a frame must be a JSON object", path, line)
    missing = [key for key in ('frame_id', 'gt', 'views') if key not in data]
    if missing:
        raise FormatError(f"frame misses fields {missing}", path, line, missing[0])
    J = conv.joint_count if conv is not None else None
    try:
        gt = _pose_from_dict(data['gt'], J, path, line, 'gt')
        J = gt.joint_count
        views = []
        for k, item in enumerate(data['views']):
            field = f"views[{k}]"
            cid = str(item['camera_id'])
            pose = _pose_from_dict(item['pose3d'], J, path, line, f"{field}.pose3d", cid)
            det = item['det2d']
            joints = _floats(det['joints'], (J, 2), path, line, f"{field}.det2d.joints")
            conf = _floats(det['conf'], (J,), path, line, f"{field}.det2d.conf")
            visible = np.array(det['visible'], dtype=bool)
            views.append(ViewPrediction(cid, pose, Detection2D(joints, conf, visible, det.get('bbox'))))
        masks = {}
        for cid, indices in data.get('occluded_joints', {}).items():
            mask = np.zeros(J, dtype=bool)
            mask[np.array(indices, dtype=int)] = True
            masks[cid] = mask
        return Frame(int(data['frame_id']), gt, views, tuple(data.get('occluded_views', ())), masks,
                     str(data.get('label', 'synthetic')), {str(k): int(v) for k, v in data.get('desync', {}).items()},
                     bool(data.get('clamped', False)))
    except FormatError:
        raise
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise FormatError(f"invalid frame: {exc!r}", path, line) from exc


def _iter_jsonl(path):
    """Yield (line number, record) skipping blank lines."""
    with open(path, 'rt', encoding='utf-8') as file:
        for lineno, text in enumerate(file, start=1):
            if not text.strip():
                continue
            try:
                yield lineno, json.loads(text)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON: {exc.msg}", path, lineno) from exc


def save_sequence(frames, path, seed=None):
    lines = [json.dumps({'header': _header(seed)}, allow_nan=False)]
    lines += [json.dumps(frame_to_dict(frame), allow_nan=False) for frame in frames]
    _write_text(path, "\n".join(lines) + "\n")


def load_sequence(path, conv=None):
    frames = []
    header = None
    for lineno, record in _iter_jsonl(path):
        if isinstance(record, dict) and 'header' in record:
            if frames or header is not None:
                raise FormatError("header record must be the first line", path, lineno)
            header = record['header']
            version = str(header.get('format_version'))
            if version.split('.', maxsplit=1)[0] != FORMAT_VERSION.split('.', maxsplit=1)[0]:
                raise FormatError(f"unsupported format version {version}", path, lineno, 'format_version')
            continue
        frames.append(frame_from_dict(record, conv, path, lineno))
    if not frames:
        raise FormatError("sequence holds no frame", path)
    J = frames[0].gt.joint_count
    for frame in frames:
        if frame.gt.joint_count != J:
            raise ValidationError(f"{path}: frame {frame.frame_id} has {frame.gt.joint_count} joints, expected {J}")
    get_log().info(f"load_sequence: {len(frames)} frames from {path}")
    return frames


def save_manifest(manifest, path):
    _write_json(path, manifest)


def load_manifest(path):
    data = _read_json(path)
    if not isinstance(data, dict) or 'format_version' not in data:
        raise FormatError("manifest must be an object with a format_version", path)
    return data


# Output poses

def save_poses(poses, path, seed=None):
    """poses: iterable of (frame_id, label, Pose3D)."""
    lines = [json.dumps({'header': _header(seed)})]
    for frame_id, label, pose in poses:
        lines.append(json.dumps({'frame_id': int(frame_id), 'label': label, 'pose': _pose_to_dict(pose)}))
    _write_text(path, "\n".join(lines) + "\n")


def load_poses(path, conv=None):
    """Return {frame_id: Pose3D}."""
    J = conv.joint_count if conv is not None else None
    poses = {}
    for lineno, record in _iter_jsonl(path):
        if not isinstance(record, dict):
            raise FormatError("a pose record must be a JSON object", path, lineno)
        if 'header' in record:
            continue
        try:
            frame_id = int(record['frame_id'])
            pose = _pose_from_dict(record['pose'], J, path, lineno, 'pose')
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"invalid pose record: {exc!r}", path, lineno) from exc
        if frame_id in poses:
            raise FormatError(f"duplicate frame_id {frame_id}", path, lineno, 'frame_id')
        poses[frame_id] = pose
    return poses


# Configuration

def load_config(path):
    """Read a flat YAML mapping into a RunConfig (unknown keys are rejected)."""
    try:
        with open(path, 'rt', encoding='utf-8') as file:
            data = yaml.safe_load(file)
    except yaml.YAMLError as exc:
        mark = getattr(exc, 'problem_mark', None)
        raise FormatError(f"invalid YAML: {exc}", path, None if mark is None else mark.line + 1) from exc
    return RunConfig.from_dict(data, source=path)


# Metrics

def _csv_text(rows, seed):
    buff = io.StringIO()
    buff.write(_comment_line(seed) + "\n")
    writer = csv.writer(buff, lineterminator="\n")
    writer.writerows(rows)
    return buff.getvalue()


def _fmt(val):
    return repr(float(val))


def write_metrics(frames, summaries, path, seed=None):
    """Per frame CSV at path, per label summary at <stem>_summary.csv. Returns both paths."""
    frames = list(frames)
    summaries = list(summaries)
    if not frames or not summaries:
        raise ValidationError("write_metrics needs at least one frame and one summary")
    path = Path(path)
    J = len(frames[0].per_joint_abs)
    header = ['frame_id', 'label', 'mpjpe_abs_mm', 'mpjpe_rel_mm'] + [f"joint_{j}_mm" for j in range(J)]
    rows = [header]
    for fm in sorted(frames, key=lambda f: (f.frame_id, f.label)):
        rows.append([fm.frame_id, fm.label, _fmt(fm.mpjpe_abs), _fmt(fm.mpjpe_rel)]
                    + [_fmt(v) for v in fm.per_joint_abs])
    summary_rows = [list(SUMMARY_COLUMNS)]
    for summ in summaries:
        summary_rows.append([summ.label, summ.frame_count, _fmt(summ.mean_mpjpe_abs), _fmt(summ.median_mpjpe_abs),
                             _fmt(summ.mean_mpjpe_rel), _fmt(summ.median_mpjpe_rel)])
    summary_path = path.with_name(f"{path.stem}_summary.csv")
    _write_text(path, _csv_text(rows, seed))
    _write_text(summary_path, _csv_text(summary_rows, seed))
    return path, summary_path


def write_table(columns, rows, path, seed=None):
    """Plot ready CSV: header comment, column names, rows."""
    _write_text(path, _csv_text([list(columns)] + [[_fmt(v) if isinstance(v, float) else v for v in row]
                                                   for row in rows], seed))


def _read_csv(path):
    with open(path, 'rt', encoding='utf-8') as file:
        lines = [line for line in file if not line.startswith('#')]
    reader = csv.DictReader(lines)
    return reader.fieldnames or [], list(reader)


def read_metrics(path):
    fields, rows = _read_csv(path)
    joint_cols = [name for name in fields if name.startswith('joint_')]
    try:
        return [FrameMetrics(int(row['frame_id']), float(row['mpjpe_abs_mm']), float(row['mpjpe_rel_mm']),
                             tuple(float(row[name]) for name in joint_cols), row['label']) for row in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"invalid metrics CSV: {exc!r}", path) from exc


def read_summary(path):
    _, rows = _read_csv(path)
    try:
        return [SequenceSummary(row['label'], int(row['frames']), float(row['mean_mpjpe_abs_mm']),
                                float(row['median_mpjpe_abs_mm']), float(row['mean_mpjpe_rel_mm']),
                                float(row['median_mpjpe_rel_mm'])) for row in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"invalid summary CSV: {exc!r}", path) from exc


def read_table(path):
    """Return (columns, rows as dicts) of a CSV written by write_table."""
    return _read_csv(path)
