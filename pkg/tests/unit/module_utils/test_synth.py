# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

""" This module contains the testcases for the synthetic data generator."""

# Disable pylint warning triggered by standard fixture usage
# pylint: disable=redefined-outer-name
# pylint: disable=unused-argument

import math
import numpy as np
import pytest

from mvfuse.module_utils.mvfuse_util import ValidationError
from mvfuse.module_utils.mvfuse_geometry import project_points
from mvfuse.module_utils.mvfuse_skeleton import bone_length, symmetry_residuals
from mvfuse.module_utils.mvfuse_synth import (DESYNC_OFFSETS, CorruptionSpec, MotionSpec, RigSpec, apply_desync,
                                              choose_occluded_views, desync_offset, desync_offsets, generate_sequence,
                                              make_rig, occlude_views)


@pytest.fixture
def sequence(conv):
    frames, _ = generate_sequence(RigSpec(), MotionSpec(), CorruptionSpec(seed=3), 30, conv=conv)
    return frames


def _same(frames_a, frames_b):
    for fa, fb in zip(frames_a, frames_b):
        assert np.array_equal(fa.gt.joints, fb.gt.joints)
        assert fa.occluded_views == fb.occluded_views
        for va, vb in zip(fa.views, fb.views):
            assert np.array_equal(va.pose3d.joints, vb.pose3d.joints)
            assert np.array_equal(va.detection2d.joints, vb.detection2d.joints, equal_nan=True)
    return len(frames_a) == len(frames_b)


def test_make_rig():
    """Test the camera ring.
        Step 1: 6 cameras, 90 degrees field of view
        Result 1: ids cam0 .. cam5, focal is half the image width
    """
    cameras = make_rig(RigSpec(camera_count=6, fov=90.0))
    assert [cam.id for cam in cameras] == [f"cam{k}" for k in range(6)]
    assert cameras[0].intrinsics.fx == pytest.approx(500.0)
    angles = sorted(math.atan2(cam.center[1], cam.center[0]) % (2 * math.pi) for cam in cameras)
    assert np.allclose(np.diff(angles), math.pi / 3)
    with pytest.raises(ValidationError):
        RigSpec(camera_count=0)


def test_generate_is_deterministic(conv):
    """Test that the seed fully determines the sequence."""
    first, manifest = generate_sequence(RigSpec(), MotionSpec(), CorruptionSpec(seed=11), 10, conv=conv)
    second, _ = generate_sequence(RigSpec(), MotionSpec(), CorruptionSpec(seed=11), 10, conv=conv)
    assert _same(first, second)
    other, _ = generate_sequence(RigSpec(), MotionSpec(), CorruptionSpec(seed=12), 10, conv=conv)
    assert not np.array_equal(first[0].gt.joints, other[0].gt.joints)
    assert manifest['seed'] == 11
    assert manifest['length'] == 10
    assert manifest['camera_ids'] == ['cam0', 'cam1', 'cam2', 'cam3']
    assert manifest['joint_count'] == 17
    assert len(manifest['bone_lengths']) == 17


def test_sequence_structure(sequence, conv):
    """Test the generated frames.
        Result 1: every frame has all 4 views and exactly 3 occluded views
        Result 2: invisible joints are flagged occluded
        Result 3: ground truth is symmetric and bone lengths do not change over time
    """
    lengths = [bone_length(sequence[0].gt, conv.parents[j], j) for j in range(1, conv.joint_count)]
    for t, frame in enumerate(sequence):
        assert frame.frame_id == t
        assert frame.camera_ids == ('cam0', 'cam1', 'cam2', 'cam3')
        assert len(frame.occluded_views) == 3
        for view in frame.views:
            hidden = ~view.detection2d.visible
            assert np.all(frame.occluded_joints[view.camera_id][hidden])
        assert np.allclose(symmetry_residuals(frame.gt, conv), 0.0, atol=1e-12)
        assert np.allclose([bone_length(frame.gt, conv.parents[j], j) for j in range(1, conv.joint_count)],
                           lengths, atol=1e-12)


def test_noise_free_views(conv, rig):
    """Test that a noise free corruption gives exact predictions and detections."""
    frames, _ = generate_sequence(rig, MotionSpec(), CorruptionSpec.noise_free(), 3, conv=conv)
    for frame in frames:
        assert not frame.occluded_views
        for view, cam in zip(frame.views, rig):
            assert np.array_equal(view.pose3d.joints, frame.gt.joints)
            uv, _ = project_points(cam, frame.gt.joints)
            assert np.allclose(view.detection2d.joints, uv, atol=1e-9)
            assert np.all(view.detection2d.visible)


def test_occluded_joints_are_noisier(conv):
    """Test the occlusion model.
        Setup: 60 frames, 2 occluded views, no ray scaling
        Result: 3D errors of occluded joints are several times those of the other joints
    """
    spec = CorruptionSpec(ray_scale_range=(1.0, 1.0), occluded_view_count=2, seed=5)
    frames, _ = generate_sequence(RigSpec(), MotionSpec(), spec, 60, conv=conv)
    occ, clean = [], []
    for frame in frames:
        for view in frame.views:
            err = np.linalg.norm(view.pose3d.joints - frame.gt.joints, axis=1)
            mask = frame.occluded_joints[view.camera_id] if view.camera_id in frame.occluded_views \
                else np.zeros(conv.joint_count, dtype=bool)
            occ.extend(err[mask])
            clean.extend(err[~mask])
    assert np.mean(occ) > 3.0 * np.mean(clean)
    for frame in frames:
        for cid in frame.camera_ids:
            if cid not in frame.occluded_views:
                assert np.all(frame.view(cid).detection2d.visible | frame.occluded_joints[cid])


def test_box_occluders(conv):
    spec = CorruptionSpec(occluder_mode='boxes', occluders_per_view=3, occluded_view_count=4, seed=2)
    frames, _ = generate_sequence(RigSpec(), MotionSpec(), spec, 20, conv=conv)
    assert any(np.any(mask) for frame in frames for mask in frame.occluded_joints.values())


def test_motion_kinds(conv):
    """Test the static and linear motions."""
    static, _ = generate_sequence(RigSpec(), MotionSpec(kind='static'), CorruptionSpec(seed=1), 4, conv=conv)
    for frame in static[1:]:
        assert np.array_equal(frame.gt.joints, static[0].gt.joints)
    linear, _ = generate_sequence(RigSpec(), MotionSpec(kind='linear', root_speed=0.02), CorruptionSpec(seed=1), 4,
                                  conv=conv)
    pelvis = np.array([frame.gt.joints[conv.pelvis_index] for frame in linear])
    assert np.allclose(np.diff(pelvis[:, 0]), 0.02)
    assert np.allclose(pelvis[:, 1:], pelvis[0, 1:])


def test_occlusion_choice(rng, rig, sequence):
    assert choose_occluded_views(rng, ['a', 'b', 'c'], 3) == ('a', 'b', 'c')
    assert len(choose_occluded_views(rng, ['a', 'b', 'c'], 1)) == 1
    with pytest.raises(ValidationError):
        choose_occluded_views(rng, ['a', 'b'], 3)
    with pytest.raises(ValidationError):
        generate_sequence(rig, MotionSpec(), CorruptionSpec(occluded_view_count=5), 2)
    frame = occlude_views(sequence[0], 1, rng, rig)
    assert len(frame.occluded_views) == 1
    assert np.array_equal(frame.gt.joints, sequence[0].gt.joints)


def test_occluded_view_frequencies(rng, rig, sequence):
    """Test that occlude_views picks the occluded cameras uniformly.
        Step 1: 10000 draws of 3 occluded views out of 4 on the same frame
        Result 1: every camera is occluded in 7500 +- 150 draws
    """
    counts = dict.fromkeys(sequence[0].camera_ids, 0)
    for _ in range(10000):
        frame = occlude_views(sequence[0], 3, rng, rig)
        assert len(frame.occluded_views) == 3
        for cid in frame.occluded_views:
            counts[cid] += 1
    for cid, count in counts.items():
        assert abs(count - 7500) <= 150, cid


def test_desync_offsets(rng):
    """Test the offset distribution.
        Step 1: 10**6 draws
        Result 1: 0 is never drawn
        Result 2: -2, -1, +1 and +2 each appear 250000 +- 1500 times
    """
    draws = desync_offsets(rng, 10**6)
    assert 0 not in draws
    assert set(draws.tolist()) == set(DESYNC_OFFSETS.tolist())
    for value in (-2, -1, 1, 2):
        assert abs(int(np.count_nonzero(draws == value)) - 250000) <= 1500, value
    assert all(desync_offset(rng) in (-2, -1, 1, 2) for _ in range(1000))


def test_desynced_sequence_manifest(conv):
    """Test a sequence generated with desynchronized cameras.
        Step 1: generate 12 frames with cam2 desynchronized
        Result 1: the manifest lists cam2 and exactly the clamped frames
        Result 2: only the boundary frames can be clamped
        Result 3: without desynchronized cameras nothing is clamped
    """
    frames, manifest = generate_sequence(RigSpec(), MotionSpec(), CorruptionSpec(seed=5), 12, conv=conv,
                                         desynced=['cam2'])
    assert manifest['desynced_cameras'] == ['cam2']
    assert manifest['clamped_frames'] == [frame.frame_id for frame in frames if frame.clamped]
    assert set(manifest['clamped_frames']) <= {0, 1, 10, 11}
    assert all(sorted(frame.desync) == ['cam2'] for frame in frames)
    _, plain = generate_sequence(RigSpec(), MotionSpec(), CorruptionSpec(seed=5), 12, conv=conv)
    assert plain['desynced_cameras'] == []
    assert plain['clamped_frames'] == []


def test_apply_desync(sequence, rng):
    """Test camera de-synchronization.
        Step 1: desynchronize cam1 and cam3
        Result 1: their views come from frame t + offset (clamped), offset in {-2, -1, 1, 2}
        Result 2: cam0 and cam2 views and the ground truth are untouched
        Result 3: frames with an out of range offset are flagged clamped
    """
    res = apply_desync(sequence, ['cam3', 'cam1'], rng)
    n = len(sequence)
    assert len(res) == n
    for t, frame in enumerate(res):
        assert frame.gt is sequence[t].gt
        assert sorted(frame.desync) == ['cam1', 'cam3']
        clamped = False
        for cid, offset in frame.desync.items():
            assert offset in (-2, -1, 1, 2)
            src = min(max(t + offset, 0), n - 1)
            clamped = clamped or src != t + offset
            assert frame.view(cid) is sequence[src].view(cid)
        assert frame.clamped == clamped
        for cid in ('cam0', 'cam2'):
            assert frame.view(cid) is sequence[t].view(cid)
    assert not any(frame.clamped for frame in res[2:n - 2])
    assert apply_desync(sequence, [], rng) == list(sequence)
    with pytest.raises(ValidationError):
        apply_desync(sequence[:4], ['cam1'], rng)
    with pytest.raises(ValidationError):
        apply_desync(sequence, ['cam9'], rng)
