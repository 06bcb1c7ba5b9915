# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

"""Pinhole camera model: world/camera transforms, projection and reprojection error."""

DOCUMENTATION = r'''
---
module: mvfuse_geometry

short_description: Pinhole camera model used by fusion, refinement and the simulator

version_added: "1.0.0"

description:
    - CameraIntrinsics class:   focal lengths, principal point and image size (no distortion)
    - CameraExtrinsics class:   world to camera rotation and translation
    - Camera class:             one calibrated view of the rig
    - project function:         perspective projection, raises BehindCamera under z_min
    - project_points function:  vectorized projection with a validity mask
    - unproject function:       back-projection of a pixel at a given camera depth
    - triangulate function:     linear (DLT) triangulation from two views or more
    - look_at function:         camera orientation pointing at a target

author:
    - The mvfuse authors

requirements:
    - python >= 3.9
    - numpy >= 1.22
'''

# pylint: disable=invalid-name

from dataclasses import dataclass, field
import numpy as np

from .mvfuse_util import BehindCamera, ValidationError

Z_MIN = 1e-6            # meters
ORTHONORMAL_TOL = 1e-9


def _frozen_array(val, shape, name):
    arr = np.array(val, dtype=float)
    if arr.shape != shape:
        raise ValidationError(f"{name} must have shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        for name in ('fx', 'fy', 'cx', 'cy', 'width', 'height'):
            val = getattr(self, name)
            if not np.isfinite(val):
                raise ValidationError(f"Intrinsic parameter {name} must be finite, got {val}")
        for name in ('fx', 'fy', 'width', 'height'):
            if getattr(self, name) <= 0:
                raise ValidationError(f"Intrinsic parameter {name} must be positive, got {getattr(self, name)}")

    @property
    def matrix(self):
        """The 3x3 calibration matrix K."""
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class CameraExtrinsics:
    """World to camera transform: q = rotation @ p + translation."""
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'rotation', _frozen_array(self.rotation, (3, 3), 'rotation'))
        object.__setattr__(self, 'translation', _frozen_array(self.translation, (3,), 'translation'))
        if not (np.all(np.isfinite(self.rotation)) and np.all(np.isfinite(self.translation))):
            raise ValidationError("Extrinsic parameters must be finite")
        defect = self.orthonormality_defect()
        if defect > ORTHONORMAL_TOL:
            raise ValidationError(f"rotation is not orthonormal: max |R^T R - I| = {defect:.3e}")
        det = np.linalg.det(self.rotation)
        if abs(det - 1.0) > ORTHONORMAL_TOL:
            raise ValidationError(f"rotation is not a proper rotation: det(R) = {det:.12g}")

    def orthonormality_defect(self):
        return float(np.max(np.abs(self.rotation.T @ self.rotation - np.eye(3))))

    @staticmethod
    def identity():
        return CameraExtrinsics(np.eye(3), np.zeros(3))


@dataclass(frozen=True, eq=False)
class Camera:
    id: str
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics = field(default_factory=CameraExtrinsics.identity)

    @property
    def center(self):
        """Camera center in world frame."""
        return -self.extrinsics.rotation.T @ self.extrinsics.translation

    @property
    def projection_matrix(self):
        """The 3x4 matrix K [R | t]."""
        ext = self.extrinsics
        return self.intrinsics.matrix @ np.hstack((ext.rotation, ext.translation[:, None]))

    def __repr__(self):
        intr = self.intrinsics
        return f"Camera({self.id!r}, fx={intr.fx}, fy={intr.fy}, center={np.round(self.center, 6).tolist()})"


def index_rig(cameras):
    """Map camera id to Camera, rejecting duplicated ids."""
    rig = {}
    for cam in cameras:
        if cam.id in rig:
            raise ValidationError(f"Duplicate camera id '{cam.id}' in rig")
        rig[cam.id] = cam
    return rig


def transform_to_camera(extrinsics, p):
    """Return R p + t. Accepts a single point or an (..., 3) array."""
    p = np.asarray(p, dtype=float)
    return p @ extrinsics.rotation.T + extrinsics.translation


def project(camera, p, z_min=Z_MIN):
    q = transform_to_camera(camera.extrinsics, p)
    if not q[2] > z_min:
        raise BehindCamera(q[2], z_min, camera.id)
    intr = camera.intrinsics
    return np.array([intr.fx * q[0] / q[2] + intr.cx, intr.fy * q[1] / q[2] + intr.cy])


def project_points(camera, points, z_min=Z_MIN):
    """Project an (N, 3) array. Returns (pixels, valid); rows with depth <= z_min are NaN and not valid."""
    q = transform_to_camera(camera.extrinsics, np.asarray(points, dtype=float).reshape(-1, 3))
    z = q[:, 2]
    with np.errstate(invalid='ignore'):
        valid = z > z_min
    zs = np.where(valid, z, 1.0)
    intr = camera.intrinsics
    uv = np.stack((intr.fx * q[:, 0] / zs + intr.cx, intr.fy * q[:, 1] / zs + intr.cy), axis=-1)
    uv[~valid] = np.nan
    return uv, valid


def reprojection_error_sq(camera, p, obs, z_min=Z_MIN):
    diff = project(camera, p, z_min) - np.asarray(obs, dtype=float)
    return float(diff @ diff)


def in_image(camera, pixels):
    """Boolean mask of pixels lying inside the image bounds."""
    pixels = np.asarray(pixels, dtype=float).reshape(-1, 2)
    intr = camera.intrinsics
    with np.errstate(invalid='ignore'):
        return ((pixels[:, 0] >= 0) & (pixels[:, 0] <= intr.width)
                & (pixels[:, 1] >= 0) & (pixels[:, 1] <= intr.height))


def unproject(camera, pixel, depth):
    """World point whose camera-frame depth is `depth` and which projects on `pixel`."""
    if not depth > 0:
        raise ValidationError(f"Back-projection depth must be positive, got {depth}")
    intr = camera.intrinsics
    u, v = np.asarray(pixel, dtype=float)
    q = np.array([(u - intr.cx) / intr.fx * depth, (v - intr.cy) / intr.fy * depth, depth])
    ext = camera.extrinsics
    return ext.rotation.T @ (q - ext.translation)


def triangulate(cameras, pixels):
    """Linear triangulation of one point from >= 2 (camera, pixel) observations."""
    if len(cameras) != len(pixels):
        raise ValidationError(f"Got {len(cameras)} cameras but {len(pixels)} observations")
    if len(cameras) < 2:
        raise ValidationError(f"Triangulation needs at least 2 views, got {len(cameras)}")
    rows = []
    for cam, (u, v) in zip(cameras, np.asarray(pixels, dtype=float)):
        P = cam.projection_matrix
        for row in (u * P[2] - P[0], v * P[2] - P[1]):
            rows.append(row / np.linalg.norm(row))
    _, _, vt = np.linalg.svd(np.array(rows))
    X = vt[-1]
    if abs(X[3]) < 1e-12:
        raise ValidationError("Triangulated point is at infinity (degenerate view geometry)")
    return X[:3] / X[3]


def look_at(center, target, up=(0.0, 0.0, 1.0)):
    """Extrinsics of a camera at `center` looking at `target`: x right, y down, z forward."""
    center = np.asarray(center, dtype=float)
    forward = np.asarray(target, dtype=float) - center
    norm = np.linalg.norm(forward)
    if norm < 1e-12:
        raise ValidationError(f"look_at target coincides with the camera position {center.tolist()}")
    forward = forward / norm
    right = np.cross(forward, np.asarray(up, dtype=float))
    rnorm = np.linalg.norm(right)
    if rnorm < 1e-12:
        raise ValidationError("look_at viewing direction is parallel to the up vector")
    right = right / rnorm
    down = np.cross(forward, right)
    rotation = np.vstack((right, down, forward))
    return CameraExtrinsics(rotation, -rotation @ center)
