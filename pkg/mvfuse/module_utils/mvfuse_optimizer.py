# --- BEGIN COPYRIGHT BLOCK ---
# Copyright (C) 2026 The mvfuse authors.
# All rights reserved.
#
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)
# --- END COPYRIGHT BLOCK ---
#

"""Refinement of a fused pose: reprojection error over all cameras plus a limb symmetry penalty."""

DOCUMENTATION = r'''
---
module: mvfuse_optimizer

short_description: Symmetry constrained reprojection error minimization

version_added: "1.0.0"

description:
    - ObjectiveConfig class:       symmetry weight, iteration budget, tolerances and damping
    - OptimizationResult class:    refined pose, objective decomposition and termination data
    - symmetry_cost function:      sum of squared left/right bone length differences (m^2)
    - objective function:          squared reprojection error (px^2) + lambda_sym * symmetry_cost
    - gradient function:           analytic gradient of the objective (3J vector)
    - refine function:             Levenberg-Marquardt descent over the 3J joint coordinates

author:
    - The mvfuse authors

requirements:
    - python >= 3.9
    - numpy >= 1.22
'''

### I found fstring more readable than lazy % formatting even if it is a bit slower:
# pylint: disable=logging-fstring-interpolation
### Solver state is kept in local variables to mirror the textbook algorithm
# pylint: disable=too-many-locals
# pylint: disable=too-many-instance-attributes
# pylint: disable=invalid-name

from dataclasses import dataclass
from typing import Tuple
import numpy as np

from .mvfuse_util import NonFiniteObjective, ValidationError, get_log
from .mvfuse_geometry import Z_MIN, index_rig
from .mvfuse_skeleton import Pose3D, default_convention, symmetry_residuals


@dataclass(frozen=True)
class ObjectiveConfig:
    lambda_sym: float = 1.0
    max_iters: int = 100
    grad_tol: float = 1e-8
    step_tol: float = 1e-10
    initial_damping: float = 1e-3
    z_min: float = Z_MIN

    def __post_init__(self):
        if not (np.isfinite(self.lambda_sym) and self.lambda_sym >= 0):
            raise ValidationError(f"lambda_sym must be finite and >= 0, got {self.lambda_sym}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValidationError(f"max_iters must be an integer >= 1, got {self.max_iters}")
        for name in ('grad_tol', 'step_tol', 'initial_damping', 'z_min'):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    pose: Pose3D
    initial_objective: float
    final_objective: float
    reprojection_term: float
    symmetry_term: float
    iterations: int
    converged: bool
    termination_reason: str
    history: Tuple[float, ...] = ()
    behind_camera: Tuple[Tuple[str, int], ...] = ()


def symmetry_cost(pose, conv):
    res = symmetry_residuals(pose, conv)
    return float(res @ res)


class _Problem:
    """Stacked residuals of one refinement problem.

    Reprojection residuals (C, J, 2) in pixels come first (cameras sorted by id),
    then sqrt(lambda_sym) * (left length - right length) for each bone pair.
    """

    def __init__(self, cameras, detections, conv, config):
        rig = cameras if isinstance(cameras, dict) else index_rig(cameras)
        unknown = sorted(set(detections) - set(rig))
        if unknown:
            raise ValidationError(f"Detections reference unknown camera ids {unknown}")
        self.ids = sorted(detections)
        self.J = conv.joint_count
        for cid in self.ids:
            if detections[cid].joint_count != self.J:
                raise ValidationError(f"Detection of camera {cid} has {detections[cid].joint_count} joints,"
                                      f" convention {conv.name} expects {self.J}")
        cams = [rig[cid] for cid in self.ids]
        C = len(cams)
        self.C = C
        self.R = np.array([cam.extrinsics.rotation for cam in cams]).reshape(C, 3, 3)
        self.t = np.array([cam.extrinsics.translation for cam in cams]).reshape(C, 3)
        self.f = np.array([[cam.intrinsics.fx, cam.intrinsics.fy] for cam in cams]).reshape(C, 2)
        self.c = np.array([[cam.intrinsics.cx, cam.intrinsics.cy] for cam in cams]).reshape(C, 2)
        self.visible = np.array([detections[cid].visible for cid in self.ids], dtype=bool).reshape(C, self.J)
        obs = np.array([detections[cid].joints for cid in self.ids], dtype=float).reshape(C, self.J, 2)
        self.obs = np.where(self.visible[..., None], obs, 0.0)
        pairs = np.array(conv.symmetric_bone_pairs, dtype=int).reshape(-1, 2, 2)
        self.left = pairs[:, 0, :]
        self.right = pairs[:, 1, :]
        self.sqrt_lambda = np.sqrt(config.lambda_sym)
        self.z_min = config.z_min

    def _camera_points(self, X):
        return np.einsum('cab,jb->cja', self.R, X) + self.t[:, None, :]

    def active(self, X):
        """(C, J) mask of the reprojection terms in use and the list of dropped behind camera terms."""
        z = self._camera_points(X)[..., 2]
        with np.errstate(invalid='ignore'):
            front = z > self.z_min
        behind = self.visible & ~front
        dropped = [(self.ids[c], int(j)) for c, j in zip(*np.nonzero(behind))]
        return self.visible & front, dropped

    def residuals(self, X):
        q = self._camera_points(X)
        ok, _ = self.active(X)
        z = np.where(ok, q[..., 2], 1.0)
        uv = self.f[:, None, :] * q[..., :2] / z[..., None] + self.c[:, None, :]
        rep = np.where(ok[..., None], uv - self.obs, 0.0)
        dl = np.linalg.norm(X[self.left[:, 0]] - X[self.left[:, 1]], axis=1)
        dr = np.linalg.norm(X[self.right[:, 0]] - X[self.right[:, 1]], axis=1)
        return rep.ravel(), dl - dr

    def stacked(self, X):
        rep, sym = self.residuals(X)
        return np.concatenate((rep, self.sqrt_lambda * sym))

    def terms(self, X):
        rep, sym = self.residuals(X)
        return float(rep @ rep), float(sym @ sym)

    def jacobian(self, X):
        C, J = self.C, self.J
        q = self._camera_points(X)
        ok, _ = self.active(X)
        z = np.where(ok, q[..., 2], 1.0)
        # d(u, v)/dq for every (camera, joint): (C, J, 2, 3)
        dproj = np.zeros((C, J, 2, 3))
        dproj[..., 0, 0] = self.f[:, None, 0] / z
        dproj[..., 0, 2] = -self.f[:, None, 0] * q[..., 0] / z**2
        dproj[..., 1, 1] = self.f[:, None, 1] / z
        dproj[..., 1, 2] = -self.f[:, None, 1] * q[..., 1] / z**2
        blocks = np.einsum('cjab,cbd->cjad', dproj, self.R) * ok[..., None, None]
        jac_rep = np.zeros((C, J, 2, J, 3))
        cc, jj = np.meshgrid(np.arange(C), np.arange(J), indexing='ij')
        jac_rep[cc, jj, :, jj, :] = blocks
        jac_sym = np.zeros((len(self.left), J, 3))
        rows = np.arange(len(self.left))
        for bones, sign in ((self.left, 1.0), (self.right, -1.0)):
            vec = X[bones[:, 0]] - X[bones[:, 1]]
            length = np.linalg.norm(vec, axis=1)
            unit = np.divide(vec, length[:, None], out=np.zeros_like(vec), where=length[:, None] > 0)
            np.add.at(jac_sym, (rows, bones[:, 0]), sign * unit)
            np.add.at(jac_sym, (rows, bones[:, 1]), -sign * unit)
        return np.vstack((jac_rep.reshape(C * J * 2, J * 3),
                          self.sqrt_lambda * jac_sym.reshape(len(self.left), J * 3)))


def _as_array(pose):
    return np.array(pose.joints if isinstance(pose, Pose3D) else pose, dtype=float).reshape(-1, 3)


def objective(pose, cameras, detections, config=ObjectiveConfig(), conv=None):
    """Sum over cameras and visible joints of squared reprojection errors plus
    lambda_sym * symmetry_cost. Behind camera terms contribute 0 and are logged."""
    conv = conv or default_convention()
    problem = _Problem(cameras, detections, conv, config)
    X = _as_array(pose)
    _, dropped = problem.active(X)
    if dropped:
        get_log().warning(f"objective: dropped behind camera terms {dropped}")
    rep, sym = problem.terms(X)
    return rep + config.lambda_sym * sym


def gradient(pose, cameras, detections, config=ObjectiveConfig(), conv=None):
    conv = conv or default_convention()
    problem = _Problem(cameras, detections, conv, config)
    X = _as_array(pose)
    return 2.0 * problem.jacobian(X).T @ problem.stacked(X)


def refine(initial, cameras, detections, config=ObjectiveConfig(), conv=None):
    """Levenberg-Marquardt with Nielsen damping updates.

    Only steps that strictly decrease the objective are accepted, so the
    returned pose is the best one seen.
    """
    conv = conv or default_convention()
    log = get_log()
    problem = _Problem(cameras, detections, conv, config)
    x = _as_array(initial).ravel()
    if x.size != 3 * conv.joint_count:
        raise ValidationError(f"Initial pose has {x.size // 3} joints, expected {conv.joint_count}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteObjective("Initial pose has non-finite coordinates")

    r = problem.stacked(x.reshape(-1, 3))
    fx = float(r @ r)
    if not np.isfinite(fx):
        raise NonFiniteObjective(f"Initial objective is not finite: {fx}")
    history = [fx]
    jac = problem.jacobian(x.reshape(-1, 3))
    A = jac.T @ jac
    g = jac.T @ r
    mu = config.initial_damping * max(float(np.max(np.diag(A))), 1e-300)
    nu = 2.0
    iterations = 0
    converged = False
    reason = 'max_iters'
    if fx == 0.0 or np.max(np.abs(2.0 * g)) <= config.grad_tol:
        converged, reason = True, 'grad_tol'
    while not converged and iterations < config.max_iters:
        iterations += 1
        try:
            step = np.linalg.solve(A + mu * np.eye(A.shape[0]), -g)
        except np.linalg.LinAlgError:
            mu *= nu
            nu *= 2.0
            continue
        if np.max(np.abs(step)) <= config.step_tol:
            converged, reason = True, 'step_tol'
            break
        x_new = x + step
        r_new = problem.stacked(x_new.reshape(-1, 3))
        f_new = float(r_new @ r_new)
        predicted = float(step @ (mu * step - g))
        if np.isfinite(f_new) and f_new < fx:
            rho = (fx - f_new) / predicted if predicted > 0 else 1.0
            x, r, fx = x_new, r_new, f_new
            history.append(fx)
            jac = problem.jacobian(x.reshape(-1, 3))
            A = jac.T @ jac
            g = jac.T @ r
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
            log.debug(f"refine: iter {iterations} accepted objective={fx:.9g} mu={mu:.3g}")
            if fx == 0.0 or np.max(np.abs(2.0 * g)) <= config.grad_tol:
                converged, reason = True, 'grad_tol'
        else:
            mu *= nu
            nu *= 2.0
            log.debug(f"refine: iter {iterations} rejected objective={f_new:.9g} mu={mu:.3g}")
        if not np.isfinite(mu):
            reason = 'damping_overflow'
            break

    X = x.reshape(-1, 3)
    rep, sym = problem.terms(X)
    _, dropped = problem.active(X)
    initial_conf = initial.confidence if isinstance(initial, Pose3D) else None
    source = initial.source_camera if isinstance(initial, Pose3D) else None
    log.info(f"refine: {reason} after {iterations} iterations, objective {history[0]:.6g} -> {fx:.6g}")
    return OptimizationResult(
        pose=Pose3D(X, initial_conf, source),
        initial_objective=history[0],
        final_objective=fx,
        reprojection_term=rep,
        symmetry_term=sym,
        iterations=iterations,
        converged=converged,
        termination_reason=reason,
        history=tuple(history),
        behind_camera=tuple(dropped),
    )
