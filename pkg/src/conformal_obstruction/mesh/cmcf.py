"""Conformalized mean curvature flow to a spherical parametrization.

Each step solves ``(M_t + dt K_0) v_{t+1} = M_t v_t`` with the cotangent
stiffness ``K_0`` of the input mesh held fixed and the lumped mass ``M_t`` of
the current surface, then re-centers by the area-weighted centroid and
rescales to unit mean radius.
"""

from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .ddg import barycentric_mass, cotangent_stiffness
from .residual import SphericalParametrization
from .trimesh import MeshError, TriangleMesh

log = logging.getLogger(__name__)

SPHERICITY_TOL = 1e-3
SOLVE_RTOL = 1e-10
STALL_TOL = 1e-9


class FlowDegenerationError(MeshError):
    pass


class FlowNotConvergedError(MeshError):
    pass


def sphericity(v: np.ndarray) -> float:
    r = np.linalg.norm(v, axis=1)
    return float(np.max(np.abs(r - r.mean())) / r.mean())


def _normalize(mesh: TriangleMesh, v: np.ndarray) -> np.ndarray:
    areas = mesh.face_areas(v)
    centroids = v[mesh.faces].mean(axis=1)
    v = v - areas @ centroids / areas.sum()
    return v / np.linalg.norm(v, axis=1).mean()


def quasiconformal_distortion(mesh: TriangleMesh, target: np.ndarray) -> np.ndarray:
    """Per-face ratio of singular values of the affine map from ``mesh`` to ``target``."""

    def local(p):
        p0, p1, p2 = (p[mesh.faces[:, i]] for i in range(3))
        e1, e2 = p1 - p0, p2 - p0
        u = e1 / np.linalg.norm(e1, axis=1, keepdims=True)
        n = np.cross(e1, e2)
        w = np.cross(n / np.linalg.norm(n, axis=1, keepdims=True), u)
        return np.stack(
            [np.stack([np.einsum("ij,ij->i", e, u), np.einsum("ij,ij->i", e, w)], axis=1) for e in (e1, e2)],
            axis=2,
        )

    src, dst = local(mesh.vertices), local(target)
    J = dst @ np.linalg.inv(src)
    s = np.linalg.svd(J, compute_uv=False)
    return s[:, 0] / s[:, 1]


def _spd_solve(lu, A, b):
    x = lu.solve(b)
    res = np.linalg.norm(A @ x - b) / np.linalg.norm(b)
    if res > SOLVE_RTOL:
        raise FlowDegenerationError(f"linear solve residual {res:.2e} exceeds {SOLVE_RTOL}")
    return x


def conformal_spherical_map(
    mesh: TriangleMesh,
    steps: int = 1000,
    dt: float = 1e-2,
    tol: float = SPHERICITY_TOL,
) -> SphericalParametrization:
    """Flow ``mesh`` until it is round to ``tol``, then project radially to S^2."""
    K = cotangent_stiffness(mesh)
    v = _normalize(mesh, mesh.vertices.copy())
    history = []
    change = np.inf
    for step in range(steps + 1):
        sph = sphericity(v)
        qc = quasiconformal_distortion(mesh, v / np.linalg.norm(v, axis=1, keepdims=True))
        history.append((step, sph, float(qc.mean() - 1.0)))
        if sph < tol:
            break
        if step == steps:
            raise FlowNotConvergedError(f"sphericity {sph:.2e} after {steps} steps (dt={dt})")
        if change < STALL_TOL:
            # discrete fixed point of the flow; its roundness is limited by the mesh resolution
            raise FlowNotConvergedError(
                f"flow stalled at sphericity {sph:.2e} > {tol:g} after {step} steps; refine the mesh"
            )
        v_old = v
        M = sp.diags(barycentric_mass(mesh, v))
        A = (M + dt * K).tocsc()
        lu = splu(A)
        v = np.column_stack([_spd_solve(lu, A, M @ v[:, k]) for k in range(3)])
        if np.any(mesh.face_areas(v) <= 1e-14 * mesh.face_areas(v).sum()):
            raise FlowDegenerationError(f"collapsed triangle at step {step + 1}")
        v_new = _normalize(mesh, v)
        change = float(np.max(np.abs(v_new - v_old)))
        v = v_new
        log.debug("cMCF step %d sphericity %.3e", step + 1, sphericity(v))
    points = v / np.linalg.norm(v, axis=1, keepdims=True)
    param = SphericalParametrization(points, history[-1][2], history[-1][0], tuple(history))
    flips = param.flipped(mesh.faces)
    if np.any(flips):
        raise FlowDegenerationError(f"{int(flips.sum())} flipped spherical triangles")
    return param
