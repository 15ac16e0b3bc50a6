"""Cotangent Laplacian, mixed Voronoi areas and discrete mean curvature."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .trimesh import MeshError, TriangleMesh


class ZeroAreaError(MeshError):
    pass


def cotangent_weights(mesh: TriangleMesh, positions=None) -> np.ndarray:
    """``cot`` of the angle at each corner, shape ``(F, 3)``."""
    p = mesh.corners(positions)
    cot = np.empty((mesh.n_faces, 3))
    for i in range(3):
        u = p[(i + 1) % 3] - p[i]
        v = p[(i + 2) % 3] - p[i]
        cot[:, i] = np.einsum("ij,ij->i", u, v) / np.linalg.norm(np.cross(u, v), axis=1)
    return cot


def cotangent_stiffness(mesh: TriangleMesh, positions=None) -> sp.csr_matrix:
    """Positive semi-definite stiffness ``K`` with ``(K x)_i = 1/2 sum (cot a + cot b)(x_i - x_j)``."""
    cot = cotangent_weights(mesh, positions)
    F = mesh.faces
    rows, cols, vals = [], [], []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        w = 0.5 * cot[:, i]  # angle at i sits opposite edge (j, k)
        rows += [F[:, j], F[:, k], F[:, j], F[:, k]]
        cols += [F[:, k], F[:, j], F[:, j], F[:, k]]
        vals += [-w, -w, w, w]
    n = mesh.n_vertices
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def barycentric_mass(mesh: TriangleMesh, positions=None) -> np.ndarray:
    a = mesh.face_areas(positions) / 3.0
    return np.bincount(mesh.faces.ravel(), weights=np.repeat(a, 3), minlength=mesh.n_vertices)


def mixed_voronoi_areas(mesh: TriangleMesh, positions=None) -> np.ndarray:
    """Mixed Voronoi vertex areas (Voronoi cells, with the obtuse-triangle fallback)."""
    P = mesh.vertices if positions is None else positions
    F = mesh.faces
    cot = cotangent_weights(mesh, P)
    ang = mesh.corner_angles(P)
    area = mesh.face_areas(P)
    obtuse = ang > np.pi / 2
    any_obtuse = obtuse.any(axis=1)
    contrib = np.zeros((mesh.n_faces, 3))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        eij = np.sum((P[F[:, j]] - P[F[:, i]]) ** 2, axis=1)
        eik = np.sum((P[F[:, k]] - P[F[:, i]]) ** 2, axis=1)
        voronoi = (eij * cot[:, k] + eik * cot[:, j]) / 8.0
        contrib[:, i] = np.where(
            any_obtuse, np.where(obtuse[:, i], area / 2.0, area / 4.0), voronoi
        )
    return np.bincount(F.ravel(), weights=contrib.ravel(), minlength=mesh.n_vertices)


def angle_weighted_normals(mesh: TriangleMesh, positions=None) -> np.ndarray:
    n = mesh.face_normals(positions)
    ang = mesh.corner_angles(positions)
    out = np.zeros((mesh.n_vertices, 3))
    for i in range(3):
        np.add.at(out, mesh.faces[:, i], ang[:, [i]] * n)
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def outward_sign(mesh: TriangleMesh, positions=None) -> float:
    return 1.0 if mesh.signed_volume(positions) >= 0 else -1.0


def discrete_mean_curvature(mesh: TriangleMesh, positions=None) -> np.ndarray:
    """Signed vertex mean curvature ``|K x|_i / (2 A_i)``; the unit sphere gives +1.

    The sign compares the mean-curvature normal with the outward angle-weighted
    vertex normal; a vanishing curvature vector counts as positive.
    """
    P = mesh.vertices if positions is None else positions
    A = mixed_voronoi_areas(mesh, P)
    if np.any(A <= 0):
        raise ZeroAreaError(f"{int(np.sum(A <= 0))} vertices with zero area")
    Kx = cotangent_stiffness(mesh, P) @ P
    normals = outward_sign(mesh, P) * angle_weighted_normals(mesh, P)
    sign = np.where(np.einsum("ij,ij->i", Kx, normals) < 0, -1.0, 1.0)
    return sign * np.linalg.norm(Kx, axis=1) / (2.0 * A)
