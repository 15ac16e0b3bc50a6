"""Discrete obstruction integral on a mesh with a spherical parametrization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sphere import ConformalField, ResidualReport, normalize, residual_from_samples
from .ddg import discrete_mean_curvature
from .trimesh import MeshError, TriangleMesh, icosphere


class FlippedTriangleError(MeshError):
    pass


@dataclass(frozen=True, eq=False)
class SphericalParametrization:
    """Unit vectors on S^2, one per mesh vertex, with flow diagnostics."""

    points: np.ndarray
    distortion: float = 0.0
    steps: int = 0
    history: tuple = ()

    def flipped(self, faces) -> np.ndarray:
        """Mask of spherical triangles whose orientation disagrees with the majority."""
        p0, p1, p2 = (self.points[faces[:, i]] for i in range(3))
        det = np.einsum("ij,ij->i", p0, np.cross(p1, p2))
        ref = 1.0 if np.sum(det > 0) >= np.sum(det < 0) else -1.0
        return ref * det <= 0


def sample_family_mesh(family, subdivisions: int):
    """Image mesh of an analytic family on an icosphere, with the exact parametrization."""
    sphere = icosphere(subdivisions)
    image = TriangleMesh(family.position_points(sphere.vertices), sphere.faces)
    return image, SphericalParametrization(sphere.vertices.copy())


def face_gradients(points: np.ndarray, faces: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Gradient of the piecewise-linear interpolant on each flat triangle."""
    p0, p1, p2 = (points[faces[:, i]] for i in range(3))
    n = np.cross(p1 - p0, p2 - p0)
    twice_area = np.linalg.norm(n, axis=1, keepdims=True)
    n = n / twice_area
    # centring per face makes constants have exactly zero gradient
    vals = values[faces]
    vals = vals - vals.mean(axis=1, keepdims=True)
    g = np.zeros((len(faces), 3))
    for i, (a, b) in enumerate(((p1, p2), (p2, p0), (p0, p1))):
        # edge opposite corner i, rotated into the plane
        g += vals[:, i][:, None] * np.cross(n, b - a)
    return g / twice_area


def mesh_obstruction_residual(
    mesh: TriangleMesh,
    param: SphericalParametrization,
    X: ConformalField,
    H: np.ndarray | None = None,
) -> ResidualReport:
    """Sum over faces of ``(grad H . X)`` times the image face area.

    ``grad H`` is the linear gradient on each spherical triangle and ``X`` is
    evaluated at the projected face barycenter.
    """
    flips = param.flipped(mesh.faces)
    if np.any(flips):
        raise FlippedTriangleError(f"{int(flips.sum())} flipped triangles under the parametrization")
    if H is None:
        H = discrete_mean_curvature(mesh)
    grads = face_gradients(param.points, mesh.faces, H)
    centers = normalize(param.points[mesh.faces].mean(axis=1))
    dH = np.einsum("ij,ij->i", grads, X(centers))
    areas = mesh.face_areas()
    bound = np.linalg.norm(grads, axis=1) * np.linalg.norm(X(centers), axis=1)
    return residual_from_samples(dH, areas, scale=float(areas @ bound))
