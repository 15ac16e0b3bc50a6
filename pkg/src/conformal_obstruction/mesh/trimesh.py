"""Closed, oriented genus-0 triangle meshes: validation, OBJ I/O and icospheres."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

MIN_ANGLE = 1e-3


class MeshError(ValueError):
    pass


class ObjParseError(MeshError):
    pass


class NonManifoldError(MeshError):
    pass


class GenusError(MeshError):
    pass


class DegenerateTriangleError(MeshError):
    pass


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.ascontiguousarray(self.vertices, dtype=float))
        object.__setattr__(self, "faces", np.ascontiguousarray(self.faces, dtype=np.int64))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted index pairs."""
        e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + self.n_faces

    def corners(self, positions=None):
        P = self.vertices if positions is None else positions
        return P[self.faces[:, 0]], P[self.faces[:, 1]], P[self.faces[:, 2]]

    def face_normals(self, positions=None, unit: bool = True) -> np.ndarray:
        p0, p1, p2 = self.corners(positions)
        n = np.cross(p1 - p0, p2 - p0)
        if unit:
            n = n / np.linalg.norm(n, axis=1, keepdims=True)
        return n

    def face_areas(self, positions=None) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_normals(positions, unit=False), axis=1)

    def corner_angles(self, positions=None) -> np.ndarray:
        """Interior angle at each corner, shape ``(F, 3)``."""
        p = self.corners(positions)
        out = np.empty((self.n_faces, 3))
        for i in range(3):
            u = p[(i + 1) % 3] - p[i]
            v = p[(i + 2) % 3] - p[i]
            cross = np.linalg.norm(np.cross(u, v), axis=1)
            out[:, i] = np.arctan2(cross, np.einsum("ij,ij->i", u, v))
        return out

    def signed_volume(self, positions=None) -> float:
        p0, p1, p2 = self.corners(positions)
        return float(np.einsum("ij,ij->i", p0, np.cross(p1, p2)).sum() / 6.0)

    def with_vertices(self, vertices) -> "TriangleMesh":
        return TriangleMesh(vertices, self.faces)


def validate(mesh: TriangleMesh, min_angle: float = MIN_ANGLE) -> TriangleMesh:
    """Check that ``mesh`` is a closed, consistently oriented genus-0 manifold."""
    F = mesh.faces
    if F.ndim != 2 or F.shape[1] != 3 or len(F) == 0:
        raise MeshError("faces must be a non-empty (F, 3) index array")
    if F.min() < 0 or F.max() >= mesh.n_vertices:
        raise MeshError("face index out of range")
    if np.any((F[:, 0] == F[:, 1]) | (F[:, 1] == F[:, 2]) | (F[:, 2] == F[:, 0])):
        raise DegenerateTriangleError("triangle with repeated vertex")

    directed = np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])
    undirected = Counter(map(tuple, np.sort(directed, axis=1).tolist()))
    bad = [e for e, k in undirected.items() if k != 2]
    if bad:
        raise NonManifoldError(f"{len(bad)} edges not shared by exactly two faces, e.g. {bad[0]}")
    dcount = Counter(map(tuple, directed.tolist()))
    if any(k != 1 for k in dcount.values()):
        raise NonManifoldError("inconsistent face orientation")

    used = np.unique(F)
    if len(used) != mesh.n_vertices:
        raise MeshError(f"{mesh.n_vertices - len(used)} unreferenced vertices")
    _check_vertex_fans(F, mesh.n_vertices)

    chi = mesh.euler_characteristic
    if chi != 2:
        raise GenusError(f"Euler characteristic {chi} != 2 (genus {(2 - chi) / 2:g}); only genus 0 is supported")

    smallest = float(mesh.corner_angles().min())
    if not smallest > min_angle:
        raise DegenerateTriangleError(f"minimum corner angle {smallest:.3e} rad <= {min_angle}")
    return mesh


def _check_vertex_fans(F: np.ndarray, n_vertices: int) -> None:
    # the link of every vertex must be a single cycle
    nxt: dict[tuple[int, int], int] = {}
    count = np.zeros(n_vertices, dtype=int)
    for a, b, c in F.tolist():
        nxt[(a, b)] = c
        nxt[(b, c)] = a
        nxt[(c, a)] = b
        count[a] += 1
        count[b] += 1
        count[c] += 1
    start: dict[int, int] = {}
    for (v, w) in nxt:
        start.setdefault(v, w)
    for v, w0 in start.items():
        w, steps = w0, 0
        while True:
            w = nxt[(v, w)]
            steps += 1
            if w == w0 or steps > count[v]:
                break
        if steps != count[v]:
            raise NonManifoldError(f"vertex {v} is not manifold (link has several components)")


def load_obj(path) -> TriangleMesh:
    """Read ``v``/``f`` records of an ASCII OBJ file and validate the result."""
    verts, faces = [], []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ObjParseError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        try:
            if parts[0] == "v":
                verts.append([float(t) for t in parts[1:4]])
                if len(parts) < 4:
                    raise ValueError("vertex needs 3 coordinates")
            elif parts[0] == "f":
                idx = [int(t.split("/")[0]) for t in parts[1:]]
                if len(idx) < 3:
                    raise ValueError("face needs at least 3 vertices")
                idx = [i - 1 if i > 0 else len(verts) + i for i in idx]
                faces.extend([idx[0], idx[k], idx[k + 1]] for k in range(1, len(idx) - 1))
        except ValueError as exc:
            raise ObjParseError(f"{path}:{lineno}: {exc}") from exc
    if not verts or not faces:
        raise ObjParseError(f"{path}: no vertices or faces")
    return validate(TriangleMesh(np.array(verts), np.array(faces)))


def write_obj(mesh: TriangleMesh, path) -> None:
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def icosahedron() -> TriangleMesh:
    t = (1 + 5**0.5) / 2
    v = np.array(
        [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
         [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
         [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]], dtype=float,
    )
    f = np.array(
        [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
         [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
         [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
         [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]],
    )
    return TriangleMesh(v / np.linalg.norm(v, axis=1, keepdims=True), f)


def subdivide(mesh: TriangleMesh, project: bool = True) -> TriangleMesh:
    """Loop-free 1-to-4 midpoint subdivision, optionally projected to the unit sphere."""
    F = mesh.faces
    e = np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])
    uniq, inv = np.unique(np.sort(e, axis=1), axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    mids = 0.5 * (mesh.vertices[uniq[:, 0]] + mesh.vertices[uniq[:, 1]])
    V = np.vstack([mesh.vertices, mids])
    if project:
        V = V / np.linalg.norm(V, axis=1, keepdims=True)
    nF = len(F)
    m01, m12, m20 = (mesh.n_vertices + inv[k * nF:(k + 1) * nF] for k in range(3))
    a, b, c = F[:, 0], F[:, 1], F[:, 2]
    faces = np.concatenate(
        [np.column_stack(t) for t in ((a, m01, m20), (b, m12, m01), (c, m20, m12), (m01, m12, m20))]
    )
    return TriangleMesh(V, faces)


def icosphere(subdivisions: int = 0, radius: float = 1.0) -> TriangleMesh:
    mesh = icosahedron()
    for _ in range(subdivisions):
        mesh = subdivide(mesh)
    return mesh.with_vertices(radius * mesh.vertices)


def torus(R: float = 2.0, r: float = 0.7, n_major: int = 24, n_minor: int = 12) -> TriangleMesh:
    u = 2 * np.pi * np.arange(n_major) / n_major
    v = 2 * np.pi * np.arange(n_minor) / n_minor
    U, Vv = np.meshgrid(u, v, indexing="ij")
    pts = np.column_stack([
        ((R + r * np.cos(Vv)) * np.cos(U)).ravel(),
        ((R + r * np.cos(Vv)) * np.sin(U)).ravel(),
        (r * np.sin(Vv)).ravel(),
    ])
    idx = lambda i, j: (i % n_major) * n_minor + (j % n_minor)
    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            faces += [[a, b, c], [a, c, d]]
    return TriangleMesh(pts, np.array(faces))
