"""Round-sphere calculus: conformal fields, quadrature and the obstruction integral.

Points on the unit sphere S^n are stored as rows of an ``(N, n+1)`` array.
Every conformal vector field of the round sphere is of the form

    X(x) = a - (a.x) x + A x,      A antisymmetric,

i.e. the tangential projection of a constant vector (a gradient field of the
linear function ``a.x``) plus an infinitesimal rotation.  Its conformal factor
is ``beta(x) = -(a.x)`` and ``div X = n * beta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

FD_STEP = 1e-5
# integrands with sum|dH(X)| w below this fraction of sum |grad H||X| w are rounding noise
NUMERICAL_ZERO = 1e-9
MAX_QUADRATURE_NODES = 2_000_000


class QuadratureBudgetError(ValueError):
    pass


class NonPositiveWeightError(ValueError):
    pass


def as_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[None, :] if x.ndim == 1 else x


def normalize(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def on_sphere(x, atol: float = 1e-12) -> bool:
    return bool(np.all(np.abs(np.linalg.norm(as_points(x), axis=-1) - 1.0) <= atol))


def tangent_frame(x) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal tangent frame ``(e1, e2)`` at points of S^2."""
    x = as_points(x)
    helper = np.where(np.abs(x[:, [2]]) < 0.9, [[0.0, 0.0, 1.0]], [[1.0, 0.0, 0.0]])
    e1 = normalize(np.cross(helper, x))
    e2 = np.cross(x, e1)
    return e1, e2


def geodesic(x, v, t):
    """Point at parameter ``t`` on the great circle through ``x`` with velocity ``v``."""
    x, v = as_points(x), as_points(v)
    speed = np.linalg.norm(v, axis=-1, keepdims=True)
    safe = np.where(speed > 0, speed, 1.0)
    out = np.cos(t * speed) * x + np.sin(t * speed) * v / safe
    return normalize(out)


def rotation_generator(axis) -> np.ndarray:
    """Antisymmetric matrix ``A`` with ``A x = axis x x``."""
    a1, a2, a3 = np.asarray(axis, dtype=float)
    return np.array([[0.0, -a3, a2], [a3, 0.0, -a1], [-a2, a1, 0.0]])


@dataclass(frozen=True)
class ConformalField:
    """Conformal vector field ``a - (a.x)x + A x`` on the unit sphere."""

    gradient: np.ndarray
    rotation: np.ndarray
    name: str = ""

    def __post_init__(self):
        a = np.asarray(self.gradient, dtype=float)
        A = np.asarray(self.rotation, dtype=float)
        if A.shape != (a.size, a.size):
            raise ValueError("rotation part must be a square matrix matching the gradient part")
        if np.any(A + A.T != 0.0):
            raise ValueError("rotation part must be exactly antisymmetric")
        object.__setattr__(self, "gradient", a)
        object.__setattr__(self, "rotation", A)

    @property
    def dim(self) -> int:
        return self.gradient.size - 1

    def __call__(self, x) -> np.ndarray:
        x = as_points(x)
        a, A = self.gradient, self.rotation
        return a[None, :] - (x @ a)[:, None] * x + x @ A.T

    def beta(self, x) -> np.ndarray:
        return -(as_points(x) @ self.gradient)

    def __add__(self, other: "ConformalField") -> "ConformalField":
        return ConformalField(self.gradient + other.gradient, self.rotation + other.rotation)

    def __mul__(self, s: float) -> "ConformalField":
        return ConformalField(s * self.gradient, s * self.rotation)

    __rmul__ = __mul__

    def conjugate(self, R) -> "ConformalField":
        """Field ``x -> R^T X(R x)``, the pullback of ``X`` under the rotation ``R``."""
        R = np.asarray(R, dtype=float)
        A = R.T @ self.rotation @ R
        A = 0.5 * (A - A.T)
        return ConformalField(R.T @ self.gradient, A, self.name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "gradient": self.gradient.tolist(),
            "rotation": self.rotation.tolist(),
        }


def gradient_field(i: int, dim: int = 2) -> ConformalField:
    a = np.zeros(dim + 1)
    a[i] = 1.0
    return ConformalField(a, np.zeros((dim + 1, dim + 1)), f"grad-x{i + 1}")


def rotation_field(i: int) -> ConformalField:
    axis = np.zeros(3)
    axis[i] = 1.0
    return ConformalField(np.zeros(3), rotation_generator(axis), f"rot-x{i + 1}")


def conformal_basis() -> list[ConformalField]:
    """The six generators ``grad x1, grad x2, grad x3, rot e1, rot e2, rot e3`` of S^2."""
    return [gradient_field(i) for i in range(3)] + [rotation_field(i) for i in range(3)]


FIELD_NAMES = [f.name for f in conformal_basis()]


def named_field(name: str) -> ConformalField:
    for f in conformal_basis():
        if f.name == name:
            return f
    raise KeyError(f"unknown conformal field {name!r}; choose from {FIELD_NAMES}")


def field_from_coefficients(c) -> ConformalField:
    c = np.asarray(c, dtype=float)
    a = c[:3].copy()
    A = rotation_generator(c[3:])
    return ConformalField(a, A)


def divergence_fd(X: ConformalField, x, h: float = 1e-4) -> np.ndarray:
    """Intrinsic divergence of ``X`` on S^2 by symmetric differences along geodesics."""
    x = as_points(x)
    div = np.zeros(len(x))
    for e in tangent_frame(x):
        fwd = X(geodesic(x, e, h))
        bwd = X(geodesic(x, e, -h))
        div += np.einsum("ij,ij->i", e, fwd - bwd) / (2 * h)
    return div


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    degree: int
    dim: int

    def __len__(self):
        return len(self.weights)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def build_quadrature(dim: int, degree: int, max_nodes: int = MAX_QUADRATURE_NODES) -> QuadratureRule:
    """Quadrature on S^dim exact for spherical harmonics up to ``degree``.

    S^2 uses Gauss-Legendre in ``cos(theta)`` times the trapezoid rule in
    ``phi``; S^1 uses the trapezoid rule.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    degree = max(int(degree), 1)
    if dim == 1:
        n = degree + 1
        if n > max_nodes:
            raise QuadratureBudgetError(f"degree {degree} needs {n} nodes > budget {max_nodes}")
        t = 2 * np.pi * np.arange(n) / n
        nodes = np.column_stack([np.cos(t), np.sin(t)])
        return QuadratureRule(nodes, np.full(n, 2 * np.pi / n), degree, 1)
    if dim != 2:
        raise NotImplementedError("only S^1 and S^2 are supported")
    n_theta = degree // 2 + 1
    n_phi = degree + 1
    if n_theta * n_phi > max_nodes:
        raise QuadratureBudgetError(
            f"degree {degree} needs {n_theta * n_phi} nodes > budget {max_nodes}"
        )
    z, wz = leggauss(n_theta)
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    Z, P = np.meshgrid(z, phi, indexing="ij")
    S = np.sqrt(1.0 - Z**2)
    nodes = np.column_stack([(S * np.cos(P)).ravel(), (S * np.sin(P)).ravel(), Z.ravel()])
    weights = np.outer(wz, np.full(n_phi, 2 * np.pi / n_phi)).ravel()
    return QuadratureRule(nodes, weights, degree, 2)


@dataclass(frozen=True)
class ScalarField:
    """A function on the sphere, vectorized over ``(N, 3)`` point arrays.

    ``gradient`` (optional) returns the tangential gradient as ``(N, 3)``.
    """

    value: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""
    params: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        x = as_points(x)
        return np.broadcast_to(np.asarray(self.value(x), dtype=float), (len(x),)).copy()

    def compose(self, R) -> "ScalarField":
        """``x -> self(R x)`` for a rotation matrix ``R``."""
        R = np.asarray(R, dtype=float)
        grad = None
        if self.gradient is not None:
            g = self.gradient
            grad = lambda x: g(as_points(x) @ R.T) @ R
        return ScalarField(lambda x: self.value(as_points(x) @ R.T), grad, self.name, self.params)


def constant_field(c: float = 1.0) -> ScalarField:
    return ScalarField(
        lambda x: np.full(len(x), float(c)),
        lambda x: np.zeros_like(as_points(x)),
        "constant",
        {"c": float(c)},
    )


def _coordinate_gradient(x, i: int) -> np.ndarray:
    x = as_points(x)
    e = np.zeros(x.shape[1])
    e[i] = 1.0
    return e[None, :] - x[:, [i]] * x


def x3_plus_c(c: float = 0.0) -> ScalarField:
    return ScalarField(
        lambda x: x[:, 2] + c,
        lambda x: _coordinate_gradient(x, 2),
        "x3-plus-c",
        {"c": float(c)},
    )


def x3_squared() -> ScalarField:
    return ScalarField(
        lambda x: x[:, 2] ** 2,
        lambda x: 2 * as_points(x)[:, [2]] * _coordinate_gradient(x, 2),
        "x3-squared",
        {},
    )


BUILTIN_FIELDS = {
    "x3-plus-c": lambda *p: x3_plus_c(*p),
    "constant": lambda *p: constant_field(*p),
    "x3-squared": lambda *p: x3_squared(*p),
}


def parse_scalar_field(spec: str) -> ScalarField:
    """Parse ``name[:p1,p2,...]`` against the built-in registry."""
    name, _, args = spec.partition(":")
    if name not in BUILTIN_FIELDS:
        raise KeyError(f"unknown scalar field {name!r}; choose from {sorted(BUILTIN_FIELDS)}")
    params = [float(a) for a in args.split(",") if a.strip()]
    return BUILTIN_FIELDS[name](*params)


def directional_derivative(H: ScalarField, X: ConformalField, x, h: float = FD_STEP) -> np.ndarray:
    """``dH(X)`` at ``x``: analytic gradient if available, else a geodesic central difference."""
    x = as_points(x)
    v = X(x)
    if H.gradient is not None:
        return np.einsum("ij,ij->i", H.gradient(x), v)
    return (H(geodesic(x, v, h)) - H(geodesic(x, v, -h))) / (2 * h)


@dataclass(frozen=True)
class ResidualReport:
    value: float
    normalizer: float
    relative: float
    exact_zero: bool
    nodes: int
    degree: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "normalizer": self.normalizer,
            "relative": self.relative,
            "exact_zero": self.exact_zero,
            "nodes": self.nodes,
            "degree": self.degree,
        }


def gradient_norm(H: ScalarField, x, h: float = FD_STEP) -> np.ndarray:
    x = as_points(x)
    if H.gradient is not None:
        return np.linalg.norm(H.gradient(x), axis=1)
    sq = np.zeros(len(x))
    for e in tangent_frame(x):
        sq += ((H(geodesic(x, e, h)) - H(geodesic(x, e, -h))) / (2 * h)) ** 2
    return np.sqrt(sq)


def residual_from_samples(integrand, weights, degree=None, scale=None) -> ResidualReport:
    """Integral, absolute normalizer and their ratio.

    ``scale`` bounds the normalizer from above; a normalizer below
    ``NUMERICAL_ZERO * scale`` is reported as the exact-zero case.
    """
    integrand = np.asarray(integrand, dtype=float)
    value = float(np.dot(weights, integrand))
    normalizer = float(np.dot(weights, np.abs(integrand)))
    if normalizer == 0.0 or (scale is not None and normalizer <= NUMERICAL_ZERO * scale):
        return ResidualReport(value, normalizer, 0.0, True, len(integrand), degree)
    return ResidualReport(value, normalizer, value / normalizer, False, len(integrand), degree)


def obstruction_residual(
    H: ScalarField, w: ScalarField, X: ConformalField, q: QuadratureRule
) -> ResidualReport:
    """Quadrature of ``dH(X) * w`` over the sphere, with its absolute normalizer.

    ``w`` is the density of the pulled-back area measure against the round one.
    For the mean curvature and area density of a conformal immersion the
    value vanishes.
    """
    density = w(q.nodes)
    if np.any(density <= 0):
        bad = int(np.argmin(density))
        raise NonPositiveWeightError(
            f"area density {density[bad]:.3e} <= 0 at node {bad} ({q.nodes[bad].tolist()})"
        )
    dH = directional_derivative(H, X, q.nodes)
    bound = gradient_norm(H, q.nodes) * np.linalg.norm(X(q.nodes), axis=1) * density
    return residual_from_samples(dH * density, q.weights, q.degree, float(q.weights @ bound))


def derivative_matrix(H: ScalarField, x, fields=None) -> np.ndarray:
    """Columns ``dH(X_k)`` at the points ``x`` for each field of the basis."""
    fields = conformal_basis() if fields is None else fields
    return np.column_stack([directional_derivative(H, X, x) for X in fields])
