"""Closed-form conformal immersions S^2 -> R^3.

Each family evaluates the immersion ``f``, its mean curvature ``H`` and the
area density ``w`` of ``f*(dmu)`` against the round measure. Positions are
written with the hyper-dual helpers so that fundamental forms, conformality
checks and gradients of ``H`` come from forward-mode differentiation.

Sign convention: ``H = (k1 + k2) / 2`` with respect to the outward normal
(the one making the enclosed signed volume positive), so a round sphere of
radius ``R`` has ``H = +1/R``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import hyperdual as hd
from .sphere import ScalarField, as_points, build_quadrature, tangent_frame

H_CONVENTION = "H = (k1 + k2)/2, outward normal; round sphere of radius R has H = +1/R"

_GL_X, _GL_W = leggauss(48)


class DegenerateImmersionError(ValueError):
    pass


class InadmissibleProfileError(ValueError):
    pass


def _components(x):
    if isinstance(x, (tuple, list)):
        return tuple(x)
    x = as_points(x)
    return x[:, 0], x[:, 1], x[:, 2]


def _stack(comps) -> np.ndarray:
    return np.column_stack([np.broadcast_to(hd.value(c), np.shape(hd.value(comps[0]))) for c in comps])


class RoundSphere:
    def __init__(self, radius: float = 1.0):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)

    def descriptor(self) -> str:
        return f"round:{self.radius:g}"

    def position(self, x):
        x1, x2, x3 = _components(x)
        R = self.radius
        return x1 * R, x2 * R, x3 * R

    def mean_curvature(self, x):
        x3 = _components(x)[2]
        return 0.0 * x3 + 1.0 / self.radius

    def area_density(self, x):
        return np.full(np.shape(hd.value(_components(x)[2])), self.radius**2)


class RevolutionProfile:
    """Surface of revolution conformal to the round sphere with factor ``lam(x3)``.

    ``lam(c) = 1 + eps (1 - c^2)^2 (1 + tilt c)`` with ``c = cos(theta)``.
    ``r = lam sin(theta)`` and the height ``Z(c) = int_c^1 sqrt(Q)`` where
    ``Q = lam^2 + 2 c lam lam_c - (1 - c^2) lam_c^2 = (lam^2 - r'^2) / sin^2``,
    so the profile is an immersion iff ``Q > 0``. The tilt breaks the
    ``x3 -> -x3`` symmetry.
    """

    CHECK_POINTS = 10_000
    TILT = 0.5

    def __init__(self, eps: float, tilt: float = TILT):
        self.eps = float(eps)
        self.tilt = float(tilt)
        c = np.linspace(-1.0, 1.0, self.CHECK_POINTS)
        if np.min(self._lam(c)) <= 0:
            raise InadmissibleProfileError(f"conformal factor not positive for eps={eps}")
        if np.min(self._Q(c)) <= 0:
            raise InadmissibleProfileError(
                f"eps={eps} violates lam^2 - r'^2 > 0 (profile cannot close up as an immersion)"
            )

    def descriptor(self) -> str:
        return f"revolution:{self.eps:g}"

    def _lam(self, c):
        u = 1 - c * c
        return 1 + self.eps * u * u * (1 + self.tilt * c)

    def _lam_c(self, c):
        u = 1 - c * c
        k = self.tilt
        return self.eps * (-4 * c * u * (1 + k * c) + k * u * u)

    def _lam_cc(self, c):
        u = 1 - c * c
        k = self.tilt
        return -4 * self.eps * ((u - 2 * c * c) * (1 + k * c) + 2 * k * c * u)

    def _Q(self, c):
        lam, lc = self._lam(c), self._lam_c(c)
        return lam * lam + 2 * c * lam * lc - (1 - c * c) * lc * lc

    def _Q_c(self, c):
        lam, lc, lcc = self._lam(c), self._lam_c(c), self._lam_cc(c)
        return 4 * lam * lc + 4 * c * lc * lc + 2 * c * lam * lcc - 2 * (1 - c * c) * lc * lcc

    def conformal_factor(self, x3):
        return self._lam(x3)

    def _height(self, t):
        # Z(t) = int_t^1 sqrt(Q(s)) ds, Z(1) = 0 at the pole x3 = 1 (theta = 0)
        t = np.asarray(t, dtype=float)
        half = 0.5 * (1.0 - t)[..., None]
        s = t[..., None] + half * (_GL_X + 1.0)
        return np.sum(_GL_W * np.sqrt(self._Q(s)), axis=-1) * half[..., 0]

    def height(self, x3):
        return hd.apply_primitive(
            x3,
            self._height,
            lambda t: -np.sqrt(self._Q(t)),
            lambda t: -self._Q_c(t) / (2 * np.sqrt(self._Q(t))),
        )

    def position(self, x):
        x1, x2, x3 = _components(x)
        lam = self.conformal_factor(x3)
        return x1 * lam, x2 * lam, self.height(x3)

    def mean_curvature(self, x):
        c = _components(x)[2]
        u = 1 - c * c
        lam, lc, lcc = self._lam(c), self._lam_c(c), self._lam_cc(c)
        Q, Qc = self._Q(c), self._Q_c(c)
        sq = hd.sqrt(Q)
        # (r' z'' - z' r'') sqrt(Q) / sin^2 ... written so that nothing divides by sin(theta)
        num = (lam * c - u * lc) * (c * Q - u * Qc * 0.5) + u * Q * (lam + 3 * c * lc - u * lcc)
        meridian = num / (sq * lam**3)
        parallel = sq / lam**2
        return (meridian + parallel) * 0.5

    def area_density(self, x):
        c = hd.value(_components(x)[2])
        return self.conformal_factor(c) ** 2


class Ellipsoid:
    """Axis-aligned ellipsoid ``x -> diag(axes) x``; NOT conformal unless all axes agree."""

    def __init__(self, axes: Sequence[float]):
        self.axes = tuple(float(a) for a in axes)

    def descriptor(self) -> str:
        return "ellipsoid:" + ",".join(f"{a:g}" for a in self.axes)

    def position(self, x):
        x1, x2, x3 = _components(x)
        a, b, c = self.axes
        return x1 * a, x2 * b, x3 * c


@dataclass(frozen=True)
class MobiusMap:
    """Sphere map induced by ``z -> (a z + b) / (c z + d)`` in stereographic coordinates."""

    a: complex = 1.0
    b: complex = 0.0
    c: complex = 0.0
    d: complex = 1.0

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-12:
            raise ValueError(f"Mobius matrix must have determinant 1, got {det}")

    @classmethod
    def translation(cls, b: complex) -> "MobiusMap":
        return cls(1.0, complex(b), 0.0, 1.0)

    @property
    def is_identity(self) -> bool:
        return self.a == 1 and self.b == 0 and self.c == 0 and self.d == 1

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def to_dict(self) -> dict:
        return {k: [complex(getattr(self, k)).real, complex(getattr(self, k)).imag] for k in "abcd"}

    def apply(self, x):
        """Image of points ``x`` (array or hyper-dual components)."""
        x1, x2, x3 = _components(x)
        north = hd.value(x3) <= 0
        with np.errstate(divide="ignore", invalid="ignore"):
            # north chart z = (x1 + i x2) / (1 - x3)
            z = (x1 + x2 * 1j) / (1 - x3)
            zn = (z * self.a + self.b) / (z * self.c + self.d)
            r2 = (zn * hd.conj(zn)).real
            img_n = ((zn.real * 2) / (r2 + 1), (zn.imag * 2) / (r2 + 1), (r2 - 1) / (r2 + 1))
            # south chart w = (x1 - i x2) / (1 + x3) = 1 / z
            w = (x1 - x2 * 1j) / (1 + x3)
            ws = (w * self.d + self.c) / (w * self.b + self.a)
            s2 = (ws * hd.conj(ws)).real
            img_s = ((ws.real * 2) / (s2 + 1), (ws.imag * -2) / (s2 + 1), (1 - s2) / (s2 + 1))
        return tuple(_select(north, n, s) for n, s in zip(img_n, img_s))

    def apply_points(self, x) -> np.ndarray:
        return _stack(self.apply(x))

    def conformal_factor(self, x) -> np.ndarray:
        """Pointwise scale ``mu`` with ``m*(g_round) = mu^2 g_round``."""
        x = as_points(x)
        x1, x2, x3 = x.T
        north = x3 <= 0
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (x1 + 1j * x2) / (1 - x3)
            mz = (self.a * z + self.b) / (self.c * z + self.d)
            mu_n = np.abs(1.0 / (self.c * z + self.d) ** 2) * (1 + np.abs(z) ** 2) / (1 + np.abs(mz) ** 2)
            w = (x1 - 1j * x2) / (1 + x3)
            mw = (self.d * w + self.c) / (self.b * w + self.a)
            mu_s = np.abs(1.0 / (self.b * w + self.a) ** 2) * (1 + np.abs(w) ** 2) / (1 + np.abs(mw) ** 2)
        return np.where(north, mu_n, mu_s)


def _select(mask, u, v):
    if isinstance(u, hd.HyperDual) or isinstance(v, hd.HyperDual):
        u = u if isinstance(u, hd.HyperDual) else hd.HyperDual(u)
        v = v if isinstance(v, hd.HyperDual) else hd.HyperDual(v)
        return hd.HyperDual(*(np.where(mask, p, q) for p, q in zip((u.a, u.b, u.c, u.d), (v.a, v.b, v.c, v.d))))
    return np.where(mask, u, v)


_POLE_CHART = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])  # sends e3 to e1


def chart_coordinates(x):
    """Spherical chart angles and chart rotation for each point (rotated near the poles)."""
    x = as_points(x)
    use_rot = np.abs(x[:, 2]) > 0.9
    s = np.where(use_rot[:, None], x @ _POLE_CHART, x)
    theta = np.arccos(np.clip(s[:, 2], -1.0, 1.0))
    phi = np.arctan2(s[:, 1], s[:, 0])
    return theta, phi, use_rot


def _chart_point(theta, phi, use_rot):
    st, ct = hd.sin(theta), hd.cos(theta)
    sp, cp = hd.sin(phi), hd.cos(phi)
    s = (st * cp, st * sp, ct)
    rotated = tuple(sum(s[j] * _POLE_CHART[i, j] for j in range(3) if _POLE_CHART[i, j] != 0) for i in range(3))
    return tuple(_select(use_rot, r, p) for r, p in zip(rotated, s))


@dataclass(frozen=True)
class FundamentalForms:
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    L: np.ndarray
    M: np.ndarray
    N: np.ndarray
    sin_theta: np.ndarray

    @property
    def area_density(self) -> np.ndarray:
        return np.sqrt(self.E * self.G - self.F**2) / self.sin_theta

    @property
    def mean_curvature(self) -> np.ndarray:
        return -(self.E * self.N - 2 * self.F * self.M + self.G * self.L) / (2 * (self.E * self.G - self.F**2))

    @property
    def conformality_defect(self) -> np.ndarray:
        iso = np.abs(self.E - self.G / self.sin_theta**2)
        return np.maximum(iso, np.abs(self.F)) / self.E


class ImmersionFamily:
    """A base immersion optionally precomposed with a Mobius map of the sphere."""

    def __init__(self, base, mobius: Optional[MobiusMap] = None, scale: float = 1.0):
        self.base = base
        self.mobius = None if mobius is None or mobius.is_identity else mobius
        self.scale = float(scale)

    # construction ----------------------------------------------------------
    @classmethod
    def round(cls, radius: float = 1.0) -> "ImmersionFamily":
        return cls(RoundSphere(radius))

    @classmethod
    def revolution(cls, eps: float) -> "ImmersionFamily":
        return cls(RevolutionProfile(eps))

    @classmethod
    def parse(cls, family: str, mobius: Optional[str] = None) -> "ImmersionFamily":
        """Parse ``round:R`` / ``revolution:EPS`` plus an optional ``RE,IM`` Mobius entry."""
        kind, _, arg = family.partition(":")
        if kind == "round":
            fam = cls.round(float(arg) if arg else 1.0)
        elif kind == "revolution":
            fam = cls.revolution(float(arg))
        elif kind == "ellipsoid":
            fam = cls(Ellipsoid([float(a) for a in arg.split(",")]))
        else:
            raise ValueError(f"unknown family {family!r}")
        if mobius:
            re, im = (float(v) for v in mobius.split(","))
            fam = fam.compose_mobius(MobiusMap.translation(complex(re, im)))
        return fam

    def compose_mobius(self, m: MobiusMap) -> "ImmersionFamily":
        if self.mobius is None:
            return ImmersionFamily(self.base, m, self.scale)
        # (f o m1) o m2 = f o (m1 o m2)
        m1 = self.mobius
        composed = MobiusMap(
            m1.a * m.a + m1.b * m.c,
            m1.a * m.b + m1.b * m.d,
            m1.c * m.a + m1.d * m.c,
            m1.c * m.b + m1.d * m.d,
        )
        return ImmersionFamily(self.base, composed, self.scale)

    def scaled(self, s: float) -> "ImmersionFamily":
        return ImmersionFamily(self.base, self.mobius, self.scale * s)

    def descriptor(self) -> dict:
        return {
            "family": self.base.descriptor(),
            "mobius": None if self.mobius is None else self.mobius.to_dict(),
            "scale": self.scale,
        }

    # evaluation ------------------------------------------------------------
    def _pre(self, x):
        return self.mobius.apply(x) if self.mobius is not None else _components(x)

    def position(self, x):
        return tuple(c * self.scale for c in self.base.position(self._pre(x)))

    def position_points(self, x) -> np.ndarray:
        return _stack(self.position(x))

    @property
    def has_closed_form(self) -> bool:
        return hasattr(self.base, "mean_curvature")

    def _mean_curvature_expr(self, x):
        return self.base.mean_curvature(self._pre(x)) * (1.0 / self.scale)

    def mean_curvature(self, x) -> np.ndarray:
        x = as_points(x)
        if self.has_closed_form:
            return np.broadcast_to(np.asarray(self._mean_curvature_expr(x), float), (len(x),)).copy()
        return self.fundamental_forms(x).mean_curvature * self.orientation

    def area_density(self, x) -> np.ndarray:
        x = as_points(x)
        if not hasattr(self.base, "area_density"):
            return self.fundamental_forms(x).area_density
        y = self.mobius.apply_points(x) if self.mobius is not None else x
        w = self.base.area_density(y) * self.scale**2
        if self.mobius is not None:
            w = w * self.mobius.conformal_factor(x) ** 2
        if np.any(w <= 0):
            raise DegenerateImmersionError("area density vanishes")
        return np.asarray(w, float)

    def mean_curvature_gradient(self, x) -> np.ndarray:
        """Tangential gradient of ``H`` by forward-mode differentiation."""
        x = as_points(x)
        grad = np.zeros_like(x)
        zero = np.zeros(len(x))
        for e in tangent_frame(x):
            comps = tuple(hd.HyperDual(x[:, i], e[:, i], zero, zero) for i in range(3))
            out = self._mean_curvature_expr(comps)
            grad += np.asarray(out.b)[:, None] * e if isinstance(out, hd.HyperDual) else 0.0
        return grad

    def H_field(self) -> ScalarField:
        grad = self.mean_curvature_gradient if self.has_closed_form else None
        return ScalarField(self.mean_curvature, grad, "mean-curvature", self.descriptor())

    def w_field(self) -> ScalarField:
        return ScalarField(self.area_density, None, "area-density", self.descriptor())

    # differential geometry through a chart ---------------------------------
    def _chart_derivatives(self, x):
        theta, phi, use_rot = chart_coordinates(x)
        d = hd.second_partials(lambda t, p: self.position(_chart_point(t, p, use_rot)), theta, phi)
        return d, np.sin(theta)

    def fundamental_forms(self, x) -> FundamentalForms:
        d, st = self._chart_derivatives(x)
        ft, fp = d["p"], d["q"]
        dot = lambda u, v: np.einsum("ij,ij->i", u, v)
        E, F, G = dot(ft, ft), dot(ft, fp), dot(fp, fp)
        if np.any(E * G - F**2 <= 0):
            raise DegenerateImmersionError("first fundamental form degenerates")
        n = np.cross(ft, fp)
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        L, M, N = dot(d["pp"], n), dot(d["pq"], n), dot(d["qq"], n)
        return FundamentalForms(E, F, G, L, M, N, st)

    @cached_property
    def orientation(self) -> float:
        """+1 if the chart normal ``f_theta x f_phi`` is outward, else -1."""
        q = build_quadrature(2, 24)
        d, st = self._chart_derivatives(q.nodes)
        # signed volume (1/3) int f . (f_theta x f_phi) dtheta dphi
        integrand = np.einsum("ij,ij->i", d["f"], np.cross(d["p"], d["q"])) / st
        vol = q.weights @ integrand / 3.0
        return 1.0 if vol > 0 else -1.0

    def conformality_defect(self, x) -> np.ndarray:
        return self.fundamental_forms(x).conformality_defect

    def surface_area(self, degree: int = 128) -> float:
        q = build_quadrature(2, degree)
        return q.integrate(self.area_density(q.nodes))
