"""Independent reference values and oracle computations.

Nothing here calls into the code under test except for plain position maps.
"""

import math

import numpy as np
from scipy.stats import qmc

# int_{S^2} (1 - x3^2) dnu
EIGHT_PI_THIRDS = 8 * math.pi / 3
FOUR_PI = 4 * math.pi
# first zero of the Lane-Emden function of index 3 (u'' + 2u'/r + u^3 = 0, u(0) = 1)
LANE_EMDEN_3_XI1 = 6.89684862
# Revolution(0.3) area density on the equator: lambda(pi/2)^2
EQUATOR_DENSITY_03 = 1.3**2
# icosahedron counts
ICOSAHEDRON_VEF = (12, 30, 20)


def aubin_talenti(r):
    """Exact radial solution of u'' + 2u'/r + u^5 = 0 with u(0) = 1."""
    return (1 + np.asarray(r) ** 2 / 3) ** -0.5


def _sphere_point(theta, phi):
    return np.column_stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def monte_carlo_area(position, n: int = 2**17, seed: int = 7, h: float = 1e-6) -> float:
    """Area of ``position(S^2)`` from scrambled Sobol points on the sphere.

    The Jacobian ``|f_theta x f_phi| / sin(theta)`` is obtained by central
    differences of the position map in spherical coordinates.
    """
    u = qmc.Sobol(d=2, scramble=True, seed=seed).random(n)
    theta = np.arccos(1 - 2 * u[:, 0])
    phi = 2 * np.pi * u[:, 1]
    keep = (theta > 1e-3) & (theta < np.pi - 1e-3)
    theta, phi = theta[keep], phi[keep]
    f = lambda t, p: position(_sphere_point(t, p))
    ft = (f(theta + h, phi) - f(theta - h, phi)) / (2 * h)
    fp = (f(theta, phi + h) - f(theta, phi - h)) / (2 * h)
    jac = np.linalg.norm(np.cross(ft, fp), axis=1) / np.sin(theta)
    return FOUR_PI * float(jac.mean())


def fd_mean_curvature(position, theta: float, phi: float, h: float = 1e-4) -> float:
    """|H| from second differences of the position map in spherical coordinates."""
    f = lambda t, p: position(_sphere_point(np.array([t]), np.array([p])))[0]
    ft = (f(theta + h, phi) - f(theta - h, phi)) / (2 * h)
    fp = (f(theta, phi + h) - f(theta, phi - h)) / (2 * h)
    ftt = (f(theta + h, phi) - 2 * f(theta, phi) + f(theta - h, phi)) / h**2
    fpp = (f(theta, phi + h) - 2 * f(theta, phi) + f(theta, phi - h)) / h**2
    ftp = (f(theta + h, phi + h) - f(theta + h, phi - h) - f(theta - h, phi + h) + f(theta - h, phi - h)) / (4 * h * h)
    n = np.cross(ft, fp)
    n /= np.linalg.norm(n)
    E, F, G = ft @ ft, ft @ fp, fp @ fp
    L, M, N = ftt @ n, ftp @ n, fpp @ n
    return abs((E * N - 2 * F * M + G * L) / (2 * (E * G - F * F)))


def sign_scan_x3_squared(n_nodes: int = 10_000, n_dirs: int = 1_000, seed: int = 3) -> float:
    """Largest over coefficient directions of min over nodes of d(x3^2)(X(c)).

    ``d(x3^2)(X) = 2 x3 (a3 - (a.x) x3 + (w x x)_3)`` for ``X = a - (a.x)x + w x x``.
    A negative result means every sampled direction changes sign.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_nodes, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    c = rng.standard_normal((n_dirs, 6))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    best = -np.inf
    for a, w in zip(c[:, :3], c[:, 3:]):
        X3 = a[2] - (x @ a) * x[:, 2] + np.cross(w, x)[:, 2]
        best = max(best, float(np.min(2 * x[:, 2] * X3)))
    return best
