"""Radial solutions of ``Delta u = u^(p-1)`` on balls and the classical Pohozaev identity.

With ``Delta = -sum d^2/dx_i^2`` a radial solution satisfies

    u'' + (n-1)/r u' + u^(p-1) = 0,   u(0) = alpha,  u'(0) = 0,

and on the ball ``B_R`` bounded by its first zero

    (1 - n/2 + n/p) int_B u^p = 1/2 int_{dB} <nu, X> (du/dnu)^2,   X = r d/dr.

For ``p >= 2n/(n-2)`` the left coefficient is non-positive while the right
side is positive, so no first zero can exist; shooting then runs to ``r_max``
without one, which is evidence but not proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .report import IdentityReport

R_START = 1e-4
RTOL = 1e-10
ATOL = 1e-12
ZERO_TOL = 1e-12
R_MAX = 1e3
H_MIN = 1e-14
MAX_STEPS = 10_000_000


class RadialError(ValueError):
    pass


class StepUnderflowError(RadialError):
    pass


class BlowUpError(RadialError):
    pass


class NoFirstZeroError(RadialError):
    pass


class InconsistentIdentityError(RadialError):
    """The identity was about to be reported with a left side of the wrong sign."""


@dataclass(frozen=True)
class RadialProblem:
    n: int
    p: float
    alpha: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise RadialError(f"dimension must be an integer >= 3, got {self.n}")
        if not self.p > 2:
            raise RadialError(f"exponent must exceed 2, got {self.p}")
        if not self.alpha > 0:
            raise RadialError(f"alpha must be positive, got {self.alpha}")

    @property
    def critical_exponent(self) -> float:
        return 2 * self.n / (self.n - 2)

    @property
    def coefficient(self) -> float:
        return 1 - self.n / 2 + self.n / self.p

    @property
    def sphere_area(self) -> float:
        """Area of the unit sphere in R^n."""
        return 2 * math.pi ** (self.n / 2) / math.gamma(self.n / 2)

    def scaled(self, lam: float) -> "RadialProblem":
        """Problem whose solution is ``lam^(2/(p-2)) u(lam r)``."""
        return RadialProblem(self.n, self.p, self.alpha * lam ** (2 / (self.p - 2)))


@dataclass
class RadialSolution:
    problem: RadialProblem
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    integral: np.ndarray  # int_0^r u^p s^(n-1) ds
    first_zero: Optional[float]
    du_at_zero: Optional[float] = None
    integral_at_zero: Optional[float] = None
    max_local_error: float = 0.0
    mode: str = "adaptive"
    step: Optional[float] = None
    r_max: float = R_MAX
    backend: str = field(default_factory=lambda: kernels.BACKEND)

    @property
    def energy(self) -> np.ndarray:
        """``u'^2/2 + u^p/p``, nonincreasing along the solution."""
        return 0.5 * self.du**2 + self.u**self.problem.p / self.problem.p

    def energy_monotone(self, rtol: float = 1e-12) -> bool:
        E = self.energy
        return bool(np.all(np.diff(E) <= rtol * E[0]))

    def decreasing(self) -> bool:
        return bool(np.all(self.du[1:] < 0))


def taylor_start(prob: RadialProblem, r0: float = R_START) -> tuple[float, float, float]:
    """``(u, u', I)`` at ``r0`` from the regular expansion ``alpha + a r^2 + b r^4``."""
    n, p, al = prob.n, prob.p, prob.alpha
    a = -(al ** (p - 1)) / (2 * n)
    b = (p - 1) * al ** (2 * p - 3) / (8 * n * (n + 2))
    u = al + a * r0**2 + b * r0**4
    du = 2 * a * r0 + 4 * b * r0**3
    I = al**p * r0**n / n + p * al ** (p - 1) * a * r0 ** (n + 2) / (n + 2)
    return u, du, I


def _bisect_zero(kern, prob, r, u, v, I, h, tol=ZERO_TOL):
    """Root of ``u`` inside one step, each trial a single step from the last node."""
    lo, hi = 0.0, h
    n, p = float(prob.n), float(prob.p)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if kern.dp45_step(n, p, r, u, v, I, mid)[0] > 0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    un, vn, In = kern.dp45_step(n, p, r, u, v, I, s)[:3]
    return r + s, vn, In


def shoot(
    prob: RadialProblem,
    r_max: float = R_MAX,
    step: Optional[float] = None,
    rtol: float = RTOL,
    atol: float = ATOL,
    backend: Optional[str] = None,
) -> RadialSolution:
    """Integrate outward from the centre until the first zero or ``r_max``.

    Parameters
    ----------
    prob : RadialProblem
    r_max : float
    step : float, optional
        Fixed step size.  The default is adaptive Dormand-Prince 5(4) with
        tolerances ``rtol``/``atol``.
    backend : {"cython", "python"}, optional
        Kernel to use; the default is the one selected at import.

    Raises
    ------
    StepUnderflowError, BlowUpError
    """
    if not r_max > R_START:
        raise RadialError(f"r_max must exceed {R_START}")
    kern = kernels if backend is None else kernels.load_backend(backend)
    u0, v0, I0 = taylor_start(prob)
    fixed = step is not None
    h0 = step if fixed else 1e-3
    rs, us, vs, Is, errs, status, h_last = kern.integrate(
        float(prob.n), float(prob.p), R_START, u0, v0, I0, float(r_max),
        rtol, atol, h0, fixed, H_MIN, MAX_STEPS,
    )
    if status == kernels.UNDERFLOW:
        raise StepUnderflowError(f"step size underflow at r = {rs[-1]:.6g}")
    if status == kernels.BLOWUP:
        raise BlowUpError(f"solution blew up near r = {rs[-1]:.6g}")
    if status == kernels.MAX_STEPS:
        raise StepUnderflowError(f"step budget exhausted at r = {rs[-1]:.6g}")
    sol = RadialSolution(
        prob, np.array(rs), np.array(us), np.array(vs), np.array(Is), None,
        max_local_error=float(max(errs)),
        mode="fixed" if fixed else "adaptive",
        step=step,
        r_max=float(r_max),
        backend=backend or kernels.BACKEND,
    )
    if status == kernels.CROSSED:
        R, dR, IR = _bisect_zero(kern, prob, rs[-1], us[-1], vs[-1], Is[-1], h_last)
        sol.first_zero, sol.du_at_zero, sol.integral_at_zero = R, dR, IR
    return sol


def verify_pohozaev(sol: RadialSolution) -> IdentityReport:
    """Both sides of the Pohozaev identity on the ball bounded by the first zero.

    Raises
    ------
    NoFirstZeroError
        If the solution stayed positive up to ``r_max``.
    InconsistentIdentityError
        If the left side has the wrong sign for a positive right side.
    """
    prob = sol.problem
    if sol.first_zero is None:
        raise NoFirstZeroError(
            f"no first zero found up to r = {sol.r_max:g} (n={prob.n}, p={prob.p}, alpha={prob.alpha})"
        )
    w = prob.sphere_area
    R = sol.first_zero
    lhs = prob.coefficient * w * sol.integral_at_zero
    rhs = 0.5 * R * sol.du_at_zero**2 * w * R ** (prob.n - 1)
    if prob.coefficient <= 0 and rhs > 0:
        raise InconsistentIdentityError(
            f"coefficient 1 - n/2 + n/p = {prob.coefficient:.6g} <= 0 but a first zero was reported at R = {R:.6g}"
        )
    return IdentityReport(
        "pohozaev",
        {"lhs": lhs, "rhs": rhs, "R": R, "du_at_R": sol.du_at_zero, "integral": w * sol.integral_at_zero,
         "coefficient": prob.coefficient},
        lhs - rhs,
        max(abs(lhs), abs(rhs)),
        {"mode": sol.mode, "step": sol.step, "nodes": len(sol.r), "backend": sol.backend},
        {"max_local_error": sol.max_local_error},
    )
