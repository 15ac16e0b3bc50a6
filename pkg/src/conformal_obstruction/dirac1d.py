"""Nonlinear Dirac equation ``D psi = H |psi|^(p-2) psi`` in dimension one.

Spinors on a circle or an interval are complex functions.  The Clifford
action of the positively oriented unit vector is multiplication by ``-i``, so
``D = -i d/dt``, and the real inner product is ``<u, v> = Re(u conj(v))``.
With the outward normal ``nu`` at the ends of an interval these choices make
integration by parts read

    int <D phi, psi> - int <phi, D psi> = sum_{boundary} <nu . phi, psi>.

Every solution with constant modulus is ``psi = rho exp(i phi)`` with
``phi' = rho^(p-2) H``; on a circle the total phase has to match the spin
structure, which fixes ``rho`` up to the choice of winding number.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .profiles import Profile, parse_profile
from .report import IdentityReport

PHASE_NODES = 64
RK4_SUBSTEPS = 4


class DiracError(ValueError):
    pass


class NoAdmissibleSolutionError(DiracError):
    pass


class FlowExitError(DiracError):
    pass


class SpinStructure(enum.Enum):
    PERIODIC = "periodic"
    ANTIPERIODIC = "antiperiodic"

    @property
    def sigma(self) -> int:
        return 0 if self is SpinStructure.PERIODIC else 1


@dataclass(frozen=True)
class Domain1D:
    """``Circle(L)`` (``kind="circle"``, ``a = 0``, ``b = L``) or ``Interval(a, b)``.

    Circles are sampled at ``t_j = j L / N``; intervals at ``N`` equispaced
    points including both endpoints.
    """

    kind: str
    a: float
    b: float
    N: int = 256

    def __post_init__(self):
        if self.kind not in ("circle", "interval"):
            raise DiracError(f"unknown domain kind {self.kind!r}")
        if not self.b > self.a:
            raise DiracError("need a < b (or L > 0)")
        if self.N < 16 or self.N % 2:
            raise DiracError(f"N must be even and >= 16, got {self.N}")

    @classmethod
    def circle(cls, length: float = 2 * np.pi, N: int = 256) -> "Domain1D":
        return cls("circle", 0.0, float(length), N)

    @classmethod
    def interval(cls, a: float = 0.0, b: float = 1.0, N: int = 256) -> "Domain1D":
        return cls("interval", float(a), float(b), N)

    @classmethod
    def parse(cls, spec: str, N: int) -> "Domain1D":
        kind, _, rest = spec.partition(":")
        try:
            vals = [float(v) for v in rest.split(",")] if rest else []
        except ValueError as exc:
            raise DiracError(f"bad domain {spec!r}") from exc
        if kind == "circle" and len(vals) <= 1:
            return cls.circle(vals[0] if vals else 2 * np.pi, N)
        if kind == "interval" and len(vals) == 2:
            return cls.interval(vals[0], vals[1], N)
        raise DiracError(f"bad domain {spec!r}; use circle:L or interval:a,b")

    def with_N(self, N: int) -> "Domain1D":
        return Domain1D(self.kind, self.a, self.b, N)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def closed(self) -> bool:
        return self.kind == "circle"

    @property
    def h(self) -> float:
        return self.length / self.N if self.closed else self.length / (self.N - 1)

    @property
    def grid(self) -> np.ndarray:
        if self.closed:
            return self.a + self.h * np.arange(self.N)
        return np.linspace(self.a, self.b, self.N)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights on a circle; Gregory end corrections (4th order) on an interval."""
        if self.closed:
            return np.full(self.N, self.h)
        w = np.ones(self.N)
        w[:3] = w[-3:][::-1] = [3 / 8, 7 / 6, 23 / 24]
        return self.h * w

    def integrate(self, values) -> float:
        return float(np.real_if_close(self.weights @ np.asarray(values)))

    def describe(self) -> str:
        if self.closed:
            return f"circle:{self.length!r}"
        return f"interval:{self.a!r},{self.b!r}"


@dataclass(eq=False)
class Spinor1D:
    """Complex samples on ``domain.grid`` with an optional exact evaluator.

    ``evaluate`` may be called at any real ``t``; for a circle it must
    respect the spin structure (``psi(t + L) = -psi(t)`` when antiperiodic).
    """

    domain: Domain1D
    values: np.ndarray
    spin: Optional[SpinStructure] = None
    evaluate: Optional[Callable] = field(default=None, repr=False)
    rho: Optional[float] = None
    phase: Optional[np.ndarray] = field(default=None, repr=False)
    extendable: bool = False  # evaluator stays valid outside [a, b]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.domain.N,):
            raise DiracError("sample count does not match the domain")
        if self.domain.closed and self.spin is None:
            self.spin = SpinStructure.PERIODIC
        if not self.domain.closed and self.spin is not None:
            raise DiracError("interval domains carry no spin structure")

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    def __call__(self, t):
        if self.evaluate is not None:
            return self.evaluate(np.asarray(t, dtype=float))
        if self.domain.closed:
            return fourier_interpolate(self, t)
        raise DiracError("spinor has no evaluator off the grid")


def inner(u, v) -> np.ndarray:
    return np.real(u * np.conj(v))


def clifford(nu: float, psi):
    """Clifford multiplication by ``nu`` times the positive unit vector."""
    return -1j * nu * psi


def _twist(domain: Domain1D, spin, t):
    if domain.closed and spin is SpinStructure.ANTIPERIODIC:
        return np.exp(1j * np.pi * (np.asarray(t) - domain.a) / domain.length)
    return None


def derivative(domain: Domain1D, values: np.ndarray, spin=None) -> np.ndarray:
    """``d/dt`` of grid samples: spectral on a circle, 4th-order differences on an interval."""
    f = np.asarray(values, dtype=complex)
    N, h = domain.N, domain.h
    if domain.closed:
        tw = _twist(domain, spin, domain.grid)
        g = f if tw is None else f / tw
        k = 2 * np.pi * np.fft.fftfreq(N, d=h)
        G = np.fft.fft(g)
        G[N // 2] = 0.0  # odd derivative of the Nyquist mode
        dg = np.fft.ifft(1j * k * G)
        if tw is None:
            return dg
        return tw * (dg + 1j * np.pi / domain.length * g)
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = -(-25 * f[-1] + 48 * f[-2] - 36 * f[-3] + 16 * f[-4] - 3 * f[-5]) / (12 * h)
    d[-2] = -(-3 * f[-1] - 10 * f[-2] + 18 * f[-3] - 6 * f[-4] + f[-5]) / (12 * h)
    return d


def fourier_interpolate(psi: Spinor1D, t) -> np.ndarray:
    dom = psi.domain
    t = np.asarray(t, dtype=float)
    tw = _twist(dom, psi.spin, dom.grid)
    g = psi.values if tw is None else psi.values / tw
    N = dom.N
    G = np.fft.fft(g) / N
    k = np.fft.fftfreq(N, d=1.0 / N)
    G[N // 2] *= 0.5
    k = np.concatenate([k, [N // 2]])
    G = np.concatenate([G, [G[N // 2]]])
    s = (t - dom.a) * 2 * np.pi / dom.length
    out = np.exp(1j * np.multiply.outer(s, k)) @ G
    tw_t = _twist(dom, psi.spin, t)
    return out if tw_t is None else tw_t * out


def dirac_apply(psi: Spinor1D) -> Spinor1D:
    """``D psi = -i psi'`` on the grid."""
    return Spinor1D(psi.domain, -1j * derivative(psi.domain, psi.values, psi.spin), psi.spin)


def _as_pair(H, domain):
    if isinstance(H, str):
        H = parse_profile(H)
    if isinstance(H, Profile):
        return H.bind(domain)
    f, df = H
    return f, df


def _gauss_integral(f, t0: float, t: np.ndarray, nodes: int = PHASE_NODES) -> np.ndarray:
    x, w = leggauss(nodes)
    t = np.asarray(t, dtype=float)
    half = 0.5 * (t - t0)
    pts = t0 + np.multiply.outer(half, x + 1.0)
    return half * (f(pts) @ w)


def _circle_phase_integral(f, domain: Domain1D, t: np.ndarray) -> np.ndarray:
    # int_a^t f over whole turns plus the remainder
    L = domain.length
    turns = np.floor((t - domain.a) / L)
    rem = t - L * turns
    total = _gauss_integral(f, domain.a, np.array(domain.b))
    return turns * total + _gauss_integral(f, domain.a, rem)


def _choose_rho(total: float, absolute: float, p: float, spin: SpinStructure, k: Optional[int], rho):
    """Amplitude on a circle so that the total phase is ``2 pi k + sigma pi``."""
    sigma = spin.sigma
    if abs(total) <= 1e-13 * max(absolute, 1.0):
        if sigma:
            raise NoAdmissibleSolutionError(
                "int H = 0 forces zero total phase, incompatible with the antiperiodic spin structure"
            )
        return (1.0 if rho is None else float(rho)), 0
    if p == 2:
        target = total / np.pi - sigma
        kk = round(target / 2)
        if abs(target - 2 * kk) > 1e-10:
            raise NoAdmissibleSolutionError("p = 2: int H is not 2 pi k + sigma pi for any integer k")
        return (1.0 if rho is None else float(rho)), int(kk)
    if k is None:
        # smallest positive base (2 pi k + sigma pi)/total
        cands = [kk for kk in range(-64, 65) if (2 * np.pi * kk + sigma * np.pi) / total > 0]
        if not cands:  # pragma: no cover - always nonempty for total != 0
            raise NoAdmissibleSolutionError("no admissible winding number")
        k = min(cands, key=lambda kk: (2 * np.pi * kk + sigma * np.pi) / total)
    base = (2 * np.pi * k + sigma * np.pi) / total
    if base <= 0:
        raise NoAdmissibleSolutionError(f"winding k={k} gives rho^(p-2) = {base:.3g} <= 0")
    r = base ** (1.0 / (p - 2))
    if rho is not None and abs(r - rho) > 1e-12 * r:
        raise NoAdmissibleSolutionError(f"rho = {rho} is not admissible; winding k={k} requires {r!r}")
    return float(r), int(k)


def solve_dirac(
    domain: Domain1D,
    H,
    p: float,
    spin: Optional[SpinStructure] = None,
    rho: Optional[float] = None,
    k: Optional[int] = None,
) -> Spinor1D:
    """Constant-modulus solution ``rho exp(i phi)`` of ``D psi = H |psi|^(p-2) psi``.

    Parameters
    ----------
    domain : Domain1D
    H : Profile, profile string or ``(f, f')`` pair of callables
    p : float
        Nonlinearity exponent, ``p > 1``.
    spin : SpinStructure, optional
        Circles only; defaults to periodic.
    rho : float, optional
        Amplitude.  Free on an interval (default 1) and when ``int H = 0``
        on a circle; otherwise determined by the winding number ``k``.
    k : int, optional
        Winding number; the default is the one giving the smallest ``rho``.

    Returns
    -------
    Spinor1D
        With ``meta["solver_residual"]`` the sup-norm of the equation residual
        relative to ``|psi|^(p-1)``.

    Raises
    ------
    NoAdmissibleSolutionError
        When the spin structure admits no constant-modulus solution.
    """
    if not p > 1:
        raise DiracError(f"p must exceed 1, got {p}")
    f, _ = _as_pair(H, domain)
    t = domain.grid
    if domain.closed:
        spin = spin or SpinStructure.PERIODIC
        total = float(_gauss_integral(f, domain.a, np.array(domain.b)))
        absolute = float(_gauss_integral(lambda s: np.abs(f(s)), domain.a, np.array(domain.b)))
        rho, k = _choose_rho(total, absolute, p, spin, k, rho)
        c = rho ** (p - 2)

        def phase(s):
            return c * _circle_phase_integral(f, domain, np.asarray(s, dtype=float))
    else:
        if spin is not None:
            raise DiracError("interval domains carry no spin structure")
        rho = 1.0 if rho is None else float(rho)
        if rho <= 0:
            raise DiracError("rho must be positive")
        c = rho ** (p - 2)

        def phase(s):
            return c * _gauss_integral(f, domain.a, np.asarray(s, dtype=float))

    phi = phase(t)
    psi = Spinor1D(
        domain,
        rho * np.exp(1j * phi),
        spin,
        evaluate=lambda s: rho * np.exp(1j * phase(s)),
        rho=rho,
        phase=phi,
        extendable=True,
        meta={"p": p, "k": k},
    )
    psi.meta["solver_residual"] = equation_residual(psi, f, p)
    return psi


def equation_residual(psi: Spinor1D, H, p: float) -> float:
    """Sup-norm of ``D psi - H |psi|^(p-2) psi`` over ``max |psi|^(p-1)``."""
    f = _as_pair(H, psi.domain)[0] if isinstance(H, (str, Profile, tuple)) else H
    r = dirac_apply(psi).values - f(psi.domain.grid) * psi.modulus ** (p - 2) * psi.values
    scale = np.max(psi.modulus) ** (p - 1)
    return float(np.max(np.abs(r)) / scale)


def _rk4_flow(X, x0: np.ndarray, t: float, substeps: int = RK4_SUBSTEPS) -> np.ndarray:
    x = np.array(x0, dtype=float)
    dt = t / substeps
    for _ in range(substeps):
        k1 = X(x)
        k2 = X(x + 0.5 * dt * k1)
        k3 = X(x + 0.5 * dt * k2)
        k4 = X(x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def lie_derivative(psi: Spinor1D, X, method: str = "closed", h: float = 1e-3) -> np.ndarray:
    """``L_X psi`` on the grid.

    ``"closed"`` is ``X psi'`` (fibres identified by the global trivialisation).
    ``"flow"`` pushes ``psi`` forward along the RK4 flow of ``X`` for times
    ``+-h`` and takes ``-d/dt`` by a central difference, which is ``O(h^2)``.

    Raises
    ------
    FlowExitError
        If the flow leaves an interval and the spinor cannot be evaluated there.
    """
    dom = psi.domain
    Xf, _ = _as_pair(X, dom)
    t = dom.grid
    if method == "closed":
        return Xf(t) * derivative(dom, psi.values, psi.spin)
    if method != "flow":
        raise DiracError(f"unknown method {method!r}")
    fwd, back = _rk4_flow(Xf, t, h), _rk4_flow(Xf, t, -h)
    if not dom.closed and not psi.extendable:
        tol = 1e-14 * dom.length
        if np.any(np.minimum(fwd, back) < dom.a - tol) or np.any(np.maximum(fwd, back) > dom.b + tol):
            raise FlowExitError(f"flow of X for time {h} leaves [{dom.a}, {dom.b}]; shrink h")
    # (alpha^s_# psi)(x) = psi(alpha^{-s} x), so -d/ds at 0 is a central difference
    return (psi(fwd) - psi(back)) / (2 * h)


def verify_identity(
    domain: Domain1D,
    H,
    p: float,
    X,
    spin: Optional[SpinStructure] = None,
    rho: Optional[float] = None,
    k: Optional[int] = None,
    lie: str = "closed",
) -> IdentityReport:
    """Four-term identity ``T1 = T2 + T3 + T4`` for a constant-modulus solution.

    With ``beta = X'``::

        T1 = sum_{boundary} <nu . L_X psi, psi>
        T2 = (p-2)/p sum_{boundary} H |psi|^p g(X, nu)
        T3 = (1 - (p-2)/p) int H beta |psi|^p
        T4 = 2/p int (X H') |psi|^p

    On a circle ``T1 = T2 = 0``.  The normaliser is the larger of
    ``max |T_i|`` and the absolute integrals behind ``T3`` and ``T4``, so an
    identity whose terms all vanish is not divided by rounding noise.
    """
    psi = solve_dirac(domain, H, p, spin=spin, rho=rho, k=k)
    Hf, dH = _as_pair(H, domain)
    Xf, dX = _as_pair(X, domain)
    t = domain.grid
    dens = psi.modulus ** p
    hb = Hf(t) * dX(t) * dens
    xh = Xf(t) * dH(t) * dens
    T3 = (1 - (p - 2) / p) * domain.integrate(hb)
    T4 = (2 / p) * domain.integrate(xh)
    if domain.closed:
        T1 = T2 = 0.0
    else:
        L = lie_derivative(psi, X, method=lie)
        ends = [(0, -1.0), (-1, 1.0)]
        T1 = sum(float(inner(clifford(nu, L[i]), psi.values[i])) for i, nu in ends)
        T2 = ((p - 2) / p) * sum(float(Hf(t[i]) * dens[i] * Xf(t[i]) * nu) for i, nu in ends)
    terms = {"T1": T1, "T2": T2, "T3": T3, "T4": T4}
    scale = max(
        max(abs(v) for v in terms.values()),
        (2 / p) * domain.integrate(np.abs(hb)),
        (2 / p) * domain.integrate(np.abs(xh)),
    )
    return IdentityReport(
        "dirac1d",
        terms,
        T1 - T2 - T3 - T4,
        scale,
        {"N": domain.N, "domain": domain.describe(), "method": "spectral" if domain.closed else "fd4"},
        {"rho": psi.rho, "k": psi.meta["k"], "solver_residual": psi.meta["solver_residual"]},
    )


def green_residual(phi: Spinor1D, psi: Spinor1D) -> float:
    """``int <D phi, psi> - int <phi, D psi> - sum_{boundary} <nu . phi, psi>``."""
    dom = phi.domain
    lhs = dom.integrate(inner(dirac_apply(phi).values, psi.values)) - dom.integrate(
        inner(phi.values, dirac_apply(psi).values)
    )
    if dom.closed:
        return lhs
    bd = float(inner(clifford(1.0, phi.values[-1]), psi.values[-1]) + inner(clifford(-1.0, phi.values[0]), psi.values[0]))
    return lhs - bd


def random_bandlimited(domain: Domain1D, rng, modes: int = 4, spin=None) -> Spinor1D:
    """Random trigonometric polynomial of degree ``modes`` with an exact evaluator.

    On an interval the frequencies are ``k pi / (b - a)``; on a circle they
    are the harmonics allowed by the spin structure.
    """
    if domain.closed:
        spin = spin or SpinStructure.PERIODIC
        freqs = (2 * np.arange(-modes, modes + 1) + spin.sigma) * np.pi / domain.length
    else:
        spin = None
        freqs = np.arange(-modes, modes + 1) * np.pi / domain.length
    coef = (rng.standard_normal(len(freqs)) + 1j * rng.standard_normal(len(freqs))) / np.sqrt(1 + np.abs(freqs))

    def ev(s):
        s = np.asarray(s, dtype=float)
        return np.exp(1j * np.multiply.outer(s - domain.a, freqs)) @ coef

    return Spinor1D(domain, ev(domain.grid), spin, evaluate=ev, extendable=True)
