"""Dormand-Prince 5(4) stepper for the radial Lane-Emden system (pure Python).

State ``(u, v, I)`` with ``u' = v``, ``v' = -(n-1) v / r - |u|^(p-2) u`` and
``I' = |u|^p r^(n-1)``.  The odd extension of ``u^(p-1)`` keeps trial steps
that overshoot the first zero finite.
"""

import math

RMAX_REACHED = 0
CROSSED = 1
UNDERFLOW = 2
BLOWUP = 3
MAX_STEPS = 4

_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth minus embedded fourth order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


def _rhs(n, p, r, u, v):
    au = abs(u)
    f = au ** (p - 1.0)
    return v, -(n - 1.0) * v / r - (f if u >= 0 else -f), au**p * r ** (n - 1.0)


def dp45_step(n, p, r, u, v, I, h):
    """One step of size ``h``; returns ``(u, v, I, eu, ev, eI)``."""
    k1 = _rhs(n, p, r, u, v)
    k2 = _rhs(n, p, r + _C2 * h, u + h * _A21 * k1[0], v + h * _A21 * k1[1])
    k3 = _rhs(n, p, r + _C3 * h, u + h * (_A31 * k1[0] + _A32 * k2[0]), v + h * (_A31 * k1[1] + _A32 * k2[1]))
    k4 = _rhs(
        n, p, r + _C4 * h,
        u + h * (_A41 * k1[0] + _A42 * k2[0] + _A43 * k3[0]),
        v + h * (_A41 * k1[1] + _A42 * k2[1] + _A43 * k3[1]),
    )
    k5 = _rhs(
        n, p, r + _C5 * h,
        u + h * (_A51 * k1[0] + _A52 * k2[0] + _A53 * k3[0] + _A54 * k4[0]),
        v + h * (_A51 * k1[1] + _A52 * k2[1] + _A53 * k3[1] + _A54 * k4[1]),
    )
    k6 = _rhs(
        n, p, r + h,
        u + h * (_A61 * k1[0] + _A62 * k2[0] + _A63 * k3[0] + _A64 * k4[0] + _A65 * k5[0]),
        v + h * (_A61 * k1[1] + _A62 * k2[1] + _A63 * k3[1] + _A64 * k4[1] + _A65 * k5[1]),
    )
    out = [0.0, 0.0, 0.0]
    for i, y in enumerate((u, v, I)):
        out[i] = y + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
    k7 = _rhs(n, p, r + h, out[0], out[1])
    err = [
        h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
        for i in range(3)
    ]
    return out[0], out[1], out[2], err[0], err[1], err[2]


def integrate(n, p, r0, u0, v0, I0, r_max, rtol, atol, h0, fixed, h_min, max_steps):
    """Integrate from ``r0`` until ``r_max`` or until the next step makes ``u <= 0``.

    Returns ``(r, u, v, I, err, status, h_last)``; the lists hold accepted
    nodes only, so ``u > 0`` on all of them.  With ``status == CROSSED`` the
    first zero lies within ``h_last`` of the last node.
    """
    rs, us, vs, Is, errs = [r0], [u0], [v0], [I0], [0.0]
    r, u, v, I = r0, u0, v0, I0
    h = h0
    steps = 0
    while True:
        if r >= r_max:
            return rs, us, vs, Is, errs, RMAX_REACHED, h
        if steps >= max_steps:
            return rs, us, vs, Is, errs, MAX_STEPS, h
        hs = min(h, r_max - r)
        un, vn, In, eu, ev, eI = dp45_step(n, p, r, u, v, I, hs)
        if not (math.isfinite(un) and math.isfinite(vn) and math.isfinite(In)):
            if fixed:
                return rs, us, vs, Is, errs, BLOWUP, hs
            h = 0.25 * hs
            if h < h_min:
                return rs, us, vs, Is, errs, BLOWUP, hs
            continue
        err = max(
            abs(eu) / (atol + rtol * max(abs(u), abs(un))),
            abs(ev) / (atol + rtol * max(abs(v), abs(vn))),
            abs(eI) / (atol + rtol * max(abs(I), abs(In))),
        )
        if not fixed and err > 1.0:
            h = hs * max(0.2, 0.9 * err ** -0.2)
            if h < h_min:
                return rs, us, vs, Is, errs, UNDERFLOW, h
            continue
        if un <= 0.0:
            return rs, us, vs, Is, errs, CROSSED, hs
        steps += 1
        r, u, v, I = r + hs, un, vn, In
        rs.append(r)
        us.append(u)
        vs.append(v)
        Is.append(I)
        errs.append(max(abs(eu), abs(ev)))
        if not fixed:
            h = hs * (5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2)))
