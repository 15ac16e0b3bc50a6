# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_shoot_py``: same algorithm, same return values."""

from libc.math cimport fabs, pow, isfinite

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40

RMAX_REACHED = 0
CROSSED = 1
UNDERFLOW = 2
BLOWUP = 3
MAX_STEPS = 4


cdef inline void _rhs(double n, double p, double r, double u, double v, double* k) noexcept nogil:
    cdef double au = fabs(u)
    cdef double f = pow(au, p - 1.0)
    k[0] = v
    k[1] = -(n - 1.0) * v / r - (f if u >= 0 else -f)
    k[2] = pow(au, p) * pow(r, n - 1.0)


cdef void _step(double n, double p, double r, double* y, double h, double* out, double* err) noexcept nogil:
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double k5[3]
    cdef double k6[3]
    cdef double k7[3]
    cdef int i
    _rhs(n, p, r, y[0], y[1], k1)
    _rhs(n, p, r + C2 * h, y[0] + h * A21 * k1[0], y[1] + h * A21 * k1[1], k2)
    _rhs(n, p, r + C3 * h, y[0] + h * (A31 * k1[0] + A32 * k2[0]),
         y[1] + h * (A31 * k1[1] + A32 * k2[1]), k3)
    _rhs(n, p, r + C4 * h, y[0] + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
         y[1] + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]), k4)
    _rhs(n, p, r + C5 * h, y[0] + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
         y[1] + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]), k5)
    _rhs(n, p, r + h, y[0] + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
         y[1] + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]), k6)
    for i in range(3):
        out[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
    _rhs(n, p, r + h, out[0], out[1], k7)
    for i in range(3):
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])


def dp45_step(double n, double p, double r, double u, double v, double I, double h):
    cdef double y[3]
    cdef double out[3]
    cdef double err[3]
    y[0] = u
    y[1] = v
    y[2] = I
    _step(n, p, r, y, h, out, err)
    return out[0], out[1], out[2], err[0], err[1], err[2]


cdef inline double _ratio(double e, double a, double b, double atol, double rtol) noexcept nogil:
    return fabs(e) / (atol + rtol * (fabs(a) if fabs(a) > fabs(b) else fabs(b)))


def integrate(double n, double p, double r0, double u0, double v0, double I0, double r_max,
              double rtol, double atol, double h0, bint fixed, double h_min, long max_steps):
    cdef list rs = [r0], us = [u0], vs = [v0], Is = [I0], errs = [0.0]
    cdef double y[3]
    cdef double out[3]
    cdef double e[3]
    cdef double r = r0, h = h0, hs, err, fac
    cdef long steps = 0
    y[0] = u0
    y[1] = v0
    y[2] = I0
    while True:
        if r >= r_max:
            return rs, us, vs, Is, errs, RMAX_REACHED, h
        if steps >= max_steps:
            return rs, us, vs, Is, errs, MAX_STEPS, h
        hs = h if h < r_max - r else r_max - r
        _step(n, p, r, y, hs, out, e)
        if not (isfinite(out[0]) and isfinite(out[1]) and isfinite(out[2])):
            if fixed:
                return rs, us, vs, Is, errs, BLOWUP, hs
            h = 0.25 * hs
            if h < h_min:
                return rs, us, vs, Is, errs, BLOWUP, hs
            continue
        err = _ratio(e[0], y[0], out[0], atol, rtol)
        err = max(err, _ratio(e[1], y[1], out[1], atol, rtol))
        err = max(err, _ratio(e[2], y[2], out[2], atol, rtol))
        if not fixed and err > 1.0:
            h = hs * max(0.2, 0.9 * pow(err, -0.2))
            if h < h_min:
                return rs, us, vs, Is, errs, UNDERFLOW, h
            continue
        if out[0] <= 0.0:
            return rs, us, vs, Is, errs, CROSSED, hs
        steps += 1
        r = r + hs
        y[0] = out[0]
        y[1] = out[1]
        y[2] = out[2]
        rs.append(r)
        us.append(y[0])
        vs.append(y[1])
        Is.append(y[2])
        errs.append(max(fabs(e[0]), fabs(e[1])))
        if not fixed:
            if err == 0:
                fac = 5.0
            else:
                fac = min(5.0, max(0.2, 0.9 * pow(err, -0.2)))
            h = hs * fac
