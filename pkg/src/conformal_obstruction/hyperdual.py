"""Second-order forward-mode differentiation with hyper-dual numbers.

A hyper-dual number ``a + b e1 + c e2 + d e1 e2`` (with ``e1**2 = e2**2 = 0``)
carries a value, two first directional derivatives and the mixed second
derivative.  Seeding ``e1`` and ``e2`` with the same direction yields the pure
second derivative.  Components are numpy arrays, possibly complex, so that the
same arithmetic runs through stereographic coordinates.
"""

from __future__ import annotations

import numpy as np


class HyperDual:
    __slots__ = ("a", "b", "c", "d")
    __array_priority__ = 1000

    def __init__(self, a, b=0.0, c=0.0, d=0.0):
        self.a = np.asarray(a)
        self.b = np.asarray(b)
        self.c = np.asarray(c)
        self.d = np.asarray(d)

    @classmethod
    def variable(cls, value, dir1=1.0, dir2=1.0):
        z = np.zeros_like(np.asarray(value, dtype=float))
        return cls(value, z + dir1, z + dir2, z)

    def __repr__(self):
        return f"HyperDual({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"

    # chain rule for a scalar function with derivatives f0, f1, f2 at self.a
    def _chain(self, f0, f1, f2):
        return HyperDual(f0, f1 * self.b, f1 * self.c, f1 * self.d + f2 * self.b * self.c)

    def __add__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)
        return HyperDual(self.a + other, self.b, self.c, self.d)

    __radd__ = __add__

    def __neg__(self):
        return HyperDual(-self.a, -self.b, -self.c, -self.d)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(
                self.a * other.a,
                self.a * other.b + self.b * other.a,
                self.a * other.c + self.c * other.a,
                self.a * other.d + self.d * other.a + self.b * other.c + self.c * other.b,
            )
        return HyperDual(self.a * other, self.b * other, self.c * other, self.d * other)

    __rmul__ = __mul__

    def reciprocal(self):
        inv = 1.0 / self.a
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        if isinstance(other, HyperDual):
            return self * other.reciprocal()
        return HyperDual(self.a / other, self.b / other, self.c / other, self.d / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)) and k >= 0:
            out = HyperDual(np.ones_like(self.a), 0.0 * self.b, 0.0 * self.c, 0.0 * self.d)
            base = self
            while k:
                if k & 1:
                    out = out * base
                base = base * base
                k >>= 1
            return out
        f0 = self.a**k
        return self._chain(f0, k * self.a ** (k - 1), k * (k - 1) * self.a ** (k - 2))

    def conj(self):
        return HyperDual(np.conj(self.a), np.conj(self.b), np.conj(self.c), np.conj(self.d))

    @property
    def real(self):
        return HyperDual(self.a.real, self.b.real, self.c.real, self.d.real)

    @property
    def imag(self):
        return HyperDual(self.a.imag, self.b.imag, self.c.imag, self.d.imag)


def sqrt(x):
    if isinstance(x, HyperDual):
        r = np.sqrt(x.a)
        return x._chain(r, 0.5 / r, -0.25 / (r * x.a))
    return np.sqrt(x)


def sin(x):
    if isinstance(x, HyperDual):
        s, c = np.sin(x.a), np.cos(x.a)
        return x._chain(s, c, -s)
    return np.sin(x)


def cos(x):
    if isinstance(x, HyperDual):
        s, c = np.sin(x.a), np.cos(x.a)
        return x._chain(c, -s, -c)
    return np.cos(x)


def exp(x):
    if isinstance(x, HyperDual):
        e = np.exp(x.a)
        return x._chain(e, e, e)
    return np.exp(x)


def conj(x):
    if isinstance(x, HyperDual):
        return x.conj()
    return np.conj(x)


def value(x):
    return x.a if isinstance(x, HyperDual) else np.asarray(x)


def apply_primitive(x, f0, f1, f2):
    """Lift a scalar function with known derivatives onto ``x``.

    ``f0``, ``f1``, ``f2`` are callables returning the function and its first
    two derivatives on plain arrays.
    """
    if isinstance(x, HyperDual):
        return x._chain(f0(x.a), f1(x.a), f2(x.a))
    return f0(np.asarray(x))


def second_partials(f, p, q):
    """Value, first and second partials of ``f(p, q)``.

    ``f`` maps two (broadcastable) coordinate arrays to a sequence of outputs
    built from hyper-dual arithmetic. Returns dicts keyed by
    ``"f", "p", "q", "pp", "pq", "qq"`` holding stacked arrays.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    one, zero = np.ones_like(p), np.zeros_like(p)

    def run(dp1, dq1, dp2, dq2):
        P = HyperDual(p, dp1, dp2, zero)
        Q = HyperDual(q, dq1, dq2, zero)
        out = f(P, Q)
        return out

    pp = run(one, zero, one, zero)
    qq = run(zero, one, zero, one)
    pq = run(one, zero, zero, one)
    stack = lambda comps: np.stack([np.broadcast_to(c, p.shape) for c in comps], axis=-1)
    return {
        "f": stack([o.a for o in pp]),
        "p": stack([o.b for o in pp]),
        "q": stack([o.b for o in qq]),
        "pp": stack([o.d for o in pp]),
        "pq": stack([o.d for o in pq]),
        "qq": stack([o.d for o in qq]),
    }
