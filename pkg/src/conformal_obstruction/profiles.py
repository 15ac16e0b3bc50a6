"""Named one-variable profiles for H and X on circles and intervals.

A profile is a smooth function of one real variable ``s`` together with its
derivative.  On ``Circle(L)`` the variable is the angle ``s = 2 pi t / L``;
on an interval it is ``t`` itself.  Profiles that are not periodic in the
angle (``affine``, ``quad``) are refused on circles.

Accepted spellings::

    const:A           A
    sin:A,B[,K]       A + B sin(K s)
    cos:A,B[,K]       A + B cos(K s)
    expcos:A,B        exp(A + B cos s)
    trig:A,B,C        A + B sin s + C cos 2s
    affine:A,B        A + B t
    quad:A,B,C        A + B t + C t^2

and the shorthand ``"1+0.5*sin"``, ``"2-0.3*cos3"``, ``"1+t"`` or a bare number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class Profile:
    name: str
    params: tuple
    f: Callable = field(repr=False, compare=False)
    df: Callable = field(repr=False, compare=False)
    periodic: bool = True

    def __call__(self, s):
        return self.f(np.asarray(s, dtype=float))

    def derivative(self, s):
        return self.df(np.asarray(s, dtype=float))

    def bind(self, domain) -> tuple[Callable, Callable]:
        """``(g, g')`` as functions of the domain coordinate ``t``."""
        if domain.kind == "circle":
            if not self.periodic:
                raise ProfileError(f"profile {self.spec} is not periodic and cannot live on a circle")
            c = 2 * np.pi / domain.length
            return (lambda t: self.f(c * np.asarray(t, float))), (lambda t: c * self.df(c * np.asarray(t, float)))
        return (lambda t: self.f(np.asarray(t, float))), (lambda t: self.df(np.asarray(t, float)))

    @property
    def spec(self) -> str:
        return f"{self.name}:" + ",".join(repr(float(v)) for v in self.params)


def _const(a):
    return Profile("const", (a,), lambda s: np.full_like(s, a), lambda s: np.zeros_like(s))


def _sin(a, b, k=1.0):
    return Profile("sin", (a, b, k), lambda s: a + b * np.sin(k * s), lambda s: b * k * np.cos(k * s))


def _cos(a, b, k=1.0):
    return Profile("cos", (a, b, k), lambda s: a + b * np.cos(k * s), lambda s: -b * k * np.sin(k * s))


def _expcos(a, b):
    return Profile(
        "expcos", (a, b),
        lambda s: np.exp(a + b * np.cos(s)),
        lambda s: -b * np.sin(s) * np.exp(a + b * np.cos(s)),
    )


def _trig(a, b, c):
    return Profile(
        "trig", (a, b, c),
        lambda s: a + b * np.sin(s) + c * np.cos(2 * s),
        lambda s: b * np.cos(s) - 2 * c * np.sin(2 * s),
    )


def _affine(a, b):
    return Profile("affine", (a, b), lambda s: a + b * s, lambda s: np.full_like(s, b), periodic=False)


def _quad(a, b, c):
    return Profile("quad", (a, b, c), lambda s: a + b * s + c * s**2, lambda s: b + 2 * c * s, periodic=False)


REGISTRY: dict[str, tuple[Callable, tuple[int, int]]] = {
    "const": (_const, (1, 1)),
    "sin": (_sin, (2, 3)),
    "cos": (_cos, (2, 3)),
    "expcos": (_expcos, (2, 2)),
    "trig": (_trig, (3, 3)),
    "affine": (_affine, (2, 2)),
    "quad": (_quad, (3, 3)),
}

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_SHORT = re.compile(rf"^({_NUM})([+-])(?:({_NUM})\*)?(sin|cos|t)(\d*)$")


def parse_profile(spec: str) -> Profile:
    spec = spec.strip()
    if ":" in spec:
        name, _, rest = spec.partition(":")
        if name not in REGISTRY:
            raise ProfileError(f"unknown profile {name!r}; choose from {sorted(REGISTRY)}")
        make, (lo, hi) = REGISTRY[name]
        try:
            args = [float(v) for v in rest.split(",")] if rest.strip() else []
        except ValueError as exc:
            raise ProfileError(f"bad parameters in {spec!r}") from exc
        if not lo <= len(args) <= hi:
            raise ProfileError(f"profile {name} takes {lo}..{hi} parameters, got {len(args)}")
        return make(*args)
    if re.fullmatch(_NUM, spec):
        return _const(float(spec))
    m = _SHORT.match(spec.replace(" ", ""))
    if not m:
        raise ProfileError(f"cannot parse profile {spec!r}")
    a, sign, b, kind, k = m.groups()
    b = 1.0 if b is None else float(b)
    b = b if sign == "+" else -b
    if kind == "t":
        if k:
            raise ProfileError(f"cannot parse profile {spec!r}")
        return _affine(float(a), b)
    return (_sin if kind == "sin" else _cos)(float(a), b, float(k) if k else 1.0)
