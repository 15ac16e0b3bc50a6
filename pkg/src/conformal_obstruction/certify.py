"""Search for nonexistence certificates for prescribed mean curvature on S^2.

If some conformal field X has ``dH(X) >= 0`` everywhere and a positive
integral, then ``H`` cannot be the mean curvature of a conformal immersion
S^2 -> R^3, because the area-weighted integral of ``dH(X)`` must vanish for
every conformal field. The search works in the six-dimensional coefficient
space of the conformal algebra, where ``dH(X(c))`` at a node is linear in
``c``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, qmc

from .sphere import (
    FIELD_NAMES,
    QuadratureRule,
    ScalarField,
    build_quadrature,
    derivative_matrix,
    field_from_coefficients,
)

DEFAULT_TOL = 1e-9
N_DIRECTIONS = 2048
N_REFINE = 8


@dataclass(frozen=True)
class Certificate:
    """Witness that ``H`` is not the mean curvature of an unbranched conformal immersion."""

    coefficients: np.ndarray
    min_value: float
    integral: float
    mean_value: float
    tol: float
    nodes: int
    degree: int

    @property
    def field(self):
        return field_from_coefficients(self.coefficients)

    def to_dict(self) -> dict:
        return {
            "kind": "certificate",
            "coefficients": self.coefficients.tolist(),
            "basis": FIELD_NAMES,
            "min_value": self.min_value,
            "integral": self.integral,
            "mean_value": self.mean_value,
            "tol": self.tol,
            "nodes": self.nodes,
            "degree": self.degree,
            "scope": "unbranched conformal immersions S^2 -> R^3",
        }


@dataclass(frozen=True)
class NoneFound:
    """No certificate was found. This proves nothing about realizability."""

    best_coefficients: np.ndarray
    best_min_value: float
    best_integral: float
    tol: float
    nodes: int
    degree: int

    def to_dict(self) -> dict:
        return {
            "kind": "none-found",
            "best_coefficients": self.best_coefficients.tolist(),
            "basis": FIELD_NAMES,
            "best_min_value": self.best_min_value,
            "best_integral": self.best_integral,
            "tol": self.tol,
            "nodes": self.nodes,
            "degree": self.degree,
        }


def sample_directions(n: int = N_DIRECTIONS, dim: int = 6) -> np.ndarray:
    """Deterministic, roughly uniform unit vectors from a Halton sequence."""
    pts = qmc.Halton(d=dim, scramble=False).random(n + 1)[1:]
    g = norm.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


class _Objective:
    def __init__(self, G: np.ndarray, weights: np.ndarray, tol: float):
        self.G = G
        self.m = weights @ G
        self.tol = tol

    def evaluate(self, c):
        c = c / np.linalg.norm(c)
        vals = self.G @ c
        return float(vals.min()), float(self.m @ c)

    def merit(self, c) -> float:
        lo, integral = self.evaluate(c)
        if lo >= -self.tol:
            return integral
        # infeasible: rank by constraint violation, always below any feasible point
        return -1e6 + lo


def _refine(obj: _Objective, c: np.ndarray, step: float = 0.25, min_step: float = 1e-10):
    c = c / np.linalg.norm(c)
    best = obj.merit(c)
    while step > min_step:
        improved = False
        for k in range(len(c)):
            for sgn in (1.0, -1.0):
                trial = c.copy()
                trial[k] += sgn * step
                nrm = np.linalg.norm(trial)
                if nrm == 0:
                    continue
                trial /= nrm
                val = obj.merit(trial)
                if val > best:
                    c, best, improved = trial, val, True
        if not improved:
            step *= 0.5
    return c, best


def certify_search(
    H: ScalarField,
    q: QuadratureRule,
    tol: float = DEFAULT_TOL,
    n_directions: int = N_DIRECTIONS,
) -> Certificate | NoneFound:
    """Look for coefficients ``c`` with ``min dH(X(c)) >= -tol`` and ``int dH(X(c)) >= 10 tol``.

    Candidates are the mean-gradient direction, the basis directions and a
    quasi-random set of unit directions; the best few are refined by
    coordinate descent maximizing the integral subject to the sign
    constraint at every node.
    """
    G = derivative_matrix(H, q.nodes)
    obj = _Objective(G, q.weights, tol)

    seeds = [np.eye(6), -np.eye(6), sample_directions(n_directions)]
    if np.linalg.norm(obj.m) > 0:
        seeds.insert(0, (obj.m / np.linalg.norm(obj.m))[None, :])
    cands = np.vstack(seeds)
    merits = np.array([obj.merit(c) for c in cands])
    order = np.argsort(-merits, kind="stable")[:N_REFINE]

    best_c, best_merit = None, -np.inf
    for i in order:
        c, val = _refine(obj, cands[i])
        if val > best_merit:
            best_c, best_merit = c, val

    best_c = best_c / np.linalg.norm(best_c)
    lo, integral = obj.evaluate(best_c)
    area = float(q.weights.sum())
    if lo >= -tol and integral >= 10 * tol:
        return Certificate(best_c, lo, integral, integral / area, tol, len(q), q.degree)
    return NoneFound(best_c, lo, integral, tol, len(q), q.degree)


def verify_certificate(H: ScalarField, cert: Certificate, degree: int | None = None):
    """Re-check a certificate on a fresh node set; returns ``(min, integral)``."""
    degree = 2 * cert.degree if degree is None else degree
    q = build_quadrature(2, degree)
    vals = derivative_matrix(H, q.nodes) @ cert.coefficients
    return float(vals.min()), float(q.weights @ vals)


def coefficient_angle(c1, c2) -> float:
    """Angle in degrees between two coefficient vectors."""
    c1, c2 = np.asarray(c1, float), np.asarray(c2, float)
    cosang = np.dot(c1, c2) / (np.linalg.norm(c1) * np.linalg.norm(c2))
    return float(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
