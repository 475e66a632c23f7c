"""Camshaft annihilation, slice-product reparametrization and a maximum modulus probe.

For a slice function ``f`` with stem ``(F1, F2)`` and a point ``p = alpha + I beta``
put ``gamma = F1(alpha, beta)``, ``delta = F2(alpha, beta)`` and ``q = f(p)``.
Right slice multiplication by the constants

    gamma branch:  a = conj(gamma),  b = (-gamma(conj(q) I)) I
    delta branch:  a = conj(delta),  b = delta conj(q)

turns ``f`` into ``g = (f.a).b`` with ``g(p) = |a|^2 |q|^2``, a positive real.
Everything here evaluates slice products through their stems, never through
the pointwise product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import qmc

from . import octonion as oc
from .slices import (
    PlaneDomain,
    SingularPointError,
    SliceFunction,
    StemFunction,
    induce,
)

ZERO_VALUE_TOL = 1e-12
"""``|f(p)|`` below this counts as a zero value."""

V_THRESHOLD = 1e-8
"""``|f'_s(x)|`` below this marks ``x`` as a zero of the spherical derivative."""

N_DIRECTIONS = 32


class ZeroValueError(ArithmeticError):
    """``f(p) = 0``: no annihilating pair is needed or defined."""


def right_product(f: SliceFunction, c) -> SliceFunction:
    """The slice product ``f . c`` with a constant, induced by ``(F1 c, F2 c)``."""
    c = np.asarray(c, dtype=float)
    stem = f.stem

    def func(a, b):
        F1, F2 = stem(a, b)
        return oc.mul(F1, c), oc.mul(F2, c)

    jet = None
    if stem.jet_func is not None:
        def jet(a, b, k):
            J1, J2 = stem.jet_func(a, b, k)
            return oc.mul(J1, c), oc.mul(J2, c)

    return induce(StemFunction(func, stem.domain, jet, stem.jet_order, f"({f.name}.c)"))


def _stem_at(f: SliceFunction, p):
    p = np.asarray(p, dtype=float)
    alpha, beta, unit = oc.split(p)
    gamma, delta = f.stem(alpha, beta)
    return alpha, beta, unit, np.array(gamma), np.array(delta)


def _double_product_at(f, p, a, b):
    """``((f.a).b)(p)`` with point-dependent constants ``a, b`` (evaluated stemwise)."""
    _, _, unit, F1, F2 = _stem_at(f, p)
    G1 = oc.mul(oc.mul(F1, a), b)
    G2 = oc.mul(oc.mul(F2, a), b)
    return G1 + oc.mul(unit, G2)


def gamma_branch_constants(gamma, q, unit):
    return oc.conj(gamma), -oc.mul(oc.mul(gamma, oc.mul(oc.conj(q), unit)), unit)


def delta_branch_constants(delta, q):
    return oc.conj(delta), oc.mul(delta, oc.conj(q))


def camshaft_values(f: SliceFunction, p):
    """``(g1(p), g2(p))`` for ``g1 = (f.conj(gamma)).((-gamma(conj(q) I)) I)`` and ``g2 = (f.conj(delta)).(delta conj(q))``.

    Both are octonions that equal the reals ``|gamma|^2 |q|^2`` and
    ``|delta|^2 |q|^2`` up to rounding.
    """
    p = np.asarray(p, dtype=float)
    _, _, unit, gamma, delta = _stem_at(f, p)
    q = gamma + oc.mul(unit, delta)
    a1, b1 = gamma_branch_constants(gamma, q, unit)
    a2, b2 = delta_branch_constants(delta, q)
    return _double_product_at(f, p, a1, b1), _double_product_at(f, p, a2, b2)


def camshaft_targets(f: SliceFunction, p):
    """The predicted values ``|gamma|^2 |q|^2`` and ``|delta|^2 |q|^2``."""
    _, _, _, gamma, delta = _stem_at(f, p)
    q = f(p)
    return oc.norm2(gamma) * oc.norm2(q), oc.norm2(delta) * oc.norm2(q)


@dataclass(frozen=True, eq=False)
class AnnihilatorPair:
    """Constants ``a, b`` with ``((f.a).b)(p) = |a|^2 |q|^2``."""

    a: np.ndarray
    b: np.ndarray
    source: str
    point: np.ndarray
    q: np.ndarray

    def apply(self, f: SliceFunction) -> SliceFunction:
        return right_product(right_product(f, self.a), self.b)

    @property
    def target(self) -> float:
        return float(oc.norm2(self.a) * oc.norm2(self.q))

    def residual(self, f: SliceFunction) -> float:
        value = self.apply(f)(self.point)
        return float(oc.norm(value - oc.real(self.target)))

    def norm_residual(self) -> float:
        """``| |b| - |a||q| |``."""
        return float(abs(oc.norm(self.b) - oc.norm(self.a) * oc.norm(self.q)))

    def to_dict(self):
        return {"a": self.a.tolist(), "b": self.b.tolist(), "source": self.source,
                "point": self.point.tolist()}


def annihilator_pair(f: SliceFunction, p) -> AnnihilatorPair:
    """Pick the annihilating constants at a single point ``p``.

    The delta branch, with ``a = conj(f'_s(p))`` and ``b = f'_s(p) conj(q)``, is
    used off the real axis when ``|f'_s(p)| >= V_THRESHOLD``; otherwise the
    gamma branch.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (8,):
        raise ValueError("annihilator_pair takes a single point")
    _, beta, unit, gamma, delta = _stem_at(f, p)
    q = gamma + oc.mul(unit, delta)
    if oc.norm(q) < ZERO_VALUE_TOL:
        raise ZeroValueError("f(p) = 0")
    if beta > 0.0 and oc.norm(delta) / beta >= V_THRESHOLD:
        s = delta / beta
        a, b = delta_branch_constants(s, q)
        return AnnihilatorPair(a, b, "delta", p, q)
    if oc.norm(gamma) > 0.0:
        a, b = gamma_branch_constants(gamma, q, unit)
        return AnnihilatorPair(a, b, "gamma", p, q)
    # gamma = 0 and q != 0 force delta != 0 with |f'_s| tiny but nonzero
    assert oc.norm(delta) > 0.0, "q != 0 needs gamma or delta nonzero"
    a, b = delta_branch_constants(delta, q)
    return AnnihilatorPair(a, b, "delta", p, q)


# ---------------------------------------------------------------------------
# reparametrization of conjugation spheres


def _spherical_derivative_at(f: SliceFunction, x):
    x = np.asarray(x, dtype=float)
    _, beta, _, _, delta = _stem_at(f, x)
    if np.any(beta == 0.0):
        raise SingularPointError("the reparametrization is undefined on the real axis")
    s = delta / beta[..., None]
    if np.any(oc.norm(s) < V_THRESHOLD):
        raise oc.ZeroDivision("f'_s(x) vanishes: x lies in V(f'_s)")
    return s


def _check_constant(c):
    c = np.asarray(c, dtype=float)
    if np.any(oc.norm(c) == 0.0):
        raise oc.ZeroDivision("the constant c must be nonzero")
    return c


def reparam_phi(f: SliceFunction, c, x):
    """``Phi(x) = ((x (s c)) c^-1) s^-1`` with ``s = f'_s(x)``."""
    c = _check_constant(c)
    s = _spherical_derivative_at(f, x)
    return oc.mul(oc.mul(oc.mul(x, oc.mul(s, c)), oc.inverse(c)), oc.inverse(s))


def reparam_phi_inverse(f: SliceFunction, c, x):
    """``Phi^-1(x) = ((x s) c)(c^-1 s^-1)`` with ``s = f'_s(x)``."""
    c = _check_constant(c)
    s = _spherical_derivative_at(f, x)
    return oc.mul(oc.mul(oc.mul(x, s), c), oc.mul(oc.inverse(c), oc.inverse(s)))


def sphere_witness(f: SliceFunction, c, x):
    """A point ``y`` of the sphere of ``x`` with ``(f.c)(x) = f(y) c``.

    Uses ``Phi`` where it is defined.  On the real axis or where ``f'_s``
    vanishes, ``f`` is constant on the sphere and ``y = x`` works.
    """
    x = np.asarray(x, dtype=float)
    c = _check_constant(c)
    _, beta, _, _, delta = _stem_at(f, x)
    safe = np.where(beta > 0.0, beta, 1.0)
    ok = (beta > 0.0) & (oc.norm(delta) / safe >= V_THRESHOLD)
    out = x.copy()
    if np.any(ok):
        out[ok] = reparam_phi(f, c, x[ok])
    return out


def witness_residual(f: SliceFunction, c, x):
    y = sphere_witness(f, c, x)
    return oc.norm(right_product(f, c)(x) - oc.mul(f(y), c))


def sphere_residual(x, y):
    """``|Delta_x(y)|``; zero iff ``y`` lies on the conjugation sphere of ``x``."""
    return oc.norm(oc.delta_poly(x, y))


def trace_associator_residual(x, y, z):
    """``|t(x(yz)) - t((xy)z)|``: the trace vanishes on associators."""
    return np.abs(oc.trace(oc.mul(x, oc.mul(y, z))) - oc.trace(oc.mul(oc.mul(x, y), z)))


# ---------------------------------------------------------------------------
# maximum modulus probe


def quasi_uniform_units(n=N_DIRECTIONS, seed=0):
    """Deterministic, well spread imaginary units on the 6-sphere.

    Scrambled Halton points in ``(0,1)^7`` are pushed through the normal
    quantile function and normalized.
    """
    from scipy.special import ndtri

    u = qmc.Halton(d=7, scramble=True, seed=seed).random(n)
    g = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    out = np.zeros((n, 8))
    out[:, 1:] = g / np.linalg.norm(g, axis=1, keepdims=True)
    return out


def plane_samples(domain: PlaneDomain, n=17):
    """Points ``(alpha, beta)``, ``beta >= 0``, of the closed domain with the boundary sampled exactly.

    Discs and annuli use polar grids (radii include the bounding circles);
    rectangles use a tensor grid including the edges.  Returns the points and
    the grid spacing.
    """
    if domain.kind == "rectangle":
        x0min, x0max, x1max = domain.params
        A, B = np.meshgrid(np.linspace(x0min, x0max, n), np.linspace(0.0, x1max, n), indexing="ij")
        h = max((x0max - x0min), x1max) / (n - 1)
        return A.ravel(), B.ravel(), h
    outer = domain.params[-1]
    if not np.isfinite(outer):
        raise ValueError("the probe needs a bounded domain")
    inner = domain.params[0] if domain.kind == "annulus" else 0.0
    r = np.linspace(inner, outer, n)
    t = np.linspace(0.0, np.pi, 2 * n - 1)
    R, T = np.meshgrid(r, t, indexing="ij")
    A = domain.center + R * np.cos(T)
    B = np.abs(R * np.sin(T))
    h = max((outer - inner) / (n - 1), outer * np.pi / (2 * n - 2))
    return A.ravel(), B.ravel(), h


@dataclass
class ProbeReport:
    argmax: list
    argmax_plane: tuple
    max_modulus: float
    min_modulus: float
    boundary_distance: float
    layer: float
    boundary_flag: bool
    constancy_estimate: float
    n_points: int
    geometry: dict

    def to_dict(self):
        return {
            "argmax": self.argmax,
            "argmax_plane": list(self.argmax_plane),
            "max_modulus": self.max_modulus,
            "min_modulus": self.min_modulus,
            "boundary_distance": self.boundary_distance,
            "layer": self.layer,
            "boundary_flag": self.boundary_flag,
            "constancy_estimate": self.constancy_estimate,
            "n_points": self.n_points,
            "geometry": self.geometry,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def max_modulus_probe(f: SliceFunction, geometry: PlaneDomain, n=17, units=None,
                      layer: Optional[float] = None) -> ProbeReport:
    """Grid search for the maximum of ``|f|`` on the closed circularization of ``geometry``.

    Plane samples are crossed with imaginary directions (``units``, default
    32 quasi-uniform points of the 6-sphere).  ``boundary_flag`` says whether
    the argmax lies within ``layer`` (default: one grid spacing) of the boundary.
    This is evidence, not proof.
    """
    alpha, beta, h = plane_samples(geometry, n)
    units = quasi_uniform_units() if units is None else np.asarray(units, dtype=float)
    x = oc.real(alpha)[:, None, :] + beta[:, None, None] * units[None, :, :]
    mod = oc.norm(f(x))
    idx = np.unravel_index(int(np.argmax(mod)), mod.shape)
    a0, b0 = float(alpha[idx[0]]), float(beta[idx[0]])
    dist = float(geometry.boundary_distance(a0, b0))
    layer = h if layer is None else layer
    mmax, mmin = float(mod.max()), float(mod.min())
    return ProbeReport(
        argmax=x[idx].tolist(),
        argmax_plane=(a0, b0),
        max_modulus=mmax,
        min_modulus=mmin,
        boundary_distance=dist,
        layer=float(layer),
        boundary_flag=bool(dist <= layer),
        constancy_estimate=mmax - mmin,
        n_points=int(mod.size),
        geometry=geometry.to_dict(),
    )
