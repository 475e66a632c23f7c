"""Product quadrature rules on the 3-sphere and the 4-ball.

Points of the unit 3-sphere are written in hyperspherical coordinates

    u = (cos p, sin p cos t, sin p sin t cos s, sin p sin t sin s)

with ``p, t`` in ``[0, pi]`` and ``s`` in ``[0, 2 pi)``; the surface element is
``sin(p)^2 sin(t) dp dt ds``.  ``p`` and ``t`` use Gauss-Legendre nodes and ``s``
the periodic trapezoid rule.  Ball rules add a Gauss-Jacobi factor with
weight ``r^3`` in the radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@dataclass(frozen=True)
class QuadratureOrders:
    """Orders of the product rules (defaults 24 x 24 x 48, radial 16)."""

    n_psi: int = 24
    n_theta: int = 24
    n_phi: int = 48
    n_radial: int = 16

    def __post_init__(self):
        if min(self.n_psi, self.n_theta, self.n_phi, self.n_radial) < 1:
            raise ValueError("quadrature orders must be positive")

    def refined(self, step=8):
        return QuadratureOrders(self.n_psi + step, self.n_theta + step,
                                self.n_phi + 2 * step, self.n_radial + step // 2)

    def for_volume(self):
        """Angular orders used by the volume rules (half the surface orders).

        Volume integrands carry one derivative fewer than their singular
        surface counterparts and converge faster in angle.
        """
        return QuadratureOrders(max(4, self.n_psi // 2), max(4, self.n_theta // 2),
                                max(8, self.n_phi // 2), self.n_radial)

    def to_dict(self):
        return {"n_psi": self.n_psi, "n_theta": self.n_theta, "n_phi": self.n_phi,
                "n_radial": self.n_radial}


DEFAULT_ORDERS = QuadratureOrders()


@dataclass(frozen=True)
class Rule:
    """Nodes (rows) and weights of a quadrature rule."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values):
        """Weighted sum over the node axis (axis 0) of ``values``."""
        values = np.asarray(values, dtype=float)
        w = self.weights.reshape((-1,) + (1,) * (values.ndim - 1))
        return np.sum(w * values, axis=0)

    @property
    def total(self):
        return float(np.sum(self.weights))


def _gauss_legendre(n, a, b):
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * t + 0.5 * (b + a), 0.5 * (b - a) * w


@lru_cache(maxsize=32)
def _unit_sphere(n_psi, n_theta, n_phi):
    p, wp = _gauss_legendre(n_psi, 0.0, np.pi)
    t, wt = _gauss_legendre(n_theta, 0.0, np.pi)
    s = 2.0 * np.pi * np.arange(n_phi) / n_phi
    ws = np.full(n_phi, 2.0 * np.pi / n_phi)
    P, T, S = np.meshgrid(p, t, s, indexing="ij")
    W = (wp * np.sin(p) ** 2)[:, None, None] * (wt * np.sin(t))[None, :, None] * ws[None, None, :]
    nodes = np.stack([
        np.cos(P),
        np.sin(P) * np.cos(T),
        np.sin(P) * np.sin(T) * np.cos(S),
        np.sin(P) * np.sin(T) * np.sin(S),
    ], axis=-1).reshape(-1, 4)
    nodes.setflags(write=False)
    W = W.ravel()
    W.setflags(write=False)
    return nodes, W


def sphere_rule(orders: QuadratureOrders = DEFAULT_ORDERS, radius=1.0, center=None) -> Rule:
    """Rule on the 3-sphere of ``radius`` in R^4; weights sum to ``2 pi^2 radius^3``."""
    u, w = _unit_sphere(orders.n_psi, orders.n_theta, orders.n_phi)
    c = np.zeros(4) if center is None else np.asarray(center, dtype=float)
    return Rule(c + radius * u, w * radius ** 3)


def _graded_polar(n, eps, length=np.pi):
    """Gauss-Legendre nodes for ``p`` in ``[0, length]`` under the sinh map
    ``p = eps sinh(mu (1 + t) / 2)``, ``mu = asinh(length / eps)``.

    The map clusters nodes at ``p = 0`` on the length scale ``eps``, which
    resolves integrands that are nearly singular at the pole.
    """
    t, w = np.polynomial.legendre.leggauss(n)
    mu = np.arcsinh(length / eps)
    arg = 0.5 * mu * (1.0 + t)
    return eps * np.sinh(arg), w * 0.5 * mu * eps * np.cosh(arg)


def _rotation_to(pole):
    """Orthogonal 4x4 matrix mapping ``(1, 0, 0, 0)`` to the unit vector ``pole``."""
    pole = np.asarray(pole, dtype=float)
    q, _ = np.linalg.qr(np.column_stack([pole, np.eye(4)]))
    return q * np.sign(q[:, 0] @ pole)


def aligned_sphere_rule(orders: QuadratureOrders, radius, center, pole, eps) -> Rule:
    """Sphere rule with its pole at ``pole`` and the polar angle graded on the scale ``eps``.

    Same node counts as :func:`sphere_rule`.  Meant for integrands with a
    near singularity at ``center + radius * pole`` (relative distance ``eps``).
    """
    p, wp = _graded_polar(orders.n_psi, eps)
    t, wt = _gauss_legendre(orders.n_theta, 0.0, np.pi)
    s = 2.0 * np.pi * np.arange(orders.n_phi) / orders.n_phi
    ws = np.full(orders.n_phi, 2.0 * np.pi / orders.n_phi)
    P, T, S = np.meshgrid(p, t, s, indexing="ij")
    W = (wp * np.sin(p) ** 2)[:, None, None] * (wt * np.sin(t))[None, :, None] * ws[None, None, :]
    u = np.stack([
        np.cos(P),
        np.sin(P) * np.cos(T),
        np.sin(P) * np.sin(T) * np.cos(S),
        np.sin(P) * np.sin(T) * np.sin(S),
    ], axis=-1).reshape(-1, 4)
    u = u @ _rotation_to(pole).T
    c = np.zeros(4) if center is None else np.asarray(center, dtype=float)
    return Rule(c + radius * u, W.ravel() * radius ** 3)


def unit_directions(orders: QuadratureOrders = DEFAULT_ORDERS):
    """Unit vectors and solid-angle weights of the sphere rule."""
    return _unit_sphere(orders.n_psi, orders.n_theta, orders.n_phi)


@lru_cache(maxsize=32)
def _radial(n):
    t, w = roots_jacobi(n, 0.0, 3.0)
    # r = (1 + t)/2 on [0, 1], r^3 dr = (1 + t)^3 dt / 16
    return (1.0 + t) / 2.0, w / 16.0


def ball_rule(orders: QuadratureOrders = DEFAULT_ORDERS, radius=1.0, center=None) -> Rule:
    """Rule on the 4-ball; weights sum to ``pi^2 radius^4 / 2``."""
    u, wu = unit_directions(orders)
    r, wr = _radial(orders.n_radial)
    c = np.zeros(4) if center is None else np.asarray(center, dtype=float)
    nodes = c + radius * (r[:, None, None] * u[None, :, :]).reshape(-1, 4)
    weights = (radius ** 4 * wr[:, None] * wu[None, :]).ravel()
    return Rule(nodes, weights)


def shell_rule(orders: QuadratureOrders, r1, r2, center=None) -> Rule:
    """Rule on the spherical shell ``r1 < |v - c| < r2`` (Gauss-Legendre in ``r`` with ``r^3``)."""
    u, wu = unit_directions(orders)
    r, wr = _gauss_legendre(orders.n_radial, r1, r2)
    c = np.zeros(4) if center is None else np.asarray(center, dtype=float)
    nodes = c + (r[:, None, None] * u[None, :, :]).reshape(-1, 4)
    weights = ((wr * r ** 3)[:, None] * wu[None, :]).ravel()
    return Rule(nodes, weights)


def _ray_exit(d, omega, radius):
    """Positive root ``t`` of ``|d + t omega| = radius`` for ``|d| < radius``."""
    b = omega @ d
    return -b + np.sqrt(b * b + radius * radius - d @ d)


def _polar_pieces(n, pc, dist, radius):
    """Nodes and weights in ``p`` for :func:`_aligned_directions`.

    With the axis pointing from the evaluation point to the centre, the
    distance to the outer sphere is
    ``dist cos p + sqrt(dist^2 cos^2 p + radius^2 - dist^2)``, which has branch
    points at ``p = pi/2 +- i asinh(c / dist)`` with ``c^2 = radius^2 - dist^2``.
    ``[pc, pi]`` is therefore split at ``pi/2`` and both halves are graded
    towards ``pi/2`` on that scale.  Inside the tangent cone ``p < pc`` of the
    inner sphere the angle is ``p = pc (1 - s^2)``, which turns the
    square-root behaviour of the chord length at the cone into a smooth
    function of ``s``.
    """
    parts = []
    if pc > 0.0:
        s, w = _gauss_legendre(n, 0.0, 1.0)
        parts.append((pc * (1.0 - s * s), 2.0 * pc * s * w))
    eps = np.arcsinh(np.sqrt(radius * radius - dist * dist) / dist) if dist > 0 else np.inf
    for lo, hi in ((pc, 0.5 * np.pi), (0.5 * np.pi, np.pi)):
        if hi - lo <= 0.0:
            continue
        if eps >= hi - lo:
            parts.append(_gauss_legendre(n, lo, hi))
            continue
        q, w = _graded_polar(n, eps, hi - lo)
        parts.append((0.5 * np.pi - q, w) if hi == 0.5 * np.pi else (0.5 * np.pi + q, w))
    return np.concatenate([a for a, _ in parts]), np.concatenate([b for _, b in parts])


def _aligned_directions(d, orders: QuadratureOrders, radius, inner=None):
    """Unit directions and weights of a sphere rule whose pole points from
    ``d`` towards the centre, with the polar angle split as in :func:`_polar_pieces`.

    Also returns the mask of directions inside the tangent cone of the inner
    sphere (the rays that cross the hole).
    """
    dist = np.sqrt(d @ d)
    pc = 0.0 if inner is None else np.arcsin(min(1.0, inner / dist))
    p, wp = _polar_pieces(orders.n_psi, pc, dist, radius)
    t, wt = _gauss_legendre(orders.n_theta, 0.0, np.pi)
    phi = 2.0 * np.pi * np.arange(orders.n_phi) / orders.n_phi
    wphi = np.full(orders.n_phi, 2.0 * np.pi / orders.n_phi)
    P, T, S = np.meshgrid(p, t, phi, indexing="ij")
    W = (wp * np.sin(p) ** 2)[:, None, None] * (wt * np.sin(t))[None, :, None] * wphi[None, None, :]
    u = np.stack([
        np.cos(P),
        np.sin(P) * np.cos(T),
        np.sin(P) * np.sin(T) * np.cos(S),
        np.sin(P) * np.sin(T) * np.sin(S),
    ], axis=-1).reshape(-1, 4)
    inside = np.broadcast_to((p < pc)[:, None, None], P.shape).ravel()
    axis = -d / dist if dist > 0 else np.eye(4)[0]
    return u @ _rotation_to(axis).T, W.ravel(), inside


def polar_segments(point, orders: QuadratureOrders, radius, center=0.0, inner=None):
    """Polar rule centred at an interior ``point`` of a ball or shell in R^4.

    Returns ``(directions, t, weights)`` where ``directions[i]`` is repeated over
    the radial nodes of each segment: the rule integrates ``g`` as

        sum w * g(point + t * direction)

    and already contains the ``t^3`` Jacobian.  ``center`` is the real part
    of the centre (the other coordinates are zero).  The directions are
    aligned with the centre (see :func:`_aligned_directions`); for a shell,
    rays crossing the hole are split into two segments.
    """
    point = np.asarray(point, dtype=float)
    c = np.zeros(4)
    c[0] = center
    d = point - c
    tq, wq = np.polynomial.legendre.leggauss(orders.n_radial)
    u, wu, hit = _aligned_directions(d, orders, radius, inner)
    T = _ray_exit(d, u, radius)
    segments = [(np.zeros_like(T), T)]
    if inner is not None:
        b = u @ d
        root = np.sqrt(np.clip(b * b - (d @ d - inner * inner), 0.0, None))
        a = np.where(hit, -b - root, T)
        e = np.where(hit, -b + root, T)
        segments = [(np.zeros_like(T), a), (e, T)]
    dirs, ts, ws = [], [], []
    for lo, hi in segments:
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        t = mid[:, None] + half[:, None] * tq[None, :]
        w = wu[:, None] * half[:, None] * wq[None, :] * t ** 3
        dirs.append(np.repeat(u, orders.n_radial, axis=0))
        ts.append(t.ravel())
        ws.append(w.ravel())
    return np.concatenate(dirs), np.concatenate(ts), np.concatenate(ws)
