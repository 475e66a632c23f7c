"""Slice Cauchy kernels and the Borel-Pompeiu integral formula.

For a fixed orthogonal pair ``(I, J)`` the integrals run over the 3-sphere
(surface) and the 4-ball (volume) inside the quaternionic slice ``H_IJ``.
The integrands are functions of the pair ``(x, xi)``; they are never split
into a kernel times a density, since over the octonions no such factorization
exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import octonion as oc
from . import operators as ops
from . import quadrature as quad
from .numdiff import DEFAULT_ENGINE
from .quadrature import DEFAULT_ORDERS, QuadratureOrders

TWO_PI2 = 2.0 * np.pi ** 2
N_SINGULAR = 1e-14
GUARD_FRACTION = 0.05


class SingularPairError(ArithmeticError):
    """Raised when an integrand is evaluated on (or too near) its singular set."""


# ---------------------------------------------------------------------------
# kernels


def project(unit, xi):
    """Orthogonal projection of ``xi`` onto ``C_I`` and the orthogonal remainder."""
    I = oc.unit_vector(unit)
    xi = np.asarray(xi, dtype=float)
    proj = oc.real(oc.re(xi)) + oc.scale(oc.inner(xi, I), I)
    return proj, xi - proj


def g_kernel(unit, xi, x):
    """``|x|^2 - x conj(xi_I) - conj(x) xi_I + |xi|^2``."""
    xi_I, _ = project(unit, xi)
    x = np.asarray(x, dtype=float)
    out = -oc.mul(x, oc.conj(xi_I)) - oc.mul(oc.conj(x), xi_I)
    out[..., 0] += oc.norm2(x) + oc.norm2(xi)
    return out


def g_normal(unit, xi, x):
    """The normal function of ``g_kernel``; vanishes exactly on ``S_{I, xi}``."""
    xi_I, perp = project(unit, xi)
    x = np.asarray(x, dtype=float)
    p2 = oc.norm2(perp)
    delta = oc.delta_poly(xi_I, x)
    middle = oc.norm2(x) - 2.0 * oc.re(x) * oc.re(xi_I) + oc.norm2(xi_I)
    return oc.norm2(delta) + 2.0 * p2 * middle + p2 * p2


N_kernel = g_normal


def Q_kernel(unit, x, xi, a):
    xi_I, _ = project(unit, xi)
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    xb = oc.conj(x)
    xiIb = oc.conj(xi_I)
    s = oc.norm2(x) + oc.norm2(xi)
    out = oc.scale(s * s, a)
    out = out - oc.scale(2.0 * s, oc.mul(x, oc.mul(xi_I, a)) + oc.mul(xb, oc.mul(xiIb, a)))
    out = out + oc.mul(oc.mul(x, x), oc.mul(oc.mul(xi_I, xi_I), a))
    out = out + oc.mul(oc.mul(xb, xb), oc.mul(oc.mul(xiIb, xiIb), a))
    out = out + oc.scale(2.0 * oc.norm2(x) * oc.norm2(xi_I), a)
    return out


def M_kernel(unit, x, xi, a):
    """``Q(x, xi, conj(xi) a) - conj(x) Q(x, xi, a)``."""
    xi = np.asarray(xi, dtype=float)
    a = np.asarray(a, dtype=float)
    return Q_kernel(unit, x, xi, oc.mul(oc.conj(xi), a)) - oc.mul(oc.conj(x), Q_kernel(unit, x, xi, a))


def kernel_QMN(unit, x, xi, a):
    return Q_kernel(unit, x, xi, a), M_kernel(unit, x, xi, a), g_normal(unit, xi, x)


def _pair_integrand(unit, x, xi, density):
    N = g_normal(unit, xi, x)
    if np.any(N < N_SINGULAR):
        raise SingularPairError("integrand evaluated on its singular set")
    return M_kernel(unit, x, xi, density) / (TWO_PI2 * N * N)[..., None]


def surface_integrand(f, pair, x, xi, normal):
    """``M_I(x, xi, n(xi) f(xi)) / (2 pi^2 N_I(x, xi)^2)``."""
    density = oc.mul(normal, f(xi))
    return _pair_integrand(pair.I, x, xi, density)


def volume_integrand(f, pair, x, xi, engine=DEFAULT_ENGINE):
    """``M_I(x, xi, Dbar_I f(xi)) / (2 pi^2 N_I(x, xi)^2)``."""
    density = ops.crf_restricted(f, pair, xi, engine)
    return _pair_integrand(pair.I, x, xi, density)


def classical_kernel(y, xi, density):
    """``conj(xi - y) density / (2 pi^2 |xi - y|^4)``: the restriction of both integrands to ``C_I``."""
    diff = np.asarray(xi, dtype=float) - np.asarray(y, dtype=float)
    n2 = oc.norm2(diff)
    return oc.mul(oc.conj(diff), density) / (TWO_PI2 * n2 * n2)[..., None]


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class SliceBallGeometry:
    """Ball (or shell) centred on the real axis inside ``H_IJ``."""

    pair: oc.OrthoUnitPair
    radius: float = 1.0
    center: float = 0.0
    inner_radius: Optional[float] = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.inner_radius is not None and not 0 < self.inner_radius < self.radius:
            raise ValueError("inner radius must lie in (0, radius)")

    @property
    def center4(self):
        c = np.zeros(4)
        c[0] = self.center
        return c

    def plane_domain(self):
        from .slices import PlaneDomain
        if self.inner_radius is None:
            return PlaneDomain.disc(self.radius, self.center)
        return PlaneDomain.annulus(self.inner_radius, self.radius, self.center)

    def boundary_distance(self, x):
        """Distance of ``(Re x, |Im x|)`` from the boundary of the planar domain."""
        x = np.asarray(x, dtype=float)
        rho = np.hypot(oc.re(x) - self.center, oc.norm(oc.im(x)))
        d = np.abs(self.radius - rho)
        if self.inner_radius is not None:
            d = np.minimum(d, np.abs(rho - self.inner_radius))
        return d

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        rho = np.hypot(oc.re(x) - self.center, oc.norm(oc.im(x)))
        inside = rho < self.radius
        if self.inner_radius is not None:
            inside &= rho > self.inner_radius
        return inside

    def surface_nodes(self, orders: QuadratureOrders = DEFAULT_ORDERS):
        """Nodes (octonions), outward normals and weights on the boundary."""
        parts = []
        spheres = [(self.radius, 1.0)]
        if self.inner_radius is not None:
            spheres.append((self.inner_radius, -1.0))
        for r, sign in spheres:
            rule = quad.sphere_rule(orders, r, self.center4)
            u = (rule.nodes - self.center4) / r
            parts.append((self.pair.embed(rule.nodes), sign * self.pair.embed(u), rule.weights))
        nodes = np.concatenate([p[0] for p in parts])
        normals = np.concatenate([p[1] for p in parts])
        weights = np.concatenate([p[2] for p in parts])
        return nodes, normals, weights

    def volume_rule(self, orders: QuadratureOrders = DEFAULT_ORDERS):
        if self.inner_radius is None:
            rule = quad.ball_rule(orders, self.radius, self.center4)
        else:
            rule = quad.shell_rule(orders, self.inner_radius, self.radius, self.center4)
        return self.pair.embed(rule.nodes), rule.weights

    def surface_measure(self):
        m = TWO_PI2 * self.radius ** 3
        if self.inner_radius is not None:
            m += TWO_PI2 * self.inner_radius ** 3
        return m

    def volume_measure(self):
        m = 0.5 * np.pi ** 2 * self.radius ** 4
        if self.inner_radius is not None:
            m -= 0.5 * np.pi ** 2 * self.inner_radius ** 4
        return m

    def mirror(self, x):
        """Inversion in the outer sphere (maps interior points outside)."""
        x = np.asarray(x, dtype=float)
        d = x - oc.real(self.center)
        return oc.real(self.center) + d * (self.radius ** 2 / oc.norm2(d))[..., None]

    def to_dict(self):
        return {"radius": self.radius, "center": self.center, "inner_radius": self.inner_radius,
                "I": self.pair.I.tolist(), "J": self.pair.J.tolist()}


# ---------------------------------------------------------------------------
# integrals


def _guard(geometry, x, allow_exterior=False):
    x = np.asarray(x, dtype=float)
    dist = geometry.boundary_distance(x)
    if np.any(dist <= GUARD_FRACTION * geometry.radius):
        raise SingularPairError("evaluation point too close to the boundary spheres")
    if not allow_exterior and not np.all(geometry.contains(x)):
        raise SingularPairError("evaluation point outside the domain")


def _check_function(f, geometry):
    """Refuse slice functions whose domain misses part of the closed slice domain.

    The integral formulas need ``f`` continuous up to the boundary; a stem with
    a pole along the real axis (``exclude_real``) never qualifies, since every
    ball or shell centred on the axis meets it.  Plain callables are trusted.
    """
    stem = getattr(f, "stem", None)
    domain = getattr(stem, "domain", None)
    if domain is None:
        return
    A, B = geometry.plane_domain().grid(24, 24, closed=True, positive=False)
    if not np.all(domain.contains(A, B, closed=True)):
        raise SingularPairError("the closed slice domain is not contained in the domain of f")


def _sum(weights, values):
    # fixed summation order keeps reports reproducible
    return np.einsum("n,n...->...", weights, values)


def _surface_at_slice_point(f, geometry, y, orders):
    """Surface integral at ``y`` in ``C_I``.

    On ``C_I`` the integrand has a single near singularity, at the boundary
    point closest to ``y``; each boundary sphere gets a rule with its pole
    there and the polar angle graded on the distance scale.
    """
    pair = geometry.pair
    v = pair.coords(y) - geometry.center4
    rho = float(np.linalg.norm(v))
    pole = v / rho if rho > 0 else np.array([1.0, 0.0, 0.0, 0.0])
    spheres = [(geometry.radius, 1.0)]
    if geometry.inner_radius is not None:
        spheres.append((geometry.inner_radius, -1.0))
    total = np.zeros(8)
    for r, sign in spheres:
        rule = quad.aligned_sphere_rule(orders, r, geometry.center4, pole, abs(rho - r) / r)
        u = (rule.nodes - geometry.center4) / r
        xi = pair.embed(rule.nodes)
        density = oc.mul(sign * pair.embed(u), f(xi))
        total = total + _sum(rule.weights, _pair_integrand(pair.I, y, xi, density))
    return total


def surface_integral(f, geometry: SliceBallGeometry, x, orders: QuadratureOrders = DEFAULT_ORDERS,
                     nodes=None, allow_exterior=False):
    """``int S_{f,I}(x, xi) ds(xi)`` over the boundary of the slice domain.

    With ``nodes=None`` the integral is computed at ``Re x +- I |Im x|`` with
    rules adapted to the near singularity and extended to ``x`` by sliceness
    in ``x``.  Explicit ``(nodes, normals, weights)`` are used as given.
    """
    x = np.asarray(x, dtype=float)
    _guard(geometry, x, allow_exterior)
    _check_function(f, geometry)
    out = []
    if nodes is not None:
        xi, normals, w = nodes
        density = oc.mul(normals, f(xi))
        for point in x.reshape(-1, 8):
            out.append(_sum(w, _pair_integrand(geometry.pair.I, point, xi, density)))
        return np.asarray(out).reshape(x.shape)
    I = geometry.pair.I
    for point in x.reshape(-1, 8):
        alpha, beta, K = oc.split(point)
        y = oc.real(alpha) + beta * I
        Sy = _surface_at_slice_point(f, geometry, y, orders)
        if beta == 0.0:
            out.append(Sy)
            continue
        Syb = _surface_at_slice_point(f, geometry, oc.conj(y), orders)
        out.append(0.5 * (Sy + Syb) + oc.mul(K, -0.5 * oc.mul(I, Sy - Syb)))
    return np.asarray(out).reshape(x.shape)


def _volume_at_slice_point(f, geometry, y, orders, engine):
    """Volume integral at ``y`` in ``C_I`` with a polar rule centred at ``y``."""
    pair = geometry.pair
    v = pair.coords(y)
    dirs, t, w = quad.polar_segments(v, orders.for_volume(), geometry.radius, geometry.center, geometry.inner_radius)
    xi4 = v + t[:, None] * dirs
    xi = pair.embed(xi4)
    density = ops.crf_restricted(f, pair, xi, engine)
    # conj(xi - y)/|xi - y|^4 = -conj(omega)/t^3 ... the t^3 sits in the weights
    omega = pair.embed(dirs)
    vals = oc.mul(oc.conj(omega), density) / (TWO_PI2 * t ** 3)[:, None]
    return _sum(w, vals)


def volume_integral(f, geometry: SliceBallGeometry, x, orders: QuadratureOrders = DEFAULT_ORDERS,
                    engine=DEFAULT_ENGINE):
    """``int V_{f,I}(x, xi) dv(xi)`` for interior ``x``.

    The integrand is singular at the two points ``Re x +- I |Im x|`` of
    ``C_I``.  The integral is computed there with polar rules centred at the
    singularity and extended to ``x`` by sliceness in ``x``.
    """
    x = np.asarray(x, dtype=float)
    _guard(geometry, x)
    _check_function(f, geometry)
    I = geometry.pair.I
    out = []
    for point in x.reshape(-1, 8):
        alpha, beta, K = oc.split(point)
        y = oc.real(alpha) + beta * I
        Vy = _volume_at_slice_point(f, geometry, y, orders, engine)
        if beta == 0.0:
            out.append(Vy)
            continue
        Vyb = _volume_at_slice_point(f, geometry, oc.conj(y), orders, engine)
        V1 = 0.5 * (Vy + Vyb)
        V2 = -0.5 * oc.mul(I, Vy - Vyb)
        out.append(V1 + oc.mul(K, V2))
    return np.asarray(out).reshape(x.shape)


def volume_integral_direct(f, geometry, x, orders=DEFAULT_ORDERS, engine=DEFAULT_ENGINE):
    """Volume integral with the plain ball rule (valid when the integrand vanishes or is smooth)."""
    x = np.asarray(x, dtype=float)
    _check_function(f, geometry)
    xi, w = geometry.volume_rule(orders)
    density = ops.crf_restricted(f, geometry.pair, xi, engine)
    out = []
    for point in x.reshape(-1, 8):
        out.append(_sum(w, _pair_integrand(geometry.pair.I, point, xi, density)))
    return np.asarray(out).reshape(x.shape)


@dataclass
class BorelPompeiuResult:
    value: np.ndarray
    surface: np.ndarray
    volume: np.ndarray


def borel_pompeiu(f, geometry: SliceBallGeometry, x, orders: QuadratureOrders = DEFAULT_ORDERS,
                  include_volume=True, engine=DEFAULT_ENGINE) -> BorelPompeiuResult:
    """Surface integral minus volume integral; reconstructs ``f(x)`` in the domain."""
    S = surface_integral(f, geometry, x, orders)
    if include_volume:
        V = volume_integral(f, geometry, x, orders, engine)
    else:
        V = np.zeros_like(S)
    return BorelPompeiuResult(S - V, S, V)


def cauchy_integral(f, geometry, x, orders=DEFAULT_ORDERS):
    """Surface integral alone (equals ``f`` for slice Fueter-regular ``f``)."""
    return surface_integral(f, geometry, x, orders)


def exterior_integral(f, geometry, x, orders=DEFAULT_ORDERS):
    """Surface integral at points outside the closed domain (vanishes for Fueter-regular ``f``)."""
    x = np.asarray(x, dtype=float)
    if np.any(geometry.contains(x)):
        raise ValueError("exterior points only")
    return surface_integral(f, geometry, x, orders, allow_exterior=True)
