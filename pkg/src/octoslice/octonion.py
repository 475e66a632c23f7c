"""Octonion arithmetic on plain numpy arrays.

An octonion is an array whose last axis has length 8, holding the real
components with respect to the basis ``(1, i, j, k, l, li, lj, lk)``.  Every
function broadcasts over leading axes, so a batch of ``n`` octonions is just
an ``(n, 8)`` array.

Multiplication is the Cayley-Dickson doubling of the quaternions::

    (a + l b)(c + l d) = (a c - d conj(b)) + l (conj(a) d + c b)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ALG_TOL = 1e-12
"""Absolute tolerance for algebraic identities, scaled by operand sizes."""

BASIS = np.eye(8)
ONE, E1, E2, E3, E4, E5, E6, E7 = BASIS
I, J, K, L, LI, LJ, LK = E1, E2, E3, E4, E5, E6, E7
UNITS = BASIS[1:]


class ZeroDivision(ZeroDivisionError):
    """Raised when inverting an octonion of zero norm."""


def octonion(*components) -> np.ndarray:
    """Build an octonion from up to eight leading real components."""
    if len(components) == 1 and np.ndim(components[0]) > 0:
        components = tuple(np.asarray(components[0], dtype=float).ravel())
    if len(components) > 8:
        raise ValueError("an octonion has at most 8 components")
    out = np.zeros(8)
    out[: len(components)] = components
    return out


def real(t) -> np.ndarray:
    """Embed real scalars (any shape) as octonions."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape + (8,))
    out[..., 0] = t
    return out


# -- quaternion kernels -----------------------------------------------------

def qmul(p, q):
    """Hamilton product of quaternion arrays with trailing axis 4."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    shape = np.broadcast_shapes(p.shape, q.shape)
    P = _components(np.broadcast_to(p, shape))
    Q = _components(np.broadcast_to(q, shape))
    return np.stack(_hamilton(P, Q), axis=-1)


def _components(x):
    """Contiguous copies of the components (fast elementwise arithmetic)."""
    return tuple(np.array(c, order="C") for c in np.moveaxis(x, -1, 0))


def _hamilton(p, q):
    p0, p1, p2, p3 = p
    q0, q1, q2, q3 = q
    return (
        p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
        p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
        p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
        p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
    )


def _qbar(q):
    return (q[0], -q[1], -q[2], -q[3])


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


# -- octonion operations ----------------------------------------------------

def mul(x, y):
    """Octonion product ``x y`` (broadcasting).

    Implemented literally as the Cayley-Dickson formula on quaternion halves.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape)
    X = _components(np.broadcast_to(x, shape))
    Y = _components(np.broadcast_to(y, shape))
    a, b = X[:4], X[4:]
    c, d = Y[:4], Y[4:]
    ac = _hamilton(a, c)
    dbb = _hamilton(d, _qbar(b))
    abd = _hamilton(_qbar(a), d)
    cb = _hamilton(c, b)
    out = np.empty(shape)
    for h in range(4):
        out[..., h] = ac[h] - dbb[h]
        out[..., 4 + h] = abd[h] + cb[h]
    return out


def mul_chain(*factors):
    """Left-nested product ``((x1 x2) x3) ...``."""
    out = factors[0]
    for factor in factors[1:]:
        out = mul(out, factor)
    return out


_CONJ_SIGNS = np.array([1.0, -1, -1, -1, -1, -1, -1, -1])


def conj(x):
    return np.asarray(x, dtype=float) * _CONJ_SIGNS


def re(x):
    """Real part as a real array (trailing axis dropped)."""
    return np.asarray(x, dtype=float)[..., 0]


def im(x):
    out = np.array(x, dtype=float, copy=True)
    out[..., 0] = 0.0
    return out


def norm2(x):
    x = np.asarray(x, dtype=float)
    return np.einsum("...i,...i->...", x, x)


def norm(x):
    return np.sqrt(norm2(x))


def inner(x, y):
    """Euclidean inner product of the 8-vectors."""
    return np.einsum("...i,...i->...", np.asarray(x, float), np.asarray(y, float))


def inverse(x):
    """``conj(x)/|x|^2``; raises :class:`ZeroDivision` on a zero entry."""
    n2 = norm2(x)
    if np.any(n2 == 0.0):
        raise ZeroDivision("octonion inverse of 0")
    return conj(x) / n2[..., None]


def scale(t, x):
    """Multiply octonions by real scalars of a broadcastable shape."""
    return np.asarray(t, dtype=float)[..., None] * np.asarray(x, dtype=float)


def associator(x, y, z):
    return mul(mul(x, y), z) - mul(x, mul(y, z))


def delta_poly(xi, x):
    """The real-coefficient quadratic ``x^2 - 2 x Re(xi) + |xi|^2``."""
    xi = np.asarray(xi, dtype=float)
    x = np.asarray(x, dtype=float)
    out = mul(x, x) - scale(2.0 * re(xi), x)
    out[..., 0] += norm2(xi)
    return out


def sphere_point(xi, unit):
    """The point ``Re(xi) + |Im(xi)| unit`` of the conjugation sphere of ``xi``."""
    xi = np.asarray(xi, dtype=float)
    out = scale(norm(im(xi)), np.asarray(unit, dtype=float))
    out[..., 0] += re(xi)
    return out


def split(x):
    """Return ``(alpha, beta, unit)`` with ``x = alpha + beta*unit`` and ``beta >= 0``.

    On the real axis the unit defaults to ``i``.
    """
    x = np.asarray(x, dtype=float)
    alpha = x[..., 0]
    imag = im(x)
    beta = norm(imag)
    safe = np.where(beta > 0.0, beta, 1.0)
    unit = imag / safe[..., None]
    unit = np.where((beta > 0.0)[..., None], unit, I)
    return alpha, beta, unit


def i_product(unit, a, b):
    """The bilinear product ``-unit((unit a) b)``."""
    return -mul(unit, mul(mul(unit, a), b))


def moufang_residual(x, y, z):
    """Norm of ``x(y(xz)) - ((xy)x)z``; zero in any alternative algebra."""
    lhs = mul(x, mul(y, mul(x, z)))
    rhs = mul(mul(mul(x, y), x), z)
    return norm(lhs - rhs)


def trace(x):
    """``x + conj(x)`` as a real number."""
    return 2.0 * re(x)


# -- imaginary units and quaternionic slices --------------------------------

def _as_unit(value, *, tol=ALG_TOL) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    if value.shape != (8,):
        raise ValueError("an imaginary unit is a single octonion")
    if abs(value[0]) > tol or abs(norm(value) - 1.0) > tol:
        raise ValueError("not an imaginary unit: needs Re = 0 and |I| = 1")
    out = value.copy()
    out[0] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class ImaginaryUnit:
    """A point of the 6-sphere ``{I : I^2 = -1}``."""

    value: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "value", _as_unit(self.value))

    def __array__(self, dtype=None, copy=None):
        return self.value if dtype is None else self.value.astype(dtype)


def unit_vector(value) -> np.ndarray:
    """Accept an :class:`ImaginaryUnit` or a raw octonion and return the array."""
    if isinstance(value, ImaginaryUnit):
        return value.value
    return np.asarray(value, dtype=float)


@dataclass(frozen=True, eq=False)
class OrthoUnitPair:
    """Two orthogonal imaginary units ``(I, J)`` spanning the slice ``H_IJ``."""

    I: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        first = _as_unit(unit_vector(self.I))
        second = _as_unit(unit_vector(self.J))
        if abs(inner(first, second)) > ALG_TOL:
            raise ValueError("I and J must be orthogonal")
        object.__setattr__(self, "I", first)
        object.__setattr__(self, "J", second)

    @property
    def K(self) -> np.ndarray:
        return mul(self.I, self.J)

    @property
    def frame(self) -> np.ndarray:
        """Rows ``1, I, J, IJ``: an orthonormal frame of ``H_IJ``."""
        return np.stack([ONE, self.I, self.J, self.K])

    def embed(self, q):
        """The algebra embedding ``q0 + q1 I + q2 J + q3 IJ`` of quaternions."""
        return np.asarray(q, dtype=float) @ self.frame

    def coords(self, x):
        """Coordinates of ``x`` along the frame (inverse of :meth:`embed` on ``H_IJ``)."""
        return np.asarray(x, dtype=float) @ self.frame.T

    def distance(self, x):
        """Euclidean distance from ``x`` to the slice ``H_IJ``."""
        x = np.asarray(x, dtype=float)
        return norm(x - self.embed(self.coords(x)))


STANDARD_PAIR = None  # set below, after the class is usable


def random_unit(seed=None) -> ImaginaryUnit:
    rng = np.random.default_rng(seed)
    for _ in range(64):
        v = np.zeros(8)
        v[1:] = rng.standard_normal(7)
        n = norm(v)
        if n > 1e-8:
            return ImaginaryUnit(v / n)
    raise RuntimeError("could not draw a nondegenerate imaginary direction")


def complete_pair(unit, seed=None, candidate=None, max_tries=64) -> OrthoUnitPair:
    """Extend ``unit`` to an orthogonal pair by Gram-Schmidt.

    ``candidate`` fixes the first direction tried; otherwise directions are
    drawn from ``seed``.  Candidates within 1e-8 of ``span(1, I)`` are rejected.
    """
    first = _as_unit(unit_vector(unit))
    rng = np.random.default_rng(seed)
    for attempt in range(max_tries):
        if attempt == 0 and candidate is not None:
            v = np.array(candidate, dtype=float)
        else:
            v = np.zeros(8)
            v[1:] = rng.standard_normal(7)
        v[0] = 0.0
        v = v - inner(v, first) * first
        n = norm(v)
        if n > 1e-8:
            return OrthoUnitPair(first, v / n)
    raise RuntimeError("Gram-Schmidt kept hitting span(1, I)")


def random_pair(seed=None) -> OrthoUnitPair:
    rng = np.random.default_rng(seed)
    return complete_pair(random_unit(rng), rng)


def random_octonions(rng, n, scale_=1.0):
    return scale_ * rng.standard_normal((n, 8))


STANDARD_PAIR = OrthoUnitPair(I, J)
