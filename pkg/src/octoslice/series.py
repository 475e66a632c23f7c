"""Fueter polynomials, slice Fueter powers and Taylor/Laurent expansions.

Quaternions are arrays with a trailing axis of length 4 and are embedded in
the octonions as the first four components.  The quaternionic Fueter
variables are ``z_h = x_h - x0 e_h`` (``e_1, e_2, e_3 = i, j, k``) and

    P_kappa = (1/|kappa|!) sum over all orderings of the word
              z_1^kappa1 z_2^kappa2 z_3^kappa3.

The sum is computed by grouping equal words: ``W(kappa) = sum_h z_h W(kappa - e_h)``
runs over distinct words, each of which occurs ``kappa!`` times among the
``|kappa|!`` orderings.

The slice Fueter powers attached to an orthogonal pair ``(I, J)`` are slice
functions whose stems are built from coefficient rows ``ell`` (polynomial
side) and ``m`` (reciprocal side).  Both rows are obtained by exact expansion.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from . import octonion as oc
from .numdiff import DEFAULT_ENGINE
from .quadrature import DEFAULT_ORDERS, QuadratureOrders, sphere_rule
from .slices import (
    JET_SIZE,
    PlaneDomain,
    PolyStem,
    SingularPointError,
    SliceFunction,
    StemFunction,
    WHOLE_PLANE,
    _jet_bilinear,
    _scalar_jet,
    induce,
)

MAX_ORDER = 6
"""Largest ``|kappa|`` handled by the polynomial machinery."""

FD_MAX_ORDER = 3
"""Largest ``|kappa|`` for finite-difference Taylor coefficients."""

TWO_PI2 = 2.0 * np.pi ** 2
Q_UNITS = np.eye(4)
QI, QJ, QK = Q_UNITS[1], Q_UNITS[2], Q_UNITS[3]


class CapExceeded(ValueError):
    """Requested multi-index order is above the configured cap."""


# ---------------------------------------------------------------------------
# multi-indices


@dataclass(frozen=True, order=True)
class MultiIndex:
    """``kappa = (k1, k2, k3)`` with ``|kappa| = k1 + k2 + k3`` and ``kappa! = k1! k2! k3!``."""

    k1: int
    k2: int
    k3: int

    def __post_init__(self):
        if min(self.k1, self.k2, self.k3) < 0:
            raise ValueError("multi-index entries must be nonnegative")

    @classmethod
    def of(cls, kappa) -> "MultiIndex":
        if isinstance(kappa, MultiIndex):
            return kappa
        k1, k2, k3 = (int(t) for t in kappa)
        return cls(k1, k2, k3)

    def __iter__(self):
        return iter((self.k1, self.k2, self.k3))

    def __getitem__(self, h):
        return (self.k1, self.k2, self.k3)[h]

    @property
    def order(self) -> int:
        return self.k1 + self.k2 + self.k3

    @property
    def factorial(self) -> int:
        return math.factorial(self.k1) * math.factorial(self.k2) * math.factorial(self.k3)

    def lowered(self, h) -> "MultiIndex":
        """``kappa - e_h`` for ``h`` in ``{0, 1, 2}``."""
        t = list(self)
        t[h] -= 1
        return MultiIndex(*t)

    def key(self) -> str:
        return f"{self.k1},{self.k2},{self.k3}"

    def __str__(self):
        return f"({self.k1},{self.k2},{self.k3})"


def multi_indices(k) -> Tuple[MultiIndex, ...]:
    """All ``kappa`` with ``|kappa| = k`` in lexicographic order."""
    return tuple(MultiIndex(a, b, k - a - b) for a in range(k + 1) for b in range(k + 1 - a))


def _check_cap(kappa: MultiIndex, cap=MAX_ORDER):
    if kappa.order > cap:
        raise CapExceeded(f"|kappa| = {kappa.order} exceeds the cap {cap}")


# ---------------------------------------------------------------------------
# quaternion polynomials


class QuaternionPoly4:
    """Sparse polynomial in ``(x0, x1, x2, x3)`` with quaternion coefficients.

    ``terms`` maps exponent tuples to length-4 arrays.  Multiplication keeps
    the order of the factors (quaternions do not commute).
    """

    def __init__(self, terms=None):
        self.terms: Dict[Tuple[int, int, int, int], np.ndarray] = {}
        for e, c in (terms or {}).items():
            c = np.asarray(c, dtype=float)
            if c.any():
                self.terms[tuple(e)] = c.copy()

    @classmethod
    def constant(cls, q):
        return cls({(0, 0, 0, 0): q})

    @classmethod
    def variable(cls, h, coeff=None):
        e = [0, 0, 0, 0]
        e[h] = 1
        return cls({tuple(e): Q_UNITS[0] if coeff is None else coeff})

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return QuaternionPoly4(out)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, t):
        return QuaternionPoly4({e: t * c for e, c in self.terms.items()})

    def __mul__(self, other):
        out: Dict[tuple, np.ndarray] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + oc.qmul(c1, c2)
        return QuaternionPoly4(out)

    def times_monomial(self, h, t=1.0):
        """Multiply by the real monomial ``t x_h``."""
        out = {}
        for e, c in self.terms.items():
            e2 = list(e)
            e2[h] += 1
            out[tuple(e2)] = t * c
        return QuaternionPoly4(out)

    def partial(self, h):
        out = {}
        for e, c in self.terms.items():
            if e[h]:
                e2 = list(e)
                e2[h] -= 1
                out[tuple(e2)] = e[h] * c
        return QuaternionPoly4(out)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        out = np.zeros(v.shape[:-1] + (4,))
        for e, c in self.terms.items():
            mono = np.ones(v.shape[:-1])
            for h, p in enumerate(e):
                if p:
                    mono = mono * v[..., h] ** p
            out += mono[..., None] * c
        return out

    def restrict(self) -> "QuaternionPoly":
        """The bivariate polynomial obtained by setting ``x2 = x3 = 0``."""
        deg = self.degree
        C = np.zeros((deg + 1, deg + 1, 4))
        for (p, q, r, s), c in self.terms.items():
            if r == 0 and s == 0:
                C[p, q] += c
        return QuaternionPoly(C)


class QuaternionPoly:
    """Dense bivariate polynomial ``sum C[p, q] x0^p x1^q`` with quaternion ``C[p, q]``."""

    def __init__(self, C):
        self.C = np.asarray(C, dtype=float)

    @property
    def degree(self) -> int:
        nz = np.argwhere(np.abs(self.C).sum(-1) > 0)
        return int((nz[:, 0] + nz[:, 1]).max()) if len(nz) else 0

    def __call__(self, x0, x1):
        x0 = np.asarray(x0, dtype=float)
        x1 = np.asarray(x1, dtype=float)
        out = np.zeros(np.broadcast(x0, x1).shape + (4,))
        P, Q, _ = self.C.shape
        for p in range(P):
            for q in range(Q):
                if self.C[p, q].any():
                    out = out + (x0 ** p * x1 ** q)[..., None] * self.C[p, q]
        return out

    def at(self, x):
        """Evaluate at quaternions ``x`` of ``C_i`` (only components 0 and 1 are read)."""
        x = np.asarray(x, dtype=float)
        return self(x[..., 0], x[..., 1])


def _as_quaternion(x):
    """Accept python/numpy complex numbers or ``(..., 4)`` quaternion arrays."""
    if np.iscomplexobj(x) or np.ndim(x) == 0:
        x = np.asarray(x, dtype=complex)
        out = np.zeros(x.shape + (4,))
        out[..., 0] = x.real
        out[..., 1] = x.imag
        return out
    return np.asarray(x, dtype=float)


def fueter_variables(x):
    """``(z1, z2, z3) = (-x i, -Re(x) j, -Re(x) k)`` for ``x`` in ``C_i``."""
    x = _as_quaternion(x)
    re = x[..., 0:1]
    return oc.qmul(x, -QI), -re * QJ, -re * QK


def _z_poly(h) -> QuaternionPoly4:
    """The full Fueter variable ``z_h = x_h - x0 e_h`` on ``H``."""
    return QuaternionPoly4.variable(h) - QuaternionPoly4.variable(0, Q_UNITS[h])


@lru_cache(maxsize=None)
def _word_sum(kappa: MultiIndex) -> QuaternionPoly4:
    """Sum of the distinct words with letter counts ``kappa``."""
    if kappa.order == 0:
        return QuaternionPoly4.constant(Q_UNITS[0])
    out = QuaternionPoly4()
    for h in range(3):
        if kappa[h]:
            out = out + _z_poly(h + 1) * _word_sum(kappa.lowered(h))
    return out


@dataclass(frozen=True, eq=False)
class FueterPolynomial:
    """``P_kappa`` on ``H`` together with its restriction to ``C_i``."""

    kappa: MultiIndex
    full: QuaternionPoly4
    restricted: QuaternionPoly

    def __call__(self, v):
        return self.full(v)


@lru_cache(maxsize=None)
def _fueter_poly(kappa: MultiIndex) -> FueterPolynomial:
    full = _word_sum(kappa).scale(kappa.factorial / math.factorial(kappa.order))
    return FueterPolynomial(kappa, full, full.restrict())


def fueter_poly(kappa, cap=MAX_ORDER) -> FueterPolynomial:
    """The Fueter polynomial ``P_kappa`` (memoized)."""
    kappa = MultiIndex.of(kappa)
    _check_cap(kappa, cap)
    return _fueter_poly(kappa)


def fueter_poly_bruteforce(kappa, v):
    """``(1/|kappa|!) sum_sigma z_sigma(1) ... z_sigma(|kappa|)`` over all orderings.

    Independent evaluation used as an oracle; ``|kappa|!`` products.
    """
    kappa = MultiIndex.of(kappa)
    v = np.asarray(v, dtype=float)
    z = [v[..., h, None] * Q_UNITS[0] - v[..., 0, None] * Q_UNITS[h] for h in (1, 2, 3)]
    letters = [0] * kappa.k1 + [1] * kappa.k2 + [2] * kappa.k3
    out = np.zeros(v.shape[:-1] + (4,))
    for perm in itertools.permutations(letters):
        term = np.broadcast_to(Q_UNITS[0], out.shape)
        for h in perm:
            term = oc.qmul(term, z[h])
        out = out + term
    return out / math.factorial(kappa.order)


def _left_ipow(h):
    """``(-i)^h`` as a quaternion: inverse of ``i^h``."""
    q = Q_UNITS[0]
    for _ in range(h):
        q = oc.qmul(q, -QI)
    return q


# ---------------------------------------------------------------------------
# coefficient rows


def ell_row(kappa, cap=MAX_ORDER) -> np.ndarray:
    """Row ``ell_{kappa,h}``, ``h = 0..|kappa|``, as octonions of shape ``(k+1, 8)``.

    Defined by ``P_kappa(x0 + i x1) = sum_h x0^(k-h) (i x1)^h ell_{kappa,h}``.
    """
    kappa = MultiIndex.of(kappa)
    _check_cap(kappa, cap)
    k = kappa.order
    C = fueter_poly(kappa).restricted.C
    C = np.pad(C, ((0, max(0, k + 1 - C.shape[0])), (0, max(0, k + 1 - C.shape[1])), (0, 0)))
    row = np.zeros((k + 1, 8))
    for h in range(k + 1):
        row[h, :4] = oc.qmul(_left_ipow(h), C[k - h, h])
    return row


def ell_table(kmax=2) -> Dict[MultiIndex, np.ndarray]:
    return {kappa: ell_row(kappa) for k in range(kmax + 1) for kappa in multi_indices(k)}


def reciprocal_kernel_E(v):
    """``conj(x) / (2 pi^2 |x|^4)`` on ``H`` (quaternions, trailing axis 4)."""
    v = np.asarray(v, dtype=float)
    n2 = np.sum(v * v, axis=-1)
    if np.any(n2 == 0.0):
        raise SingularPointError("the reciprocal kernel is singular at 0")
    return oc.qconj(v) / (TWO_PI2 * n2[..., None] ** 2)


@lru_cache(maxsize=None)
def _q_numerator(kappa: MultiIndex) -> QuaternionPoly4:
    """``N`` with ``Q_kappa = N / |x|^(4 + 2|kappa|)``.

    Uses ``d/dx_h (N / rho^m) = (rho dN/dx_h - 2 m x_h N) / rho^(m+1)``.
    """
    if kappa.order == 0:
        terms = {(1, 0, 0, 0): Q_UNITS[0] / TWO_PI2}
        for h in (1, 2, 3):
            e = [0, 0, 0, 0]
            e[h] = 1
            terms[tuple(e)] = -Q_UNITS[h] / TWO_PI2
        return QuaternionPoly4(terms)
    h = next(t for t in range(3) if kappa[t])
    prev = _q_numerator(kappa.lowered(h))
    m = 2 + kappa.order - 1
    dN = prev.partial(h + 1)
    rho_dN = QuaternionPoly4()
    for axis in range(4):
        rho_dN = rho_dN + dN.times_monomial(axis).times_monomial(axis)
    return rho_dN - prev.times_monomial(h + 1, 2.0 * m)


def Q_kappa(kappa, v, cap=MAX_ORDER):
    """``Q_kappa = d^kappa E`` at quaternions ``v != 0``."""
    kappa = MultiIndex.of(kappa)
    _check_cap(kappa, cap)
    v = np.asarray(v, dtype=float)
    n2 = np.sum(v * v, axis=-1)
    if np.any(n2 == 0.0):
        raise SingularPointError("Q_kappa is singular at 0")
    return _q_numerator(kappa)(v) / (n2 ** (2 + kappa.order))[..., None]


def m_row(kappa, cap=MAX_ORDER) -> np.ndarray:
    """Row ``m_{kappa,h}``, ``h = 0..|kappa|+1``, by exact expansion.

    ``Q_kappa(x0 + i x1) |x|^(4+2k) = sum_h x0^(k+1-h) (i x1)^h m_{kappa,h}``.
    """
    kappa = MultiIndex.of(kappa)
    _check_cap(kappa, cap)
    k = kappa.order
    C = _q_numerator(kappa).restrict().C
    C = np.pad(C, ((0, max(0, k + 2 - C.shape[0])), (0, max(0, k + 2 - C.shape[1])), (0, 0)))
    row = np.zeros((k + 2, 8))
    for h in range(k + 2):
        row[h, :4] = oc.qmul(_left_ipow(h), C[k + 1 - h, h])
    return row


def m_row_vandermonde(kappa) -> np.ndarray:
    """``m`` row recovered from samples of ``Q_kappa`` on the unit circle of ``C_i``.

    The angles are Chebyshev points of ``(-pi/2, pi/2)``, so ``cos`` never
    vanishes and the homogeneous Vandermonde system is well conditioned.
    """
    kappa = MultiIndex.of(kappa)
    k = kappa.order
    n = k + 2
    theta = 0.5 * np.pi * np.cos((2 * np.arange(n) + 1) * np.pi / (2 * n))
    v = np.zeros((n, 4))
    v[:, 0] = np.cos(theta)
    v[:, 1] = np.sin(theta)
    rhs = Q_kappa(kappa, v)  # |v| = 1
    A = np.cos(theta)[:, None] ** (k + 1 - np.arange(n)) * np.sin(theta)[:, None] ** np.arange(n)
    U = np.linalg.solve(A, rhs)
    row = np.zeros((n, 8))
    for h in range(n):
        row[h, :4] = oc.qmul(_left_ipow(h), U[h])
    return row


def m_oracle_gaps(kmax=3, tol=1e-8) -> Dict[MultiIndex, float]:
    """Multi-indices whose exact and Vandermonde ``m`` rows differ by more than ``tol``.

    An empty dict means the two derivations agree on every row up to ``kmax``.
    """
    gaps = {}
    for k in range(kmax + 1):
        for kappa in multi_indices(k):
            gap = float(np.max(np.abs(m_row(kappa) - m_row_vandermonde(kappa))))
            if gap > tol:
                gaps[kappa] = gap
    return gaps


def m_table(kmax=2) -> Dict[MultiIndex, np.ndarray]:
    return {kappa: m_row(kappa) for k in range(kmax + 1) for kappa in multi_indices(k)}


def row_polynomial(row, v, reciprocal=False):
    """Evaluate ``sum_h x0^(n-h) (i x1)^h row_h`` (divided by ``|x|^(2n+2)`` if reciprocal) on ``C_i``."""
    v = np.asarray(v, dtype=float)
    row = np.asarray(row, dtype=float)
    n = len(row) - 1
    out = np.zeros(v.shape[:-1] + (4,))
    ix1 = v[..., 1, None] * QI
    for h in range(n + 1):
        power = np.broadcast_to(Q_UNITS[0], out.shape)
        for _ in range(h):
            power = oc.qmul(power, ix1)
        out = out + (v[..., 0] ** (n - h))[..., None] * oc.qmul(power, row[h, :4])
    if reciprocal:
        out = out / (np.sum(v * v, axis=-1) ** (n + 1))[..., None]
    return out


# ---------------------------------------------------------------------------
# slice Fueter powers


def _power_polys(pair, rows_and_coeffs, deg_shift=0):
    """Stem coefficient grids of ``sum Re^(n-h) Im^h (row_h c)`` with the bilinear odd part.

    ``rows_and_coeffs`` yields ``(row, c)``; ``n = len(row) - 1``.
    """
    items = list(rows_and_coeffs)
    n_max = max((len(row) - 1 for row, _ in items), default=0)
    C1 = np.zeros((n_max + 1, n_max + 1, 8))
    C2 = np.zeros((n_max + 1, n_max + 1, 8))
    unit = pair.I
    for row, c in items:
        n = len(row) - 1
        c = np.asarray(c, dtype=float)
        for h in range(n + 1):
            r = pair.embed(row[h, :4])
            sign = (-1.0) ** (h // 2)
            if h % 2 == 0:
                C1[n - h, h] += sign * oc.mul(r, c)
            else:
                C2[n - h, h] += sign * oc.i_product(unit, r, c)
    return C1, C2


def _coeff_items(coeffs):
    return [(MultiIndex.of(k), np.asarray(c, dtype=float)) for k, c in dict(coeffs).items()]


def power_P_stem(pair, coeffs, name="P-power") -> PolyStem:
    """Stem of ``x -> sum_kappa P_{I,kappa}(x, c_kappa)`` (``coeffs``: kappa -> c)."""
    items = [(ell_row(k), c) for k, c in _coeff_items(coeffs)]
    C1, C2 = _power_polys(pair, items)
    return PolyStem(C1, C2, WHOLE_PLANE, name=name)


class RationalStem(StemFunction):
    """Sum of terms ``N_t(a, b) / (a^2 + b^2)^m_t`` with polynomial stems ``N_t``."""

    def __init__(self, terms, domain=None, name="rational"):
        terms = tuple((N, int(m)) for N, m in terms)
        object.__setattr__(self, "terms", terms)
        dom = domain if domain is not None else PlaneDomain.annulus(0.0, np.inf)
        super().__init__(self._eval, dom, self._jet, 2, name)

    @staticmethod
    def _rho_jet(a, b, m, order):
        rho = a * a + b * b
        if np.any(rho == 0.0):
            raise SingularPointError("reciprocal power at the origin")
        s0 = rho ** (-m)
        s1 = rho ** (-m - 1)
        s2 = rho ** (-m - 2)
        rows = [s0, -2 * m * a * s1, -2 * m * b * s1]
        if order >= 2:
            c = 4.0 * m * (m + 1)
            rows += [-2 * m * s1 + c * a * a * s2, c * a * b * s2, -2 * m * s1 + c * b * b * s2]
        return _scalar_jet(np.stack(rows))

    def _eval(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
        F1 = np.zeros(a.shape + (8,))
        F2 = np.zeros(a.shape + (8,))
        rho = a * a + b * b
        if np.any(rho == 0.0):
            raise SingularPointError("reciprocal power at the origin")
        for N, m in self.terms:
            N1, N2 = N(a, b)
            F1 = F1 + N1 / (rho ** m)[..., None]
            F2 = F2 + N2 / (rho ** m)[..., None]
        return F1, F2

    def _jet(self, a, b, order):
        a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
        size = JET_SIZE[order]
        J1 = np.zeros((size,) + a.shape + (8,))
        J2 = np.zeros_like(J1)
        for N, m in self.terms:
            S = self._rho_jet(a, b, m, order)
            A1, A2 = N.jet(a, b, order)
            J1 = J1 + _jet_bilinear(oc.mul, S, A1)[:size]
            J2 = J2 + _jet_bilinear(oc.mul, S, A2)[:size]
        return J1, J2


def power_Q_stem(pair, coeffs, name="Q-power") -> RationalStem:
    """Stem of ``x -> sum_kappa Q_{I,kappa}(x, c_kappa)``, grouped by ``|kappa|``."""
    by_order: Dict[int, list] = {}
    for k, c in _coeff_items(coeffs):
        by_order.setdefault(k.order, []).append((m_row(k), c))
    terms = []
    for k, items in sorted(by_order.items()):
        C1, C2 = _power_polys(pair, items)
        terms.append((PolyStem(C1, C2), 2 + k))
    return RationalStem(terms, name=name)


def slice_power_P(pair, kappa, x, c):
    """``P_{I,kappa}(x, c)``."""
    return induce(power_P_stem(pair, {MultiIndex.of(kappa): c}))(x)


def slice_power_Q(pair, kappa, x, c):
    """``Q_{I,kappa}(x, c)`` for ``x != 0``."""
    return induce(power_Q_stem(pair, {MultiIndex.of(kappa): c}))(x)


def restricted_P(pair, kappa, x, c):
    """``psi_I(P_kappa(psi_I^{-1}(x))) c`` for ``x`` in ``H_I``."""
    v = pair.coords(x)
    return oc.mul(pair.embed(fueter_poly(kappa)(v)), c)


def restricted_Q(pair, kappa, x, c):
    """``psi_I(Q_kappa(psi_I^{-1}(x))) c`` for ``x`` in ``H_I``."""
    v = pair.coords(x)
    return oc.mul(pair.embed(Q_kappa(kappa, v)), c)


def basis_rank(k, n_samples=64, rng=None, tol=1e-9) -> int:
    """Numerical rank of ``{P_kappa}_{|kappa| = k}`` evaluated on ``C_i``.

    Diagnostic only: columns are the flattened values at random points.
    """
    rng = np.random.default_rng(rng)
    v = np.zeros((n_samples, 4))
    v[:, :2] = rng.standard_normal((n_samples, 2))
    cols = [fueter_poly(kappa).restricted.at(v).ravel() for kappa in multi_indices(k)]
    return int(np.linalg.matrix_rank(np.stack(cols, axis=1), tol=tol))


# ---------------------------------------------------------------------------
# Taylor expansion


def _multinomial(parts):
    out = math.factorial(sum(parts))
    for p in parts:
        out //= math.factorial(p)
    return out


def _poly_taylor_coefficient(stem: PolyStem, pair, kappa: MultiIndex, y):
    """``d_{I,kappa} f(y) / kappa!`` for a polynomial stem, in closed form.

    On ``H_I``, ``f_I(v) = sum_pq C1[p,q] v0^p s^(q/2) + sum_pq (sum_h v_h E_h C2[p,q]) v0^p s^((q-1)/2)``
    with ``s = v1^2 + v2^2 + v3^2`` and ``E = (I, J, IJ)``; the wanted value is the
    coefficient of ``v1^k1 v2^k2 v3^k3`` at ``v0 = y``.
    """
    k = kappa.order
    P = stem.C1.shape[0]
    if k >= stem.C1.shape[1]:
        return np.zeros(8)
    ypow = float(y) ** np.arange(P)
    out = np.zeros(8)
    if k % 2 == 0:
        half = [t // 2 for t in kappa]
        if all(t % 2 == 0 for t in kappa):
            out += _multinomial(half) * np.einsum("p,pc->c", ypow, stem.C1[:, k])
    else:
        base = np.einsum("p,pc->c", ypow, stem.C2[:, k])
        frame = pair.frame
        for h in range(3):
            if kappa[h] == 0:
                continue
            rest = list(kappa)
            rest[h] -= 1
            if all(t % 2 == 0 for t in rest):
                out += _multinomial([t // 2 for t in rest]) * oc.mul(frame[h + 1], base)
    return out


def _fd_weights(order, half_width=3):
    s = np.arange(-half_width, half_width + 1, dtype=float)
    A = np.array([s ** i / math.factorial(i) for i in range(len(s))])
    e = np.zeros(len(s))
    e[order] = 1.0
    return s, np.linalg.solve(A, e)


def _fd_taylor_coefficient(f, pair, kappa: MultiIndex, y, step=2e-2):
    """Tensor-product central differences of ``f_I`` at ``v = (y, 0, 0, 0)``."""
    if kappa.order > FD_MAX_ORDER:
        raise CapExceeded(f"finite-difference Taylor coefficients need |kappa| <= {FD_MAX_ORDER}")
    stencils = [_fd_weights(t) if t else (np.zeros(1), np.ones(1)) for t in kappa]
    offsets = np.array(list(itertools.product(*(s for s, _ in stencils))))
    weights = np.prod(np.array(list(itertools.product(*(w for _, w in stencils)))), axis=1)
    v = np.zeros((len(offsets), 4))
    v[:, 0] = y
    v[:, 1:] = step * offsets
    values = f(pair.embed(v))
    return weights @ values / step ** kappa.order / kappa.factorial


def taylor_coefficients(f: SliceFunction, pair, k, y=0.0, engine=DEFAULT_ENGINE, step=2e-2):
    """``{kappa: d_{I,kappa} f(y) / kappa!}`` over ``|kappa| = k``.

    Exact for polynomial stems in analytic mode, otherwise finite differences.
    """
    stem = getattr(f, "stem", None)
    exact = isinstance(stem, PolyStem) and engine.analytic
    out = {}
    for kappa in multi_indices(k):
        if exact:
            out[kappa] = _poly_taylor_coefficient(stem, pair, kappa, y)
        else:
            out[kappa] = _fd_taylor_coefficient(f, pair, kappa, y, step)
    return out


def _shift_grid(C, y):
    """Coefficients of ``sum C[p, q] (a - y)^p b^q`` in powers of ``a``."""
    out = np.zeros_like(C)
    for p in range(C.shape[0]):
        for p2 in range(p + 1):
            out[p2] += math.comb(p, p2) * (-y) ** (p - p2) * C[p]
    return out


def shifted(stem: StemFunction, y: float) -> StemFunction:
    """The stem ``(a, b) -> F(a - y, b)``."""
    if y == 0.0:
        return stem
    if isinstance(stem, PolyStem):
        return PolyStem(_shift_grid(stem.C1, y), _shift_grid(stem.C2, y), stem.domain, stem.name)

    def func(a, b):
        return stem(np.asarray(a) - y, b)

    def jet(a, b, order):
        return stem.jet(np.asarray(a) - y, b, order)

    dom = PlaneDomain(stem.domain.kind, stem.domain.params,
                      stem.domain.center + y, stem.domain.exclude_real)
    return StemFunction(func, dom, jet if stem.jet_func is not None else None,
                        stem.jet_order, stem.name)


def taylor_power(f: SliceFunction, pair, k, y=0.0, engine=DEFAULT_ENGINE) -> SliceFunction:
    """``x -> P_{I,k;f,y}(x) = sum_{|kappa|=k} P_{I,kappa}(x - y, d_{I,kappa} f(y)/kappa!)``."""
    coeffs = taylor_coefficients(f, pair, k, y, engine)
    stem = shifted(power_P_stem(pair, coeffs, name=f"taylor{k}"), float(y))
    return induce(stem)


def taylor_polynomial(f: SliceFunction, pair, K, y=0.0, engine=DEFAULT_ENGINE) -> SliceFunction:
    """Partial sum of the Taylor series through degree ``K`` as one slice function."""
    coeffs = {}
    for k in range(K + 1):
        coeffs.update(taylor_coefficients(f, pair, k, y, engine))
    return induce(shifted(power_P_stem(pair, coeffs, name=f"taylor<={K}"), float(y)))


def taylor_sum(f: SliceFunction, pair, K, x, y=0.0, engine=DEFAULT_ENGINE):
    return taylor_polynomial(f, pair, K, y, engine)(x)


# ---------------------------------------------------------------------------
# Laurent expansion


@dataclass(frozen=True, eq=False)
class LaurentCoefficients:
    """Coefficients ``a`` (polynomial side) and ``b`` (reciprocal side) up to order ``K``."""

    pair: oc.OrthoUnitPair
    a: Dict[MultiIndex, np.ndarray]
    b: Dict[MultiIndex, np.ndarray]
    radius: float
    center: float
    K: int

    def regular_part(self, k=None) -> SliceFunction:
        sel = {q: c for q, c in self.a.items() if k is None or q.order == k}
        return induce(shifted(power_P_stem(self.pair, sel, "laurent-P"), self.center))

    def principal_part(self, k=None) -> SliceFunction:
        sel = {q: c for q, c in self.b.items() if k is None or q.order == k}
        return induce(shifted(power_Q_stem(self.pair, sel, "laurent-Q"), self.center))

    def summands(self):
        """``[(side, k, slice function)]`` for every homogeneous summand."""
        out = []
        for k in range(self.K + 1):
            out.append(("P", k, self.regular_part(k)))
            out.append(("Q", k, self.principal_part(k)))
        return out

    def __call__(self, x):
        return self.regular_part()(x) + self.principal_part()(x)


def laurent_coeffs(g, pair, r, K=2, orders: QuadratureOrders = DEFAULT_ORDERS, center=0.0,
                   normalize=True) -> LaurentCoefficients:
    """Coefficients from surface integrals over the 3-sphere ``S_I(r)`` of ``H_I``.

    ``a_kappa = (-1)^|kappa| c int Q*_kappa(xi) (m(xi) g(xi + y)) dsigma`` and
    ``b_kappa`` with ``P*_kappa``, where ``c = 1/kappa!`` when ``normalize`` is
    set (see the module notes) and ``1`` otherwise.
    """
    rule = sphere_rule(orders, radius=r)
    u = rule.nodes / r
    xi = pair.embed(rule.nodes)
    xi[..., 0] += center
    mg = oc.mul(pair.embed(u), g(xi))
    a, b = {}, {}
    for k in range(K + 1):
        for kappa in multi_indices(k):
            factor = (-1.0) ** k / (kappa.factorial if normalize else 1.0)
            Qs = pair.embed(Q_kappa(kappa, rule.nodes))
            Ps = pair.embed(fueter_poly(kappa)(rule.nodes))
            a[kappa] = factor * rule.integrate(oc.mul(Qs, mg))
            b[kappa] = factor * rule.integrate(oc.mul(Ps, mg))
    return LaurentCoefficients(pair, a, b, float(r), float(center), K)


def laurent_sum(g, pair, K, x, r=1.0, orders: QuadratureOrders = DEFAULT_ORDERS, center=0.0):
    return laurent_coeffs(g, pair, r, K, orders, center)(x)


# ---------------------------------------------------------------------------
# golden tables

GOLDEN_FILE = "golden_tables.json"
GOLDEN_ELL_ORDER = 4
GOLDEN_M_ORDER = 3


def _round15(x):
    return [[float(f"{t:.15g}") + 0.0 for t in row] for row in np.asarray(x)]


def build_tables(ell_order=GOLDEN_ELL_ORDER, m_order=GOLDEN_M_ORDER) -> dict:
    return {
        "schema": 1,
        "basis": ["1", "i", "j", "k", "l", "li", "lj", "lk"],
        "ell": {k.key(): _round15(v) for k, v in ell_table(ell_order).items()},
        "m": {k.key(): _round15(v) for k, v in m_table(m_order).items()},
    }


def load_golden_tables() -> dict:
    text = resources.files("octoslice").joinpath("data", GOLDEN_FILE).read_text()
    return json.loads(text)


def write_golden_tables(path: Optional[Path] = None) -> Path:
    """Regenerate the golden JSON (used when the table order changes)."""
    if path is None:
        path = Path(__file__).parent / "data" / GOLDEN_FILE
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_dump_tables(build_tables()))
    return path


def _dump_tables(tables) -> str:
    """JSON with one multi-index row per line."""
    lines = ["{", f' "schema": {tables["schema"]},', f' "basis": {json.dumps(tables["basis"])},']
    for name in ("ell", "m"):
        rows = [f'  "{k}": {json.dumps(v)}' for k, v in sorted(tables[name].items())]
        tail = "," if name == "ell" else ""
        lines.append(f' "{name}": {{\n' + ",\n".join(rows) + "\n }" + tail)
    lines.append("}")
    return "\n".join(lines) + "\n"
