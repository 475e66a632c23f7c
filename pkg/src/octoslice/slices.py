"""Stem functions, slice functions and the slice algebra.

A stem function is a pair ``F = (F1, F2)`` of octonion-valued functions on a
planar domain ``D`` symmetric under ``(a, b) -> (a, -b)``, with ``F1`` even and
``F2`` odd in ``b``.  It induces the slice function

    f(a + b I) = F1(a, b) + I F2(a, b)

on the circularization of ``D``.  Stems may carry an analytic *jet*: values
together with first (and optionally second) partial derivatives, stacked on a
leading axis in the order ``(v, d_a, d_b, d_aa, d_ab, d_bb)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import numdiff
from . import octonion as oc

JET_SIZE = {0: 1, 1: 3, 2: 6}


class DomainError(ValueError):
    """Raised when a point lies outside the domain of a function."""


class SingularPointError(ArithmeticError):
    """Raised when an operation is evaluated where it is singular."""


# ---------------------------------------------------------------------------
# planar domains


@dataclass(frozen=True)
class PlaneDomain:
    """Symmetric planar domain ``D``.

    ``kind`` is one of ``disc``, ``annulus`` or ``rectangle``.  Discs and
    annuli are centred at the real point ``center``.  Rectangles are
    ``[x0min, x0max] x [-x1max, x1max]``.  With ``exclude_real`` the real axis
    is removed from ``D`` (needed for stems with a pole along it).
    """

    kind: str
    params: tuple
    center: float = 0.0
    exclude_real: bool = False

    def __post_init__(self):
        if self.kind not in ("disc", "annulus", "rectangle"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind != "rectangle" and not (self.params[-1] > 0 and self.params[0] >= 0):
            raise ValueError("radii must be positive (an annulus may have r1 = 0)")
        if self.kind == "annulus" and not self.params[0] < self.params[1]:
            raise ValueError("annulus needs r1 < r2")
        if self.kind == "rectangle":
            x0min, x0max, x1max = self.params
            if not (x0min < x0max and x1max > 0):
                raise ValueError("degenerate rectangle")

    @classmethod
    def disc(cls, radius=np.inf, center=0.0, exclude_real=False):
        return cls("disc", (float(radius),), float(center), exclude_real)

    @classmethod
    def annulus(cls, r1, r2, center=0.0):
        # an annulus centred on the real axis never meets it between the radii
        return cls("annulus", (float(r1), float(r2)), float(center), False)

    @classmethod
    def rectangle(cls, x0min, x0max, x1max, exclude_real=False):
        return cls("rectangle", (float(x0min), float(x0max), float(x1max)), 0.0, exclude_real)

    def contains(self, alpha, beta, closed=False):
        alpha = np.asarray(alpha, dtype=float)
        beta = np.abs(np.asarray(beta, dtype=float))
        if self.kind == "rectangle":
            x0min, x0max, x1max = self.params
            if closed:
                inside = (alpha >= x0min) & (alpha <= x0max) & (beta <= x1max)
            else:
                inside = (alpha > x0min) & (alpha < x0max) & (beta < x1max)
        else:
            rho = np.hypot(alpha - self.center, beta)
            outer = self.params[-1]
            inside = rho <= outer if closed else rho < outer
            if self.kind == "annulus":
                inner = self.params[0]
                inside &= rho >= inner if closed else rho > inner
        if self.exclude_real:
            inside &= beta > 0
        return inside

    def contains_octonion(self, x, closed=False):
        """Membership of octonions in the circularization, via ``(Re x, |Im x|)``."""
        x = np.asarray(x, dtype=float)
        return self.contains(oc.re(x), oc.norm(oc.im(x)), closed=closed)

    def boundary_distance(self, alpha, beta):
        """Euclidean distance from ``(alpha, |beta|)`` to the boundary of ``D``."""
        alpha = np.asarray(alpha, dtype=float)
        beta = np.abs(np.asarray(beta, dtype=float))
        if self.kind == "rectangle":
            x0min, x0max, x1max = self.params
            d = np.minimum(np.abs(alpha - x0min), np.abs(alpha - x0max))
            return np.minimum(d, np.abs(x1max - beta))
        rho = np.hypot(alpha - self.center, beta)
        d = np.abs(self.params[-1] - rho)
        if self.kind == "annulus":
            d = np.minimum(d, np.abs(rho - self.params[0]))
        return d

    def bounds(self):
        """Bounding box ``(amin, amax, bmax)`` of the closed half-domain."""
        if self.kind == "rectangle":
            return self.params
        outer = self.params[-1]
        return (self.center - outer, self.center + outer, outer)

    def grid(self, n_alpha=32, n_beta=32, closed=False, positive=True):
        """Tensor grid of ``(alpha, beta)`` points of ``D`` (flattened).

        With ``positive`` only ``beta > 0`` rows are produced; otherwise the
        grid is symmetric in ``beta``.
        """
        amin, amax, bmax = self.bounds()
        if not np.isfinite(bmax):
            amin, amax, bmax = -2.0, 2.0, 2.0
        if closed:
            a = np.linspace(amin, amax, n_alpha)
            b = np.linspace(0.0, bmax, n_beta)
        else:
            a = np.linspace(amin, amax, n_alpha + 2)[1:-1]
            b = np.linspace(0.0, bmax, n_beta + 2)[1:-1] if positive else np.linspace(0.0, bmax, n_beta + 1)[1:]
        if not positive:
            b = np.concatenate([-b[::-1], b])
        A, B = np.meshgrid(a, b, indexing="ij")
        A, B = A.ravel(), B.ravel()
        keep = self.contains(A, B, closed=closed)
        if positive:
            keep &= B > 0
        return A[keep], B[keep]

    def to_dict(self):
        return {"kind": self.kind, "params": list(self.params), "center": self.center,
                "exclude_real": self.exclude_real}


WHOLE_PLANE = PlaneDomain.disc()


# ---------------------------------------------------------------------------
# jets


def _jet_bilinear(P, A, B):
    """Leibniz rule for a bilinear ``P`` applied to jets ``A`` and ``B``."""
    m = min(len(A), len(B))
    out = [P(A[0], B[0])]
    if m >= 3:
        out.append(P(A[1], B[0]) + P(A[0], B[1]))
        out.append(P(A[2], B[0]) + P(A[0], B[2]))
    if m >= 6:
        out.append(P(A[3], B[0]) + 2.0 * P(A[1], B[1]) + P(A[0], B[3]))
        out.append(P(A[4], B[0]) + P(A[1], B[2]) + P(A[2], B[1]) + P(A[0], B[4]))
        out.append(P(A[5], B[0]) + 2.0 * P(A[2], B[2]) + P(A[0], B[5]))
    return np.stack(out)


def _scalar_jet(values):
    """Promote a real jet (m, ...) to an octonion jet on the real axis."""
    values = np.asarray(values, dtype=float)
    out = np.zeros(values.shape + (8,))
    out[..., 0] = values
    return out


# ---------------------------------------------------------------------------
# stem functions


StemEval = Callable[[np.ndarray, np.ndarray], tuple]
JetEval = Callable[[np.ndarray, np.ndarray, int], tuple]


@dataclass(frozen=True, eq=False)
class StemFunction:
    """A stem function ``(a, b) -> (F1, F2)``.

    Parameters
    ----------
    func : callable
        Vectorized evaluator returning two arrays of shape ``(..., 8)``.
    domain : PlaneDomain
        Where the stem is defined.
    jet_func : callable, optional
        ``jet_func(a, b, order)`` returns ``(J1, J2)`` with shape
        ``(m, ..., 8)`` for ``m = 3`` (order 1) or ``m = 6`` (order 2).
    jet_order : int
        Highest order supported by ``jet_func``.
    """

    func: StemEval
    domain: PlaneDomain = WHOLE_PLANE
    jet_func: Optional[JetEval] = None
    jet_order: int = 0
    name: str = "stem"

    def __call__(self, alpha, beta):
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        F1, F2 = self.func(alpha, beta)
        shape = np.broadcast(alpha, beta).shape + (8,)
        return np.broadcast_to(F1, shape), np.broadcast_to(F2, shape)

    @property
    def has_partials(self) -> bool:
        return self.jet_func is not None and self.jet_order >= 1

    def jet(self, alpha, beta, order=1, engine=numdiff.DEFAULT_ENGINE):
        """Values and partial derivatives up to ``order`` (analytic when possible)."""
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        if engine.analytic and self.jet_func is not None and self.jet_order >= order:
            J1, J2 = self.jet_func(alpha, beta, order)
            m = JET_SIZE[order]
            shape = (m,) + np.broadcast(alpha, beta).shape + (8,)
            return np.broadcast_to(J1[:m], shape), np.broadcast_to(J2[:m], shape)
        return self._fd_jet(alpha, beta, order, engine.fd_step)

    def _packed(self, point):
        F1, F2 = self(point[..., 0], point[..., 1])
        return np.concatenate([F1, F2], axis=-1)

    def _fd_jet(self, alpha, beta, order, step):
        alpha, beta = np.broadcast_arrays(alpha, beta)
        point = np.stack([alpha, beta], axis=-1)
        rows = [self._packed(point)]
        if order >= 1:
            rows.append(numdiff.partial(self._packed, point, 0, step))
            rows.append(numdiff.partial(self._packed, point, 1, step))
        if order >= 2:
            nested = max(step, numdiff.FD_STEP_NESTED)
            rows.append(numdiff.second_partial(self._packed, point, 0, 0, nested))
            rows.append(numdiff.second_partial(self._packed, point, 0, 1, nested))
            rows.append(numdiff.second_partial(self._packed, point, 1, 1, nested))
        J = np.stack(rows)
        return J[..., :8], J[..., 8:]

    def parity_residual(self, alpha, beta):
        """Max defect of ``F1`` even / ``F2`` odd in ``beta`` on the samples."""
        F1p, F2p = self(alpha, beta)
        F1m, F2m = self(alpha, -np.asarray(beta, dtype=float))
        return float(max(np.max(oc.norm(F1p - F1m), initial=0.0),
                         np.max(oc.norm(F2p + F2m), initial=0.0)))

    def with_domain(self, domain):
        return StemFunction(self.func, domain, self.jet_func, self.jet_order, self.name)


def constant_stem(c, domain=WHOLE_PLANE) -> StemFunction:
    c = oc.octonion(c) if np.ndim(c) == 0 else np.asarray(c, dtype=float)

    def func(a, b):
        shape = np.broadcast(a, b).shape
        return np.broadcast_to(c, shape + (8,)).copy(), np.zeros(shape + (8,))

    def jet(a, b, order):
        shape = (JET_SIZE[order],) + np.broadcast(a, b).shape + (8,)
        J1 = np.zeros(shape)
        J1[0] = c
        return J1, np.zeros(shape)

    return StemFunction(func, domain, jet, 2, name="constant")


class PolyStem(StemFunction):
    """Stem with polynomial components ``F_s = sum C_s[p, q] a^p b^q``.

    ``C1`` and ``C2`` have shape ``(P, Q, 8)``.  Jets of every order are exact.
    """

    def __init__(self, C1, C2, domain=WHOLE_PLANE, name="poly"):
        C1 = np.asarray(C1, dtype=float)
        C2 = np.asarray(C2, dtype=float)
        P = max(C1.shape[0], C2.shape[0])
        Q = max(C1.shape[1], C2.shape[1])
        C1 = _pad(C1, P, Q)
        C2 = _pad(C2, P, Q)
        object.__setattr__(self, "C1", C1)
        object.__setattr__(self, "C2", C2)
        super().__init__(self._eval, domain, self._jet, 2, name)

    @staticmethod
    def _poly(C, a, b, da=0, db=0):
        P, Q, _ = C.shape
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        out = np.zeros(np.broadcast(a, b).shape + (8,))
        for p in range(da, P):
            fa = _falling(p, da) * a ** (p - da)
            for q in range(db, Q):
                if not C[p, q].any():
                    continue
                coeff = fa * _falling(q, db) * b ** (q - db)
                out = out + coeff[..., None] * C[p, q]
        return out

    def _eval(self, a, b):
        return self._poly(self.C1, a, b), self._poly(self.C2, a, b)

    def _jet(self, a, b, order):
        orders = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)][: JET_SIZE[order]]
        J1 = np.stack([self._poly(self.C1, a, b, i, j) for i, j in orders])
        J2 = np.stack([self._poly(self.C2, a, b, i, j) for i, j in orders])
        return J1, J2

    def max_degree(self):
        nz = np.argwhere(np.abs(np.concatenate([self.C1, self.C2], axis=-1)).sum(-1) > 0)
        return int((nz[:, 0] + nz[:, 1]).max()) if len(nz) else 0


def _pad(C, P, Q):
    out = np.zeros((P, Q, 8))
    out[: C.shape[0], : C.shape[1]] = C
    return out


def _falling(n, k):
    out = 1
    for i in range(k):
        out *= n - i
    return out


def identity_stem(domain=WHOLE_PLANE) -> PolyStem:
    C1 = np.zeros((2, 2, 8))
    C2 = np.zeros((2, 2, 8))
    C1[1, 0, 0] = 1.0
    C2[0, 1, 0] = 1.0
    return PolyStem(C1, C2, domain, name="identity")


def random_poly_stem(rng, degree=3, scale=1.0, domain=WHOLE_PLANE) -> PolyStem:
    """Random polynomial stem (even ``F1``, odd ``F2`` in ``b``)."""
    C1 = np.zeros((degree + 1, degree + 1, 8))
    C2 = np.zeros((degree + 1, degree + 1, 8))
    for p in range(degree + 1):
        for q in range(degree + 1 - p):
            target = C1 if q % 2 == 0 else C2
            target[p, q] = scale * rng.standard_normal(8)
    return PolyStem(C1, C2, domain, name=f"poly{degree}")


# ---------------------------------------------------------------------------
# slice functions


@dataclass(frozen=True, eq=False)
class SliceFunction:
    """Slice function induced by a stem function."""

    stem: StemFunction
    name: str = ""

    @property
    def domain(self) -> PlaneDomain:
        return self.stem.domain

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        alpha, beta, unit = oc.split(x)
        if not np.all(self.domain.contains(alpha, beta)):
            raise DomainError("point outside the circularization of the domain")
        F1, F2 = self.stem(alpha, beta)
        return F1 + oc.mul(unit, F2)

    evaluate = __call__

    def on_slice(self, pair, v):
        """``f_I(v) = f(v0 + v1 I + v2 J + v3 IJ)`` for quadruples ``v``."""
        return self(pair.embed(v))

    def __add__(self, other):
        return slice_sum(self, other)

    def __mul__(self, other):
        return slice_product(self, other)


def induce(stem: StemFunction, name: str = "") -> SliceFunction:
    return SliceFunction(stem, name or stem.name)


def evaluate(f: SliceFunction, x):
    return f(x)


def stem_of(raw, unit, domain=WHOLE_PLANE, name="recovered") -> StemFunction:
    """Recover the stem of a slice function from its values on ``C_J``."""
    J = oc.unit_vector(unit)

    def func(a, b):
        a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
        y = oc.real(a) + oc.scale(b, J)
        ybar = oc.conj(y)
        fy, fyb = raw(y), raw(ybar)
        return 0.5 * (fy + fyb), -0.5 * oc.mul(J, fy - fyb)

    return StemFunction(func, domain, name=name)


def _combine_jets(f, g, order, engine, rule):
    if engine.analytic and f.stem.jet_func is not None and g.stem.jet_func is not None \
            and min(f.stem.jet_order, g.stem.jet_order) >= 1:
        common = min(f.stem.jet_order, g.stem.jet_order)

        def jet(a, b, k):
            F = f.stem.jet(a, b, k)
            G = g.stem.jet(a, b, k)
            return rule(F, G)

        return jet, common
    return None, 0


def slice_sum(f: SliceFunction, g: SliceFunction) -> SliceFunction:
    def func(a, b):
        F1, F2 = f.stem(a, b)
        G1, G2 = g.stem(a, b)
        return F1 + G1, F2 + G2

    jet, order = _combine_jets(f, g, 2, numdiff.DEFAULT_ENGINE,
                               lambda F, G: (F[0] + G[0], F[1] + G[1]))
    return induce(StemFunction(func, f.domain, jet, order, "sum"))


def _product_rule(F, G):
    F1, F2 = F
    G1, G2 = G
    return (_jet_bilinear(oc.mul, F1, G1) - _jet_bilinear(oc.mul, F2, G2),
            _jet_bilinear(oc.mul, F1, G2) + _jet_bilinear(oc.mul, F2, G1))


def slice_product(f: SliceFunction, g: SliceFunction) -> SliceFunction:
    """Slice product, induced by ``(F1 G1 - F2 G2, F1 G2 + F2 G1)``."""
    if isinstance(f.stem, PolyStem) and isinstance(g.stem, PolyStem):
        return induce(_poly_product(f.stem, g.stem))

    def func(a, b):
        F1, F2 = f.stem(a, b)
        G1, G2 = g.stem(a, b)
        return oc.mul(F1, G1) - oc.mul(F2, G2), oc.mul(F1, G2) + oc.mul(F2, G1)

    jet, order = _combine_jets(f, g, 2, numdiff.DEFAULT_ENGINE, _product_rule)
    return induce(StemFunction(func, f.domain, jet, order, f"({f.name}*{g.name})"))


def _convolve(A, B):
    P = A.shape[0] + B.shape[0] - 1
    Q = A.shape[1] + B.shape[1] - 1
    out = np.zeros((P, Q, 8))
    for p in range(A.shape[0]):
        for q in range(A.shape[1]):
            if A[p, q].any():
                prod = oc.mul(A[p, q], B)
                out[p: p + B.shape[0], q: q + B.shape[1]] += prod
    return out


def _poly_product(F: PolyStem, G: PolyStem) -> PolyStem:
    C1 = _convolve(F.C1, G.C1) - _convolve(F.C2, G.C2)
    C2 = _convolve(F.C1, G.C2) + _convolve(F.C2, G.C1)
    return PolyStem(C1, C2, F.domain, name=f"({F.name}*{G.name})")


def stem_conjugate(f: SliceFunction) -> SliceFunction:
    """The slice conjugate ``f^c`` induced by ``(conj F1, conj F2)``."""
    if isinstance(f.stem, PolyStem):
        return induce(PolyStem(oc.conj(f.stem.C1), oc.conj(f.stem.C2), f.domain, f"{f.name}^c"))

    def func(a, b):
        F1, F2 = f.stem(a, b)
        return oc.conj(F1), oc.conj(F2)

    jet = None
    if f.stem.jet_func is not None:
        def jet(a, b, k):
            J1, J2 = f.stem.jet_func(a, b, k)
            return oc.conj(J1), oc.conj(J2)
    return induce(StemFunction(func, f.domain, jet, f.stem.jet_order, f"{f.name}^c"))


def normal(f: SliceFunction) -> SliceFunction:
    """The normal function ``N(f) = f . f^c`` (slice preserving)."""
    return slice_product(f, stem_conjugate(f))


NORMAL_TOL = 1e-12


def slice_reciprocal(f: SliceFunction) -> SliceFunction:
    """``f^{-.} = N(f)^{-1} f^c``, defined off the zero set of ``N(f)``."""
    nf = normal(f)
    fc = stem_conjugate(f)

    def func(a, b):
        N1, N2 = nf.stem(a, b)
        n1, n2 = oc.re(N1), oc.re(N2)
        den = n1 * n1 + n2 * n2
        if np.any(np.sqrt(den) < NORMAL_TOL):
            raise SingularPointError("evaluation on the zero set of N(f)")
        G1, G2 = fc.stem(a, b)
        R1 = oc.scale(n1 / den, G1) + oc.scale(n2 / den, G2)
        R2 = oc.scale(n1 / den, G2) - oc.scale(n2 / den, G1)
        return R1, R2

    return induce(StemFunction(func, f.domain, name=f"{f.name}^-1"))


def spherical_value(f: SliceFunction) -> SliceFunction:
    """``f°_s``, induced by ``(F1, 0)``."""
    stem = f.stem

    def func(a, b):
        F1, _ = stem(a, b)
        return F1, np.zeros_like(F1)

    jet = None
    if stem.jet_func is not None:
        def jet(a, b, k):
            J1, _ = stem.jet_func(a, b, k)
            return J1, np.zeros_like(J1)
    return induce(StemFunction(func, f.domain, jet, stem.jet_order, f"{f.name}°"))


def spherical_derivative(f: SliceFunction) -> SliceFunction:
    """``f'_s``, induced by ``(F2 / b, 0)``.

    On the real axis the continuous extension ``dF2/db(a, 0)`` is used, and
    only when the stem has analytic partials.
    """
    stem = f.stem
    domain = stem.domain

    def func(a, b):
        a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
        _, F2 = stem(a, b)
        on_axis = b == 0.0
        safe = np.where(on_axis, 1.0, b)
        out = F2 / safe[..., None]
        if np.any(on_axis):
            if not stem.has_partials:
                raise SingularPointError("spherical derivative on the real axis needs analytic partials")
            _, J2 = stem.jet(a[on_axis], b[on_axis], 1)
            out[on_axis] = J2[2]
        return out, np.zeros_like(out)

    return induce(StemFunction(func, domain, name=f"{f.name}'"))


def representation(f, I, J, K, alpha, beta):
    """Evaluate ``f(alpha + K beta)`` from its values on ``C_I`` and ``C_J``."""
    I, J, K = (oc.unit_vector(u) for u in (I, J, K))
    diff = I - J
    if oc.norm(diff) < 1e-10:
        raise ValueError("the units I and J coincide")
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    inv = oc.inverse(diff)
    fI = f(oc.real(alpha) + oc.scale(beta, I))
    fJ = f(oc.real(alpha) + oc.scale(beta, J))
    return oc.mul(K - J, oc.mul(inv, fI)) - oc.mul(K - I, oc.mul(inv, fJ))


@dataclass
class SlicenessReport:
    passed: bool
    max_residual: float
    tol: float
    samples: int

    def __bool__(self):
        return self.passed


def random_units(rng, n):
    v = rng.standard_normal((n, 8))
    v[:, 0] = 0.0
    return v / oc.norm(v)[:, None]


def sliceness_residuals(raw, alpha, beta, rng=None):
    """Residuals of the sliceness criterion at ``(alpha, beta)`` with random ``I, J``."""
    rng = np.random.default_rng(rng)
    alpha = np.ravel(np.asarray(alpha, dtype=float))
    beta = np.ravel(np.asarray(beta, dtype=float))
    n = alpha.size
    I = random_units(rng, n)
    J = random_units(rng, n)
    x = oc.real(alpha) + oc.scale(beta, I)
    y = oc.real(alpha) + oc.scale(beta, J)
    fy, fyb = raw(y), raw(oc.conj(y))
    rhs = 0.5 * (fy + fyb) - 0.5 * oc.mul(I, oc.mul(J, fy - fyb))
    return oc.norm(raw(x) - rhs)


def sliceness_check(raw, alpha, beta, tol=1e-10, rng=None) -> SlicenessReport:
    res = sliceness_residuals(raw, alpha, beta, rng)
    worst = float(np.max(res, initial=0.0))
    return SlicenessReport(worst <= tol, worst, tol, int(res.size))


# ---------------------------------------------------------------------------
# O(3)-stem functions


@dataclass(frozen=True, eq=False)
class O3StemFunction:
    """``v -> (F0, F1, F2, F3)`` with ``F(Av) = A F(v)`` for ``A`` in O(3)."""

    func: Callable[[np.ndarray], np.ndarray]
    domain: PlaneDomain = WHOLE_PLANE
    name: str = "o3-stem"

    def __call__(self, v):
        return np.asarray(self.func(np.asarray(v, dtype=float)))

    def induced_value(self, pair, v):
        """``F0(v) + I F1(v) + J F2(v) + (IJ) F3(v)``."""
        comps = self(v)
        frame = pair.frame
        out = comps[..., 0, :].copy()
        for h in range(1, 4):
            out = out + oc.mul(frame[h], comps[..., h, :])
        return out

    def equivariance_residual(self, v, A):
        """``|F(Av) - A F(v)|`` for a 3x3 orthogonal ``A`` acting on coordinates 1..3."""
        v = np.asarray(v, dtype=float)
        big = np.eye(4)
        big[1:, 1:] = A
        lhs = self(v @ big.T)
        rhs = np.einsum("hk,...kc->...hc", big, self(v))
        return np.max(oc.norm(lhs - rhs))

    def intrinsic_residual(self, rng, n_points=32, n_rotations=8):
        """Worst equivariance residual over random points and Haar rotations.

        O(3)-intrinsicity can only be sampled, never certified; the two
        counts set the sampling density.
        """
        v = rng.standard_normal((n_points, 4))
        return max(self.equivariance_residual(v, random_rotation(rng)) for _ in range(n_rotations))


def phi(F: O3StemFunction) -> StemFunction:
    """The stem ``(F0(x0, x1, 0, 0), F1(x0, x1, 0, 0))``."""

    def func(a, b):
        a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
        v = np.stack([a, b, np.zeros_like(a), np.zeros_like(a)], axis=-1)
        comps = F(v)
        return comps[..., 0, :], comps[..., 1, :]

    return StemFunction(func, F.domain, name=f"phi({F.name})")


def phi_inverse(F: StemFunction) -> O3StemFunction:
    """The O(3)-stem ``F0 = F1(x0, r)``, ``Fh = (x_h / r) F2(x0, r)``."""

    def func(v):
        v = np.asarray(v, dtype=float)
        x0 = v[..., 0]
        r = np.sqrt(np.sum(v[..., 1:] ** 2, axis=-1))
        F1, F2 = F(x0, r)
        safe = np.where(r > 0, r, 1.0)
        ratios = np.where((r > 0)[..., None], v[..., 1:] / safe[..., None], 0.0)
        rest = ratios[..., :, None] * F2[..., None, :]
        return np.concatenate([F1[..., None, :], rest], axis=-2)

    return O3StemFunction(func, F.domain, name=f"phi^-1({F.name})")


def random_rotation(rng) -> np.ndarray:
    """Haar-random element of O(3)."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    return q * np.sign(np.diag(r))


# ---------------------------------------------------------------------------
# the example family


def example_family(a=0.0, b=0.0, c=0.0, d=0.0, domain=None) -> SliceFunction:
    """Slice functions induced by

    ``F1 = (3 a0^2 - b0^2) a + 3 a0 b + c`` and
    ``F2 = b0 (2 a0 a + b) + d b0 / |b0|^3``

    (``a0, b0`` the plane coordinates).  With ``d != 0`` the real axis is
    excluded from the domain.
    """
    a, b, c, d = (oc.octonion(t) if np.ndim(t) == 0 else np.asarray(t, float) for t in (a, b, c, d))
    C1 = np.zeros((3, 3, 8))
    C2 = np.zeros((3, 3, 8))
    C1[2, 0] = 3 * a
    C1[0, 2] = -a
    C1[1, 0] = 3 * b
    C1[0, 0] = c
    C2[1, 1] = 2 * a
    C2[0, 1] = b
    if not d.any():
        dom = domain if domain is not None else WHOLE_PLANE
        return induce(PolyStem(C1, C2, dom, name="example"))
    poly = PolyStem(C1, C2)
    dom = domain if domain is not None else PlaneDomain.disc(exclude_real=True)

    def pole(bb, k):
        # derivatives of sign(b)/b^2 in b
        s = np.sign(bb) / bb ** 2
        if k == 0:
            return s
        if k == 1:
            return -2.0 * s / bb
        return 6.0 * s / bb ** 2

    def func(al, be):
        F1, F2 = poly(al, be)
        return F1, F2 + oc.scale(pole(be, 0), d)

    def jet(al, be, order):
        J1, J2 = poly.jet(al, be, order)
        J2 = J2.copy()
        be = np.broadcast_to(be, np.broadcast(al, be).shape)
        J2[0] = J2[0] + oc.scale(pole(be, 0), d)
        J2[2] = J2[2] + oc.scale(pole(be, 1), d)
        if order >= 2:
            J2[5] = J2[5] + oc.scale(pole(be, 2), d)
        return J1, J2

    return induce(StemFunction(func, dom, jet, 2, name="example"))


def identity(domain=WHOLE_PLANE) -> SliceFunction:
    return induce(identity_stem(domain))


def constant(c, domain=WHOLE_PLANE) -> SliceFunction:
    return induce(constant_stem(c, domain))
