"""Differential operators on octonion functions.

Every operator accepts a plain callable ``f`` mapping arrays of shape
``(..., 8)`` to arrays of the same shape, so non-slice inputs can be probed as
well.  When ``f`` is a :class:`~octoslice.slices.SliceFunction` whose stem has
analytic partials and the engine is in analytic mode, the octonion gradient
is assembled exactly from the stem jet; otherwise fourth-order central
differences are used.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import numdiff
from . import octonion as oc
from .numdiff import DEFAULT_ENGINE, DerivativeEngine
from .slices import (
    SingularPointError,
    SliceFunction,
    StemFunction,
    induce,
)

IM_GUARD = 1e-8
"""Smallest ``|Im x|`` at which ``Im(x)^{-1}`` prefactors are evaluated."""

PAIRS = tuple(itertools.combinations(range(1, 8), 2))


def _can_use_jet(f, engine, order=1):
    return (
        engine.analytic
        and isinstance(f, SliceFunction)
        and f.stem.jet_func is not None
        and f.stem.jet_order >= order
    )


def _im_inverse(x):
    imag = oc.im(x)
    n2 = oc.norm2(imag)
    if np.any(np.sqrt(n2) <= IM_GUARD):
        raise SingularPointError("operator needs x off the real axis")
    return oc.conj(imag) / n2[..., None]


def slice_gradient(f: SliceFunction, x, engine=DEFAULT_ENGINE):
    """Exact gradient of a slice function from its stem jet (``x`` off the real axis).

    Returns an array of shape ``(8,) + x.shape``: row ``h`` is ``d f / d x_h``.
    """
    x = np.asarray(x, dtype=float)
    alpha, beta, omega = oc.split(x)
    if np.any(beta <= IM_GUARD):
        raise SingularPointError("analytic gradient needs x off the real axis")
    J1, J2 = f.stem.jet(alpha, beta, 1, engine)
    radial = J1[2] + oc.mul(omega, J2[2])
    F2_over_beta = J2[0] / beta[..., None]
    rows = [J1[1] + oc.mul(omega, J2[1])]
    for h in range(1, 8):
        wh = x[..., h] / beta
        tangent = oc.BASIS[h] - oc.scale(wh, omega)
        rows.append(oc.scale(wh, radial) + oc.mul(tangent, F2_over_beta))
    return np.stack(rows)


def gradient(f, x, engine=DEFAULT_ENGINE):
    """All eight partial derivatives of ``f`` at ``x``, stacked on axis 0."""
    x = np.asarray(x, dtype=float)
    if _can_use_jet(f, engine):
        return slice_gradient(f, x, engine)
    return numdiff.gradient(f, x, step=engine.fd_step)


# -- d-bar on stems and slices ----------------------------------------------

def dbar_stem(F: StemFunction, alpha, beta, engine=DEFAULT_ENGINE):
    """``((dF1/da - dF2/db)/2, (dF1/db + dF2/da)/2)``."""
    J1, J2 = F.jet(alpha, beta, 1, engine)
    return 0.5 * (J1[1] - J2[2]), 0.5 * (J1[2] + J2[1])


def dbar(f: SliceFunction, engine=DEFAULT_ENGINE) -> SliceFunction:
    """The slice function induced by the d-bar of the stem of ``f``."""
    stem = f.stem

    def func(a, b):
        return dbar_stem(stem, a, b, engine)

    return induce(StemFunction(func, stem.domain, name=f"dbar({stem.name})"))


def dbar_slice(f: SliceFunction, x, engine=DEFAULT_ENGINE):
    return dbar(f, engine)(x)


# -- spherical operators ----------------------------------------------------

def _check_pair(m, n):
    if not (1 <= m < n <= 7):
        raise ValueError("L_mn needs indices 1 <= m < n <= 7")


def L_mn(f, m, n, x, engine=DEFAULT_ENGINE):
    """Spherical tangential ``x_m d/dx_n - x_n d/dx_m``."""
    _check_pair(m, n)
    x = np.asarray(x, dtype=float)
    if _can_use_jet(f, engine):
        G = slice_gradient(f, x, engine)
        dn, dm = G[n], G[m]
    else:
        dn = numdiff.partial(f, x, n, engine.fd_step)
        dm = numdiff.partial(f, x, m, engine.fd_step)
    return x[..., m, None] * dn - x[..., n, None] * dm


def _gamma_from_gradient(G, x):
    out = np.zeros(np.broadcast(G[0], x).shape)
    for m, n in PAIRS:
        L = x[..., m, None] * G[n] - x[..., n, None] * G[m]
        out -= oc.mul(oc.BASIS[m], oc.mul(oc.BASIS[n], L))
    return out


def gamma(f, x, engine=DEFAULT_ENGINE):
    """Spherical Dirac operator ``-sum_{m<n} e_m (e_n L_mn f)``."""
    x = np.asarray(x, dtype=float)
    return _gamma_from_gradient(gradient(f, x, engine), x)


def euler_E(f, x, engine=DEFAULT_ENGINE):
    """Euler operator ``sum_{h>=1} x_h d/dx_h``."""
    x = np.asarray(x, dtype=float)
    G = gradient(f, x, engine)
    return np.einsum("h...,h...c->...c", np.moveaxis(x[..., 1:], -1, 0), G[1:])


def slice_fueter_op(f, x, engine=DEFAULT_ENGINE):
    """``(d/dx0 - Im^{-1} E)/2 - Im^{-1} Gamma / 6``; vanishes on slice Fueter-regular ``f``."""
    x = np.asarray(x, dtype=float)
    inv = _im_inverse(x)
    G = gradient(f, x, engine)
    E = np.einsum("h...,h...c->...c", np.moveaxis(x[..., 1:], -1, 0), G[1:])
    Gam = _gamma_from_gradient(G, x)
    return 0.5 * (G[0] - oc.mul(inv, E)) - oc.mul(inv, Gam) / 6.0


def spherical_derivative_from_gamma(f, x, engine=DEFAULT_ENGINE):
    """``Im(x)^{-1} Gamma(f)(x) / 6``; equals ``f'_s`` for slice ``f``."""
    x = np.asarray(x, dtype=float)
    return oc.mul(_im_inverse(x), gamma(f, x, engine)) / 6.0


# -- restricted Cauchy-Riemann-Fueter operator ------------------------------

SLICE_DIST_TOL = 1e-10


def _slice_coords(pair, x):
    x = np.asarray(x, dtype=float)
    if np.any(pair.distance(x) > SLICE_DIST_TOL * (1.0 + oc.norm(x))):
        raise ValueError("point does not lie in the quaternionic slice of the pair")
    return pair.coords(x)


def crf_restricted(f, pair, x, engine=DEFAULT_ENGINE):
    """``df_I/dx0 + I df_I/dx1 + J df_I/dx2 + (IJ) df_I/dx3`` at ``x`` in ``H_I``."""
    x = np.asarray(x, dtype=float)
    v = _slice_coords(pair, x)
    frame = pair.frame
    if _can_use_jet(f, engine) and np.all(oc.norm(oc.im(x)) > IM_GUARD):
        G = slice_gradient(f, pair.embed(v), engine)
        D = np.einsum("kh,h...c->k...c", frame, G)
    else:
        def fI(w):
            return f(pair.embed(w))
        D = numdiff.gradient(fI, v, step=engine.fd_step)
    out = D[0].copy()
    for k in range(1, 4):
        out = out + oc.mul(frame[k], D[k])
    return out


def crf_closed_form(F: StemFunction, pair, x, engine=DEFAULT_ENGINE):
    """Closed form ``(F1_0 - F2_1 - 2 F2/r) + (Im x / r)(F1_1 + F2_0)`` of the restricted operator."""
    x = np.asarray(x, dtype=float)
    _slice_coords(pair, x)
    alpha, r, omega = oc.split(x)
    if np.any(r <= IM_GUARD):
        raise SingularPointError("closed form needs x off the real axis")
    J1, J2 = F.jet(alpha, r, 1, engine)
    first = J1[1] - J2[2] - 2.0 * J2[0] / r[..., None]
    second = J1[2] + J2[1]
    return first + oc.mul(omega, second)


# -- differential sliceness criterion ---------------------------------------

def dsc_residuals(f, x, engine=DEFAULT_ENGINE):
    """Largest ``|L_mn(Im^{-1} Gamma f)|`` and ``|L_mn(f - Gamma f / 6)|`` over all pairs.

    The outer tangentials are always finite differences with the nested step;
    the inner ``Gamma`` is analytic when possible.
    """
    x = np.asarray(x, dtype=float)
    _im_inverse(x)
    inner_engine = engine
    if not _can_use_jet(f, engine):
        inner_engine = DerivativeEngine("finite-difference", fd_step=numdiff.FD_STEP_NESTED)

    def g1(y):
        return oc.mul(_im_inverse(y), gamma(f, y, inner_engine))

    def g2(y):
        return f(y) - gamma(f, y, inner_engine) / 6.0

    outer = DerivativeEngine("finite-difference", fd_step=numdiff.FD_STEP_NESTED)
    G1 = numdiff.gradient(g1, x, step=outer.fd_step)
    G2 = numdiff.gradient(g2, x, step=outer.fd_step)
    r1 = np.zeros(x.shape[:-1])
    r2 = np.zeros(x.shape[:-1])
    for m, n in PAIRS:
        L1 = x[..., m, None] * G1[n] - x[..., n, None] * G1[m]
        L2 = x[..., m, None] * G2[n] - x[..., n, None] * G2[m]
        r1 = np.maximum(r1, oc.norm(L1))
        r2 = np.maximum(r2, oc.norm(L2))
    return r1, r2
