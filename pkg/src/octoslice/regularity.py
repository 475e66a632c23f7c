"""Residual checkers for slice Fueter-regularity.

Each checker evaluates a system of first-order equations on stem (or
O(3)-stem) data and returns the residual octonions.  The grid-level helpers
wrap them into :class:`RegularityReport` objects that record the worst
residual and where it occurred.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import numdiff
from . import octonion as oc
from . import operators as ops
from .numdiff import DEFAULT_ENGINE
from .slices import (
    DomainError,
    O3StemFunction,
    PlaneDomain,
    SliceFunction,
    StemFunction,
    phi_inverse,
    random_rotation,
    spherical_derivative,
    stem_of,
)

FALSIFY_THRESHOLD = 1e-3
"""Lower bound used when a residual is claimed to be bounded away from zero."""


def _require_off_axis(x1):
    if np.any(np.asarray(x1) == 0.0):
        raise ValueError("the Vekua system is singular on x1 = 0")


def vekua_residual(F: StemFunction, x0, x1, engine=DEFAULT_ENGINE):
    """``R1 = dF1/dx0 - dF2/dx1 - 2 F2/x1`` and ``R2 = dF1/dx1 + dF2/dx0``."""
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    _require_off_axis(x1)
    J1, J2 = F.jet(x0, x1, 1, engine)
    R1 = J1[1] - J2[2] - 2.0 * J2[0] / x1[..., None]
    R2 = J1[2] + J2[1]
    return R1, R2


def o3_system_residual(F: O3StemFunction, v, step=numdiff.FD_STEP):
    """The four divergence/curl-type residuals of an O(3)-stem function at ``v``.

    Returns an array of shape ``(4,) + v.shape[:-1] + (8,)``.
    """
    v = np.asarray(v, dtype=float)
    d = [numdiff.partial(F, v, k, step) for k in range(4)]
    # d[k][..., h, :] is dF_h / dx_k
    def D(h, k):
        return d[k][..., h, :]
    return np.stack([
        D(0, 0) - D(1, 1) - D(2, 2) - D(3, 3),
        D(0, 1) + D(1, 0) - D(2, 3) + D(3, 2),
        D(0, 2) + D(1, 3) + D(2, 0) - D(3, 1),
        D(0, 3) - D(1, 2) + D(2, 1) + D(3, 0),
    ])


def _fd_partials(func, x0, x1, step=numdiff.FD_STEP):
    x0, x1 = np.broadcast_arrays(np.asarray(x0, float), np.asarray(x1, float))
    point = np.stack([x0, x1], axis=-1)

    def packed(p):
        return np.asarray(func(p[..., 0], p[..., 1]), dtype=float)

    return packed(point), numdiff.partial(packed, point, 0, step), numdiff.partial(packed, point, 1, step)


def vekua_g2_residual(F1: Callable, G2: Callable, x0, x1):
    """Residuals of the system for ``F2 = x1 G2``.

    ``dF1/dx0 - x1 dG2/dx1 - 3 G2`` and ``dF1/dx1 + x1 dG2/dx0``.
    """
    x1 = np.asarray(x1, dtype=float)
    _, F1_0, F1_1 = _fd_partials(F1, x0, x1)
    G, G_0, G_1 = _fd_partials(G2, x0, x1)
    w = x1[..., None]
    return F1_0 - w * G_1 - 3.0 * G, F1_1 + w * G_0


def vekua_h_residual(H1: Callable, H2: Callable, x0, x1, domain: Optional[PlaneDomain] = None):
    """Residuals of the system in the squared variable ``x1 -> x1^2``.

    ``dH1/dx0 - 2 x1 dH2/dx1 - 3 H2`` and ``2 dH1/dx1 + dH2/dx0``, at points
    with ``x1 >= 0`` and, when ``domain`` is given, ``(x0, sqrt(x1))`` in it.
    """
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    if np.any(x1 < 0):
        raise DomainError("the squared variable must be nonnegative")
    if domain is not None and not np.all(domain.contains(x0, np.sqrt(x1))):
        raise DomainError("(x0, sqrt(x1)) must lie in the domain")
    _, A0, A1 = _fd_partials(H1, x0, x1)
    B, B0, B1 = _fd_partials(H2, x0, x1)
    return A0 - 2.0 * x1[..., None] * B1 - 3.0 * B, 2.0 * A1 + B0


@dataclass(frozen=True)
class VekuaData:
    """Coefficients ``(a, b, c, d)`` of a generalized Vekua system.

    Each is a callable ``(x0, x1) -> octonion array``.
    """

    a: Callable
    b: Callable
    c: Callable
    d: Callable

    @classmethod
    def zero(cls):
        z = _const(0.0)
        return cls(z, z, z, z)

    @classmethod
    def fueter(cls):
        """``(0, -2/x1, 0, 0)``: reproduces the Vekua system of slice Fueter-regularity."""
        z = _const(0.0)
        return cls(z, lambda x0, x1: oc.real(-2.0 / np.asarray(x1, float) + 0.0 * np.asarray(x0, float)), z, z)

    def parity_residual(self, x0, x1):
        """Defect of the even-odd-odd-even pattern in ``x1``."""
        x1 = np.asarray(x1, dtype=float)
        worst = 0.0
        for fn, sign in ((self.a, 1.0), (self.b, -1.0), (self.c, -1.0), (self.d, 1.0)):
            diff = np.asarray(fn(x0, -x1)) - sign * np.asarray(fn(x0, x1))
            worst = max(worst, float(np.max(oc.norm(diff))))
        return worst


def _const(value):
    def fn(x0, x1):
        shape = np.broadcast(np.asarray(x0), np.asarray(x1)).shape
        return oc.real(np.full(shape, value))
    return fn


def generalized_vekua_residual(F: StemFunction, V: VekuaData, x0, x1, engine=DEFAULT_ENGINE):
    """Residuals of the generalized system, implemented as printed:

    ``dF1/dx0 - dF2/dx1 + a F1 + b F2`` and ``dF1/dx1 + dF2/dx0 + c F1 + d F2``.
    """
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    J1, J2 = F.jet(x0, x1, 1, engine)
    R1 = J1[1] - J2[2] + oc.mul(V.a(x0, x1), J1[0]) + oc.mul(V.b(x0, x1), J2[0])
    R2 = J1[2] + J2[1] + oc.mul(V.c(x0, x1), J1[0]) + oc.mul(V.d(x0, x1), J2[0])
    return R1, R2


def laplacian_identity_residual(F: StemFunction, x0, x1, engine=DEFAULT_ENGINE):
    """Norms of ``Lap F1 + (2/x1) dF1/dx1`` and ``Lap F2 - (2/x1^2) F2 + (2/x1) dF2/dx1``."""
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    _require_off_axis(x1)
    J1, J2 = F.jet(x0, x1, 2, engine)
    w = x1[..., None]
    r1 = J1[3] + J1[5] + 2.0 / w * J1[2]
    r2 = J2[3] + J2[5] - 2.0 / w ** 2 * J2[0] + 2.0 / w * J2[2]
    return oc.norm(r1), oc.norm(r2)


# ---------------------------------------------------------------------------
# reports


@dataclass
class RegularityReport:
    """Outcome of one residual check over a grid."""

    predicate: str
    grid: dict
    tol: float
    max_residual: float
    argmax_point: list
    passed: bool
    worst: list = field(default_factory=list)
    note: str = ""

    def to_dict(self):
        return {
            "note": self.note,
            "predicate": self.predicate,
            "grid": self.grid,
            "tol": self.tol,
            "max_residual": self.max_residual,
            "argmax_point": self.argmax_point,
            "pass": self.passed,
            "worst": self.worst,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def make_report(predicate, residuals, points, tol, grid_spec, n_worst=5) -> RegularityReport:
    residuals = np.asarray(residuals, dtype=float).ravel()
    points = np.asarray(points, dtype=float).reshape(residuals.size, -1)
    if residuals.size == 0:
        return RegularityReport(predicate, grid_spec, tol, 0.0, [], True)
    order = np.argsort(residuals)[::-1][:n_worst]
    k = int(order[0])
    worst = [{"point": points[i].tolist(), "residual": float(residuals[i])} for i in order]
    top = float(residuals[k])
    # NaN never passes
    passed = bool(np.isfinite(top) and top <= tol)
    return RegularityReport(predicate, grid_spec, tol, top, points[k].tolist(), passed, worst)


@dataclass
class Grid:
    """Sample points ``(alpha, beta)`` with ``beta > 0`` plus a description."""

    alpha: np.ndarray
    beta: np.ndarray
    spec: dict

    @classmethod
    def on(cls, domain: PlaneDomain, n_alpha=8, n_beta=8):
        a, b = domain.grid(n_alpha, n_beta)
        return cls(a, b, {"domain": domain.to_dict(), "n_alpha": n_alpha, "n_beta": n_beta})

    @property
    def points(self):
        return np.stack([self.alpha, self.beta], axis=-1)


def _stem_for(f):
    if isinstance(f, SliceFunction):
        return f.stem
    raise TypeError("expected a SliceFunction")


def vekua_report(F: StemFunction, grid: Grid, tol=1e-8, engine=DEFAULT_ENGINE) -> RegularityReport:
    R1, R2 = vekua_residual(F, grid.alpha, grid.beta, engine)
    res = np.maximum(oc.norm(R1), oc.norm(R2))
    return make_report("vekua", res, grid.points, tol, grid.spec)


SIGN_NOTE = ("generalized system taken as printed: dF1/dx0 - dF2/dx1 + a F1 + b F2 = 0 and "
             "dF1/dx1 + dF2/dx0 + c F1 + d F2 = 0; the Vekua system of slice Fueter-regularity "
             "is the case V = (0, -2/x1, 0, 0)")


def generalized_vekua_report(F: StemFunction, V: VekuaData, grid: Grid, tol=1e-8,
                             engine=DEFAULT_ENGINE) -> RegularityReport:
    R1, R2 = generalized_vekua_residual(F, V, grid.alpha, grid.beta, engine)
    res = np.maximum(oc.norm(R1), oc.norm(R2))
    rep = make_report("generalized-vekua", res, grid.points, tol, grid.spec)
    rep.note = SIGN_NOTE
    return rep


def _sphere_dirs(rng, n):
    u = rng.standard_normal((n, 3))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def o3_report(F: StemFunction, grid: Grid, tol=1e-8, rng=None) -> RegularityReport:
    rng = np.random.default_rng(rng)
    u = _sphere_dirs(rng, grid.alpha.size)
    v = np.concatenate([grid.alpha[:, None], grid.beta[:, None] * u], axis=1)
    res = oc.norm(o3_system_residual(phi_inverse(F), v)).max(axis=0)
    return make_report("o3-system", res, v, tol, grid.spec)


def crf_report(f, grid: Grid, pair, tol=1e-8, rng=None, engine=DEFAULT_ENGINE) -> RegularityReport:
    rng = np.random.default_rng(rng)
    u = _sphere_dirs(rng, grid.alpha.size)
    v = np.concatenate([grid.alpha[:, None], grid.beta[:, None] * u], axis=1)
    x = pair.embed(v)
    res = oc.norm(ops.crf_restricted(f, pair, x, engine))
    return make_report("crf-restricted", res, x, tol, grid.spec)


def _slice_points(grid, rng):
    from .slices import random_units
    units = random_units(rng, grid.alpha.size)
    return oc.real(grid.alpha) + oc.scale(grid.beta, units)


def dbar_spherical_report(f: SliceFunction, grid: Grid, tol=1e-8, engine=DEFAULT_ENGINE) -> RegularityReport:
    """``dbar f = f'_s`` at stem level: ``(dbar F) - (F2/beta, 0)``."""
    D1, D2 = ops.dbar_stem(f.stem, grid.alpha, grid.beta, engine)
    _, F2 = f.stem(grid.alpha, grid.beta)
    res = np.maximum(oc.norm(D1 - F2 / grid.beta[:, None]), oc.norm(D2))
    return make_report("dbar-equals-spherical-derivative", res, grid.points, tol, grid.spec)


def slice_fueter_op_report(f, grid: Grid, tol=1e-8, dsc_tol=1e-5, rng=None,
                           engine=DEFAULT_ENGINE, dsc_samples=4) -> RegularityReport:
    """``theta_F f = 0`` together with the differential sliceness criterion.

    The sliceness part runs nested stencils, so it is evaluated on at most
    ``dsc_samples`` points and compared against ``dsc_tol``; its residual is
    rescaled by ``tol / dsc_tol`` before being merged.
    """
    rng = np.random.default_rng(rng)
    x = _slice_points(grid, rng)
    res = oc.norm(ops.slice_fueter_op(f, x, engine))
    # nested stencils are best conditioned far from the real axis
    idx = np.argsort(grid.beta)[::-1][:dsc_samples]
    r1, r2 = ops.dsc_residuals(f, x[idx], engine)
    res = res.copy()
    res[idx] = np.maximum(res[idx], np.maximum(r1, r2) * (tol / dsc_tol))
    return make_report("slice-fueter-operator", res, x, tol, grid.spec)


FIVE_PREDICATES = ("vekua", "o3-system", "crf-restricted", "dbar-equals-spherical-derivative",
                   "slice-fueter-operator")


def fueter_battery(f, grid: Grid, tol=1e-8, rng=None, unit=None, engine=DEFAULT_ENGINE):
    """Run the five equivalent characterizations of slice Fueter-regularity.

    ``f`` may be any callable; non-slice inputs are handled through the stem
    recovered from ``C_J`` for a random (or given) unit ``J``.
    """
    rng = np.random.default_rng(rng)
    if isinstance(f, SliceFunction):
        sf = f
    else:
        J = unit if unit is not None else oc.random_unit(rng)
        sf = SliceFunction(stem_of(f, J, name="recovered"))
    pair = oc.random_pair(rng)
    exact = isinstance(f, SliceFunction) and sf.stem.has_partials and engine.analytic
    reports = {
        "vekua": vekua_report(sf.stem, grid, tol, engine),
        "o3-system": o3_report(sf.stem, grid, max(tol, 1e-7), rng),
        "crf-restricted": crf_report(f, grid, pair, tol if exact else max(tol, 1e-7), rng, engine),
        "dbar-equals-spherical-derivative": dbar_spherical_report(sf, grid, tol, engine),
        "slice-fueter-operator": slice_fueter_op_report(f, grid, max(tol, 1e-7), rng=rng, engine=engine),
    }
    return reports


def crf_for_all_pairs(f, grid: Grid, n_pairs=20, tol=1e-8, rng=None, engine=DEFAULT_ENGINE):
    """Worst restricted-operator residual over ``n_pairs`` random pairs."""
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(n_pairs):
        rep = crf_report(f, grid, oc.random_pair(rng), tol, rng, engine)
        worst = max(worst, rep.max_residual)
    return worst


# ---------------------------------------------------------------------------
# classification


@dataclass
class Classification:
    flags: dict
    reports: dict

    def to_dict(self):
        return {"flags": self.flags, "reports": {k: r.to_dict() for k, r in self.reports.items()}}


def classify(f: SliceFunction, grid: Grid, tol=1e-8, engine=DEFAULT_ENGINE) -> Classification:
    """Flag a slice function as slice-regular, slice Fueter-regular and/or constant."""
    F = _stem_for(f)
    J1, J2 = F.jet(grid.alpha, grid.beta, 1, engine)
    D1, D2 = 0.5 * (J1[1] - J2[2]), 0.5 * (J1[2] + J2[1])
    dbar_res = np.maximum(oc.norm(D1), oc.norm(D2))
    const_res = np.max(oc.norm(np.concatenate([J1[1:], J2[1:]])), axis=0)
    # a constant stem must also have F2 = 0 (F2 is odd, so it vanishes at beta = 0)
    const_res = np.maximum(const_res, oc.norm(J2[0]))
    reports = {
        "slice-regular": make_report("slice-regular", dbar_res, grid.points, tol, grid.spec),
        "slice-Fueter-regular": vekua_report(F, grid, tol, engine),
        "constant": make_report("constant", const_res, grid.points, tol, grid.spec),
    }
    reports["slice-Fueter-regular"].predicate = "slice-Fueter-regular"
    flags = {k: r.passed for k, r in reports.items()}
    return Classification(flags, reports)
