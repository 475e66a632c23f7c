"""Verification suites run by the command line harness.

A suite is a function ``suite(config, rng) -> list[Check]``.  Each check
records the worst residual it saw against its tolerance.  Random draws come
only from ``rng``, which the harness derives per suite from the campaign seed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Dict, List

import numpy as np

from . import cauchy
from . import extremum as ext
from . import octonion as oc
from . import operators as ops
from . import regularity as reg
from . import series
from . import slices as sl
from .numdiff import DEFAULT_ENGINE, FD_ENGINE
from .quadrature import QuadratureOrders


@dataclass
class Check:
    name: str
    max_residual: float
    tol: float
    passed: bool
    count: int = 0
    note: str = ""

    def to_dict(self):
        return asdict(self)


def check(name, residuals, tol, note="", below=True) -> Check:
    """Record ``max(residuals) < tol`` (or ``min(residuals) > tol`` when ``below`` is False)."""
    r = np.asarray(residuals, dtype=float).ravel()
    if below:
        worst = float(np.max(r)) if r.size else 0.0
        ok = bool(np.all(np.isfinite(r)) and worst < tol)
    else:
        worst = float(np.min(r)) if r.size else 0.0
        ok = bool(worst > tol)
    return Check(name, worst, float(tol), ok, int(r.size), note)


# ---------------------------------------------------------------------------
# corpus


def build_corpus(config, rng):
    """``[(name, slice_function, is_fueter_regular)]`` from the corpus section."""
    spec = config["corpus"]
    out = []
    for i in range(spec["example_draws"]):
        a, b, c = rng.standard_normal((3, 8))
        d = rng.standard_normal(8) if i % 2 else np.zeros(8)
        out.append((f"example[{i}]", sl.example_family(a, b, c, d), True))
    for name in spec["custom"]:
        out.append(CUSTOM_STEMS[name](rng))
    return out


def _nonslice(rng):
    def raw(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        out[..., 0] = x[..., 1]
        return out
    return ("nonslice-x1", raw, False)


CUSTOM_STEMS: Dict[str, Callable] = {
    "identity": lambda rng: ("identity", sl.identity(), False),
    "constant": lambda rng: ("constant", sl.constant(rng.standard_normal(8)), True),
    "poly3": lambda rng: ("poly3", sl.induce(sl.random_poly_stem(rng, 3)), False),
    "product": lambda rng: ("example*example", sl.slice_product(
        sl.example_family(*rng.standard_normal((3, 8))),
        sl.example_family(*rng.standard_normal((3, 8)))), False),
    "nonslice": _nonslice,
}


def _grid(config):
    g = config["grid"]
    return reg.Grid.on(sl.PlaneDomain.annulus(0.2, 1.5), g["n_alpha"], g["n_beta"])


# ---------------------------------------------------------------------------
# suites


def suite_algebra(config, rng) -> List[Check]:
    n = config["samples"]["algebra"]
    tol = config["tolerances"]["algebra"]
    x, y, z = rng.standard_normal((3, n, 8))
    scale = oc.norm(x) * oc.norm(y) * oc.norm(z)
    xx = oc.norm(x) ** 2 * oc.norm(y)
    xy = oc.mul(x, y)
    out = [
        check("left alternativity", oc.norm(oc.associator(x, x, y)) / xx, tol),
        check("right alternativity", oc.norm(oc.associator(y, x, x)) / xx, tol),
        check("flexibility", oc.norm(oc.associator(x, y, x)) / xx, tol),
        check("Moufang", oc.moufang_residual(x, y, z) / (oc.norm(x) * scale), tol),
        check("Artin (x, y, xy)", oc.norm(oc.associator(x, y, xy)) / (oc.norm(x) * oc.norm(y)) ** 2, tol),
        check("norm multiplicativity", np.abs(oc.norm(xy) - oc.norm(x) * oc.norm(y)) / (oc.norm(x) * oc.norm(y)), tol),
        check("trace on associators", ext.trace_associator_residual(x, y, z) / scale, tol),
    ]
    return out


def suite_slice(config, rng) -> List[Check]:
    tol = config["tolerances"]["slice"]
    alpha = rng.uniform(-1, 1, 64)
    beta = rng.uniform(0.1, 1, 64)
    out = []
    for name, f, _ in build_corpus(config, rng):
        if not isinstance(f, sl.SliceFunction):
            rep = sl.sliceness_check(f, alpha, beta, tol, rng)
            out.append(check(f"non-slice detected: {name}", [rep.max_residual], 1e-3, below=False))
            continue
        rep = sl.sliceness_check(f, alpha, beta, tol, rng)
        out.append(check(f"sliceness: {name}", [rep.max_residual], tol))
        F1, F2 = sl.normal(f).stem(alpha, beta)
        mag = 1.0 + oc.norm(F1) + oc.norm(F2)
        imag = (oc.norm(oc.im(F1)) + oc.norm(oc.im(F2))) / mag
        out.append(check(f"normal is slice preserving: {name}", imag, tol))
        o3 = sl.phi_inverse(f.stem).intrinsic_residual(rng, n_rotations=config["samples"]["o3_rotations"])
        out.append(check(f"phi^-1 stem is O(3)-equivariant: {name}", [o3], tol))
    return out


def suite_operators(config, rng) -> List[Check]:
    tol = config["tolerances"]
    x = rng.standard_normal((100, 8))
    gam = ops.gamma(lambda y: oc.im(y), x, FD_ENGINE)
    out = [check("Gamma(Im) = 6 Im (finite differences)", oc.norm(gam - 6 * oc.im(x)) / (1 + oc.norm(x)), tol["gamma_fd"])]
    a, b, c = rng.standard_normal((3, 8))
    f = sl.example_family(a, b, c, 0)
    s1 = ops.spherical_derivative_from_gamma(f, x)
    s2 = sl.spherical_derivative(f)(x)
    out.append(check("f'_s = Im^-1 Gamma f / 6 (analytic)", oc.norm(s1 - s2), tol["analytic"]))
    out.append(check("slice Fueter operator on a regular function",
                     oc.norm(ops.slice_fueter_op(f, x)), tol["analytic"]))
    out.append(check("slice Fueter operator detects the identity",
                     oc.norm(ops.slice_fueter_op(sl.identity(), x)), 1e-3, below=False))
    return out


def suite_regularity(config, rng) -> List[Check]:
    tol = config["tolerances"]["vekua"]
    grid = _grid(config)
    out = []
    for name, f, regular in build_corpus(config, rng):
        battery = reg.fueter_battery(f, grid, tol, rng)
        flags = [r.passed for r in battery.values()]
        out.append(Check(f"battery unanimous: {name}", 0.0 if len(set(flags)) == 1 else 1.0,
                         0.5, len(set(flags)) == 1, len(flags)))
        if isinstance(f, sl.SliceFunction):
            R1, R2 = reg.vekua_residual(f.stem, grid.alpha, grid.beta, DEFAULT_ENGINE)
            res = np.maximum(oc.norm(R1), oc.norm(R2))
            if regular:
                out.append(check(f"Vekua residual: {name}", res, tol))
            else:
                out.append(check(f"Vekua residual bounded away: {name}", [res.max()],
                                 reg.FALSIFY_THRESHOLD, below=False))
    return out


def suite_cauchy(config, rng) -> List[Check]:
    tol = config["tolerances"]["cauchy"]
    q = QuadratureOrders(**config["quadrature"])
    n = config["samples"]["cauchy"]
    pair = oc.random_pair(rng)
    geo = cauchy.SliceBallGeometry(pair)
    v = rng.standard_normal((n, 4))
    v *= (rng.uniform(0.1, 0.8, n) / np.linalg.norm(v, axis=1))[:, None]
    x = pair.embed(v)
    a, b, c = rng.standard_normal((3, 8))
    out = []
    for name, f in (("example", sl.example_family(a, b, c, 0)), ("identity", sl.identity())):
        bp = np.array([oc.norm(cauchy.borel_pompeiu(f, geo, xi, q).value - f(xi)) for xi in x])
        out.append(check(f"BP reconstruction: {name}", bp, tol))
    f = sl.example_family(a, b, c, 0)
    cval = np.array([oc.norm(cauchy.cauchy_integral(f, geo, xi, q) - f(xi)) for xi in x])
    out.append(check("C surface reconstruction (regular f)", cval, tol))
    ext_pts = geo.mirror(x)
    c0 = np.array([oc.norm(cauchy.exterior_integral(f, geo, xi, q)) for xi in ext_pts])
    out.append(check("C0 exterior vanishing", c0, config["tolerances"]["exterior"]))
    return out


def suite_series(config, rng) -> List[Check]:
    tol = config["tolerances"]["series"]
    golden = series.load_golden_tables()
    fresh = series.build_tables()
    out = [Check("golden tables regenerate identically", 0.0 if golden == fresh else 1.0, 0.5,
                 golden == fresh, len(fresh["ell"]) + len(fresh["m"]))]
    printed = {(1, 0, 0): [[0, -1, 0, 0], [0, -1, 0, 0]], (2, 0, 0): [[-1, 0, 0, 0], [-2, 0, 0, 0], [-1, 0, 0, 0]],
               (0, 0, 0): [[1, 0, 0, 0]]}
    diff = [np.abs(series.ell_row(k)[:, :4] - np.array(v)).max() for k, v in printed.items()]
    out.append(check("ell rows (sample)", diff, 1e-15 if tol > 1e-15 else tol))
    gaps = series.m_oracle_gaps(tol=-1.0)
    flagged = [k.key() for k, g in gaps.items() if g > 1e-8]
    out.append(Check("m rows: exact expansion vs Vandermonde", max(gaps.values()), 1e-8,
                     not flagged, len(gaps), ", ".join(flagged)))
    pair = oc.random_pair(rng)
    a, b = rng.standard_normal((2, 8))
    f = sl.example_family(a, b, 0, 0)
    x = rng.standard_normal((50, 8))
    out.append(check("Taylor partial sum K=2 equals f", oc.norm(series.taylor_sum(f, pair, 2, x) - f(x)), tol))
    c = rng.standard_normal(8)
    g = sl.induce(series.power_Q_stem(pair, {(0, 0, 0): c}))
    L = series.laurent_coeffs(g, pair, 1.0, K=2, orders=QuadratureOrders(**config["quadrature"]))
    d = rng.standard_normal((20, 8))
    xs = d / oc.norm(d)[:, None] * rng.uniform(0.6, 1.8, 20)[:, None]
    out.append(check("Laurent reconstruction K=2", oc.norm(L(xs) - g(xs)), config["tolerances"]["cauchy"]))
    return out


def suite_extremum(config, rng) -> List[Check]:
    tol = config["tolerances"]["camshaft"]
    n = config["samples"]["extremum"]
    res1, res2, phi, sph, inv = [], [], [], [], []
    for _ in range(n):
        f = sl.induce(sl.random_poly_stem(rng, 3))
        p = rng.standard_normal((10, 8))
        g1, g2 = ext.camshaft_values(f, p)
        t1, t2 = ext.camshaft_targets(f, p)
        res1.append(oc.norm(g1 - oc.real(t1)) / (1 + t1))
        res2.append(oc.norm(g2 - oc.real(t2)) / (1 + t2))
        c = rng.standard_normal(8)
        y = ext.reparam_phi(f, c, p)
        lhs = ext.right_product(f, c)(p)
        phi.append(oc.norm(lhs - oc.mul(f(y), c)) / (1 + oc.norm(lhs)))
        sph.append(ext.sphere_residual(p, y) / (1 + oc.norm(p) ** 2))
        inv.append(oc.norm(ext.reparam_phi_inverse(f, c, y) - p) / (1 + oc.norm(p)))
    out = [
        check("camshaft g1", np.concatenate(res1), tol),
        check("camshaft g2", np.concatenate(res2), tol),
        check("(f.c)(x) = f(Phi(x)) c", np.concatenate(phi), tol),
        check("Phi preserves spheres", np.concatenate(sph), tol),
        check("Phi^-1(Phi(x)) = x", np.concatenate(inv), tol),
    ]
    geoms = [sl.PlaneDomain.disc(1.0), sl.PlaneDomain.annulus(0.5, 1.5, 0.2), sl.PlaneDomain.rectangle(-1.0, 0.5, 0.8)]
    flags = []
    for _ in range(3):
        a, b, c = rng.standard_normal((3, 8))
        f = sl.example_family(a, b, c, 0)
        flags += [ext.max_modulus_probe(f, g).boundary_flag for g in geoms]
    out.append(Check("MMP argmax on the boundary layer", float(len(flags) - sum(flags)), 0.5,
                     all(flags), len(flags)))
    const = ext.max_modulus_probe(sl.constant(rng.standard_normal(8)), geoms[0]).constancy_estimate
    out.append(check("MMP constancy of constants", [const], 1e-12))
    return out


SUITES = {
    "algebra": (suite_algebra, "Alternativity, flexibility, Moufang and Artin identities, "
                               "norm multiplicativity and trace of associators on random octonions."),
    "slice": (suite_slice, "Sliceness of corpus functions (stem recovery from random units) and "
                           "slice preservation of normal functions."),
    "operators": (suite_operators, "Gamma(Im) = 6 Im, f'_s from the spherical Dirac operator, "
                                   "and the slice Fueter operator on regular and non-regular inputs."),
    "regularity": (suite_regularity, "Five equivalent regularity predicates per corpus function "
                                     "(Vekua, O(3) system, restricted CRF, dbar = f'_s, slice Fueter "
                                     "operator); Vekua residual levels."),
    "cauchy": (suite_cauchy, "Borel-Pompeiu (BP) reconstruction, Cauchy (C) surface reconstruction "
                             "and exterior vanishing (C0) on a unit ball of a random quaternionic slice."),
    "series": (suite_series, "Golden ell/m coefficient tables, Taylor reconstruction of the example "
                             "family and Laurent reconstruction of a reciprocal power."),
    "extremum": (suite_extremum, "Camshaft annihilation, the sphere reparametrization Phi and its "
                                 "inverse, and the maximum modulus grid probe."),
}
SUITE_NAMES = tuple(SUITES)
