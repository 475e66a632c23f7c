import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from octoslice import numdiff
from octoslice import octonion as oc
from octoslice import regularity as reg
from octoslice import series
from octoslice import slices as sl
from octoslice.numdiff import FD_ENGINE
from octoslice.quadrature import QuadratureOrders
from octoslice.series import MultiIndex

TWO_PI2 = 2 * np.pi ** 2
i, j, k = np.eye(4)[1:]

# the printed coefficient list for |kappa| <= 2 (quaternion parts)
PRINTED_ELL = {
    (0, 0, 0): [[1, 0, 0, 0]],
    (0, 0, 1): [-k, 0 * k],
    (0, 1, 0): [-j, 0 * j],
    (1, 0, 0): [-i, -i],
    (0, 0, 2): [[-1, 0, 0, 0], [0] * 4, [0] * 4],
    (0, 2, 0): [[-1, 0, 0, 0], [0] * 4, [0] * 4],
    (0, 1, 1): [[0] * 4] * 3,
    (1, 0, 1): [[0] * 4, -j, [0] * 4],
    (1, 1, 0): [[0] * 4, k, [0] * 4],
    (2, 0, 0): [[-1, 0, 0, 0], [-2, 0, 0, 0], [-1, 0, 0, 0]],
}


@pytest.fixture
def rng():
    return np.random.default_rng(21)


def c_i(x0, x1):
    v = np.zeros(np.broadcast(x0, x1).shape + (4,))
    v[..., 0], v[..., 1] = x0, x1
    return v


# -- multi-indices and caps ---------------------------------------------------

def test_multi_index_basics():
    kap = MultiIndex.of((1, 2, 0))
    assert kap.order == 3 and kap.factorial == 2 and kap.key() == "1,2,0"
    assert kap.lowered(1) == MultiIndex(1, 1, 0)
    assert len(series.multi_indices(3)) == 10
    with pytest.raises(ValueError):
        MultiIndex.of((1, -1, 0))
    with pytest.raises(series.CapExceeded):
        series.fueter_poly((4, 3, 0))
    with pytest.raises(series.CapExceeded):
        series.ell_row((2, 1, 0), cap=2)


# -- Fueter polynomials ---------------------------------------------------------

def test_ell_rows_match_printed_list():
    for kappa, rows in PRINTED_ELL.items():
        row = series.ell_row(kappa)
        assert np.array_equal(row[:, :4], np.array(rows, dtype=float)), kappa
        assert not row[:, 4:].any()


def test_printed_degree_two_polynomials(rng):
    x0, x1 = rng.standard_normal((2, 20))
    v = c_i(x0, x1)
    x = v.copy()
    P = lambda kap: series.fueter_poly(kap)(v)
    assert np.allclose(P((0, 0, 2)), -c_i(x0 ** 2, 0))
    assert np.allclose(P((0, 2, 0)), P((0, 0, 2)))
    assert np.allclose(P((0, 1, 1)), 0)
    assert np.allclose(P((1, 1, 1)), 0)
    assert np.allclose(P((1, 2, 0)), P((1, 0, 2)))
    im = c_i(0, x1)
    # -Re(x) Im(x) j and Re(x) Im(x) k with Im(x) = x1 i
    assert np.allclose(P((1, 0, 1)), -x0[:, None] * oc.qmul(im, j))
    assert np.allclose(P((1, 1, 0)), x0[:, None] * oc.qmul(im, k))
    assert np.allclose(P((2, 0, 0)), -oc.qmul(x, x))


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)),
       st.integers(0, 2 ** 31 - 1))
def test_fueter_poly_matches_permutation_sum(kappa, seed):
    v = np.random.default_rng(seed).standard_normal((5, 4))
    assert np.allclose(series.fueter_poly(kappa)(v), series.fueter_poly_bruteforce(kappa, v), atol=1e-12)


@pytest.mark.parametrize("kappa", [(1, 0, 0), (1, 1, 0), (2, 0, 1), (1, 1, 2), (0, 3, 1)])
def test_fueter_polys_are_left_regular(kappa, rng):
    P = series.fueter_poly(kappa)
    v = rng.standard_normal((4, 4))
    D = numdiff.gradient(P, v, step=1e-4)
    out = D[0] + oc.qmul(i, D[1]) + oc.qmul(j, D[2]) + oc.qmul(k, D[3])
    assert np.max(np.abs(out)) < 1e-6


def test_restriction_to_complex_plane_matches_full(rng):
    for kappa in series.multi_indices(3):
        P = series.fueter_poly(kappa)
        x0, x1 = rng.standard_normal((2, 6))
        assert np.allclose(P.restricted(x0, x1), P(c_i(x0, x1)))
        assert np.allclose(series.row_polynomial(series.ell_row(kappa), c_i(x0, x1)), P(c_i(x0, x1)))


def test_basis_rank_reflects_degeneracies():
    # two relations among the six polynomials of degree two
    assert series.basis_rank(2, rng=0) == 4
    assert series.basis_rank(1, rng=0) == 3


# -- reciprocal side ------------------------------------------------------------------

def test_Q_kappa_is_derivative_of_kernel(rng):
    v = rng.standard_normal((5, 4)) + 1.5
    E = series.reciprocal_kernel_E
    assert np.allclose(series.Q_kappa((0, 0, 0), v), E(v))
    for h in range(3):
        kap = [0, 0, 0]
        kap[h] = 1
        fd = numdiff.partial(E, v, h + 1, 1e-5)
        assert np.allclose(series.Q_kappa(kap, v), fd, atol=1e-8)
    fd2 = numdiff.second_partial(E, v, 1, 2, 1e-3)
    assert np.allclose(series.Q_kappa((1, 1, 0), v), fd2, atol=1e-5)
    with pytest.raises(sl.SingularPointError):
        series.Q_kappa((0, 0, 0), np.zeros(4))


def test_m_oracle_gaps_empty():
    assert series.m_oracle_gaps() == {}
    # an absurd tolerance flags every row with a rounding-level gap
    assert len(series.m_oracle_gaps(1, tol=-1.0)) == 4


def test_m_rows_exact_vs_vandermonde():
    m0 = series.m_row((0, 0, 0))
    assert np.allclose(m0[:, 0], [1 / TWO_PI2, -1 / TWO_PI2])
    for kk in range(4):
        for kappa in series.multi_indices(kk):
            assert np.allclose(series.m_row(kappa), series.m_row_vandermonde(kappa), atol=1e-12)


def test_m_rows_reproduce_Q_on_complex_plane(rng):
    x0, x1 = rng.standard_normal((2, 6))
    v = c_i(x0, x1)
    for kappa in series.multi_indices(2):
        lhs = series.row_polynomial(series.m_row(kappa), v, reciprocal=True)
        assert np.allclose(lhs, series.Q_kappa(kappa, v))


# -- slice Fueter powers ------------------------------------------------------------

def test_powers_restrict_to_fueter_polynomials_on_complex_slice(rng):
    pair = oc.random_pair(rng)
    c = rng.standard_normal(8)
    x = oc.real(rng.standard_normal(5)) + rng.standard_normal(5)[:, None] * pair.I
    for kappa in series.multi_indices(2) + series.multi_indices(3):
        lhs = series.slice_power_P(pair, kappa, x, c)
        rhs = series.restricted_P(pair, kappa, x, c)
        assert np.allclose(lhs, rhs, atol=1e-10), kappa
        q = series.slice_power_Q(pair, kappa, x, c)
        qr = series.restricted_Q(pair, kappa, x, c)
        assert np.allclose(q, qr, atol=1e-9 * (1 + np.max(np.abs(qr)))), kappa


def test_degree_sums_of_powers_are_fueter_regular(rng):
    pair = oc.random_pair(rng)
    f = sl.example_family(*rng.standard_normal((3, 8)))
    x0, x1 = rng.uniform(-1, 1, 8), rng.uniform(0.2, 1, 8)
    for kk in range(3):
        R1, R2 = reg.vekua_residual(series.taylor_power(f, pair, kk).stem, x0, x1)
        assert max(np.max(oc.norm(R1)), np.max(oc.norm(R2))) < 1e-10
    g = series.power_Q_stem(pair, {(0, 0, 0): rng.standard_normal(8)})
    R1, R2 = reg.vekua_residual(g, x0 + 1.0, x1)
    assert max(np.max(oc.norm(R1)), np.max(oc.norm(R2))) < 1e-10


def test_rational_stem_jets_match_fd(rng):
    pair = oc.random_pair(rng)
    g = series.power_Q_stem(pair, {(1, 0, 0): rng.standard_normal(8), (0, 1, 1): rng.standard_normal(8)})
    al, be = rng.uniform(0.5, 1, 4), rng.uniform(0.5, 1, 4)
    J1, J2 = g.jet(al, be, 2)
    K1, K2 = g.jet(al, be, 2, FD_ENGINE)
    assert np.allclose(J1[:3], K1[:3], atol=1e-6) and np.allclose(J2[:3], K2[:3], atol=1e-6)
    assert np.allclose(J1[3:], K1[3:], atol=1e-3) and np.allclose(J2[3:], K2[3:], atol=1e-3)


# -- Taylor -------------------------------------------------------------------------------

def test_worked_example_coefficients():
    a, b = np.random.default_rng(0).standard_normal((2, 8))
    f = sl.example_family(a, b, 0)
    pair = oc.STANDARD_PAIR
    c0 = series.taylor_coefficients(f, pair, 0)
    assert np.allclose(c0[MultiIndex(0, 0, 0)], 0)
    c1 = series.taylor_coefficients(f, pair, 1)
    assert np.allclose(c1[MultiIndex(0, 0, 1)], oc.mul(oc.K, b))
    assert np.allclose(c1[MultiIndex(0, 1, 0)], oc.mul(oc.J, b))
    assert np.allclose(c1[MultiIndex(1, 0, 0)], oc.mul(oc.I, b))
    c2 = series.taylor_coefficients(f, pair, 2)
    for kap in ((0, 0, 2), (0, 2, 0), (2, 0, 0)):
        assert np.allclose(c2[MultiIndex(*kap)], -a)
    for kap in ((0, 1, 1), (1, 0, 1), (1, 1, 0)):
        assert np.allclose(c2[MultiIndex(*kap)], 0)


def test_worked_example_powers(rng):
    a, b = rng.standard_normal((2, 8))
    f = sl.example_family(a, b, 0)
    pair = oc.random_pair(rng)
    x = rng.standard_normal((30, 8))
    re, im = oc.re(x)[:, None], oc.im(x)
    P1 = series.taylor_power(f, pair, 1)(x)
    assert np.allclose(P1, 3 * re * b + oc.mul(im, b), atol=1e-12)
    P2 = series.taylor_power(f, pair, 2)(x)
    expected = 3 * re ** 2 * a + 2 * re * oc.mul(im, a) + oc.mul(oc.mul(im, im), a)
    assert np.allclose(P2, expected, atol=1e-12)
    assert np.allclose(series.taylor_power(f, pair, 0)(x), 0)


def test_fd_coefficients_agree_with_exact(rng):
    f = sl.induce(sl.random_poly_stem(rng, 3))
    pair = oc.random_pair(rng)
    for kk in range(4):
        exact = series.taylor_coefficients(f, pair, kk, 0.3)
        fd = series.taylor_coefficients(f, pair, kk, 0.3, FD_ENGINE)
        for kap in exact:
            assert np.allclose(exact[kap], fd[kap], atol=1e-8)


def test_taylor_sum_reproduces_regular_polynomial(rng):
    f = sl.example_family(*rng.standard_normal((3, 8)))
    pair = oc.random_pair(rng)
    x = rng.standard_normal((20, 8))
    for y in (0.0, 0.7):
        assert np.allclose(series.taylor_sum(f, pair, 2, x, y), f(x), atol=1e-12)


def test_taylor_of_rational_function_converges(rng):
    pair = oc.random_pair(rng)
    g = sl.induce(series.power_Q_stem(pair, {(0, 0, 0): rng.standard_normal(8)}))
    y = 2.0
    x = oc.real(y) + 0.3 * sl.random_units(rng, 5)
    errs = [np.max(oc.norm(series.taylor_sum(g, pair, K, x, y, FD_ENGINE) - g(x))) for K in (0, 1, 2, 3)]
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
    assert errs[-1] < 0.05 * errs[0]


# -- Laurent ------------------------------------------------------------------------------

def test_laurent_reconstructs_reciprocal_and_polynomial_parts(rng):
    pair = oc.random_pair(rng)
    c = rng.standard_normal(8)
    g = sl.induce(series.power_Q_stem(pair, {(0, 0, 0): c}))
    q = QuadratureOrders(16, 16, 32, 8)
    L = series.laurent_coeffs(g, pair, 1.0, K=2, orders=q)
    assert np.allclose(L.b[MultiIndex(0, 0, 0)], c, atol=1e-10)
    x = sl.random_units(rng, 6) * rng.uniform(0.6, 1.8, 6)[:, None]
    assert np.max(oc.norm(L(x) - g(x))) < 1e-8
    f = sl.example_family(*rng.standard_normal((3, 8)))
    Lf = series.laurent_coeffs(f, pair, 1.0, K=2, orders=q)
    assert np.max(oc.norm(Lf(x) - f(x))) < 1e-8
    # without 1/kappa! the second-order coefficients are off by kappa!
    raw = series.laurent_coeffs(f, pair, 1.0, K=2, orders=q, normalize=False)
    assert np.max(oc.norm(raw(x) - f(x))) > 1e-2


def test_laurent_summands_are_regular(rng):
    pair = oc.random_pair(rng)
    g = sl.induce(series.power_Q_stem(pair, {(0, 0, 0): rng.standard_normal(8)}))
    L = series.laurent_coeffs(g, pair, 1.0, K=2, orders=QuadratureOrders(12, 12, 24, 8))
    x0, x1 = rng.uniform(0.3, 1, 5), rng.uniform(0.3, 1, 5)
    summands = L.summands()
    assert len(summands) == 6
    for side, kk, h in summands:
        R1, R2 = reg.vekua_residual(h.stem, x0, x1)
        assert max(np.max(oc.norm(R1)), np.max(oc.norm(R2))) < 1e-8, (side, kk)


# -- golden tables --------------------------------------------------------------------

def test_golden_tables_roundtrip(tmp_path):
    golden = series.load_golden_tables()
    assert golden == series.build_tables()
    path = series.write_golden_tables(tmp_path / "t.json")
    assert json.loads(path.read_text()) == golden
    assert golden["ell"]["2,0,0"][1][0] == -2.0
