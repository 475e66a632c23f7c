import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from octoslice import octonion as oc

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
octs = arrays(np.float64, (8,), elements=finite)


def _qmat(q):
    """Quaternion as a 2x2 complex matrix (independent of the library's kernels)."""
    a, b, c, d = q
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def _qvec(m):
    return np.array([m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag])


def oracle_mul(x, y):
    """(a + l b)(c + l d) = (a c - d conj(b)) + l (conj(a) d + c b), via matrices."""
    a, b, c, d = (_qmat(v) for v in (x[:4], x[4:], y[:4], y[4:]))
    H = lambda m: m.conj().T  # quaternion conjugate
    return np.concatenate([_qvec(a @ c - d @ H(b)), _qvec(H(a) @ d + c @ b)])


def test_basis_table_matches_matrix_oracle():
    for a in range(8):
        for b in range(8):
            assert np.allclose(oc.mul(oc.BASIS[a], oc.BASIS[b]), oracle_mul(oc.BASIS[a], oc.BASIS[b]))
    # each e_a e_b is a signed basis element and imaginary units anticommute
    for a in range(1, 8):
        for b in range(1, 8):
            if a != b:
                p = oc.mul(oc.BASIS[a], oc.BASIS[b])
                assert np.count_nonzero(p) == 1
                assert np.allclose(p, -oc.mul(oc.BASIS[b], oc.BASIS[a]))


@settings(max_examples=100, deadline=None)
@given(octs, octs)
def test_mul_matches_matrix_oracle(x, y):
    assert np.allclose(oc.mul(x, y), oracle_mul(x, y), atol=1e-10)


def test_quaternion_subalgebra_and_l_square():
    assert np.allclose(oc.mul(oc.I, oc.J), oc.K)
    assert np.allclose(oc.mul(oc.L, oc.L), -oc.ONE)
    # (ij)l - i(jl) = -2 (lk): the basis is not associative
    assert np.allclose(oc.associator(oc.I, oc.J, oc.L), -2 * oc.LK)


def test_broadcasting_shapes():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((5, 1, 8))
    y = rng.standard_normal((1, 3, 8))
    assert oc.mul(x, y).shape == (5, 3, 8)
    assert oc.qmul(np.ones(4), np.ones(4)).shape == (4,)


@settings(max_examples=200, deadline=None)
@given(octs, octs, octs)
def test_alternative_laws(x, y, z):
    s = 1 + np.linalg.norm(x) ** 2 * (1 + np.linalg.norm(y)) * (1 + np.linalg.norm(z))
    assert oc.norm(oc.associator(x, x, y)) <= 1e-12 * s
    assert oc.norm(oc.associator(y, x, x)) <= 1e-12 * s
    assert oc.norm(oc.associator(x, y, x)) <= 1e-12 * s
    assert oc.moufang_residual(x, y, z) <= 1e-12 * s * (1 + np.linalg.norm(x) * np.linalg.norm(y))


@settings(max_examples=200, deadline=None)
@given(octs, octs)
def test_norm_and_conjugation(x, y):
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    assert abs(oc.norm(oc.mul(x, y)) - nx * ny) <= 1e-12 * (1 + nx * ny)
    assert np.allclose(oc.conj(oc.mul(x, y)), oc.mul(oc.conj(y), oc.conj(x)), atol=1e-11 * (1 + nx * ny))
    assert np.allclose(oc.mul(x, oc.conj(x)), oc.real(nx ** 2), atol=1e-11 * (1 + nx ** 2))


def test_inverse_and_zero_division():
    x = oc.octonion(1, 2, 0, 0, 3)
    assert np.allclose(oc.mul(x, oc.inverse(x)), oc.ONE)
    with pytest.raises(oc.ZeroDivision):
        oc.inverse(np.zeros(8))


def test_split_and_sphere_point():
    x = oc.octonion(1, 0, 3, 4)
    a, b, u = oc.split(x)
    assert a == 1 and b == 5 and np.allclose(u, oc.octonion(0, 0, 0.6, 0.8))
    a, b, u = oc.split(oc.real(2.0))
    assert b == 0 and np.array_equal(u, oc.I)
    y = oc.sphere_point(x, oc.L)
    assert np.allclose(oc.delta_poly(x, y), 0)


def test_unit_validation():
    with pytest.raises(ValueError):
        oc.ImaginaryUnit(oc.octonion(0, 2))
    with pytest.raises(ValueError):
        oc.OrthoUnitPair(oc.I, oc.I)
    pair = oc.random_pair(1)
    assert abs(oc.inner(pair.I, pair.J)) < 1e-12
    assert np.allclose(pair.frame @ pair.frame.T, np.eye(4))


def test_embedding_is_algebra_map():
    rng = np.random.default_rng(2)
    pair = oc.random_pair(rng)
    p, q = rng.standard_normal((2, 4))
    assert np.allclose(pair.embed(oc.qmul(p, q)), oc.mul(pair.embed(p), pair.embed(q)))
    assert np.allclose(pair.coords(pair.embed(p)), p)


def test_complete_pair_rejects_degenerate_candidate():
    pair = oc.complete_pair(oc.I, seed=0, candidate=oc.I)
    assert abs(oc.inner(pair.I, pair.J)) < 1e-12
