import numpy as np
import pytest

from octoslice import octonion as oc
from octoslice import slices as sl


@pytest.fixture
def rng():
    return np.random.default_rng(11)


def example_direct(x, a, b, c):
    """(3 Re^2 + 2 Re Im + Im^2) a + 3 Re b + Im b + c with octonion products."""
    re = oc.re(x)[..., None]
    im = oc.im(x)
    coef = 3 * re ** 2 * oc.ONE + 2 * re * im + oc.mul(im, im)
    return oc.mul(coef, a) + 3 * re * b + oc.mul(im, b) + c


def test_example_family_matches_direct_formula(rng):
    a, b, c = rng.standard_normal((3, 8))
    f = sl.example_family(a, b, c)
    x = rng.standard_normal((40, 8))
    assert np.allclose(f(x), example_direct(x, a, b, c), atol=1e-12)
    assert isinstance(f.stem, sl.PolyStem)


def test_example_family_with_pole_excludes_real_axis(rng):
    a, b, c, d = rng.standard_normal((4, 8))
    f = sl.example_family(a, b, c, d)
    with pytest.raises(sl.DomainError):
        f(oc.real(0.3))
    x = oc.octonion(0.2, 0, 0, 0.5)
    expected = example_direct(x, a, b, c) + 4.0 * oc.mul(oc.K, d)
    assert np.allclose(f(x), expected)


def test_stem_parity_and_analytic_jet_agree_with_fd(rng):
    a, b, c, d = rng.standard_normal((4, 8))
    f = sl.example_family(a, b, c, d)
    al = rng.uniform(-1, 1, 10)
    be = rng.uniform(0.3, 1, 10)
    assert f.stem.parity_residual(al, be) < 1e-12
    J1, J2 = f.stem.jet(al, be, 2)
    K1, K2 = f.stem._fd_jet(al, be, 2, 1e-4)
    assert np.allclose(J1[:3], K1[:3], atol=1e-6) and np.allclose(J2[:3], K2[:3], atol=1e-6)
    assert np.allclose(J1[3:], K1[3:], atol=1e-3) and np.allclose(J2[3:], K2[3:], atol=1e-3)


def test_slice_product_with_slice_preserving_factor_is_pointwise(rng):
    g = sl.induce(sl.random_poly_stem(rng, 3))
    x = rng.standard_normal((20, 8))
    prod = sl.identity() * g
    assert np.allclose(prod(x), oc.mul(x, g(x)), atol=1e-10)
    s = sl.identity() + g
    assert np.allclose(s(x), x + g(x))


def test_normal_reciprocal_and_conjugate(rng):
    f = sl.induce(sl.random_poly_stem(rng, 2))
    x = rng.standard_normal((20, 8))
    n1, n2 = sl.normal(f).stem(oc.split(x)[0], oc.split(x)[1])
    assert np.max(oc.norm(oc.im(n1)) + oc.norm(oc.im(n2))) < 1e-10
    one = sl.slice_product(f, sl.slice_reciprocal(f))(x)
    assert np.allclose(one, oc.ONE, atol=1e-9)
    fcc = sl.stem_conjugate(sl.stem_conjugate(f))
    assert np.allclose(fcc(x), f(x))


def test_reciprocal_raises_on_zero_set():
    f = sl.identity()
    with pytest.raises(sl.SingularPointError):
        sl.slice_reciprocal(f)(np.zeros(8))


def test_spherical_value_and_derivative(rng):
    a, b, c = rng.standard_normal((3, 8))
    f = sl.example_family(a, b, c)
    x = rng.standard_normal((10, 8))
    al, be, u = oc.split(x)
    # f = f°_s + Im(x) f'_s
    rebuilt = sl.spherical_value(f)(x) + oc.mul(oc.im(x), sl.spherical_derivative(f)(x))
    assert np.allclose(rebuilt, f(x), atol=1e-12)
    # on the real axis the limit dF2/db = 2 alpha a + b is used
    assert np.allclose(sl.spherical_derivative(f)(oc.real(0.7)), 1.4 * a + b)


def test_spherical_derivative_on_axis_needs_partials():
    stem = sl.StemFunction(lambda a, b: (oc.real(a), oc.real(b)))
    with pytest.raises(sl.SingularPointError):
        sl.spherical_derivative(sl.induce(stem))(oc.real(1.0))


def test_representation_formula(rng):
    f = sl.induce(sl.random_poly_stem(rng, 3))
    I, J, K = sl.random_units(rng, 3)
    al, be = 0.3, 0.8
    lhs = f(oc.real(al) + be * K)
    assert np.allclose(sl.representation(f, I, J, K, al, be), lhs, atol=1e-10)
    with pytest.raises(ValueError):
        sl.representation(f, I, I, K, al, be)


def test_stem_recovery_and_sliceness(rng):
    f = sl.induce(sl.random_poly_stem(rng, 3))
    J = sl.random_units(rng, 1)[0]
    F = sl.stem_of(f, J)
    al, be = rng.uniform(-1, 1, 8), rng.uniform(0.1, 1, 8)
    assert np.allclose(np.stack(F(al, be)), np.stack(f.stem(al, be)), atol=1e-12)
    assert sl.sliceness_check(f, al, be, rng=rng).passed
    nonslice = lambda x: oc.real(x[..., 2])
    rep = sl.sliceness_check(nonslice, al, be, rng=rng)
    assert not rep and rep.max_residual > 1e-3


def test_phi_roundtrip_and_equivariance(rng):
    f = sl.example_family(*rng.standard_normal((3, 8)))
    G = sl.phi_inverse(f.stem)
    v = rng.standard_normal((6, 4))
    assert G.equivariance_residual(v, sl.random_rotation(rng)) < 1e-12
    assert G.intrinsic_residual(rng, 16, 4) < 1e-12
    # all four components equal to x0: they do not rotate with the input
    bad = sl.O3StemFunction(lambda w: np.repeat(oc.real(w[..., 0])[..., None, :], 4, axis=-2))
    assert bad.intrinsic_residual(rng, 16, 4) > 1e-3
    back = sl.phi(G)
    al, be = rng.uniform(-1, 1, 6), rng.uniform(0.1, 1, 6)
    assert np.allclose(np.stack(back(al, be)), np.stack(f.stem(al, be)))
    pair = oc.random_pair(rng)
    assert np.allclose(G.induced_value(pair, v), f.on_slice(pair, v), atol=1e-12)


def test_domains():
    ann = sl.PlaneDomain.annulus(0.5, 2.0)
    assert ann.contains(1.0, 0.0) and not ann.contains(0.1, 0.1)
    assert sl.PlaneDomain.annulus(0.0, 1.0).contains(0.0, 0.5)
    with pytest.raises(ValueError):
        sl.PlaneDomain.annulus(1.0, -1.0)
    disc = sl.PlaneDomain.disc(1.0, exclude_real=True)
    assert not disc.contains(0.2, 0.0)
    rect = sl.PlaneDomain.rectangle(-1.0, 0.5, 0.8)
    assert np.isclose(rect.boundary_distance(0.0, 0.0), 0.5)
    A, B = rect.grid(4, 4)
    assert np.all(rect.contains(A, B)) and np.all(B > 0)
