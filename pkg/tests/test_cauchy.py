import numpy as np
import pytest

from octoslice import cauchy
from octoslice import octonion as oc
from octoslice import quadrature as quad
from octoslice import slices as sl
from octoslice.quadrature import QuadratureOrders

COARSE = QuadratureOrders(16, 16, 32, 12)


@pytest.fixture
def rng():
    return np.random.default_rng(8)


@pytest.fixture
def geo(rng):
    return cauchy.SliceBallGeometry(oc.random_pair(rng))


def test_sphere_and_ball_rules_integrate_moments():
    s = quad.sphere_rule(COARSE, radius=2.0)
    assert s.total == pytest.approx(2 * np.pi ** 2 * 8)
    # int_{S^3_r} v_1^2 = r^2 |S^3_r| / 4
    assert s.integrate(s.nodes[:, 1] ** 2) == pytest.approx(4 * 2 * np.pi ** 2 * 8 / 4)
    b = quad.ball_rule(COARSE, radius=1.5)
    assert b.total == pytest.approx(0.5 * np.pi ** 2 * 1.5 ** 4)
    sh = quad.shell_rule(COARSE, 0.5, 1.0)
    assert sh.total == pytest.approx(0.5 * np.pi ** 2 * (1 - 0.5 ** 4))


def test_polar_segments_volume():
    d, t, w = quad.polar_segments(np.array([0.3, 0.2, -0.1, 0.4]), COARSE, 1.0)
    assert np.sum(w) == pytest.approx(0.5 * np.pi ** 2, rel=1e-8)
    shell = 0.5 * np.pi ** 2 * (1 - 0.5 ** 4)
    # near either sphere and at the centre of the ball
    for v in ([0.0, 0.7, 0.0, 0.0], [0.0, 0.0, 0.52, 0.0], [0.1, 0.0, 0.0, -0.97]):
        d, t, w = quad.polar_segments(np.array(v), COARSE, 1.0, inner=0.5)
        assert np.sum(w) == pytest.approx(shell, rel=1e-6)
        assert np.all(w >= 0) and np.all(np.abs(np.linalg.norm(np.array(v) + t[:, None] * d, axis=1) - 0.75) <= 0.25 + 1e-12)
    d, t, w = quad.polar_segments(np.zeros(4), COARSE, 2.0)
    assert np.sum(w) == pytest.approx(8 * np.pi ** 2, rel=1e-12)


def test_aligned_sphere_rule():
    pole = np.array([0.0, 0.6, 0.0, 0.8])
    rule = quad.aligned_sphere_rule(COARSE, 2.0, np.array([1.0, 0, 0, 0]), pole, 0.05)
    assert rule.total == pytest.approx(16 * np.pi ** 2, rel=1e-5)
    assert np.allclose(np.linalg.norm(rule.nodes - [1.0, 0, 0, 0], axis=1), 2.0)
    # nodes cluster at the pole; second moments are still exact
    assert np.min(np.linalg.norm(rule.nodes - [1.0, 0, 0, 0] - 2 * pole, axis=1)) < 0.05
    # int x1^2 over the sphere of radius 2: |S^3| r^2 / 4
    assert rule.integrate(rule.nodes[:, 1] ** 2) == pytest.approx(16 * np.pi ** 2, rel=1e-5)


def test_normal_function_of_g(rng, geo):
    I = geo.pair.I
    y = oc.real(0.3) + 0.6 * I
    xi = geo.pair.embed(rng.standard_normal(4))
    # for xi and x in C_I the normal function is |x - xi|^2 |x - conj(xi)|^2
    eta = oc.real(-0.4) + 0.2 * I
    expected = oc.norm2(y - eta) * oc.norm2(y - oc.conj(eta))
    assert cauchy.g_normal(I, eta, y) == pytest.approx(expected)
    assert cauchy.g_normal(I, xi, y) > 0
    # it vanishes on the sphere of a point of C_I
    xi_c = oc.real(0.1) + 0.4 * I
    x = oc.sphere_point(xi_c, sl.random_units(rng, 1)[0])
    assert abs(cauchy.g_normal(I, xi_c, x)) < 1e-14
    assert cauchy.g_normal(I, xi, x) > 0


def test_integrand_restricts_to_classical_kernel(rng, geo):
    pair = geo.pair
    y = oc.real(0.2) - 0.5 * pair.I
    xi = pair.embed(rng.standard_normal((6, 4)))
    density = rng.standard_normal((6, 8))
    lhs = cauchy._pair_integrand(pair.I, y, xi, density)
    rhs = cauchy.classical_kernel(y, xi, density)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_cauchy_integral_of_constant(rng, geo):
    c = rng.standard_normal(8)
    x = geo.pair.embed(np.array([0.1, -0.2, 0.3, 0.1]))
    val = cauchy.cauchy_integral(sl.constant(c), geo, x, COARSE)
    assert oc.norm(val - c) < 1e-5


def test_borel_pompeiu_on_regular_and_nonregular(rng, geo):
    f = sl.example_family(*rng.standard_normal((3, 8)))
    # points off the slice, so the sliceness recombination is exercised
    x = rng.standard_normal((3, 8))
    x *= (0.6 / oc.norm(x))[:, None]
    for h in (f, sl.identity()):
        res = cauchy.borel_pompeiu(h, geo, x, COARSE)
        assert np.max(oc.norm(res.value - h(x))) < 1e-3
    # the volume term of a Fueter-regular function vanishes
    assert np.max(oc.norm(cauchy.borel_pompeiu(f, geo, x, COARSE).volume)) < 1e-10


def test_exterior_vanishing(rng, geo):
    f = sl.example_family(*rng.standard_normal((3, 8)))
    x = geo.mirror(geo.pair.embed(np.array([[0.2, 0.3, 0.1, -0.2]])))
    assert oc.norm(x) == pytest.approx(1 / np.linalg.norm([0.2, 0.3, 0.1, -0.2]))
    assert np.max(oc.norm(cauchy.exterior_integral(f, geo, x, COARSE))) < 1e-4
    with pytest.raises(ValueError):
        cauchy.exterior_integral(f, geo, oc.real(0.1), COARSE)


def test_shell_geometry_reconstructs(rng):
    geo = cauchy.SliceBallGeometry(oc.random_pair(rng), radius=1.0, inner_radius=0.3)
    f = sl.example_family(*rng.standard_normal((3, 8)))
    x = geo.pair.embed(np.array([0.1, 0.5, 0.2, 0.0]))
    assert oc.norm(cauchy.cauchy_integral(f, geo, x, COARSE) - f(x)) < 1e-4
    assert geo.surface_measure() == pytest.approx(2 * np.pi ** 2 * (1 + 0.3 ** 3))


def test_shell_borel_pompeiu_near_both_spheres(rng):
    geo = cauchy.SliceBallGeometry(oc.random_pair(rng), radius=1.0, inner_radius=0.4)
    f = sl.identity()
    d = rng.standard_normal(8)
    d /= oc.norm(d)
    for r in (0.5, 0.9):
        res = cauchy.borel_pompeiu(f, geo, r * d, COARSE)
        assert oc.norm(res.value - f(r * d)) < 1e-6
        assert oc.norm(res.volume) > 0.1


def test_guards(geo):
    with pytest.raises(cauchy.SingularPairError):
        cauchy.surface_integral(sl.identity(), geo, oc.real(0.99), COARSE)
    with pytest.raises(ValueError):
        cauchy.SliceBallGeometry(geo.pair, radius=-1.0)
    with pytest.raises(ValueError):
        cauchy.SliceBallGeometry(geo.pair, radius=1.0, inner_radius=2.0)
    with pytest.raises(cauchy.SingularPairError):
        cauchy._pair_integrand(geo.pair.I, oc.real(0.5), oc.real(0.5), oc.ONE)


def test_refuses_functions_singular_inside(rng, geo):
    # the d-term has a pole along the real axis, which every slice ball meets
    f = sl.example_family(*rng.standard_normal((4, 8)))
    x = geo.pair.embed(np.array([0.2, 0.3, 0.1, 0.1]))
    for integral in (cauchy.surface_integral, cauchy.volume_integral, cauchy.volume_integral_direct):
        with pytest.raises(cauchy.SingularPairError):
            integral(f, geo, x, COARSE)
    small = sl.example_family(*rng.standard_normal((3, 8)), domain=sl.PlaneDomain.disc(0.5))
    with pytest.raises(cauchy.SingularPairError):
        cauchy.borel_pompeiu(small, geo, x, COARSE)
