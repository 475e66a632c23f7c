import json

import numpy as np
import pytest

from octoslice import extremum as ext
from octoslice import octonion as oc
from octoslice import slices as sl


@pytest.fixture
def rng():
    return np.random.default_rng(17)


def test_camshaft_values_are_the_predicted_reals(rng):
    for _ in range(5):
        f = sl.induce(sl.random_poly_stem(rng, 3))
        p = rng.standard_normal((20, 8))
        g1, g2 = ext.camshaft_values(f, p)
        t1, t2 = ext.camshaft_targets(f, p)
        assert np.max(oc.norm(g1 - oc.real(t1)) / (1 + t1)) < 1e-12
        assert np.max(oc.norm(g2 - oc.real(t2)) / (1 + t2)) < 1e-12


def test_annihilator_pair_through_slice_products(rng):
    f = sl.induce(sl.random_poly_stem(rng, 3))
    for p in rng.standard_normal((10, 8)):
        pair = ext.annihilator_pair(f, p)
        assert pair.source == "delta"
        # evaluate ((f.a).b) as a genuine slice function, independent of the stemwise shortcut
        assert pair.residual(f) < 1e-10 * (1 + pair.target)
        assert pair.norm_residual() < 1e-10 * (1 + pair.target)
        json.dumps(pair.to_dict())


def test_camshaft_effect_is_real(rng):
    # pointwise right multiplication does not commute with slice multiplication
    f = sl.induce(sl.random_poly_stem(rng, 2))
    c = rng.standard_normal(8)
    p = rng.standard_normal(8)
    assert oc.norm(ext.right_product(f, c)(p) - oc.mul(f(p), c)) > 1e-3


def test_annihilator_by_hand():
    f = sl.identity()
    p = oc.ONE + oc.L
    pair = ext.annihilator_pair(f, p)
    # f'_s = 1: a = 1, b = conj(1 + l)
    assert pair.source == "delta"
    assert np.allclose(pair.a, oc.ONE) and np.allclose(pair.b, oc.ONE - oc.L)
    assert pair.target == pytest.approx(2.0)
    # real point: gamma branch with gamma = q = 2, a = 2, b = -(2 (2 i)) i = 4
    pair = ext.annihilator_pair(f, oc.real(2.0))
    assert pair.source == "gamma"
    assert np.allclose(pair.a, 2 * oc.ONE) and np.allclose(pair.b, 4 * oc.ONE)
    assert pair.target == pytest.approx(16.0)
    assert pair.residual(f) < 1e-12


def test_annihilator_errors():
    with pytest.raises(ext.ZeroValueError):
        ext.annihilator_pair(sl.identity(), np.zeros(8))
    with pytest.raises(ValueError):
        ext.annihilator_pair(sl.identity(), np.zeros((2, 8)))


def test_constant_function_uses_gamma_branch(rng):
    c = rng.standard_normal(8)
    p = rng.standard_normal(8)
    pair = ext.annihilator_pair(sl.constant(c), p)
    assert pair.source == "gamma"
    assert pair.residual(sl.constant(c)) < 1e-12


def test_reparametrization(rng):
    f = sl.induce(sl.random_poly_stem(rng, 3))
    c = rng.standard_normal(8)
    x = rng.standard_normal((30, 8))
    y = ext.reparam_phi(f, c, x)
    lhs = ext.right_product(f, c)(x)
    assert np.max(oc.norm(lhs - oc.mul(f(y), c)) / (1 + oc.norm(lhs))) < 1e-12
    assert np.max(ext.sphere_residual(x, y) / (1 + oc.norm(x) ** 2)) < 1e-12
    assert np.max(oc.norm(ext.reparam_phi_inverse(f, c, y) - x)) < 1e-12
    assert np.max(ext.witness_residual(f, c, x)) < 1e-10


def test_reparametrization_errors(rng):
    f = sl.identity()
    c = rng.standard_normal(8)
    with pytest.raises(sl.SingularPointError):
        ext.reparam_phi(f, c, oc.real(1.0))
    with pytest.raises(oc.ZeroDivision):
        ext.reparam_phi(f, np.zeros(8), oc.ONE + oc.I)
    with pytest.raises(oc.ZeroDivision):
        ext.reparam_phi(sl.constant(c), c, oc.ONE + oc.I)
    # the witness falls back to x where Phi is undefined
    x = np.stack([oc.real(1.0), oc.ONE + oc.I])
    assert np.allclose(ext.sphere_witness(sl.constant(c), c, x), x)


def test_trace_vanishes_on_associators(rng):
    x, y, z = rng.standard_normal((3, 50, 8))
    assert np.max(ext.trace_associator_residual(x, y, z)) < 1e-12


def test_quasi_uniform_units():
    u = ext.quasi_uniform_units()
    assert u.shape == (32, 8)
    assert np.allclose(u[:, 0], 0) and np.allclose(oc.norm(u), 1)
    assert np.array_equal(u, ext.quasi_uniform_units())
    # well spread: the mean direction is short
    assert oc.norm(u.mean(axis=0)) < 0.5


def test_plane_samples_include_boundary():
    A, B, h = ext.plane_samples(sl.PlaneDomain.disc(1.0), 9)
    assert np.isclose(np.max(np.hypot(A, B)), 1.0) and np.all(B >= 0)
    A, B, h = ext.plane_samples(sl.PlaneDomain.annulus(0.5, 1.5, 0.2), 9)
    r = np.hypot(A - 0.2, B)
    assert np.isclose(r.min(), 0.5) and np.isclose(r.max(), 1.5)
    A, B, h = ext.plane_samples(sl.PlaneDomain.rectangle(-1.0, 0.5, 0.8), 9)
    assert A.min() == -1.0 and A.max() == 0.5 and B.max() == 0.8
    with pytest.raises(ValueError):
        ext.plane_samples(sl.PlaneDomain.disc(), 9)


def test_max_modulus_probe(rng):
    geoms = [sl.PlaneDomain.disc(1.0), sl.PlaneDomain.annulus(0.5, 1.5, 0.2),
             sl.PlaneDomain.rectangle(-1.0, 0.5, 0.8)]
    f = sl.example_family(*rng.standard_normal((3, 8)))
    for g in geoms:
        rep = ext.max_modulus_probe(f, g)
        assert rep.boundary_flag and rep.constancy_estimate > 0
        assert rep.n_points == len(ext.plane_samples(g)[0]) * 32
        assert json.loads(rep.to_json())["boundary_flag"] is True
    rep = ext.max_modulus_probe(sl.constant(rng.standard_normal(8)), geoms[0])
    assert rep.constancy_estimate < 1e-12
