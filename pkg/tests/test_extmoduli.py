import numpy as np
import pytest

from repvar import extmoduli as em
from repvar import liegroup as lg
from repvar.presentation import CentralTwist

SL2 = lg.GroupSpec.from_label("sl2")
GL2 = lg.GroupSpec.from_label("gl2")


def near_fiber(spec, genus, degree, seed, spread=0.1):
    twist = CentralTwist(spec, degree)
    p = em.sample_fiber_point(spec, genus, twist, seed)
    rng = np.random.default_rng(seed)
    return em.RepPoint(spec, np.array([a @ lg.random_group(spec, rng, spread) for a in p.mats])), twist


def test_rep_point_validation():
    with pytest.raises(ValueError):
        em.RepPoint(SL2, np.zeros((3, 2, 2)))
    p = em.identity_point(SL2, 2)
    assert p.genus == 2
    assert not p.mats.flags.writeable


@pytest.mark.parametrize("spec,genus,degree", [(SL2, 1, 0), (SL2, 2, 0), (GL2, 1, 1), (GL2, 2, 1)])
def test_sampler_lands_on_fiber(spec, genus, degree):
    twist = CentralTwist(spec, degree)
    p = em.sample_fiber_point(spec, genus, twist, 3)
    assert em.fiber_residual(p, twist) < 1e-10
    p.check()


def test_sampler_is_deterministic():
    twist = CentralTwist(SL2, 0)
    a = em.sample_fiber_point(SL2, 2, twist, 11)
    b = em.sample_fiber_point(SL2, 2, twist, 11)
    assert np.array_equal(a.mats, b.mats)


def test_structured_twisted_seed_anticommutes():
    twist = CentralTwist(GL2, 1)
    p = em.sample_fiber_point(GL2, 1, twist, 0, em.SamplerConfig(mode="structured"))
    a, b = p.mats
    assert np.allclose(a @ b, -b @ a, atol=1e-12)


def test_momentum_at_fiber_is_twist():
    twist = CentralTwist(GL2, 1)
    p = em.sample_fiber_point(GL2, 1, twist, 2)
    assert np.allclose(em.complex_momentum(p, twist), twist.X, atol=1e-9)


def test_primitive_vanishes_at_twist(rng):
    twist = CentralTwist(SL2, 0)
    u, v = lg.random_algebra(SL2, rng), lg.random_algebra(SL2, rng)
    assert em.primitive_b(twist.X, u, v, twist) == 0


def test_primitive_is_antisymmetric(rng):
    twist = CentralTwist(GL2, 1)
    z = twist.X + lg.random_algebra(GL2, rng, 0.4)
    u, v = lg.random_algebra(GL2, rng), lg.random_algebra(GL2, rng)
    assert np.isclose(em.primitive_b(z, u, v, twist), -em.primitive_b(z, v, u, twist), rtol=1e-12)


def test_dlog_inverts_dexp(rng):
    w = lg.random_algebra(GL2, rng, 0.8)
    a = lg.random_algebra(GL2, rng)
    assert np.allclose(em.dlog(w, lg.dexp(w, a)), a, atol=1e-12)


def test_omega_antisymmetric():
    p, twist = near_fiber(SL2, 2, 0, 4)
    rng = np.random.default_rng(0)
    u, v = em.random_tangent(p, rng), em.random_tangent(p, rng)
    assert np.isclose(em.omega(p, u, v, twist), -em.omega(p, v, u, twist), rtol=1e-12)
    mat = em.omega_matrix(p, [u, v, em.random_tangent(p, rng)], twist)
    assert np.array_equal(mat, -mat.T)


@pytest.mark.parametrize("spec,genus,degree", [(SL2, 1, 0), (SL2, 2, 0), (GL2, 1, 1)])
def test_momentum_property(spec, genus, degree):
    p, twist = near_fiber(spec, genus, degree, 5)
    rng = np.random.default_rng(1)
    xi = lg.random_algebra(spec, rng)
    v = em.random_tangent(p, rng)
    lhs = em.omega(p, em.fundamental_field(p, xi), v, twist)
    h = 1e-5

    def f(t):
        return em.momentum_pairing(em.complex_momentum(p.moved(v, t), twist), xi)

    assert abs(lhs - (f(h) - f(-h)) / (2 * h)) <= 1e-6 * max(1.0, abs(lhs))


def test_momentum_differential_matches_finite_difference():
    p, twist = near_fiber(GL2, 1, 1, 6)
    rng = np.random.default_rng(2)
    v = em.random_tangent(p, rng)
    h = 1e-5
    fd = (em.complex_momentum(p.moved(v, h), twist) - em.complex_momentum(p.moved(v, -h), twist)) / (2 * h)
    assert np.allclose(em.complex_momentum_differential(p, twist, v), fd, atol=1e-8)


def test_real_momentum_equivariance_and_kernel(rng):
    p, _ = near_fiber(SL2, 2, 0, 7)
    k = lg.random_unitary(SL2, rng)
    m = em.real_momentum(p)
    assert np.allclose(em.real_momentum(p.conjugate(k)), k @ m @ k.conj().T, atol=1e-12)
    unitary = em.RepPoint(SL2, np.array([lg.random_unitary(SL2, rng) for _ in range(4)]))
    assert em.real_momentum_norm(unitary) < 1e-12
    assert abs(em.kahler_potential(unitary)) < 1e-12


def test_real_momentum_is_anti_hermitian():
    p, _ = near_fiber(GL2, 1, 1, 8)
    m = em.real_momentum(p)
    assert np.allclose(m, -m.conj().T, atol=1e-13)


def test_potential_identity(rng):
    p = em.RepPoint(GL2, np.array([lg.random_group(GL2, rng, 0.7) for _ in range(4)]))
    xi = lg.random_compact(GL2, rng)
    lhs = em.real_pairing(xi, em.real_momentum(p))
    assert np.isclose(lhs, 0.5 * em.potential_derivative(p, xi), rtol=1e-7)


def test_right_translate_and_moved():
    p = em.identity_point(GL2, 1)
    vals = np.array([np.diag([1.0, 2.0]), np.zeros((2, 2))])
    assert np.array_equal(em.right_translate(p, vals), vals)
    q = p.moved(vals, 0.5)
    assert np.allclose(q.mats[0], np.diag(np.exp([0.5, 1.0])))
