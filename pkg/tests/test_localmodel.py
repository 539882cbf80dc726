import json

import numpy as np
import pytest

from repvar import liegroup as lg
from repvar import localmodel as lm


@pytest.fixture
def a1():
    return lm.a1_rep()


def test_rep_validation():
    with pytest.raises(lm.LocalModelError):
        lm.LinearSympRep([[1, 1]], ((0, 1),))
    with pytest.raises(lm.LocalModelError):
        lm.LinearSympRep([[1, -1, 0]], ((0, 1),))


def test_omega_nondegenerate(a1):
    om = a1.omega_matrix()
    assert np.array_equal(om, -om.T)
    assert np.linalg.matrix_rank(om) == a1.dim


def test_linear_momentum_expansion(a1, rng):
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    a, b = v[:2], v[2:]
    assert np.isclose(lm.linear_momentum(a1, v)[0], a @ b)
    assert np.all(lm.linear_momentum(a1, np.zeros(4)) == 0)
    assert np.allclose(lm.linear_momentum(a1, 1.7j * v), (1.7j) ** 2 * lm.linear_momentum(a1, v))
    assert np.isclose(lm.poly_eval(lm.momentum_polynomials(a1)[0], v), a @ b)


def test_momentum_property(a1, rng):
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    lhs = a1.omega(a1.generator(0) @ v, u)
    assert abs(lhs - lm.momentum_differential(a1, v, u)[0]) < 1e-12
    h = 1e-6
    fd = (lm.linear_momentum(a1, v + h * u) - lm.linear_momentum(a1, v - h * u)) / (2 * h)
    assert abs(fd[0] - lhs) < 1e-8


def test_real_linear_momentum(a1, rng):
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    expected = 0.5 * (abs(v[0]) ** 2 + abs(v[1]) ** 2 - abs(v[2]) ** 2 - abs(v[3]) ** 2)
    assert np.isclose(lm.real_linear_momentum(a1, v)[0], expected)
    moved = a1.act([np.exp(0.9j)], v)
    assert abs(lm.real_linear_momentum(a1, moved)[0] - expected) < 1e-12
    assert abs(lm.linear_momentum(a1, moved)[0] - lm.linear_momentum(a1, v)[0]) < 1e-12


def test_quaternionic_structures():
    rep = lm.QuaternionicRep((1, 2, -1))
    assert rep.quaternion_relations()
    assert rep.I.dtype.kind == "i"
    x = rep.generator()
    for s in (rep.I, rep.J, rep.K):
        assert np.array_equal(s @ x, x @ s)


def test_hyperkahler_momenta(rng):
    rep = lm.QuaternionicRep((1, 1))
    assert np.all(lm.hyperkahler_momenta(rep, np.zeros(8)) == 0)
    v = rng.standard_normal(8)
    assert np.allclose(lm.hyperkahler_momenta(rep, 3 * v), 9 * lm.hyperkahler_momenta(rep, v))
    u, w = rng.standard_normal(8), rng.standard_normal(8)
    assert lm.holomorphic_form_defect(rep, u, w) < 1e-12
    z = lm.hyperkahler_zero_point(rep, rng)
    assert np.abs(lm.hyperkahler_momenta(rep, rep.act(1.1, z))).max() < 1e-10


def test_hyperkahler_matches_complex_model(rng):
    # (z, w) coordinates of H^2 with the circle acting by weights (1, -1) give the A1 model
    rep = lm.QuaternionicRep((1, 1))
    z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    v = lm.complex_to_quaternion(z, w)
    z2, w2 = lm.quaternion_to_complex(v)
    assert np.allclose(z2, z) and np.allclose(w2, w)
    moved = lm.quaternion_to_complex(rep.act(0.3, v))
    assert np.allclose(moved[0], np.exp(0.3j) * z) and np.allclose(moved[1], np.exp(-0.3j) * w)


def test_model_momentum_diagram_edges(rng):
    bundle = lm.a1_bundle()
    xi = bundle.random_annihilator(rng)
    e = np.eye(2)
    assert bundle.annihilator_residual(xi) < 1e-12
    assert np.allclose(lm.model_momentum(bundle, bundle.point(e, xi, np.zeros(4))), xi)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    phi_hat = lm.model_momentum(bundle, bundle.point(e, np.zeros((2, 2)), v))
    assert np.isclose(lg.trace_form(phi_hat, bundle.h_basis[0]), lm.linear_momentum(bundle.rep, v)[0])
    with pytest.raises(lm.LocalModelError):
        bundle.point(e, np.diag([1.0, -1.0]), v)


def test_model_momentum_equivariance(rng):
    bundle = lm.a1_bundle()
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    p = bundle.point(lg.random_group(bundle.spec, rng), bundle.random_annihilator(rng), v)
    g = lg.random_group(bundle.spec, rng)
    kappa = lm.model_momentum(bundle, p)
    assert np.allclose(lm.model_momentum(bundle, bundle.act(g, p)), lg.ad(g, kappa), atol=1e-10)


def test_polynomial_helpers():
    p = lm.poly_add(lm.monomial([1, 0]), lm.monomial([0, 2], 3.0))
    assert lm.poly_eval(p, [2.0, 1.0]) == 5.0
    assert lm.poly_derivative(p, 1) == {(0, 1): 6.0}
    assert lm.poly_mul(lm.monomial([1, 0]), lm.monomial([0, 1])) == {(1, 1): 1.0}


def test_invariant_bracket(a1, rng):
    inv = lm.a1_invariants()
    v = lm.a1_zero_point(rng)
    assert lm.invariant_bracket(a1, inv["x12"], inv["x12"], v) == 0
    val = lm.invariant_bracket(a1, inv["x12"], inv["x21"], v)
    assert np.isclose(val, lm.poly_eval(inv["x22"], v) - lm.poly_eval(inv["x11"], v))
    moved = a1.act([np.exp(2.1j)], v)
    assert abs(lm.invariant_bracket(a1, inv["x12"], inv["x21"], moved) - val) < 1e-10
    with pytest.raises(lm.LocalModelError):
        lm.invariant_bracket(a1, lm.monomial([1, 0, 0, 0]), inv["x11"], v)
    with pytest.raises(lm.MomentumResidualError):
        lm.invariant_bracket(a1, inv["x11"], inv["x22"], np.array([1.0, 0, 1.0, 0]))


def test_bracket_closure(a1, rng):
    inv = lm.a1_invariants()
    pts = [lm.a1_zero_point(rng) for _ in range(12)]
    coeffs, res = lm.bracket_closure(a1, inv["x11"], inv["x12"], inv, pts)
    assert res < 1e-8
    assert np.allclose(coeffs, [0, -1, 0, 0], atol=1e-10)


def test_classify_quotient_point(a1, rng):
    origin = lm.classify_quotient_point(a1, np.zeros(4))
    assert origin.stabilizer_dim == 1 and origin.tag.value == "Central"
    v = lm.a1_zero_point(rng)
    q = lm.classify_quotient_point(a1, v)
    assert q.stabilizer_dim == 0
    assert max(abs(r) for r in lm.a1_relations(q.invariants)) < 1e-10
    q2 = lm.classify_quotient_point(a1, a1.act([np.exp(0.4j)], v))
    assert max(abs(q.invariants[k] - q2.invariants[k]) for k in q.invariants) < 1e-12
    with pytest.raises(lm.MomentumResidualError):
        lm.classify_quotient_point(a1, np.array([1.0, 0, 0, 0]))


def test_orbit_distance(a1, rng):
    v, w = lm.a1_zero_point(rng), lm.a1_zero_point(rng)
    assert lm.torus_orbit_distance(a1, v, a1.act([np.exp(1.3j)], v)) < 1e-12
    assert lm.torus_orbit_distance(a1, v, w) > 1e-3


def test_model_config_and_csv(tmp_path, rng):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"weights": [[1, -1]], "pairs": [[0, 1]], "invariants": {"p": [[1.0, [1, 1]]]}}))
    rep, invs = lm.load_model_config(path)
    assert rep.dim == 2 and invs["p"] == {(1, 1): 1.0}
    a1 = lm.a1_rep()
    pts = [lm.classify_quotient_point(a1, lm.a1_zero_point(rng)) for _ in range(3)]
    lm.write_classification(tmp_path / "t.csv", pts)
    rows = (tmp_path / "t.csv").read_text().splitlines()
    assert len(rows) == 4 and rows[0].startswith("x11_re")
