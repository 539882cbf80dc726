import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repvar import liegroup as lg


def taylor_exp(x, terms=60):
    out = np.eye(x.shape[0], dtype=complex)
    term = out.copy()
    for k in range(1, terms):
        term = term @ x / k
        out = out + term
    return out


def test_labels_and_dimensions():
    assert lg.GroupSpec.from_label("gl2").dim == 4
    assert lg.GroupSpec.from_label("sl2").dim == 3
    assert lg.GroupSpec.from_label("sl3").dim == 8
    assert lg.GroupSpec.from_label("gl3").center_dim == 1
    assert lg.GroupSpec.from_label("sl3").center_dim == 0
    assert lg.GroupSpec.from_label("SL2").label == "sl2"
    with pytest.raises(lg.LieGroupError):
        lg.GroupSpec.from_label("so3")
    with pytest.raises(lg.LieGroupError):
        lg.GroupSpec(lg.Family.GENERAL_LINEAR, 2, scale=0.0)


def test_algebra_basis_spans(spec):
    basis = spec.algebra_basis()
    assert basis.shape == (spec.dim, spec.n, spec.n)
    assert np.linalg.matrix_rank(basis.reshape(spec.dim, -1)) == spec.dim
    for e in basis:
        spec.check_algebra(e)


def test_structure_constants_sl2():
    # [H, E] = 2E, [H, F] = -2F, [E, F] = H
    e, f, h = lg.GroupSpec.from_label("sl2").algebra_basis()
    assert np.allclose(lg.bracket(h, e), 2 * e)
    assert np.allclose(lg.bracket(h, f), -2 * f)
    assert np.allclose(lg.bracket(e, f), h)


def test_exp_matches_taylor_series(spec, rng):
    for _ in range(5):
        x = lg.random_algebra(spec, rng, 0.8)
        assert np.allclose(lg.mat_exp(x), taylor_exp(x), atol=1e-13)


def test_exp_of_zero_is_identity(spec):
    assert np.array_equal(lg.mat_exp(np.zeros((spec.n, spec.n))), np.eye(spec.n))


def test_exp_overflow_guard():
    with pytest.raises(lg.ExpOverflowError):
        lg.mat_exp(1e4 * np.eye(2))
    with pytest.raises(lg.LieGroupError):
        lg.mat_exp(np.array([[np.nan, 0], [0, 1]]))


def test_log_inverts_exp(spec, rng):
    for _ in range(5):
        x = lg.random_algebra(spec, rng, 0.5)
        assert np.allclose(lg.mat_log(lg.mat_exp(x)), x, atol=1e-11)


def test_log_near_branch_cut_raises():
    g = np.diag([-1.0, 1.0]).astype(complex)
    with pytest.raises(lg.ChartError):
        lg.principal_log(g)


def test_log_chart_around_central_twist():
    x = 1j * np.pi * np.eye(2)
    rng = np.random.default_rng(0)
    w = x + lg.random_algebra(lg.GroupSpec.from_label("sl2"), rng, 0.3)
    assert np.allclose(lg.mat_log(lg.mat_exp(w), x), w, atol=1e-12)
    with pytest.raises(lg.LieGroupError):
        lg.mat_log(np.eye(2), np.diag([1.0, 2.0]))


def test_polar_decomposition(spec, rng):
    g = lg.random_group(spec, rng, 1.0)
    k, y = lg.polar(g)
    assert np.allclose(k @ k.conj().T, np.eye(spec.n), atol=1e-12)
    assert np.allclose(y, -y.conj().T, atol=1e-12)
    assert np.allclose(k @ lg.mat_exp(1j * y), g, atol=1e-11)


def test_polar_singular_raises():
    with pytest.raises(lg.PolarError):
        lg.polar(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_polar_of_unitary_is_trivial(spec, rng):
    u = lg.random_unitary(spec, rng)
    k, y = lg.polar(u)
    assert np.allclose(k, u, atol=1e-12)
    assert np.abs(y).max() < 1e-12


def test_dexp_against_finite_differences(spec, rng):
    x = lg.random_algebra(spec, rng, 0.7)
    v = lg.random_algebra(spec, rng)
    h = 1e-5
    fd = (lg.mat_exp(x + h * v) - lg.mat_exp(x - h * v)) / (2 * h)
    assert np.allclose(lg.dexp(x, v), fd, atol=1e-8)


def test_dexp_series_matches_block_formula(spec, rng):
    x = lg.random_algebra(spec, rng, 1.5)
    v = lg.random_algebra(spec, rng)
    assert np.allclose(lg.dexp(x, v), lg.dexp_block(x, v), atol=1e-11)


def test_dexp_series_at_zero_is_identity(rng):
    v = rng.standard_normal((2, 2))
    assert np.allclose(lg.dexp_series(np.zeros((2, 2)), v), v)


def test_dexp_refuses_large_arguments():
    with pytest.raises(lg.SeriesError):
        lg.dexp(np.diag([30.0, -30.0]), np.eye(2))


def test_trace_form_symmetric_and_invariant(spec, rng):
    x, y = lg.random_algebra(spec, rng), lg.random_algebra(spec, rng)
    g = lg.random_group(spec, rng)
    assert np.isclose(lg.trace_form(x, y), lg.trace_form(y, x))
    assert np.isclose(lg.trace_form(lg.ad(g, x), lg.ad(g, y)), lg.trace_form(x, y))
    assert np.linalg.matrix_rank(lg.form_gram(spec)) == spec.dim


def test_trace_form_scale():
    x = np.diag([1.0, -1.0])
    assert lg.trace_form(x, x, 2.5) == 5.0
    cov = lg.form_adjoint(x, 2.0)
    assert cov(x) == 4.0
    assert np.array_equal(cov.carrier, x)


def test_cartan_form_alternating_and_left_invariant(rng):
    spec = lg.GroupSpec.from_label("gl2")
    g, h = lg.random_group(spec, rng), lg.random_group(spec, rng)
    u, v, w = (g @ lg.random_algebra(spec, rng) for _ in range(3))
    val = lg.cartan_three_form(g, u, v, w)
    assert np.isclose(lg.cartan_three_form(g, v, u, w), -val)
    assert np.isclose(lg.cartan_three_form(g, v, w, u), val)
    assert np.isclose(lg.cartan_three_form(h @ g, h @ u, h @ v, h @ w), val)


def test_special_samples_have_unit_determinant(rng):
    spec = lg.GroupSpec.from_label("sl3")
    g = lg.random_group(spec, rng, 1.5)
    assert abs(np.linalg.det(g) - 1) < 1e-12
    spec.check_group(g)
    assert abs(np.trace(lg.random_algebra(spec, rng))) < 1e-14
    spec.check_compact(lg.random_compact(spec, rng))


def test_random_elements_deterministic(spec):
    a = lg.random_elements(spec, 7, 0.5, count=3)
    b = lg.random_elements(spec, 7, 0.5, count=3)
    assert np.array_equal(a, b)
    assert a.shape == (3, spec.n, spec.n)
    with pytest.raises(lg.LieGroupError):
        lg.random_elements(spec, 0, -1.0)


def test_equivariant_one_form_at_identity():
    x = np.diag([1j, -1j])
    v = np.array([[2.0, 1.0], [0.0, 3.0]])
    assert np.isclose(lg.equivariant_one_form(x, np.eye(2), v), lg.trace_form(x, v))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-0.6, 0.6), min_size=8, max_size=8),
)
def test_exp_log_roundtrip_property(entries):
    x = (np.array(entries[:4]) + 1j * np.array(entries[4:])).reshape(2, 2)
    g = lg.mat_exp(x)
    assert np.allclose(lg.mat_exp(lg.mat_log(g)), g, atol=1e-12)
    # spectral radius of x below pi keeps log on the principal branch
    if np.abs(np.linalg.eigvals(x).imag).max() < math.pi - 1e-3:
        assert np.allclose(lg.mat_log(g), x, atol=1e-10)
