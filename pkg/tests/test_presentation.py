import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repvar import liegroup as lg
from repvar.presentation import (
    CentralTwist,
    SurfacePresentation,
    TwoChain,
    UnsupportedTwist,
    bar_boundary,
    build_presentation,
    chain_orientation,
    evaluate_word,
    invert_word,
    reduce_word,
    standard_two_chain,
    verify_two_chain,
    word_differential,
    word_to_str,
)

letters = st.integers(1, 4).flatmap(lambda k: st.sampled_from([k, -k]))


def test_genus_one_relator():
    pres = build_presentation(1)
    assert pres.relator == (1, 2, -1, -2)
    assert word_to_str(pres.relator) == "x1*y1*x1^-1*y1^-1"
    assert pres.num_generators == 2


def test_relator_exponent_sums_vanish():
    for g in range(1, 5):
        assert set(build_presentation(g).exponent_sums().values()) == {0}


def test_invalid_genus():
    with pytest.raises(ValueError):
        SurfacePresentation(0)


def test_word_reduction():
    assert reduce_word((1, -1, 2, 3, -3)) == (2,)
    assert reduce_word(()) == ()
    assert word_to_str(()) == "e"


@settings(max_examples=50, deadline=None)
@given(st.lists(letters, max_size=8))
def test_word_times_inverse_reduces_to_empty(w):
    assert reduce_word(tuple(w) + invert_word(tuple(w))) == ()


def test_evaluate_word_products(rng):
    spec = lg.GroupSpec.from_label("gl2")
    mats = np.array([lg.random_group(spec, rng) for _ in range(4)])
    a, b = mats[0], mats[1]
    assert np.allclose(evaluate_word((1, -2), mats), a @ np.linalg.inv(b))
    assert np.allclose(evaluate_word((), mats), np.eye(2))
    w = (1, 3, -2, 4)
    assert np.allclose(evaluate_word(w, mats) @ evaluate_word(invert_word(w), mats), np.eye(2))


def test_word_differential_finite_differences(rng):
    spec = lg.GroupSpec.from_label("sl3")
    mats = np.array([lg.random_group(spec, rng, 0.5) for _ in range(4)])
    tangent = np.array([m @ lg.random_algebra(spec, rng) for m in mats])
    w = build_presentation(2).relator + (3, -1)
    h = 1e-6
    fd = (evaluate_word(w, mats + h * tangent) - evaluate_word(w, mats - h * tangent)) / (2 * h)
    assert np.allclose(word_differential(w, mats, tangent), fd, atol=1e-7)


@pytest.mark.parametrize("genus", [1, 2, 3, 4])
def test_standard_chain_is_fundamental(genus):
    pres = build_presentation(genus)
    chain = standard_two_chain(genus)
    assert verify_two_chain(chain, pres)
    assert chain_orientation(chain, pres) == 1
    boundary = bar_boundary(chain)
    assert boundary == {pres.relator: 1, (): -2 * genus}
    assert chain_orientation(-chain, pres) == -1


def test_chain_with_deleted_term_fails():
    chain = standard_two_chain(2)
    broken = TwoChain(chain.terms[:3] + chain.terms[4:])
    assert not verify_two_chain(broken, build_presentation(2))


def test_empty_chain_fails():
    assert not verify_two_chain(TwoChain(()), build_presentation(1))


def test_chain_json_roundtrip():
    chain = standard_two_chain(3)
    assert TwoChain.from_json(chain.to_json()) == chain


def test_twist_values():
    spec = lg.GroupSpec.from_label("gl2")
    t = CentralTwist(spec, 1)
    assert np.allclose(t.target, -np.eye(2))
    assert np.allclose(lg.mat_exp(t.X), t.target)
    assert np.allclose(CentralTwist(spec, 0).target, np.eye(2))
    assert np.allclose(CentralTwist(lg.GroupSpec.from_label("gl3"), 1).target, np.exp(2j * np.pi / 3) * np.eye(3))


def test_special_linear_twist_rejected():
    with pytest.raises(UnsupportedTwist):
        CentralTwist(lg.GroupSpec.from_label("sl2"), 1)


def test_anticommuting_pair_has_minus_identity_commutator():
    # quaternion units i, j in SU(2)
    a = np.array([[1j, 0], [0, -1j]])
    b = np.array([[0, 1], [-1, 0]], dtype=complex)
    mats = np.array([a, b])
    assert np.allclose(evaluate_word(build_presentation(1).relator, mats), -np.eye(2))
