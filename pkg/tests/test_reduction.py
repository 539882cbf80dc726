import numpy as np
import pytest

from repvar import extmoduli as em
from repvar import liegroup as lg
from repvar import reduction as rd
from repvar.presentation import CentralTwist

SL2 = lg.GroupSpec.from_label("sl2")
GL2 = lg.GroupSpec.from_label("gl2")
TW0 = CentralTwist(SL2, 0)


def test_flow_config_validation():
    with pytest.raises(ValueError):
        rd.FlowConfig(backtrack=1.5)
    with pytest.raises(ValueError):
        rd.FlowConfig(grad_tol=0)


def test_default_words():
    assert rd.default_words(2) == [(1,), (2,), (1, 2)]
    assert len(rd.default_words(4)) == 4 + 6 + 4


def test_flow_descends_and_preserves_invariants(rng):
    p = em.sample_fiber_point(SL2, 2, TW0, 2).conjugate(lg.random_group(SL2, rng, 0.8))
    rep = rd.flow_to_kempf_ness(p, twist=TW0)
    norms = [h[1] for h in rep.history]
    assert rep.converged
    assert all(b <= a for a, b in zip(norms, norms[1:]))
    assert rep.final_norm <= rep.initial_norm
    assert rep.invariant_drift <= 1e-9
    assert rep.fiber_drift <= 1e-12
    assert np.allclose(rep.final_point.mats, p.conjugate(rep.conjugator).mats)


def test_flow_on_kempf_ness_point_is_immediate(rng):
    p = em.RepPoint(SL2, np.array([lg.random_unitary(SL2, rng) for _ in range(2)]))
    rep = rd.flow_to_kempf_ness(p)
    assert rep.iterations == 0 and rep.converged


def test_twisted_genus_one_flows_to_anticommuting_point(rng):
    tw = CentralTwist(GL2, 1)
    p = em.sample_fiber_point(GL2, 1, tw, 4).conjugate(lg.random_group(GL2, rng, 0.8))
    rep = rd.flow_to_kempf_ness(p, twist=tw)
    assert rep.converged
    assert np.abs(rd.trace_invariants(rep.final_point, [(1,), (2,), (1, 2)])).max() < 1e-6


def test_unipotent_pair_flows_to_identity():
    p = em.RepPoint(SL2, np.array([[[1, 0.5], [0, 1]], [[1, 0.2], [0, 1]]]))
    ok, floor = rd.semistability_test(p, rd.FlowConfig(grad_tol=1e-13, max_iter=20000))
    assert ok and floor <= 1e-13
    rep = rd.flow_to_kempf_ness(p, rd.FlowConfig(grad_tol=1e-13, max_iter=20000))
    assert np.abs(rep.final_point.mats - np.eye(2)).max() < 1e-6


def test_same_reduced_point(rng):
    p = em.sample_fiber_point(SL2, 2, TW0, 5)
    q = p.conjugate(lg.random_group(SL2, rng, 0.8))
    r = em.sample_fiber_point(SL2, 2, TW0, 6)
    assert rd.same_reduced_point(p, q) is True
    assert rd.same_reduced_point(p, r) is False
    assert rd.same_reduced_point(p, q, rd.FlowConfig(max_iter=1, grad_tol=1e-14)) is None


def test_unitary_alignment_recovers_conjugator(rng):
    p = rd.flow_to_kempf_ness(em.sample_fiber_point(SL2, 2, TW0, 7)).final_point
    k = lg.random_unitary(SL2, rng)
    q = p.conjugate(k)
    found, res = rd.unitary_alignment(p, q)
    assert res < 1e-8
    assert np.allclose(found @ found.conj().T, np.eye(2), atol=1e-10)
    assert np.allclose(p.conjugate(found).mats, q.mats, atol=1e-8)


def test_orbit_type_labels(rng):
    irr = rd.flow_to_kempf_ness(em.sample_fiber_point(SL2, 2, TW0, 8)).final_point
    assert rd.orbit_type_label(irr).tag is rd.StratumTag.IRREDUCIBLE
    assert rd.orbit_type_label(em.identity_point(SL2, 2)).tag is rd.StratumTag.CENTRAL
    diag = em.RepPoint(SL2, np.array([np.diag([2.0, 0.5]), np.diag([1j, -1j])]))
    diag = rd.flow_to_kempf_ness(diag).final_point
    label = rd.orbit_type_label(diag)
    assert label.tag is rd.StratumTag.REDUCIBLE_PROPER and label.stabilizer_dim == 1
    assert label.to_json()["tag"] == "ReducibleProper"
    anti = em.sample_fiber_point(GL2, 1, CentralTwist(GL2, 1), 0, em.SamplerConfig(mode="structured"))
    anti = rd.flow_to_kempf_ness(anti).final_point
    label = rd.orbit_type_label(anti)
    assert label.tag is rd.StratumTag.IRREDUCIBLE and label.stabilizer_dim == label.center_dim == 1


def test_orbit_type_label_requires_kempf_ness_point():
    p = em.RepPoint(SL2, np.array([[[1, 1], [0, 1]], [[1, 0], [0, 1]]]))
    with pytest.raises(ValueError):
        rd.orbit_type_label(p)


def test_trace_file(tmp_path, rng):
    p = em.sample_fiber_point(SL2, 1, TW0, 1).conjugate(lg.random_group(SL2, rng, 0.5))
    rep = rd.flow_to_kempf_ness(p)
    path = tmp_path / "trace.csv"
    rep.write_trace(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,norm,step"
    assert len(lines) == len(rep.history) + 1
