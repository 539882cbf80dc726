"""Numerical verification suite for the structural identities.

Each ``check_*`` function samples its own configurations from a seed and
returns a :class:`CheckResult`.  ``run_suite`` runs all of them; the CLI
``verify`` command and the acceptance tests are thin wrappers around it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import cohomology as co
from . import extmoduli as em
from . import liegroup as lg
from . import localmodel as lm
from . import reduction as rd
from .presentation import CentralTwist, standard_two_chain, verify_two_chain

# constants determined once from samples and then frozen
POTENTIAL_CONSTANT = 1.0
PAIRING_CONSTANT = 1.0

SL2 = lg.GroupSpec(lg.Family.SPECIAL_LINEAR, 2)
GL2 = lg.GroupSpec(lg.Family.GENERAL_LINEAR, 2)
MOMENTUM_CONFIGS = ((SL2, 1, 0), (SL2, 2, 0), (GL2, 1, 1))


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] {self.name}: {self.value:.3e} (tolerance {self.tolerance:.1e})"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


def _near_fiber_point(spec, genus, twist, seed, rng, spread=0.1):
    p = em.sample_fiber_point(spec, genus, twist, seed)
    return em.RepPoint(spec, np.array([a @ lg.random_group(spec, rng, spread) for a in p.mats]))


def _irreducible_points(count: int, seed: int, genus: int = 2) -> list:
    twist = CentralTwist(SL2, 0)
    return [em.sample_fiber_point(SL2, genus, twist, seed + k) for k in range(count)]


def _cycled(configs, count):
    return [configs[k % len(configs)] for k in range(count)]


def check_momentum(samples: int = 100, seed: int = 0, h: float = 1e-5) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k, (spec, genus, degree) in enumerate(_cycled(MOMENTUM_CONFIGS, samples)):
        twist = CentralTwist(spec, degree)
        p = _near_fiber_point(spec, genus, twist, seed + k, rng)
        xi = lg.random_algebra(spec, rng)
        v = em.random_tangent(p, rng)
        lhs = em.omega(p, em.fundamental_field(p, xi), v, twist)

        def f(t):
            return em.momentum_pairing(em.complex_momentum(p.moved(v, t), twist), xi, spec.scale)

        rhs = (f(h) - f(-h)) / (2 * h)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return CheckResult("holomorphic momentum property", worst <= 1e-6, worst, 1e-6, {"samples": samples})


def _chart_exterior_derivative(p, twist, dirs, h=1e-4):
    """``d omega(e0, e1, e2)`` in exponential chart coordinates ``A_j exp(sum t_a z_a)``."""
    mats = p.mats

    def form(t, a, b):
        z = sum(ti * d for ti, d in zip(t, dirs))
        q = em.RepPoint(p.spec, np.array([m @ lg.mat_exp(zz) for m, zz in zip(mats, z)]))
        ta = np.array([m @ lg.dexp(zz, za) for m, zz, za in zip(mats, z, dirs[a])])
        tb = np.array([m @ lg.dexp(zz, zb) for m, zz, zb in zip(mats, z, dirs[b])])
        return em.omega(q, ta, tb, twist)

    def deriv(i, a, b):
        e = np.zeros(3)
        e[i] = h
        return (form(e, a, b) - form(-e, a, b)) / (2 * h)

    terms = [deriv(0, 1, 2), -deriv(1, 0, 2), deriv(2, 0, 1)]
    return abs(sum(terms)), max(abs(t) for t in terms)


def _primitive_defect(spec, twist, rng, h=1e-5):
    z = twist.X + lg.random_algebra(spec, rng, 0.5)
    a, b, c = (lg.random_algebra(spec, rng) for _ in range(3))

    def deriv(d, u, v):
        return (em.primitive_b(z + h * d, u, v, twist) - em.primitive_b(z - h * d, u, v, twist)) / (2 * h)

    db = deriv(a, b, c) - deriv(b, a, c) + deriv(c, a, b)
    ref = em.exp_pullback_cartan(z, a, b, c, spec.scale)
    return abs(db - ref) / max(1.0, abs(ref))


def check_closedness(samples: int = 50, seed: int = 1, primitive_samples: int = 20) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k, (spec, genus, degree) in enumerate(_cycled(MOMENTUM_CONFIGS, samples)):
        twist = CentralTwist(spec, degree)
        p = _near_fiber_point(spec, genus, twist, seed + k, rng)
        dirs = [np.array([lg.random_algebra(spec, rng) for _ in p.mats]) for _ in range(3)]
        val, size = _chart_exterior_derivative(p, twist, dirs)
        worst = max(worst, val / max(1.0, size))
    prim = 0.0
    for spec, _, degree in _cycled(MOMENTUM_CONFIGS, primitive_samples):
        prim = max(prim, _primitive_defect(spec, CentralTwist(spec, degree), rng))
    passed = worst <= 1e-5 and prim <= 1e-6
    return CheckResult(
        "closedness of the 2-form", passed, worst, 1e-5, {"primitive_defect": prim, "primitive_tolerance": 1e-6}
    )


def check_equivariance(samples: int = 100, seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_c = worst_r = 0.0
    for k, (spec, genus, degree) in enumerate(_cycled(MOMENTUM_CONFIGS, samples)):
        twist = CentralTwist(spec, degree)
        p = _near_fiber_point(spec, genus, twist, seed + k, rng)
        g = lg.random_group(spec, rng, 0.5)
        mu = em.complex_momentum(p, twist)
        moved = em.complex_momentum(p.conjugate(g), twist)
        worst_c = max(worst_c, np.abs(moved - g @ mu @ np.linalg.inv(g)).max() / max(1.0, np.abs(mu).max()))
        u = lg.random_unitary(spec, rng)
        m = em.real_momentum(p)
        m_moved = em.real_momentum(p.conjugate(u))
        worst_r = max(worst_r, np.abs(m_moved - u @ m @ u.conj().T).max() / max(1.0, np.abs(m).max()))
    worst = max(worst_c, worst_r)
    return CheckResult(
        "momentum equivariance", worst <= 1e-10, worst, 1e-10, {"complex": worst_c, "real": worst_r}
    )


def check_chains(max_genus: int = 4) -> CheckResult:
    ok = {g: verify_two_chain(standard_two_chain(g), co.build_presentation(g)) for g in range(1, max_genus + 1)}
    return CheckResult("fundamental 2-chain", all(ok.values()), float(sum(not v for v in ok.values())), 0.0, ok)


def check_cohomology_dims(seed: int = 3) -> CheckResult:
    cases = {}
    twist = CentralTwist(SL2, 0)
    irr = em.sample_fiber_point(SL2, 2, twist, seed)
    cases["irreducible sl2 genus 2"] = (co.cohomology_bases(irr, twist).summary, (0, 6))
    triv = em.identity_point(SL2, 2)
    cases["trivial sl2 genus 2"] = (co.cohomology_bases(triv, twist).summary, (3, 12))
    tw1 = CentralTwist(GL2, 1)
    anti = em.sample_fiber_point(GL2, 1, tw1, seed, em.SamplerConfig(mode="structured"))
    cases["anticommuting gl2 genus 1 twist 1"] = (co.cohomology_bases(anti, tw1).summary, (1, 2))
    detail, failures = {}, 0
    for name, (summary, expected) in cases.items():
        got = (summary.dimH0, summary.dimH1)
        good = got == expected and summary.euler_check() and not summary.flagged
        failures += not good
        detail[name] = {"dimH0": got[0], "dimH1": got[1], "expected": list(expected), "euler": summary.euler_check()}
    return CheckResult("cohomology dimension formula", failures == 0, float(failures), 0.0, detail)


def check_slice_pairing(points: int = 50, seed: int = 4) -> CheckResult:
    rng = np.random.default_rng(seed)
    twist = CentralTwist(SL2, 0)
    antisym = 0.0
    cob = 0.0
    min_sv = np.inf
    ratios = []
    for p in _irreducible_points(points, 1000 + seed):
        bases = co.cohomology_bases(p, twist)
        pm = co.pairing_matrix(bases)
        antisym = max(antisym, float(np.abs(pm.gram + pm.gram.T).max()))
        min_sv = min(min_sv, pm.min_singular_value)
        xi = lg.random_algebra(SL2, rng)
        b = co.Cocycle(p, np.array([xi - a @ xi @ np.linalg.inv(a) for a in p.mats]))
        cob = max(cob, max(abs(co.slice_pairing(b, w)) for w in pm.basis) / SL2.scale)
        u, v = pm.basis[0], pm.basis[1]
        ratios.append(em.omega(p, u.tangent(), v.tangent(), twist) / co.slice_pairing(u, v))
    ratios = np.array(ratios)
    kappa = np.median(ratios.real) + 1j * np.median(ratios.imag)
    spread = float(np.abs(ratios - kappa).max() / abs(kappa))
    frozen = float(np.abs(ratios - PAIRING_CONSTANT).max() / abs(PAIRING_CONSTANT))
    passed = antisym == 0.0 and cob <= 1e-8 and min_sv > 1e-6 and spread <= 1e-6 and frozen <= 1e-6
    detail = {
        "antisymmetry": antisym,
        "coboundary_degeneracy": cob,
        "min_singular_value": min_sv,
        "kappa": kappa,
        "kappa_spread": spread,
        "frozen_kappa_error": frozen,
    }
    return CheckResult("slice pairing", passed, max(spread, frozen), 1e-6, detail)


def check_quadratic_momentum(samples: int = 20, seed: int = 5) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    cfg = em.SamplerConfig(mode="structured")
    for k in range(samples):
        spec = (SL2, GL2)[k % 2]
        genus = 1 + k % 3 if spec is SL2 else 2
        twist = CentralTwist(spec, 0)
        p = em.sample_fiber_point(spec, genus, twist, seed + k, cfg)
        stab = co.stabilizer_algebra(p)
        bases = co.cohomology_bases(p, twist)
        u = co.Cocycle.from_coords(p, rng.standard_normal(len(bases.z1)) @ bases.z1)
        xi = np.tensordot(rng.standard_normal(stab.dim), stab.basis, axes=1)
        lhs = co.quadratic_momentum(u, xi)
        rhs = 0.5 * co.slice_pairing(u.act(xi), u)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return CheckResult("quadratic momentum", worst <= 1e-8, worst, 1e-8, {"samples": samples})


def unipotent_pair(a: float = 0.7, b: float = -0.4) -> em.RepPoint:
    return em.RepPoint(SL2, np.array([[[1, a], [0, 1]], [[1, b], [0, 1]]]))


def check_flow(samples: int = 10, seed: int = 6) -> CheckResult:
    rng = np.random.default_rng(seed)
    detail = {}
    tw0, tw1 = CentralTwist(SL2, 0), CentralTwist(GL2, 1)
    monotone, fib, inv = True, 0.0, 0.0
    for k in range(samples):
        p = em.sample_fiber_point(SL2, 2, tw0, seed + k).conjugate(lg.random_group(SL2, rng, 0.8))
        rep = rd.flow_to_kempf_ness(p, twist=tw0)
        norms = [h[1] for h in rep.history]
        monotone &= all(b <= a for a, b in zip(norms, norms[1:])) and rep.converged
        fib, inv = max(fib, rep.fiber_drift), max(inv, rep.invariant_drift)
    twisted = 0.0
    all_converged = True
    for k in range(samples):
        p = em.sample_fiber_point(GL2, 1, tw1, seed + k).conjugate(lg.random_group(GL2, rng, 0.8))
        rep = rd.flow_to_kempf_ness(p, twist=tw1)
        all_converged &= rep.converged
        fib, inv = max(fib, rep.fiber_drift), max(inv, rep.invariant_drift)
        twisted = max(twisted, np.abs(rd.trace_invariants(rep.final_point, [(1,), (2,), (1, 2)])).max())
    uni = rd.flow_to_kempf_ness(unipotent_pair(), rd.FlowConfig(grad_tol=1e-13, max_iter=20000))
    target = np.array([np.eye(2)] * 2)
    uni_err = float(np.abs(uni.final_point.mats - target).max())
    eig_err = float(max(np.abs(np.linalg.eigvals(m) - 1).max() for m in uni.final_point.mats))
    detail = {
        "monotone": monotone,
        "fiber_drift": fib,
        "invariant_drift": inv,
        "twisted_converged": all_converged,
        "twisted_invariants": twisted,
        "unipotent_converged": uni.converged,
        "unipotent_distance": uni_err,
        "unipotent_eigenvalues": eig_err,
    }
    passed = (
        monotone
        and fib <= 1e-12
        and inv <= 1e-9
        and all_converged
        and twisted <= 1e-6
        and uni.converged
        and uni_err <= 1e-6
        and eig_err <= 1e-6
    )
    return CheckResult("Kempf-Ness flow", passed, max(twisted, uni_err, eig_err), 1e-6, detail)


def check_kempf_ness_uniqueness(pairs: int = 50, align_pairs: int = 10, seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    twist = CentralTwist(SL2, 0)
    cfg = rd.FlowConfig(grad_tol=1e-10)
    align = 0.0
    for k in range(align_pairs):
        p = em.sample_fiber_point(SL2, 2, twist, 2000 + seed + k)
        p0 = rd.flow_to_kempf_ness(p, cfg).final_point
        q0 = rd.flow_to_kempf_ness(p.conjugate(lg.random_group(SL2, rng, 0.8)), cfg).final_point
        _, res = rd.unitary_alignment(p0, q0)
        align = max(align, res)
    same = diff = 0
    for k in range(pairs):
        p = em.sample_fiber_point(SL2, 2, twist, 3000 + seed + k)
        q = p.conjugate(lg.random_group(SL2, rng, 0.8))
        same += rd.same_reduced_point(p, q, cfg) is True
        r = em.sample_fiber_point(SL2, 2, twist, 4000 + seed + k)
        diff += rd.same_reduced_point(p, r, cfg) is False
    passed = align <= 1e-5 and same == pairs and diff == pairs
    detail = {"alignment_residual": align, "conjugate_true": same, "independent_false": diff, "pairs": pairs}
    return CheckResult("Kempf-Ness uniqueness", passed, align, 1e-5, detail)


def check_potential(samples: int = 200, seed: int = 8) -> CheckResult:
    rng = np.random.default_rng(seed)

    def sample(k):
        spec, genus, _ = MOMENTUM_CONFIGS[k % len(MOMENTUM_CONFIGS)]
        p = em.RepPoint(spec, np.array([lg.random_group(spec, rng, 0.7) for _ in range(2 * genus)]))
        xi = lg.random_compact(spec, rng)
        lhs = em.real_pairing(xi, em.real_momentum(p), spec.scale)
        return lhs, 0.5 * em.potential_derivative(p, xi)

    fit = [sample(k) for k in range(samples)]
    ratios = np.array([lhs / rhs for lhs, rhs in fit])
    a = float(np.median(ratios))
    spread = float(np.abs(ratios - a).max() / abs(a))
    recheck = 0.0
    for k in range(samples):
        lhs, rhs = sample(k)
        recheck = max(recheck, abs(lhs - POTENTIAL_CONSTANT * rhs) / max(1.0, abs(lhs)))
    passed = spread <= 1e-6 and recheck <= 1e-6
    return CheckResult(
        "Kaehler potential identity", passed, max(spread, recheck), 1e-6, {"fitted": a, "spread": spread, "frozen_error": recheck}
    )


def a1_section(coords: dict) -> np.ndarray:
    """Zero-fiber point with the given A1 invariants (inverse of the quotient map up to phase)."""
    x = np.array([[coords["x11"], coords["x12"]], [coords["x21"], coords["x22"]]])
    size = np.linalg.norm(x)
    if size == 0:
        return np.zeros(4, dtype=complex)
    aa = x @ x.conj().T / size
    j = int(np.argmax(aa.diagonal().real))
    a = aa[:, j] / np.sqrt(aa[j, j].real)
    b = x.T @ a.conj() / np.vdot(a, a).real
    return np.concatenate([a, b])


def check_a1_model(pairs: int = 500, seed: int = 9) -> CheckResult:
    rng = np.random.default_rng(seed)
    rep = lm.a1_rep()
    invs = lm.a1_invariants()
    names = sorted(invs)
    relations = 0.0
    mismatches = 0
    roundtrip = 0.0
    tags = set()
    for k in range(pairs):
        v = lm.a1_zero_point(rng)
        w = rep.act([np.exp(1j * rng.uniform(0, 2 * np.pi))], v) if k % 2 else lm.a1_zero_point(rng)
        cv, cw = lm.classify_quotient_point(rep, v), lm.classify_quotient_point(rep, w)
        tags |= {cv.tag, cw.tag}
        relations = max(relations, *(abs(r) for r in lm.a1_relations(cv.invariants)))
        inv_dist = max(abs(cv.invariants[n] - cw.invariants[n]) for n in names)
        orbit_dist = lm.torus_orbit_distance(rep, v, w)
        mismatches += (inv_dist <= 1e-8) != (orbit_dist <= 1e-8)
        roundtrip = max(roundtrip, lm.torus_orbit_distance(rep, v, a1_section(cv.invariants)))
    tags.add(lm.classify_quotient_point(rep, np.zeros(4)).tag)

    points = [lm.a1_zero_point(rng) for _ in range(30)]
    closure = 0.0
    for i, f in enumerate(names):
        for h in names[i + 1 :]:
            closure = max(closure, lm.bracket_closure(rep, invs[f], invs[h], invs, points)[1])

    phi = lm.momentum_polynomials(rep)[0]
    extension = 0.0
    for _ in range(20):
        coeffs = rng.standard_normal(5)
        lam = lm.poly_add(lm.monomial([0, 0, 0, 0], coeffs[0]), *[invs[n] for n in names], coeffs=[1.0, *coeffs[1:]])
        f, h = invs[names[rng.integers(4)]], invs[names[rng.integers(4)]]
        f2 = lm.poly_add(f, lm.poly_mul(lam, phi))
        for v in points[:5]:
            extension = max(extension, abs(lm.invariant_bracket(rep, f2, h, v) - lm.invariant_bracket(rep, f, h, v)))
    passed = (
        relations <= 1e-10 and mismatches == 0 and roundtrip <= 1e-8 and closure <= 1e-8 and extension <= 1e-9 and len(tags) == 2
    )
    detail = {
        "relations": relations,
        "injectivity_mismatches": mismatches,
        "section_roundtrip": roundtrip,
        "bracket_closure_residual": closure,
        "extension_defect": extension,
        "strata": sorted(t.value for t in tags),
    }
    return CheckResult("A1 local model", passed, max(relations, closure, extension), 1e-8, detail)


def check_hyperkahler(samples: int = 50, seed: int = 10) -> CheckResult:
    rng = np.random.default_rng(seed)
    detail = {}
    ok = True
    worst_type = worst_zero = 0.0
    for weights in ((1,), (1, 1), (1, 2, -1)):
        rep = lm.QuaternionicRep(weights)
        ok &= rep.quaternion_relations()
        ok &= bool(np.all(lm.hyperkahler_momenta(rep, np.zeros(4 * rep.n)) == 0))
        for _ in range(samples):
            u, w = rng.standard_normal(4 * rep.n), rng.standard_normal(4 * rep.n)
            worst_type = max(worst_type, lm.holomorphic_form_defect(rep, u, w) / (np.linalg.norm(u) * np.linalg.norm(w)))
        if rep.n > 1:
            for _ in range(samples // 5):
                z = lm.hyperkahler_zero_point(rep, rng)
                moved = rep.act(rng.uniform(0, 2 * np.pi), z)
                worst_zero = max(worst_zero, np.abs(lm.hyperkahler_momenta(rep, moved)).max() / max(1.0, z @ z))
    detail = {"quaternion_relations": bool(ok), "type_defect": worst_type, "zero_set_defect": worst_zero}
    passed = ok and worst_type <= 1e-12 and worst_zero <= 1e-10
    return CheckResult("hyperkaehler linear identities", passed, max(worst_type, worst_zero), 1e-10, detail)


def random_trace_function(rng, num_generators: int, terms: int = 2, max_len: int = 3) -> list:
    out = []
    for _ in range(terms):
        length = int(rng.integers(1, max_len + 1))
        letters = rng.integers(1, num_generators + 1, size=length) * rng.choice([-1, 1], size=length)
        out.append((complex(rng.standard_normal()), tuple(int(x) for x in letters)))
    return out


def check_reduced_bracket(triples: int = 30, seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    twist = CentralTwist(SL2, 0)
    antisym = jac = conj = 0.0
    points = _irreducible_points(max(1, triples // 5), 5000 + seed)
    for k in range(triples):
        p = points[k % len(points)]
        f, g, h = (random_trace_function(rng, 4) for _ in range(3))
        data = co.slice_data(p, twist)
        fg = co.reduced_bracket(f, g, p, twist, data=data)
        gf = co.reduced_bracket(g, f, p, twist, data=data)
        antisym = max(antisym, abs(fg + gf))
        jac = max(jac, abs(co.jacobiator(f, g, h, p, twist)))
        q = p.conjugate(lg.random_group(SL2, rng, 0.5))
        conj = max(conj, abs(co.reduced_bracket(f, g, q, twist) - fg) / max(1.0, abs(fg)))
    passed = antisym == 0.0 and jac <= 1e-6 and conj <= 1e-8
    detail = {"antisymmetry": antisym, "jacobi": jac, "conjugation": conj}
    return CheckResult("reduced Poisson bracket", passed, jac, 1e-6, detail)


SUITE = {
    "momentum": check_momentum,
    "closedness": check_closedness,
    "equivariance": check_equivariance,
    "chains": check_chains,
    "cohomology": check_cohomology_dims,
    "pairing": check_slice_pairing,
    "quadratic_momentum": check_quadratic_momentum,
    "flow": check_flow,
    "kempf_ness": check_kempf_ness_uniqueness,
    "potential": check_potential,
    "a1_model": check_a1_model,
    "hyperkahler": check_hyperkahler,
    "bracket": check_reduced_bracket,
}


def run_check(name: str, **kwargs) -> CheckResult:
    start = time.perf_counter()
    result = SUITE[name](**kwargs)
    result.seconds = time.perf_counter() - start
    return result


def run_suite(names=None) -> list:
    return [run_check(name) for name in (names or SUITE)]
