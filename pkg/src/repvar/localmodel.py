"""Linear local models: torus representations, their momenta, invariants and brackets.

Polynomials are dictionaries ``{exponent tuple: coefficient}`` in the
coordinates of ``V = C^m``.  The symplectic form pairs coordinates ``(i, j)``
with ``omega(e_i, e_j) = 1``, and the associated Poisson bracket has
``{v_i, v_j} = 1`` on each such pair.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import liegroup as lg
from .reduction import StratumTag


class LocalModelError(ValueError):
    pass


class MomentumResidualError(LocalModelError):
    pass


@dataclass(frozen=True)
class LinearSympRep:
    """Diagonal torus ``(C*)^k`` acting on ``C^m`` with a weight matrix."""

    weights: np.ndarray
    pairs: tuple

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.weights, dtype=int))
        object.__setattr__(self, "weights", w)
        pairs = tuple((int(i), int(j)) for i, j in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        m = w.shape[1]
        seen = [idx for p in pairs for idx in p]
        if len(set(seen)) != len(seen) or sorted(seen) != list(range(m)):
            raise LocalModelError("pairs must partition the coordinates 0..m-1")
        for i, j in pairs:
            if np.any(w[:, i] + w[:, j] != 0):
                raise LocalModelError(f"weights of paired coordinates {i}, {j} do not cancel")

    @property
    def rank(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def omega_matrix(self) -> np.ndarray:
        om = np.zeros((self.dim, self.dim))
        for i, j in self.pairs:
            om[i, j], om[j, i] = 1.0, -1.0
        return om

    def omega(self, u, w) -> complex:
        return complex(np.asarray(u) @ self.omega_matrix() @ np.asarray(w))

    def generator(self, r: int) -> np.ndarray:
        return np.diag(self.weights[r].astype(float))

    def act(self, phases, v) -> np.ndarray:
        """Torus element ``t`` (length k, complex) acting on ``v``."""
        t = np.asarray(phases, dtype=complex)
        factor = np.prod(t[:, None] ** self.weights, axis=0)
        return factor * np.asarray(v)

    def to_json(self) -> dict:
        return {"weights": self.weights.tolist(), "pairs": [list(p) for p in self.pairs]}

    @classmethod
    def from_json(cls, data) -> "LinearSympRep":
        try:
            return cls(data["weights"], data["pairs"])
        except KeyError as exc:
            raise LocalModelError(f"model config missing field {exc.args[0]!r}") from None


def a1_rep() -> LinearSympRep:
    """``C^4 = (a1, a2, b1, b2)`` with weights (1, 1, -1, -1)."""
    return LinearSympRep([[1, 1, -1, -1]], ((0, 2), (1, 3)))


def linear_momentum(rep: LinearSympRep, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.array([0.5 * rep.omega(rep.generator(r) @ v, v) for r in range(rep.rank)])


def momentum_differential(rep: LinearSympRep, v, u) -> np.ndarray:
    """``D_u`` of :func:`linear_momentum`, from polarizing the quadratic form."""
    v, u = np.asarray(v, dtype=complex), np.asarray(u, dtype=complex)
    return np.array(
        [0.5 * (rep.omega(rep.generator(r) @ u, v) + rep.omega(rep.generator(r) @ v, u)) for r in range(rep.rank)]
    )


def kahler_form(u, w) -> float:
    """Standard Kaehler form ``Im sum u_s conj(w_s)`` on ``C^m``."""
    return float(np.imag(np.vdot(w, u)))


def real_linear_momentum(rep: LinearSympRep, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.array([0.5 * kahler_form(1j * rep.generator(r) @ v, v) for r in range(rep.rank)])


# quaternions on R^4 with basis (1, i, j, k); left multiplication by i, j, k
_LEFT_I = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])
_LEFT_J = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]])
_LEFT_K = _LEFT_I @ _LEFT_J
# right multiplication by i commutes with all left multiplications
_RIGHT_I = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])


@dataclass(frozen=True)
class QuaternionicRep:
    """``H^n = R^{4n}`` with ``U(1)`` acting by right multiplication ``q -> q e^{i w theta}``."""

    weights: tuple
    I: np.ndarray = field(init=False, repr=False)
    J: np.ndarray = field(init=False, repr=False)
    K: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        eye = np.eye(self.n, dtype=int)
        for name, block in (("I", _LEFT_I), ("J", _LEFT_J), ("K", _LEFT_K)):
            object.__setattr__(self, name, np.kron(eye, block))

    @property
    def n(self) -> int:
        return len(self.weights)

    def generator(self) -> np.ndarray:
        return np.kron(np.diag(self.weights), _RIGHT_I)

    def act(self, theta: float, v) -> np.ndarray:
        return lg.mat_exp(theta * self.generator()).real @ np.asarray(v, dtype=float)

    def structures(self) -> dict:
        return {"I": self.I, "J": self.J, "K": self.K}

    def quaternion_relations(self) -> bool:
        eye = np.eye(4 * self.n, dtype=int)
        I, J, K = self.I, self.J, self.K
        ok = all(np.array_equal(s @ s, -eye) for s in (I, J, K))
        ok &= np.array_equal(I @ J, K) and np.array_equal(J @ K, I) and np.array_equal(K @ I, J)
        ok &= all(np.array_equal(s.T, -s) for s in (I, J, K))
        return bool(ok)


def quaternion_to_complex(v) -> tuple[np.ndarray, np.ndarray]:
    """``q = z + w j`` per quaternionic coordinate; returns ``(z, w)``."""
    v = np.asarray(v, dtype=float).reshape(-1, 4)
    return v[:, 0] + 1j * v[:, 1], v[:, 2] + 1j * v[:, 3]


def complex_to_quaternion(z, w) -> np.ndarray:
    z, w = np.asarray(z), np.asarray(w)
    return np.stack([z.real, z.imag, w.real, w.imag], axis=1).ravel()


def kahler_forms(rep: QuaternionicRep) -> dict:
    """Matrices of ``omega_S(u, w) = <S u, w>``, i.e. ``u^T S^T w``."""
    return {name: s.T.astype(float) for name, s in rep.structures().items()}


def hyperkahler_momenta(rep: QuaternionicRep, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    xv = rep.generator() @ v
    return np.array([0.5 * float((s @ xv) @ v) for s in (rep.I, rep.J, rep.K)])


def holomorphic_form_defect(rep: QuaternionicRep, u, w) -> float:
    """``|(wJ + i wK)(Iu, Iw) + (wJ + i wK)(u, w)|``; zero for a (2,0)-form."""
    forms = kahler_forms(rep)
    hol = forms["J"] + 1j * forms["K"]
    Iu, Iw = rep.I @ u, rep.I @ w
    return float(abs(Iu @ hol @ Iw + u @ hol @ w))


def hyperkahler_zero_point(rep: QuaternionicRep, rng, tol: float = 1e-13, max_iter: int = 50) -> np.ndarray:
    """Gauss-Newton projection of a random vector onto the common zero set."""
    v = rng.standard_normal(4 * rep.n)
    x = rep.generator()
    for _ in range(max_iter):
        res = hyperkahler_momenta(rep, v)
        if np.abs(res).max() <= tol * max(1.0, v @ v):
            return v
        # gradient of 1/2 <S x v, v> is 1/2 (S x + (S x)^T) v
        jac = np.array([0.5 * (s @ x + (s @ x).T) @ v for s in (rep.I, rep.J, rep.K)])
        step, *_ = np.linalg.lstsq(jac, res, rcond=None)
        v = v - step
    raise LocalModelError("projection onto the hyperkaehler zero set did not converge")


@dataclass(frozen=True)
class ModelBundlePoint:
    x: np.ndarray
    xi: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class ModelBundle:
    """``G x_H (h^0 x V)`` for a diagonal torus ``H`` in ``G``.

    ``h_basis`` holds real diagonal matrices spanning the Lie algebra of ``H``;
    row ``r`` of the representation weights belongs to ``h_basis[r]``.
    """

    spec: lg.GroupSpec
    rep: LinearSympRep
    h_basis: np.ndarray

    def __post_init__(self):
        hb = np.asarray(self.h_basis, dtype=complex)
        object.__setattr__(self, "h_basis", hb)
        if hb.shape[0] != self.rep.rank:
            raise LocalModelError("one h-basis element per torus generator is required")
        for h in hb:
            if np.abs(h - np.diag(np.diag(h))).max() > 0 or np.abs(np.diag(h).imag).max() > 0:
                raise LocalModelError("h-basis elements must be real diagonal")
            self.spec.check_algebra(h)

    def annihilator_residual(self, xi) -> float:
        return max(abs(lg.trace_form(xi, h, self.spec.scale)) for h in self.h_basis)

    def embed_momentum(self, phi) -> np.ndarray:
        """Element of g whose trace pairing is ``phi`` on h and zero on its complement."""
        hb = self.h_basis
        gram = np.array([[lg.trace_form(a, b, self.spec.scale) for b in hb] for a in hb])
        coeffs = np.linalg.solve(gram, np.asarray(phi, dtype=complex))
        return np.tensordot(coeffs, hb, axes=1)

    def point(self, x, xi, v, tol: float = 1e-10) -> ModelBundlePoint:
        x, xi = np.asarray(x, dtype=complex), np.asarray(xi, dtype=complex)
        if self.annihilator_residual(xi) > tol:
            raise LocalModelError("xi is not in the annihilator of h")
        return ModelBundlePoint(x, xi, np.asarray(v, dtype=complex))

    def act(self, g, p: ModelBundlePoint) -> ModelBundlePoint:
        return ModelBundlePoint(np.asarray(g) @ p.x, p.xi, p.v)

    def random_annihilator(self, rng) -> np.ndarray:
        xi = lg.random_algebra(self.spec, rng)
        hb = self.h_basis
        gram = np.array([[lg.trace_form(a, b, self.spec.scale) for b in hb] for a in hb])
        rhs = np.array([lg.trace_form(xi, h, self.spec.scale) for h in hb])
        return xi - np.tensordot(np.linalg.solve(gram, rhs), hb, axes=1)


def model_momentum(bundle: ModelBundle, p: ModelBundlePoint) -> np.ndarray:
    if bundle.annihilator_residual(p.xi) > 1e-10:
        raise LocalModelError("xi is not in the annihilator of h")
    inner = p.xi + bundle.embed_momentum(linear_momentum(bundle.rep, p.v))
    return p.x @ inner @ np.linalg.inv(p.x)


def a1_bundle(spec: lg.GroupSpec | None = None) -> ModelBundle:
    spec = spec or lg.GroupSpec(lg.Family.SPECIAL_LINEAR, 2)
    h = np.zeros((spec.n, spec.n))
    h[0, 0], h[1, 1] = 1.0, -1.0
    return ModelBundle(spec, a1_rep(), np.array([h]))


# polynomials -------------------------------------------------------------------


def monomial(exponents, coeff=1.0) -> dict:
    return {tuple(int(e) for e in exponents): complex(coeff)}


def poly_add(*polys, coeffs=None) -> dict:
    coeffs = [1.0] * len(polys) if coeffs is None else coeffs
    out: dict = {}
    for c, p in zip(coeffs, polys):
        for e, a in p.items():
            out[e] = out.get(e, 0) + c * a
    return {e: a for e, a in out.items() if a != 0}


def poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for e1, a1 in p.items():
        for e2, a2 in q.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = out.get(e, 0) + a1 * a2
    return {e: a for e, a in out.items() if a != 0}


def poly_eval(p: dict, v) -> complex:
    v = np.asarray(v, dtype=complex)
    return complex(sum(a * np.prod(v ** np.array(e)) for e, a in p.items()))


def poly_derivative(p: dict, i: int) -> dict:
    out: dict = {}
    for e, a in p.items():
        if e[i] == 0:
            continue
        e2 = list(e)
        e2[i] -= 1
        out[tuple(e2)] = out.get(tuple(e2), 0) + a * e[i]
    return out


def poly_weight_defect(rep: LinearSympRep, p: dict) -> int:
    """Largest absolute torus weight over the monomials of ``p``."""
    return max((int(np.abs(rep.weights @ np.array(e)).max()) for e in p), default=0)


def momentum_polynomials(rep: LinearSympRep) -> list:
    """``Phi_r`` as polynomials: ``sum over pairs (i, j)`` of ``(w_i - w_j)/2 v_i v_j``."""
    polys = []
    for r in range(rep.rank):
        terms = []
        for i, j in rep.pairs:
            e = [0] * rep.dim
            e[i] += 1
            e[j] += 1
            terms.append(monomial(e, 0.5 * (rep.weights[r, i] - rep.weights[r, j])))
        polys.append(poly_add(*terms))
    return polys


def poisson_bracket_value(rep: LinearSympRep, f: dict, h: dict, v) -> complex:
    total = 0j
    for i, j in rep.pairs:
        fi, fj = poly_eval(poly_derivative(f, i), v), poly_eval(poly_derivative(f, j), v)
        hi, hj = poly_eval(poly_derivative(h, i), v), poly_eval(poly_derivative(h, j), v)
        total += fi * hj - fj * hi
    return total


def poisson_bracket(rep: LinearSympRep, f: dict, h: dict) -> dict:
    """The bracket as a polynomial (same convention as :func:`poisson_bracket_value`)."""
    parts = []
    for i, j in rep.pairs:
        fi, fj = poly_derivative(f, i), poly_derivative(f, j)
        hi, hj = poly_derivative(h, i), poly_derivative(h, j)
        parts += [poly_mul(fi, hj), poly_mul(fj, hi)]
    return poly_add(*parts, coeffs=[1.0, -1.0] * len(rep.pairs))


def invariant_bracket(rep: LinearSympRep, f: dict, h: dict, v, momentum_tol: float = 1e-8) -> complex:
    for name, p in (("f", f), ("h", h)):
        if poly_weight_defect(rep, p) != 0:
            raise LocalModelError(f"{name} is not invariant under the torus")
    res = np.abs(linear_momentum(rep, v)).max(initial=0.0)
    if res > momentum_tol:
        raise MomentumResidualError(f"|Phi_V(v)| = {res:.3e} exceeds {momentum_tol:g}")
    return poisson_bracket_value(rep, f, h, v)


def a1_invariants() -> dict:
    """``x_ij = a_i b_j`` in the coordinates ``(a1, a2, b1, b2)``."""
    out = {}
    for i in range(2):
        for j in range(2):
            e = [0, 0, 0, 0]
            e[i] += 1
            e[2 + j] += 1
            out[f"x{i + 1}{j + 1}"] = monomial(e)
    return out


def a1_zero_point(rng, scale: float = 1.0) -> np.ndarray:
    """Random point where both momenta of the A1 model vanish.

    ``a . b = 0`` forces ``b = c (-a2, a1)``; ``|a| = |b|`` forces ``|c| = 1``.
    """
    a = scale * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
    c = np.exp(1j * rng.uniform(0, 2 * np.pi))
    return np.concatenate([a, c * np.array([-a[1], a[0]])])


def stabilizer_dim(rep: LinearSympRep, v, tol: float = 1e-10) -> int:
    """Dimension of the stabilizer of ``v`` in the compact torus."""
    support = np.abs(np.asarray(v)) > tol * max(1.0, np.abs(v).max(initial=0.0))
    if not support.any():
        return rep.rank
    return rep.rank - int(np.linalg.matrix_rank(rep.weights[:, support].astype(float)))


@dataclass
class QuotientPoint:
    invariants: dict
    stabilizer_dim: int
    tag: StratumTag

    def to_row(self) -> list:
        vals = [self.invariants[k] for k in sorted(self.invariants)]
        return [c for z in vals for c in (z.real, z.imag)] + [self.stabilizer_dim, self.tag.value]


def classify_quotient_point(rep: LinearSympRep, v, invariants: dict | None = None, tol: float = 1e-8) -> QuotientPoint:
    invariants = a1_invariants() if invariants is None else invariants
    res = max(np.abs(linear_momentum(rep, v)).max(), np.abs(real_linear_momentum(rep, v)).max())
    if res > tol * max(1.0, float(np.vdot(v, v).real)):
        raise MomentumResidualError(f"momentum residual {res:.3e} exceeds {tol:g}")
    coords = {name: poly_eval(p, v) for name, p in invariants.items()}
    dim = stabilizer_dim(rep, v)
    tag = StratumTag.CENTRAL if dim == rep.rank else (StratumTag.IRREDUCIBLE if dim == 0 else StratumTag.REDUCIBLE_PROPER)
    return QuotientPoint(coords, dim, tag)


def a1_relations(coords: dict) -> tuple[complex, complex]:
    x = coords
    return x["x11"] + x["x22"], x["x11"] * x["x22"] - x["x12"] * x["x21"]


def torus_orbit_distance(rep: LinearSympRep, v, w, grid: int = 720, newton_steps: int = 30) -> float:
    """``min_theta |v - exp(i theta W) w|`` for a rank-one torus.

    Grid search, then Newton on the stationarity condition of
    ``Re sum conj(v_s) exp(i theta w_s) w_s``, which pins theta to rounding level.
    """
    if rep.rank != 1:
        raise LocalModelError("orbit distance is implemented for rank-one tori")
    v, w = np.asarray(v, dtype=complex), np.asarray(w, dtype=complex)
    wt = rep.weights[0].astype(float)
    c = np.conj(v) * w

    def dist(theta):
        return np.linalg.norm(v - np.exp(1j * theta * wt) * w)

    thetas = np.linspace(0, 2 * np.pi, grid, endpoint=False)
    theta = thetas[np.argmin([dist(t) for t in thetas])]
    for _ in range(newton_steps):
        phase = c * np.exp(1j * theta * wt)
        d1 = np.real(1j * wt @ phase)
        d2 = -np.real(wt**2 @ phase)
        if d2 >= 0:
            break
        delta = d1 / d2
        theta -= delta
        if abs(delta) < 1e-16:
            break
    return float(min(dist(theta), dist(thetas[np.argmin([dist(t) for t in thetas])])))


def bracket_closure(rep: LinearSympRep, f: dict, h: dict, invariants: dict, points) -> tuple[np.ndarray, float]:
    """Least-squares fit of ``{f, h}`` by a linear combination of ``invariants`` on ``points``."""
    names = sorted(invariants)
    design = np.array([[poly_eval(invariants[k], v) for k in names] for v in points])
    target = np.array([invariant_bracket(rep, f, h, v) for v in points])
    coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = float(np.linalg.norm(design @ coeffs - target) / max(1.0, np.linalg.norm(target)))
    return coeffs, resid


def load_model_config(path) -> tuple[LinearSympRep, dict]:
    """JSON with ``weights``, ``pairs`` and optional ``invariants`` ``{name: [[coeff, exponents], ...]}``."""
    with open(path) as fh:
        data = json.load(fh)
    rep = LinearSympRep.from_json(data)
    if "invariants" not in data:
        return rep, a1_invariants()
    invs = {}
    for name, terms in data["invariants"].items():
        invs[name] = poly_add(*[monomial(e, c) for c, e in terms])
    return rep, invs


def write_classification(path, points: list) -> None:
    if not points:
        return
    names = sorted(points[0].invariants)
    header = [f"{k}_{part}" for k in names for part in ("re", "im")] + ["stabilizer_dim", "tag"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for p in points:
            writer.writerow(p.to_row())
