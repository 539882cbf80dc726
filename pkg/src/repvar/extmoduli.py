"""Extended moduli space over G^{2g}: relator map, momenta, the 2-form, Kähler data.

Points are :class:`RepPoint` objects wrapping an array of shape ``(2g, n, n)``
ordered ``A1, B1, A2, B2, ...``.  Tangent tuples are arrays of the same shape
whose ``j``-th entry is an ambient matrix tangent at ``A_j``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import liegroup as lg
from .liegroup import GroupSpec
from .presentation import (
    CentralTwist,
    TwoChain,
    build_presentation,
    evaluate_word,
    standard_two_chain,
    word_differential,
)

log = logging.getLogger(__name__)

DEXP_CROSSOVER = 2.0
QUAD_RTOL = 1e-10


class QuadratureError(RuntimeError):
    pass


class SamplingError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class RepPoint:
    spec: GroupSpec
    mats: np.ndarray

    def __post_init__(self):
        mats = np.array(self.mats, dtype=complex)
        n = self.spec.n
        if mats.ndim != 3 or mats.shape[1:] != (n, n) or mats.shape[0] % 2 or mats.shape[0] == 0:
            raise ValueError(f"expected (2g, {n}, {n}) array, got {mats.shape}")
        mats.setflags(write=False)
        object.__setattr__(self, "mats", mats)

    @property
    def genus(self) -> int:
        return self.mats.shape[0] // 2

    @property
    def inverses(self) -> np.ndarray:
        return np.linalg.inv(self.mats)

    def conjugate(self, g: np.ndarray) -> "RepPoint":
        gi = np.linalg.inv(g)
        return RepPoint(self.spec, g @ self.mats @ gi)

    def moved(self, tangent: np.ndarray, t: float) -> "RepPoint":
        """Point ``A_j exp(t A_j^{-1} v_j)`` along a group curve with initial velocity ``v``."""
        inv = self.inverses
        return RepPoint(
            self.spec,
            np.array([a @ lg.mat_exp(t * ai @ v) for a, ai, v in zip(self.mats, inv, tangent)]),
        )

    def check(self, tol: float = 1e-10) -> None:
        for a in self.mats:
            self.spec.check_group(a, tol)


def identity_point(spec: GroupSpec, genus: int) -> RepPoint:
    return RepPoint(spec, np.array([spec.identity()] * (2 * genus)))


def fundamental_field(point: RepPoint, xi: np.ndarray) -> np.ndarray:
    """Generating vector field ``d/dt exp(-t xi) A exp(t xi)`` at ``t = 0``.

    The ``exp(-t xi)`` convention makes ``xi -> xi_M`` a Lie algebra homomorphism,
    and with it ``omega(xi_M, v) = d<mu, xi>(v)``.
    """
    return np.array([a @ xi - xi @ a for a in point.mats])


def relator_value(point: RepPoint) -> np.ndarray:
    rel = build_presentation(point.genus).relator
    return evaluate_word(rel, point.mats, point.inverses)


def relator_differential(point: RepPoint, tangent: np.ndarray) -> np.ndarray:
    rel = build_presentation(point.genus).relator
    return word_differential(rel, point.mats, tangent, point.inverses)


def fiber_residual(point: RepPoint, twist: CentralTwist) -> float:
    return float(np.linalg.norm(relator_value(point) - twist.target))


def complex_momentum(point: RepPoint, twist: CentralTwist) -> np.ndarray:
    """Holomorphic momentum: logarithm of the relator in the chart around ``exp(X)``."""
    return lg.mat_log(relator_value(point), twist.X)


def dexp_chart(w: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Derivative of exp at ``w``, switching to the block formula when ``ad_w`` is large."""
    if lg.ad_norm_bound(w) <= DEXP_CROSSOVER:
        return lg.dexp(w, a)
    return lg.dexp_block(w, a)


def dlog(w: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Solve ``dexp_w(a) = delta`` for ``a`` (derivative of log at ``exp(w)``)."""
    n = w.shape[0]
    cols = []
    for k in range(n * n):
        e = np.zeros(n * n, dtype=complex)
        e[k] = 1
        cols.append(dexp_chart(w, e.reshape(n, n)).reshape(-1))
    mat = np.array(cols).T
    return np.linalg.solve(mat, np.asarray(delta).reshape(-1)).reshape(n, n)


def complex_momentum_differential(point: RepPoint, twist: CentralTwist, tangent: np.ndarray) -> np.ndarray:
    w = complex_momentum(point, twist)
    return dlog(w, relator_differential(point, tangent))


def exp_pullback_cartan(w, a, b, c, scale: float = 1.0) -> complex:
    """``(exp^* lambda)_w(a, b, c)``: Cartan 3-form on left-translated dexp images."""
    return lg.triple_product(lg.dexp_series(w, a), lg.dexp_series(w, b), lg.dexp_series(w, c), scale)


def primitive_b(z, u, v, twist: CentralTwist, rtol: float = QUAD_RTOL, max_nodes: int = 256) -> complex:
    """Radial homotopy primitive of ``exp^* lambda`` about the twist ``X``.

    ``B_z(u, v) = int_0^1 s^2 (exp^* lambda)_{X + s(z - X)}(z - X, u, v) ds``,
    integrated by Gauss-Legendre with node doubling until ``rtol`` is met.
    """
    scale = twist.spec.scale
    x = twist.X
    d = np.asarray(z) - x
    if np.linalg.norm(d) == 0:
        return 0j

    def integrand(s):
        return s * s * exp_pullback_cartan(x + s * d, d, u, v, scale)

    def rule(m):
        nodes, weights = leggauss(m)
        s = 0.5 * (nodes + 1)
        return 0.5 * sum(wt * integrand(si) for si, wt in zip(s, weights))

    m = 8
    prev = rule(m)
    while m < max_nodes:
        m *= 2
        cur = rule(m)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300) or abs(cur - prev) < 1e-15:
            return cur
        prev = cur
    raise QuadratureError(f"Gauss-Legendre did not reach rtol {rtol} with {max_nodes} nodes")


def _chain_pair_form(mats, inverses, chain: TwoChain, u, v, scale) -> complex:
    total = 0j
    for coeff, a_word, b_word in chain.terms:
        a = evaluate_word(a_word, mats, inverses)
        b = evaluate_word(b_word, mats, inverses)
        ai, bi = np.linalg.inv(a), np.linalg.inv(b)
        pu = ai @ word_differential(a_word, mats, u, inverses)
        pv = ai @ word_differential(a_word, mats, v, inverses)
        qu = word_differential(b_word, mats, u, inverses) @ bi
        qv = word_differential(b_word, mats, v, inverses) @ bi
        total += coeff * 0.5 * (lg.trace_form(pu, qv, scale) - lg.trace_form(pv, qu, scale))
    return total


def omega_chain(point: RepPoint, u, v, chain: TwoChain | None = None) -> complex:
    """The 2-form ``omega_c``: the chain-weighted pullback of ``1/2 omega_1 . omega_bar_2``."""
    chain = chain or standard_two_chain(point.genus)
    return _chain_pair_form(point.mats, point.inverses, chain, u, v, point.spec.scale)


def omega(point: RepPoint, u, v, twist: CentralTwist, chain: TwoChain | None = None) -> complex:
    """The closed 2-form ``omega_c - r^* B`` on the extended moduli space."""
    w = complex_momentum(point, twist)
    du = dlog(w, relator_differential(point, u))
    dv = dlog(w, relator_differential(point, v))
    return omega_chain(point, u, v, chain) - primitive_b(w, du, dv, twist)


def omega_matrix(point: RepPoint, tangents, twist: CentralTwist, chain: TwoChain | None = None) -> np.ndarray:
    m = len(tangents)
    out = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(i + 1, m):
            out[i, j] = omega(point, tangents[i], tangents[j], twist, chain)
            out[j, i] = -out[i, j]
    return out


def momentum_pairing(mu: np.ndarray, xi: np.ndarray, scale: float = 1.0) -> complex:
    """``<mu, xi>`` with the dual identified through the trace form."""
    return lg.trace_form(mu, xi, scale)


def mu_cot(g: np.ndarray) -> np.ndarray:
    """Conjugation momentum on one factor: ``Ad_k Y - Y`` for ``g = k exp(iY)``."""
    k, y = lg.polar(g)
    return k @ y @ k.conj().T - y


def real_momentum(point: RepPoint) -> np.ndarray:
    return sum(mu_cot(a) for a in point.mats)


def real_pairing(x: np.ndarray, y: np.ndarray, scale: float = 1.0) -> float:
    """Positive inner product ``-scale tr(xy)`` on the compact algebra."""
    return float(np.real(-lg.trace_form(x, y, scale)))


def real_momentum_norm(point: RepPoint) -> float:
    m = real_momentum(point)
    return float(np.sqrt(max(real_pairing(m, m, point.spec.scale), 0.0)))


def kahler_potential(point: RepPoint) -> float:
    total = 0.0
    for a in point.mats:
        _, y = lg.polar(a)
        total += real_pairing(y, y, point.spec.scale)
    return total


def potential_derivative(point: RepPoint, xi: np.ndarray, h: float = 1e-3) -> float:
    """``(d phi)(J xi_M)`` by a five-point stencil along ``exp(i t xi)``-conjugation."""

    def f(t):
        return kahler_potential(point.conjugate(lg.mat_exp(1j * t * xi)))

    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


@dataclass
class SamplerConfig:
    mode: str = "newton"  # "structured" or "newton"
    spread: float = 0.6
    max_iter: int = 100
    tol: float = 1e-10
    damping: float = 0.5
    perturb: float = 0.3


def _normalize_det(spec: GroupSpec, mats: np.ndarray) -> np.ndarray:
    if not spec.special:
        return mats
    return np.array([a / np.linalg.det(a) ** (1.0 / spec.n) for a in mats])


def structured_seed(spec: GroupSpec, genus: int, twist: CentralTwist, rng: np.random.Generator) -> np.ndarray:
    """Exact fiber points: commuting diagonal tuples, or an anticommuting first pair for the -I twist."""
    n = spec.n
    mats = []
    start = 0
    if twist.degree % n != 0:
        if n != 2 or twist.degree % 2 != 1:
            raise SamplingError("structured seeds only cover the -I twist for n = 2", np.inf)
        lam = np.exp(lg.random_algebra(GroupSpec("GeneralLinear", 1), rng, 0.5)[0, 0])
        b1, b2 = np.exp(lg.random_algebra(GroupSpec("GeneralLinear", 2), rng, 0.5).diagonal())
        p = lg.random_group(spec, rng, 0.5)
        pi = np.linalg.inv(p)
        mats += [p @ np.diag([lam, -lam]) @ pi, p @ np.array([[0, b1], [b2, 0]]) @ pi]
        start = 1
    for _ in range(start, genus):
        for _ in range(2):
            d = lg.random_algebra(spec, rng, 0.5).diagonal()
            if spec.special:
                d = d - d.mean()
            mats.append(np.diag(np.exp(d)))
    return np.array(mats)


def project_to_fiber(
    spec: GroupSpec, mats: np.ndarray, twist: CentralTwist, cfg: SamplerConfig | None = None
) -> RepPoint:
    """Damped Gauss-Newton onto ``r^{-1}(exp X)`` with steps ``A_j <- A_j exp(zeta_j)``."""
    cfg = cfg or SamplerConfig()
    basis = spec.algebra_basis()
    target = twist.target
    point = RepPoint(spec, _normalize_det(spec, mats))
    res = fiber_residual(point, twist)
    for _ in range(cfg.max_iter):
        if res <= cfg.tol * 1e-3:
            break
        jac = []
        for j in range(point.mats.shape[0]):
            for e in basis:
                tangent = np.zeros_like(point.mats)
                tangent[j] = point.mats[j] @ e
                jac.append(relator_differential(point, tangent).reshape(-1))
        jac = np.array(jac).T
        r = (relator_value(point) - target).reshape(-1)
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        step = step.reshape(point.mats.shape[0], len(basis))
        t = 1.0
        while t > 1e-6:
            zeta = np.einsum("jk,kab->jab", t * step, basis)
            trial = RepPoint(
                spec, _normalize_det(spec, np.array([a @ lg.mat_exp(z) for a, z in zip(point.mats, zeta)]))
            )
            trial_res = fiber_residual(trial, twist)
            if trial_res < res:
                point, res = trial, trial_res
                break
            t *= cfg.damping
        else:
            break
    if res > cfg.tol:
        raise SamplingError("fiber projection did not converge", res)
    return point


def sample_fiber_point(
    spec: GroupSpec, genus: int, twist: CentralTwist, seed: int, cfg: SamplerConfig | None = None
) -> RepPoint:
    """Deterministic point of ``r^{-1}(exp X)`` for the given seed."""
    cfg = cfg or SamplerConfig()
    rng = np.random.default_rng(seed)
    twisted = twist.degree % spec.n != 0
    if cfg.mode == "structured":
        point = RepPoint(spec, structured_seed(spec, genus, twist, rng))
        res = fiber_residual(point, twist)
        if res > cfg.tol:
            raise SamplingError("structured seed off the fiber", res)
        return point
    if twisted:
        start = structured_seed(spec, genus, twist, rng)
        start = np.array([a @ lg.random_group(spec, rng, cfg.perturb) for a in start])
    else:
        start = np.array([lg.random_group(spec, rng, cfg.spread) for _ in range(2 * genus)])
    return project_to_fiber(spec, start, twist, cfg)


def random_tangent(point: RepPoint, rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    """Tangent tuple ``A_j x_j`` with random algebra elements ``x_j``."""
    return np.array([a @ lg.random_algebra(point.spec, rng, spread) for a in point.mats])


def right_translate(point: RepPoint, values: np.ndarray) -> np.ndarray:
    """Tangent tuple ``u_j A_j`` from algebra values ``u_j``."""
    return np.array([u @ a for u, a in zip(values, point.mats)])
