"""Kempf-Ness flow, semistability, trace invariants and orbit-type labels."""

from __future__ import annotations

import csv
import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import liegroup as lg
from .cohomology import stabilizer_algebra
from .extmoduli import RepPoint, fiber_residual, real_momentum, real_momentum_norm, relator_value
from .presentation import CentralTwist, evaluate_word


@dataclass
class FlowConfig:
    initial_step: float = 0.25
    max_iter: int = 5000
    grad_tol: float = 1e-8
    backtrack: float = 0.5
    armijo: float = 1e-4
    grow: float = 2.0
    max_backtracks: int = 60

    def __post_init__(self):
        for name in ("initial_step", "max_iter", "grad_tol", "backtrack", "armijo", "grow"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.backtrack >= 1:
            raise ValueError("backtrack factor must be below 1")


@dataclass
class FlowReport:
    initial_norm: float
    final_norm: float
    iterations: int
    converged: bool
    final_point: RepPoint
    conjugator: np.ndarray
    invariant_drift: float
    fiber_drift: float
    history: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "initial_norm": self.initial_norm,
            "final_norm": self.final_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "invariant_drift": self.invariant_drift,
            "fiber_drift": self.fiber_drift,
        }

    def write_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "norm", "step"])
            writer.writerows(self.history)


def default_words(num_generators: int, depth: int = 3) -> list:
    """Generators, products of two distinct generators, increasing triples (up to ``depth``)."""
    gens = range(1, num_generators + 1)
    words = [(g,) for g in gens]
    if depth >= 2:
        words += [tuple(c) for c in itertools.combinations(gens, 2)]
    if depth >= 3:
        words += [tuple(c) for c in itertools.combinations(gens, 3)]
    return words


def trace_invariants(point: RepPoint, words=None) -> np.ndarray:
    words = default_words(point.mats.shape[0]) if words is None else words
    mats, inv = point.mats, point.inverses
    return np.array([np.trace(evaluate_word(w, mats, inv)) for w in words])


def _descent_conjugator(m: np.ndarray, step: float) -> np.ndarray:
    # m is anti-Hermitian, so -i m is Hermitian and exp(-s i m) is positive definite
    return lg.mat_exp(-step * 1j * m)


def _slope_estimate(point: RepPoint, m: np.ndarray) -> float:
    # comparable to -d/ds |mu_R|^2 along exp(-s i m)-conjugation (twice the
    # squared length of the generating field); 2|mu|^2 overstates it badly near
    # non-closed orbits
    return 2.0 * sum(np.linalg.norm(ai @ (m @ a - a @ m)) ** 2 for a, ai in zip(point.mats, point.inverses))


def flow_to_kempf_ness(point: RepPoint, cfg: FlowConfig | None = None, twist: CentralTwist | None = None) -> FlowReport:
    """Discrete negative gradient flow of ``|mu_R|^2`` along complexified conjugation.

    Each step conjugates by ``exp(-s i mu_R)``; ``s`` comes from Armijo
    backtracking and grows after accepted steps.  The running point is always
    recomputed as ``g A g^{-1}`` from the accumulated conjugator ``g`` so that the
    relator and trace invariants move only by one conjugation's rounding.
    """
    cfg = cfg or FlowConfig()
    scale = point.spec.scale
    start = point
    start_inv = trace_invariants(start)
    start_rel = relator_value(start)
    g = point.spec.identity()
    current = start
    m = real_momentum(current)
    norm_sq = -lg.trace_form(m, m, scale).real
    initial = float(np.sqrt(max(norm_sq, 0.0)))
    history = [(0, initial, 0.0)]
    step = cfg.initial_step
    converged = initial <= cfg.grad_tol
    it = 0
    while not converged and it < cfg.max_iter:
        it += 1
        slope = _slope_estimate(current, m)
        for _ in range(cfg.max_backtracks):
            h = _descent_conjugator(m, step)
            g_trial = h @ g
            if point.spec.special:
                g_trial = g_trial / np.linalg.det(g_trial) ** (1.0 / point.spec.n)
            trial = start.conjugate(g_trial)
            m_trial = real_momentum(trial)
            ns_trial = -lg.trace_form(m_trial, m_trial, scale).real
            if ns_trial <= norm_sq - cfg.armijo * step * slope:
                break
            step *= cfg.backtrack
        else:
            break
        g, current, m, norm_sq = g_trial, trial, m_trial, ns_trial
        history.append((it, float(np.sqrt(max(norm_sq, 0.0))), step))
        converged = np.sqrt(max(norm_sq, 0.0)) <= cfg.grad_tol
        step *= cfg.grow
    final = float(np.sqrt(max(norm_sq, 0.0)))
    inv_drift = float(np.abs(trace_invariants(current) - start_inv).max())
    fib_drift = float(np.linalg.norm(relator_value(current) - start_rel))
    if twist is not None:
        fib_drift = max(fib_drift, abs(fiber_residual(current, twist) - fiber_residual(start, twist)))
    return FlowReport(initial, final, it, bool(converged), current, g, inv_drift, fib_drift, history)


def semistability_test(point: RepPoint, cfg: FlowConfig | None = None) -> tuple[bool, float]:
    """Numerical proxy: the flow reaches ``|mu_R| <= grad_tol`` within the budget."""
    cfg = cfg or FlowConfig()
    rep = flow_to_kempf_ness(point, cfg)
    return rep.converged and rep.final_norm <= cfg.grad_tol, rep.final_norm


def same_reduced_point(p: RepPoint, q: RepPoint, cfg: FlowConfig | None = None, tol: float = 1e-6, words=None):
    """``True``/``False`` by trace invariants of the flowed points; ``None`` if a flow stalls."""
    cfg = cfg or FlowConfig()
    fp, fq = flow_to_kempf_ness(p, cfg), flow_to_kempf_ness(q, cfg)
    if not (fp.converged and fq.converged):
        return None
    diff = trace_invariants(fp.final_point, words) - trace_invariants(fq.final_point, words)
    return bool(np.abs(diff).max() <= tol)


def unitary_alignment(p: RepPoint, q: RepPoint, iterations: int = 200, lr: float | None = None) -> tuple[np.ndarray, float]:
    """Unitary ``k`` minimising ``sum_j |q_j k - k p_j|`` (so ``q ~ k p k^{-1}``).

    Starts from the polar factor of the least singular vector of the linear
    map ``k -> (q_j k - k p_j)_j`` and refines by projected gradient on U(n).
    """
    n = p.spec.n
    rows = []
    eye = np.eye(n)
    for a, b in zip(p.mats, q.mats):
        # vec(b k - k a) = (I kron b - a^T kron I) vec(k), column-major vec
        rows.append(np.kron(eye, b) - np.kron(a.T, eye))
    lin = np.vstack(rows)
    _, _, vh = np.linalg.svd(lin)
    k0 = vh[-1].conj().reshape(n, n, order="F")
    try:
        k, _ = lg.polar(k0)
    except lg.PolarError:
        # degenerate null vector (large stabilizer); plain gradient from the identity
        k = np.eye(n, dtype=complex)

    def residual(kk):
        return np.sqrt(sum(np.linalg.norm(b @ kk - kk @ a) ** 2 for a, b in zip(p.mats, q.mats)))

    if lr is None:
        lr = 0.5 / max(np.linalg.norm(lin, 2) ** 2, 1e-12)
    best = residual(k)
    for _ in range(iterations):
        grad = sum(b.conj().T @ (b @ k - k @ a) - (b @ k - k @ a) @ a.conj().T for a, b in zip(p.mats, q.mats))
        skew = grad @ k.conj().T
        skew = 0.5 * (skew - skew.conj().T)
        k_new = lg.mat_exp(-lr * skew) @ k
        r = residual(k_new)
        if r < best:
            k, best = k_new, r
        else:
            lr *= 0.5
    return k, float(best)


class StratumTag(str, enum.Enum):
    IRREDUCIBLE = "Irreducible"
    REDUCIBLE_PROPER = "ReducibleProper"
    CENTRAL = "Central"


@dataclass
class StratumLabel:
    stabilizer_dim: int
    center_dim: int
    tag: StratumTag
    diagnostics: dict = field(default_factory=dict)
    flagged: bool = False

    def to_json(self) -> dict:
        return {
            "stabilizer_dim": self.stabilizer_dim,
            "center_dim": self.center_dim,
            "tag": self.tag.value,
            "diagnostics": self.diagnostics,
            "flagged": self.flagged,
        }


def orbit_type_label(point: RepPoint, grad_tol: float = 1e-6) -> StratumLabel:
    norm = real_momentum_norm(point)
    if norm > grad_tol:
        raise ValueError(f"|mu_R| = {norm:.3e}; flow the point to the Kempf-Ness set first")
    stab = stabilizer_algebra(point)
    spec = point.spec
    if stab.dim == spec.center_dim:
        tag = StratumTag.IRREDUCIBLE
    elif stab.dim == spec.dim:
        tag = StratumTag.CENTRAL
    else:
        tag = StratumTag.REDUCIBLE_PROPER
    sv = stab.decision.singular_values
    diag = {"margin": stab.decision.margin, "smallest_singular_values": list(sv[-3:]), "momentum_norm": norm}
    return StratumLabel(stab.dim, spec.center_dim, tag, diag, stab.decision.flagged)
