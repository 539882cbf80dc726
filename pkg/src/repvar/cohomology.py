"""Group cohomology of the surface group with coefficients in the adjoint module.

Cocycles are determined by their values on the generators.  Linear algebra is
done in coordinates with respect to an orthonormal basis of the Lie algebra for
the Hermitian form ``tr(X Y^*)``, so orthogonal complements in coordinate space
are Hermitian complements of matrices.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import liegroup as lg
from .extmoduli import RepPoint, project_to_fiber, SamplerConfig, right_translate
from .presentation import CentralTwist, TwoChain, build_presentation, evaluate_word, standard_two_chain

SVD_RTOL = 1e-8
GAP_RATIO = 10.0


class CohomologyError(ValueError):
    pass


class StratumError(CohomologyError):
    """The point is not on the smooth stratum; see ``reduction.orbit_type_label``."""


class RankWarning(UserWarning):
    pass


@dataclass(frozen=True)
class RankDecision:
    rank: int
    singular_values: tuple
    margin: float
    flagged: bool


def decide_rank(mat: np.ndarray, rtol: float = SVD_RTOL) -> tuple[RankDecision, np.ndarray, np.ndarray]:
    """Numerical rank of ``mat`` by relative SVD threshold; returns the SVD factors too."""
    u, s, vh = np.linalg.svd(mat)
    if s.size == 0 or s[0] == 0:
        return RankDecision(0, tuple(s), np.inf, False), u, vh
    rank = int(np.sum(s > rtol * s[0]))
    above = s[rank - 1] if rank > 0 else np.inf
    below = s[rank] if rank < s.size else 0.0
    margin = above / below if below > 0 else np.inf
    flagged = margin < GAP_RATIO
    if flagged:
        warnings.warn(f"ambiguous rank gap {margin:.2f} at rank {rank}", RankWarning, stacklevel=2)
    return RankDecision(rank, tuple(float(x) for x in s), float(margin), flagged), u, vh


def orthonormal_basis(spec: lg.GroupSpec) -> np.ndarray:
    basis = spec.algebra_basis().reshape(spec.dim, -1)
    q, _ = np.linalg.qr(basis.T)
    return q.T.reshape(spec.dim, spec.n, spec.n)


@dataclass(frozen=True, eq=False)
class Cocycle:
    base: RepPoint
    values: np.ndarray

    def coords(self) -> np.ndarray:
        onb = orthonormal_basis(self.base.spec)
        return np.einsum("kab,jab->jk", onb.conj(), self.values).reshape(-1)

    @classmethod
    def from_coords(cls, base: RepPoint, coords: np.ndarray) -> "Cocycle":
        onb = orthonormal_basis(base.spec)
        c = np.asarray(coords).reshape(2 * base.genus, base.spec.dim)
        return cls(base, np.einsum("jk,kab->jab", c, onb))

    def act(self, xi: np.ndarray) -> "Cocycle":
        """``(xi . u)(g) = [xi, u(g)]``."""
        return Cocycle(self.base, np.array([lg.bracket(xi, x) for x in self.values]))

    def tangent(self) -> np.ndarray:
        return right_translate(self.base, self.values)


@dataclass
class CohomologySummary:
    dimH0: int
    dimZ1: int
    dimB1: int
    dimH1: int
    dim_algebra: int
    genus: int
    margins: dict = field(default_factory=dict)
    flagged: bool = False

    def euler_check(self) -> bool:
        return (
            self.dimH1 == self.dimZ1 - self.dimB1
            and self.dimB1 == self.dim_algebra - self.dimH0
            and self.dimH1 == (2 * self.genus - 2) * self.dim_algebra + 2 * self.dimH0
        )

    def to_json(self) -> dict:
        return {
            "dimH0": self.dimH0,
            "dimZ1": self.dimZ1,
            "dimB1": self.dimB1,
            "dimH1": self.dimH1,
            "dim_algebra": self.dim_algebra,
            "genus": self.genus,
            "euler_check": self.euler_check(),
            "margins": self.margins,
            "flagged": self.flagged,
        }


def evaluate_cocycle_on_word(values: np.ndarray, mats: np.ndarray, w, inverses=None) -> np.ndarray:
    """Crossed-homomorphism extension ``u(gh) = u(g) + Ad_g u(h)``."""
    if inverses is None:
        inverses = np.linalg.inv(mats)
    n = mats.shape[-1]
    prefix = np.eye(n, dtype=complex)
    prefix_inv = np.eye(n, dtype=complex)
    acc = np.zeros((n, n), dtype=complex)
    for letter in w:
        k = abs(letter) - 1
        if letter > 0:
            acc += prefix @ values[k] @ prefix_inv
            prefix, prefix_inv = prefix @ mats[k], inverses[k] @ prefix_inv
        else:
            prefix, prefix_inv = prefix @ inverses[k], mats[k] @ prefix_inv
            acc -= prefix @ values[k] @ prefix_inv
    return acc


def cocycle_on_word(u: Cocycle, w) -> np.ndarray:
    return evaluate_cocycle_on_word(u.values, u.base.mats, w, u.base.inverses)


def _stabilizer_matrix(point: RepPoint, onb: np.ndarray) -> np.ndarray:
    cols = []
    for e in onb:
        cols.append(np.concatenate([(a @ e @ ai - e).reshape(-1) for a, ai in zip(point.mats, point.inverses)]))
    return np.array(cols).T


def _fox_matrix(point: RepPoint, onb: np.ndarray) -> np.ndarray:
    rel = build_presentation(point.genus).relator
    cols = []
    zeros = np.zeros_like(point.mats)
    for j in range(point.mats.shape[0]):
        for e in onb:
            vals = zeros.copy()
            vals[j] = e
            cols.append(evaluate_cocycle_on_word(vals, point.mats, rel, point.inverses).reshape(-1))
    return np.array(cols).T


@dataclass
class Stabilizer:
    basis: np.ndarray
    decision: RankDecision

    @property
    def dim(self) -> int:
        return len(self.basis)


def stabilizer_algebra(point: RepPoint, rtol: float = SVD_RTOL) -> Stabilizer:
    """Orthonormal basis of the Lie algebra of the conjugation stabilizer."""
    onb = orthonormal_basis(point.spec)
    dec, _, vh = decide_rank(_stabilizer_matrix(point, onb), rtol)
    null = vh[dec.rank :].conj()
    return Stabilizer(np.einsum("ik,kab->iab", null, onb), dec)


@dataclass
class CohomologyBases:
    z1: np.ndarray  # orthonormal coordinate rows
    b1: np.ndarray
    h1: np.ndarray  # orthonormal complement of B1 in Z1
    summary: CohomologySummary
    base: RepPoint

    def cocycles(self, which: str = "h1") -> list:
        return [Cocycle.from_coords(self.base, c) for c in getattr(self, which)]


def cohomology_bases(
    point: RepPoint, twist: CentralTwist, rtol: float = SVD_RTOL, fiber_tol: float = 1e-8
) -> CohomologyBases:
    from .extmoduli import fiber_residual

    res = fiber_residual(point, twist)
    if res > fiber_tol:
        raise CohomologyError(f"point is off the fiber (residual {res:.3e})")
    spec = point.spec
    onb = orthonormal_basis(spec)
    fox_dec, _, fox_vh = decide_rank(_fox_matrix(point, onb), rtol)
    z1 = fox_vh[fox_dec.rank :].conj()
    stab = _stabilizer_matrix(point, onb)
    # coboundary xi -> (xi - Ad xi)_j in coordinates
    coords = []
    for col in stab.T:
        vals = -col.reshape(2 * point.genus, spec.n, spec.n)
        coords.append(np.einsum("kab,jab->jk", onb.conj(), vals).reshape(-1))
    cob = np.array(coords).T
    b_dec, b_u, _ = decide_rank(cob, rtol)
    b1 = b_u[:, : b_dec.rank].T
    proj = z1 - (z1 @ b1.conj().T) @ b1
    h_dec, _, h_vh = decide_rank(proj, 1e-6) if proj.size else (RankDecision(0, (), np.inf, False), None, None)
    h1 = h_vh[: h_dec.rank] if h_vh is not None else np.zeros((0, z1.shape[1]))
    dim_h0 = spec.dim - b_dec.rank
    summary = CohomologySummary(
        dimH0=dim_h0,
        dimZ1=z1.shape[0],
        dimB1=b_dec.rank,
        dimH1=z1.shape[0] - b_dec.rank,
        dim_algebra=spec.dim,
        genus=point.genus,
        margins={"fox": fox_dec.margin, "coboundary": b_dec.margin, "complement": h_dec.margin},
        flagged=fox_dec.flagged or b_dec.flagged,
    )
    if h1.shape[0] != summary.dimH1:
        raise CohomologyError(f"complement has dimension {h1.shape[0]}, expected {summary.dimH1}")
    return CohomologyBases(z1, b1, h1, summary, point)


def slice_pairing(u: Cocycle, v: Cocycle, chain: TwoChain | None = None) -> complex:
    """Cup-product pairing ``1/2 <c, u cup v - v cup u>`` through the trace form."""
    if u.base is not v.base and not np.array_equal(u.base.mats, v.base.mats):
        raise CohomologyError("cocycles live at different base points")
    base = u.base
    chain = chain or standard_two_chain(base.genus)
    scale = base.spec.scale
    mats, inv = base.mats, base.inverses
    total = 0j
    for coeff, a_word, b_word in chain.terms:
        a = evaluate_word(a_word, mats, inv)
        ai = np.linalg.inv(a)
        ua = evaluate_cocycle_on_word(u.values, mats, a_word, inv)
        va = evaluate_cocycle_on_word(v.values, mats, a_word, inv)
        ub = evaluate_cocycle_on_word(u.values, mats, b_word, inv)
        vb = evaluate_cocycle_on_word(v.values, mats, b_word, inv)
        total += coeff * 0.5 * (lg.trace_form(ua, a @ vb @ ai, scale) - lg.trace_form(va, a @ ub @ ai, scale))
    return total


@dataclass
class PairingMatrix:
    basis: list
    gram: np.ndarray

    @property
    def min_singular_value(self) -> float:
        s = np.linalg.svd(self.gram, compute_uv=False)
        return float(s[-1]) if s.size else np.inf

    def to_json(self) -> dict:
        s = np.linalg.svd(self.gram, compute_uv=False)
        return {
            "size": len(self.basis),
            "gram": [[[z.real, z.imag] for z in row] for row in self.gram],
            "singular_values": [float(x) for x in s],
            "antisymmetry_residual": float(np.abs(self.gram + self.gram.T).max()) if s.size else 0.0,
        }


def pairing_matrix(bases: CohomologyBases, chain: TwoChain | None = None) -> PairingMatrix:
    cocycles = bases.cocycles("h1")
    m = len(cocycles)
    gram = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(i + 1, m):
            gram[i, j] = slice_pairing(cocycles[i], cocycles[j], chain)
            gram[j, i] = -gram[i, j]
    return PairingMatrix(cocycles, gram)


def quadratic_momentum(u: Cocycle, xi: np.ndarray, chain: TwoChain | None = None, stab_tol: float = 1e-6) -> complex:
    """``<mu(u), xi> = 1/2 sum n_i tr(xi [u(a_i), Ad_{a_i} u(b_i)])`` for ``xi`` in the stabilizer."""
    base = u.base
    resid = max(np.linalg.norm(a @ xi - xi @ a) for a in base.mats)
    if resid > stab_tol * max(1.0, np.linalg.norm(xi)):
        raise CohomologyError(f"xi is not in the stabilizer (residual {resid:.3e})")
    chain = chain or standard_two_chain(base.genus)
    mats, inv = base.mats, base.inverses
    total = 0j
    for coeff, a_word, b_word in chain.terms:
        a = evaluate_word(a_word, mats, inv)
        ua = evaluate_cocycle_on_word(u.values, mats, a_word, inv)
        ub = evaluate_cocycle_on_word(u.values, mats, b_word, inv)
        total += coeff * 0.5 * lg.trace_form(xi, lg.bracket(ua, a @ ub @ np.linalg.inv(a)), base.spec.scale)
    return total


# Invariant trace functions are sequences of (coefficient, word).


def trace_function(f, point: RepPoint) -> complex:
    mats, inv = point.mats, point.inverses
    return sum(c * np.trace(evaluate_word(w, mats, inv)) for c, w in f)


def trace_function_differential(f, u: Cocycle) -> complex:
    """Derivative of ``sum c tr(w(A))`` along the right-translated tangent of ``u``."""
    mats, inv = u.base.mats, u.base.inverses
    return sum(
        c * np.trace(evaluate_cocycle_on_word(u.values, mats, w, inv) @ evaluate_word(w, mats, inv)) for c, w in f
    )


@dataclass
class SliceData:
    bases: CohomologyBases
    pairing: PairingMatrix
    inverse: np.ndarray


def slice_data(point: RepPoint, twist: CentralTwist, chain: TwoChain | None = None, min_sv: float = 1e-6) -> SliceData:
    bases = cohomology_bases(point, twist)
    if bases.summary.dimH0 != point.spec.center_dim:
        raise StratumError(
            f"stabilizer dimension {bases.summary.dimH0} exceeds the center; use orbit_type_label"
        )
    pm = pairing_matrix(bases, chain)
    if pm.min_singular_value <= min_sv:
        raise StratumError(f"degenerate slice pairing (smallest singular value {pm.min_singular_value:.3e})")
    inverse = np.linalg.inv(pm.gram)
    return SliceData(bases, pm, 0.5 * (inverse - inverse.T))


def bracket_from_differentials(df: np.ndarray, dh: np.ndarray, inverse: np.ndarray) -> complex:
    # written as a difference so that swapping df and dh flips the sign exactly
    return complex(0.5 * (df @ inverse @ dh - dh @ inverse @ df))


def reduced_bracket(f, h, point: RepPoint, twist: CentralTwist, chain: TwoChain | None = None, data: SliceData | None = None) -> complex:
    """Poisson bracket of two invariant trace functions on the smooth stratum.

    ``{f, h} = df^T G^{-1} dh`` with ``G`` the slice pairing Gram matrix on the
    Hermitian complement of the coboundaries.
    """
    data = data or slice_data(point, twist, chain)
    cocycles = data.pairing.basis
    df = np.array([trace_function_differential(f, u) for u in cocycles])
    dh = np.array([trace_function_differential(h, u) for u in cocycles])
    return bracket_from_differentials(df, dh, data.inverse)


def fiber_curve(point: RepPoint, tangent: np.ndarray, t: float, twist: CentralTwist) -> RepPoint:
    """Retraction of ``A exp(t A^{-1} v)`` back onto the fiber."""
    moved = point.moved(tangent, t)
    cfg = SamplerConfig(tol=1e-13, max_iter=50)
    return project_to_fiber(point.spec, moved.mats, twist, cfg)


def slice_gradient(func, point: RepPoint, twist: CentralTwist, cocycles, step: float = 1e-3) -> np.ndarray:
    """Derivatives of an invariant function ``func(point)`` along slice directions.

    Uses five-point central differences along fiber curves; ``func`` only needs
    to be defined on the fiber.
    """
    out = []
    for u in cocycles:
        tangent = u.tangent()

        def g(t):
            return func(fiber_curve(point, tangent, t, twist))

        out.append((-g(2 * step) + 8 * g(step) - 8 * g(-step) + g(-2 * step)) / (12 * step))
    return np.array(out)


def jacobiator(f, g, h, point: RepPoint, twist: CentralTwist, chain: TwoChain | None = None, step: float = 1e-3) -> complex:
    """``{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`` at a smooth fiber point."""
    data = slice_data(point, twist, chain)
    cocycles = data.pairing.basis

    def d(fn):
        return np.array([trace_function_differential(fn, u) for u in cocycles])

    def inner(a, b):
        return lambda q: reduced_bracket(a, b, q, twist, chain)

    total = 0j
    for a, b, c in ((f, g, h), (g, h, f), (h, f, g)):
        total += bracket_from_differentials(d(a), slice_gradient(inner(b, c), point, twist, cocycles, step), data.inverse)
    return total
