"""Matrix kernel for GL(n, C) and SL(n, C).

Group elements, Lie algebra elements and tangent vectors are plain complex
numpy arrays of shape ``(n, n)``.  Tangent vectors are stored as ambient
matrices at their base point; translating them to the identity is done
explicitly by the formulas that need it.

The compact form is U(n) (resp. SU(n)); its Lie algebra consists of
anti-Hermitian matrices.  Polar decomposition is ``g = k exp(iY)`` with ``k``
unitary and ``iY`` Hermitian.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm


class Family(str, enum.Enum):
    GENERAL_LINEAR = "GeneralLinear"
    SPECIAL_LINEAR = "SpecialLinear"


class LieGroupError(ValueError):
    pass


class ChartError(LieGroupError):
    """The principal logarithm is not defined (spectrum near the branch cut)."""


class ExpOverflowError(LieGroupError):
    pass


class PolarError(LieGroupError):
    pass


class SeriesError(LieGroupError):
    pass


EXP_NORM_BOUND = 600.0
BRANCH_CUT_GUARD = 1e-8
DEXP_SERIES_BOUND = 40.0


@dataclass(frozen=True)
class GroupSpec:
    family: Family = Family.SPECIAL_LINEAR
    n: int = 2
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.n < 1:
            raise LieGroupError(f"matrix size must be positive, got {self.n}")
        if self.scale == 0:
            raise LieGroupError("trace form scale must be nonzero")

    @property
    def special(self) -> bool:
        return self.family is Family.SPECIAL_LINEAR

    @property
    def dim(self) -> int:
        """Complex dimension of the Lie algebra."""
        return self.n * self.n - (1 if self.special else 0)

    @property
    def center_dim(self) -> int:
        return 0 if self.special else 1

    @property
    def label(self) -> str:
        return ("sl" if self.special else "gl") + str(self.n)

    @classmethod
    def from_label(cls, label: str, scale: float = 1.0) -> "GroupSpec":
        label = label.strip().lower()
        if label[:2] not in ("gl", "sl") or not label[2:].isdigit():
            raise LieGroupError(f"unknown group label {label!r}")
        family = Family.GENERAL_LINEAR if label[:2] == "gl" else Family.SPECIAL_LINEAR
        return cls(family, int(label[2:]), scale)

    def identity(self) -> np.ndarray:
        return np.eye(self.n, dtype=complex)

    def algebra_basis(self) -> np.ndarray:
        """Basis of the Lie algebra as an array of shape (dim, n, n).

        gl(n) uses the matrix units; sl(n) uses off-diagonal units together
        with ``E_ii - E_{i+1,i+1}``.
        """
        n = self.n
        basis = []
        for i in range(n):
            for j in range(n):
                if i != j:
                    e = np.zeros((n, n), dtype=complex)
                    e[i, j] = 1
                    basis.append(e)
        if self.special:
            for i in range(n - 1):
                e = np.zeros((n, n), dtype=complex)
                e[i, i], e[i + 1, i + 1] = 1, -1
                basis.append(e)
        else:
            for i in range(n):
                e = np.zeros((n, n), dtype=complex)
                e[i, i] = 1
                basis.append(e)
        return np.array(basis).reshape(len(basis), n, n)

    def algebra_coords(self, x: np.ndarray) -> np.ndarray:
        """Coordinates of ``x`` in :meth:`algebra_basis` (least squares)."""
        basis = self.algebra_basis().reshape(self.dim, -1).T
        coords, *_ = np.linalg.lstsq(basis, np.asarray(x).reshape(-1), rcond=None)
        return coords

    def project_algebra(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if self.special:
            return x - np.trace(x) / self.n * np.eye(self.n)
        return x

    def check_group(self, g: np.ndarray, tol: float = 1e-10) -> None:
        g = np.asarray(g)
        if g.shape != (self.n, self.n):
            raise LieGroupError(f"expected shape {(self.n, self.n)}, got {g.shape}")
        if not np.all(np.isfinite(g)):
            raise LieGroupError("non-finite group element")
        d = np.linalg.det(g)
        if abs(d) == 0 or not np.isfinite(np.linalg.cond(g)):
            raise LieGroupError("singular group element")
        if self.special and abs(d - 1) > tol:
            raise LieGroupError(f"|det - 1| = {abs(d - 1):.3e} for SL element")

    def check_algebra(self, x: np.ndarray, tol: float = 1e-12) -> None:
        x = np.asarray(x)
        if x.shape != (self.n, self.n):
            raise LieGroupError(f"expected shape {(self.n, self.n)}, got {x.shape}")
        if self.special and abs(np.trace(x)) > tol * max(1.0, np.linalg.norm(x)):
            raise LieGroupError("sl element must be traceless")

    def check_compact(self, x: np.ndarray, tol: float = 1e-12) -> None:
        self.check_algebra(x, tol)
        x = np.asarray(x)
        if np.linalg.norm(x + x.conj().T) > tol * max(1.0, np.linalg.norm(x)):
            raise LieGroupError("compact algebra element must be anti-Hermitian")


def bracket(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def ad(g: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Adjoint action ``g x g^{-1}``."""
    return g @ x @ np.linalg.inv(g)


def mat_exp(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if not np.all(np.isfinite(x)):
        raise LieGroupError("non-finite input to mat_exp")
    norm = np.linalg.norm(x, 2)
    if norm > EXP_NORM_BOUND:
        raise ExpOverflowError(f"||X||_2 = {norm:.3e} exceeds {EXP_NORM_BOUND}")
    return expm(x)


def branch_cut_distance(g: np.ndarray) -> float:
    """Distance from the spectrum of ``g`` to the closed negative real axis."""
    ev = np.linalg.eigvals(g)
    dist = np.where(ev.real <= 0, np.abs(ev.imag), np.abs(ev))
    return float(dist.min())


def principal_log(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    dist = branch_cut_distance(g)
    if dist < BRANCH_CUT_GUARD:
        raise ChartError(f"spectrum within {dist:.3e} of the branch cut")
    out, _ = logm(g, disp=False)
    return np.asarray(out, dtype=complex)


def mat_log(g: np.ndarray, base: np.ndarray | None = None) -> np.ndarray:
    """Logarithm in the chart around ``exp(base)``, ``base`` central.

    Returns ``base + log(exp(-base) g)`` with the principal branch.
    """
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    if base is None:
        return principal_log(g)
    base = np.asarray(base, dtype=complex)
    scalar = base[0, 0]
    if np.linalg.norm(base - scalar * np.eye(n)) > 1e-12 * max(1.0, abs(scalar)):
        raise LieGroupError("chart base must be a scalar matrix")
    return base + principal_log(np.exp(-scalar) * g)


def polar(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(k, Y)`` with ``g = k exp(iY)``, ``k`` unitary, ``Y`` anti-Hermitian."""
    g = np.asarray(g, dtype=complex)
    if not np.all(np.isfinite(g)):
        raise PolarError("non-finite input")
    h = g.conj().T @ g
    h = 0.5 * (h + h.conj().T)
    s, u = np.linalg.eigh(h)
    if s.min() <= 1e-14 * max(s.max(), 1e-300):
        raise PolarError("numerically singular element")
    iy = (u * (0.5 * np.log(s))) @ u.conj().T
    k = g @ ((u * s ** -0.5) @ u.conj().T)
    return k, -1j * iy


def trace_form(x: np.ndarray, y: np.ndarray, scale: float = 1.0) -> complex:
    return scale * complex(np.einsum("ij,ji->", x, y))


def form_adjoint(x: np.ndarray, scale: float = 1.0):
    """The covector ``y -> trace_form(x, y)``; dual space identified with the algebra."""
    x = np.array(x, dtype=complex)

    def covector(y):
        return trace_form(x, y, scale)

    covector.carrier = x
    return covector


def form_gram(spec: GroupSpec) -> np.ndarray:
    basis = spec.algebra_basis()
    return np.array([[trace_form(a, b, spec.scale) for b in basis] for a in basis])


def dexp_series(x: np.ndarray, v: np.ndarray, tol: float = 1e-16, max_terms: int = 200) -> np.ndarray:
    """``T(x) v = sum_k (-ad_x)^k v / (k+1)!`` truncated at term norm ``tol``."""
    term = np.array(v, dtype=complex)
    total = term.copy()
    scale = max(1.0, np.linalg.norm(v))
    for k in range(1, max_terms):
        term = -(x @ term - term @ x) / (k + 1)
        total += term
        if np.linalg.norm(term) < tol * scale:
            return total
    raise SeriesError("dexp series did not converge")


def ad_norm_bound(x: np.ndarray) -> float:
    return 2.0 * np.linalg.norm(x - np.trace(x) / x.shape[0] * np.eye(x.shape[0]), 2)


def dexp(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Derivative ``d/dt exp(x + t v)`` at ``t = 0``, as a tangent matrix at ``exp(x)``."""
    x = np.asarray(x, dtype=complex)
    if ad_norm_bound(x) > DEXP_SERIES_BOUND:
        raise SeriesError(f"||ad_x|| bound {ad_norm_bound(x):.2e} beyond series range")
    return mat_exp(x) @ dexp_series(x, v)


def dexp_block(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Same derivative via the block-triangular exponential; valid for any ``x``."""
    n = x.shape[0]
    big = np.zeros((2 * n, 2 * n), dtype=complex)
    big[:n, :n] = x
    big[n:, n:] = x
    big[:n, n:] = v
    return mat_exp(big)[:n, n:]


def triple_product(x: np.ndarray, y: np.ndarray, z: np.ndarray, scale: float = 1.0) -> complex:
    return 0.5 * trace_form(bracket(x, y), z, scale)


def cartan_three_form(g, u, v, w, scale: float = 1.0) -> complex:
    gi = np.linalg.inv(g)
    return triple_product(gi @ u, gi @ v, gi @ w, scale)


def equivariant_one_form(x, g, v, scale: float = 1.0) -> complex:
    """``1/2 x . (omega + omega_bar)`` on the tangent vector ``v`` at ``g``."""
    gi = np.linalg.inv(g)
    return 0.5 * trace_form(x, gi @ v + v @ gi, scale)


def random_algebra(spec: GroupSpec, rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    n = spec.n
    x = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    return spread * spec.project_algebra(x)


def random_compact(spec: GroupSpec, rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    x = random_algebra(spec, rng, 1.0)
    return spread * 0.5 * (x - x.conj().T)


def random_group(spec: GroupSpec, rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    g = mat_exp(random_algebra(spec, rng, spread))
    if spec.special:
        # exp of a traceless matrix has det 1 up to rounding; remove the rounding
        g = g / np.linalg.det(g) ** (1.0 / spec.n)
    return g


def random_unitary(spec: GroupSpec, rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    return mat_exp(random_compact(spec, rng, spread))


def random_elements(spec: GroupSpec, seed: int, spread: float, kind: str = "group", count: int | None = None):
    """Deterministic samples; ``kind`` is ``group``, ``algebra`` or ``compact``."""
    if spread < 0:
        raise LieGroupError("spread must be nonnegative")
    rng = np.random.default_rng(seed)
    draw = {"group": random_group, "algebra": random_algebra, "compact": random_compact}[kind]
    if count is None:
        return draw(spec, rng, spread)
    return np.array([draw(spec, rng, spread) for _ in range(count)])
