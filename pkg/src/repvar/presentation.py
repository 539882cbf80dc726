"""Free-group words, the surface relator, the fundamental 2-chain and central twists.

A word is a tuple of nonzero integers: ``k`` stands for generator ``k`` and
``-k`` for its inverse, with generators numbered ``1..2g`` in the order
``x1, y1, x2, y2, ...``.  Words are kept unreduced unless :func:`reduce_word`
is called explicitly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .liegroup import GroupSpec, LieGroupError

Word = tuple


class PresentationError(ValueError):
    pass


class UnsupportedTwist(LieGroupError):
    pass


def reduce_word(w) -> tuple:
    out: list[int] = []
    for letter in w:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def invert_word(w) -> tuple:
    return tuple(-letter for letter in reversed(w))


def word_to_str(w) -> str:
    if not w:
        return "e"
    names = []
    for letter in w:
        j = (abs(letter) + 1) // 2
        name = ("x" if abs(letter) % 2 == 1 else "y") + str(j)
        names.append(name if letter > 0 else name + "^-1")
    return "*".join(names)


@dataclass(frozen=True)
class SurfacePresentation:
    genus: int
    relator: tuple = field(init=False)

    def __post_init__(self):
        if self.genus < 1:
            raise PresentationError("genus must be at least 1")
        rel = []
        for j in range(self.genus):
            x, y = 2 * j + 1, 2 * j + 2
            rel += [x, y, -x, -y]
        object.__setattr__(self, "relator", tuple(rel))

    @property
    def num_generators(self) -> int:
        return 2 * self.genus

    def exponent_sums(self) -> dict:
        sums = Counter()
        for letter in self.relator:
            sums[abs(letter)] += 1 if letter > 0 else -1
        return {k: sums[k] for k in range(1, self.num_generators + 1)}


def build_presentation(genus: int) -> SurfacePresentation:
    return SurfacePresentation(genus)


def evaluate_word(w, mats: np.ndarray, inverses: np.ndarray | None = None) -> np.ndarray:
    """Product of ``mats[k-1]^{+-1}`` along the letters of ``w``."""
    n = mats.shape[-1]
    if inverses is None:
        inverses = np.linalg.inv(mats)
    out = np.eye(n, dtype=complex)
    for letter in w:
        out = out @ (mats[letter - 1] if letter > 0 else inverses[-letter - 1])
    return out


def word_differential(w, mats: np.ndarray, tangent: np.ndarray, inverses: np.ndarray | None = None) -> np.ndarray:
    """Derivative of :func:`evaluate_word` along the tangent tuple (product rule)."""
    n = mats.shape[-1]
    if inverses is None:
        inverses = np.linalg.inv(mats)
    value = np.eye(n, dtype=complex)
    deriv = np.zeros((n, n), dtype=complex)
    for letter in w:
        if letter > 0:
            m, dm = mats[letter - 1], tangent[letter - 1]
        else:
            m = inverses[-letter - 1]
            dm = -m @ tangent[-letter - 1] @ m
        deriv = deriv @ m + value @ dm
        value = value @ m
    return deriv


@dataclass(frozen=True)
class TwoChain:
    """Formal integer combination of pairs of words."""

    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((int(c), tuple(a), tuple(b)) for c, a, b in self.terms))

    def __neg__(self):
        return TwoChain(tuple((-c, a, b) for c, a, b in self.terms))

    def to_json(self) -> list:
        return [[c, list(a), list(b)] for c, a, b in self.terms]

    @classmethod
    def from_json(cls, data) -> "TwoChain":
        return cls(tuple((int(c), tuple(int(x) for x in a), tuple(int(x) for x in b)) for c, a, b in data))


def bar_boundary(c: TwoChain) -> Counter:
    """Boundary ``d(a, b) = [b] - [ab] + [a]`` on reduced words."""
    total = Counter()
    for coeff, a, b in c.terms:
        total[reduce_word(b)] += coeff
        total[reduce_word(a + b)] -= coeff
        total[reduce_word(a)] += coeff
    return Counter({w: m for w, m in total.items() if m != 0})


def chain_orientation(c: TwoChain, pres: SurfacePresentation) -> int | None:
    """Sign ``eps`` with ``d c = eps [r] + m [e]``, or ``None`` if there is none."""
    boundary = bar_boundary(c)
    boundary.pop((), None)
    rel = reduce_word(pres.relator)
    if set(boundary) != {rel}:
        return None
    eps = boundary[rel]
    return eps if eps in (1, -1) else None


def verify_two_chain(c: TwoChain, pres: SurfacePresentation) -> bool:
    return chain_orientation(c, pres) is not None


def standard_two_chain(genus: int) -> TwoChain:
    """Prefix chain of the relator with inverse-letter corrections.

    With ``r = z_1 ... z_N`` and prefixes ``w_k``, the chain is
    ``-sum_k (w_{k-1}, z_k) + sum_{g^-1 in r} (g^-1, g)``, whose bar boundary is
    ``[r] - 2g [e]``.  The overall sign makes the relator orientation +1.
    """
    rel = build_presentation(genus).relator
    terms = [(-1, rel[: k - 1], (rel[k - 1],)) for k in range(2, len(rel) + 1)]
    terms += [(1, (letter,), (-letter,)) for letter in rel if letter < 0]
    return TwoChain(tuple(terms))


@dataclass(frozen=True)
class CentralTwist:
    spec: GroupSpec
    degree: int = 0

    def __post_init__(self):
        if self.spec.special and self.degree != 0:
            raise UnsupportedTwist(
                "the compact center of su(n) is zero; only degree 0 is allowed for SpecialLinear"
            )

    @property
    def theta(self) -> float:
        return 2 * np.pi * self.degree / self.spec.n

    @property
    def X(self) -> np.ndarray:
        return 1j * self.theta * np.eye(self.spec.n)

    @property
    def target(self) -> np.ndarray:
        """``exp(X)``, a central unitary scalar matrix."""
        return np.exp(1j * self.theta) * np.eye(self.spec.n)


def central_twist(spec: GroupSpec, degree: int = 0) -> CentralTwist:
    return CentralTwist(spec, degree)
