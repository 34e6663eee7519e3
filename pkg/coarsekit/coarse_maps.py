"""
coarse_maps.py

Total maps between coarse unions and their quantitative invariants.

A CoarseMapTable stores one image PointRef per domain point and, on
construction, caches the expansion modulus ω(r) at every realized domain
distance and the finite-to-one bound m = max_y |f^{-1}(y)|. Every supremum the
theory talks about is a maximum over the finite truncation, and every report
carries the truncation length (number of domain components) so "eventual"
statements read as "stable over the observed tail".
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from coarsekit.errors import DomainMismatch, PointOutOfRange
from coarsekit.metric_core import CoarseUnion, PointRef

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CoarseMapTable:
    domain: CoarseUnion
    codomain: CoarseUnion
    image: Tuple[PointRef, ...]
    moduli: Dict[int, int] = field(init=False, repr=False)
    fiber_bound: int = field(init=False)

    def __post_init__(self):
        if len(self.image) != self.domain.size:
            raise PointOutOfRange(
                f"map lists {len(self.image)} images for {self.domain.size} domain points"
            )
        image = tuple(PointRef(int(c), int(p)) for c, p in self.image)
        indices = np.array([self.codomain.index(ref) for ref in image], dtype=np.int64)
        indices.setflags(write=False)
        object.__setattr__(self, "image", image)
        object.__setattr__(self, "_indices", indices)
        object.__setattr__(self, "moduli", _moduli_table(self.domain, self.codomain, indices))
        counts = np.bincount(indices, minlength=self.codomain.size)
        object.__setattr__(self, "fiber_bound", int(counts.max()) if len(indices) else 0)
        log.debug("[map] %d points, fiber bound %d", len(image), self.fiber_bound)

    @classmethod
    def from_indices(cls, domain: CoarseUnion, codomain: CoarseUnion, indices: Sequence[int]) -> "CoarseMapTable":
        return cls(domain, codomain, tuple(codomain.ref(int(i)) for i in indices))

    @classmethod
    def from_function(
        cls, domain: CoarseUnion, codomain: CoarseUnion, fn: Callable[[PointRef], Sequence[int]]
    ) -> "CoarseMapTable":
        return cls(domain, codomain, tuple(PointRef(*fn(ref)) for ref in domain.points()))

    @classmethod
    def identity(cls, union: CoarseUnion) -> "CoarseMapTable":
        return cls(union, union, tuple(union.points()))

    @property
    def indices(self) -> np.ndarray:
        """Global codomain index of each domain point, in domain order."""
        return self._indices

    @property
    def truncation(self) -> int:
        return len(self.domain)

    def __call__(self, ref: Sequence[int]) -> PointRef:
        return self.image[self.domain.index(ref)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoarseMapTable):
            return NotImplemented
        return self.domain == other.domain and self.codomain == other.codomain and self.image == other.image

    def __hash__(self) -> int:
        return hash(self.image)

    def fiber_sizes(self) -> np.ndarray:
        return np.bincount(self._indices, minlength=self.codomain.size)

    def preimage(self, points) -> FrozenSet[PointRef]:
        wanted = {self.codomain.index(p) for p in points}
        return frozenset(self.domain.ref(i) for i, y in enumerate(self._indices) if int(y) in wanted)

    def is_injective(self) -> bool:
        return self.fiber_bound <= 1

    def is_bijective(self) -> bool:
        return self.is_injective() and self.domain.size == self.codomain.size


def _moduli_table(domain: CoarseUnion, codomain: CoarseUnion, indices: np.ndarray) -> Dict[int, int]:
    dx = domain.as_space().dist
    dy = codomain.as_space().dist[np.ix_(indices, indices)]
    radii = np.unique(dx)
    # best[j] = max d(fx, fz) over pairs at exactly radii[j], then a running max
    position = np.searchsorted(radii, dx)
    best = np.zeros(len(radii), dtype=np.int64)
    np.maximum.at(best, position.ravel(), dy.ravel())
    best = np.maximum.accumulate(best)
    return {int(r): int(w) for r, w in zip(radii, best)}


def expansion_modulus(f: CoarseMapTable, r: int) -> int:
    """ω(r) = max{d(fx, fz) : d(x, z) <= r} over the truncation."""
    if r < 0:
        return 0
    realized = [radius for radius in f.moduli if radius <= r]
    return f.moduli[max(realized)] if realized else 0


def moduli(f: CoarseMapTable, upto: Optional[int] = None) -> Dict[int, int]:
    if upto is None:
        return dict(f.moduli)
    return {r: expansion_modulus(f, r) for r in range(upto + 1)}


def _same_ends(f: CoarseMapTable, g: CoarseMapTable) -> None:
    if f.domain != g.domain or f.codomain != g.codomain:
        raise DomainMismatch("maps must share domain and codomain")


def closeness(f: CoarseMapTable, g: CoarseMapTable) -> int:
    """max_x d(f x, g x)."""
    _same_ends(f, g)
    if f.domain.size == 0:
        return 0
    dy = f.codomain.as_space().dist
    return int(dy[f.indices, g.indices].max())


def finite_to_one_bound(f: CoarseMapTable) -> int:
    return f.fiber_bound


def compose(f: CoarseMapTable, g: CoarseMapTable) -> CoarseMapTable:
    """g ∘ f."""
    if f.codomain != g.domain:
        raise DomainMismatch("codomain of the first map must be the domain of the second")
    return CoarseMapTable.from_indices(f.domain, g.codomain, g.indices[f.indices])


def inverse_table(f: CoarseMapTable) -> CoarseMapTable:
    """The inverse of a bijective table."""
    if not f.is_bijective():
        raise DomainMismatch("only bijective tables have an inverse table")
    inverse = np.empty(f.domain.size, dtype=np.int64)
    inverse[f.indices] = np.arange(f.domain.size)
    return CoarseMapTable.from_indices(f.codomain, f.domain, inverse)


@dataclass(frozen=True)
class CoarseEquivalenceReport:
    truncation: int
    radius: int
    moduli_f: Dict[int, int]
    moduli_g: Dict[int, int]
    back_and_forth_domain: int
    back_and_forth_codomain: int
    consistent: bool


def verify_coarse_equivalence(f: CoarseMapTable, g: CoarseMapTable, radius: int) -> CoarseEquivalenceReport:
    """Moduli of f and g up to `radius` and the closeness of g∘f, f∘g to the identities.

    On a finite truncation all four quantities are finite, so the verdict only
    says the data is consistent with a coarse equivalence at this scale.
    """
    if g.domain != f.codomain or g.codomain != f.domain:
        raise DomainMismatch("g must map the codomain of f back to its domain")
    there = closeness(compose(f, g), CoarseMapTable.identity(f.domain))
    back = closeness(compose(g, f), CoarseMapTable.identity(f.codomain))
    table_f = moduli(f, radius)
    table_g = moduli(g, radius)
    realized = set(f.moduli) == set(f.domain.as_space().realized_distances()) and set(g.moduli) == set(
        g.domain.as_space().realized_distances()
    )
    return CoarseEquivalenceReport(
        truncation=f.truncation,
        radius=radius,
        moduli_f=table_f,
        moduli_g=table_g,
        back_and_forth_domain=there,
        back_and_forth_codomain=back,
        consistent=realized,
    )


@dataclass(frozen=True)
class RoutingReport:
    truncation: int
    routes: Tuple[FrozenSet[int], ...]
    n0: Optional[int]
    index_map: Dict[int, int]


def component_routing(f: CoarseMapTable) -> RoutingReport:
    """R(n) = {m : f(X_n) meets Y_m}, and the least n0 with |R(n)| = 1 for all n >= n0."""
    routes: List[FrozenSet[int]] = []
    for c in range(len(f.domain)):
        lo, hi = f.domain.offset(c), f.domain.offset(c) + f.domain.components[c].n
        routes.append(frozenset(f.image[i].component for i in range(lo, hi)))
    n0: Optional[int] = len(routes)
    while n0 > 0 and len(routes[n0 - 1]) == 1:
        n0 -= 1
    if n0 == len(routes) and routes:
        n0 = None
    index_map = {} if n0 is None else {c: next(iter(routes[c])) for c in range(n0, len(routes))}
    return RoutingReport(truncation=len(routes), routes=tuple(routes), n0=n0, index_map=index_map)


def pseudo_inverse(f: CoarseMapTable) -> CoarseMapTable:
    """g(y) = the least domain point x minimizing d(f x, y)."""
    dy = f.codomain.as_space().dist
    # rows: codomain points, columns: domain points in PointRef order
    spread = dy[:, f.indices]
    return CoarseMapTable.from_indices(f.codomain, f.domain, np.argmin(spread, axis=1))
