"""
uf_homology.py

Uniformly finite 0- and 1-chains on a truncated coarse union.

Homology classes are never built. A 0-chain a vanishes at scale (t, c) when
there is a 1-chain b with ∂b = a, propagation <= t and coefficients bounded by
c; fill_chain finds the least such c as a transshipment problem solved by
max-flow, and otherwise returns the t-connected piece whose coefficients do
not sum to zero. The Whyte side of the duality, |Σ_A a| <= C·|∂_t(A)|, is
checked exhaustively per component or refuted by local search.

1-chains are stored with x < z only; a coefficient on (z, x) is folded into
(x, z) with the opposite sign, so ℓ∞ is well defined.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

import networkx as nx
import numpy as np
from networkx.algorithms.flow import dinitz

from coarsekit import config
from coarsekit.coarse_maps import CoarseMapTable, closeness
from coarsekit.enumeration import SubsetScanner, lex_less, mask_members
from coarsekit.errors import (
    DomainMismatch,
    InvalidParameter,
    PreconditionViolated,
    TooLarge,
)
from coarsekit.metric_core import CoarseUnion, PointRef

log = logging.getLogger(__name__)

Pair = Tuple[PointRef, PointRef]


def _ref(point) -> PointRef:
    return PointRef(int(point[0]), int(point[1]))


@dataclass(frozen=True)
class Chain0:
    ambient: CoarseUnion
    coefficients: Mapping[PointRef, int] = field(default_factory=dict)

    def __post_init__(self):
        merged: Dict[PointRef, int] = {}
        for point, value in dict(self.coefficients).items():
            ref = _ref(point)
            self.ambient.index(ref)
            merged[ref] = merged.get(ref, 0) + int(value)
        object.__setattr__(self, "coefficients", {p: v for p, v in sorted(merged.items()) if v})

    @classmethod
    def indicator(cls, ambient: CoarseUnion, points: Iterable) -> "Chain0":
        """[A]: coefficient 1 on every point of A."""
        return cls(ambient, {_ref(p): 1 for p in points})

    @property
    def norm(self) -> int:
        return max((abs(v) for v in self.coefficients.values()), default=0)

    @property
    def support(self) -> List[PointRef]:
        return list(self.coefficients)

    def __getitem__(self, point) -> int:
        return self.coefficients.get(_ref(point), 0)

    def _combine(self, other: "Chain0", sign: int) -> "Chain0":
        if self.ambient != other.ambient:
            raise DomainMismatch("chains live on different unions")
        total = dict(self.coefficients)
        for p, v in other.coefficients.items():
            total[p] = total.get(p, 0) + sign * v
        return Chain0(self.ambient, total)

    def __add__(self, other: "Chain0") -> "Chain0":
        return self._combine(other, 1)

    def __sub__(self, other: "Chain0") -> "Chain0":
        return self._combine(other, -1)

    def __neg__(self) -> "Chain0":
        return Chain0(self.ambient, {p: -v for p, v in self.coefficients.items()})

    def is_zero(self) -> bool:
        return not self.coefficients


@dataclass(frozen=True)
class Chain1:
    ambient: CoarseUnion
    coefficients: Mapping[Pair, int] = field(default_factory=dict)

    def __post_init__(self):
        merged: Dict[Pair, int] = {}
        for (x, z), value in dict(self.coefficients).items():
            x, z = _ref(x), _ref(z)
            self.ambient.index(x)
            self.ambient.index(z)
            if x == z:
                continue
            key, sign = ((x, z), 1) if x < z else ((z, x), -1)
            merged[key] = merged.get(key, 0) + sign * int(value)
        object.__setattr__(self, "coefficients", {k: v for k, v in sorted(merged.items()) if v})

    @property
    def norm(self) -> int:
        return max((abs(v) for v in self.coefficients.values()), default=0)

    @property
    def propagation(self) -> int:
        return max((self.ambient.distance(x, z) for x, z in self.coefficients), default=0)

    def __add__(self, other: "Chain1") -> "Chain1":
        if self.ambient != other.ambient:
            raise DomainMismatch("chains live on different unions")
        total = dict(self.coefficients)
        for k, v in other.coefficients.items():
            total[k] = total.get(k, 0) + v
        return Chain1(self.ambient, total)


@dataclass(frozen=True)
class FillingCertificate:
    chain: Chain1
    t: int
    c: int

    def fills(self, target: Chain0) -> bool:
        return (
            boundary_chain(self.chain) == target
            and self.chain.propagation <= self.t
            and self.chain.norm <= self.c
        )


@dataclass(frozen=True)
class CutObstruction:
    """A t-connected piece of the union on which the chain does not sum to zero."""

    points: Tuple[PointRef, ...]
    total: int
    t: int


def boundary_chain(b: Chain1) -> Chain0:
    """∂^h(1·(x, z)) = 1·x − 1·z, extended linearly."""
    out: Dict[PointRef, int] = {}
    for (x, z), value in b.coefficients.items():
        out[x] = out.get(x, 0) + value
        out[z] = out.get(z, 0) - value
    return Chain0(b.ambient, out)


def pushforward(f: CoarseMapTable, a: Chain0) -> Chain0:
    """(f_* a)_y = Σ_{f(x) = y} a_x."""
    if a.ambient != f.domain:
        raise DomainMismatch("chain does not live on the domain of the map")
    out: Dict[PointRef, int] = {}
    for x, value in a.coefficients.items():
        y = f(x)
        out[y] = out.get(y, 0) + value
    return Chain0(f.codomain, out)


def pushforward_chain1(f: CoarseMapTable, b: Chain1) -> Chain1:
    if b.ambient != f.domain:
        raise DomainMismatch("chain does not live on the domain of the map")
    out: Dict[Pair, int] = {}
    for (x, z), value in b.coefficients.items():
        key = (f(x), f(z))
        out[key] = out.get(key, 0) + value
    return Chain1(f.codomain, out)


def component_sums(a: Chain0) -> List[int]:
    sums = [0] * len(a.ambient)
    for point, value in a.coefficients.items():
        sums[point.component] += value
    return sums


def cut_size(ambient: CoarseUnion, A: Iterable, t: int) -> int:
    """#{unordered {x, z} : x ∈ A, z ∉ A, d(x, z) <= t}."""
    dist = ambient.as_space().dist
    inside = np.zeros(ambient.size, dtype=bool)
    for p in A:
        inside[ambient.index(p)] = True
    return int((dist[np.ix_(inside, ~inside)] <= t).sum())


@dataclass(frozen=True)
class WhyteReport:
    component: int
    t: int
    c_star: Fraction
    witness: Optional[Tuple[PointRef, ...]]
    infinite_obstruction: bool
    obstruction_set: Optional[Tuple[PointRef, ...]]


def whyte_check_exact(a: Chain0, t: int, component: int, cap: Optional[int] = None) -> WhyteReport:
    """max over A ⊆ X_n with ∂_t(A) ≠ ∅ of |Σ_A a| / |∂_t(A)|.

    Subsets with empty boundary and nonzero sum cannot satisfy any constant;
    they are reported as an infinite obstruction.
    """
    ambient = a.ambient
    if t < 1:
        raise InvalidParameter(f"boundary radius must be positive, got {t}")
    if not 0 <= component < len(ambient):
        raise InvalidParameter(f"component {component} outside 0..{len(ambient) - 1}")
    members = ambient.points(component)
    limit = config.exact_cap(cap)
    if len(members) > limit:
        raise TooLarge(len(members), limit, "use whyte_falsify")
    dist = ambient.as_space().dist
    positions = [ambient.index(p) for p in members]
    reach = [[int(z) for z in np.flatnonzero(dist[i] <= t) if z != i] for i in positions]
    weights = [a[p] for p in members]
    best: Optional[Fraction] = None
    best_set: Optional[Tuple[PointRef, ...]] = None
    blocked: Optional[Tuple[PointRef, ...]] = None
    for state in SubsetScanner(reach, ambient.size, positions=positions, weights=weights):
        if state.size == 0:
            continue
        if state.boundary == 0:
            if state.weight != 0:
                here = mask_members(state.mask, members)
                if lex_less(here, blocked):
                    blocked = here
            continue
        ratio = Fraction(abs(state.weight), state.boundary)
        if best is None or ratio > best:
            best, best_set = ratio, mask_members(state.mask, members)
        elif ratio == best:
            here = mask_members(state.mask, members)
            if lex_less(here, best_set):
                best_set = here
    best = best if best is not None else Fraction(0)
    if best == 0:
        best_set = None
    log.info("[whyte] component %d, t=%d: C* = %s%s", component, t, best, " (blocked)" if blocked else "")
    return WhyteReport(component, t, best, best_set, blocked is not None, blocked)


def whyte_falsify(
    a: Chain0,
    t: int,
    C: Union[Fraction, int, str],
    budget: int = 2000,
    seed: int = 0,
    component: Optional[int] = None,
) -> Optional[Tuple[PointRef, ...]]:
    """Search for A with |Σ_A a| > C·|∂_t(A)|; None proves nothing."""
    C = Fraction(C)
    if budget <= 0:
        return None
    ambient = a.ambient
    dist = ambient.as_space().dist
    pool = ambient.points(component) if component is not None else ambient.points()
    allowed = {ambient.index(p) for p in pool}
    weight = np.zeros(ambient.size, dtype=np.int64)
    for p, v in a.coefficients.items():
        weight[ambient.index(p)] = v
    rng = np.random.default_rng(seed)

    def excess(members: FrozenSet[int]) -> Fraction:
        if not members:
            return Fraction(0)
        idx = sorted(members)
        near = (dist[:, idx] <= t).any(axis=1)
        near[idx] = False
        return abs(int(weight[idx].sum())) - C * int(near.sum())

    starts: List[FrozenSet[int]] = []
    positive = frozenset(i for i in allowed if weight[i] > 0)
    negative = frozenset(i for i in allowed if weight[i] < 0)
    starts.extend(s for s in (positive, negative) if s)
    steps = 0
    candidates = sorted(allowed)
    while steps < budget:
        if starts:
            current = starts.pop(0)
        else:
            centre = candidates[int(rng.integers(len(candidates)))]
            radius = int(rng.integers(0, max(1, int(dist[centre, candidates].max())) + 1))
            current = frozenset(i for i in candidates if dist[centre, i] <= radius)
        score = excess(current)
        steps += 1
        while score <= 0 and steps < budget:
            moves = sorted(allowed)
            best_move, best_score = None, score
            for idx in rng.permutation(len(moves)):
                if steps >= budget:
                    break
                i = moves[idx]
                trial = current - {i} if i in current else current | {i}
                trial_score = excess(trial)
                steps += 1
                if trial_score > best_score:
                    best_move, best_score = trial, trial_score
                    break
            if best_move is None:
                break
            current, score = best_move, best_score
        if score > 0:
            witness = tuple(sorted(ambient.ref(i) for i in current))
            log.info("[whyte] refuted C=%s with |A|=%d after %d steps", C, len(witness), steps)
            return witness
    return None


def _t_pairs(ambient: CoarseUnion, t: int) -> np.ndarray:
    dist = ambient.as_space().dist
    return np.argwhere(np.triu(dist <= t, 1))


def _flow_network(a: Chain0, t: int, c: int, pairs: np.ndarray) -> Tuple[nx.DiGraph, int]:
    ambient = a.ambient
    network = nx.DiGraph()
    network.add_nodes_from(["source", "sink"])
    network.add_nodes_from(range(ambient.size))
    supply = 0
    for p, v in a.coefficients.items():
        i = ambient.index(p)
        if v > 0:
            network.add_edge("source", i, capacity=v)
            supply += v
        else:
            network.add_edge(i, "sink", capacity=-v)
    for x, z in pairs:
        network.add_edge(int(x), int(z), capacity=c)
        network.add_edge(int(z), int(x), capacity=c)
    return network, supply


def _solve(a: Chain0, t: int, c: int, pairs: np.ndarray) -> Optional[Chain1]:
    network, supply = _flow_network(a, t, c, pairs)
    value, flow = nx.maximum_flow(network, "source", "sink", flow_func=dinitz)
    if value < supply:
        return None
    ambient = a.ambient
    net: Dict[Pair, int] = {}
    for x, z in pairs:
        x, z = int(x), int(z)
        moved = flow[x][z] - flow[z][x]
        if moved:
            net[(ambient.ref(x), ambient.ref(z))] = moved
    return Chain1(ambient, net)


def fill_chain(a: Chain0, t: int) -> Union[FillingCertificate, CutObstruction]:
    """Least c with a 1-chain b, ∂b = a, propagation <= t, ℓ∞(b) <= c.

    Node divergences a_x, capacity c on every pair at distance <= t in both
    directions; feasibility is a max-flow saturating the super-source, and c is
    binary searched over [0, Σ|a_x|].
    """
    if t < 1:
        raise InvalidParameter(f"propagation bound must be positive, got {t}")
    ambient = a.ambient
    pairs = _t_pairs(ambient, t)
    scale_graph = nx.Graph()
    scale_graph.add_nodes_from(range(ambient.size))
    scale_graph.add_edges_from((int(x), int(z)) for x, z in pairs)
    for piece in sorted(nx.connected_components(scale_graph), key=min):
        total = sum(a[ambient.ref(i)] for i in piece)
        if total:
            points = tuple(sorted(ambient.ref(i) for i in piece))
            log.info("[fill] obstruction: %d points at scale %d sum to %d", len(points), t, total)
            return CutObstruction(points, total, t)
    if a.is_zero():
        return FillingCertificate(Chain1(ambient), t, 0)
    lo, hi = 1, sum(abs(v) for v in a.coefficients.values())
    best = _solve(a, t, hi, pairs)
    if best is None:
        raise RuntimeError("transshipment infeasible at the total-mass bound")
    while lo < hi:
        mid = (lo + hi) // 2
        chain = _solve(a, t, mid, pairs)
        if chain is None:
            lo = mid + 1
        else:
            best, hi = chain, mid
    certificate = FillingCertificate(best, t, lo)
    if not certificate.fills(a):
        raise RuntimeError("max-flow filling does not reproduce the chain")
    log.info("[fill] t=%d: minimal coefficient bound %d", t, lo)
    return certificate


def target_chain(f: CoarseMapTable, Z: Iterable) -> Chain0:
    """a^Z = [Z] − f_*[X]: 1 − |f^{-1}(y)| on Z, −|f^{-1}(y)| off Z."""
    fibers = f.fiber_sizes()
    out: Dict[PointRef, int] = {_ref(z): 1 for z in Z}
    for i, count in enumerate(fibers):
        if count:
            y = f.codomain.ref(i)
            out[y] = out.get(y, 0) - int(count)
    return Chain0(f.codomain, out)


def injectivity_obstruction(
    f: CoarseMapTable, Z: Iterable, t: int, component: int, cap: Optional[int] = None
) -> WhyteReport:
    """max over A ⊆ Y_n of ||A ∩ Z| − |f^{-1}(A)|| / |∂_t(A)|."""
    return whyte_check_exact(target_chain(f, Z), t, component, cap=cap)


def build_target_set(f: CoarseMapTable, n0: int) -> FrozenSet[PointRef]:
    """Z = ⊔_{n>=n0} Z_n with |Z_n| = |f^{-1}(Y_n)| and f(f^{-1}(Y_n)) ⊆ Z_n.

    Z_n is the image inside Y_n padded with the least non-image points.
    """
    codomain = f.codomain
    chosen: List[PointRef] = []
    for n in range(n0, len(codomain)):
        members = codomain.points(n)
        hit_set = {y for y in f.image if y.component == n}
        hit = sorted(hit_set)
        wanted = sum(1 for y in f.image if y.component == n)
        if wanted > len(members):
            raise PreconditionViolated(n, f"|f^-1(Y_n)| = {wanted} exceeds |Y_n| = {len(members)}")
        padding = [y for y in members if y not in hit_set][: wanted - len(hit)]
        chosen.extend(hit + padding)
    return frozenset(chosen)


def homotopy_filling(f: CoarseMapTable, g: CoarseMapTable, a: Chain0) -> FillingCertificate:
    """Fill f_* a − g_* a by b = Σ a_x·(f(x), g(x)).

    Propagation is at most closeness(f, g). A pair (u, v) collects a_x from
    points with f(x) = u and, folded with opposite sign, from points with
    f(x) = v, so the coefficient bound is at most 2·ℓ∞(a)·m_f.
    """
    s = closeness(f, g)
    terms: Dict[Pair, int] = {}
    for x, value in a.coefficients.items():
        key = (f(x), g(x))
        terms[key] = terms.get(key, 0) + value
    chain = Chain1(f.codomain, terms)
    certificate = FillingCertificate(chain, max(s, 1), chain.norm)
    if not certificate.fills(pushforward(f, a) - pushforward(g, a)):
        raise RuntimeError("pairing chain does not fill the difference of pushforwards")
    return certificate
