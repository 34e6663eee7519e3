"""
expansion.py

Vertex expansion of finite graphs, exact and search-based.

A finite graph X of max degree <= k is a (k, h)-expander when
|∂A| >= h·(1 - |A|/|X|)·|A| for every A ⊆ X. `cheeger_exact` computes the best
such h by walking every subset; beyond the enumeration cap only refutation is
possible, which `falsify_expander` does by seeded local search. A found
witness is always re-checked exactly before it is returned.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from coarsekit import config
from coarsekit.enumeration import SubsetScanner, lex_less, mask_members
from coarsekit.errors import (
    EmptyRange,
    EmptySet,
    FullSet,
    InvalidParameter,
    NotBipartite,
    TooLarge,
    UnequalSides,
)
from coarsekit.metric_core import FiniteSpace, GraphSpace

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 2000

EXACT = "exact"
FALSIFIED = "falsified"
ESTIMATED = "estimated"


@dataclass(frozen=True)
class ExpanderCertificate:
    n: int
    k: int
    h_star: Fraction
    witness: Tuple[int, ...]
    method: str
    h_half: Optional[Fraction] = None
    half_witness: Optional[Tuple[int, ...]] = None


@dataclass(frozen=True)
class ExpanderWitness:
    """Either a subset with ratio below h or a vertex of too high degree."""

    subset: Optional[Tuple[int, ...]] = None
    ratio: Optional[Fraction] = None
    degree_vertex: Optional[int] = None


@dataclass(frozen=True)
class ExpanderVerdict:
    holds: bool
    k: int
    h: Fraction
    method: str
    witness: Optional[ExpanderWitness] = None
    certificate: Optional[ExpanderCertificate] = None


@dataclass(frozen=True)
class ExpansionProfile:
    r: int
    full: Fraction
    half: Optional[Fraction]
    half_witness: Optional[Tuple[int, ...]]


def _boundary_size(graph: GraphSpace, members: Iterable[int]) -> int:
    inside = set(members)
    return len({v for x in inside for v in graph.neighbors[x]} - inside)


def expansion_ratio(graph: GraphSpace, A: Iterable[int]) -> Fraction:
    """|∂A| / ((1 - |A|/|X|)·|A|), exactly."""
    members = set(graph.metric.check_points(A))
    if not members:
        raise EmptySet("expansion ratio of the empty set is undefined")
    if len(members) == graph.n:
        raise FullSet("expansion ratio of the whole graph is undefined")
    a = len(members)
    return Fraction(_boundary_size(graph, members) * graph.n, (graph.n - a) * a)


def _check_cap(size: int, cap: Optional[int], advice: str = "") -> int:
    limit = config.exact_cap(cap)
    if size > limit:
        raise TooLarge(size, limit, advice)
    return limit


def cheeger_exact(graph: GraphSpace, cap: Optional[int] = None) -> ExpanderCertificate:
    """Minimal expansion ratio over all nonempty proper subsets.

    Ties go to the lexicographically least subset. Also records the
    half-restricted statistic min_{0<|A|<=n/2} |∂A|/|A|.
    """
    n = graph.n
    _check_cap(n, cap, "use falsify_expander for larger graphs")
    if n < 2:
        raise InvalidParameter("expansion needs at least two vertices")
    labels = list(range(n))
    best_num = best_den = None
    best_set = None
    half_num = half_den = None
    half_set = None
    log.info("[cheeger] exhaustive scan over %d subsets of '%s'", 1 << n, graph.name)
    for state in SubsetScanner(graph.neighbors, n):
        a = state.size
        if a == 0 or a == n:
            continue
        num, den = state.boundary * n, (n - a) * a
        if best_num is None or num * best_den < best_num * den:
            best_num, best_den, best_set = num, den, mask_members(state.mask, labels)
        elif num * best_den == best_num * den:
            members = mask_members(state.mask, labels)
            if lex_less(members, best_set):
                best_set = members
        if 2 * a <= n:
            if half_num is None or state.boundary * half_den < half_num * a:
                half_num, half_den = state.boundary, a
                half_set = mask_members(state.mask, labels)
            elif state.boundary * half_den == half_num * a:
                members = mask_members(state.mask, labels)
                if lex_less(members, half_set):
                    half_set = members
    return ExpanderCertificate(
        n=n,
        k=graph.max_degree,
        h_star=Fraction(best_num, best_den),
        witness=best_set,
        method=EXACT,
        h_half=Fraction(half_num, half_den) if half_num is not None else None,
        half_witness=half_set,
    )


def _degree_witness(graph: GraphSpace, k: int) -> Optional[ExpanderWitness]:
    if graph.max_degree <= k:
        return None
    vertex = min(x for x in range(graph.n) if len(graph.neighbors[x]) == graph.max_degree)
    return ExpanderWitness(degree_vertex=vertex)


def _local_search(
    graph: GraphSpace,
    budget: int,
    seed: int,
    stop_below: Optional[Fraction] = None,
) -> Tuple[Optional[Fraction], Optional[Tuple[int, ...]]]:
    """Hill-climb on the expansion ratio from random BFS balls and arcs."""
    n = graph.n
    if n < 2 or budget <= 0:
        return None, None
    rng = np.random.default_rng(seed)
    nxg = graph.to_networkx()
    best_ratio: Optional[Fraction] = None
    best_set: Optional[Tuple[int, ...]] = None
    steps = 0

    def score(members: set) -> Fraction:
        a = len(members)
        return Fraction(_boundary_size(graph, members) * n, (n - a) * a)

    def offer(members: set, ratio: Fraction) -> None:
        nonlocal best_ratio, best_set
        key = tuple(sorted(members))
        if best_ratio is None or ratio < best_ratio or (ratio == best_ratio and key < best_set):
            best_ratio, best_set = ratio, key

    while steps < budget:
        start = int(rng.integers(n))
        order = [start] + [v for _, v in nx.bfs_edges(nxg, start)]
        size = int(rng.integers(1, n))
        current = set(order[:size])
        ratio = score(current)
        steps += 1
        offer(current, ratio)
        improved = True
        while improved and steps < budget:
            improved = False
            outside = {v for x in current for v in graph.neighbors[x]} - current
            moves = [("drop", x) for x in sorted(current)] + [("add", v) for v in sorted(outside)]
            for idx in rng.permutation(len(moves)):
                if steps >= budget:
                    break
                kind, v = moves[idx]
                trial = current - {v} if kind == "drop" else current | {v}
                if not trial or len(trial) == n:
                    continue
                trial_ratio = score(trial)
                steps += 1
                if trial_ratio < ratio:
                    current, ratio, improved = trial, trial_ratio, True
                    offer(current, ratio)
                    break
        if stop_below is not None and best_ratio is not None and best_ratio < stop_below:
            break
    log.debug("[falsify] %d evaluations, best ratio %s", steps, best_ratio)
    return best_ratio, best_set


def falsify_expander(
    graph: GraphSpace,
    k: int,
    h: Union[Fraction, int, str],
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> Optional[ExpanderWitness]:
    """Search for a refutation of the (k, h)-expander property.

    Returns a degree witness when max_degree > k, otherwise a subset whose
    expansion ratio is below h. None means nothing was found within the
    budget, which proves nothing.
    """
    h = Fraction(h)
    if budget <= 0:
        return None
    degree = _degree_witness(graph, k)
    if degree is not None:
        return degree
    _, candidate = _local_search(graph, budget, seed, stop_below=h)
    if candidate is None:
        return None
    ratio = expansion_ratio(graph, candidate)
    if ratio < h:
        log.info("[falsify] '%s': subset of size %d has ratio %s < %s", graph.name, len(candidate), ratio, h)
        return ExpanderWitness(subset=candidate, ratio=ratio)
    return None


def estimate_expansion(graph: GraphSpace, budget: int = DEFAULT_BUDGET, seed: int = 0) -> ExpanderCertificate:
    """Upper bound on h_star from local search (method=estimated)."""
    ratio, members = _local_search(graph, budget, seed)
    if ratio is None:
        raise InvalidParameter("estimation needs at least two vertices and a positive budget")
    return ExpanderCertificate(n=graph.n, k=graph.max_degree, h_star=ratio, witness=members, method=ESTIMATED)


def verify_expander(
    graph: GraphSpace,
    k: int,
    h: Union[Fraction, int, str],
    cap: Optional[int] = None,
    mode: str = EXACT,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> ExpanderVerdict:
    """Decide whether `graph` is a (k, h)-expander.

    mode="exact" enumerates (TooLarge beyond the cap). mode="auto" falls back
    to the falsifier beyond the cap and raises TooLarge when nothing is found,
    since only a refutation is conclusive there.
    """
    h = Fraction(h)
    if mode not in (EXACT, "auto"):
        raise InvalidParameter(f"unknown verification mode '{mode}'")
    degree = _degree_witness(graph, k)
    if degree is not None:
        return ExpanderVerdict(False, k, h, EXACT, witness=degree)
    limit = config.exact_cap(cap)
    if graph.n > limit:
        if mode == EXACT:
            raise TooLarge(graph.n, limit, "use falsify_expander or mode='auto'")
        found = falsify_expander(graph, k, h, budget=budget, seed=seed)
        if found is None:
            raise TooLarge(graph.n, limit, f"no counterexample within budget {budget}")
        return ExpanderVerdict(False, k, h, FALSIFIED, witness=found)
    certificate = cheeger_exact(graph, cap=limit)
    if certificate.h_star >= h:
        return ExpanderVerdict(True, k, h, EXACT, certificate=certificate)
    witness = ExpanderWitness(subset=certificate.witness, ratio=certificate.h_star)
    return ExpanderVerdict(False, k, h, EXACT, witness=witness, certificate=certificate)


def expansion_profile(space: Union[FiniteSpace, GraphSpace], r: int, cap: Optional[int] = None) -> ExpansionProfile:
    """min |N_r(S)|/|S| over nonempty S, and over 0 < |S| <= |X|/2."""
    if isinstance(space, GraphSpace):
        space = space.metric
    if r < 1:
        raise InvalidParameter(f"profile radius must be positive, got {r}")
    n = space.n
    _check_cap(n, cap)
    reach = [[int(z) for z in np.flatnonzero(space.dist[x] <= r) if z != x] for x in range(n)]
    labels = list(range(n))
    full: Optional[Fraction] = None
    half_num = half_den = None
    half_set = None
    for state in SubsetScanner(reach, n):
        a = state.size
        if a == 0:
            continue
        grown = a + state.boundary
        ratio = Fraction(grown, a)
        if full is None or ratio < full:
            full = ratio
        if 2 * a <= n:
            if half_num is None or grown * half_den < half_num * a:
                half_num, half_den = grown, a
                half_set = mask_members(state.mask, labels)
            elif grown * half_den == half_num * a:
                members = mask_members(state.mask, labels)
                if lex_less(members, half_set):
                    half_set = members
    half = Fraction(half_num, half_den) if half_num is not None else None
    return ExpansionProfile(r=r, full=full, half=half, half_witness=half_set)


def bipartite_expansion_exact(
    graph: GraphSpace,
    V1: Sequence[int],
    V2: Sequence[int],
    cap: Optional[int] = None,
) -> Fraction:
    """h = min over nonempty A ⊆ V1, |A| <= ⌊|V1|/2⌋ of |∂A|/|A|, minus 1."""
    left = graph.metric.check_points(V1)
    right = graph.metric.check_points(V2)
    if set(left) & set(right) or len(set(left) | set(right)) != graph.n:
        raise NotBipartite("V1 and V2 must partition the vertex set")
    side = set(left)
    for u, v in graph.edges:
        if (u in side) == (v in side):
            raise NotBipartite(f"edge ({u}, {v}) does not cross the bipartition")
    if len(left) != len(right):
        raise UnequalSides(f"|V1| = {len(left)} but |V2| = {len(right)}")
    limit = len(left) // 2
    if limit == 0:
        raise EmptyRange("no nonempty A ⊆ V1 with |A| <= |V1|/2")
    _check_cap(len(left), cap)
    reach: List[Tuple[int, ...]] = [graph.neighbors[x] for x in left]
    best: Optional[Fraction] = None
    for state in SubsetScanner(reach, graph.n, positions=left):
        if 0 < state.size <= limit:
            ratio = Fraction(state.boundary, state.size)
            if best is None or ratio < best:
                best = ratio
    return best - 1
