"""
matching.py

Hall-marriage selections with deficiency certificates.

A SelectionProblem assigns each left point a finite candidate set Φ(x). A
maximum bipartite matching (Hopcroft–Karp) either covers every left point,
which is an injective selection, or leaves a left point uncovered; in the
second case the left points reachable from uncovered ones by alternating
paths (the König vertex-cover construction) form a set S with
|S| > |⋃_{x∈S} Φ(x)|, a certificate that no selection exists.

Two ways to injectivize a coarse map f are built on top:
- selection variant: Φ_r(x) = f(B(x, r)), closeness to f at most ω_f(r)
- ball variant: Φ_s(x) = B(f(x), s), which decides exactly whether an
  injective map s-close to f exists
"""

import logging
from dataclasses import dataclass
from typing import Dict, Hashable, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from coarsekit.coarse_maps import CoarseMapTable, closeness
from coarsekit.errors import Impossible, InvalidParameter, SizeMismatch
from coarsekit.metric_core import FiniteSpace, PointRef

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SelectionProblem:
    left: Tuple[Hashable, ...]
    candidates: Dict[Hashable, Tuple[Hashable, ...]]
    allow_empty: bool = False

    def __post_init__(self):
        missing = [x for x in self.left if x not in self.candidates]
        if missing:
            raise InvalidParameter(f"no candidate set for left points {missing[:5]}")
        normalized = {x: tuple(sorted(set(self.candidates[x]))) for x in self.left}
        empty = [x for x in self.left if not normalized[x]]
        if empty and not self.allow_empty:
            raise InvalidParameter(f"empty candidate sets for {empty[:5]}; pass allow_empty=True")
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "candidates", normalized)


@dataclass(frozen=True)
class Selection:
    assignment: Dict[Hashable, Hashable]


@dataclass(frozen=True)
class DeficiencyCertificate:
    subset: Tuple[Hashable, ...]
    union: Tuple[Hashable, ...]

    @property
    def union_size(self) -> int:
        return len(self.union)

    def holds_for(self, problem: SelectionProblem) -> bool:
        covered = set()
        for x in self.subset:
            covered.update(problem.candidates[x])
        return len(self.subset) > len(covered) and covered == set(self.union)


SelectionOutcome = Union[Selection, DeficiencyCertificate]


def injective_selection(problem: SelectionProblem) -> SelectionOutcome:
    """An injective φ with φ(x) ∈ Φ(x), or a Hall deficiency certificate."""
    rights = sorted({y for x in problem.left for y in problem.candidates[x]})
    right_index = {y: j for j, y in enumerate(rights)}
    top = [("L", i) for i in range(len(problem.left))]
    graph = nx.Graph()
    graph.add_nodes_from(top, bipartite=0)
    graph.add_nodes_from((("R", j) for j in range(len(rights))), bipartite=1)
    for i, x in enumerate(problem.left):
        graph.add_edges_from((("L", i), ("R", right_index[y])) for y in problem.candidates[x])
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=top)
    if all(node in matching for node in top):
        assignment = {x: rights[matching[("L", i)][1]] for i, x in enumerate(problem.left)}
        _check_selection(problem, assignment)
        return Selection(assignment)
    cover = nx.bipartite.to_vertex_cover(graph, matching, top_nodes=top)
    subset = [problem.left[i] for _, i in top if ("L", i) not in cover]
    union = sorted({y for x in subset for y in problem.candidates[x]})
    certificate = DeficiencyCertificate(tuple(subset), tuple(union))
    if not certificate.holds_for(problem):
        raise RuntimeError(f"deficiency set of size {len(subset)} does not violate Hall's condition")
    log.debug("[hall] %d left points share %d candidates", len(subset), len(union))
    return certificate


def _check_selection(problem: SelectionProblem, assignment: Dict) -> None:
    if len(set(assignment.values())) != len(assignment):
        raise RuntimeError("matching produced a non-injective selection")
    for x, y in assignment.items():
        if y not in problem.candidates[x]:
            raise RuntimeError(f"selection sends {x} outside its candidates")


@dataclass(frozen=True)
class Injectivization:
    map: CoarseMapTable
    variant: str
    radius: int
    closeness: int


def _table(f: CoarseMapTable, assignment: Dict[PointRef, PointRef]) -> CoarseMapTable:
    return CoarseMapTable(f.domain, f.codomain, tuple(assignment[x] for x in f.domain.points()))


def selection_problem(f: CoarseMapTable, r: int) -> SelectionProblem:
    """Φ_r(x) = f(B_X(x, r)) for every domain point."""
    dx = f.domain.as_space().dist
    points = f.domain.points()
    candidates = {
        x: tuple(f.image[z] for z in np.flatnonzero(dx[i] <= r)) for i, x in enumerate(points)
    }
    return SelectionProblem(tuple(points), candidates)


def injectivize_selection(f: CoarseMapTable, r: int) -> Union[Injectivization, DeficiencyCertificate]:
    """Injective g with g(x) ∈ f(B(x, r)), so closeness(g, f) <= ω_f(r)."""
    if r < 0:
        raise InvalidParameter(f"radius must be non-negative, got {r}")
    outcome = injective_selection(selection_problem(f, r))
    if isinstance(outcome, DeficiencyCertificate):
        return outcome
    g = _table(f, outcome.assignment)
    return Injectivization(g, "selection", r, closeness(g, f))


def _least_feasible(radii: Sequence[int], attempt):
    """Binary search for the least radius whose attempt succeeds (monotone)."""
    lo, hi = 0, len(radii) - 1
    last = attempt(radii[hi])
    if isinstance(last, DeficiencyCertificate):
        return None, last
    found = (radii[hi], last)
    while lo < hi:
        mid = (lo + hi) // 2
        outcome = attempt(radii[mid])
        if isinstance(outcome, DeficiencyCertificate):
            lo = mid + 1
        else:
            found = (radii[mid], outcome)
            hi = mid
    return found


def injectivize_selection_scan(f: CoarseMapTable) -> Union[Injectivization, DeficiencyCertificate]:
    """Selection variant at the least realized radius that admits a selection."""
    radii = f.domain.as_space().realized_distances()
    radius, outcome = _least_feasible(radii, lambda r: injectivize_selection(f, r))
    if radius is None:
        log.info("[injectivize] no selection at any radius up to %d", radii[-1])
    return outcome


def ball_selection(
    f: CoarseMapTable,
    s: int,
    sources: Optional[Sequence[PointRef]] = None,
    targets: Optional[Sequence[PointRef]] = None,
) -> Union[Selection, DeficiencyCertificate]:
    """Injective selection with Φ(x) = B(f(x), s) ∩ targets, x ranging over sources."""
    dy = f.codomain.as_space().dist
    sources = list(f.domain.points()) if sources is None else list(sources)
    target_idx = (
        np.arange(f.codomain.size)
        if targets is None
        else np.array(sorted(f.codomain.index(y) for y in targets), dtype=np.int64)
    )
    candidates = {}
    for x in sources:
        centre = f.indices[f.domain.index(x)]
        near = target_idx[dy[centre, target_idx] <= s]
        candidates[x] = tuple(f.codomain.ref(int(y)) for y in near)
    return injective_selection(SelectionProblem(tuple(sources), candidates, allow_empty=True))


def minimal_ball_selection(
    f: CoarseMapTable,
    sources: Optional[Sequence[PointRef]] = None,
    targets: Optional[Sequence[PointRef]] = None,
):
    """(least realized s, selection) for the ball variant, or (None, certificate)."""
    radii = f.codomain.as_space().realized_distances()
    return _least_feasible(radii, lambda s: ball_selection(f, s, sources, targets))


@dataclass(frozen=True)
class MinimalInjectivization:
    s_star: int
    map: CoarseMapTable
    closeness: int


def injectivize_minimal(f: CoarseMapTable) -> MinimalInjectivization:
    """Least s such that some injective map is s-close to f, with such a map."""
    if f.domain.size > f.codomain.size:
        raise Impossible(
            f"no injective map from {f.domain.size} points into {f.codomain.size} points"
        )
    s_star, outcome = minimal_ball_selection(f)
    if s_star is None:
        raise RuntimeError("ball selection failed at the full codomain diameter")
    g = _table(f, outcome.assignment)
    log.info("[injectivize] minimal closeness %d", s_star)
    return MinimalInjectivization(s_star, g, closeness(g, f))


def perfect_matching_pair(
    Xn: FiniteSpace,
    Yn: FiniteSpace,
    f_restricted: Sequence[int],
    r: int,
) -> Union[Selection, DeficiencyCertificate]:
    """Bijection b: Xn -> Yn with b(x) ∈ B(f(x), r), or a deficiency certificate."""
    if Xn.n != Yn.n:
        raise SizeMismatch(f"|Xn| = {Xn.n} but |Yn| = {Yn.n}")
    if len(f_restricted) != Xn.n:
        raise SizeMismatch(f"restricted map has {len(f_restricted)} values for {Xn.n} points")
    centres = Yn.check_points(f_restricted)
    candidates = {x: tuple(Yn.ball(centres[x], r)) for x in range(Xn.n)}
    return injective_selection(SelectionProblem(tuple(range(Xn.n)), candidates))
