"""
constructions.py

Generators: k-stackings, bipartite doubles, map transport between stackings
and random regular expander families.

Stacked points are labeled level-major: index (i-1)·|X| + x is the point
(x, i), levels running 1..k.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from coarsekit import config
from coarsekit.coarse_maps import CoarseMapTable
from coarsekit.errors import (
    BadLabeling,
    InfeasibleDegree,
    InvalidParameter,
    RetriesExhausted,
)
from coarsekit.expansion import (
    DEFAULT_BUDGET,
    EXACT,
    ExpanderCertificate,
    cheeger_exact,
    estimate_expansion,
)
from coarsekit.metric_core import CoarseUnion, FiniteSpace, GraphSpace, PointRef, assemble_union

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StackedSpace:
    base: FiniteSpace
    k: int
    metric: FiniteSpace

    def index(self, x: int, level: int) -> int:
        if not 1 <= level <= self.k:
            raise BadLabeling(f"level {level} outside 1..{self.k}")
        self.base.check_points([x])
        return (level - 1) * self.base.n + x

    def label(self, index: int) -> Tuple[int, int]:
        self.metric.check_points([index])
        return index % self.base.n, index // self.base.n + 1


def _stack_matrix(dist: np.ndarray, k: int) -> np.ndarray:
    n = dist.shape[0]
    across = np.kron(1 - np.eye(k, dtype=np.int64), np.ones((n, n), dtype=np.int64))
    return np.tile(dist, (k, k)) + across


def k_stack(space: FiniteSpace, k: int) -> StackedSpace:
    """d((x,i),(z,j)) = d(x,z) + 1 when i != j, checked against the metric axioms."""
    if k < 1:
        raise InvalidParameter(f"a stacking needs at least one level, got k={k}")
    name = f"{space.name}x{k}" if space.name else ""
    return StackedSpace(space, k, FiniteSpace(_stack_matrix(space.dist, k), name))


@dataclass(frozen=True)
class BipartiteDouble:
    graph: GraphSpace
    left: Tuple[int, ...]
    right: Tuple[int, ...]


def bipartite_double(graph: GraphSpace) -> BipartiteDouble:
    """(x,1) joined to (x,2) and to (z,2) for every base edge {x, z}.

    (x,1) is vertex x and (x,2) is vertex n+x.
    """
    n = graph.n
    edges = [(x, n + x) for x in range(n)]
    for x, z in graph.edges:
        edges.append((x, n + z))
        edges.append((z, n + x))
    name = f"double({graph.name})" if graph.name else ""
    double = GraphSpace.from_edges(2 * n, edges, name)
    return BipartiteDouble(double, tuple(range(n)), tuple(range(n, 2 * n)))


@dataclass(frozen=True)
class StackingReport:
    labeling_ok: bool
    distortion: Tuple[Tuple[int, int, int], ...]
    max_deviation: int
    fiber_diameter: int


def _natural_labels(n: int, k: int) -> List[Tuple[int, int]]:
    return [(x, level) for level in range(1, k + 1) for x in range(n)]


def verify_stacking(
    base: FiniteSpace,
    candidate: FiniteSpace,
    k: int,
    level_map: Optional[Sequence[Sequence[int]]] = None,
) -> StackingReport:
    """Finite-scale stacking checks.

    - the labels form a bijection with base × {1..k}
    - distortion of the level-1 inclusion: rows (d_base, min, max) of the
      candidate distance over base pairs at that distance
    - fiber diameter max_x max_{i,j} d((x,i),(x,j))
    """
    labels = _natural_labels(base.n, k) if level_map is None else [tuple(int(v) for v in pair) for pair in level_map]
    if len(labels) != candidate.n:
        raise BadLabeling(f"{len(labels)} labels for {candidate.n} candidate points")
    where: Dict[Tuple[int, int], int] = {}
    for idx, (x, level) in enumerate(labels):
        if not (0 <= x < base.n and 1 <= level <= k):
            raise BadLabeling(f"label {(x, level)} outside base × 1..{k}")
        if (x, level) in where:
            raise BadLabeling(f"label {(x, level)} used twice")
        where[(x, level)] = idx
    if len(where) != base.n * k:
        raise BadLabeling(f"{len(where)} labels cover {base.n * k} expected")

    level_one = np.array([where[(x, 1)] for x in range(base.n)], dtype=np.int64)
    inside = candidate.dist[np.ix_(level_one, level_one)]
    upper = np.triu(np.ones((base.n, base.n), dtype=bool), 1)
    distortion = []
    for d in np.unique(base.dist[upper]):
        sel = upper & (base.dist == d)
        distortion.append((int(d), int(inside[sel].min()), int(inside[sel].max())))
    deviation = int(np.abs(inside - base.dist).max()) if base.n else 0

    fibers = np.array([[where[(x, level)] for level in range(1, k + 1)] for x in range(base.n)])
    fiber_diameter = 0
    for row in fibers:
        fiber_diameter = max(fiber_diameter, int(candidate.dist[np.ix_(row, row)].max()))
    return StackingReport(True, tuple(distortion), deviation, fiber_diameter)


def stack_union(union: CoarseUnion, k: int) -> CoarseUnion:
    """Componentwise k-stacking, basepoints kept on level 1."""
    stacked = [k_stack(space, k).metric for space in union.components]
    return assemble_union(stacked, union.base_gap, union.basepoints)


def stack_map(f: CoarseMapTable, k: int) -> CoarseMapTable:
    """f̄((x, i)) = (f(x), i) between the k-stacked unions."""
    domain = stack_union(f.domain, k)
    codomain = stack_union(f.codomain, k)
    x_sizes, y_sizes = f.domain.sizes, f.codomain.sizes

    def lift(ref: PointRef) -> Tuple[int, int]:
        c, q = ref
        level, x = divmod(q, x_sizes[c])
        y = f(PointRef(c, x))
        return y.component, level * y_sizes[y.component] + y.point

    return CoarseMapTable.from_function(domain, codomain, lift)


def _check_stacked(stacked: CoarseUnion, base: CoarseUnion, k: int, side: str) -> None:
    expected = [k * n for n in base.sizes]
    if stacked.sizes != expected:
        raise BadLabeling(f"{side} sizes {stacked.sizes} are not {k} × {base.sizes}")


def unstack_map(fbar: CoarseMapTable, base_domain: CoarseUnion, base_codomain: CoarseUnion, k: int) -> CoarseMapTable:
    """g = π ∘ f̄ ∘ j: include at level 1, apply f̄, forget the level."""
    _check_stacked(fbar.domain, base_domain, k, "domain")
    _check_stacked(fbar.codomain, base_codomain, k, "codomain")
    y_sizes = base_codomain.sizes

    def project(ref: PointRef) -> Tuple[int, int]:
        y = fbar(ref)
        return y.component, y.point % y_sizes[y.component]

    return CoarseMapTable.from_function(base_domain, base_codomain, project)


def random_regular(n: int, k: int, seed: int, retries: Optional[int] = None) -> GraphSpace:
    """Connected simple k-regular graph on n vertices, deterministic per seed.

    networkx pairs half-edges and rejects loops and parallel edges; outcomes
    that are disconnected are drawn again.
    """
    if n < 1 or k < 0:
        raise InvalidParameter(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    if (n * k) % 2 or n <= k:
        raise InfeasibleDegree(f"no simple {k}-regular graph on {n} vertices")
    limit = retries if retries is not None else config.retry_cap()
    rng = np.random.default_rng(seed)
    for attempt in range(limit):
        graph = nx.random_regular_graph(k, n, seed=int(rng.integers(2**32)))
        if nx.is_connected(graph):
            log.debug("[generate] n=%d k=%d connected after %d draws", n, k, attempt + 1)
            return GraphSpace.from_networkx(graph, f"rr({n},{k})")
    raise RetriesExhausted(f"no connected {k}-regular graph on {n} vertices in {limit} draws")


@dataclass(frozen=True)
class ExpanderSequence:
    union: CoarseUnion
    graphs: Tuple[GraphSpace, ...] = field(repr=False)
    certificates: Tuple[ExpanderCertificate, ...]
    count: int
    min_h: Optional[Fraction]


def expander_sequence(
    sizes: Sequence[int],
    k: int,
    seed: int,
    cap: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
    base_gap: int = 1,
) -> ExpanderSequence:
    """Union of random k-regular graphs, certified exactly up to the cap and estimated beyond."""
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise InvalidParameter("expander sequence needs at least one size")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InvalidParameter(f"sizes must be strictly increasing, got {sizes}")
    limit = config.exact_cap(cap)
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(len(sizes))]

    def build(job):
        n, child = job
        graph = random_regular(n, k, child)
        if n <= limit:
            certificate = cheeger_exact(graph, cap=limit)
        else:
            certificate = estimate_expansion(graph, budget=budget, seed=child)
        log.info("[generate] n=%d h=%s (%s)", n, certificate.h_star, certificate.method)
        return graph, certificate

    with ThreadPoolExecutor(max_workers=config.workers()) as ex:
        built = list(ex.map(build, zip(sizes, seeds)))

    graphs = tuple(graph for graph, _ in built)
    certificates = tuple(cert for _, cert in built)
    exact = [cert.h_star for cert in certificates if cert.method == EXACT]
    union = assemble_union([graph.metric for graph in graphs], base_gap)
    return ExpanderSequence(union, graphs, certificates, len(sizes), min(exact) if exact else None)
