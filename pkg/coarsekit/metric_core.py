"""
metric_core.py

Finite integer metric spaces, graph metrics and coarse disjoint unions.

Responsibilities:
- FiniteSpace: an n×n integer distance matrix, validated on construction
- GraphSpace: a simple connected graph together with its shortest-path metric
- CoarseUnion: finite spaces glued along an anchored line, so that distances
  between different components grow without bound along the sequence
- Outer boundaries ∂_t(A), neighborhoods N_r(S) and t-connectedness

Everything here is immutable after construction; distance matrices are numpy
arrays with the write flag cleared.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from coarsekit.errors import (
    DisconnectedGraph,
    EmptyUnion,
    InvalidMetric,
    InvalidParameter,
    PointOutOfRange,
)

log = logging.getLogger(__name__)


class PointRef(NamedTuple):
    """A point of a coarse union: (component index, point index)."""

    component: int
    point: int


class MetricViolation(NamedTuple):
    kind: str
    points: Tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.kind}{self.points}"


def verify_metric(dist) -> List[MetricViolation]:
    """List every metric-axiom violation of a candidate distance matrix.

    Kinds: shape, integrality, diagonal, symmetry, discreteness, triangle.
    A triangle violation (x, y, z) means d(x, y) > d(x, z) + d(z, y); each
    unordered endpoint pair is reported once, with x < y.
    """
    try:
        raw = np.asarray(dist)
    except ValueError:
        return [MetricViolation("shape", ())]
    if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
        return [MetricViolation("shape", tuple(raw.shape))]
    n = raw.shape[0]
    if n == 0:
        return []
    if raw.dtype.kind not in "iu":
        if raw.dtype.kind == "f" and np.all(np.isfinite(raw)) and np.all(raw == np.round(raw)):
            raw = raw.astype(np.int64)
        else:
            return [MetricViolation("integrality", ())]
    d = raw.astype(np.int64)
    violations: List[MetricViolation] = []
    for x in np.flatnonzero(np.diag(d) != 0):
        violations.append(MetricViolation("diagonal", (int(x),)))
    for x, y in np.argwhere(d != d.T):
        if x < y:
            violations.append(MetricViolation("symmetry", (int(x), int(y))))
    small = (d < 1) | (d.T < 1)
    for x, y in np.argwhere(np.triu(small, 1)):
        violations.append(MetricViolation("discreteness", (int(x), int(y))))
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    triangles = []
    for z in range(n):
        # d(x, y) > d(x, z) + d(z, y), one z at a time to keep memory at n^2
        bad = (d > d[:, z:z + 1] + d[z:z + 1, :]) & upper
        triangles.extend((int(x), int(y), z) for x, y in np.argwhere(bad))
    violations.extend(MetricViolation("triangle", triple) for triple in sorted(triangles))
    return violations


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix = np.array(matrix, dtype=np.int64)
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    """A finite metric space with non-negative integer distances."""

    dist: np.ndarray
    name: str = ""

    def __post_init__(self):
        violations = verify_metric(self.dist)
        if violations:
            raise InvalidMetric(violations)
        object.__setattr__(self, "dist", _frozen(self.dist))

    @classmethod
    def trusted(cls, dist, name: str = "") -> "FiniteSpace":
        """Wrap a matrix already known to be a metric (BFS output, glued unions)."""
        space = object.__new__(cls)
        object.__setattr__(space, "dist", _frozen(dist))
        object.__setattr__(space, "name", name)
        return space

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], name: str = "") -> "FiniteSpace":
        return cls(np.asarray(rows, dtype=np.int64).reshape(len(rows), len(rows)), name)

    @classmethod
    def point(cls, name: str = "") -> "FiniteSpace":
        return cls(np.zeros((1, 1), dtype=np.int64), name)

    @property
    def n(self) -> int:
        return int(self.dist.shape[0])

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteSpace):
            return NotImplemented
        return np.array_equal(self.dist, other.dist)

    def __hash__(self) -> int:
        return hash(self.dist.tobytes())

    def diameter(self) -> int:
        return int(self.dist.max()) if self.n else 0

    def realized_distances(self) -> List[int]:
        return [int(v) for v in np.unique(self.dist)]

    def ball(self, x: int, r: int) -> List[int]:
        self.check_points([x])
        return [int(z) for z in np.flatnonzero(self.dist[x] <= r)]

    def max_ball_size(self, r: int) -> int:
        if self.n == 0:
            return 0
        return int((self.dist <= r).sum(axis=1).max())

    def check_points(self, points: Iterable[int]) -> List[int]:
        out = []
        for p in points:
            if not 0 <= int(p) < self.n:
                raise PointOutOfRange(f"point {p} outside 0..{self.n - 1} of '{self.name}'")
            out.append(int(p))
        return out


def shortest_path_metric(graph: nx.Graph, name: str = "") -> FiniteSpace:
    """BFS distances of a connected graph on the nodes 0..n-1."""
    n = graph.number_of_nodes()
    if sorted(graph.nodes) != list(range(n)):
        raise InvalidParameter("graph nodes must be exactly 0..n-1")
    dist = np.full((n, n), -1, dtype=np.int64)
    for source, lengths in nx.all_pairs_shortest_path_length(graph):
        for target, length in lengths.items():
            dist[source, target] = length
    missing = np.argwhere(dist < 0)
    if len(missing):
        u, v = missing[0]
        raise DisconnectedGraph(int(u), int(v))
    return FiniteSpace.trusted(dist, name)


@dataclass(frozen=True, eq=False)
class GraphSpace:
    """A simple, undirected, connected graph and its path metric."""

    n: int
    edges: Tuple[Tuple[int, int], ...]
    max_degree: int
    metric: FiniteSpace
    neighbors: Tuple[Tuple[int, ...], ...] = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], name: str = "") -> "GraphSpace":
        if n < 1:
            raise InvalidParameter(f"a graph needs at least one vertex, got n={n}")
        graph = nx.Graph()
        graph.add_nodes_from(range(n))
        seen = set()
        for edge in edges:
            if len(edge) != 2:
                raise InvalidParameter(f"edge {edge} is not a pair")
            u, v = int(edge[0]), int(edge[1])
            if not (0 <= u < n and 0 <= v < n):
                raise PointOutOfRange(f"edge ({u}, {v}) outside 0..{n - 1}")
            if u == v:
                raise InvalidParameter(f"loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidParameter(f"parallel edge {key}")
            seen.add(key)
            graph.add_edge(u, v)
        return cls.from_networkx(graph, name)

    @classmethod
    def from_networkx(cls, graph: nx.Graph, name: str = "") -> "GraphSpace":
        if nx.number_of_selfloops(graph):
            raise InvalidParameter("graph has loops")
        metric = shortest_path_metric(graph, name)
        n = graph.number_of_nodes()
        edges = tuple(sorted((min(u, v), max(u, v)) for u, v in graph.edges))
        neighbors = tuple(tuple(sorted(graph.neighbors(x))) for x in range(n))
        max_degree = max((len(nbrs) for nbrs in neighbors), default=0)
        return cls(n, edges, max_degree, metric, neighbors)

    @property
    def name(self) -> str:
        return self.metric.name

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphSpace):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))


@dataclass(frozen=True, eq=False)
class CoarseUnion:
    """Finite spaces glued along a line at strictly growing anchors.

    For x in X_n and y in X_m with n != m the distance is
    d_n(x, p_n) + |s_m - s_n| + d_m(y, p_m), where p_n is the basepoint of X_n
    and s_n its anchor.
    """

    components: Tuple[FiniteSpace, ...]
    basepoints: Tuple[int, ...]
    anchors: Tuple[int, ...]
    base_gap: int

    def __post_init__(self):
        offsets = [0]
        for space in self.components:
            offsets.append(offsets[-1] + space.n)
        object.__setattr__(self, "_offsets", tuple(offsets))
        object.__setattr__(self, "_dense", None)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoarseUnion):
            return NotImplemented
        return (
            self.components == other.components
            and self.basepoints == other.basepoints
            and self.anchors == other.anchors
        )

    def __hash__(self) -> int:
        return hash((self.components, self.basepoints, self.anchors))

    def __len__(self) -> int:
        return len(self.components)

    @property
    def size(self) -> int:
        return self._offsets[-1]

    @property
    def sizes(self) -> List[int]:
        return [space.n for space in self.components]

    def offset(self, component: int) -> int:
        return self._offsets[component]

    def points(self, component: Optional[int] = None) -> List[PointRef]:
        if component is not None:
            return [PointRef(component, p) for p in range(self.components[component].n)]
        return [PointRef(c, p) for c, space in enumerate(self.components) for p in range(space.n)]

    def index(self, ref: Sequence[int]) -> int:
        c, p = int(ref[0]), int(ref[1])
        if not 0 <= c < len(self.components) or not 0 <= p < self.components[c].n:
            raise PointOutOfRange(f"point {(c, p)} is not in the union")
        return self._offsets[c] + p

    def ref(self, index: int) -> PointRef:
        if not 0 <= index < self.size:
            raise PointOutOfRange(f"global index {index} outside 0..{self.size - 1}")
        c = int(np.searchsorted(self._offsets, index, side="right")) - 1
        return PointRef(c, index - self._offsets[c])

    def distance(self, a: Sequence[int], b: Sequence[int]) -> int:
        self.index(a)
        self.index(b)
        ca, pa = int(a[0]), int(a[1])
        cb, pb = int(b[0]), int(b[1])
        if ca == cb:
            return int(self.components[ca].dist[pa, pb])
        return (
            int(self.components[ca].dist[pa, self.basepoints[ca]])
            + abs(self.anchors[cb] - self.anchors[ca])
            + int(self.components[cb].dist[self.basepoints[cb], pb])
        )

    def as_space(self) -> FiniteSpace:
        """The glued metric on all points, in PointRef order."""
        if self._dense is None:
            dense = np.zeros((self.size, self.size), dtype=np.int64)
            to_base = [space.dist[:, p] for space, p in zip(self.components, self.basepoints)]
            for c, space in enumerate(self.components):
                lo, hi = self._offsets[c], self._offsets[c + 1]
                dense[lo:hi, lo:hi] = space.dist
                for e in range(len(self.components)):
                    if e == c:
                        continue
                    glo, ghi = self._offsets[e], self._offsets[e + 1]
                    gap = abs(self.anchors[e] - self.anchors[c])
                    dense[lo:hi, glo:ghi] = to_base[c][:, None] + gap + to_base[e][None, :]
            object.__setattr__(self, "_dense", FiniteSpace.trusted(dense, "union"))
        return self._dense

    def component_gap(self, c: int, e: int) -> int:
        return abs(self.anchors[e] - self.anchors[c])


def assemble_union(
    components: Sequence[FiniteSpace],
    base_gap: int,
    basepoints: Optional[Sequence[int]] = None,
) -> CoarseUnion:
    """Glue components at anchors s_0 = 0, s_{n+1} = s_n + diam(X_n) + base_gap + n."""
    if not components:
        raise EmptyUnion("a coarse union needs at least one component")
    if base_gap < 1:
        raise InvalidParameter(f"base_gap must be positive, got {base_gap}")
    if basepoints is None:
        basepoints = [0] * len(components)
    if len(basepoints) != len(components):
        raise InvalidParameter(
            f"{len(basepoints)} basepoints given for {len(components)} components"
        )
    for space, p in zip(components, basepoints):
        space.check_points([p])
    anchors = [0]
    for n, space in enumerate(components[:-1]):
        anchors.append(anchors[-1] + space.diameter() + base_gap + n)
    log.debug("[union] anchors %s", anchors)
    return CoarseUnion(tuple(components), tuple(int(p) for p in basepoints), tuple(anchors), base_gap)


def single_union(space: FiniteSpace) -> CoarseUnion:
    return assemble_union([space], base_gap=1)


Ambient = Union[FiniteSpace, CoarseUnion]


def _resolve(ambient: Ambient, points: Iterable) -> Tuple[FiniteSpace, List[int]]:
    if isinstance(ambient, CoarseUnion):
        return ambient.as_space(), [ambient.index(p) for p in points]
    return ambient, ambient.check_points(points)


def _labels(ambient: Ambient, indices: Iterable[int]) -> frozenset:
    if isinstance(ambient, CoarseUnion):
        return frozenset(ambient.ref(int(i)) for i in indices)
    return frozenset(int(i) for i in indices)


def boundary(ambient: Ambient, A: Iterable, t: int) -> frozenset:
    """Outer t-boundary {x not in A : d(x, A) <= t}."""
    if t < 1:
        raise InvalidParameter(f"boundary radius must be positive, got {t}")
    space, members = _resolve(ambient, A)
    if not members:
        return frozenset()
    near = (space.dist[:, members] <= t).any(axis=1)
    near[members] = False
    return _labels(ambient, np.flatnonzero(near))


def neighborhood(ambient: Ambient, S: Iterable, r: int) -> frozenset:
    """N_r(S) = {x : d(x, S) <= r}; N_0(S) = S."""
    if r < 0:
        raise InvalidParameter(f"neighborhood radius must be non-negative, got {r}")
    space, members = _resolve(ambient, S)
    if not members:
        return frozenset()
    near = (space.dist[:, members] <= r).any(axis=1)
    return _labels(ambient, np.flatnonzero(near))


def t_connected(space: Ambient, t: int) -> bool:
    """Whether the graph joining points at distance <= t is connected."""
    if isinstance(space, CoarseUnion):
        space = space.as_space()
    if space.n <= 1:
        return True
    graph = nx.Graph()
    graph.add_nodes_from(range(space.n))
    graph.add_edges_from((int(x), int(z)) for x, z in np.argwhere(np.triu(space.dist <= t, 1)))
    return nx.is_connected(graph)


def growth_bound(space: FiniteSpace, A: Iterable[int], t: int, t0: int) -> Tuple[bool, int]:
    """Check ∂_t(A) ⊆ N_{t-t0}(∂_{t0}(A)) and return |∂_{t0}(A)|·max_x|B(x, t-t0)|."""
    if not 1 <= t0 <= t:
        raise InvalidParameter(f"need 1 <= t0 <= t, got t0={t0}, t={t}")
    A = list(A)
    inner = boundary(space, A, t0)
    outer = boundary(space, A, t)
    contained = outer <= neighborhood(space, inner, t - t0)
    return contained, len(inner) * space.max_ball_size(t - t0)
