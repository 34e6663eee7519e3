"""Brute-force reference computations for the exact checkers."""

from fractions import Fraction
from itertools import combinations, permutations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from coarsekit.metric_core import GraphSpace


def cycle(n: int) -> GraphSpace:
    return GraphSpace.from_edges(n, [(i, (i + 1) % n) for i in range(n)], f"C{n}")


def complete(n: int) -> GraphSpace:
    return GraphSpace.from_edges(n, list(combinations(range(n), 2)), f"K{n}")


def path(n: int) -> GraphSpace:
    return GraphSpace.from_edges(n, [(i, i + 1) for i in range(n - 1)], f"P{n}")


def petersen() -> GraphSpace:
    return GraphSpace.from_networkx(nx.petersen_graph(), "Petersen")


def subsets(n: int) -> Iterable[Tuple[int, ...]]:
    for size in range(n + 1):
        yield from combinations(range(n), size)


def bfs_boundary(graph: GraphSpace, A: Iterable[int], t: int) -> frozenset:
    A = set(A)
    if not A:
        return frozenset()
    lengths = nx.multi_source_dijkstra_path_length(graph.to_networkx(), A)
    return frozenset(x for x, d in lengths.items() if x not in A and d <= t)


def brute_cheeger(graph: GraphSpace) -> Fraction:
    n = graph.n
    best = None
    for A in subsets(n):
        if 0 < len(A) < n:
            ratio = Fraction(len(bfs_boundary(graph, A, 1)) * n, (n - len(A)) * len(A))
            best = ratio if best is None else min(best, ratio)
    return best


def has_injective_selection(candidates: Dict[int, Sequence[int]]) -> bool:
    """Backtracking search for distinct representatives."""
    left = sorted(candidates, key=lambda x: len(candidates[x]))
    used = set()

    def place(i: int) -> bool:
        if i == len(left):
            return True
        for y in candidates[left[i]]:
            if y not in used:
                used.add(y)
                if place(i + 1):
                    return True
                used.remove(y)
        return False

    return place(0)


def min_injective_closeness(dy: np.ndarray, image: Sequence[int]) -> Optional[int]:
    """min over injective g of max_x d(g(x), f(x)), by enumerating every injection."""
    n_cod = dy.shape[0]
    best = None
    for g in permutations(range(n_cod), len(image)):
        value = max((int(dy[a, b]) for a, b in zip(g, image)), default=0)
        best = value if best is None else min(best, value)
    return best


def random_zero_sum(rng, n: int, spread: int = 3) -> List[int]:
    values = [int(v) for v in rng.integers(-spread, spread + 1, size=n)]
    values[-1] -= sum(values)
    return values


def subset_bits(n: int) -> np.ndarray:
    """Row m is the indicator of the subset with bitmask m."""
    masks = np.arange(1 << n, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n)) & 1).astype(bool)


def boundaries(dist: np.ndarray, bits: np.ndarray, t: int) -> np.ndarray:
    """Row-wise indicator of ∂_t(A) for every subset row of `bits`."""
    near = bits.astype(np.int64) @ (dist <= t).astype(np.int64) > 0
    return near & ~bits


def cuts(dist: np.ndarray, bits: np.ndarray, t: int) -> np.ndarray:
    """Row-wise cut_t(A): pairs x ∈ A, z ∉ A with d(x, z) <= t."""
    close = (dist <= t).astype(np.int64)
    np.fill_diagonal(close, 0)
    inside = bits.astype(np.int64)
    return ((inside @ close) * (1 - inside)).sum(axis=1)


def cheeger_by_bits(graph: GraphSpace) -> Fraction:
    """min |∂A|·n / ((n - |A|)·|A|) over proper nonempty A, all subsets at once."""
    n = graph.n
    bits = subset_bits(n)
    size = bits.sum(axis=1)
    live = (size > 0) & (size < n)
    edge = boundaries(graph.metric.dist, bits, 1).sum(axis=1)
    pairs = np.unique(np.stack([edge[live] * n, (n - size[live]) * size[live]], axis=1), axis=0)
    return min(Fraction(int(a), int(b)) for a, b in pairs)


def tail_bijection_exists(x_comp: Sequence[int], y_comp: Sequence[int], image: Sequence[int]) -> bool:
    """Some bijection b and tail n >= n0 with b(X_n) a whole Y_m containing f(X_n).

    `x_comp` / `y_comp` give the component of every point, `image` the
    codomain index of f(x). Enumerates every permutation and every tail.
    """
    if len(x_comp) != len(y_comp):
        return False
    y_size = {m: list(y_comp).count(m) for m in set(y_comp)}
    last = max(x_comp)
    members = [[i for i, c in enumerate(x_comp) if c == n] for n in range(last + 1)]
    for b in permutations(range(len(y_comp))):
        for n0 in range(last, -1, -1):
            fits = True
            for n in range(n0, last + 1):
                hit = {y_comp[b[i]] for i in members[n]}
                if len(hit) != 1:
                    fits = False
                    break
                m = next(iter(hit))
                if y_size[m] != len(members[n]) or any(y_comp[image[i]] != m for i in members[n]):
                    fits = False
                    break
            if fits:
                return True
    return False
