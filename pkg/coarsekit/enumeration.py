"""
enumeration.py

Gray-code walks over every subset of a small point set.

The exact checkers (Cheeger constants, expansion profiles, Whyte constants)
all need |A|, |∂_t(A)| and a weighted sum over A for every subset A of some
component. Consecutive Gray codes differ in one point, so the walk keeps a
cover count per ambient point and updates the boundary size in O(ball size)
per step instead of recomputing it.
"""

from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple


class ScanState(NamedTuple):
    mask: int
    size: int
    boundary: int
    weight: int


class SubsetScanner:
    """Walk all 2^n subsets of the scanned points in Gray-code order.

    Args:
        reach: for each scanned point i (0 <= i < n), the ambient indices within
            the boundary radius of it, itself excluded.
        ambient_size: number of ambient indices; scanned point i has ambient
            index `positions[i]`.
        positions: ambient index of each scanned point (defaults to 0..n-1).
        weights: integer weight per scanned point, summed over A.
    """

    def __init__(
        self,
        reach: Sequence[Sequence[int]],
        ambient_size: int,
        positions: Optional[Sequence[int]] = None,
        weights: Optional[Sequence[int]] = None,
    ):
        self.n = len(reach)
        self.reach: List[Tuple[int, ...]] = [tuple(r) for r in reach]
        self.ambient_size = ambient_size
        self.positions = list(positions) if positions is not None else list(range(self.n))
        self.weights = list(weights) if weights is not None else [0] * self.n

    def __len__(self) -> int:
        return 1 << self.n

    def __iter__(self) -> Iterator[ScanState]:
        cover = [0] * self.ambient_size
        inside = [False] * self.ambient_size
        mask = size = boundary = weight = 0
        yield ScanState(0, 0, 0, 0)
        for step in range(1, 1 << self.n):
            bit = (step & -step).bit_length() - 1
            here = self.positions[bit]
            if mask >> bit & 1:
                for u in self.reach[bit]:
                    cover[u] -= 1
                    if cover[u] == 0 and not inside[u]:
                        boundary -= 1
                inside[here] = False
                if cover[here] > 0:
                    boundary += 1
                size -= 1
                weight -= self.weights[bit]
            else:
                inside[here] = True
                if cover[here] > 0:
                    boundary -= 1
                for u in self.reach[bit]:
                    cover[u] += 1
                    if cover[u] == 1 and not inside[u]:
                        boundary += 1
                size += 1
                weight += self.weights[bit]
            mask ^= 1 << bit
            yield ScanState(mask, size, boundary, weight)


def mask_members(mask: int, labels: Sequence) -> Tuple:
    """Sorted labels of the scanned points in `mask`."""
    return tuple(sorted(labels[i] for i in range(len(labels)) if mask >> i & 1))


def lex_less(candidate: Tuple, incumbent: Optional[Tuple]) -> bool:
    return incumbent is None or candidate < incumbent
