"""
rigidity_pipeline – pipeline.py

End-to-end run of the bijective rigidity workflow on a generated expander
union: perturb a per-component isomorphism, check the component condition,
bijectivize, then repeat through 2-stackings and unstack the result.
"""

import sys
import traceback
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

# Add the repository root so coarsekit imports when run as a script
sys.path.append(str(Path(__file__).resolve().parent.parent.parent))

from coarsekit.coarse_maps import CoarseMapTable, closeness
from coarsekit.constructions import expander_sequence, stack_map, unstack_map
from coarsekit.metric_core import CoarseUnion, GraphSpace, assemble_union
from coarsekit.rigidity import bijectivize_expander, check_bijective_condition

DEFAULT_SIZES = (10, 12, 14, 16, 18, 20)
# transpositions per component
MAX_MOVES = 3
# components above this size get estimated, not exact, expansion
EXACT_CAP = 14


def relabeled_copy(union: CoarseUnion, graphs: Sequence[GraphSpace], rng) -> Tuple[CoarseUnion, List[np.ndarray]]:
    """The same components with vertices renamed by a random permutation each."""
    perms = [rng.permutation(graph.n) for graph in graphs]
    copies = [
        GraphSpace.from_edges(graph.n, [(int(p[u]), int(p[v])) for u, v in graph.edges], f"{graph.name}'")
        for graph, p in zip(graphs, perms)
    ]
    basepoints = [int(p[b]) for p, b in zip(perms, union.basepoints)]
    return assemble_union([copy.metric for copy in copies], union.base_gap, basepoints), perms


def perturb(union: CoarseUnion, graphs: Sequence[GraphSpace], seed: int, moves: int = MAX_MOVES):
    """Per-component isomorphism onto a relabeled copy, then 1..`moves` random
    transpositions of images inside each component.

    Returns the perturbed map, the isomorphism and the displacement
    max d(f(x), iso(x)).
    """
    rng = np.random.default_rng(seed)
    codomain, perms = relabeled_copy(union, graphs, rng)
    iso = CoarseMapTable.from_function(
        union, codomain, lambda ref: (ref.component, int(perms[ref.component][ref.point]))
    )
    image = list(iso.image)
    for c, graph in enumerate(graphs):
        lo = union.offset(c)
        for _ in range(int(rng.integers(1, moves + 1))):
            a, b = (lo + int(v) for v in rng.choice(graph.n, size=2, replace=False))
            image[a], image[b] = image[b], image[a]
    f = CoarseMapTable(union, codomain, tuple(image))
    return f, iso, closeness(f, iso)


def bijectivize(f: CoarseMapTable) -> Dict:
    report = check_bijective_condition(f)
    if not report.passed:
        return {"passed": False, "obstruction": report.obstruction}
    result = bijectivize_expander(f, report)
    return {"passed": True, "closeness": result.closeness_to_f, "bijection": result.bijection}


def main(seed: int = 0, sizes: Optional[List[int]] = None, cap: int = EXACT_CAP) -> Dict:
    sizes = list(sizes or DEFAULT_SIZES)
    print(f"[pipeline] generating {len(sizes)} 3-regular components, seed {seed}")
    sequence = expander_sequence(sizes, 3, seed, cap=cap)
    print(f"[pipeline] min certified h: {sequence.min_h}")

    f, iso, displacement = perturb(sequence.union, sequence.graphs, seed)
    base = bijectivize(f)
    if not base["passed"]:
        raise RuntimeError(f"condition fails on the base: {base['obstruction']}")
    print(f"[pipeline] base bijection closeness {base['closeness']} (displacement {displacement})")
    if base["closeness"] > displacement:
        raise RuntimeError("bijection is farther from f than the perturbation")

    fbar = stack_map(f, 2)
    stacked = bijectivize(fbar)
    if not stacked["passed"]:
        raise RuntimeError(f"condition fails on the stacking: {stacked['obstruction']}")
    g = unstack_map(stacked["bijection"], f.domain, f.codomain, 2)
    unstacked = check_bijective_condition(g)
    print(f"[pipeline] stacked closeness {stacked['closeness']}, unstacked condition passed={unstacked.passed}")
    print("[pipeline] done")
    return {
        "sizes": sizes,
        "min_h": sequence.min_h,
        "displacement": displacement,
        "base_closeness": base["closeness"],
        "isomorphism_closeness": closeness(base["bijection"], iso),
        "stacked_closeness": stacked["closeness"],
        "unstacked_passed": unstacked.passed,
        "unstacked_closeness": closeness(g, f),
    }


if __name__ == "__main__":
    arg = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    try:
        main(arg)
    except Exception:
        traceback.print_exc()
        sys.exit(1)
