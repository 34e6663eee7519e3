"""
rigidity.py

Checkers and constructors for injective and bijective coarse maps between
coarse disjoint unions.

Responsibilities:
- check_injective_condition / injectivize_expander: preimage counting per
  codomain component, and the Hall matchings that realize it
- check_bijective_condition / bijectivize_expander: component routing with
  cardinality matching, then one perfect matching per routed component pair
- sb_bijection / bijectivize_nonamenable: König's chain tracing over two
  opposite injections
- preimage_deviation_check and whyte_threshold: the counting inequality and
  the expansion threshold used as diagnostics

"Cofinite" is read on the truncation: a condition holds from some index n0 to
the last observed component, and n0 is always the least such index.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from coarsekit import config
from coarsekit.coarse_maps import (
    CoarseMapTable,
    closeness,
    component_routing,
    inverse_table,
)
from coarsekit.enumeration import mask_members
from coarsekit.errors import (
    ConditionNotMet,
    InvalidParameter,
    MatchingFailed,
    NonpositiveH,
    NotInjective,
    PointOutOfRange,
    SizeMismatch,
    TooLarge,
)
from coarsekit.matching import (
    DeficiencyCertificate,
    injectivize_selection_scan,
    minimal_ball_selection,
    perfect_matching_pair,
)
from coarsekit.metric_core import PointRef

log = logging.getLogger(__name__)

ROUTING = "routing"
INJECTIVITY = "injectivity"
CARDINALITY = "cardinality"
LEFTOVER = "leftover"

_CHUNK = 1 << 16


# ---------------------------------------------------------------------------
# injective condition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InjectiveConditionReport:
    passed: bool
    n0: Optional[int]
    truncation: int
    preimage_sizes: Tuple[int, ...]
    component_sizes: Tuple[int, ...]
    offending: Tuple[int, ...] = ()


def check_injective_condition(f: CoarseMapTable) -> InjectiveConditionReport:
    """Least n0 with Σ_{n<n0}|f⁻¹(Y_n)| <= Σ_{n<n0}|Y_n| and |f⁻¹(Y_n)| <= |Y_n| beyond.

    n0 ranges over 0..len(Y); n0 = len(Y) only asks for |X| <= |Y|.
    """
    counts = np.bincount([ref.component for ref in f.image], minlength=len(f.codomain))
    preimage = tuple(int(c) for c in counts)
    sizes = tuple(f.codomain.sizes)
    excess = [p - s for p, s in zip(preimage, sizes)]
    over = tuple(m for m, e in enumerate(excess) if e > 0)
    start = over[-1] + 1 if over else 0
    head = sum(excess[:start])
    n0: Optional[int] = None
    for candidate in range(start, len(sizes) + 1):
        if head <= 0:
            n0 = candidate
            break
        if candidate < len(sizes):
            head += excess[candidate]
    passed = n0 is not None
    log.info("[injective] passed=%s n0=%s over %d components", passed, n0, len(sizes))
    return InjectiveConditionReport(
        passed=passed,
        n0=n0,
        truncation=len(sizes),
        preimage_sizes=preimage,
        component_sizes=sizes,
        offending=() if passed else over,
    )


@dataclass(frozen=True)
class InjectivizationResult:
    map: CoarseMapTable
    closeness_to_f: int
    component_radius: Dict[int, int]
    head_radius: Optional[int]


def _ball_match(f: CoarseMapTable, label: int, sources: List[PointRef], targets: List[PointRef]):
    if not sources:
        return label, 0, {}
    radius, outcome = minimal_ball_selection(f, sources, targets)
    if radius is None:
        raise MatchingFailed(label, outcome)
    return label, radius, outcome.assignment


def injectivize_expander(f: CoarseMapTable, report: InjectiveConditionReport) -> InjectivizationResult:
    """Injective map close to f, one Hall matching per tail component plus one for the head.

    Tail component Y_m receives f⁻¹(Y_m) through balls inside Y_m; everything
    mapped into components before n0 is matched into those components.
    """
    if not report.passed:
        raise ConditionNotMet(f"injective condition fails at components {list(report.offending)}")
    n0 = report.n0
    buckets: Dict[int, List[PointRef]] = {}
    for x, y in zip(f.domain.points(), f.image):
        key = y.component if y.component >= n0 else -1
        buckets.setdefault(key, []).append(x)
    tasks = [(m, buckets.get(m, []), f.codomain.points(m)) for m in range(n0, len(f.codomain))]
    if n0 > 0:
        head_targets = [y for m in range(n0) for y in f.codomain.points(m)]
        tasks.append((-1, buckets.get(-1, []), head_targets))

    with ThreadPoolExecutor(max_workers=config.workers()) as ex:
        results = list(ex.map(lambda task: _ball_match(f, *task), tasks))

    assignment: Dict[PointRef, PointRef] = {}
    radii: Dict[int, int] = {}
    head_radius = None
    for label, radius, part in results:
        assignment.update(part)
        if label < 0:
            head_radius = radius
        else:
            radii[label] = radius
    g = CoarseMapTable(f.domain, f.codomain, tuple(assignment[x] for x in f.domain.points()))
    if not g.is_injective():
        raise RuntimeError("component matchings produced a non-injective map")
    s = closeness(g, f)
    log.info("[injectivize] %d tail components, closeness %d", len(radii), s)
    return InjectivizationResult(g, s, radii, head_radius)


# ---------------------------------------------------------------------------
# bijective condition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Obstruction:
    kind: str
    component: Optional[int]
    message: str


@dataclass(frozen=True)
class Condition2Report:
    passed: bool
    n0: Optional[int]
    N: Tuple[int, ...]
    M: Tuple[int, ...]
    index_map: Dict[int, int]
    leftover_x: int
    leftover_y: int
    truncation: int
    routes: Tuple[Tuple[int, ...], ...]
    obstruction: Optional[Obstruction] = None


def check_bijective_condition(f: CoarseMapTable) -> Condition2Report:
    """Cofinite N, M and a bijection i: N -> M with |X_n| = |Y_i(n)| and f(X_n) ⊆ Y_i(n).

    The tail is grown backwards from the last component while every component
    routes to a single, unused codomain component of the same size. Inside that
    tail the leftover counts differ by |X| - |Y| whatever n0 is, so the
    leftovers agree exactly when the truncations have equal size.
    """
    routing = component_routing(f)
    routes = tuple(tuple(sorted(r)) for r in routing.routes)
    xs, ys = f.domain.sizes, f.codomain.sizes
    used: Dict[int, int] = {}
    stop: Optional[Obstruction] = None
    n0 = len(routes)
    for c in range(len(routes) - 1, -1, -1):
        if len(routes[c]) != 1:
            stop = Obstruction(ROUTING, c, f"X_{c} meets codomain components {list(routes[c])}")
            break
        m = routes[c][0]
        if m in used:
            stop = Obstruction(INJECTIVITY, c, f"X_{c} and X_{used[m]} both route to Y_{m}")
            break
        if xs[c] != ys[m]:
            stop = Obstruction(CARDINALITY, c, f"|X_{c}| = {xs[c]} but |Y_{m}| = {ys[m]}")
            break
        used[m] = c
        n0 = c

    def report(passed, n0, index_map, obstruction):
        N = tuple(sorted(index_map))
        M = tuple(sorted(index_map.values()))
        return Condition2Report(
            passed=passed,
            n0=n0,
            N=N,
            M=M,
            index_map=index_map,
            leftover_x=sum(xs) - sum(xs[c] for c in N),
            leftover_y=sum(ys) - sum(ys[m] for m in M),
            truncation=len(routes),
            routes=routes,
            obstruction=obstruction,
        )

    if n0 == len(routes):
        log.info("[bijective] last component fails: %s", stop.message if stop else "empty union")
        return report(False, None, {}, stop)
    index_map = {c: routes[c][0] for c in range(n0, len(routes))}
    if sum(xs) != sum(ys):
        if stop is not None and stop.kind == CARDINALITY:
            obstruction = stop
        else:
            obstruction = Obstruction(LEFTOVER, None, f"|X| = {sum(xs)} but |Y| = {sum(ys)}")
        log.info("[bijective] leftovers differ: %s", obstruction.message)
        return report(False, n0, index_map, obstruction)
    log.info("[bijective] passed with n0=%d over %d components", n0, len(routes))
    return report(True, n0, index_map, None)


@dataclass(frozen=True)
class BijectivizationResult:
    bijection: CoarseMapTable
    closeness_to_f: int
    per_component_radius: Tuple[int, ...]
    components: Tuple[int, ...]
    moduli_bijection: Dict[int, int] = field(repr=False)
    moduli_inverse: Dict[int, int] = field(repr=False)
    radii_growing: bool = False
    method: str = "matching"
    selection_radii: Tuple[int, ...] = ()
    closeness_bound: Optional[int] = None


def _match_component(f: CoarseMapTable, c: int, m: int) -> Tuple[int, Dict[int, int]]:
    Xn = f.domain.components[c]
    Yn = f.codomain.components[m]
    lo = f.domain.offset(c)
    restricted = [f.image[lo + p].point for p in range(Xn.n)]
    outcome = None
    for r in Yn.realized_distances():
        outcome = perfect_matching_pair(Xn, Yn, restricted, r)
        if not isinstance(outcome, DeficiencyCertificate):
            log.debug("[bijectivize] X_%d -> Y_%d at radius %d", c, m, r)
            return r, outcome.assignment
    raise MatchingFailed(c, outcome)


def _growing(radii: Sequence[int]) -> bool:
    return len(set(radii)) > 1 and all(a <= b for a, b in zip(radii, radii[1:]))


def bijectivize_expander(f: CoarseMapTable, report: Condition2Report) -> BijectivizationResult:
    """Bijection close to f: a perfect matching X_n -> Y_i(n) per routed pair, heads least-first."""
    if not report.passed:
        detail = report.obstruction.message if report.obstruction else "condition not met"
        raise ConditionNotMet(f"bijective condition fails: {detail}")
    pairs = [(c, report.index_map[c]) for c in report.N]
    with ThreadPoolExecutor(max_workers=config.workers()) as ex:
        matched = list(ex.map(lambda pair: _match_component(f, *pair), pairs))

    image: Dict[PointRef, PointRef] = {}
    for (c, m), (_, assignment) in zip(pairs, matched):
        for x, y in assignment.items():
            image[PointRef(c, x)] = PointRef(m, y)
    head_x = [x for x in f.domain.points() if x.component not in report.index_map]
    rest = set(report.M)
    head_y = [y for y in f.codomain.points() if y.component not in rest]
    image.update(zip(head_x, head_y))

    b = CoarseMapTable(f.domain, f.codomain, tuple(image[x] for x in f.domain.points()))
    if not b.is_bijective():
        raise RuntimeError("component matchings did not assemble into a bijection")
    radii = tuple(r for r, _ in matched)
    s = closeness(b, f)
    growing = _growing(radii)
    if growing:
        log.warning("[bijectivize] matching radii grow along the tail: %s", list(radii))
    log.info("[bijectivize] %d components matched, closeness %d", len(pairs), s)
    return BijectivizationResult(
        bijection=b,
        closeness_to_f=s,
        per_component_radius=radii,
        components=tuple(report.N),
        moduli_bijection=dict(b.moduli),
        moduli_inverse=dict(inverse_table(b).moduli),
        radii_growing=growing,
    )


# ---------------------------------------------------------------------------
# König / Schröder–Bernstein
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SBResult:
    bijection: Dict[Hashable, Hashable]
    via_g: Tuple[Hashable, ...]
    via_h: Tuple[Hashable, ...]
    unmatched_domain: Tuple[Hashable, ...]
    unmatched_codomain: Tuple[Hashable, ...]

    @property
    def is_bijection(self) -> bool:
        return not self.unmatched_domain and not self.unmatched_codomain


def _inverse(mapping: Mapping, name: str) -> Dict:
    inverse: Dict = {}
    for key in sorted(mapping):
        value = mapping[key]
        if value in inverse:
            raise NotInjective(inverse[value], key, value)
        inverse[value] = key
    log.debug("[sb] %s is injective on %d points", name, len(mapping))
    return inverse


def sb_bijection(
    g: Mapping,
    h: Mapping,
    domain: Optional[Sequence] = None,
    codomain: Optional[Sequence] = None,
) -> SBResult:
    """König's bijection from injections g: X -> Y and h: Y -> X (possibly partial).

    Each x is classified by its backward chain x <- h(y) <- g(x') <- ...: a
    chain that stops in X∖im(h) or closes up sends x by g, one that stops in
    Y∖im(g) sends x by h⁻¹. Points of the first kind where g is undefined stay
    unmatched.
    """
    g_inv = _inverse(g, "g")
    h_inv = _inverse(h, "h")
    X = sorted(set(g) | set(h.values())) if domain is None else list(domain)
    Y = sorted(set(h) | set(g_inv)) if codomain is None else list(codomain)
    x_set, y_set = set(X), set(Y)
    stray = [x for x in g if x not in x_set] + [y for y in g_inv if y not in y_set]
    stray += [y for y in h if y not in y_set] + [x for x in h_inv if x not in x_set]
    if stray:
        raise PointOutOfRange(f"maps mention points outside the given sets: {stray[:5]}")

    kind: Dict[Hashable, str] = {}
    for start in X:
        if start in kind:
            continue
        chain = [start]
        x = start
        label = "g"
        while True:
            if x not in h_inv:
                break
            y = h_inv[x]
            if y not in g_inv:
                label = "h"
                break
            x = g_inv[y]
            if x == start:
                break
            if x in kind:
                label = kind[x]
                break
            chain.append(x)
        for point in chain:
            kind[point] = label

    bijection: Dict = {}
    via_g, via_h, unmatched = [], [], []
    for x in X:
        if kind[x] == "h":
            bijection[x] = h_inv[x]
            via_h.append(x)
        elif x in g:
            bijection[x] = g[x]
            via_g.append(x)
        else:
            unmatched.append(x)
    hit = set(bijection.values())
    result = SBResult(
        bijection=bijection,
        via_g=tuple(via_g),
        via_h=tuple(via_h),
        unmatched_domain=tuple(unmatched),
        unmatched_codomain=tuple(y for y in Y if y not in hit),
    )
    log.info(
        "[sb] %d via g, %d via h⁻¹, %d unmatched", len(via_g), len(via_h), len(unmatched)
    )
    return result


def _table_map(f: CoarseMapTable) -> Dict[PointRef, PointRef]:
    return dict(zip(f.domain.points(), f.image))


def bijectivize_nonamenable(
    f: CoarseMapTable, g: CoarseMapTable
) -> Union[BijectivizationResult, SBResult, DeficiencyCertificate]:
    """Selection-injectivize f and its coarse inverse g, then trace König chains.

    Returns the deficiency certificate when either map has no injective
    selection at any radius, and the partial SBResult when the truncations
    have different sizes.
    """
    if g.domain != f.codomain or g.codomain != f.domain:
        raise InvalidParameter("g must map the codomain of f back to its domain")
    f_inj = injectivize_selection_scan(f)
    if isinstance(f_inj, DeficiencyCertificate):
        return f_inj
    g_inj = injectivize_selection_scan(g)
    if isinstance(g_inj, DeficiencyCertificate):
        return g_inj
    forward = _table_map(f_inj.map)
    backward = _table_map(g_inj.map)
    sb = sb_bijection(forward, backward, f.domain.points(), f.codomain.points())
    if not sb.is_bijection:
        return sb

    b = CoarseMapTable(f.domain, f.codomain, tuple(sb.bijection[x] for x in f.domain.points()))
    dy = f.codomain.as_space().dist
    # b agrees with the injectivized f off via_h
    back_gap = max(
        (int(dy[f.codomain.index(sb.bijection[x]), f.codomain.index(f(x))]) for x in sb.via_h),
        default=0,
    )
    bound = max(f_inj.closeness, back_gap)
    s = closeness(b, f)
    if s > bound:
        raise RuntimeError(f"König bijection is {s}-close to f, above the pointwise bound {bound}")
    log.info("[bijectivize] König bijection, closeness %d (bound %d)", s, bound)
    return BijectivizationResult(
        bijection=b,
        closeness_to_f=s,
        per_component_radius=(),
        components=(),
        moduli_bijection=dict(b.moduli),
        moduli_inverse=dict(inverse_table(b).moduli),
        method="schroeder-bernstein",
        selection_radii=(f_inj.radius, g_inj.radius),
        closeness_bound=bound,
    )


# ---------------------------------------------------------------------------
# counting inequality and threshold
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeviationReport:
    n: int
    m: int
    exhaustive: bool
    checked: int
    violations: int
    max_ratio: Fraction
    witness: Optional[Tuple[int, ...]]


def _deviation_rows(bits: np.ndarray, values: np.ndarray, m: int) -> Tuple[np.ndarray, np.ndarray]:
    n = bits.shape[1]
    size = bits.sum(axis=1)
    pulled = bits[:, values].sum(axis=1)
    lhs = np.abs(size - pulled)
    rhs = (m - 1) * np.minimum(size, n - size)
    return lhs, rhs


def preimage_deviation_check(
    f: Sequence[int],
    codomain_size: Optional[int] = None,
    exhaustive: bool = True,
    samples: int = 10000,
    seed: int = 0,
    cap: Optional[int] = None,
) -> DeviationReport:
    """Check ||A| - |f⁻¹(A)|| <= (m-1)·min(|A|, |Y∖A|) over subsets A of Y.

    Reports the largest left/right ratio (subsets with a zero right side
    excluded) and the least subset attaining it.
    """
    values = np.asarray(list(f), dtype=np.int64)
    n = len(values)
    if codomain_size is None:
        codomain_size = n
    if codomain_size != n:
        raise SizeMismatch(f"|X| = {n} but |Y| = {codomain_size}")
    if n and (values.min() < 0 or values.max() >= n):
        raise PointOutOfRange(f"map values must lie in 0..{n - 1}")
    m = int(np.bincount(values, minlength=n).max()) if n else 0
    shifts = np.arange(n, dtype=np.int64)

    if exhaustive:
        limit = config.exact_cap(cap)
        if n > limit:
            raise TooLarge(n, limit, "use exhaustive=False to sample subsets")
        total = 1 << n
        blocks = (
            ((np.arange(lo, min(lo + _CHUNK, total), dtype=np.int64)[:, None] >> shifts) & 1)
            for lo in range(0, total, _CHUNK)
        )
    else:
        if samples < 1:
            raise InvalidParameter(f"samples must be positive, got {samples}")
        rng = np.random.default_rng(seed)
        blocks = (rng.integers(0, 2, size=(min(_CHUNK, samples - lo), n)) for lo in range(0, samples, _CHUNK))

    best = Fraction(0)
    witness: Optional[Tuple[int, ...]] = None
    checked = violations = 0
    for bits in blocks:
        lhs, rhs = _deviation_rows(bits, values, m)
        checked += len(lhs)
        violations += int((lhs > rhs).sum())
        live = rhs > 0
        if not live.any():
            continue
        pairs = np.unique(np.stack([lhs[live], rhs[live]], axis=1), axis=0)
        top = max(Fraction(int(a), int(b)) for a, b in pairs)
        if witness is None or top > best:
            hits = np.flatnonzero(live & (lhs * top.denominator == rhs * top.numerator))
            best = top
            witness = mask_members(int(bits[hits[0]] @ (1 << shifts)), list(range(n)))
    if violations:
        log.warning("[deviation] %d of %d subsets violate the bound", violations, checked)
    return DeviationReport(n, m, exhaustive, checked, violations, best, witness)


def whyte_threshold(k: int, h, m: int) -> Fraction:
    """k(m-1)/h: obstructions below this on every tail component leave no room for a non-injective limit."""
    h = Fraction(h)
    if h <= 0:
        raise NonpositiveH(f"expansion constant must be positive, got {h}")
    return Fraction(k * (m - 1)) / h
