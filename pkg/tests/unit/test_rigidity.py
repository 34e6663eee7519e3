import itertools
from fractions import Fraction

import numpy as np
import pytest

from coarsekit.coarse_maps import CoarseMapTable, closeness, compose, inverse_table
from coarsekit.errors import (
    ConditionNotMet,
    InvalidParameter,
    NonpositiveH,
    NotInjective,
    PointOutOfRange,
    SizeMismatch,
    TooLarge,
)
from coarsekit.matching import DeficiencyCertificate
from coarsekit.metric_core import FiniteSpace, PointRef, assemble_union
from coarsekit.rigidity import (
    CARDINALITY,
    INJECTIVITY,
    LEFTOVER,
    ROUTING,
    BijectivizationResult,
    bijectivize_expander,
    bijectivize_nonamenable,
    check_bijective_condition,
    check_injective_condition,
    injectivize_expander,
    preimage_deviation_check,
    sb_bijection,
    whyte_threshold,
)
from tests.unit.oracles import cycle, path, tail_bijection_exists


def _union(*sizes):
    return assemble_union([cycle(n).metric for n in sizes], base_gap=3)


# injective condition


def test_injective_condition_identity(three_c4):
    report = check_injective_condition(CoarseMapTable.identity(three_c4))
    assert report.passed
    assert report.n0 == 0
    assert report.preimage_sizes == (4, 4, 4)


def test_injective_condition_fails_on_last_component(three_c4):
    codomain = assemble_union([cycle(4).metric, cycle(4).metric, path(3).metric], base_gap=3)
    sizes = codomain.sizes
    f = CoarseMapTable.from_function(three_c4, codomain, lambda ref: (ref.component, ref.point % sizes[ref.component]))
    report = check_injective_condition(f)
    assert not report.passed
    assert report.n0 is None
    assert report.offending == (2,)
    with pytest.raises(ConditionNotMet):
        injectivize_expander(f, report)


def _fold_first_into_second(three_c4):
    return CoarseMapTable.from_function(
        three_c4, three_c4, lambda ref: (1, ref.point) if ref.component == 0 else ref
    )


def test_injective_condition_head_absorbs_overflow(three_c4):
    report = check_injective_condition(_fold_first_into_second(three_c4))
    assert report.passed
    assert report.n0 == 2
    assert report.preimage_sizes == (0, 8, 4)


def test_injectivize_expander_with_head(three_c4):
    f = _fold_first_into_second(three_c4)
    result = injectivize_expander(f, check_injective_condition(f))
    assert result.map.is_injective()
    assert result.component_radius == {2: 0}
    assert result.head_radius is not None and result.head_radius > 0
    assert result.closeness_to_f == closeness(result.map, f)
    assert all(result.map(x) == x for x in three_c4.points(2))


# bijective condition


def test_bijective_condition_identity(three_c4):
    report = check_bijective_condition(CoarseMapTable.identity(three_c4))
    assert report.passed
    assert report.n0 == 0
    assert report.index_map == {0: 0, 1: 1, 2: 2}
    assert report.leftover_x == report.leftover_y == 0


def test_bijective_condition_swap(three_c4):
    swap = {0: 0, 1: 2, 2: 1}
    f = CoarseMapTable.from_function(three_c4, three_c4, lambda ref: (swap[ref.component], ref.point))
    report = check_bijective_condition(f)
    assert report.passed
    assert report.index_map == swap
    assert report.M == (0, 1, 2)


def test_bijective_condition_cardinality_in_head():
    domain = _union(6, 4, 4)
    codomain = _union(4, 4, 4)
    f = CoarseMapTable.from_function(domain, codomain, lambda ref: (ref.component, ref.point % 4))
    report = check_bijective_condition(f)
    assert not report.passed
    assert report.n0 == 1
    assert report.obstruction.kind == CARDINALITY
    assert report.obstruction.component == 0
    assert (report.leftover_x, report.leftover_y) == (6, 4)


def test_bijective_condition_leftover_after_routing_stop():
    domain = _union(6, 4, 4)
    codomain = _union(4, 4, 4)

    def split(ref):
        if ref.component == 0:
            return (0, ref.point) if ref.point < 3 else (1, ref.point - 3)
        return ref

    report = check_bijective_condition(CoarseMapTable.from_function(domain, codomain, split))
    assert not report.passed
    assert report.n0 == 1
    assert report.routes[0] == (0, 1)
    assert report.obstruction.kind == LEFTOVER
    assert report.obstruction.component is None


def test_bijective_condition_last_component_fails(three_c4):
    f = CoarseMapTable.from_function(
        three_c4, three_c4, lambda ref: (1, 0) if ref == PointRef(2, 0) else ref
    )
    report = check_bijective_condition(f)
    assert not report.passed
    assert report.n0 is None
    assert report.obstruction.kind == ROUTING
    assert report.obstruction.component == 2
    with pytest.raises(ConditionNotMet):
        bijectivize_expander(f, report)


def test_bijective_condition_shared_target(three_c4):
    f = CoarseMapTable.from_function(
        three_c4, three_c4, lambda ref: (2, ref.point) if ref.component == 1 else ref
    )
    report = check_bijective_condition(f)
    assert report.passed
    assert report.n0 == 2
    assert report.index_map == {2: 2}
    result = bijectivize_expander(f, report)
    assert result.bijection == CoarseMapTable.identity(three_c4)
    assert result.per_component_radius == (0,)


# bijectivization


def _rotation_onto_copy(union, rng):
    """Rotate each cycle component onto a copy whose basepoints moved along."""
    shifts = [int(rng.integers(n)) for n in union.sizes]
    basepoints = [(b + s) % n for b, s, n in zip(union.basepoints, shifts, union.sizes)]
    copy = assemble_union(list(union.components), union.base_gap, basepoints)
    return CoarseMapTable.from_function(
        union, copy, lambda ref: (ref.component, (ref.point + shifts[ref.component]) % union.sizes[ref.component])
    )


def _scattered_map(domain, codomain, rng, stay=0.85):
    """Each component aims at one codomain component; a few points stray."""
    image = []
    for c in range(len(domain)):
        m = int(rng.integers(len(codomain)))
        for _ in range(domain.sizes[c]):
            target = m if rng.random() < stay else int(rng.integers(len(codomain)))
            image.append((target, int(rng.integers(codomain.sizes[target]))))
    return CoarseMapTable(domain, codomain, tuple(image))


def test_bijective_condition_survives_isometries_of_the_codomain():
    domain, codomain = _union(4, 6, 4), _union(4, 4, 6)
    rng = np.random.default_rng(11)
    passed = []
    for _ in range(150):
        f = _scattered_map(domain, codomain, rng)
        sigma = _rotation_onto_copy(codomain, rng)
        assert closeness(compose(compose(f, sigma), inverse_table(sigma)), f) == 0
        before, after = check_bijective_condition(f), check_bijective_condition(compose(f, sigma))
        assert after.passed == before.passed
        assert after.n0 == before.n0
        assert after.index_map == before.index_map
        assert (after.obstruction is None) == (before.obstruction is None)
        if before.obstruction is not None:
            assert after.obstruction.kind == before.obstruction.kind
        passed.append(before.passed)
    assert any(passed) and not all(passed)


def _path_union(sizes):
    return assemble_union([path(n).metric if n > 1 else FiniteSpace.point() for n in sizes], 1)


def test_bijective_condition_matches_enumeration_on_tiny_unions():
    rng = np.random.default_rng(5)
    for _ in range(300):
        x_sizes = [int(s) for s in rng.integers(1, 3, size=int(rng.integers(1, 4)))]
        if rng.random() < 0.5:
            y_sizes = [int(s) for s in rng.permutation(x_sizes)]
        else:
            y_sizes = [int(s) for s in rng.integers(1, 3, size=int(rng.integers(1, 4)))]
        domain, codomain = _path_union(x_sizes), _path_union(y_sizes)
        f = _scattered_map(domain, codomain, rng, stay=0.8)
        x_comp = [p.component for p in domain.points()]
        y_comp = [p.component for p in codomain.points()]
        expected = tail_bijection_exists(x_comp, y_comp, [int(i) for i in f.indices])
        assert check_bijective_condition(f).passed == expected


def test_bijectivize_isomorphism(three_c4):
    f = CoarseMapTable.identity(three_c4)
    result = bijectivize_expander(f, check_bijective_condition(f))
    assert result.per_component_radius == (0, 0, 0)
    assert result.closeness_to_f == 0
    assert not result.radii_growing
    assert result.method == "matching"


def test_bijectivize_collapse(three_c4):
    f = CoarseMapTable.from_function(three_c4, three_c4, lambda ref: (ref.component, ref.point - ref.point % 2))
    result = bijectivize_expander(f, check_bijective_condition(f))
    assert result.bijection.is_bijective()
    assert result.per_component_radius == (1, 1, 1)
    assert result.closeness_to_f == 1
    assert not result.radii_growing
    assert result.moduli_inverse[1] >= 1


def test_bijectivize_flags_growing_radii():
    union = assemble_union([cycle(4).metric, cycle(8).metric], base_gap=1)
    block = {0: 2, 1: 4}
    f = CoarseMapTable.from_function(
        union, union, lambda ref: (ref.component, ref.point - ref.point % block[ref.component])
    )
    result = bijectivize_expander(f, check_bijective_condition(f))
    assert result.per_component_radius == (1, 2)
    assert result.radii_growing


# König chains


def test_sb_cycles_use_g():
    g = {0: "a", 1: "b", 2: "c"}
    h = {"a": 0, "b": 1, "c": 2}
    result = sb_bijection(g, h)
    assert result.bijection == g
    assert result.via_g == (0, 1, 2)
    assert result.is_bijection


def test_sb_chains_ending_in_codomain_use_h_inverse():
    g = {0: "y1", 1: "y2"}
    h = {"y0": 0, "y1": 1, "y2": 2}
    result = sb_bijection(g, h)
    assert result.bijection == {0: "y0", 1: "y1", 2: "y2"}
    assert result.via_h == (0, 1, 2)
    assert result.is_bijection


def test_sb_partial_maps_leave_points_unmatched():
    result = sb_bijection({0: "a"}, {}, domain=[0, 1], codomain=["a", "b"])
    assert result.bijection == {0: "a"}
    assert result.unmatched_domain == (1,)
    assert result.unmatched_codomain == ("b",)
    assert not result.is_bijection


def test_sb_rejects_non_injective_and_stray_points():
    with pytest.raises(NotInjective):
        sb_bijection({0: "a", 1: "a"}, {})
    with pytest.raises(PointOutOfRange):
        sb_bijection({5: "a"}, {}, domain=[0], codomain=["a"])


def test_sb_stays_pointwise_close_to_f():
    dist = cycle(12).metric.dist
    rng = np.random.default_rng(2)
    for _ in range(200):
        f = rng.integers(12, size=12).tolist()
        g_dom = rng.choice(12, size=int(rng.integers(6, 13)), replace=False).tolist()
        g = dict(zip(g_dom, rng.choice(12, size=len(g_dom), replace=False).tolist()))
        h_dom = rng.choice(12, size=int(rng.integers(6, 13)), replace=False).tolist()
        h = dict(zip(h_dom, rng.choice(12, size=len(h_dom), replace=False).tolist()))
        h_inv = {x: y for y, x in h.items()}
        result = sb_bijection(g, h, range(12), range(12))
        for x, y in result.bijection.items():
            allowed = [int(dist[g[x], f[x]])] if x in g else []
            if x in h_inv:
                allowed.append(int(dist[h_inv[x], f[x]]))
            assert dist[y, f[x]] <= max(allowed)


def test_bijectivize_nonamenable_identity(three_c4):
    f = CoarseMapTable.identity(three_c4)
    result = bijectivize_nonamenable(f, f)
    assert isinstance(result, BijectivizationResult)
    assert result.method == "schroeder-bernstein"
    assert result.closeness_to_f == 0
    assert result.selection_radii == (0, 0)
    assert result.closeness_bound == 0


def test_bijectivize_nonamenable_rotation(c8_union):
    forward = CoarseMapTable.from_function(c8_union, c8_union, lambda ref: (0, (ref.point + 1) % 8))
    backward = CoarseMapTable.from_function(c8_union, c8_union, lambda ref: (0, (ref.point - 1) % 8))
    result = bijectivize_nonamenable(forward, backward)
    assert result.bijection == forward
    assert result.closeness_to_f == 0


def test_bijectivize_nonamenable_errors(three_c4, c8_union):
    f = CoarseMapTable.identity(three_c4)
    with pytest.raises(InvalidParameter):
        bijectivize_nonamenable(f, CoarseMapTable.identity(c8_union))
    collapse = CoarseMapTable.from_function(three_c4, three_c4, lambda ref: (ref.component, 0))
    assert isinstance(bijectivize_nonamenable(collapse, f), DeficiencyCertificate)


# counting inequality and threshold


def test_deviation_identity_has_no_live_subsets():
    report = preimage_deviation_check([0, 1, 2, 3])
    assert report.m == 1
    assert report.checked == 16
    assert report.violations == 0
    assert report.witness is None


def test_deviation_example():
    report = preimage_deviation_check([0, 0, 1, 2])
    assert report.m == 2
    assert report.max_ratio == 1
    assert report.witness == (0,)


def test_deviation_holds_for_every_map_on_four_points():
    for f in itertools.product(range(4), repeat=4):
        report = preimage_deviation_check(list(f))
        assert report.violations == 0
        assert report.max_ratio <= 1


def test_deviation_errors_and_sampling():
    with pytest.raises(SizeMismatch):
        preimage_deviation_check([0, 1], codomain_size=3)
    with pytest.raises(PointOutOfRange):
        preimage_deviation_check([0, 4, 1, 2])
    with pytest.raises(TooLarge):
        preimage_deviation_check([0, 1, 2, 3, 4], cap=4)
    with pytest.raises(InvalidParameter):
        preimage_deviation_check([0, 1], exhaustive=False, samples=0)
    sampled = preimage_deviation_check([0, 0, 1, 2, 3], exhaustive=False, samples=50, seed=2)
    assert sampled.checked == 50
    assert not sampled.exhaustive
    assert sampled.violations == 0


def test_whyte_threshold():
    assert whyte_threshold(3, 1, 2) == 3
    assert whyte_threshold(4, Fraction(6, 5), 3) == Fraction(20, 3)
    assert whyte_threshold(5, 2, 1) == 0
    with pytest.raises(NonpositiveH):
        whyte_threshold(3, 0, 2)
