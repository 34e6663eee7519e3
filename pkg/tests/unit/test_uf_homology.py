from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsekit.coarse_maps import CoarseMapTable
from coarsekit.errors import DomainMismatch, InvalidParameter, PreconditionViolated, TooLarge
from coarsekit.metric_core import PointRef, assemble_union, boundary, single_union
from coarsekit.uf_homology import (
    Chain0,
    Chain1,
    CutObstruction,
    FillingCertificate,
    boundary_chain,
    build_target_set,
    component_sums,
    cut_size,
    fill_chain,
    homotopy_filling,
    injectivity_obstruction,
    pushforward,
    pushforward_chain1,
    target_chain,
    whyte_check_exact,
    whyte_falsify,
)
from tests.unit.oracles import cycle


def test_chain1_folds_orientation(c8_union):
    b = Chain1(c8_union, {((0, 1), (0, 0)): 2, ((0, 3), (0, 3)): 5})
    assert b.coefficients == {(PointRef(0, 0), PointRef(0, 1)): -2}
    assert b.norm == 2
    assert b.propagation == 1
    a = boundary_chain(b)
    assert a[(0, 0)] == -2 and a[(0, 1)] == 2


def test_chain0_arithmetic(c8_union, three_c4):
    a = Chain0(c8_union, {(0, 0): 3, (0, 2): -1})
    assert (a + -a).is_zero()
    assert (a - a).is_zero()
    assert a.norm == 3
    assert component_sums(a) == [2]
    with pytest.raises(DomainMismatch):
        a + Chain0(three_c4, {(0, 0): 1})


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_fill_antipodal_mass_on_cycle(n):
    union = single_union(cycle(2 * n).metric)
    a = Chain0(union, {(0, 0): n, (0, n): -n})
    certificate = fill_chain(a, 1)
    assert isinstance(certificate, FillingCertificate)
    assert certificate.c == (n + 1) // 2
    assert certificate.fills(a)


def test_fill_zero_chain(c8_union):
    certificate = fill_chain(Chain0(c8_union), 2)
    assert certificate.c == 0
    assert certificate.chain.coefficients == {}


def test_fill_reports_cut_obstruction(three_c4):
    a = Chain0(three_c4, {(0, 0): 1, (1, 0): -1})
    obstruction = fill_chain(a, 1)
    assert isinstance(obstruction, CutObstruction)
    assert obstruction.points == tuple(three_c4.points(0))
    assert obstruction.total == 1


def test_fill_across_components_at_large_scale(three_c4):
    a = Chain0(three_c4, {(0, 0): 1, (1, 0): -1})
    t = three_c4.distance((0, 0), (1, 0))
    certificate = fill_chain(a, t)
    assert isinstance(certificate, FillingCertificate)
    assert certificate.c == 1
    assert certificate.fills(a)


def test_fill_rejects_zero_scale(c8_union):
    with pytest.raises(InvalidParameter):
        fill_chain(Chain0(c8_union), 0)


def test_cut_size_on_cycle(c8_union):
    assert cut_size(c8_union, [(0, 0), (0, 1)], 1) == 2
    assert cut_size(c8_union, [(0, 0), (0, 1)], 2) == 6


def test_whyte_exact_on_cycle(c8_union):
    a = Chain0(c8_union, {(0, 0): 1, (0, 4): -1})
    report = whyte_check_exact(a, 1, 0)
    assert report.c_star == 1
    assert not report.infinite_obstruction
    assert set(report.witness) in (
        set(c8_union.points()) - {PointRef(0, 4)},
        set(c8_union.points()) - {PointRef(0, 0)},
    )


def test_whyte_exact_flags_closed_component(three_c4):
    a = Chain0(three_c4, {(0, 0): 1, (1, 0): -1})
    report = whyte_check_exact(a, 1, 0)
    assert report.infinite_obstruction
    assert report.obstruction_set == tuple(three_c4.points(0))


def test_whyte_exact_errors(c8_union):
    a = Chain0(c8_union, {(0, 0): 1})
    with pytest.raises(InvalidParameter):
        whyte_check_exact(a, 0, 0)
    with pytest.raises(InvalidParameter):
        whyte_check_exact(a, 1, 3)
    with pytest.raises(TooLarge):
        whyte_check_exact(a, 1, 0, cap=4)


def test_whyte_falsify_finds_violation(c8_union):
    a = Chain0(c8_union, {(0, 0): 1, (0, 4): -1})
    witness = whyte_falsify(a, 1, Fraction(1, 3))
    assert witness is not None
    total = abs(sum(a[p] for p in witness))
    assert total > Fraction(1, 3) * len(boundary(c8_union, witness, 1))


def test_whyte_falsify_cannot_beat_true_constant(c8_union):
    a = Chain0(c8_union, {(0, 0): 1, (0, 4): -1})
    assert whyte_falsify(a, 1, 1, budget=300, seed=5) is None
    assert whyte_falsify(a, 1, Fraction(1, 3), budget=0) is None


@pytest.mark.parametrize("epsilon", [Fraction(1, 100), Fraction(1, 2)])
@pytest.mark.parametrize("seed", [0, 7])
def test_whyte_falsify_just_below_the_exact_constant(c8_union, epsilon, seed):
    a = Chain0(c8_union, {(0, p): 1 if p < 4 else -1 for p in range(8)})
    c_star = whyte_check_exact(a, 1, 0).c_star
    assert c_star == 2
    witness = whyte_falsify(a, 1, c_star - epsilon, budget=50, seed=seed)
    assert witness is not None
    total = abs(sum(a[p] for p in witness))
    assert total > (c_star - epsilon) * len(boundary(c8_union, witness, 1))
    assert whyte_falsify(a, 1, c_star, budget=2000, seed=seed) is None


def _rotation(union, k):
    n = union.size
    return CoarseMapTable.from_function(union, union, lambda ref: (0, (ref.point + k) % n))


def test_homotopy_filling_of_rotation(c8_union):
    f = _rotation(c8_union, 1)
    g = CoarseMapTable.identity(c8_union)
    a = Chain0(c8_union, {(0, 0): 2, (0, 3): -1, (0, 5): -1})
    certificate = homotopy_filling(f, g, a)
    assert certificate.t == 1
    assert certificate.fills(pushforward(f, a) - pushforward(g, a))
    assert certificate.c <= 2 * a.norm * f.fiber_bound


def test_homotopy_filling_with_folding(c8_union):
    f = CoarseMapTable.from_function(c8_union, c8_union, lambda ref: (0, ref.point - ref.point % 2))
    g = _rotation(c8_union, 1)
    a = Chain0(c8_union, {(0, 0): 3, (0, 1): -2, (0, 6): -1})
    certificate = homotopy_filling(f, g, a)
    assert certificate.fills(pushforward(f, a) - pushforward(g, a))
    assert certificate.c <= 2 * a.norm * f.fiber_bound


def test_pushforward_sums_fibers(c8_union):
    f = CoarseMapTable.from_function(c8_union, c8_union, lambda ref: (0, ref.point - ref.point % 2))
    a = Chain0(c8_union, {(0, 0): 1, (0, 1): 4})
    assert pushforward(f, a).coefficients == {PointRef(0, 0): 5}


def test_pushforward_chain1_commutes_with_boundary(c8_union, three_c4):
    f = CoarseMapTable.from_function(c8_union, c8_union, lambda ref: (0, ref.point - ref.point % 2))
    b = Chain1(c8_union, {((0, 0), (0, 1)): 2, ((0, 1), (0, 2)): 3, ((0, 3), (0, 4)): 1})
    pushed = pushforward_chain1(f, b)
    assert pushed.coefficients == {
        (PointRef(0, 0), PointRef(0, 2)): 3,
        (PointRef(0, 2), PointRef(0, 4)): 1,
    }
    assert boundary_chain(pushed) == pushforward(f, boundary_chain(b))
    with pytest.raises(DomainMismatch):
        pushforward_chain1(f, Chain1(three_c4, {((0, 0), (0, 1)): 1}))


def _merge_one(three_c4):
    return CoarseMapTable.from_function(
        three_c4, three_c4, lambda ref: (1, 0) if ref == PointRef(1, 1) else ref
    )


def test_build_target_set_pads_with_least_points(three_c4):
    f = _merge_one(three_c4)
    Z = build_target_set(f, 1)
    assert Z == frozenset(three_c4.points(1) + three_c4.points(2))


def test_target_chain_values(three_c4):
    f = _merge_one(three_c4)
    a = target_chain(f, build_target_set(f, 1))
    assert a[(1, 0)] == -1
    assert a[(1, 1)] == 1
    assert a[(1, 2)] == 0
    assert a[(0, 2)] == -1


def test_injectivity_obstruction(three_c4):
    f = _merge_one(three_c4)
    report = injectivity_obstruction(f, build_target_set(f, 1), 1, 1)
    assert report.c_star == 1


def test_build_target_set_on_many_components():
    c30 = cycle(30).metric
    union = assemble_union([c30] * 40, base_gap=1)
    f = CoarseMapTable.from_function(union, union, lambda ref: (ref.component, ref.point - ref.point % 2))
    Z = build_target_set(f, 0)
    assert Z == frozenset(union.points())
    Z = build_target_set(f, 39)
    assert Z == frozenset(union.points(39))


def test_build_target_set_rejects_overfull_component(three_c4):
    f = CoarseMapTable.from_function(three_c4, three_c4, lambda ref: (1, ref.point))
    with pytest.raises(PreconditionViolated):
        build_target_set(f, 0)


PAIR_UNION = assemble_union([cycle(4).metric, cycle(3).metric], base_gap=2)


def _chains1(ambient):
    points = st.tuples(st.integers(0, len(ambient) - 1), st.integers(0, 2)).map(lambda cp: PointRef(*cp))
    pairs = st.tuples(points, points)
    return st.dictionaries(pairs, st.integers(-5, 5), max_size=8).map(lambda coeffs: Chain1(ambient, coeffs))


@settings(max_examples=80, deadline=None)
@given(b1=_chains1(PAIR_UNION), b2=_chains1(PAIR_UNION))
def test_boundary_chain_is_linear(b1, b2):
    assert boundary_chain(b1 + b2) == boundary_chain(b1) + boundary_chain(b2)
    flipped = Chain1(PAIR_UNION, {(z, x): v for (x, z), v in b1.coefficients.items()})
    assert boundary_chain(flipped) == -boundary_chain(b1)
    assert sum(component_sums(boundary_chain(b1))) == 0
