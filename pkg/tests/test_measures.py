import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cantortubes.hierarchy import Construction
from cantortubes.measures import (
    AreaEstimate,
    box_dimension_x_projection,
    covering_sum,
    dimension_bound_report,
    interval_union_length,
    neighborhood_area,
    pairwise_overlap_loss,
    projection_lengths,
    projection_lengths_lazy,
    stage_family_count,
)
from cantortubes.raster import rasterize
from cantortubes.rotations import RotationFamily, TubeFamily
from cantortubes.sequences import build_schedule, derive_sequences


@pytest.fixture(scope="module")
def cons(strict_table, strict_arcs):
    return Construction(strict_table, sols=strict_arcs)


@pytest.fixture(scope="module")
def rf(cons):
    return RotationFamily(cons)


def box_family(cx, cy, w, h, angle=0.0) -> TubeFamily:
    return TubeFamily(
        level=1, angle_index=0, angle=Fraction(0), variant="T", C=Fraction(1),
        half_width=w / 2, half_height=h / 2, rotation=angle,
        centers=np.array([[cx, cy]]), v=(0.0, 0.0))


# -- interval sweep ------------------------------------------------------------

intervals = st.lists(
    st.tuples(st.floats(-100, 100, allow_nan=False),
              st.floats(0, 50, allow_nan=False)).map(lambda t: (t[0], t[0] + t[1])),
    max_size=30)


@given(intervals)
@settings(max_examples=200)
def test_interval_union_properties(ivs):
    length = interval_union_length(ivs)
    assert length >= 0
    # Union length is at most the sum, at least the longest member.
    assert length <= sum(hi - lo for lo, hi in ivs) + 1e-9
    if ivs:
        assert length >= max(hi - lo for lo, hi in ivs) - 1e-9


def test_interval_union_merging():
    assert interval_union_length([(0, 1), (1, 2)]) == 2
    assert interval_union_length([(0, 3), (1, 2)]) == 3
    assert interval_union_length([(0, 1), (2, 3)]) == 2
    assert interval_union_length([]) == 0


# -- projections ---------------------------------------------------------------

def test_projection_level1(cons):
    len_y, len_x = projection_lengths(cons.level(1), cons.prec)
    assert float(len_y) == 1 and float(len_x) == 1


def test_projection_level2(cons, strict_table):
    len_y, len_x = projection_lengths(cons.level(2), cons.prec)
    # y-mass survives: at least 1 - c2*delta_1 (exact bound 1/4), and the
    # x-projection is exactly count * width since the pieces are disjoint.
    assert float(len_y) >= float(1 - strict_table.c2)
    assert abs(float(len_x) - cons.N(1) * float(strict_table.delta_(2))) < 1e-30


def test_projection_lazy_matches_materialized(cons):
    len_y2, len_x2 = projection_lengths(cons.level(2), cons.prec)
    lazy_y, lazy_x = projection_lengths_lazy(cons, 2)
    assert abs(float(len_y2) - float(lazy_y)) < 1e-25
    assert abs(float(len_x2) - float(lazy_x)) < 1e-25


def test_projection_level3_lazy(cons, strict_table):
    # Level 3 is never materialized; the telescoped y-union and counted
    # x-union still come out exactly.
    len_y3, len_x3 = projection_lengths_lazy(cons, 3)
    assert float(len_y3) >= float((1 - strict_table.c2) * (1 - strict_table.c2 * strict_table.delta_(2)))
    assert len_x3 == cons.population(3) * strict_table.delta_(3)
    # Horizontal mass shrinks like the width/height ratio: the normalized
    # quantity stays of unit order while len_x itself collapses.
    for n in (2, 3):
        _, len_x = projection_lengths_lazy(cons, n)
        normalized = float(len_x) * float(strict_table.Delta_(n) / strict_table.delta_(n))
        assert 0.2 <= normalized <= 1.05


# -- rasterized areas ------------------------------------------------------------

def test_area_unit_square_radius_zero():
    est = neighborhood_area([box_family(0.5, 0.5, 1, 1)], 0, 1 / 256)
    assert est.lower <= 1 <= est.upper
    assert abs(est.value - 1) <= est.error_bound + 1e-12
    assert est.error_bound < 0.05


def test_area_resolution_guard():
    with pytest.raises(ValueError):
        neighborhood_area([box_family(0, 0, 1, 1)], 0.01, 0.01)


def test_area_bracket_shrinks_with_resolution():
    fam = [box_family(0.3, 0.4, 1, 0.7, angle=0.3)]
    coarse = neighborhood_area(fam, 0, 1 / 128)
    fine = neighborhood_area(fam, 0, 1 / 256)
    assert fine.upper - fine.lower <= (coarse.upper - coarse.lower) / 1.5
    true = 0.7
    assert coarse.lower <= true <= coarse.upper
    assert fine.lower <= true <= fine.upper


def test_area_monotone_in_radius():
    fam = [box_family(0.2, 0.9, 0.5, 0.5, angle=1.0)]
    small = neighborhood_area(fam, 0.1, 1 / 64)
    large = neighborhood_area(fam, 0.2, 1 / 64)
    assert large.value >= small.value - small.error_bound - large.error_bound


def test_area_bracket_vs_perimeter():
    fams = [box_family(0, 0, 2, 1, 0.2), box_family(0.5, 0.2, 1, 1, 0.9)]
    est = neighborhood_area(fams, 0, 1 / 512)
    perimeter = 2 * (2 + 1) + 2 * (1 + 1)
    assert est.error_bound <= perimeter * est.resolution * 2


def test_overlap_loss_identical_is_zero(rf):
    fam = rf.tube_family(2, 3, C=16)
    est = pairwise_overlap_loss(fam, fam, 1 / 512)
    assert est.value == 0
    assert est.lower == 0


def test_overlap_loss_same_center_rotated_pair(cons, strict_table):
    # Same-center boxes differing by one angle step: the loss is a sliver
    # whose area scales like the step times the squared box height.
    t2 = float(strict_table.theta_(2))
    h = 4 * 16 * float(strict_table.Delta_(2))
    w = 4 * 16 * t2
    a = box_family(0.5, 0.5, w, h, angle=0.0)
    b = box_family(0.5, 0.5, w, h, angle=-t2)
    est = pairwise_overlap_loss(a, b, 1 / 2048)
    assert est.lower <= est.value <= est.upper
    sliver_scale = t2 * h * h
    assert est.value <= 2 * sliver_scale
    assert est.value > 0


def test_overlap_loss_consecutive_families(rf, strict_table):
    # Consecutive fine-step primed families at the first level: recorded
    # constant against Delta_2/Delta_1 * theta_2 (regression bound only).
    a = rf.tube_family(2, 4, C=16, variant="T_prime")
    b = rf.tube_family(2, 5, C=16, variant="T_prime")
    est = pairwise_overlap_loss(a, b, 1 / 1024)
    bound_scale = float(strict_table.Delta_(2) * strict_table.theta_(2))
    K = est.value / bound_scale
    assert 0 < K < 2000
    assert est.value <= est.upper


# -- dimension bookkeeping --------------------------------------------------------

def test_covering_sums_bounded(cons, strict_table):
    for p in (2, 3):
        s = covering_sum(strict_table, p, cons.population(p))
        assert 0 < s <= 1.0


def test_box_dimension_strict_default(cons):
    est = box_dimension_x_projection(cons, 3)
    # Two-point fit over levels 2..3; per-level exponents are 2/3 and 3/4,
    # so the slope must sit near their mean, well below the asymptotic 1.
    mean_sp = (2 / 3 + 3 / 4) / 2
    assert est.slope is not None
    assert abs(est.slope - mean_sp) < 0.15
    assert est.levels == (1, 2, 3)
    assert all(s <= 1.0 for s in est.covering_sums)


def test_box_dimension_single_scale_has_no_slope(cons):
    est = box_dimension_x_projection(cons, 1)
    assert est.slope is None and est.residual is None
    assert est.scales == ((Fraction(1), 1),)


def test_box_dimension_s_half():
    table = derive_sequences(build_schedule(Fraction(1, 2), 3), Fraction(1, 16))
    cons = Construction(table)
    est = box_dimension_x_projection(cons, 3)
    mean_sp = float((Fraction(1, 3) + Fraction(3, 8)) / 2)
    assert abs(est.slope - mean_sp) < 0.15
    for s in est.covering_sums:
        assert s <= 1.0


def test_s_zero_supercritical_sums():
    # With the dimension-zero schedule, any fixed exponent above 1/p makes
    # the level-p covering sum collapse below one.
    table = derive_sequences(build_schedule(0, 3), Fraction(1, 16))
    cons = Construction(table)
    p = 3
    count = cons.population(p)
    delta = table.delta_(p)
    s_prime = 0.5  # > 1/3
    val = math.exp(s_prime * (math.log(delta.numerator) - math.log(delta.denominator))
                   + math.log(count))
    assert val < 1


def test_dimension_bound_exponents(cons):
    assert dimension_bound_report(cons, 1)["exponent_bound"] == 2.0
    assert dimension_bound_report(cons, 2)["exponent_bound_exact"] == "5/3"
    table9 = derive_sequences(build_schedule(1, 2), Fraction(1, 16))
    cons9 = Construction(table9)
    assert abs(dimension_bound_report(cons9, 9)["exponent_bound"] - 1.2) < 1e-12


def test_stage_family_count(strict_table):
    assert stage_family_count(strict_table, 1) == 17
    assert stage_family_count(strict_table, 2) == 257


def test_raster_band_threading_identical(rf):
    fams = [rf.tube_family(2, l, C=16) for l in (0, 64, 128)]
    a = rasterize(fams, 1 / 512, threads=1)
    b = rasterize(fams, 1 / 512, threads=2)
    assert a.counts() == b.counts()
    assert np.array_equal(a.center_in, b.center_in)
