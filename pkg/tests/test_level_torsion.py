from fractions import Fraction

import pytest

from fcrystal.crystal import (
    SlopeData,
    analysis_context,
    crystal_new,
    direct_sum,
    dual_twisted,
)
from fcrystal.dvr_linalg import WMatrix
from fcrystal.errors import NotIsoclinic, SlopeOrderViolated
from fcrystal.families import (
    PermSpec,
    full_cycle,
    make_k3_isoclinic,
    make_k3_nonisoclinic,
    make_permutational,
    make_rank2,
)
from fcrystal.level_torsion import (
    cross_level,
    direct_sum_estimate,
    isomorphism_number,
    level_torsion_isoclinic,
    level_torsion_sum,
    pdiv_bound,
    quasi_special_bound,
    theorem12_bound,
)


def sd_of(hodge, newton):
    return SlopeData.from_parts(hodge, newton)


# -- bounds ------------------------------------------------------------------

def test_theorem12_bound_values():
    assert theorem12_bound(sd_of((0, 1, 2), [1, 1, 1])) == 2
    assert theorem12_bound(sd_of((0, 1, 5), [2, 2, 2])) == 7
    assert theorem12_bound(sd_of((0, 0, 0), [0, 0, 0])) == 0
    assert theorem12_bound(
        sd_of((0, 0, 3, 3), [Fraction(3, 2)] * 4)) == 6
    # shift invariance: adding a constant to every slope changes nothing
    assert theorem12_bound(sd_of((2, 3, 7), [4, 4, 4])) == 7


def test_theorem12_bound_requires_isoclinic():
    with pytest.raises(NotIsoclinic):
        theorem12_bound(sd_of((0, 3), [1, 2]))


def test_pdiv_bound():
    assert pdiv_bound(1, 1) == 1
    assert pdiv_bound(2, 1) == 1
    assert pdiv_bound(4, 4) == 4
    with pytest.raises(ValueError):
        pdiv_bound(0, 1)


def test_quasi_special_bound():
    assert quasi_special_bound(sd_of((0, 3), [Fraction(3, 2)] * 2)) == 3
    assert quasi_special_bound(sd_of((2, 2, 2), [2, 2, 2])) == 0
    assert quasi_special_bound(
        sd_of((0, 0, 0, 1, 1), [Fraction(2, 5)] * 5)) == 2


def test_direct_sum_estimate():
    assert direct_sum_estimate([0]) == 0
    assert direct_sum_estimate([3]) == 3
    assert direct_sum_estimate([0, 0]) == 1
    assert direct_sum_estimate([1, 0]) == 1
    assert direct_sum_estimate([2, 2]) == 3
    assert direct_sum_estimate([2, 1, 5]) == 6


# -- isoclinic scans ---------------------------------------------------------

def test_level_torsion_cyclic_0e():
    for e in (1, 3, 5):
        ctx = analysis_context(5, 1, 2, e, q_max=6)
        m = make_permutational(ctx, PermSpec(full_cycle(2), (0, e)))
        res = level_torsion_isoclinic(m, 6)
        assert res.exact and res.value == e
        assert res.certificate.kind == "period" and res.certificate.param == 2
        assert [t.delta for t in res.trace] == [e, 0]


def test_level_torsion_requires_isoclinic():
    ctx = analysis_context(5, 1, 2, 3, q_max=6)
    m = make_rank2(ctx, 1, 2, unit_seed=0)
    with pytest.raises(NotIsoclinic):
        level_torsion_isoclinic(m, 6)


def test_level_torsion_015_strict_below_bound():
    ctx = analysis_context(5, 1, 3, 5, q_max=9)
    m = make_permutational(ctx, PermSpec(full_cycle(3), (0, 1, 5)))
    res = level_torsion_isoclinic(m, 9)
    assert res.exact and res.value == 5
    assert theorem12_bound(m.slope_data()) == 7


def test_level_torsion_dual_invariance():
    ctx = analysis_context(5, 1, 3, 5, q_max=9, slack=6)
    m = make_permutational(ctx, PermSpec(full_cycle(3), (0, 1, 5)))
    d = dual_twisted(m)
    rm = level_torsion_isoclinic(m, 6)
    rd = level_torsion_isoclinic(d, 6)
    assert rm.exact and rd.exact and rm.value == rd.value
    assert [t.delta for t in rm.trace] == [t.delta for t in rd.trace]


def test_horizon_exhausted_interval():
    # ordinary-but-not-quasi-special isoclinic inputs do not exist at rank 1;
    # force an interval by stopping the scan before the period
    ctx = analysis_context(5, 1, 3, 5, q_max=9)
    m = make_permutational(ctx, PermSpec(full_cycle(3), (0, 1, 5)))
    res = level_torsion_isoclinic(m, 2)  # period is 3; horizon too small
    assert not res.exact
    assert res.certificate.kind == "horizon" and res.certificate.param == 2
    assert res.lower == 5 and res.upper == theorem12_bound(m.slope_data()) == 7
    full = level_torsion_isoclinic(m, 9)
    assert full.exact and res.lower <= full.value <= res.upper


# -- cross terms and sums ----------------------------------------------------

def test_cross_level_slope_order():
    ctx = analysis_context(5, 1, 2, 2, q_max=8)
    lo = crystal_new(ctx, WMatrix.from_rows(ctx, [[1]]))
    hi = crystal_new(ctx, WMatrix.from_rows(ctx, [[25]]))
    res = cross_level(lo, hi, 8)
    assert res.exact and res.value == 0
    with pytest.raises(SlopeOrderViolated):
        cross_level(hi, lo, 8)


def test_cross_level_diagonal_matches_isoclinic():
    ctx = analysis_context(5, 1, 3, 2, q_max=9)
    m = make_k3_isoclinic(ctx, 3)
    assert cross_level(m, m, 9).value == level_torsion_isoclinic(m, 9).value


def test_cross_level_k3_blocks_bounded():
    ctx = analysis_context(3, 1, 4, 2, q_max=16)
    a = make_k3_isoclinic(ctx, 3)
    b = make_k3_isoclinic(ctx, 4)
    res = cross_level(a, b, 16)
    assert res.exact and res.value <= 2
    assert res.certificate.kind == "period" and res.certificate.param == 12


def test_level_torsion_sum_distinct_ordinary_slopes():
    ctx = analysis_context(5, 1, 2, 3, q_max=8)
    a = crystal_new(ctx, WMatrix.from_rows(ctx, [[1]]))
    b = crystal_new(ctx, WMatrix.from_rows(ctx, [[5 ** 3]]))
    res = level_torsion_sum([a, b], 8)
    assert res.exact and res.value == 1
    assert res.certificate.kind == "epsilon"


def test_level_torsion_sum_single_ordinary():
    ctx = analysis_context(5, 1, 2, 1, q_max=4)
    m = crystal_new(ctx, WMatrix.from_rows(ctx, [[5, 0], [0, 5]]))
    res = level_torsion_sum([m], 4)
    assert res.exact and res.value == 0


def test_level_torsion_sum_k3_pieces():
    ctx = analysis_context(3, 1, 7, 2, q_max=28)
    iso = make_k3_isoclinic(ctx, 3)
    ni = make_k3_nonisoclinic(ctx, 1, 0, 1)
    res = level_torsion_sum([iso] + ni.blocks())
    assert res.exact and res.value == 2
    assert res.value >= level_torsion_isoclinic(iso, 9).value


def test_level_torsion_sum_rejects_nonisoclinic():
    ctx = analysis_context(5, 1, 2, 3, q_max=8)
    m = make_rank2(ctx, 1, 2, unit_seed=1)
    with pytest.raises(NotIsoclinic):
        level_torsion_sum([m], 8)


def test_sum_respects_direct_sum_estimate():
    ctx = analysis_context(2, 1, 6, 2, q_max=24)
    a = make_k3_isoclinic(ctx, 3)
    b = make_k3_isoclinic(ctx, 3)
    na = level_torsion_isoclinic(a, 12).value
    res = level_torsion_sum([a, b], 12)
    assert res.exact
    assert res.value <= direct_sum_estimate([na, na])


# -- dispatch ----------------------------------------------------------------

def test_isomorphism_number_ordinary():
    ctx = analysis_context(5, 1, 2, 1, q_max=4)
    m = crystal_new(ctx, WMatrix.from_rows(ctx, [[5, 0], [0, 5]]))
    rep = isomorphism_number(m, 4)
    assert rep.n_status == "equal" and rep.n_value == 0
    assert rep.slope_data.ordinary


def test_isomorphism_number_rank2_unit_root():
    # non-isoclinic rank 2 with Newton slope 0: splits, n = 1
    ctx = analysis_context(5, 1, 2, 2, q_max=8)
    m = crystal_new(ctx, WMatrix.from_rows(ctx, [[1, 1], [0, 25]]))
    rep = isomorphism_number(m, 8)
    assert rep.n_status == "family-formula" and rep.n_value == 1


def test_isomorphism_number_needs_decomposition():
    # rank 3, Newton slopes {0, 1, 2}: no family formula applies
    ctx = analysis_context(5, 1, 3, 3, q_max=6)
    m = crystal_new(ctx, WMatrix.from_rows(
        ctx, [[1, 1, 0], [0, 5, 1], [0, 0, 25]]))
    rep = isomorphism_number(m, 6)
    assert rep.n_status == "needs-decomposition" and rep.n_value is None
    assert rep.ell is None


def test_isomorphism_number_bounds_section():
    ctx = analysis_context(5, 1, 2, 1, q_max=4)
    m = make_permutational(ctx, PermSpec(full_cycle(2), (0, 1)))
    rep = isomorphism_number(m, 4)
    assert rep.bounds["theorem12"] == 1
    assert rep.bounds["quasi_special"] == 1
    assert rep.bounds["pdiv"] == 1
    assert rep.bounds["permutational"] == 1
    assert rep.n_value == 1
