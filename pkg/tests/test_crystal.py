import random
from fractions import Fraction

import pytest

from fcrystal.crystal import (
    alpha_beta_delta,
    analysis_context,
    crystal_new,
    detect_period,
    direct_sum,
    dual_twisted,
    iterate_matrix,
    rescale,
    slope_data,
)
from fcrystal.dvr_linalg import WMatrix, matrix_multiply, sigma_twist
from fcrystal.errors import (
    NonIntegralRescale,
    PrecisionExhausted,
    SingularAtPrecision,
)
from fcrystal.witt import context_create


def cyclic(ctx, exponents):
    r = len(exponents)
    rows = [[0] * r for _ in range(r)]
    for i in range(r):
        rows[(i + 1) % r][i] = ctx.p ** exponents[i]
    return crystal_new(ctx, WMatrix.from_rows(ctx, rows))


def test_crystal_new_rejects_singular():
    ctx = context_create(5, 1, 8)
    with pytest.raises(SingularAtPrecision):
        crystal_new(ctx, WMatrix.zeros(ctx, 2, 2))


def test_slope_data_cyclic_012():
    ctx = context_create(5, 1, 20)
    m = cyclic(ctx, (0, 1, 2))
    sd = slope_data(m)
    assert sd.hodge == (0, 1, 2)
    assert sd.newton == (Fraction(1),) * 3
    assert sd.isoclinic and sd.lam == 1 and not sd.ordinary
    assert sd.hodge_numbers == {0: 1, 1: 1, 2: 1}
    assert sd.hodge_polygon() == [(0, 0), (1, 0), (2, 1), (3, 3)]
    assert sd.newton_polygon() == [(0, 0), (1, 1), (2, 2), (3, 3)]


def test_slope_data_identity():
    ctx = context_create(3, 1, 8)
    m = crystal_new(ctx, WMatrix.identity(ctx, 3))
    sd = slope_data(m)
    assert sd.hodge == (0, 0, 0)
    assert sd.newton == (Fraction(0),) * 3
    assert sd.isoclinic and sd.ordinary


def test_slope_data_rank2_upper_triangular():
    ctx = context_create(5, 1, 20)
    p = 5
    a = WMatrix.from_rows(ctx, [[p, 3], [0, p ** 2]])
    sd = slope_data(crystal_new(ctx, a))
    assert sorted(sd.newton) == [1, 2]
    assert not sd.isoclinic
    assert sd.hodge == (0, 3)


def test_slope_data_m2_half_slope():
    # rank 2 over W(F_{p^2}): Newton slopes need the sigma^2-linearization
    ctx = context_create(3, 2, 16)
    a = WMatrix.from_rows(ctx, [[0, 3], [1, 0]])
    sd = slope_data(crystal_new(ctx, a))
    assert sd.newton == (Fraction(1, 2), Fraction(1, 2))


def test_iterate_matrix_cocycle():
    ctx = context_create(3, 2, 24)
    rng = random.Random(3)
    rows = [[[rng.randrange(30), rng.randrange(30)] for _ in range(3)]
            for _ in range(3)]
    rows[0][0] = [1, 0]  # keep it nonsingular with high probability
    m = crystal_new(ctx, WMatrix.from_rows(ctx, rows))
    # iterate(q) must equal A * sigma(A) * ... * sigma^{q-1}(A)
    naive = m.A
    for q in range(2, 6):
        naive = matrix_multiply(naive, sigma_twist(m.A, q - 1))
        assert iterate_matrix(m, q) == naive


def test_iterate_matrix_precision_guard():
    ctx = context_create(5, 1, 10)
    m = cyclic(ctx, (0, 2))
    with pytest.raises(PrecisionExhausted) as exc:
        iterate_matrix(m, 30)
    assert exc.value.needed == 62


def test_alpha_beta_delta_and_sum_rule():
    ctx = context_create(5, 1, 32)
    m = cyclic(ctx, (0, 1, 5))
    s = 6
    for q in range(1, 7):
        abd = alpha_beta_delta(m, q)
        assert abd.delta == abd.beta - abd.alpha >= 0
        divisors = m.iterate_divisors(q)
        assert sum(divisors) == q * s


def test_detect_period():
    ctx = context_create(5, 1, 40)
    m = cyclic(ctx, (0, 1, 5))
    assert detect_period(m, 12) == (3, 6)
    ctx2 = context_create(5, 1, 20)
    split = crystal_new(ctx2, WMatrix.from_rows(ctx2, [[1, 0], [0, 5]]))
    assert detect_period(split, 6) is None


def test_rescale():
    ctx = context_create(5, 1, 20)
    m = cyclic(ctx, (1, 2))
    up = rescale(m, 2)
    assert up.hodge_slopes() == [3, 4]
    down = rescale(m, -1)
    assert down.hodge_slopes() == [0, 1]
    assert down.ctx.N == 19
    with pytest.raises(NonIntegralRescale):
        rescale(m, -2)
    # delta trace is rescale-invariant
    for q in (1, 2, 3):
        assert alpha_beta_delta(m, q).delta == alpha_beta_delta(down, q).delta


def test_dual_twisted_diagonal():
    ctx = context_create(5, 1, 30)
    p = 5
    a = WMatrix.from_rows(ctx, [[1, 0, 0], [0, p, 0], [0, 0, p ** 2]])
    d = dual_twisted(crystal_new(ctx, a))
    # slopes reflect: {e - e_j} = {2, 1, 0}
    assert d.hodge_slopes() == [0, 1, 2]


def test_dual_twisted_involution_on_slopes():
    ctx = context_create(5, 1, 60)
    m = cyclic(ctx, (0, 1, 5))
    d = dual_twisted(m)
    sd, sdd = slope_data(m), slope_data(d)
    e = sd.e_max
    assert sorted(e - x for x in sd.hodge) == list(sdd.hodge)
    assert sorted(e - s for s in sd.newton) == list(sdd.newton)
    dd = dual_twisted(d)
    assert slope_data(dd).hodge == sd.hodge
    assert slope_data(dd).newton == sd.newton


def test_dual_twisted_nontrivial_m():
    ctx = context_create(3, 2, 40)
    rng = random.Random(9)
    rows = [[[rng.randrange(9), rng.randrange(9)] for _ in range(2)]
            for _ in range(2)]
    rows[0][0] = [1, 1]
    m = crystal_new(ctx, WMatrix.from_rows(ctx, rows).scale_p(0))
    d = dual_twisted(m)
    e = slope_data(m).e_max
    # duality identities on the extremal divisors
    for q in range(1, 5):
        am, bm = alpha_beta_delta(m, q), alpha_beta_delta(m, q)
        ad, bd = alpha_beta_delta(d, q), alpha_beta_delta(d, q)
        assert am.alpha + bd.beta == q * e
        assert ad.alpha + bm.beta == q * e


def test_direct_sum_structure():
    ctx = context_create(5, 1, 20)
    a = cyclic(ctx, (0, 2))
    b = cyclic(ctx, (1,))
    s = direct_sum([a, b])
    assert s.r == 3 and s.summands == (2, 1)
    assert s.hodge_slopes() == [0, 1, 2]
    blocks = s.blocks()
    assert len(blocks) == 2
    assert blocks[0].A == a.A and blocks[1].A == b.A


def test_crystal_new_validates_declared_blocks():
    ctx = context_create(5, 1, 10)
    a = WMatrix.from_rows(ctx, [[1, 1], [0, 1]])
    with pytest.raises(ValueError):
        crystal_new(ctx, a, summands=(1, 1))
    with pytest.raises(ValueError):
        crystal_new(ctx, a, summands=(1,))


def test_analysis_context_sizing():
    ctx = analysis_context(5, 1, 3, 2, q_max=10)
    assert ctx.N == 22
    ctx2 = analysis_context(5, 2, 3, 2)  # default horizon 4*3*3 = 36
    assert ctx2.N == 36 * 2 + 2
