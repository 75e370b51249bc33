"""Constructors and combinatorial oracles for the explicit families:
permutational/cyclic crystals, K3-type crystals, rank-2 crystals, and the
supersingular-like optimal examples."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .crystal import AlphaBetaDelta, FCrystal, crystal_new, direct_sum
from .dvr_linalg import WMatrix
from .errors import BadParameters, NotACycle, RankTooSmall
from .witt import PrimeContext


@dataclass(frozen=True)
class PermSpec:
    """A permutation pi of {0, ..., r-1} together with a nondecreasing
    exponent vector e; the crystal maps v_i to p^{e_i} v_{pi(i)}."""

    pi: tuple
    e: tuple

    def __post_init__(self):
        r = len(self.pi)
        if sorted(self.pi) != list(range(r)):
            raise BadParameters("pi is not a permutation of 0..r-1")
        if len(self.e) != r:
            raise BadParameters("e must have one exponent per index")
        if any(x < 0 for x in self.e):
            raise BadParameters("exponents must be >= 0")
        if list(self.e) != sorted(self.e):
            raise BadParameters("e must be sorted nondecreasing")

    @property
    def r(self):
        return len(self.pi)


def full_cycle(r: int) -> tuple:
    """The cycle 0 -> 1 -> ... -> r-1 -> 0."""
    return tuple(range(1, r)) + (0,)


def make_permutational(ctx: PrimeContext, spec: PermSpec) -> FCrystal:
    """Monomial crystal with entry p^{e_i} at position (pi(i), i)."""
    r = spec.r
    rows = [[0] * r for _ in range(r)]
    for i in range(r):
        rows[spec.pi[i]][i] = ctx.p ** spec.e[i]
    return crystal_new(ctx, WMatrix.from_rows(ctx, rows))


def _cycles(pi):
    seen = [False] * len(pi)
    out = []
    for start in range(len(pi)):
        if seen[start]:
            continue
        cyc = []
        i = start
        while not seen[i]:
            seen[i] = True
            cyc.append(i)
            i = pi[i]
        out.append(cyc)
    return out


def permutational_blocks(ctx: PrimeContext, spec: PermSpec):
    """One cyclic crystal per cycle of pi; each block is isoclinic, so the
    blocks certify the permutational crystal through the direct-sum path."""
    out = []
    for cyc in _cycles(spec.pi):
        k = len(cyc)
        rows = [[0] * k for _ in range(k)]
        for pos in range(k):
            rows[(pos + 1) % k][pos] = ctx.p ** spec.e[cyc[pos]]
        out.append(crystal_new(ctx, WMatrix.from_rows(ctx, rows)))
    return out


def cyclic_window_oracle(spec: PermSpec, q: int) -> AlphaBetaDelta:
    """Extremal divisor valuations of the q-th iterate of a cyclic crystal,
    computed purely combinatorially: the divisors are the length-q window
    sums e_l + e_{pi(l)} + ... along the cycle."""
    if q < 1:
        raise ValueError("q must be >= 1")
    cycles = _cycles(spec.pi)
    if len(cycles) != 1:
        raise NotACycle("the window oracle needs a single cycle")
    r = spec.r
    sums = []
    for start in range(r):
        acc = 0
        i = start
        for _ in range(q):
            acc += spec.e[i]
            i = spec.pi[i]
        sums.append(acc)
    return AlphaBetaDelta(q=q, alpha=min(sums), beta=max(sums),
                          delta=max(sums) - min(sums))


def permutational_closed_bound(e) -> int:
    """Sum of the top-versus-bottom exponent gaps over the first
    floor(r/2) positions of the sorted exponent vector."""
    e = sorted(e)
    r = len(e)
    return sum(e[r - i - 1] - e[i] for i in range(r // 2))


def make_supersingular_like(ctx: PrimeContext, d: int, e: int) -> FCrystal:
    """Rank-2d full cycle with exponents (0^d, e^d): isoclinic of slope
    e/2 with isomorphism number d*e, which attains the closed-form bound."""
    if d < 1 or e < 1:
        raise BadParameters("d and e must be >= 1")
    spec = PermSpec(full_cycle(2 * d), (0,) * d + (e,) * d)
    return make_permutational(ctx, spec)


def make_k3_isoclinic(ctx: PrimeContext, r: int) -> FCrystal:
    """Full cycle with exponents (0, 1, ..., 1, 2): isoclinic of slope 1
    with Hodge numbers h_0 = h_2 = 1, h_1 = r - 2."""
    if r < 3:
        raise RankTooSmall("the K3 shape needs rank >= 3")
    spec = PermSpec(full_cycle(r), (0,) + (1,) * (r - 2) + (2,))
    return make_permutational(ctx, spec)


def make_k3_nonisoclinic(ctx: PrimeContext, r1: int, mid: int,
                         r2: int) -> FCrystal:
    """Declared direct sum of three isoclinic blocks of Newton slopes
    r1/(r1+1), 1 (mid times), and (r2+2)/(r2+1); total rank r1+r2+mid+2
    with Hodge numbers h_0 = h_2 = 1, h_1 = r - 2."""
    if r1 < 1 or r2 < 1 or mid < 0:
        raise BadParameters("need r1, r2 >= 1 and mid >= 0")
    p = ctx.p
    k1 = r1 + 1
    rows1 = [[0] * k1 for _ in range(k1)]
    for i in range(r1):
        rows1[i + 1][i] = p
    rows1[0][r1] = 1
    blocks = [crystal_new(ctx, WMatrix.from_rows(ctx, rows1))]
    if mid:
        rows2 = [[p if i == j else 0 for j in range(mid)] for i in range(mid)]
        blocks.append(crystal_new(ctx, WMatrix.from_rows(ctx, rows2)))
    k3 = r2 + 1
    rows3 = [[0] * k3 for _ in range(k3)]
    for i in range(r2):
        rows3[i + 1][i] = p
    rows3[0][r2] = p * p
    blocks.append(crystal_new(ctx, WMatrix.from_rows(ctx, rows3)))
    return direct_sum(blocks)


def seeded_unit(ctx: PrimeContext, seed: int):
    """Deterministic valuation-0 element.  Each of the m coefficients draws
    its own stream of base-p digits keyed by (seed, coefficient index), so
    raising the precision N extends the same element instead of resampling
    it.  The first digit of coefficient 0 is forced nonzero."""
    p = ctx.p
    coeffs = []
    for j in range(ctx.m):
        rng = random.Random(f"{seed}:{j}")
        digits = [rng.randrange(p) for _ in range(ctx.N)]
        if j == 0 and digits[0] == 0:
            digits[0] = 1 + rng.randrange(p - 1)
        value = 0
        for d in reversed(digits):
            value = value * p + d
        coeffs.append(value)
    return ctx.from_coeffs(coeffs)


def make_rank2(ctx: PrimeContext, l1: int, l2: int, unit_seed: int) -> FCrystal:
    """The nonsplit rank-2 crystal [[p^l1, u], [0, p^l2]] with a seeded
    unit u; Newton slopes {l1, l2}, valid in the regime 0 < l1 < l2."""
    if l1 == 0:
        raise BadParameters(
            "l1 = 0 is the split regime; build a direct_sum of two rank-1 "
            "crystals instead")
    if not 0 < l1 < l2:
        raise BadParameters("need 0 < l1 < l2")
    u = seeded_unit(ctx, unit_seed)
    a = WMatrix.from_rows(ctx, [[ctx.p ** l1, u], [0, ctx.p ** l2]])
    return crystal_new(ctx, a)
