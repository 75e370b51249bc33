"""F-crystals over the truncated Witt vectors.

An F-crystal is stored as the matrix A of its Frobenius-semilinear map in a
fixed basis: column j holds the coordinates of the image of the j-th basis
vector.  Iterates multiply as A * sigma(A) * ... * sigma^{q-1}(A) and are
memoized with a binary splitting scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .dvr_linalg import (
    WMatrix,
    block_diagonal,
    char_poly,
    char_poly_coeffs,
    elementary_divisor_valuations,
    matrix_multiply,
    newton_polygon_slopes,
    sigma_twist,
)
from .errors import (
    ContextMismatch,
    NonIntegralRescale,
    PrecisionExhausted,
    SingularAtPrecision,
)
from .witt import PrimeContext, context_create


def required_precision(q_max: int, e_max: int) -> int:
    """Smallest precision at which every divisor of the q-th iterate,
    q <= q_max, stays certifiably below the truncation ceiling."""
    return q_max * e_max + 2


def analysis_context(p: int, m: int, rank: int, e_max: int,
                     q_max: int | None = None, slack: int = 0) -> PrimeContext:
    """Context sized for scans up to q_max plus the rank-m linearization
    used for Newton slopes."""
    if q_max is None:
        q_max = default_horizon(rank, e_max)
    n = required_precision(max(q_max, m * rank), max(e_max, 1)) + slack
    return context_create(p, m, n)


def default_horizon(rank: int, e_max: int) -> int:
    """Covers the period of every quasi-special input of this rank, with
    margin for period multiples."""
    return 4 * rank * (e_max + 1)


@dataclass(frozen=True)
class SlopeData:
    """Hodge and Newton invariants of one crystal."""

    hodge: tuple            # e_1 <= ... <= e_r
    hodge_numbers: dict     # i -> h_i (only nonzero entries)
    newton: tuple           # sorted Fractions with multiplicity
    isoclinic: bool
    lam: Fraction | None    # the unique Newton slope when isoclinic
    ordinary: bool          # all Hodge slopes equal

    @property
    def rank(self):
        return len(self.hodge)

    @property
    def e_min(self):
        return self.hodge[0]

    @property
    def e_max(self):
        return self.hodge[-1]

    @property
    def hodge_sum(self):
        return sum(self.hodge)

    def hodge_polygon(self):
        """Vertex list of the Hodge polygon."""
        verts = [(0, 0)]
        acc = 0
        for i, e in enumerate(self.hodge, start=1):
            acc += e
            verts.append((i, acc))
        return verts

    def newton_polygon(self):
        verts = [(0, Fraction(0))]
        acc = Fraction(0)
        for i, s in enumerate(self.newton, start=1):
            acc += s
            verts.append((i, acc))
        return verts

    @staticmethod
    def from_parts(hodge, newton):
        hodge = tuple(sorted(hodge))
        newton = tuple(sorted(Fraction(s) for s in newton))
        numbers = {}
        for e in hodge:
            numbers[e] = numbers.get(e, 0) + 1
        iso = len(set(newton)) == 1
        return SlopeData(
            hodge=hodge,
            hodge_numbers=numbers,
            newton=newton,
            isoclinic=iso,
            lam=newton[0] if iso else None,
            ordinary=hodge[0] == hodge[-1],
        )


@dataclass(frozen=True)
class AlphaBetaDelta:
    """Extremal divisor valuations of the q-th iterate; delta = beta - alpha."""

    q: int
    alpha: int
    beta: int
    delta: int


class FCrystal:
    """A rank-r free module with a Frobenius-semilinear map given by A."""

    def __init__(self, ctx: PrimeContext, a: WMatrix, summands=None,
                 _hodge=None):
        self.ctx = ctx
        self.r = a.rows
        self.A = a
        self.summands = tuple(summands) if summands else None
        self._iterates = {1: a}
        self._divisors = {}
        self._slope_data = None
        if _hodge is not None:
            self._divisors[1] = list(_hodge)

    # -- invariants ------------------------------------------------------------

    def hodge_slopes(self):
        return list(self.iterate_divisors(1))

    def iterate_divisors(self, q: int):
        if q not in self._divisors:
            self._divisors[q] = elementary_divisor_valuations(
                self.iterate_matrix(q))
        return self._divisors[q]

    def iterate_matrix(self, q: int) -> WMatrix:
        if q < 1:
            raise ValueError("q must be >= 1")
        if q == 1:
            return self.A
        e_max = self.hodge_slopes()[-1]
        need = required_precision(q, e_max)
        if need > self.ctx.N:
            raise PrecisionExhausted(
                f"iterate {q} needs precision {need}, have {self.ctx.N}",
                needed=need)
        return self._iterate(q)

    def _iterate(self, q):
        cache = self._iterates
        if q in cache:
            return cache[q]
        half = q // 2
        left = self._iterate(half)
        right = self._iterate(q - half)
        prod = matrix_multiply(left, sigma_twist(right, half))
        cache[q] = prod
        return prod

    def slope_data(self) -> SlopeData:
        if self._slope_data is None:
            hodge = self.hodge_slopes()
            m = self.ctx.m
            linearized = self.iterate_matrix(m)
            newton = newton_polygon_slopes(char_poly(linearized), m)
            sd = SlopeData.from_parts(hodge, newton)
            if sum(sd.newton) != sd.hodge_sum:
                raise PrecisionExhausted(
                    "Newton and Hodge polygon endpoints disagree; "
                    "precision too low for the linearized iterate",
                    needed=required_precision(m * self.r, max(hodge[-1], 1)))
            self._slope_data = sd
        return self._slope_data

    def blocks(self):
        """The declared direct summands as separate crystals."""
        if not self.summands:
            return [self]
        out = []
        off = 0
        for size in self.summands:
            rows = [[self.A.at(off + i, off + j) for j in range(size)]
                    for i in range(size)]
            out.append(FCrystal(self.ctx, WMatrix.from_rows(self.ctx, rows)))
            off += size
        return out

    def __repr__(self):
        return f"FCrystal(rank={self.r}, p={self.ctx.p}, m={self.ctx.m}, N={self.ctx.N})"


def crystal_new(ctx: PrimeContext, matrix: WMatrix, summands=None) -> FCrystal:
    """Validate and wrap a Frobenius matrix as an F-crystal."""
    if matrix.ctx is not ctx and not ctx.same_ring(matrix.ctx):
        raise ContextMismatch("matrix belongs to a different context")
    if matrix.rows != matrix.cols:
        raise ValueError("square matrix required")
    if summands:
        if sum(summands) != matrix.rows:
            raise ValueError("summand sizes must add up to the rank")
        _check_block_diagonal(ctx, matrix, summands)
    crystal = FCrystal(ctx, matrix, summands=summands)
    crystal.hodge_slopes()  # raises SingularAtPrecision for apparent-zero det
    return crystal


def _check_block_diagonal(ctx, matrix, summands):
    bounds = []
    off = 0
    for size in summands:
        bounds.append((off, off + size))
        off += size
    for i in range(matrix.rows):
        bi = next(b for b in bounds if b[0] <= i < b[1])
        for j in range(matrix.cols):
            if not (bi[0] <= j < bi[1]) and any(matrix.at(i, j)):
                raise ValueError(
                    f"entry ({i},{j}) is outside the declared block structure")


def iterate_matrix(m: FCrystal, q: int) -> WMatrix:
    return m.iterate_matrix(q)


def slope_data(m: FCrystal) -> SlopeData:
    return m.slope_data()


def alpha_beta_delta(m: FCrystal, q: int) -> AlphaBetaDelta:
    divisors = m.iterate_divisors(q)
    alpha, beta = divisors[0], divisors[-1]
    return AlphaBetaDelta(q=q, alpha=alpha, beta=beta, delta=beta - alpha)


def rescale(m: FCrystal, t: int) -> FCrystal:
    """Replace the map by p^t times the map.  For negative t the entries
    are divided exactly, which truncates the context to N + t digits."""
    if t == 0:
        return m
    e1 = m.hodge_slopes()[0]
    if t < -e1:
        raise NonIntegralRescale(
            f"rescaling by p^{t} would leave the lattice (smallest Hodge "
            f"slope is {e1})")
    ctx = m.ctx
    if t > 0:
        return FCrystal(ctx, m.A.scale_p(t), summands=m.summands)
    new_n = ctx.N + t
    if new_n < 3:
        raise PrecisionExhausted(
            f"rescaling by p^{t} leaves fewer than 3 trusted digits",
            needed=ctx.N - t + 3)
    tctx = ctx.truncate(new_n)
    entries = [tctx.from_coeffs(list(ctx.div_p(e, -t))) for e in m.A.entries]
    a = WMatrix(tctx, m.r, m.r, entries)
    return FCrystal(tctx, a, summands=m.summands)


def dual_twisted(m: FCrystal) -> FCrystal:
    """The dual crystal with the map multiplied by p^e, e the largest Hodge
    slope after normalizing the smallest slope to 0.

    The matrix is p^e times the transposed inverse of A; the inverse is
    carried exactly as (unit times p-power) divisions, at the cost of
    s = sum of Hodge slopes digits of precision.
    """
    m0 = rescale(m, -m.hodge_slopes()[0])
    ctx = m0.ctx
    hodge = m0.hodge_slopes()
    e, s = hodge[-1], sum(hodge)
    coeffs = char_poly_coeffs(m0.A)       # low degree first, monic
    c0 = coeffs[0]
    v0 = ctx.val(c0)
    if v0 is None or v0 != s:
        raise PrecisionExhausted(
            "determinant valuation not certifiable for the dual",
            needed=required_precision(1, max(e, 1)) + s)
    new_n = ctx.N - s
    if new_n < 3:
        raise PrecisionExhausted(
            "dual needs at least 3 trusted digits after dividing by the "
            f"determinant; have {new_n}",
            needed=ctx.N + (3 - new_n))
    # B = A^{r-1} + c_{r-1} A^{r-2} + ... + c_1 I  via Horner; A^{-1} = -B/c_0
    r = m0.r
    b = WMatrix.identity(ctx, r)
    for k in range(r - 1, 0, -1):
        b = matrix_multiply(m0.A, b)
        ck = coeffs[k]
        entries = list(b.entries)
        for i in range(r):
            idx = i * r + i
            entries[idx] = ctx.add(entries[idx], ck)
        b = WMatrix(ctx, r, r, entries)
    scaled = b.scale_p(e)                 # p^e * det(A) * A^{-1}, integral / p^s
    unit_inv = ctx.inv_unit(ctx.div_p(c0, s))
    tctx = ctx.truncate(new_n)
    out_entries = []
    for entry in scaled.entries:
        v = ctx.val(entry)
        if v is not None and v < s:
            raise PrecisionExhausted(
                "dual entry not divisible by the determinant p-power at "
                "this precision", needed=ctx.N + s)
        quotient = ctx.mul(ctx.div_p(entry, s), unit_inv)
        out_entries.append(tctx.from_coeffs(list(ctx.neg(quotient))))
    inv = WMatrix(tctx, r, r, out_entries)
    return FCrystal(tctx, inv.transpose())


def direct_sum(crystals) -> FCrystal:
    """Block-diagonal sum; the block structure is recorded."""
    crystals = list(crystals)
    if not crystals:
        raise ValueError("need at least one summand")
    ctx = crystals[0].ctx
    for c in crystals[1:]:
        if c.ctx is not ctx and not ctx.same_ring(c.ctx):
            raise ContextMismatch("summands from different contexts")
    sizes = []
    for c in crystals:
        if c.summands:
            sizes.extend(c.summands)
        else:
            sizes.append(c.r)
    a = block_diagonal([c.A for c in crystals])
    return FCrystal(ctx, a, summands=sizes)


def detect_period(m: FCrystal, q_max: int):
    """Smallest T <= q_max whose iterate is p^s times an invertible matrix,
    i.e. all elementary divisor valuations of the T-th iterate coincide.
    Returns (T, s) or None."""
    lam = Fraction(sum(m.hodge_slopes()), m.r)
    for t in range(1, q_max + 1):
        if (t * lam).denominator != 1:
            continue
        divisors = m.iterate_divisors(t)
        if divisors[0] == divisors[-1]:
            return t, divisors[0]
    return None
