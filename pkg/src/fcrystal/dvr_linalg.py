"""Matrix algebra over the truncated discrete valuation ring.

Provides exact elementary divisor valuations (Smith normal form over the
DVR), entrywise Frobenius twists, a division-free characteristic polynomial
(Samuelson-Berkowitz), and Newton polygon slopes from coefficient
valuations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ContextMismatch,
    DimensionMismatch,
    PrecisionExhausted,
    SingularAtPrecision,
)
from .witt import PrimeContext, Valuation, WittApprox


class WMatrix:
    """A rows x cols matrix over a PrimeContext, entries stored row-major
    as raw coefficient tuples."""

    __slots__ = ("rows", "cols", "entries", "ctx")

    def __init__(self, ctx: PrimeContext, rows: int, cols: int, entries):
        if len(entries) != rows * cols:
            raise DimensionMismatch("entry count does not match the shape")
        self.ctx = ctx
        self.rows = rows
        self.cols = cols
        self.entries = tuple(entries)

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def from_rows(ctx, rows_of_values):
        """Build from nested lists whose items are ints, coefficient lists,
        or WittApprox values."""
        nrows = len(rows_of_values)
        ncols = len(rows_of_values[0]) if nrows else 0
        entries = []
        for row in rows_of_values:
            if len(row) != ncols:
                raise DimensionMismatch("ragged rows")
            for item in row:
                if isinstance(item, WittApprox):
                    if not ctx.same_ring(item.ctx):
                        raise ContextMismatch("entry from a different context")
                    entries.append(item.coeffs)
                elif isinstance(item, int):
                    entries.append(ctx.from_int(item))
                else:
                    entries.append(ctx.from_coeffs(item))
        return WMatrix(ctx, nrows, ncols, entries)

    @staticmethod
    def identity(ctx, n):
        one, zero = ctx.one, ctx.zero
        return WMatrix(ctx, n, n,
                       [one if i == j else zero
                        for i in range(n) for j in range(n)])

    @staticmethod
    def zeros(ctx, rows, cols):
        return WMatrix(ctx, rows, cols, [ctx.zero] * (rows * cols))

    # -- access ---------------------------------------------------------------

    def at(self, i, j):
        return self.entries[i * self.cols + j]

    def entry(self, i, j) -> WittApprox:
        return WittApprox(self.ctx, self.at(i, j))

    def to_lists(self):
        return [[list(self.at(i, j)) for j in range(self.cols)]
                for i in range(self.rows)]

    def __eq__(self, other):
        return (isinstance(other, WMatrix)
                and self.rows == other.rows and self.cols == other.cols
                and self.entries == other.entries
                and self.ctx.same_ring(other.ctx))

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        return f"WMatrix({self.rows}x{self.cols} over {self.ctx!r})"

    # -- algebra ----------------------------------------------------------------

    def transpose(self):
        return WMatrix(self.ctx, self.cols, self.rows,
                       [self.at(i, j)
                        for j in range(self.cols) for i in range(self.rows)])

    def scale_p(self, k: int):
        """Multiply every entry by p^k (k >= 0)."""
        ctx = self.ctx
        pk = ctx.p_power(k)
        return WMatrix(ctx, self.rows, self.cols,
                       [ctx.mul(e, pk) for e in self.entries])

    def map_entries(self, fn):
        return WMatrix(self.ctx, self.rows, self.cols,
                       [fn(e) for e in self.entries])


def matrix_multiply(a: WMatrix, b: WMatrix) -> WMatrix:
    if a.ctx is not b.ctx and not a.ctx.same_ring(b.ctx):
        raise ContextMismatch("matrices from different contexts")
    if a.cols != b.rows:
        raise DimensionMismatch(f"{a.rows}x{a.cols} times {b.rows}x{b.cols}")
    ctx = a.ctx
    n, k, mcols = a.rows, a.cols, b.cols
    mul, add, zero = ctx.mul, ctx.add, ctx.zero
    out = []
    for i in range(n):
        arow = a.entries[i * k:(i + 1) * k]
        for j in range(mcols):
            acc = zero
            for t in range(k):
                x = arow[t]
                if any(x):
                    acc = add(acc, mul(x, b.entries[t * mcols + j]))
            out.append(acc)
    return WMatrix(ctx, n, mcols, out)


def sigma_twist(a: WMatrix, k: int) -> WMatrix:
    ctx = a.ctx
    k %= ctx.m
    if k == 0:
        return a
    return a.map_entries(lambda e: ctx.sigma(e, k))


def block_diagonal(blocks) -> WMatrix:
    ctx = blocks[0].ctx
    for b in blocks[1:]:
        if b.ctx is not ctx and not ctx.same_ring(b.ctx):
            raise ContextMismatch("blocks from different contexts")
    n = sum(b.rows for b in blocks)
    out = WMatrix.zeros(ctx, n, n)
    entries = list(out.entries)
    off = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                entries[(off + i) * n + (off + j)] = b.at(i, j)
        off += b.rows
    return WMatrix(ctx, n, n, entries)


# ---------------------------------------------------------------------------
# Smith normal form valuations

def elementary_divisor_valuations(a: WMatrix):
    """Valuations e_1 <= ... <= e_r of the Smith form diag(p^{e_i}).

    Pivots on a minimum-valuation entry (smallest (row, col) on ties),
    extracts the unit factor, clears its row and column, and recurses on
    the complement.  All returned valuations are exact; if a pivot cannot
    be certified below the precision ceiling the computation refuses with
    PrecisionExhausted rather than returning a doubtful value.
    """
    if a.rows != a.cols:
        raise DimensionMismatch("square matrix required")
    ctx = a.ctx
    n = a.rows
    if n == 0:
        return []
    m = [list(a.entries[i * n:(i + 1) * n]) for i in range(n)]
    val = ctx.val
    divisors = []
    for step in range(n):
        best = None
        for i in range(step, n):
            row = m[i]
            for j in range(step, n):
                v = val(row[j])
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
                    if v == 0:
                        break
            if best is not None and best[0] == 0:
                break
        if best is None:
            if step == 0:
                raise SingularAtPrecision(
                    "determinant is indistinguishable from 0 at this precision")
            raise PrecisionExhausted(
                "remaining block vanishes at this precision; "
                f"need more than {ctx.N} digits",
                needed=ctx.N + 1)
        v, pi, pj = best
        if v >= ctx.N - 1:
            raise PrecisionExhausted(
                f"elementary divisor {v} too close to precision {ctx.N}",
                needed=v + 2)
        divisors.append(v)
        if pi != step:
            m[step], m[pi] = m[pi], m[step]
        if pj != step:
            for row in m:
                row[step], row[pj] = row[pj], row[step]
        pivot = m[step][step]
        unit_inv = ctx.inv_unit(ctx.div_p(pivot, v))
        # clear the column below the pivot
        for i in range(step + 1, n):
            x = m[i][step]
            if any(x):
                factor = ctx.mul(ctx.div_p(x, v), unit_inv)
                prow = m[step]
                irow = m[i]
                for j in range(step, n):
                    irow[j] = ctx.sub(irow[j], ctx.mul(factor, prow[j]))
        # clear the row right of the pivot (only row `step` is affected now)
        prow = m[step]
        for j in range(step + 1, n):
            x = prow[j]
            if any(x):
                factor = ctx.mul(ctx.div_p(x, v), unit_inv)
                prow[j] = ctx.sub(prow[j], ctx.mul(factor, pivot))
    divisors.sort()
    return divisors


# ---------------------------------------------------------------------------
# characteristic polynomial (Samuelson-Berkowitz, division-free)

def char_poly_coeffs(a: WMatrix):
    """Coefficients c_0..c_n of det(tI - A), low degree first, as raw
    elements; c_n = 1.  Division-free, so coefficient valuations are
    trustworthy up to the working precision."""
    if a.rows != a.cols:
        raise DimensionMismatch("square matrix required")
    ctx = a.ctx
    n = a.rows
    mul, add, neg, zero = ctx.mul, ctx.add, ctx.neg, ctx.zero
    vec = [ctx.one]                     # char poly of the 0x0 block, high first
    for k in range(1, n + 1):
        akk = a.at(k - 1, k - 1)
        row = [a.at(k - 1, j) for j in range(k - 1)]
        col = [a.at(i, k - 1) for i in range(k - 1)]
        t = [ctx.one, neg(akk)]
        w = col
        for step in range(2, k + 1):
            dot = zero
            for x, y in zip(row, w):
                dot = add(dot, mul(x, y))
            t.append(neg(dot))
            if step < k:
                w = [
                    _dot(ctx, [a.at(i, j) for j in range(k - 1)], w)
                    for i in range(k - 1)
                ]
        new_vec = []
        for i in range(k + 1):
            acc = zero
            lo = max(0, i - k)
            for j in range(lo, min(i, k - 1) + 1):
                acc = add(acc, mul(t[i - j], vec[j]))
            new_vec.append(acc)
        vec = new_vec
    vec.reverse()                       # now low degree first
    return vec


def _dot(ctx, xs, ys):
    acc = ctx.zero
    for x, y in zip(xs, ys):
        acc = ctx.add(acc, ctx.mul(x, y))
    return acc


@dataclass(frozen=True)
class PolyVal:
    """Coefficient valuations of a monic polynomial, indexed by power."""

    coeff_vals: tuple  # tuple of Valuation, index = power of t
    n: int             # precision these valuations were read at

    @property
    def degree(self):
        return len(self.coeff_vals) - 1


def char_poly(a: WMatrix) -> PolyVal:
    ctx = a.ctx
    coeffs = char_poly_coeffs(a)
    vals = []
    for c in coeffs:
        v = ctx.val(c)
        vals.append(Valuation.exact_value(v) if v is not None
                    else Valuation.at_least(ctx.N))
    return PolyVal(tuple(vals), ctx.N)


def determinant_valuation(a: WMatrix) -> Valuation:
    """Valuation of det(A): (-1)^n times the constant char poly coefficient."""
    ctx = a.ctx
    c0 = char_poly_coeffs(a)[0]
    v = ctx.val(c0)
    return Valuation.exact_value(v) if v is not None else Valuation.at_least(ctx.N)


# ---------------------------------------------------------------------------
# Newton polygons

def newton_polygon_slopes(pv: PolyVal, denominator: int = 1):
    """Multiset (sorted list) of slopes of the lower convex hull of
    (i, val c_i), each divided by `denominator`, with multiplicities equal
    to the horizontal run lengths."""
    if denominator < 1:
        raise ValueError("denominator must be >= 1")
    r = pv.degree
    lead = pv.coeff_vals[r]
    if not lead.exact or lead.value != 0:
        raise PrecisionExhausted("leading coefficient is not a unit")
    if not pv.coeff_vals[0].exact:
        raise PrecisionExhausted(
            "constant coefficient vanishes at this precision", needed=pv.n + 1)
    pts = [(i, v.value) for i, v in enumerate(pv.coeff_vals) if v.exact]
    # lower convex hull, left to right (monotone chain)
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    # inexact points must lie on or above the hull, else the hull is unknown
    hull_at = _hull_evaluator(hull)
    for i, v in enumerate(pv.coeff_vals):
        if not v.exact and hull_at(i) > v.value:
            raise PrecisionExhausted(
                f"coefficient of t^{i} vanishes below the Newton polygon",
                needed=v.value + 1)
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = Fraction(y1 - y2, x2 - x1) / denominator
        slopes.extend([s] * (x2 - x1))
    slopes.sort()
    return slopes


def _hull_evaluator(hull):
    def at(x):
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            if x1 <= x <= x2:
                return Fraction(y1) + Fraction(y2 - y1, x2 - x1) * (x - x1)
        return Fraction(hull[-1][1]) if hull else Fraction(0)
    return at


def is_monomial(a: WMatrix) -> bool:
    """True when every row and column carries exactly one apparent nonzero."""
    if a.rows != a.cols:
        return False
    ctx = a.ctx
    n = a.rows
    row_counts = [0] * n
    col_counts = [0] * n
    for i in range(n):
        for j in range(n):
            if ctx.val(a.at(i, j)) is not None:
                row_counts[i] += 1
                col_counts[j] += 1
    return all(c == 1 for c in row_counts) and all(c == 1 for c in col_counts)
