"""Exact arithmetic in W(F_{p^m}) truncated at precision p^N.

Elements are represented as degree-< m polynomials in x with coefficients
in [0, p^N), reduced modulo a fixed monic lift of the canonical irreducible
polynomial of degree m over F_p.  The Frobenius automorphism acts by
substituting the Hensel-lifted root of the modulus that is congruent to
x^p mod p.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ContextMismatch, HenselFailure, NotPrime

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for every n below 3.3e24."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# small polynomial arithmetic over F_p, used only to pick the modulus

def _fp_polymulmod(a, b, f, p):
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    # reduce by monic f
    m = len(f) - 1
    for d in range(len(prod) - 1, m - 1, -1):
        c = prod[d]
        if c:
            prod[d] = 0
            for k in range(m):
                prod[d - m + k] = (prod[d - m + k] - c * f[k]) % p
    out = prod[:m]
    while len(out) < m:
        out.append(0)
    return out


def _fp_polypow_x(e, f, p):
    """x^e mod (f, p) by square and multiply."""
    m = len(f) - 1
    result = [1] + [0] * (m - 1)
    base = ([0, 1] + [0] * (m - 2))[:m] if m >= 2 else [0]
    if m == 1:
        # ring is F_p itself; x reduces to -f[0]
        base = [(-f[0]) % p]
    while e:
        if e & 1:
            result = _fp_polymulmod(result, base, f, p)
        base = _fp_polymulmod(base, base, f, p)
        e >>= 1
    return result


def _fp_polygcd(a, b, p):
    a, b = a[:], b[:]
    while any(b):
        while b and b[-1] == 0:
            b.pop()
        if not b:
            break
        inv = pow(b[-1], p - 2, p)
        b = [c * inv % p for c in b]
        while len(a) >= len(b) and any(a):
            while a and a[-1] == 0:
                a.pop()
            if len(a) < len(b):
                break
            c = a[-1]
            shift = len(a) - len(b)
            for k in range(len(b)):
                a[shift + k] = (a[shift + k] - c * b[k]) % p
        a, b = b, a
    return a


def _fp_is_irreducible(f, p):
    """f monic of degree m >= 1 with coefficient list, low degree first."""
    m = len(f) - 1
    xq = _fp_polypow_x(p ** m, f, p)
    xpoly = [0, 1] + [0] * (m - 2) if m >= 2 else [(-f[0]) % p]
    if xq != (xpoly + [0] * (m - len(xpoly))):
        return False
    d = 2
    mm = m
    primes = []
    while d * d <= mm:
        if mm % d == 0:
            primes.append(d)
            while mm % d == 0:
                mm //= d
        d += 1
    if mm > 1:
        primes.append(mm)
    for q in primes:
        g = _fp_polypow_x(p ** (m // q), f, p)
        diff = [(gi - xi) % p for gi, xi in zip(g, xpoly + [0] * (m - len(xpoly)))]
        gcd = _fp_polygcd(f[:], diff, p)
        deg = len([c for c in gcd if c]) and (max(i for i, c in enumerate(gcd) if c))
        if any(gcd) and deg > 0:
            return False
    return True


def canonical_modulus(p: int, m: int):
    """The first irreducible monic x^m + sum c_i x^i over F_p.

    Candidates are enumerated by the integer whose base-p digits are
    (c_0, c_1, ...); the first irreducible one wins.  For m = 1 the
    convention is the polynomial x itself.
    """
    if m == 1:
        return (0, 1)
    for k in range(p ** m):
        coeffs = []
        kk = k
        for _ in range(m):
            coeffs.append(kk % p)
            kk //= p
        f = coeffs + [1]
        if _fp_is_irreducible(f, p):
            return tuple(f)
    raise HenselFailure(f"no irreducible polynomial of degree {m} over F_{p}")


def _fp_poly_inverse(a, f, p):
    """Inverse of a in F_p[x]/(f) via extended Euclid."""
    m = len(f) - 1

    def deg(u):
        for i in range(len(u) - 1, -1, -1):
            if u[i]:
                return i
        return -1

    r0, r1 = f[:], (a[:] + [0] * (m + 1 - len(a)))
    s0, s1 = [0] * (m + 1), [1] + [0] * m
    while deg(r1) > 0:
        d0, d1 = deg(r0), deg(r1)
        if d0 < d1:
            r0, r1, s0, s1 = r1, r0, s1, s0
            continue
        c = r0[d0] * pow(r1[d1], p - 2, p) % p
        shift = d0 - d1
        for k in range(d1 + 1):
            r0[shift + k] = (r0[shift + k] - c * r1[k]) % p
        for k in range(m + 1 - shift):
            s0[shift + k] = (s0[shift + k] - c * s1[k]) % p
    d1 = deg(r1)
    if d1 != 0:
        raise HenselFailure("element not invertible mod p")
    c = pow(r1[0], p - 2, p)
    return [(si * c) % p for si in s1[:m]]


class PrimeContext:
    """The computational model of W(F_{p^m}) at precision p^N.

    Raw elements are tuples of m integers in [0, p^N).  WittApprox wraps a
    raw element together with its context; the heavy loops inside the matrix
    code work on raw tuples through the methods below.
    """

    def __init__(self, p, m, N, modulus, frob_image):
        self.p = p
        self.m = m
        self.N = N
        self.pn = p ** N
        self.modulus = modulus            # m+1 ints, monic, low degree first
        self.frob_image = frob_image      # raw element: sigma(x)
        self._sigma_images = None         # lazily built: sigma^k(x), k < m

    # -- canonical element constructors ------------------------------------

    def from_coeffs(self, coeffs) -> tuple:
        coeffs = list(coeffs)
        if len(coeffs) > self.m:
            coeffs = self._reduce_poly(coeffs)
        coeffs = coeffs + [0] * (self.m - len(coeffs))
        return tuple(int(c) % self.pn for c in coeffs)

    def from_int(self, n: int) -> tuple:
        return self.from_coeffs([n])

    @property
    def zero(self):
        return (0,) * self.m

    @property
    def one(self):
        return self.from_int(1)

    def p_power(self, k: int) -> tuple:
        return self.from_int(self.p ** k)

    # -- ring operations on raw tuples --------------------------------------

    def add(self, a, b):
        pn = self.pn
        return tuple((x + y) % pn for x, y in zip(a, b))

    def sub(self, a, b):
        pn = self.pn
        return tuple((x - y) % pn for x, y in zip(a, b))

    def neg(self, a):
        pn = self.pn
        return tuple((-x) % pn for x in a)

    def _reduce_poly(self, prod):
        """Reduce a coefficient list (low first) modulo (modulus, p^N)."""
        m, pn, f = self.m, self.pn, self.modulus
        prod = [c % pn for c in prod]
        for d in range(len(prod) - 1, m - 1, -1):
            c = prod[d]
            if c:
                prod[d] = 0
                for k in range(m):
                    prod[d - m + k] = (prod[d - m + k] - c * f[k]) % pn
        return prod[:m] + [0] * (m - len(prod))

    def mul(self, a, b):
        m, pn = self.m, self.pn
        if m == 1:
            return (a[0] * b[0] % pn,)
        prod = [0] * (2 * m - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        return tuple(self._reduce_poly(prod))

    def mul_int(self, a, n):
        pn = self.pn
        return tuple(x * n % pn for x in a)

    def compose(self, a, b):
        """Evaluate the polynomial with coefficient tuple a at the element b."""
        acc = self.zero
        for c in reversed(a):
            acc = self.mul(acc, b)
            acc = self.add(acc, self.from_int(c))
        return acc

    # -- valuation and division ---------------------------------------------

    def val(self, a):
        """Integer valuation, or None when indistinguishable from 0."""
        best = None
        for c in a:
            if c:
                v = _vp(c, self.p)
                if best is None or v < best:
                    best = v
                    if best == 0:
                        return 0
        return best

    def div_p(self, a, k: int):
        """Exact division by p^k; every coefficient must be divisible."""
        pk = self.p ** k
        return tuple(c // pk for c in a)

    def inv_unit(self, a):
        """Inverse of a valuation-0 element, by Hensel lifting from F_p."""
        p, m, pn = self.p, self.m, self.pn
        fbar = [c % p for c in self.modulus]
        abar = [c % p for c in a]
        z = self.from_coeffs(_fp_poly_inverse(abar, fbar, p))
        # Newton: z <- z(2 - a z), quadratic convergence to precision N
        k = 1
        while k < self.N:
            az = self.mul(a, z)
            two_minus = self.sub(self.from_int(2), az)
            z = self.mul(z, two_minus)
            k *= 2
        return z

    # -- Frobenius -----------------------------------------------------------

    def sigma(self, a, k: int = 1):
        """sigma^k(a); sigma fixes Z_p, so only the x-images are substituted."""
        m = self.m
        k %= m
        if k == 0 or m == 1:
            return a
        if self._sigma_images is None:
            imgs = [None] * m
            imgs[0] = self.from_coeffs([0, 1])
            for j in range(1, m):
                imgs[j] = self.compose(self.frob_image, imgs[j - 1])
            self._sigma_images = imgs
        return self.compose(a, self._sigma_images[k])

    # -- misc -----------------------------------------------------------------

    def truncate(self, new_n: int) -> "PrimeContext":
        """Same ring at lower precision; roots stay roots after truncation."""
        if new_n >= self.N:
            return self
        pk = self.p ** new_n
        modulus = tuple(c % pk for c in self.modulus[:-1]) + (1,)
        frob = tuple(c % pk for c in self.frob_image)
        return PrimeContext(self.p, self.m, new_n, modulus, frob)

    def same_ring(self, other: "PrimeContext") -> bool:
        return (self.p, self.m, self.N) == (other.p, other.m, other.N) \
            and self.modulus == other.modulus

    def __repr__(self):
        return f"PrimeContext(p={self.p}, m={self.m}, N={self.N})"


def context_create(p: int, m: int, N: int) -> PrimeContext:
    """Build the context for W(F_{p^m}) mod p^N.

    The modulus is the canonical irreducible polynomial of degree m over
    F_p with coefficients taken in [0, p); the Frobenius image is the unique
    root of the modulus congruent to x^p mod p, found by Newton iteration.
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if m < 1 or N < 1:
        raise ValueError("m and N must be positive")
    modulus = canonical_modulus(p, m)
    ctx = PrimeContext(p, m, N, modulus, (0,) * m)
    if m == 1:
        ctx.frob_image = ctx.zero
        return ctx
    # initial root: x^p mod (modulus, p)
    y = ctx.from_coeffs(_fp_polypow_x(p, [c % p for c in modulus], p))
    fprime = [(i * c) % ctx.pn for i, c in enumerate(modulus)][1:]
    for _ in range(N.bit_length() + 2):
        fy = ctx.compose(modulus, y)
        if ctx.val(fy) is None:
            break
        dfy = ctx.compose(tuple(fprime), y)
        if ctx.val(dfy) != 0:
            raise HenselFailure("derivative not a unit at the approximate root")
        y = ctx.sub(y, ctx.mul(fy, ctx.inv_unit(dfy)))
    else:
        raise HenselFailure("Newton iteration did not converge")
    ctx.frob_image = y
    # sanity: sigma^m fixes x
    ctx._sigma_images = None
    if ctx.sigma(ctx.from_coeffs([0, 1]), m) != ctx.from_coeffs([0, 1]):
        raise HenselFailure("Frobenius does not have order m")
    return ctx


@dataclass(frozen=True)
class Valuation:
    """Exact(v) for a p^v-times-unit element, or AtLeast(N) for apparent 0."""

    exact: bool
    value: int

    @staticmethod
    def exact_value(v: int) -> "Valuation":
        return Valuation(True, v)

    @staticmethod
    def at_least(n: int) -> "Valuation":
        return Valuation(False, n)

    def __repr__(self):
        return f"Exact({self.value})" if self.exact else f"AtLeast({self.value})"


class WittApprox:
    """An element of W(F_{p^m}) known modulo p^N, in canonical form."""

    __slots__ = ("coeffs", "ctx")

    def __init__(self, ctx: PrimeContext, coeffs):
        self.ctx = ctx
        self.coeffs = ctx.from_coeffs(coeffs) if not isinstance(coeffs, tuple) \
            else coeffs

    @staticmethod
    def from_int(ctx, n):
        return WittApprox(ctx, ctx.from_int(n))

    def _check(self, other):
        if self.ctx is not other.ctx and not self.ctx.same_ring(other.ctx):
            raise ContextMismatch("operands belong to different contexts")

    def __add__(self, other):
        self._check(other)
        return WittApprox(self.ctx, self.ctx.add(self.coeffs, other.coeffs))

    def __sub__(self, other):
        self._check(other)
        return WittApprox(self.ctx, self.ctx.sub(self.coeffs, other.coeffs))

    def __mul__(self, other):
        self._check(other)
        return WittApprox(self.ctx, self.ctx.mul(self.coeffs, other.coeffs))

    def __neg__(self):
        return WittApprox(self.ctx, self.ctx.neg(self.coeffs))

    def __eq__(self, other):
        return isinstance(other, WittApprox) and self.coeffs == other.coeffs \
            and self.ctx.same_ring(other.ctx)

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"WittApprox{self.coeffs}"


def ring_arith(ctx: PrimeContext, a: WittApprox, b: WittApprox, op: str) -> WittApprox:
    if a.ctx is not ctx or b.ctx is not ctx:
        if not (ctx.same_ring(a.ctx) and ctx.same_ring(b.ctx)):
            raise ContextMismatch("operands belong to different contexts")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def frobenius_power(ctx: PrimeContext, a: WittApprox, k: int) -> WittApprox:
    if a.ctx is not ctx and not ctx.same_ring(a.ctx):
        raise ContextMismatch("element belongs to a different context")
    if k < 0:
        k %= ctx.m
    return WittApprox(ctx, ctx.sigma(a.coeffs, k))


def valuation(ctx: PrimeContext, a: WittApprox) -> Valuation:
    v = ctx.val(a.coeffs)
    if v is None:
        return Valuation.at_least(ctx.N)
    return Valuation.exact_value(v)
