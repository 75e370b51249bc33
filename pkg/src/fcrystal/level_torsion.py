"""Level torsion and isomorphism numbers.

Exact values with certificates for isoclinic crystals and direct sums of
isoclinic crystals, plus every closed-form bound the package knows about.
A result is reported as an interval [lower, upper] with ``exact`` set only
when a certificate justifies it; nothing is ever guessed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor, lcm

from .crystal import (
    AlphaBetaDelta,
    FCrystal,
    SlopeData,
    alpha_beta_delta,
    default_horizon,
    detect_period,
    direct_sum,
)
from .dvr_linalg import is_monomial
from .errors import NotIsoclinic, SlopeOrderViolated


# Certificate kinds, strongest first.  "period" means the delta sequence was
# scanned over a full period; "bound_attained" that the scan max reached a
# proven upper bound; "horizon" that the scan simply ran out at q = Q;
# "epsilon" marks the 0-or-1 resolution for sums whose pairwise terms vanish;
# "closed_form" marks values taken from a family formula without a scan.
_STRENGTH = {"period": 3, "bound_attained": 2, "closed_form": 2,
             "epsilon": 2, "horizon": 1}


@dataclass(frozen=True)
class Certificate:
    kind: str
    param: int | None = None

    def __repr__(self):
        if self.param is None:
            return self.kind
        return f"{self.kind}({self.param})"


@dataclass(frozen=True)
class LevelTorsionResult:
    lower: int
    upper: int
    exact: bool
    certificate: Certificate
    trace: tuple  # AlphaBetaDelta for q = 1..min(Q, T)

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")
        if self.exact and self.lower != self.upper:
            raise ValueError("exact result must have lower == upper")

    @property
    def value(self):
        return self.lower if self.exact else None


@dataclass(frozen=True)
class IsoReport:
    slope_data: SlopeData
    ell: LevelTorsionResult | None
    n_status: str            # equal | family-formula | upper-bound-only
    #                        # | needs-decomposition
    n_value: int | None
    bounds: dict             # name -> integer


# ---------------------------------------------------------------------------
# closed-form bounds

def theorem12_bound(sd: SlopeData) -> int:
    """floor(e' * l2 + (l1 - l2) * lambda') after shifting the smallest
    Hodge slope to 0, where l1 and l2 count Hodge slopes strictly below and
    strictly above the Newton slope."""
    if not sd.isoclinic:
        raise NotIsoclinic("bound applies to isoclinic crystals only")
    e1 = sd.e_min
    e = sd.e_max - e1
    lam = sd.lam - e1
    l1 = sum(1 for x in sd.hodge if x - e1 < lam)
    l2 = sum(1 for x in sd.hodge if x - e1 > lam)
    return floor(e * l2 + (l1 - l2) * lam)


def pdiv_bound(c: int, d: int) -> int:
    """floor(2cd / (c+d)) for a p-divisible-group shape with codimension c
    and dimension d."""
    if c < 1 or d < 1:
        raise ValueError("c and d must be >= 1")
    return 2 * c * d // (c + d)


def quasi_special_bound(sd: SlopeData) -> int:
    """min{s, r*e_r - s} with s the sum of the Hodge slopes."""
    s = sd.hodge_sum
    return min(s, sd.rank * sd.e_max - s)


def direct_sum_estimate(n_values) -> int:
    """max{1, n_i, n_i + n_j - 1} over distinct pairs; a singleton list
    returns its own value."""
    n_values = list(n_values)
    if not n_values:
        raise ValueError("need at least one summand value")
    if len(n_values) == 1:
        return n_values[0]
    best = max(1, max(n_values))
    top = sorted(n_values, reverse=True)
    return max(best, top[0] + top[1] - 1)


# ---------------------------------------------------------------------------
# scans

def level_torsion_isoclinic(m: FCrystal, q_max: int | None = None) -> LevelTorsionResult:
    """Level torsion of an isoclinic crystal as the max of the delta trace.

    The scan stops with an exact answer at the first q where all divisors
    of the q-th iterate agree (a period); failing that, attainment of the
    closed-form bound also certifies exactness.  Otherwise the result is
    the interval [scan max, closed-form bound].
    """
    sd = m.slope_data()
    if not sd.isoclinic:
        raise NotIsoclinic("level torsion scan requires an isoclinic crystal")
    if q_max is None:
        q_max = default_horizon(m.r, sd.e_max)
    bound = theorem12_bound(sd)
    trace = []
    best = 0
    for q in range(1, q_max + 1):
        abd = alpha_beta_delta(m, q)
        trace.append(abd)
        if abd.delta > best:
            best = abd.delta
        if abd.delta == 0:
            return LevelTorsionResult(best, best, True,
                                      Certificate("period", q), tuple(trace))
    if best == bound:
        return LevelTorsionResult(best, best, True,
                                  Certificate("bound_attained"), tuple(trace))
    return LevelTorsionResult(best, bound, False,
                              Certificate("horizon", q_max), tuple(trace))


def cross_level(mj: FCrystal, mi: FCrystal,
                q_max: int | None = None) -> LevelTorsionResult:
    """ell(j, i) = max{0, beta_j(q) - alpha_i(q)} for isoclinic summands
    with slope(j) <= slope(i).

    When both summands are periodic one common period suffices: past it
    beta_j grows by lcm * lambda_j while alpha_i grows by lcm * lambda_i,
    which is at least as much, so the running max is final.
    """
    sdj, sdi = mj.slope_data(), mi.slope_data()
    if not (sdj.isoclinic and sdi.isoclinic):
        raise NotIsoclinic("cross terms are defined for isoclinic summands")
    if sdj.lam > sdi.lam:
        raise SlopeOrderViolated(
            f"need slope {sdj.lam} <= {sdi.lam}; swap the arguments")
    if q_max is None:
        q_max = max(default_horizon(mj.r, sdj.e_max),
                    default_horizon(mi.r, sdi.e_max))
    pj = detect_period(mj, q_max)
    pi = detect_period(mi, q_max)
    horizon = lcm(pj[0], pi[0]) if pj and pi else q_max
    trace = []
    best = 0
    for q in range(1, horizon + 1):
        bj = alpha_beta_delta(mj, q)
        ai = alpha_beta_delta(mi, q)
        contribution = max(0, bj.beta - ai.alpha)
        trace.append(AlphaBetaDelta(q=q, alpha=ai.alpha, beta=bj.beta,
                                    delta=contribution))
        if contribution > best:
            best = contribution
    if pj and pi:
        return LevelTorsionResult(best, best, True,
                                  Certificate("period", horizon), tuple(trace))
    lj = level_torsion_isoclinic(mj, q_max)
    li = level_torsion_isoclinic(mi, q_max)
    cap = lj.upper + li.upper - 1 if lj.upper or li.upper else 0
    upper = max(best, max(0, cap))
    return LevelTorsionResult(best, upper, best == upper,
                              Certificate("horizon", q_max), tuple(trace))


def _weakest(certs, periods):
    """Combine constituent certificates: the weakest kind wins; a combined
    period certificate carries the lcm of the constituent periods."""
    kind = min((c.kind for c in certs), key=lambda k: _STRENGTH[k])
    if kind == "period":
        return Certificate("period", lcm(*periods) if periods else 1)
    if kind == "horizon":
        params = [c.param for c in certs if c.kind == "horizon"]
        return Certificate("horizon", max(params))
    return Certificate(kind)


def level_torsion_sum(summands, q_max: int | None = None,
                      with_trace: bool = True) -> LevelTorsionResult:
    """Level torsion of a direct sum of isoclinic crystals: the max of the
    diagonal terms and all slope-ordered cross terms, with the 0-versus-1
    ambiguity of a vanishing max resolved by ordinariness of the sum."""
    summands = list(summands)
    if not summands:
        raise ValueError("need at least one summand")
    slope_datas = [m.slope_data() for m in summands]
    for sd in slope_datas:
        if not sd.isoclinic:
            raise NotIsoclinic(
                "every summand must be isoclinic; decompose further")
    if q_max is None:
        q_max = max(default_horizon(m.r, sd.e_max)
                    for m, sd in zip(summands, slope_datas))
    if len(summands) == 1:
        return level_torsion_isoclinic(summands[0], q_max)

    results = [level_torsion_isoclinic(m, q_max) for m in summands]
    for j, mj in enumerate(summands):
        for i, mi in enumerate(summands):
            if i != j and slope_datas[j].lam <= slope_datas[i].lam:
                results.append(cross_level(mj, mi, q_max))

    lower = max(r.lower for r in results)
    upper = max(r.upper for r in results)
    periods = [r.certificate.param for r in results
               if r.certificate.kind == "period"]
    cert = _weakest([r.certificate for r in results], periods)
    exact = all(r.exact for r in results)

    trace = ()
    if with_trace and all(r.certificate.kind == "period" for r in results):
        total = direct_sum(summands)
        span = min(q_max, lcm(*periods))
        trace = tuple(alpha_beta_delta(total, q) for q in range(1, span + 1))

    if upper == 0:
        whole = SlopeData.from_parts(
            [e for sd in slope_datas for e in sd.hodge],
            [s for sd in slope_datas for s in sd.newton])
        if whole.isoclinic and whole.ordinary:
            return LevelTorsionResult(0, 0, True, cert, trace)
        return LevelTorsionResult(1, 1, True, Certificate("epsilon"), trace)
    return LevelTorsionResult(lower, upper, exact, cert, trace)


# ---------------------------------------------------------------------------
# isomorphism number dispatch

def bounds_for(m: FCrystal, sd: SlopeData) -> dict:
    """Every closed-form bound applicable to this crystal, keyed by its
    report name."""
    out = {"quasi_special": quasi_special_bound(sd)}
    if sd.isoclinic:
        out["theorem12"] = theorem12_bound(sd)
    if set(sd.hodge) == {0, 1}:
        c = sd.hodge_numbers.get(0, 0)
        d = sd.hodge_numbers.get(1, 0)
        out["pdiv"] = pdiv_bound(c, d)
    if is_monomial(m.A):
        e = sorted(sd.hodge)
        r = len(e)
        out["permutational"] = sum(e[r - i - 1] - e[i] for i in range(r // 2))
    return out


def _k3_shape(sd: SlopeData) -> bool:
    return (sd.rank >= 3
            and sd.hodge_numbers.get(0, 0) == 1
            and sd.hodge_numbers.get(2, 0) == 1
            and sd.hodge_numbers.get(1, 0) == sd.rank - 2)


def isomorphism_number(m: FCrystal, q_max: int | None = None) -> IsoReport:
    """Isomorphism number with its provenance.

    Isoclinic input (or a declared direct sum of isoclinic summands) gets
    the exact level torsion, which equals the isomorphism number.  A
    non-isoclinic monolithic crystal is matched against the known family
    shapes (rank 2, K3); anything else is reported as needing an isoclinic
    decomposition rather than guessed at.
    """
    sd = m.slope_data()
    blocks = m.blocks()
    block_data = [b.slope_data() for b in blocks]

    if all(bd.isoclinic for bd in block_data):
        if len(blocks) == 1:
            ell = level_torsion_isoclinic(m, q_max)
        else:
            ell = level_torsion_sum(blocks, q_max)
        return IsoReport(sd, ell, "equal",
                         ell.value, bounds_for(m, sd))

    # non-isoclinic without a usable declared decomposition: recognize families
    if sd.rank == 2:
        lam1 = sd.newton[0]
        if lam1 == 0:
            # splits off a rank-1 unit-root piece; two ordinary blocks with
            # distinct slopes give isomorphism number 1
            return IsoReport(sd, None, "family-formula", 1,
                             bounds_for(m, sd))
        if lam1.denominator == 1:
            return IsoReport(sd, None, "upper-bound-only",
                             2 * int(lam1), bounds_for(m, sd))
    if _k3_shape(sd):
        return IsoReport(sd, None, "family-formula", 1, bounds_for(m, sd))
    return IsoReport(sd, None, "needs-decomposition", None,
                     bounds_for(m, sd))
