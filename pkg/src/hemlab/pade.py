"""Near-diagonal [M/M+1] Pade approximants by the matrix method.

The denominator coefficients come from a Hankel-structured linear system
over the series coefficients and the numerator from a triangular
convolution; b[0] is pinned to 1 since the overall scaling of a rational
function is arbitrary.  Pole/zero extraction, Froissart-pair detection and
the two-stage sequence convergence test live here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import (Polynomial, lu_factor, lu_solve, poly_eval, poly_roots,
                       SingularMatrix, NoConvergence)
from .series import PowerSeries


class PadeError(Exception):
    pass


class SingularDenominatorSystem(PadeError):
    """The Hankel system for the denominator is singular at working precision.

    This marks a defective/blocked entry in the Pade table (typically the
    underlying function is rational of lower type); callers should step M.
    """


class PoleHit(PadeError):
    """Evaluation point is numerically indistinguishable from a pole."""


class PadeApproximant:
    """[M/M+1] rational approximant of a truncated series."""

    def __init__(self, m, numerator, denominator, condition_proxy, ctx):
        self.m = m
        self.numerator = numerator
        self.denominator = denominator
        self.condition_proxy = condition_proxy
        self.ctx = ctx
        self.poles = None
        self.zeros = None

    def __repr__(self):
        return f"PadeApproximant([{self.m}/{self.m + 1}])"


@dataclass
class SpuriousPair:
    pole: complex
    zero: complex
    separation: float

    def __iter__(self):
        return iter((self.pole, self.zero, self.separation))


def denominator_system(c, m):
    """Rows and right-hand side of the Hankel system for b[1..M+1].

    Row i holds c[M+i-j] for j = 0..M and the right-hand side is
    -c[M+1+i]; works for any scalar type (the tests drive it with exact
    rationals).
    """
    coeffs = c.coefficients if isinstance(c, PowerSeries) else list(c)
    if len(coeffs) < 2 * m + 2:
        raise ValueError(f"need at least {2 * m + 2} coefficients for M={m}")
    rows = [[coeffs[m + i - j] for j in range(m + 1)] for i in range(m + 1)]
    rhs = [-coeffs[m + 1 + i] for i in range(m + 1)]
    return rows, rhs


def compute_pade(c, m, ctx):
    """Build the [M/M+1] approximant of a series with >= 2M+2 coefficients.

    Raises SingularDenominatorSystem when the Hankel matrix is singular.
    """
    rows, rhs = denominator_system(c, m)
    try:
        factors = lu_factor(rows)
    except SingularMatrix as exc:
        raise SingularDenominatorSystem(str(exc)) from exc
    bsol = lu_solve(factors, rhs)
    b = [ctx.one()] + list(bsol)
    coeffs = c.coefficients if isinstance(c, PowerSeries) else list(c)
    a = []
    for k in range(m + 1):
        acc = coeffs[k]  # b[0] = 1 term
        for j in range(1, k + 1):
            acc = acc + b[j] * coeffs[k - j]
        a.append(acc)
    return PadeApproximant(m, Polynomial(a), Polynomial(b),
                           factors.condition_proxy, ctx)


def evaluate(pa, alpha):
    """numerator(alpha) / denominator(alpha), guarding against pole hits.

    The pole guard compares |den(alpha)| against the magnitude scale of the
    Horner sum sum_i |b_i| |alpha|**i: a denominator that small is pure
    cancellation noise at the working precision.
    """
    ctx = pa.ctx
    alpha = ctx.coerce(alpha)
    den = poly_eval(pa.denominator, alpha)
    amag = abs(alpha)
    scale = ctx.real(0)
    power = ctx.real(1)
    for bc in pa.denominator.coefficients:
        scale = scale + abs(bc) * power
        power = power * amag
    if abs(den) < ctx.real(2.0) ** (-(ctx.significand_bits - 8)) * scale:
        raise PoleHit(f"denominator vanishes at alpha={ctx.to_complex(alpha)}")
    return poly_eval(pa.numerator, alpha) / den


@dataclass
class RootData:
    poles: list
    zeros: list
    inv_poles: list
    inv_zeros: list


def pole_zeros(pa, best_effort=False):
    """Extract poles and zeros plus their inverse-plane images 1/root.

    Results are cached on the approximant.  NoConvergence from the root
    finder propagates (it carries the best iterates) unless ``best_effort``
    is set, in which case the unconverged iterates are used; near the
    precision limit that is usually what a diagnostic plot wants.
    """
    ctx = pa.ctx

    def roots_of(poly):
        if poly.degree < 1:
            return []
        try:
            return poly_roots(poly, ctx)
        except NoConvergence as exc:
            if not best_effort:
                raise
            return exc.roots

    if pa.poles is None:
        pa.poles = roots_of(pa.denominator)
    if pa.zeros is None:
        pa.zeros = roots_of(pa.numerator)
    inv_p = [1 / r for r in pa.poles if r != 0]
    inv_z = [1 / r for r in pa.zeros if r != 0]
    return RootData(pa.poles, pa.zeros, inv_p, inv_z)


def detect_spurious(poles, zeros, spurious_tol=1e-3):
    """Flag Froissart doublets: greedily matched pole/zero pairs closer than tol.

    Separation is |pole - zero| / max(1, |pole|); each pole and zero is used
    at most once, nearest pairs first.
    """
    candidates = []
    for i, p in enumerate(poles):
        for j, z in enumerate(zeros):
            sep = float(abs(p - z) / max(1.0, abs(p)))
            if sep < spurious_tol:
                candidates.append((sep, i, j))
    candidates.sort(key=lambda t: (t[0], t[1], t[2]))
    used_p, used_z = set(), set()
    pairs = []
    for sep, i, j in candidates:
        if i in used_p or j in used_z:
            continue
        used_p.add(i)
        used_z.add(j)
        pairs.append(SpuriousPair(poles[i], zeros[j], sep))
    return pairs


def guard_digit_estimate(c, m, ctx):
    """log10 of the pivot-ratio proxy for the denominator solve.

    Estimates how many trailing decimal digits of the series coefficients
    the solve consumes; the classic rule of thumb expects roughly M.
    """
    rows, _ = denominator_system(c, m)
    factors = lu_factor([[ctx.coerce(e) for e in row] for row in rows])
    return math.log10(float(factors.condition_proxy))


@dataclass
class ConvergenceVerdict:
    status: str                 # PASS | EPS_NOT_MET | MISMATCH_NOT_MET | PRECISION_EXHAUSTED
    eps_met: bool
    mismatch_met: bool
    max_delta: float
    max_mismatch: float
    first_m_eps: int | None
    spurious_count: int

    def __bool__(self):
        return self.status == "PASS"


def converged(seq, alpha, eps, mismatch_fn, mismatch_tol, spurious_count=0):
    """Two-stage convergence test on a sequence of per-bus approximants.

    ``seq`` is a list, ordered by increasing M, of dicts bus -> approximant.
    Stage one checks |[M-1/M] - [M/M+1]| <= eps at alpha for every bus using
    the last two entries; stage two feeds the last entry's voltages to
    ``mismatch_fn`` (which must return max |dS|) and compares against
    mismatch_tol.  A nonzero ``spurious_count`` turns an eps failure into
    PRECISION_EXHAUSTED: precision ran out before the sequence settled.
    """
    if len(seq) < 2:
        raise ValueError("need at least two approximant sets")
    buses = sorted(seq[-1])

    def delta(k):
        worst = 0.0
        for bus in buses:
            try:
                d = abs(evaluate(seq[k + 1][bus], alpha) - evaluate(seq[k][bus], alpha))
            except PoleHit:
                return float("inf")
            worst = max(worst, float(d))
        return worst

    max_delta = delta(len(seq) - 2)
    eps_met = max_delta <= eps

    first_m_eps = None
    for k in range(len(seq) - 1):
        if delta(k) <= eps:
            first_m_eps = seq[k + 1][buses[0]].m
            break

    voltages = {}
    mm = float("inf")
    try:
        for bus in buses:
            voltages[bus] = evaluate(seq[-1][bus], alpha)
        mm = float(mismatch_fn(voltages))
    except PoleHit:
        pass
    mismatch_met = mm <= mismatch_tol

    if eps_met and mismatch_met:
        status = "PASS"
    elif not eps_met and spurious_count > 0:
        status = "PRECISION_EXHAUSTED"
    elif not eps_met:
        status = "EPS_NOT_MET"
    else:
        status = "MISMATCH_NOT_MET"
    return ConvergenceVerdict(status, eps_met, mismatch_met, max_delta, mm,
                              first_m_eps, spurious_count)
