"""Physical-space verification and convergence analytics.

Bus-power mismatch against the embedded equations' own targets, the
per-coefficient convergence factor and its branch-cut-capacity estimate,
saddle-node (positive-real singularity) estimation from pole locations, and
the root-plot / voltage-profile table builders behind the export commands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .embedding import (EmbeddingKind, build_recursion, extend_series,
                        slack_coefficient)
from .network import PQ, PV, SLACK, build_admittance
from .numerics import ComplexMatrix, NoConvergence, PrecisionContext
from .pade import (PadeApproximant, PoleHit, SingularDenominatorSystem,
                   compute_pade, detect_spurious, evaluate, pole_zeros)


class DiagnosticsError(Exception):
    pass


class AllRatiosAtNoiseFloor(DiagnosticsError):
    """Every error ratio fell below the noise floor; no rate is measurable."""


class NoSampleNearAlphaHat(DiagnosticsError):
    """The CF curve has no sample near alpha_hat = 0.01 to estimate BCC from."""


@dataclass
class MismatchEntry:
    bus: str
    kind: str
    dp: float
    dq: float
    ds: float
    v_dev: float


@dataclass
class MismatchReport:
    entries: list
    max_p: float
    max_q: float
    max_s: float
    max_vdev: float
    worst_bus: str
    base_mva: float

    def worst(self):
        """Single convergence measure: power mismatch or setpoint deviation."""
        return max(self.max_s, self.max_vdev)

    def to_csv(self):
        lines = ["bus,dp,dq,ds_mva"]
        for e in self.entries:
            lines.append(f"{e.bus},{e.dp!r},{e.dq!r},{e.ds * self.base_mva!r}")
        return "\n".join(lines) + "\n"


def effective_admittance(kind, dec, alpha):
    """The admittance the embedded equations apply at this alpha.

    At alpha = 1 every embedding reproduces the full physical matrix; away
    from 1 the canonical family scales the blocks it moved to the RHS.
    """
    ctx = dec.ctx
    if kind is EmbeddingKind.CLASSICAL or alpha == 1:
        return dec.y_full
    a = ctx.real(alpha)
    n = dec.n
    if kind is EmbeddingKind.CANONICAL:
        base = dec.y_tr
        extra = None
    elif kind is EmbeddingKind.CANONICAL_G_RHS:
        base = dec.jb_tr_complex()
        extra = dec.g_tr_complex()
    else:
        base = dec.y_tr_sym
        extra = dec.y_tr_asym
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            e = base.at(i, j)
            if extra is not None:
                e = e + a * extra.at(i, j)
            if i == j:
                e = e + a * dec.y_sh[i]
            row.append(e)
        rows.append(row)
    return ComplexMatrix.from_rows(rows)


def mismatch(net, dec, voltages, alpha, kind=EmbeddingKind.CLASSICAL):
    """Per-bus power mismatch of a voltage estimate at loading alpha.

    PQ buses report dP and dQ against alpha-scaled injections; PV buses
    report dP plus the magnitude-setpoint deviation; the slack reports the
    voltage deviation only.  All per-unit, with MVA scaling available via
    the report's base_mva.
    """
    ctx = dec.ctx
    a = ctx.real(alpha)
    y_eff = effective_admittance(kind, dec, alpha)
    order = [b.id for b in net.buses]
    vvec = [ctx.coerce(voltages[bid]) for bid in order]
    currents = y_eff.matvec(vvec)

    entries = []
    max_p = max_q = max_s = max_vdev = 0.0
    worst_bus = order[0]
    for i, bus in enumerate(net.buses):
        s_calc = vvec[i] * currents[i].conjugate()
        dp = dq = ds = v_dev = 0.0
        if bus.kind == PQ:
            dp = float((a * ctx.real(bus.injected_p()) - s_calc.real))
            dq = float((a * ctx.real(bus.injected_q()) - s_calc.imag))
            ds = math.hypot(dp, dq)
        elif bus.kind == PV:
            dp = float((a * ctx.real(bus.injected_p()) - s_calc.real))
            ds = abs(dp)
            if kind is EmbeddingKind.CLASSICAL:
                target2 = ctx.real(bus.v_setpoint) ** 2
            else:
                target2 = 1 + a * (ctx.real(bus.v_setpoint) ** 2 - 1)
            v_dev = abs(float(abs(vvec[i]) - ctx.sqrt(target2)))
        else:
            if kind is EmbeddingKind.CLASSICAL:
                target = ctx.real(bus.v_setpoint) * ctx.expj(bus.v_angle)
            else:
                target = 1 + a * (ctx.real(bus.v_setpoint) * ctx.expj(bus.v_angle) - 1)
            v_dev = float(abs(vvec[i] - target))
        entries.append(MismatchEntry(bus.id, bus.kind, dp, dq, ds, v_dev))
        if ds > max_s:
            max_s = ds
            worst_bus = bus.id
        max_p = max(max_p, abs(dp))
        max_q = max(max_q, abs(dq))
        max_vdev = max(max_vdev, v_dev)
    return MismatchReport(entries, max_p, max_q, max_s, max_vdev, worst_bus, net.base_mva)


def make_mismatch_fn(net, dec, kind, alpha):
    """Bind a voltages -> worst-mismatch callable for the convergence test."""
    def fn(voltages):
        return mismatch(net, dec, voltages, alpha, kind).worst()
    return fn


def cf_estimate(errors, coefficients_per_step=1, noise_floor=0.0):
    """Convergence factor: geometric mean of successive error ratios.

    The measured rate is per sequence entry; ``coefficients_per_step`` maps
    it to the per-series-coefficient rate the asymptotic theory speaks
    about (consecutive [M/M+1] approximants advance two coefficients, so
    callers comparing against |alpha|*cap pass 2).  Ratios whose endpoints
    sit below ``noise_floor`` are excluded; geometric rather than
    arithmetic averaging because a contraction rate is multiplicative.
    """
    errs = [float(e) for e in errors]
    if len(errs) < 3 or any(e <= 0 for e in errs):
        raise ValueError("need at least 3 strictly positive error values")
    logs = []
    for ek, ek1 in zip(errs, errs[1:]):
        if ek <= noise_floor or ek1 <= noise_floor:
            continue
        logs.append(math.log(ek1 / ek))
    if not logs:
        raise AllRatiosAtNoiseFloor("all error ratios sit at the noise floor")
    return math.exp(sum(logs) / len(logs) / coefficients_per_step)


def line_capacity(a, b):
    """Logarithmic capacity of the straight segment [a, b]: |b - a| / 4."""
    a = float(a)
    b = float(b)
    if a == b:
        raise ValueError("segment endpoints must differ")
    return abs(b - a) / 4.0


@dataclass
class CFCurve:
    samples: list                      # (alpha_hat, cf) pairs, alpha_hat ascending
    reference_description: str = ""
    bcc_estimate: float | None = None

    def to_csv(self):
        lines = ["alpha_hat,cf"]
        for ah, cf in self.samples:
            lines.append(f"{ah!r},{cf!r}")
        if self.bcc_estimate is not None:
            lines.append(f"bcc_estimate,{self.bcc_estimate!r}")
        return "\n".join(lines) + "\n"


def bcc_estimate(curve):
    """Branch-cut capacity from the curve: 100 x CF(alpha_hat = 0.01).

    Callers must have scaled alpha so the positive-real SNBP sits at +1.
    Linear interpolation between neighbors inside [0.005, 0.02] stands in
    when there is no exact 0.01 sample.
    """
    target = 0.01
    pts = sorted((float(a), float(c)) for a, c in curve.samples)
    for a, c in pts:
        if a == target:
            curve.bcc_estimate = 100.0 * c
            return curve.bcc_estimate
    lo = [(a, c) for a, c in pts if 0.005 <= a < target]
    hi = [(a, c) for a, c in pts if target < a <= 0.02]
    if lo and hi:
        a0, c0 = lo[-1]
        a1, c1 = hi[0]
        cf = c0 + (c1 - c0) * (target - a0) / (a1 - a0)
        curve.bcc_estimate = 100.0 * cf
        return curve.bcc_estimate
    raise NoSampleNearAlphaHat("no CF sample at or around alpha_hat = 0.01")


def _pa_sequence(sset, bus_ids, m_max, ctx):
    """Per-bus [M/M+1] approximants for M = 0..m_max; stops at a singular
    entry (the underlying function is rational of lower type there)."""
    out = []
    for m in range(m_max + 1):
        if 2 * m + 1 > sset.order:
            break
        entry = {}
        try:
            for bid in bus_ids:
                entry[bid] = compute_pade(sset.v[bid], m, ctx)
        except SingularDenominatorSystem:
            break
        out.append(entry)
    return out


def cf_curve(kind, net, alpha_hats, ctx, m_max=24, snbp_scale=1.0,
             germ_tol=None, ref_precision_factor=4):
    """Measure the convergence factor at each loading fraction.

    For each alpha_hat the error sequence is the worst-bus PA-evaluation
    error over [0/1] .. [m_max/m_max+1] against a reference approximant of
    order 2*m_max computed at ``ref_precision_factor`` times the working
    precision, and the CF is its per-coefficient geometric rate.
    ``snbp_scale`` maps fractions to raw alpha (alpha = alpha_hat * scale).
    """
    dec = build_admittance(net, ctx)
    sysm = build_recursion(kind, dec, net, ctx, germ_tol=germ_tol)
    sset = extend_series(sysm, sysm.germ, 2 * m_max + 1)
    bus_ids = sorted(b.id for b in net.buses if b.kind != SLACK)
    seq = _pa_sequence(sset, bus_ids, m_max, ctx)

    ref_bits = ctx.significand_bits * ref_precision_factor
    ref_ctx = PrecisionContext(ref_bits)
    ref_dec = build_admittance(net, ref_ctx)
    ref_sys = build_recursion(kind, ref_dec, net, ref_ctx, germ_tol=germ_tol)
    m_ref = 2 * m_max
    ref_set = extend_series(ref_sys, ref_sys.germ, 2 * m_ref + 1)
    ref_seq = _pa_sequence(ref_set, bus_ids, m_ref, ref_ctx)
    ref_pas = ref_seq[-1]

    noise_floor = float(2.0 ** (-(ctx.significand_bits - 16)))
    samples = []
    for ah in sorted(float(a) for a in alpha_hats):
        alpha = ah * float(snbp_scale)
        # the error subtraction must run at working precision: converting
        # values to doubles first would floor the errors at 1e-16 relative
        ref_vals = {bid: ctx.coerce(evaluate(ref_pas[bid], ref_ctx.real(alpha)))
                    for bid in bus_ids}
        errors = []
        for entry in seq:
            worst = 0.0
            for bid in bus_ids:
                try:
                    val = evaluate(entry[bid], ctx.real(alpha))
                except PoleHit:
                    worst = float("inf")
                    break
                worst = max(worst, float(abs(val - ref_vals[bid])))
            if worst == float("inf") or worst == 0.0:
                break
            errors.append(worst)
        cf = cf_estimate(errors, coefficients_per_step=2, noise_floor=noise_floor)
        samples.append((ah, cf))
    desc = (f"[{m_ref}/{m_ref + 1}] reference at {ref_bits} bits "
            f"({ref_precision_factor}x working precision)")
    return CFCurve(samples, desc)


def _near_positive_real(root, tol_angle):
    r = abs(root)
    return r > 0 and float(root.real) > 0 and float(abs(root.imag)) / float(r) < tol_angle


def snbp_estimate(pa_map, spurious_tol=1e-3, tol_angle=0.02):
    """Positive-real singularity estimate from the pole distribution.

    The base estimate is the smallest non-spurious pole within tol_angle of
    the positive real axis, minimized over buses.  When the next real pole
    sits close above it (branch-point clustering: near a soft edge the
    pole positions scale like bp + c*j^2/M^2, so consecutive gaps run 1:3),
    the edge is extrapolated as p1 - (p2 - p1)/3; an isolated pole (a
    genuine rational pole rather than a cut endpoint) is returned as-is.
    For the classical embedding this estimates the physical saddle-node
    bifurcation point; for the others, the loadability limit of that system
    of equations.  Returns None when no pole qualifies.
    """
    best = None
    for bid in sorted(pa_map):
        pa = pa_map[bid]
        data = pole_zeros(pa, best_effort=True)
        flagged = {id(s.pole) for s in detect_spurious(data.poles, data.zeros, spurious_tol)}
        reals = sorted(float(abs(p)) for p in data.poles
                       if id(p) not in flagged and _near_positive_real(p, tol_angle))
        if not reals:
            continue
        est = reals[0]
        if len(reals) > 1 and 0 < reals[1] - reals[0] < 0.3 * reals[0]:
            est = reals[0] - (reals[1] - reals[0]) / 3.0
        if best is None or est < best:
            best = est
    return best


def sweep_profile(sysm, sset, alphas, pole_exclusion=0.02, spurious_tol=1e-3):
    """PA-evaluated voltage profile rows (alpha, bus, vmag, vang, flagged).

    Entries within ``pole_exclusion`` of a non-spurious near-real pole are
    flagged: the rational approximant is untrustworthy there.
    """
    ctx = sysm.ctx
    m = (sset.order - 1) // 2
    bus_ids = sorted(b.id for b in sysm.net.buses)
    slack_id = sysm.net.slack.id
    pas = {}
    for bid in bus_ids:
        if bid == slack_id:
            continue
        mm = m
        while mm >= 0:
            try:
                pas[bid] = compute_pade(sset.v[bid], mm, ctx)
                break
            except SingularDenominatorSystem:
                mm -= 1

    real_poles = []
    for bid, pa in pas.items():
        data = pole_zeros(pa, best_effort=True)
        flagged = {id(s.pole) for s in detect_spurious(data.poles, data.zeros, spurious_tol)}
        for p in data.poles:
            if id(p) not in flagged and float(abs(p.imag)) < pole_exclusion:
                real_poles.append(float(p.real))

    rows = []
    for alpha in alphas:
        a = float(alpha)
        near_pole = any(abs(a - pr) < pole_exclusion for pr in real_poles)
        for bid in bus_ids:
            if bid == slack_id:
                val = ctx.zero()
                for n in range(sset.order + 1):
                    val = val + slack_coefficient(sysm.kind, sysm.net, ctx, n) * ctx.real(a) ** n
                flagged_row = False
            else:
                try:
                    val = evaluate(pas[bid], ctx.real(a))
                    flagged_row = near_pole
                except PoleHit:
                    val = ctx.zero()
                    flagged_row = True
            z = ctx.to_complex(val)
            rows.append((a, bid, abs(z), math.atan2(z.imag, z.real), flagged_row))
    return rows


def sweep_to_csv(rows):
    lines = ["alpha,bus,vmag,vang,flagged"]
    for a, bid, vm, va, fl in rows:
        lines.append(f"{a!r},{bid},{vm!r},{va!r},{str(fl).lower()}")
    return "\n".join(lines) + "\n"


def root_plot_data(pa_map, spurious_tol=1e-3):
    """Merged pole/zero records in the alpha and inverse-alpha planes.

    Rows are (kind, plane, re, im, spurious, M), CSV-ready; unconverged
    root sets are used as returned by the finder (best iterates).
    """
    rows = []
    for bid in sorted(pa_map):
        pa = pa_map[bid]
        data = pole_zeros(pa, best_effort=True)
        ctx = pa.ctx
        pairs = detect_spurious(data.poles, data.zeros, spurious_tol)
        sp_p = {id(s.pole) for s in pairs}
        sp_z = {id(s.zero) for s in pairs}
        for p in data.poles:
            z = ctx.to_complex(p)
            rows.append(("pole", "alpha", z.real, z.imag, id(p) in sp_p, pa.m))
            if z != 0:
                iz = 1 / z
                rows.append(("pole", "inverse_alpha", iz.real, iz.imag, id(p) in sp_p, pa.m))
        for zr in data.zeros:
            z = ctx.to_complex(zr)
            rows.append(("zero", "alpha", z.real, z.imag, id(zr) in sp_z, pa.m))
            if z != 0:
                iz = 1 / z
                rows.append(("zero", "inverse_alpha", iz.real, iz.imag, id(zr) in sp_z, pa.m))
    return rows


def roots_to_csv(rows):
    lines = ["kind,plane,re,im,spurious,M"]
    for kind, plane, re, im, sp, m in rows:
        lines.append(f"{kind},{plane},{re!r},{im!r},{str(sp).lower()},{m}")
    return "\n".join(lines) + "\n"


@dataclass
class DiagnosticsReport:
    mismatch: MismatchReport
    roc: float | None
    snbp: float | None
    cf: CFCurve | None
    spurious_count: int
    verdict: object
    m: int
    precision_bits: int
    embedding: str
