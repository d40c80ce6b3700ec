"""Command-line driver: solve, root plots, sweeps, CF curves, series dumps.

The solve loop advances the series two coefficients at a time (each new
[M/M+1] entry needs c[2M] and c[2M+1]), runs the two-stage convergence
check, and stops on pass, on the term budget, or once spurious pairs have
appeared while the mismatch has stopped improving; past that point more
terms only feed the noise, so the driver reports the best-mismatch state it
saw rather than the last one.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

from . import cases as _cases
from .diagnostics import (CFCurve, bcc_estimate, cf_curve, mismatch,
                          root_plot_data, roots_to_csv, snbp_estimate,
                          sweep_profile, sweep_to_csv)
from .embedding import (EmbeddingKind, GermNotConverged,
                        SingularRecursionMatrix, build_recursion,
                        default_germ_tol, extend_series, slack_coefficient)
from .network import NetworkModel, NetworkError, build_admittance, load_network
from .numerics import NoConvergence, PrecisionContext
from .pade import (PoleHit, SingularDenominatorSystem, compute_pade,
                   detect_spurious, evaluate, pole_zeros)
from .series import SeriesSet, series_to_csv, digits_for_bits

ENV_PRECISION = "HEMLAB_PRECISION_BITS"

STATUS_CONVERGED = "CONVERGED"
STATUS_EPS = "EPS_NOT_MET"
STATUS_MISMATCH = "MISMATCH_NOT_MET"
STATUS_PRECISION = "PRECISION_EXHAUSTED"
STATUS_NO_GERM = "NO_GERM"
STATUS_SINGULAR = "SINGULAR_SYSTEM"


@dataclass
class SolveConfig:
    embedding: EmbeddingKind = EmbeddingKind.CANONICAL
    alpha: float = 1.0
    max_terms: int = 60
    precision_bits: int | None = None     # None -> native doubles
    eps: float = 1e-8
    mismatch_tol: float = 1e-6
    spurious_tol: float = 1e-3
    germ_tol: float | None = None

    def __post_init__(self):
        if self.max_terms < 4:
            raise ValueError("max_terms must be >= 4")
        if self.eps <= 0 or self.mismatch_tol <= 0 or self.spurious_tol <= 0:
            raise ValueError("eps and tolerances must be positive")

    def context(self):
        if self.precision_bits in (None, 0, 53):
            return PrecisionContext.native()
        return PrecisionContext(self.precision_bits)


@dataclass
class SolveReport:
    status: str
    terms_used: int
    voltages: dict
    mismatch: object
    spurious_count: int
    timings: dict = field(default_factory=dict)
    m_best: int = -1
    terms_computed: int = 0
    eps_met: bool = False
    max_delta: float = float("inf")
    embedding: str = ""
    alpha: float = 1.0
    precision_bits: int = 53

    def to_dict(self):
        """JSON-ready view; timings stay in-memory so identical runs stay
        byte-identical."""
        volts = {}
        for bus in sorted(self.voltages):
            z = self.voltages[bus]
            volts[bus] = {"re": z.real, "im": z.imag}
        mm = None
        if self.mismatch is not None:
            mm = {
                "max_p": self.mismatch.max_p,
                "max_q": self.mismatch.max_q,
                "max_s": self.mismatch.max_s,
                "max_vdev": self.mismatch.max_vdev,
                "worst_bus": self.mismatch.worst_bus,
                "per_bus": {e.bus: {"dp": e.dp, "dq": e.dq, "ds": e.ds, "v_dev": e.v_dev}
                            for e in self.mismatch.entries},
            }
        return {
            "status": self.status,
            "embedding": self.embedding,
            "alpha": self.alpha,
            "precision_bits": self.precision_bits,
            "terms_used": self.terms_used,
            "terms_computed": self.terms_computed,
            "m_best": self.m_best,
            "eps_met": self.eps_met,
            "max_delta": self.max_delta if self.max_delta != float("inf") else None,
            "spurious_count": self.spurious_count,
            "voltages": volts,
            "mismatch": mm,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _as_network(case):
    if isinstance(case, NetworkModel):
        return case
    return load_network(case)


def _slack_voltage(kind, net, ctx, alpha):
    a = ctx.real(alpha)
    val = ctx.zero()
    for n in (0, 1):
        val = val + slack_coefficient(kind, net, ctx, n) * a ** n
    return val


def solve(config, case):
    """Run the full embed / extend / approximate / verify loop on a case."""
    t0 = time.perf_counter()
    net = _as_network(case)
    ctx = config.context()
    kind = config.embedding
    dec = build_admittance(net, ctx)

    germ_tol = config.germ_tol
    if germ_tol is None:
        germ_tol = default_germ_tol(ctx)
    germ_tol = min(germ_tol, config.mismatch_tol)  # germ accuracy bounds final accuracy

    timings = {}
    report = SolveReport(STATUS_EPS, 0, {}, None, 0,
                         embedding=kind.value, alpha=config.alpha,
                         precision_bits=ctx.significand_bits)
    try:
        sysm = build_recursion(kind, dec, net, ctx, germ_tol=germ_tol)
    except GermNotConverged:
        report.status = STATUS_NO_GERM
        report.timings = {"total": time.perf_counter() - t0}
        return report
    except SingularRecursionMatrix:
        report.status = STATUS_SINGULAR
        report.timings = {"total": time.perf_counter() - t0}
        return report
    timings["germ"] = time.perf_counter() - t0

    alpha = config.alpha
    slack_id = net.slack.id
    bus_ids = sorted(b.id for b in net.buses)
    pa_ids = [bid for bid in bus_ids if bid != slack_id]
    slack_v = ctx.to_complex(_slack_voltage(kind, net, ctx, alpha))

    if not pa_ids:
        volts = {slack_id: slack_v}
        report.status = STATUS_CONVERGED
        report.voltages = volts
        report.mismatch = mismatch(net, dec, volts, alpha, kind)
        report.terms_used = 1
        report.terms_computed = 1
        report.m_best = 0
        report.eps_met = True
        report.max_delta = 0.0
        report.timings = {**timings, "total": time.perf_counter() - t0}
        return report

    sset = sysm.germ
    pas = {}
    prev_vals = None
    best = None            # (worst_mismatch, m, voltages, report)
    no_improve = 0
    spurious_count = 0
    first_m_eps = None
    last_delta = float("inf")
    eps_ever = False
    status = STATUS_EPS

    max_m = (config.max_terms - 2) // 2
    for m in range(1, max_m + 1):
        sset = extend_series(sysm, sset, 2 * m + 1)
        for bid in pa_ids:
            try:
                pas[bid] = compute_pade(sset.v[bid], m, ctx)
            except SingularDenominatorSystem:
                pass  # blocked entry: keep the previous approximant
        if len(pas) < len(pa_ids):
            continue
        try:
            vals = {bid: evaluate(pas[bid], ctx.real(alpha)) for bid in pa_ids}
        except PoleHit:
            prev_vals = None
            continue

        volts = {bid: ctx.to_complex(v) for bid, v in vals.items()}
        volts[slack_id] = slack_v
        mm = mismatch(net, dec, volts, alpha, kind)
        worst = mm.worst()
        if best is None or worst < best[0]:
            best = (worst, m, volts, mm)
            no_improve = 0
        else:
            no_improve += 1

        if prev_vals is not None:
            last_delta = max(float(abs(vals[bid] - prev_vals[bid])) for bid in pa_ids)
            if last_delta <= config.eps:
                eps_ever = True
                if first_m_eps is None:
                    first_m_eps = m
        prev_vals = vals

        if last_delta <= config.eps and worst <= config.mismatch_tol:
            status = STATUS_CONVERGED
            break

        if no_improve >= 3 and last_delta > config.eps:
            spurious_count = _count_spurious(pas, config.spurious_tol)
            if spurious_count > 0:
                status = STATUS_PRECISION
                break
            no_improve = 0  # stagnant but clean: keep going until max_terms
    else:
        if best is not None and eps_ever and best[0] > config.mismatch_tol:
            status = STATUS_MISMATCH
        elif best is not None and last_delta <= config.eps:
            status = STATUS_MISMATCH if best[0] > config.mismatch_tol else STATUS_CONVERGED
        else:
            status = STATUS_EPS
    timings["series"] = time.perf_counter() - t0 - timings["germ"]

    if best is None:
        report.status = status
        report.terms_computed = sset.order + 1
        report.timings = {**timings, "total": time.perf_counter() - t0}
        return report

    if status != STATUS_PRECISION and spurious_count == 0:
        spurious_count = _count_spurious(pas, config.spurious_tol)

    worst, m_best, volts, mm = best
    report.status = status
    report.voltages = volts
    report.mismatch = mm
    report.spurious_count = spurious_count
    report.terms_used = 2 * m_best + 2
    report.terms_computed = sset.order + 1
    report.m_best = m_best
    report.eps_met = last_delta <= config.eps
    report.max_delta = last_delta
    report.timings = {**timings, "total": time.perf_counter() - t0}
    return report


def _count_spurious(pas, spurious_tol):
    count = 0
    for bid in sorted(pas):
        data = pole_zeros(pas[bid], best_effort=True)
        count += len(detect_spurious(data.poles, data.zeros, spurious_tol))
    return count


# ------------------------------------------------------------------ CLI --


def _add_common(p):
    p.add_argument("case", help="path to a JSON case file")
    p.add_argument("--embedding", default="canonical",
                   help="classical | canonical | canonical_g_rhs | canonical_ps_rhs")
    p.add_argument("--precision-bits", type=int,
                   default=int(os.environ.get(ENV_PRECISION, 0)) or None,
                   help="significand bits (omit for native doubles)")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_from(args, **overrides):
    kwargs = dict(
        embedding=EmbeddingKind.parse(args.embedding),
        precision_bits=args.precision_bits,
    )
    for name in ("alpha", "max_terms", "eps", "mismatch_tol", "spurious_tol", "germ_tol"):
        if hasattr(args, name) and getattr(args, name) is not None:
            kwargs[name] = getattr(args, name)
    kwargs.update(overrides)
    return SolveConfig(**kwargs)


def _series_for(args, ctx, terms):
    net = load_network(args.case)
    dec = build_admittance(net, ctx)
    kind = EmbeddingKind.parse(args.embedding)
    sysm = build_recursion(kind, dec, net, ctx)
    order = max(terms - 1, 1)
    return net, dec, kind, sysm, extend_series(sysm, sysm.germ, order)


def _pas_at(sset, sysm, m):
    ctx = sysm.ctx
    out = {}
    for bus in sysm.net.buses:
        if bus.kind == "slack":
            continue
        mm = m
        while mm >= 0:
            try:
                out[bus.id] = compute_pade(sset.v[bus.id], mm, ctx)
                break
            except SingularDenominatorSystem:
                mm -= 1
    return out


def _cmd_solve(args):
    config = _config_from(args)
    report = solve(config, args.case)
    if args.dump_series is not None:
        ctx = config.context()
        net, dec, kind, sysm, sset = _series_for(args, ctx, report.terms_computed or 4)
        _emit(series_to_csv(sset, digits_for_bits(ctx.significand_bits)), args.dump_series)
    _emit(report.to_json(), args.out)
    return 0 if report.status == STATUS_CONVERGED else 1


def _cmd_roots(args):
    ctx = SolveConfig(precision_bits=args.precision_bits).context()
    net, dec, kind, sysm, sset = _series_for(args, ctx, args.terms)
    m = (args.terms - 2) // 2
    pas = _pas_at(sset, sysm, m)
    rows = root_plot_data(pas, args.spurious_tol)
    _emit(roots_to_csv(rows), args.out)
    return 0


def _cmd_sweep(args):
    ctx = SolveConfig(precision_bits=args.precision_bits).context()
    net, dec, kind, sysm, sset = _series_for(args, ctx, args.terms)
    if args.steps < 2:
        raise ValueError("--steps must be >= 2")
    step = (args.stop - args.start) / (args.steps - 1)
    alphas = [args.start + k * step for k in range(args.steps)]
    rows = sweep_profile(sysm, sset, alphas)
    _emit(sweep_to_csv(rows), args.out)
    return 0


def _cmd_cf(args):
    ctx = SolveConfig(precision_bits=args.precision_bits).context()
    net, dec, kind, sysm, sset = _series_for(args, ctx, 2 * args.m_max + 2)
    pas = _pas_at(sset, sysm, args.m_max)
    scale = snbp_estimate(pas, args.spurious_tol)
    if scale is None:
        raise GermNotConverged("no positive-real pole found; cannot scale alpha_hat")
    n = args.samples
    hats = [0.01 * (40.0 ** (k / (n - 1))) for k in range(n)]
    curve = cf_curve(kind, net, hats, ctx, m_max=args.m_max, snbp_scale=scale)
    bcc_estimate(curve)
    _emit(curve.to_csv(), args.out)
    return 0


def _cmd_snbp(args):
    ctx = SolveConfig(precision_bits=args.precision_bits).context()
    net, dec, kind, sysm, sset = _series_for(args, ctx, args.terms)
    m = (args.terms - 2) // 2
    pas = _pas_at(sset, sysm, m)
    est = snbp_estimate(pas, args.spurious_tol)
    _emit(json.dumps({"snbp": est, "m": m, "embedding": kind.value},
                     sort_keys=True) + "\n", args.out)
    return 0


def _cmd_series(args):
    ctx = SolveConfig(precision_bits=args.precision_bits).context()
    net, dec, kind, sysm, sset = _series_for(args, ctx, args.terms)
    _emit(series_to_csv(sset, digits_for_bits(ctx.significand_bits)), args.out)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hemlab",
                                description="Holomorphic-embedding power flow "
                                            "and Pade convergence diagnostics")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve a case and emit a JSON report")
    _add_common(ps)
    ps.add_argument("--alpha", type=float, default=1.0)
    ps.add_argument("--max-terms", type=int, default=60, dest="max_terms")
    ps.add_argument("--eps", type=float, default=1e-8)
    ps.add_argument("--mismatch-tol", type=float, default=1e-6, dest="mismatch_tol")
    ps.add_argument("--spurious-tol", type=float, default=1e-3, dest="spurious_tol")
    ps.add_argument("--germ-tol", type=float, default=None, dest="germ_tol")
    ps.add_argument("--dump-series", default=None, dest="dump_series",
                    help="also write the series coefficients as CSV to this path")
    ps.set_defaults(fn=_cmd_solve)

    pr = sub.add_parser("roots", help="pole/zero plot data in both planes (CSV)")
    _add_common(pr)
    pr.add_argument("--terms", type=int, default=40)
    pr.add_argument("--spurious-tol", type=float, default=1e-3, dest="spurious_tol")
    pr.set_defaults(fn=_cmd_roots)

    pw = sub.add_parser("sweep", help="voltage profile over an alpha range (CSV)")
    _add_common(pw)
    pw.add_argument("--from", type=float, required=True, dest="start")
    pw.add_argument("--to", type=float, required=True, dest="stop")
    pw.add_argument("--steps", type=int, default=21)
    pw.add_argument("--terms", type=int, default=40)
    pw.set_defaults(fn=_cmd_sweep)

    pc = sub.add_parser("cf", help="convergence-factor curve and BCC estimate (CSV)")
    _add_common(pc)
    pc.add_argument("--samples", type=int, default=12)
    pc.add_argument("--m-max", type=int, default=24, dest="m_max")
    pc.add_argument("--spurious-tol", type=float, default=1e-3, dest="spurious_tol")
    pc.set_defaults(fn=_cmd_cf)

    pn = sub.add_parser("snbp", help="positive-real singularity estimate (JSON)")
    _add_common(pn)
    pn.add_argument("--terms", type=int, default=42)
    pn.add_argument("--spurious-tol", type=float, default=1e-3, dest="spurious_tol")
    pn.set_defaults(fn=_cmd_snbp)

    pd = sub.add_parser("series", help="series coefficient dump (CSV)")
    _add_common(pd)
    pd.add_argument("--terms", type=int, default=40)
    pd.set_defaults(fn=_cmd_series)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (NetworkError, GermNotConverged, SingularRecursionMatrix,
            SingularDenominatorSystem, NoConvergence, PoleHit, ValueError) as exc:
        sys.stderr.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
