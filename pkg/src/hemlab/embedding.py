"""The four power-flow embeddings: reference states and series recursions.

Every embedding shares one recursion shape: a real-augmented linear system
whose coefficient matrix depends only on the admittance blocks kept on the
left-hand side and on the order-0 (germ) values, factored once and reused
for every series order.  The unknown vector stacks Re V[n] and Im V[n] for
the non-slack buses plus Q[n] for the PV buses; the conjugations in the
defining equations make the system non-holomorphic in the unknowns, so a
complex-linear solve is not available.

Reference states: the phase-shifter form always admits the all-ones germ
(its left-hand matrix has exact zero row sums); the plain canonical and
G-on-the-right forms do too unless phase shifters are present, in which
case their order-0 equations are a genuine no-load problem; the classical
form always needs the no-load solve.  No-load problems with no PV buses are
linear and solved directly; otherwise they are solved by an embedded
phase-shifter-form run and polished with Newton iterations at the working
precision until the order-0 residual meets germ_tol.
"""

from __future__ import annotations

from dataclasses import replace
from enum import Enum

from .network import PQ, PV, SLACK, AdmittanceDecomposition
from .numerics import ComplexMatrix, lu_factor, lu_solve, SingularMatrix
from .series import PowerSeries, SeriesSet, convolve, conjugate_reflect, reciprocal
from . import pade as _pade


class EmbeddingKind(Enum):
    CLASSICAL = "classical"
    CANONICAL = "canonical"
    CANONICAL_G_RHS = "canonical_g_rhs"
    CANONICAL_PS_RHS = "canonical_ps_rhs"

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower().replace("-", "_")
        aliases = {
            "classical": cls.CLASSICAL,
            "canonical": cls.CANONICAL,
            "canonical_g_rhs": cls.CANONICAL_G_RHS,
            "g_rhs": cls.CANONICAL_G_RHS,
            "canonical_ps_rhs": cls.CANONICAL_PS_RHS,
            "ps_rhs": cls.CANONICAL_PS_RHS,
        }
        if key not in aliases:
            raise ValueError(f"unknown embedding {text!r}")
        return aliases[key]


CANONICAL_FAMILY = (EmbeddingKind.CANONICAL, EmbeddingKind.CANONICAL_G_RHS,
                    EmbeddingKind.CANONICAL_PS_RHS)


class EmbeddingError(Exception):
    pass


class GermNotConverged(EmbeddingError):
    """The no-load reference-state solve failed to reach germ_tol."""


class SingularRecursionMatrix(EmbeddingError):
    """The embedding's order-independent coefficient matrix is singular."""


def default_germ_tol(ctx):
    """Reference-state residual target: the germ accuracy bounds the final
    accuracy, so by default it is pushed to the precision floor."""
    if ctx.native_mode:
        return 1e-13
    return float(2.0 ** (-(ctx.significand_bits - 24)))


def _lhs_matrix(kind, dec):
    if kind is EmbeddingKind.CLASSICAL:
        return dec.y_full
    if kind is EmbeddingKind.CANONICAL:
        return dec.y_tr
    if kind is EmbeddingKind.CANONICAL_G_RHS:
        return dec.jb_tr_complex()
    return dec.y_tr_sym


def _rhs_lag_matrix(kind, dec):
    """Matrix multiplying V[n-1] on the right-hand side (None if absent)."""
    if kind is EmbeddingKind.CANONICAL_G_RHS:
        return dec.g_tr_complex()
    if kind is EmbeddingKind.CANONICAL_PS_RHS:
        return dec.y_tr_asym
    return None


def _uses_shunt_rhs(kind):
    return kind in CANONICAL_FAMILY


def slack_coefficient(kind, net, ctx, n):
    """Slack-bus series coefficient at order n for the given embedding."""
    bus = net.slack
    target = ctx.real(bus.v_setpoint) * ctx.expj(bus.v_angle)
    if kind is EmbeddingKind.CLASSICAL:
        return target if n == 0 else ctx.zero()
    if n == 0:
        return ctx.one()
    if n == 1:
        return target - 1
    return ctx.zero()


def _magnitude_target(kind, bus, ctx, n):
    """Coefficient of alpha**n in the PV magnitude constraint RHS."""
    sp2 = ctx.real(bus.v_setpoint) ** 2
    if kind is EmbeddingKind.CLASSICAL:
        return sp2 if n == 0 else ctx.zero()
    if n == 0:
        return ctx.one()
    if n == 1:
        return sp2 - 1
    return ctx.zero()


class RecursionSystem:
    """Factored-once order-independent system for one embedding of one network."""

    def __init__(self, kind, dec, net, ctx, germ):
        self.kind = kind
        self.dec = dec
        self.net = net
        self.ctx = ctx
        self.germ = germ
        self.slack_index = net.index_of(net.slack.id)
        self.ns = [i for i in range(net.n) if i != self.slack_index]
        self.pv = [i for i in range(net.n) if net.buses[i].kind == PV]
        self.lhs = _lhs_matrix(kind, dec)
        self.lag = _rhs_lag_matrix(kind, dec)
        self._assemble()

    # unknown layout: [Re V (non-slack) | Im V (non-slack) | Q (pv)]
    def _assemble(self):
        ctx = self.ctx
        net = self.net
        nns = len(self.ns)
        dim = 2 * nns + len(self.pv)
        self.dim = dim
        self.col_of = {i: a for a, i in enumerate(self.ns)}
        self.qcol_of = {i: 2 * nns + p for p, i in enumerate(self.pv)}
        if dim == 0:
            self.lhs_factors = None
            return
        zero = ctx.real(0)
        rows = [[zero] * dim for _ in range(dim)]
        v0 = {bus.id: self.germ.v[bus.id][0] for bus in net.buses}
        for a, i in enumerate(self.ns):
            for b, k in enumerate(self.ns):
                m = self.lhs.at(i, k)
                rows[a][b] = rows[a][b] + m.real
                rows[a][nns + b] = rows[a][nns + b] - m.imag
                rows[nns + a][b] = rows[nns + a][b] + m.imag
                rows[nns + a][nns + b] = rows[nns + a][nns + b] + m.real
        for p, i in enumerate(self.pv):
            a = self.ns.index(i)
            bus = net.buses[i]
            vi0 = v0[bus.id]
            wi0 = 1 / vi0
            q0 = self.germ.q[bus.id][0]
            jw0 = ctx.complex(0, 1) * wi0.conjugate()
            rows[a][2 * nns + p] = rows[a][2 * nns + p] + jw0.real
            rows[nns + a][2 * nns + p] = rows[nns + a][2 * nns + p] + jw0.imag
            if q0 != 0:
                # unknown part of -j Q[0] conj(W[n]) moved to the LHS
                kappa = -ctx.complex(0, 1) * q0 * (wi0 * wi0).conjugate()
                rows[a][a] = rows[a][a] + kappa.real
                rows[a][nns + a] = rows[a][nns + a] + kappa.imag
                rows[nns + a][a] = rows[nns + a][a] + kappa.imag
                rows[nns + a][nns + a] = rows[nns + a][nns + a] - kappa.real
            # magnitude row: 2 Re(conj(V[0]) V[n])
            mr = 2 * nns + p
            rows[mr][a] = 2 * vi0.real
            rows[mr][nns + a] = 2 * vi0.imag
        try:
            self.lhs_factors = lu_factor(rows)
        except SingularMatrix as exc:
            raise SingularRecursionMatrix(
                f"{self.kind.value}: order-independent matrix is singular ({exc})") from exc

    def injections(self):
        ctx = self.ctx
        out = {}
        for i in self.ns:
            bus = self.net.buses[i]
            out[i] = ctx.complex(bus.injected_p(), bus.injected_q() if bus.kind == PQ else 0)
        return out


def build_recursion(kind, dec, net, ctx, germ=None, germ_tol=None):
    """Construct the factored recursion system, computing the germ if absent."""
    if germ is None:
        germ = reference_state(kind, dec, net, ctx, germ_tol=germ_tol)
    return RecursionSystem(kind, dec, net, ctx, germ)


def extend_series(sys, sset, target_order, check=False):
    """Extend a SeriesSet order by order to target_order.

    Assembles the embedding's right-hand side from lower-order data, solves
    the factored system, and appends the new coefficients; the reciprocal
    series W = 1/V is carried along incrementally.  With ``check`` the
    defining-equation residual is verified through the final order.
    """
    if target_order <= sset.order:
        raise ValueError("target_order must exceed the current order")
    ctx = sys.ctx
    net = sys.net
    kind = sys.kind
    nns = len(sys.ns)
    ids = [b.id for b in net.buses]
    v = {bid: list(sset.v[bid].coefficients) for bid in ids}
    q = {bid: list(sset.q[bid].coefficients) for bid in sset.q}
    s_inj = sys.injections()

    # reciprocal series for every non-slack bus, rebuilt then extended in step
    w = {}
    for i in sys.ns:
        bid = ids[i]
        w[bid] = list(reciprocal(PowerSeries(v[bid]), sset.order).coefficients)

    jay = ctx.complex(0, 1)
    for n in range(sset.order + 1, target_order + 1):
        vslack_n = slack_coefficient(kind, net, ctx, n)
        rhs = [ctx.real(0)] * sys.dim
        for a, i in enumerate(sys.ns):
            bus = net.buses[i]
            bid = bus.id
            wbar_prev = w[bid][n - 1].conjugate()
            if bus.kind == PQ:
                r = s_inj[i].conjugate() * wbar_prev
            else:
                r = ctx.complex(bus.injected_p()) * wbar_prev
                acc = ctx.zero()
                for m in range(1, n):
                    acc = acc + q[bid][m] * w[bid][n - m].conjugate()
                r = r - jay * acc
                q0 = q[bid][0]
                if q0 != 0:
                    sigma = ctx.zero()
                    for m in range(1, n):
                        sigma = sigma + v[bid][m] * w[bid][n - m]
                    w0 = w[bid][0]
                    r = r + jay * q0 * w0.conjugate() * sigma.conjugate()
            if _uses_shunt_rhs(kind):
                r = r - sys.dec.y_sh[i] * v[bid][n - 1]
            if sys.lag is not None:
                acc = ctx.zero()
                for k in range(net.n):
                    g = sys.lag.at(i, k)
                    if g != 0:
                        acc = acc + g * v[ids[k]][n - 1]
                r = r - acc
            if vslack_n != 0:
                r = r - sys.lhs.at(i, sys.slack_index) * vslack_n
            rhs[a] = r.real
            rhs[nns + a] = r.imag
        for p, i in enumerate(sys.pv):
            bus = net.buses[i]
            bid = bus.id
            corr = ctx.zero()
            for m in range(1, n):
                corr = corr + v[bid][m] * v[bid][n - m].conjugate()
            t = _magnitude_target(kind, bus, ctx, n)
            rhs[2 * nns + p] = (t - corr).real

        if sys.dim > 0:
            sol = lu_solve(sys.lhs_factors, rhs)
        else:
            sol = []
        for a, i in enumerate(sys.ns):
            bid = ids[i]
            v[bid].append(ctx.complex(sol[a], sol[nns + a]))
        v[net.slack.id].append(vslack_n)
        for p, i in enumerate(sys.pv):
            q[ids[i]].append(ctx.real(sol[2 * nns + p]))
        for i in sys.ns:
            bid = ids[i]
            acc = ctx.zero()
            for m in range(1, n + 1):
                acc = acc + v[bid][m] * w[bid][n - m]
            w[bid].append(-acc / v[bid][0])

    out = SeriesSet({bid: PowerSeries(cs) for bid, cs in v.items()},
                    {bid: PowerSeries(cs) for bid, cs in q.items()},
                    target_order)
    if check:
        res = residual_check(kind, sys.dec, net, out)
        floor = float(ctx.eps) * 1e6
        worst = max(float(r) for r in res)
        if worst > max(floor, 1e-6):
            raise EmbeddingError(f"defining-equation residual {worst:g} after extension")
    return out


def residual_check(kind, dec, net, sset):
    """Max defining-equation coefficient mismatch per order, 0..set.order.

    Substitutes the truncated series into the embedding's equations and
    expands both sides with the series-module algebra (the 1/V* terms via
    reciprocal + conjugate reflection); this is the arbiter of correctness
    for the recursion assembly.
    """
    ctx = dec.ctx
    order = sset.order
    ids = [b.id for b in net.buses]
    slack_id = net.slack.id
    lhs = _lhs_matrix(kind, dec)
    lag = _rhs_lag_matrix(kind, dec)
    jay = ctx.complex(0, 1)

    wbar = {}
    for bid in ids:
        if bid != slack_id:
            wbar[bid] = conjugate_reflect(reciprocal(sset.v[bid], order))

    res = [ctx.real(0) for _ in range(order + 1)]

    def bump(n, mag):
        if mag > res[n]:
            res[n] = mag

    for i, bus in enumerate(net.buses):
        bid = bus.id
        if bus.kind == SLACK:
            for n in range(order + 1):
                bump(n, abs(sset.v[bid][n] - slack_coefficient(kind, net, ctx, n)))
            continue
        lhs_series = [ctx.zero() for _ in range(order + 1)]
        for k, kid in enumerate(ids):
            m = lhs.at(i, k)
            if m != 0:
                vk = sset.v[kid].coefficients
                for n in range(order + 1):
                    lhs_series[n] = lhs_series[n] + m * vk[n]
        if bus.kind == PQ:
            s_conj = ctx.complex(bus.injected_p(), bus.injected_q()).conjugate()
            rhs_base = [ctx.zero()] + [s_conj * wbar[bid][n - 1] for n in range(1, order + 1)]
        else:
            p_i = ctx.complex(bus.injected_p())
            qw = convolve(sset.q[bid], wbar[bid], order)
            rhs_base = [-jay * qw[0]]
            for n in range(1, order + 1):
                rhs_base.append(p_i * wbar[bid][n - 1] - jay * qw[n])
        for n in range(order + 1):
            r = rhs_base[n]
            if n >= 1:
                if _uses_shunt_rhs(kind):
                    r = r - dec.y_sh[i] * sset.v[bid][n - 1]
                if lag is not None:
                    for k, kid in enumerate(ids):
                        g = lag.at(i, k)
                        if g != 0:
                            r = r - g * sset.v[kid][n - 1]
            bump(n, abs(lhs_series[n] - r))
        if bus.kind == PV:
            vvbar = convolve(sset.v[bid], conjugate_reflect(sset.v[bid]), order)
            for n in range(order + 1):
                bump(n, abs(vvbar[n] - _magnitude_target(kind, bus, ctx, n)))
    return res


# ----------------------------------------------------------------- germs --


def _all_ones_germ(net, ctx):
    one = PowerSeries([ctx.one()])
    v = {b.id: one for b in net.buses}
    q = {b.id: PowerSeries([ctx.real(0)]) for b in net.buses if b.kind == PV}
    return SeriesSet(v, q, 0)


def _derive_q0(F, net, ctx, volts):
    """PV reactive injections that close the order-0 balance exactly:
    Q_i[0] = -Im(conj(V_i) sum_k F_ik V_k)."""
    currents = F.matvec(volts)
    out = {}
    for i, bus in enumerate(net.buses):
        if bus.kind == PV:
            out[i] = -(volts[i].conjugate() * currents[i]).imag
    return out


def _alpha0_residual(F, net, ctx, volts, qvals=None):
    """Visible-mismatch residual of the no-load order-0 equations.

    PV reactive power is free, so with Q[0] derived from the voltages the
    residual lives entirely in channels a bus-power mismatch check can see:
    PQ complex power, PV active power, and magnitude-setpoint deviations.
    This is the quantity germ_tol bounds.
    """
    worst = ctx.real(0)
    currents = F.matvec(volts)
    for i, bus in enumerate(net.buses):
        if bus.kind == SLACK:
            continue
        z = volts[i].conjugate() * currents[i]
        if bus.kind == PV:
            r = abs(z.real)
            dev = abs(abs(volts[i]) - ctx.real(bus.v_setpoint))
            r = max(r, dev)
        else:
            r = abs(z)
        if r > worst:
            worst = r
    return worst


def _newton_alpha0(F, net, ctx, volts, qvals, tol, max_iter=60):
    """Newton polish of the no-load order-0 system at context precision.

    Current-form rows sum_k F_ik V_k + j Q_i / conj(V_i) (Q term on PV rows
    only) plus PV magnitude rows; the slack voltage stays fixed.
    """
    slack_idx = net.index_of(net.slack.id)
    ns = [i for i in range(net.n) if i != slack_idx]
    pv = [i for i in range(net.n) if net.buses[i].kind == PV]
    nns = len(ns)
    dim = 2 * nns + len(pv)
    if dim == 0:
        return volts, qvals
    jay = ctx.complex(0, 1)
    best = None
    for _ in range(max_iter):
        res = _alpha0_residual(F, net, ctx, volts, qvals)
        if best is None or res < best[0]:
            best = (res, list(volts), dict(qvals))
        if res <= tol:
            return volts, qvals
        rows = [[ctx.real(0)] * dim for _ in range(dim)]
        rhs = [ctx.real(0)] * dim
        currents = F.matvec(volts)
        for a, i in enumerate(ns):
            bus = net.buses[i]
            g = currents[i]
            if bus.kind == PV:
                g = g + jay * qvals[i] / volts[i].conjugate()
            for b, k in enumerate(ns):
                m = F.at(i, k)
                rows[a][b] += m.real
                rows[a][nns + b] -= m.imag
                rows[nns + a][b] += m.imag
                rows[nns + a][nns + b] += m.real
            if bus.kind == PV:
                p = pv.index(i)
                cv = volts[i].conjugate()
                dq = jay / cv
                rows[a][2 * nns + p] += dq.real
                rows[nns + a][2 * nns + p] += dq.imag
                # d(1/conj(V))/dRe = -1/conj(V)^2, d/dIm = +j/conj(V)^2
                base = jay * qvals[i] / (cv * cv)
                dre = -base
                dim_ = jay * base
                rows[a][a] += dre.real
                rows[a][nns + a] += dim_.real
                rows[nns + a][a] += dre.imag
                rows[nns + a][nns + a] += dim_.imag
            rhs[a] = -g.real
            rhs[nns + a] = -g.imag
        for p, i in enumerate(pv):
            a = ns.index(i)
            bus = net.buses[i]
            mr = 2 * nns + p
            rows[mr][a] = 2 * volts[i].real
            rows[mr][nns + a] = 2 * volts[i].imag
            rhs[mr] = ctx.real(bus.v_setpoint) ** 2 - (volts[i] * volts[i].conjugate()).real
        try:
            step = lu_solve(lu_factor(rows), rhs)
        except SingularMatrix as exc:
            raise GermNotConverged(f"no-load Newton system singular: {exc}") from exc
        volts = list(volts)
        for a, i in enumerate(ns):
            volts[i] = volts[i] + ctx.complex(step[a], step[nns + a])
        qvals = dict(qvals)
        for p, i in enumerate(pv):
            qvals[i] = qvals[i] + step[2 * nns + p]
    res = _alpha0_residual(F, net, ctx, volts, qvals)
    if res <= tol:
        return volts, qvals
    _, bv, bq = best
    if _alpha0_residual(F, net, ctx, bv, bq) <= tol:
        return bv, bq
    raise GermNotConverged(f"no-load Newton stalled at residual {float(res):.3e}")


def _no_load_voltages(F, dec_aux, net_aux, ctx, germ_tol, max_m=48):
    """Solve the no-load problem: direct solve when linear, embedded
    phase-shifter-form run plus Newton polish otherwise.

    Stops at the first point the power-form residual crosses germ_tol: the
    germ accuracy budget is deliberately not exceeded, so a loosened
    germ_tol yields a correspondingly imprecise reference state.
    """
    slack_idx = net_aux.index_of(net_aux.slack.id)
    ns = [i for i in range(net_aux.n) if i != slack_idx]
    pv = [i for i in range(net_aux.n) if net_aux.buses[i].kind == PV]
    slack_v = ctx.real(net_aux.slack.v_setpoint) * ctx.expj(net_aux.slack.v_angle)

    if not ns:
        return [slack_v], {}

    if not pv:
        rows = [[F.at(i, k) for k in ns] for i in ns]
        rhs = [-F.at(i, slack_idx) * slack_v for i in ns]
        try:
            factors = lu_factor(rows)
        except SingularMatrix as exc:
            raise GermNotConverged(f"no-load network matrix singular: {exc}") from exc
        sol = lu_solve(factors, rhs)
        # one step of iterative refinement
        volts = [ctx.zero()] * net_aux.n
        volts[slack_idx] = slack_v
        for a, i in enumerate(ns):
            volts[i] = sol[a]
        currents = F.matvec(volts)
        corr = lu_solve(factors, [currents[i] for i in ns])
        for a, i in enumerate(ns):
            volts[i] = volts[i] - corr[a]
        res = _alpha0_residual(F, net_aux, ctx, volts, {})
        if res > germ_tol and res > 64 * ctx.eps * max(abs(e) for e in F.entries):
            raise GermNotConverged(f"linear no-load residual {float(res):.3e} > germ_tol")
        return volts, {}

    # nonlinear: embedded run on the auxiliary problem, then Newton polish.
    # Advancing one order at a time keeps the first germ_tol crossing close
    # to germ_tol itself: a deliberately loosened tolerance produces a
    # correspondingly imprecise reference state, never a better one.
    sys_aux = RecursionSystem(EmbeddingKind.CANONICAL_PS_RHS, dec_aux, net_aux,
                              ctx, _all_ones_germ(net_aux, ctx))
    sset = sys_aux.germ
    coarse = max(germ_tol, 1e-8)
    one = ctx.one()
    best = None
    stall = 0
    for order in range(1, 2 * max_m + 2):
        sset = extend_series(sys_aux, sset, order)
        candidates = []
        raw = [sum(sset.v[b.id].coefficients[1:], sset.v[b.id].coefficients[0])
               for b in net_aux.buses]
        candidates.append(raw)
        if order >= 3 and order % 2 == 1:
            m = (order - 1) // 2
            pa_v = list(raw)
            pa_v[slack_idx] = slack_v
            any_pa = False
            for idx, b in enumerate(net_aux.buses):
                if idx == slack_idx:
                    continue
                try:
                    pa = _pade.compute_pade(sset.v[b.id], m, ctx)
                    pa_v[idx] = _pade.evaluate(pa, one)
                    any_pa = True
                except (_pade.SingularDenominatorSystem, _pade.PoleHit):
                    pass
            if any_pa:
                candidates.append(pa_v)
        improved = False
        for cand in candidates:
            res = _alpha0_residual(F, net_aux, ctx, cand)
            if best is None or res < best[0]:
                best = (res, cand)
                improved = True
        if best[0] <= coarse:
            break
        stall = 0 if improved else stall + 1
        if stall >= 12:
            break
    if best is None:
        raise GermNotConverged("no-load embedded run produced no candidates")
    res, volts = best
    if res <= germ_tol:
        return list(volts), _derive_q0(F, net_aux, ctx, volts)
    qstart = {i: sum(sset.q[net_aux.buses[i].id].coefficients[1:],
                     sset.q[net_aux.buses[i].id].coefficients[0]) for i in pv}
    volts, _ = _newton_alpha0(F, net_aux, ctx, list(volts), qstart, germ_tol)
    return volts, _derive_q0(F, net_aux, ctx, volts)


def _zero_load_clone(net, unit_setpoints=False):
    buses = []
    for b in net.buses:
        kwargs = {"p_load": 0.0, "q_load": 0.0, "p_gen": 0.0}
        if unit_setpoints:
            kwargs["shunt_g"] = 0.0
            kwargs["shunt_b"] = 0.0
            if b.kind in (PV, SLACK):
                kwargs["v_setpoint"] = 1.0
                kwargs["v_angle"] = 0.0
        buses.append(replace(b, **kwargs))
    return type(net)(net.base_mva, buses, net.branches)


def _aux_decomposition(kind, dec):
    """Decomposition whose *full* matrix is the block the embedding keeps at
    order 0 (y_tr for canonical, jB_tr for G-on-RHS), with shunts removed."""
    ctx = dec.ctx
    zeros = [ctx.zero() for _ in range(dec.n)]
    if kind is EmbeddingKind.CANONICAL:
        return AdmittanceDecomposition(ctx, dec.bus_ids, dec.y_tr, dec.y_tr,
                                       zeros, dec.y_tr_sym, dec.y_tr_asym)
    jb_sym, jb_asym = dec.jb_split()
    jb = dec.jb_tr_complex()
    return AdmittanceDecomposition(ctx, dec.bus_ids, jb, jb, zeros, jb_sym, jb_asym)


def reference_state(kind, dec, net, ctx, germ_tol=None):
    """Order-0 SeriesSet for the embedding.

    Canonical-family germs are 1+j0 everywhere with zero PV reactive power
    whenever the order-0 equations allow it (always for the phase-shifter
    form); otherwise, and always for the classical form, the germ comes
    from the no-load solve.
    """
    if germ_tol is None:
        germ_tol = default_germ_tol(ctx)

    if kind in CANONICAL_FAMILY:
        if kind is EmbeddingKind.CANONICAL_PS_RHS or not dec.has_asymmetry():
            return _all_ones_germ(net, ctx)
        aux_net = _zero_load_clone(net, unit_setpoints=True)
        aux_dec = _aux_decomposition(kind, dec)
        volts, qvals = _no_load_voltages(aux_dec.y_full, aux_dec, aux_net, ctx, germ_tol)
        v = {b.id: PowerSeries([volts[i]]) for i, b in enumerate(net.buses)}
        q = {net.buses[i].id: PowerSeries([qvals.get(i, ctx.real(0))])
             for i in range(net.n) if net.buses[i].kind == PV}
        return SeriesSet(v, q, 0)

    # classical: no-load problem on the full admittance matrix
    aux_net = _zero_load_clone(net, unit_setpoints=False)
    volts, qvals = _no_load_voltages(dec.y_full, dec, aux_net, ctx, germ_tol)
    v = {b.id: PowerSeries([volts[i]]) for i, b in enumerate(net.buses)}
    q = {net.buses[i].id: PowerSeries([ctx.real(qvals[i])])
         for i in range(net.n) if net.buses[i].kind == PV}
    return SeriesSet(v, q, 0)
