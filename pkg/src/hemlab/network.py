"""Network model, JSON case ingestion, and admittance-matrix decompositions.

The case format is a purpose-built JSON schema (documented in the README and
in :func:`load_network`), chosen over the usual interchange formats so that
ingestion stays bit-exact and easy to test.  Admittance construction keeps
the transmission / shunt / symmetric / asymmetric split explicit because the
embeddings downstream differ only in which of those blocks stay on the
left-hand side.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .numerics import ComplexMatrix

PQ = "pq"
PV = "pv"
SLACK = "slack"
BUS_KINDS = (PQ, PV, SLACK)


class NetworkError(Exception):
    pass


class ParseError(NetworkError):
    """The case document is not well-formed."""


class ValidationError(NetworkError):
    """The case document parses but violates a model invariant."""


@dataclass(frozen=True)
class Bus:
    id: str
    kind: str
    p_load: float = 0.0
    q_load: float = 0.0
    p_gen: float = 0.0
    v_setpoint: float = 0.0
    v_angle: float = 0.0
    shunt_g: float = 0.0
    shunt_b: float = 0.0

    def injected_p(self):
        """Net injected active power (loads enter negatively)."""
        if self.kind == PQ:
            return -self.p_load
        return self.p_gen - self.p_load

    def injected_q(self):
        """Net injected reactive power; meaningful for PQ buses only."""
        return -self.q_load


@dataclass(frozen=True)
class Branch:
    from_bus: str
    to_bus: str
    r: float
    x: float
    b_charging: float = 0.0
    tap: float = 1.0
    phase_shift: float = 0.0


class NetworkModel:
    """Validated bus/branch model, all quantities per-unit on base_mva."""

    def __init__(self, base_mva, buses, branches):
        self.base_mva = float(base_mva)
        self.buses = list(buses)
        self.branches = list(branches)
        self._index = {b.id: i for i, b in enumerate(self.buses)}
        self._validate()

    def _validate(self):
        if len(self._index) != len(self.buses):
            raise ValidationError("duplicate bus ids")
        slacks = [b for b in self.buses if b.kind == SLACK]
        if len(slacks) != 1:
            raise ValidationError(f"expected exactly one slack bus, found {len(slacks)}")
        for b in self.buses:
            if b.kind not in BUS_KINDS:
                raise ValidationError(f"bus {b.id!r}: unknown kind {b.kind!r}")
            if b.kind in (PV, SLACK) and not b.v_setpoint > 0:
                raise ValidationError(f"bus {b.id!r}: {b.kind} bus needs v_setpoint > 0")
        if not self.branches:
            if len(self.buses) > 1:
                raise ValidationError("multi-bus network with no branches")
        for br in self.branches:
            if br.from_bus not in self._index or br.to_bus not in self._index:
                raise ValidationError(f"branch {br.from_bus}-{br.to_bus} references unknown bus")
            if br.from_bus == br.to_bus:
                raise ValidationError(f"branch {br.from_bus}-{br.to_bus} is a self-loop")
            if br.r * br.r + br.x * br.x == 0:
                raise ValidationError(f"branch {br.from_bus}-{br.to_bus} has zero impedance")
            if not br.tap > 0:
                raise ValidationError(f"branch {br.from_bus}-{br.to_bus} has non-positive tap")
        self._check_connected()

    def _check_connected(self):
        if len(self.buses) <= 1:
            return
        adj = {b.id: set() for b in self.buses}
        for br in self.branches:
            adj[br.from_bus].add(br.to_bus)
            adj[br.to_bus].add(br.from_bus)
        seen = {self.buses[0].id}
        stack = [self.buses[0].id]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if len(seen) != len(self.buses):
            missing = sorted(set(self._index) - seen)
            raise ValidationError(f"network is disconnected; unreachable buses: {missing}")

    @property
    def n(self):
        return len(self.buses)

    def index_of(self, bus_id):
        return self._index[bus_id]

    def bus(self, bus_id):
        return self.buses[self._index[bus_id]]

    @property
    def slack(self):
        return next(b for b in self.buses if b.kind == SLACK)

    def indices_of_kind(self, kind):
        return [i for i, b in enumerate(self.buses) if b.kind == kind]

    def __repr__(self):
        return f"NetworkModel({self.n} buses, {len(self.branches)} branches)"


_BUS_FIELDS = {"id", "kind", "p_load", "q_load", "p_gen", "v_setpoint",
               "v_angle", "shunt_g", "shunt_b"}
_BRANCH_FIELDS = {"from", "to", "r", "x", "b_charging", "tap", "phase_shift_rad"}


def _num(record, key, default, where):
    val = record.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ParseError(f"{where}: field {key!r} must be a number")
    return float(val)


def load_network(source):
    """Build a NetworkModel from a case document.

    ``source`` may be a dict (already parsed), a JSON string, or a path to a
    JSON file.  Top level: {"base_mva", "buses": [...], "branches": [...]};
    omitted numeric fields default to 0 and tap defaults to 1.  All
    quantities are per-unit except base_mva.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            try:
                with open(text, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ParseError(f"cannot read case file: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("case document must be a JSON object")
    for key in ("buses",):
        if key not in doc:
            raise ParseError(f"case document missing {key!r}")
    if not isinstance(doc["buses"], list) or not doc["buses"]:
        raise ParseError("'buses' must be a non-empty list")
    branches_doc = doc.get("branches", [])
    if not isinstance(branches_doc, list):
        raise ParseError("'branches' must be a list")

    base_mva = _num(doc, "base_mva", 100.0, "case")

    buses = []
    for rec in doc["buses"]:
        if not isinstance(rec, dict) or "id" not in rec or "kind" not in rec:
            raise ParseError("every bus needs 'id' and 'kind'")
        unknown = set(rec) - _BUS_FIELDS
        if unknown:
            raise ParseError(f"bus {rec.get('id')!r}: unknown fields {sorted(unknown)}")
        where = f"bus {rec['id']!r}"
        buses.append(Bus(
            id=str(rec["id"]),
            kind=str(rec["kind"]).lower(),
            p_load=_num(rec, "p_load", 0.0, where),
            q_load=_num(rec, "q_load", 0.0, where),
            p_gen=_num(rec, "p_gen", 0.0, where),
            v_setpoint=_num(rec, "v_setpoint", 0.0, where),
            v_angle=_num(rec, "v_angle", 0.0, where),
            shunt_g=_num(rec, "shunt_g", 0.0, where),
            shunt_b=_num(rec, "shunt_b", 0.0, where),
        ))

    branches = []
    for rec in branches_doc:
        if not isinstance(rec, dict) or "from" not in rec or "to" not in rec:
            raise ParseError("every branch needs 'from' and 'to'")
        unknown = set(rec) - _BRANCH_FIELDS
        if unknown:
            raise ParseError(f"branch {rec.get('from')}-{rec.get('to')}: unknown fields {sorted(unknown)}")
        where = f"branch {rec['from']}-{rec['to']}"
        branches.append(Branch(
            from_bus=str(rec["from"]),
            to_bus=str(rec["to"]),
            r=_num(rec, "r", 0.0, where),
            x=_num(rec, "x", 0.0, where),
            b_charging=_num(rec, "b_charging", 0.0, where),
            tap=_num(rec, "tap", 1.0, where),
            phase_shift=_num(rec, "phase_shift_rad", 0.0, where),
        ))

    return NetworkModel(base_mva, buses, branches)


class AdmittanceDecomposition:
    """Admittance matrix with the splits each embedding needs.

    y_full = y_tr + diag(y_sh) and y_tr = y_tr_sym + y_tr_asym hold exactly
    at the working precision because the summed forms are what get built;
    each row of y_tr_sym sums to zero by construction, which is what makes
    the all-ones reference state valid for the phase-shifter embedding.
    """

    def __init__(self, ctx, bus_ids, y_full, y_tr, y_sh, y_tr_sym, y_tr_asym):
        self.ctx = ctx
        self.bus_ids = list(bus_ids)
        self.y_full = y_full
        self.y_tr = y_tr
        self.y_sh = y_sh
        self.y_tr_sym = y_tr_sym
        self.y_tr_asym = y_tr_asym
        n = len(self.bus_ids)
        self.g_tr = [[y_tr.at(i, j).real for j in range(n)] for i in range(n)]
        self.b_tr = [[y_tr.at(i, j).imag for j in range(n)] for i in range(n)]

    @property
    def n(self):
        return len(self.bus_ids)

    def g_tr_complex(self):
        """G^tr as a complex matrix (zero imaginary part)."""
        ctx = self.ctx
        n = self.n
        return ComplexMatrix.from_rows(
            [[ctx.complex(self.g_tr[i][j]) for j in range(n)] for i in range(n)])

    def jb_tr_complex(self):
        """jB^tr as a complex matrix."""
        ctx = self.ctx
        n = self.n
        return ComplexMatrix.from_rows(
            [[ctx.complex(0, self.b_tr[i][j]) for j in range(n)] for i in range(n)])

    def jb_split(self):
        """(j*Im(y_tr_sym), j*Im(y_tr_asym)): a zero-row-sum split of jB^tr."""
        ctx = self.ctx
        n = self.n
        sym = ComplexMatrix.from_rows(
            [[ctx.complex(0, self.y_tr_sym.at(i, j).imag) for j in range(n)] for i in range(n)])
        asym = ComplexMatrix.from_rows(
            [[ctx.complex(0, self.y_tr_asym.at(i, j).imag) for j in range(n)] for i in range(n)])
        return sym, asym

    def has_asymmetry(self):
        return any(e != 0 for e in self.y_tr_asym.entries)


def build_admittance(net, ctx):
    """Assemble the admittance decomposition of a network under a context.

    Per-branch stamps follow the two-winding phase-shifter model: the full
    branch block is [[A^2 y, -A y e^{j phi}], [-A y e^{-j phi}, y]] with
    y = 1/(r+jx).  The symmetric part stamps [[Ay, -Ay], [-Ay, Ay]], the
    asymmetric part [[0, Ay - Ay e^{j phi}], [Ay - Ay e^{-j phi}, 0]], and
    the branch-shunt remainder diag(Ay(A-1), y(1-A)) joins line charging and
    bus shunts in y_sh.
    """
    n = net.n
    zero = ctx.zero()
    sym = [[zero for _ in range(n)] for _ in range(n)]
    asym = [[zero for _ in range(n)] for _ in range(n)]
    y_sh = [zero for _ in range(n)]

    for br in net.branches:
        f = net.index_of(br.from_bus)
        t = net.index_of(br.to_bus)
        y = 1 / ctx.complex(br.r, br.x)
        a = ctx.real(br.tap)
        ay = a * y
        sym[f][f] = sym[f][f] + ay
        sym[t][t] = sym[t][t] + ay
        sym[f][t] = sym[f][t] - ay
        sym[t][f] = sym[t][f] - ay
        if br.phase_shift != 0.0:
            eplus = ctx.expj(br.phase_shift)
            eminus = ctx.expj(-br.phase_shift)
            asym[f][t] = asym[f][t] + (ay - ay * eplus)
            asym[t][f] = asym[t][f] + (ay - ay * eminus)
        # branch-shunt remainder from the off-nominal tap
        y_sh[f] = y_sh[f] + ay * (a - 1)
        y_sh[t] = y_sh[t] + y * (1 - a)
        if br.b_charging != 0.0:
            half = ctx.complex(0, br.b_charging) / 2
            y_sh[f] = y_sh[f] + half
            y_sh[t] = y_sh[t] + half

    for i, bus in enumerate(net.buses):
        if bus.shunt_g != 0.0 or bus.shunt_b != 0.0:
            y_sh[i] = y_sh[i] + ctx.complex(bus.shunt_g, bus.shunt_b)

    y_tr_rows = [[sym[i][j] + asym[i][j] for j in range(n)] for i in range(n)]
    y_full_rows = [[y_tr_rows[i][j] + (y_sh[i] if i == j else zero) for j in range(n)]
                   for i in range(n)]

    return AdmittanceDecomposition(
        ctx,
        [b.id for b in net.buses],
        ComplexMatrix.from_rows(y_full_rows),
        ComplexMatrix.from_rows(y_tr_rows),
        y_sh,
        ComplexMatrix.from_rows(sym),
        ComplexMatrix.from_rows(asym),
    )


def injected_power(dec, voltages):
    """S_i = V_i * conj(sum_k Y_ik V_k) for a voltage vector in bus order."""
    currents = dec.y_full.matvec(voltages)
    return [v * i.conjugate() for v, i in zip(voltages, currents)]
