"""Bundled example networks.

Each builder returns a plain case document (the JSON schema of
``load_network``); the repo's cases/ directory holds the same documents as
files for command-line use.
"""

from __future__ import annotations

import json


def two_bus(p_load=0.6, q_load=0.25, r=0.0, x=0.2, v_slack=1.02,
            shunt_g=0.0, shunt_b=0.0, base_mva=100.0):
    """Slack + PQ load over one series branch: the workhorse case.

    The voltage function is an explicit quadratic branch, so the branch
    points (and hence SNBP, ROC, and branch-cut capacity) have closed
    forms the tests check against.
    """
    return {
        "base_mva": base_mva,
        "buses": [
            {"id": "1", "kind": "slack", "v_setpoint": v_slack},
            {"id": "2", "kind": "pq", "p_load": p_load, "q_load": q_load,
             "shunt_g": shunt_g, "shunt_b": shunt_b},
        ],
        "branches": [
            {"from": "1", "to": "2", "r": r, "x": x},
        ],
    }


def fig7_two_bus():
    """Resonant two-bus case: series X_L = 1, bus-2 shunt capacitor X_C = 0.5,
    pure reactive injection Q = -0.1, slack at 1+j0.

    The shunt capacitor is taken as a bus element (the series/shunt reading
    of X_C is an assumption, recorded here): the LC resonance flips the
    no-load voltage to -1, so flat-started iterative solvers land on the
    low-voltage branch while the classical embedding, whose reference state
    is the no-load solution, continues the operable branch.  The canonical
    embedding of this network has a genuine real pole at alpha = 0.5.
    """
    return {
        "base_mva": 100.0,
        "buses": [
            {"id": "1", "kind": "slack", "v_setpoint": 1.0},
            {"id": "2", "kind": "pq", "q_load": 0.1, "shunt_b": 2.0},
        ],
        "branches": [
            {"from": "1", "to": "2", "r": 0.0, "x": 1.0},
        ],
    }


def five_bus_ps(phase_shift=0.08, tap=0.98):
    """Five buses, one PV machine, one phase-shifting transformer.

    Light loading keeps the series well inside its convergence radius; the
    phase shifter makes the all-ones germ invalid for every embedding that
    keeps the asymmetric block on the left-hand side.
    """
    return {
        "base_mva": 100.0,
        "buses": [
            {"id": "1", "kind": "slack", "v_setpoint": 1.03},
            {"id": "2", "kind": "pv", "v_setpoint": 1.02, "p_gen": 0.25},
            {"id": "3", "kind": "pq", "p_load": 0.35, "q_load": 0.12},
            {"id": "4", "kind": "pq", "p_load": 0.30, "q_load": 0.10},
            {"id": "5", "kind": "pq", "p_load": 0.25, "q_load": 0.08},
        ],
        "branches": [
            {"from": "1", "to": "2", "r": 0.010, "x": 0.050, "b_charging": 0.020},
            {"from": "1", "to": "3", "r": 0.015, "x": 0.070, "b_charging": 0.016},
            {"from": "2", "to": "4", "r": 0.012, "x": 0.060, "b_charging": 0.020},
            {"from": "3", "to": "4", "r": 0.010, "x": 0.050, "b_charging": 0.014},
            {"from": "4", "to": "5", "r": 0.020, "x": 0.080, "b_charging": 0.024},
            {"from": "2", "to": "5", "r": 0.015, "x": 0.070, "b_charging": 0.018,
             "tap": tap, "phase_shift_rad": phase_shift},
        ],
    }


def five_bus_lossy(load_scale=1.0):
    """Five-bus mesh with high r/x branches and no phase shifters.

    Meaningful branch conductance separates the canonical form from its
    G-on-the-right variant: moving G to the right-hand side plants extra
    branch points that slow the series down.
    """
    return {
        "base_mva": 100.0,
        "buses": [
            {"id": "1", "kind": "slack", "v_setpoint": 1.02},
            {"id": "2", "kind": "pv", "v_setpoint": 1.01, "p_gen": 0.30 * load_scale},
            {"id": "3", "kind": "pq", "p_load": 0.45 * load_scale, "q_load": 0.15 * load_scale},
            {"id": "4", "kind": "pq", "p_load": 0.40 * load_scale, "q_load": 0.12 * load_scale},
            {"id": "5", "kind": "pq", "p_load": 0.35 * load_scale, "q_load": 0.10 * load_scale},
        ],
        "branches": [
            {"from": "1", "to": "2", "r": 0.05, "x": 0.06},
            {"from": "1", "to": "3", "r": 0.06, "x": 0.07},
            {"from": "2", "to": "4", "r": 0.055, "x": 0.065},
            {"from": "3", "to": "4", "r": 0.05, "x": 0.06},
            {"from": "4", "to": "5", "r": 0.07, "x": 0.08},
            {"from": "2", "to": "5", "r": 0.06, "x": 0.07},
        ],
    }


def germ_sensitivity_three_bus():
    """Slack / depressed-PV / PQ triangle for reference-state experiments.

    The low PV setpoint forces a strongly nonlinear no-load problem, so the
    reference state genuinely carries whatever tolerance it was solved to;
    final mismatches then floor out at the germ accuracy.
    """
    return {
        "base_mva": 100.0,
        "buses": [
            {"id": "1", "kind": "slack", "v_setpoint": 1.0},
            {"id": "2", "kind": "pv", "v_setpoint": 0.55, "p_gen": 0.1},
            {"id": "3", "kind": "pq", "p_load": 0.3, "q_load": 0.1},
        ],
        "branches": [
            {"from": "1", "to": "2", "r": 0.01, "x": 0.6},
            {"from": "2", "to": "3", "r": 0.01, "x": 0.51},
            {"from": "1", "to": "3", "r": 0.01, "x": 0.51},
        ],
    }


BUNDLED = {
    "two_bus": two_bus,
    "fig7_two_bus": fig7_two_bus,
    "five_bus_ps": five_bus_ps,
    "five_bus_lossy": five_bus_lossy,
    "germ_sensitivity_three_bus": germ_sensitivity_three_bus,
}


def case_json(name_or_doc):
    doc = BUNDLED[name_or_doc]() if isinstance(name_or_doc, str) else name_or_doc
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_bundled(directory):
    """Write every bundled case as <name>.json under the given directory."""
    import os
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name in sorted(BUNDLED):
        path = os.path.join(directory, f"{name}.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(case_json(name))
        paths.append(path)
    return paths
