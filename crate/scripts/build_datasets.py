#!/usr/bin/env python3
"""Regenerates the bundled scenario files under crates/core/data/.

Run from the repository root:  python3 scripts/build_datasets.py
"""
import json
import os
import random

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "data")

PUMP = dict(alpha=185.0, beta=223.32, efficiency=0.8075, phi=0.85)
COMP = dict(gamma=4.0, sigma=0.42, phi=0.85)
PRIORITY = {1: 100.0, 2: 10.0, 3: 0.2}


def pipe_f(w_max_m3h, loss_at_cap):
    """Darcy coefficient giving `loss_at_cap` metres of head loss at w_max."""
    w = w_max_m3h / 3600.0
    return round(loss_at_cap / (w * w), 4)


def weymouth_c(g_max_m3h, drop_at_cap):
    return round(g_max_m3h * g_max_m3h / drop_at_cap, 2)


def downstream_totals(edges, demand, root):
    children = {}
    for a, b in edges:
        children.setdefault(a, []).append(b)
    total = {}

    def walk(n):
        t = demand.get(n, 0.0) + sum(walk(c) for c in children.get(n, []))
        total[n] = t
        return t

    walk(root)
    return total


def electric_nodes(ids, roles, devices):
    out = []
    for i in ids:
        rec = {"id": i, "roles": sorted(roles.get(i, []))}
        if devices.get(i):
            rec["attached_device_ids"] = devices[i]
        out.append(rec)
    return out


# ---------------------------------------------------------------------------
# Case 1
# ---------------------------------------------------------------------------

# 33-bus feeder: (from, to, r_ohm, x_ohm), 1-indexed buses; bus 1 is the
# substation, removed here so electric node k corresponds to bus k+1.
FEEDER33 = [
    (1, 2, 0.0922, 0.0470), (2, 3, 0.4930, 0.2511), (3, 4, 0.3660, 0.1864),
    (4, 5, 0.3811, 0.1941), (5, 6, 0.8190, 0.7070), (6, 7, 0.1872, 0.6188),
    (7, 8, 0.7114, 0.2351), (8, 9, 1.0300, 0.7400), (9, 10, 1.0440, 0.7400),
    (10, 11, 0.1966, 0.0650), (11, 12, 0.3744, 0.1238), (12, 13, 1.4680, 1.1550),
    (13, 14, 0.5416, 0.7129), (14, 15, 0.5910, 0.5260), (15, 16, 0.7463, 0.5450),
    (16, 17, 1.2890, 1.7210), (17, 18, 0.7320, 0.5740), (2, 19, 0.1640, 0.1565),
    (19, 20, 1.5042, 1.3554), (20, 21, 0.4095, 0.4784), (21, 22, 0.7089, 0.9373),
    (3, 23, 0.4512, 0.3083), (23, 24, 0.8980, 0.7091), (24, 25, 0.8960, 0.7011),
    (6, 26, 0.2030, 0.1034), (26, 27, 0.2842, 0.1447), (27, 28, 1.0590, 0.9337),
    (28, 29, 0.8042, 0.7006), (29, 30, 0.5075, 0.2585), (30, 31, 0.9744, 0.9630),
    (31, 32, 0.3105, 0.3619), (32, 33, 0.3410, 0.5302),
]
TIES33 = [(8, 21, 2.0, 2.0), (9, 15, 2.0, 2.0), (12, 22, 2.0, 2.0), (18, 33, 0.5, 0.5), (25, 29, 0.5, 0.5)]
LOADS33 = {
    2: (100, 60), 3: (90, 40), 4: (120, 80), 5: (60, 30), 6: (60, 20), 7: (200, 100),
    8: (200, 100), 9: (60, 20), 10: (60, 20), 11: (45, 30), 12: (60, 35), 13: (60, 35),
    14: (120, 80), 15: (60, 10), 16: (60, 20), 17: (60, 20), 18: (90, 40), 19: (90, 40),
    20: (90, 40), 21: (90, 40), 22: (90, 40), 23: (90, 50), 24: (420, 200), 25: (420, 200),
    26: (60, 25), 27: (60, 25), 28: (60, 20), 29: (120, 70), 30: (200, 600), 31: (150, 70),
    32: (210, 100), 33: (60, 40),
}

WATER_B1 = {
    1: (0, 10.6), 2: (30.06, 29.7), 3: (40.32, 20), 4: (49.32, 25), 5: (7.2, 75),
    6: (3.6, 146), 7: (5.04, 141), 8: (7.2, 146), 9: (11.88, 177), 10: (119.16, 176),
    11: (10.8, 176.65), 12: (14.4, 148), 13: (14.4, 144.13), 14: (30.06, 143), 15: (72, 126.42),
}
GAS_B2 = {
    1: 0, 2: 30, 3: 51, 4: 0, 5: 52.2, 6: 41.1, 7: 33.1, 8: 0, 9: 36.7, 10: 54.1,
    11: 0, 12: 82.4, 13: 0, 14: 37.4, 15: 88.8, 16: 13.2, 17: 33.4, 18: 0, 19: 180.2, 20: 24.6,
}
WATER_TREE_1 = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (8, 9), (9, 10),
                (10, 11), (8, 12), (12, 13), (6, 14), (14, 15)]
GAS_TREE_1 = [(1, 2), (2, 3), (3, 4), (4, 14), (14, 15), (15, 16), (14, 17), (17, 18), (18, 19),
              (18, 20), (4, 5), (5, 6), (6, 7), (7, 8), (8, 9), (9, 10), (8, 11), (11, 12), (11, 13)]


def case1():
    zbase = 12.66 ** 2 / 1.0  # ohm, 1000 kVA base
    pumps = [("WP1", (1, 2), 7, 350.0), ("WP2", (4, 5), 19, 250.0), ("WP3", (7, 8), 31, 150.0)]
    comps = [("GC1", (1, 2), 9, 350.0), ("GC2", (4, 14), 25, 250.0), ("GC3", (17, 18), 29, 150.0)]
    dgs = {1: 740.0, 12: 330.0, 17: 440.0, 22: 460.0, 28: 230.0}
    cust_e = [2, 4, 6, 10, 12, 14, 16, 18, 21, 22, 24, 27, 30, 32]
    levels = [2, 1, 2, 3, 2, 1, 3, 2, 1, 2, 3, 1, 2, 3]
    gas_nodes = sorted(n for n, d in GAS_B2.items() if d > 0)
    switchable = {"7-20", "8-14", "11-21", "17-32", "24-28", "2-3", "28-29"}

    roles, devices = {}, {}
    for n in dgs:
        roles.setdefault(n, []).append("dg")
    for n in cust_e:
        roles.setdefault(n, []).append("customer-load")
    for pid, _, en, _ in pumps:
        roles.setdefault(en, []).append("pump-load")
        devices.setdefault(en, []).append(pid)
    for cid, _, en, _ in comps:
        roles.setdefault(en, []).append("compressor-load")
        devices.setdefault(en, []).append(cid)

    branches = []
    for f, t, r, x in FEEDER33[1:] + TIES33:
        a, b = f - 1, t - 1
        bid = f"{a}-{b}"
        branches.append({
            "id": bid, "from": a, "to": b,
            "impedance": {"r": round(r / zbase, 8), "x": round(x / zbase, 8)},
            "l_max": 9.0,
            "status": "switchable" if bid in switchable else "closed-fixed",
            "provenance": "external-reference",
        })
    assert len(branches) == 36 and all(b["id"] in {x["id"] for x in branches} for b in branches)
    assert switchable <= {b["id"] for b in branches}

    electric = {
        "nodes": electric_nodes(range(1, 33), roles, devices),
        "branches": branches,
        "dgs": [{"node": n, "capacity_kva": c, "provenance": "synthesized"} for n, c in dgs.items()],
    }

    # water
    wdem = {n: d for n, (d, _) in WATER_B1.items()}
    wtot = downstream_totals(WATER_TREE_1, wdem, 1)
    pump_edges = {e: pid for pid, e, _, _ in pumps}
    losses = [0.6, 0.4, 0.5, 0.7, 0.3, 0.5, 0.6, 0.4, 0.5, 0.3, 0.6, 0.4]
    wnodes = []
    for n, (d, hmin) in WATER_B1.items():
        rec = {"id": n, "demand_rate": d, "h_min": hmin, "provenance": "published"}
        if n == 1:
            rec["reservoir"] = {"fixed_head": 30.0}
        wnodes.append(rec)
    wbranches, k = [], 0
    for a, b in WATER_TREE_1:
        w_max = round(max(2.0 * wtot[b], 10.0), 2)
        if (a, b) in pump_edges:
            kind = {"type": "pump", "pump_id": pump_edges[(a, b)]}
        else:
            kind = {"type": "pipe", "f": pipe_f(w_max, losses[k % len(losses)])}
            k += 1
        wbranches.append({"id": f"W{a}-{b}", "from": a, "to": b, "kind": kind, "w_max": w_max,
                          "provenance": "synthesized"})

    # gas
    gtot = downstream_totals(GAS_TREE_1, GAS_B2, 1)
    comp_edges = {e: cid for cid, e, _, _ in comps}
    drops = [4.0, 3.0, 5.0, 2.5, 3.5, 4.5]
    gnodes = []
    for n, d in GAS_B2.items():
        rec = {"id": n, "demand_rate": d, "psi_min": 4.0, "psi_max": 100.0, "provenance": "published"}
        if n == 1:
            rec.update(source=True, psi_min=16.0, psi_max=25.0)
        gnodes.append(rec)
    gbranches, k = [], 0
    for a, b in GAS_TREE_1:
        g_max = round(max(2.0 * gtot[b], 10.0), 2)
        if (a, b) in comp_edges:
            kind = {"type": "compressor", "compressor_id": comp_edges[(a, b)]}
        else:
            kind = {"type": "pipe", "c": weymouth_c(g_max, drops[k % len(drops)])}
            k += 1
        gbranches.append({"id": f"G{a}-{b}", "from": a, "to": b, "kind": kind, "g_max": g_max,
                          "provenance": "synthesized"})

    customers = []
    for i in range(14):
        en = cust_e[i]
        p, q = LOADS33[en + 1]
        wn, gn = i + 2, gas_nodes[i]
        customers.append({
            "id": i + 1, "priority": PRIORITY[levels[i]], "weights": {"a": 0.4, "b": 0.3, "c": 0.3},
            "electric_node": en, "water_node": wn, "gas_node": gn,
            "s_rate": {"p_kw": float(p), "q_kvar": float(q)},
            "w_rate": wdem[wn], "g_rate": GAS_B2[gn], "provenance": "synthesized",
        })

    return {
        "name": "case1",
        "notes": [
            "electric network: 33-bus feeder with the substation removed; node k is bus k+1",
            "line impedances and customer loads: external reference data, converted to per-unit on 1000 kVA / 12.66 kV",
            "DG sites, customer placement and priority levels, pipe and Weymouth coefficients, water/gas trees, source head and pressure bounds: synthesized",
            "pump curve flow unit: m3/s; compressor sigma applied to m3/h",
        ],
        "base": {"kva": 1000.0, "kv": 12.66},
        "electric": electric,
        "water": {"nodes": wnodes, "branches": wbranches},
        "gas": {"nodes": gnodes, "branches": gbranches},
        "coupling": {
            "pumps": [dict(id=pid, water_branch=f"W{e[0]}-{e[1]}", electric_node=en, rated_power_kw=pw, **PUMP)
                      for pid, e, en, pw in pumps],
            "compressors": [dict(id=cid, gas_branch=f"G{e[0]}-{e[1]}", electric_node=en, rated_power_kw=pw, **COMP)
                            for cid, e, en, pw in comps],
        },
        "customers": customers,
        "outage": {"damaged_electric_branches": ["9-10", "5-25"], "grid_available": False, "root_node": 1},
        "params": {"lambda": 0.001},
    }


# ---------------------------------------------------------------------------
# Case 2
# ---------------------------------------------------------------------------

CUSTOMERS_C1 = [
    (1, 1, 1), (2, 4, 2), (3, 6, 3), (4, 9, 4), (5, 12, 6), (6, 16, 7), (7, 20, 8), (8, 22, 9),
    (9, 29, 10), (10, 30, 11), (11, 32, 12), (12, 33, 13), (13, 35, 14), (14, 38, 15), (15, 41, 16),
    (16, 42, 17), (17, 45, 18), (18, 46, 19), (19, 47, 20), (20, 49, 21), (21, 53, 22), (22, 55, 23),
    (23, 58, 24), (24, 63, 25), (25, 64, 26), (26, 65, 27), (27, 71, 28), (28, 76, 29), (29, 79, 30),
    (30, 82, 31), (31, 87, 32), (32, 90, 33), (33, 94, 34), (34, 96, 35), (35, 98, 36), (36, 100, 37),
    (37, 102, 38), (38, 107, 39), (39, 109, 40), (40, 113, 41),
]
WATER_C2 = {
    1: (7.2, 183), 2: (3.6, 68.85), 3: (3.6, 166.42), 4: (14.4, 60), 5: (0, 184), 6: (11.916, 65),
    7: (4.32, 65), 8: (4.32, 112.18), 9: (6.12, 115), 10: (5.4, 134.99), 11: (14.4, 101), 12: (14.4, 184),
    13: (3.6, 186), 14: (14.4, 242), 15: (3.6, 242), 16: (3.6, 242), 17: (3.96, 242), 18: (3.96, 185.78),
    19: (6.12, 217), 20: (6.12, 139.02), 21: (5.76, 139.82), 22: (5.4, 139.82), 23: (3.6, 140),
    24: (3.96, 198.33), 25: (3.6, 202.15), 26: (4.68, 177), 27: (3.6, 177), 28: (18, 69.39),
    29: (11.52, 69), 30: (14.4, 184), 31: (14.4, 216.65), 32: (14.4, 186), 33: (4.32, 188),
    34: (5.4, 69), 35: (3.6, 100), 36: (46.8, 258.9), 37: (4.68, 184.13), 38: (4.68, 241.18),
    39: (6.84, 240), 40: (3.96, 203.01), 41: (39.6, 235.71), 42: (0, 1),
}
GAS_C3 = {
    1: 15, 2: 10, 3: 21, 4: 22.2, 5: 12.1, 6: 33.21, 7: 11.2, 8: 2.5, 9: 16, 10: 27.1, 11: 31.2,
    12: 42.4, 13: 19.3, 14: 10.2, 15: 3.31, 16: 6.6, 17: 33.4, 18: 33.2, 19: 20.1, 20: 20, 21: 31.2,
    22: 13.4, 23: 21, 24: 15.3, 25: 28.2, 26: 3.74, 27: 11.9, 28: 18.9, 29: 36.7, 30: 5.51, 31: 35.2,
    32: 15.6, 33: 18.4, 34: 19.6, 35: 17.3, 36: 36.2, 37: 22.1, 38: 24.6, 39: 48.2, 40: 24.6,
}


def case2():
    rng = random.Random(20210410)
    n_e = 123
    parent = {}
    for k in range(2, n_e + 1):
        parent[k] = rng.randint(max(1, k - 6), k - 1)
    pumps_e = [8, 27, 51, 70, 88, 117]
    comps_e = [14, 60, 97]
    dgs = {1: 800.0, 37: 900.0, 57: 950.0, 84: 730.0, 104: 630.0}
    root = 57
    cust_map = {c: (e, w) for c, e, w in CUSTOMERS_C1}

    roles, devices = {}, {}
    for n in dgs:
        roles.setdefault(n, []).append("dg")
    for c, (e, _) in cust_map.items():
        roles.setdefault(e, [])
        if "customer-load" not in roles[e]:
            roles[e].append("customer-load")
    for i, en in enumerate(pumps_e):
        roles.setdefault(en, []).append("pump-load")
        devices.setdefault(en, []).append(f"WP{i + 1}")
    for i, en in enumerate(comps_e):
        roles.setdefault(en, []).append("compressor-load")
        devices.setdefault(en, []).append(f"GC{i + 1}")

    def imp():
        return {"r": round(rng.uniform(0.004, 0.012), 6), "x": round(rng.uniform(0.003, 0.010), 6)}

    branches = []
    sectionalizers = {18, 35, 66, 90, 110}
    for k in range(2, n_e + 1):
        branches.append({"id": f"{parent[k]}-{k}", "from": parent[k], "to": k, "impedance": imp(),
                         "l_max": 16.0, "status": "switchable" if k in sectionalizers else "closed-fixed",
                         "provenance": "synthesized"})
    existing = {(parent[k], k) for k in parent}
    ties = []
    while len(ties) < 6:
        a, b = sorted(rng.sample(range(1, n_e + 1), 2))
        if b - a < 15 or (a, b) in existing or (a, b) in ties:
            continue
        ties.append((a, b))
    for a, b in ties:
        branches.append({"id": f"{a}-{b}", "from": a, "to": b, "impedance": imp(), "l_max": 16.0,
                         "status": "switchable", "provenance": "synthesized"})
    damaged = [branches[30]["id"], branches[75]["id"]]

    electric = {
        "nodes": electric_nodes(range(1, n_e + 1), roles, devices),
        "branches": branches,
        "dgs": [{"node": n, "capacity_kva": c, "provenance": "published"} for n, c in dgs.items()],
    }

    # water: six pumped mains leave the reservoir (node 42)
    groups = [[5, 1, 2, 3, 4, 6, 7], [8, 9, 10, 11, 12, 13], [14, 15, 16, 17, 18, 19, 20],
              [21, 22, 23, 24, 25, 26, 27], [28, 29, 30, 31, 32, 33, 34], [36, 35, 37, 38, 39, 40, 41]]
    wedges, pump_edges = [], {}
    for gi, g in enumerate(groups):
        wedges.append((42, g[0]))
        pump_edges[(42, g[0])] = f"WP{gi + 1}"
        for j in range(1, len(g)):
            wedges.append((g[rng.randint(max(0, j - 2), j - 1)], g[j]))
    wdem = {n: d for n, (d, _) in WATER_C2.items()}
    wtot = downstream_totals(wedges, wdem, 42)
    wnodes = []
    for n, (d, hmin) in WATER_C2.items():
        rec = {"id": n, "demand_rate": d, "h_min": hmin, "provenance": "published"}
        if n == 42:
            rec["reservoir"] = {"fixed_head": 80.0}
        wnodes.append(rec)
    wbranches = []
    for a, b in wedges:
        w_max = round(max(2.0 * wtot[b], 10.0), 3)
        if (a, b) in pump_edges:
            kind = {"type": "pump", "pump_id": pump_edges[(a, b)]}
        else:
            kind = {"type": "pipe", "f": pipe_f(w_max, rng.uniform(0.4, 1.2))}
        wbranches.append({"id": f"W{a}-{b}", "from": a, "to": b, "kind": kind, "w_max": w_max,
                          "provenance": "synthesized"})

    # gas: the 20-node backbone renumbered 41..60, two customer leaves per backbone node
    gedges = [(a + 40, b + 40) for a, b in GAS_TREE_1]
    comp_edges = {(41, 42): "GC1", (44, 54): "GC2", (57, 58): "GC3"}
    for b in range(41, 61):
        i = b - 41
        gedges += [(b, 2 * i + 1), (b, 2 * i + 2)]
    gdem = dict(GAS_C3)
    gtot = downstream_totals(gedges, gdem, 41)
    gnodes = []
    for n in list(range(1, 41)) + list(range(41, 61)):
        rec = {"id": n, "demand_rate": gdem.get(n, 0.0), "psi_min": 4.0, "psi_max": 100.0,
               "provenance": "published" if n <= 40 else "synthesized"}
        if n == 41:
            rec.update(source=True, psi_min=16.0, psi_max=25.0)
        gnodes.append(rec)
    gbranches = []
    for a, b in gedges:
        g_max = round(max(2.0 * gtot[b], 10.0), 3)
        if (a, b) in comp_edges:
            kind = {"type": "compressor", "compressor_id": comp_edges[(a, b)]}
        else:
            kind = {"type": "pipe", "c": weymouth_c(g_max, rng.uniform(1.5, 4.0) if b > 40 else 0.5)}
        gbranches.append({"id": f"G{a}-{b}", "from": a, "to": b, "kind": kind, "g_max": g_max,
                          "provenance": "synthesized"})

    levels = [1] * 10 + [2] * 14 + [3] * 16
    rng.shuffle(levels)
    customers = []
    for c in range(1, 41):
        e, w = cust_map[c]
        customers.append({
            "id": c, "priority": PRIORITY[levels[c - 1]], "weights": {"a": 0.4, "b": 0.3, "c": 0.3},
            "electric_node": e, "water_node": w, "gas_node": c,
            "s_rate": {"p_kw": float(rng.choice([20, 40, 40, 60, 75, 90]))},
            "w_rate": wdem[w], "g_rate": gdem[c], "provenance": "synthesized",
        })

    pumps = [dict(id=f"WP{i + 1}", water_branch=f"W42-{groups[i][0]}", electric_node=en, rated_power_kw=500.0, **PUMP)
             for i, en in enumerate(pumps_e)]
    comp_br = {"GC1": "G41-42", "GC2": "G44-54", "GC3": "G57-58"}
    compressors = [dict(id=f"GC{i + 1}", gas_branch=comp_br[f"GC{i + 1}"], electric_node=en, rated_power_kw=500.0,
                        **COMP) for i, en in enumerate(comps_e)]
    return {
        "name": "case2",
        "notes": [
            "123-node electric feeder topology, impedances, ties, loads and device sites: synthesized",
            "water node data and gas demand data: published tables; trees and coefficients: synthesized",
            "gas backbone nodes 41..60 reuse the case1 gas tree; customers are leaves 1..40",
            "pump curve flow unit: m3/s; compressor sigma applied to m3/h",
        ],
        "base": {"kva": 1000.0, "kv": 4.16},
        "electric": electric,
        "water": {"nodes": wnodes, "branches": wbranches},
        "gas": {"nodes": gnodes, "branches": gbranches},
        "coupling": {"pumps": pumps, "compressors": compressors},
        "customers": customers,
        "outage": {"damaged_electric_branches": damaged, "grid_available": False, "root_node": root},
        "params": {"lambda": 0.001},
    }


# ---------------------------------------------------------------------------
# Two pumps in series
# ---------------------------------------------------------------------------

def toy():
    z = {"r": 1e-4, "x": 1e-4}
    return {
        "name": "toy-two-pump",
        "notes": [
            "two 400 kW pumps in series, 400 kVA of generation, customer demands 250 and 280 m3/h",
            "reactive ratio of both pumps set to 0 so the full 400 kVA is active power",
            "reservoir head, minimum heads and line impedances: synthesized",
        ],
        "base": {"kva": 1000.0, "kv": 12.66},
        "electric": {
            "nodes": [
                {"id": 1, "roles": ["dg"]},
                {"id": 2, "roles": ["pump-load"], "attached_device_ids": ["P1"]},
                {"id": 3, "roles": ["pump-load"], "attached_device_ids": ["P2"]},
            ],
            "branches": [
                {"id": "1-2", "from": 1, "to": 2, "impedance": z, "l_max": 1.0, "status": "closed-fixed",
                 "provenance": "synthesized"},
                {"id": "2-3", "from": 2, "to": 3, "impedance": z, "l_max": 1.0, "status": "closed-fixed",
                 "provenance": "synthesized"},
            ],
            "dgs": [{"node": 1, "capacity_kva": 400.0, "provenance": "published"}],
        },
        "water": {
            "nodes": [
                {"id": 1, "demand_rate": 0.0, "h_min": 0.0, "reservoir": {"fixed_head": 10.0},
                 "provenance": "synthesized"},
                {"id": 2, "demand_rate": 250.0, "h_min": 5.0, "provenance": "published"},
                {"id": 3, "demand_rate": 280.0, "h_min": 5.0, "provenance": "published"},
            ],
            "branches": [
                {"id": "W1-2", "from": 1, "to": 2, "kind": {"type": "pump", "pump_id": "P1"}, "w_max": 1000.0,
                 "provenance": "synthesized"},
                {"id": "W2-3", "from": 2, "to": 3, "kind": {"type": "pump", "pump_id": "P2"}, "w_max": 1000.0,
                 "provenance": "synthesized"},
            ],
        },
        "gas": {"nodes": [], "branches": []},
        "coupling": {
            "pumps": [
                dict(id="P1", water_branch="W1-2", electric_node=2, rated_power_kw=400.0,
                     alpha=185.0, beta=223.32, efficiency=0.8075, phi=0.0),
                dict(id="P2", water_branch="W2-3", electric_node=3, rated_power_kw=400.0,
                     alpha=185.0, beta=223.32, efficiency=0.8075, phi=0.0),
            ],
            "compressors": [],
        },
        "customers": [
            {"id": 1, "priority": 1.0, "weights": {"a": 0.0, "b": 1.0, "c": 0.0}, "water_node": 2,
             "s_rate": {"p_kw": 0.0, "q_kvar": 0.0}, "w_rate": 250.0, "provenance": "published"},
            {"id": 2, "priority": 1.0, "weights": {"a": 0.0, "b": 1.0, "c": 0.0}, "water_node": 3,
             "s_rate": {"p_kw": 0.0, "q_kvar": 0.0}, "w_rate": 280.0, "provenance": "published"},
        ],
        "outage": {"damaged_electric_branches": [], "grid_available": False, "root_node": 1},
        "params": {"lambda": 0.001},
    }


def main():
    os.makedirs(OUT, exist_ok=True)
    for doc in (case1(), case2(), toy()):
        path = os.path.join(OUT, f"{doc['name']}.json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        print("wrote", os.path.normpath(path))


if __name__ == "__main__":
    main()
