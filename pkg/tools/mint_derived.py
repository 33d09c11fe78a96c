"""Compute the frozen reference values used by the test-suite.

Every number printed here comes from an oracle that does not share code
paths with the solver it checks: direct formula evaluation written inline,
brute-force grids, or the linear-program tau scan.  Run with
``python tools/mint_derived.py`` and paste the output into
``tests/derived_values.py`` when an oracle changes.
"""

from __future__ import annotations

import math

import numpy as np

from cwpcn.model import NetworkInstance
from cwpcn.oracle import grid_maximize, tau_scan_lp
from cwpcn.sim import preset, sample_instance


def log2(x):
    return math.log(x, 2)


def case_instance(case, p_primary=0.1):
    return sample_instance(preset(case, p_primary=p_primary))


def harvested_case1_cu4m():
    # path loss from the H-AP (100 m) to the CU at 96 m, and from the PT (0 m)
    h = 0.01 * 4.0 ** -3
    g = 0.01 * 96.0 ** -3
    return 0.8 * (h * 1.0 + g * 0.1)


def primary_underlay_case1_mid():
    inst = case_instance("case1")
    p_c = min(1e-9 / inst.h_ap_pr, inst.p_max)
    tau = 0.5
    q = 0.8 * (inst.h_ap_cu * p_c + inst.g_pt_cu * inst.p_primary)
    e = 0.5 * tau * q
    s = inst.g_pt_pr * inst.p_primary
    wet = tau * log2(1 + s / (inst.noise_pr + inst.h_ap_pr * p_c))
    interf = sum(hi * ei for hi, ei in zip(inst.h_cu_pr, e)) / (1 - tau)
    wit = (1 - tau) * log2(1 + s / (inst.noise_pr + interf))
    return wet + wit


K2 = dict(h_ap_pr=0.5, h_ap_cu=[2.0, 1.0], h_cu_pr=[0.3, 0.2], g_pt_pr=4.0,
          g_pt_cu=[0.1, 0.2], g_pt_ap=0.25, p_primary=1.0, p_max=2.0, noise_ap=1.0,
          noise_pr=1.0, eta=[0.8, 0.6])


def primary_overlay_k2():
    d = K2
    tau, e = 0.3, [0.1, 0.05]
    gp = d["g_pt_pr"] * d["p_primary"]
    hp = d["h_ap_pr"] * d["p_max"]
    r1 = log2(1 + (gp + hp + 2 * math.sqrt(gp * hp)) / d["noise_pr"])
    interf = (d["h_cu_pr"][0] * e[0] + d["h_cu_pr"][1] * e[1]) / (1 - tau)
    return tau * r1 + (1 - tau) * log2(1 + gp / (d["noise_pr"] + interf))


def single_fraction_k3_grid(n=200):
    # slopes 3, 2, 1; unit interference gains; q = 1; cap 1; tau 0.4
    tau, cap = 0.4, 1.0
    axis = np.linspace(0.0, tau, n)
    e1, e2, e3 = np.meshgrid(axis, axis, axis, indexing="ij", sparse=True)
    obj = 3 * e1 + 2 * e2 + 1 * e3
    feas = e1 + e2 + e3 <= (1 - tau) * cap + 1e-15
    obj = np.where(feas, obj, -np.inf)
    i = np.unravel_index(np.argmax(obj), obj.shape)
    return [float(axis[j]) for j in i]


def case1_p1(gammas=(1e-10, 1e-9, 1e-8)):
    inst = case_instance("case1")
    gamma = inst.h_ap_cu / (inst.noise_ap + inst.g_pt_ap * inst.p_primary)
    out = {}
    for cap in gammas:
        p_c = min(cap / inst.h_ap_pr, inst.p_max)
        q = inst.eta * (inst.h_ap_cu * p_c + inst.g_pt_cu * inst.p_primary)
        res = tau_scan_lp(gamma, q, inst.h_cu_pr, cap)
        out[cap] = (res.allocation.tau, res.rate)
    return out


def case1_p2a(gamma0s=(1e-13, 3.5e-13, 1e-11), r_bar=5.0):
    inst = case_instance("case1")
    gamma_hat = inst.h_ap_cu / inst.noise_ap
    q = inst.eta * (inst.h_ap_cu * inst.p_max + inst.g_pt_cu * inst.p_primary)
    gp = inst.g_pt_pr * inst.p_primary
    hp = inst.h_ap_pr * inst.p_max
    r1 = log2(1 + (gp + hp + 2 * math.sqrt(gp * hp)) / inst.noise_pr)
    out = {}
    for g0 in gamma0s:
        r2 = log2(1 + gp / (inst.noise_pr + g0))
        floor = min(max((r_bar - r2) / (r1 - r2), 0.0), 1.0)
        res = tau_scan_lp(gamma_hat, q, inst.h_cu_pr, g0, tau_min=floor, resolution=801)
        out[g0] = res.rate
    return out


def case1_region_points(n=20):
    inst = case_instance("case1")
    grid = np.geomspace(inst.noise_pr * 1e-3, inst.noise_pr * 1e6, n)
    picks = [grid[5], grid[9], grid[13]]
    gamma = inst.h_ap_cu / (inst.noise_ap + inst.g_pt_ap * inst.p_primary)
    out = {}
    for cap in picks:
        p_c = min(cap / inst.h_ap_pr, inst.p_max)
        q = inst.eta * (inst.h_ap_cu * p_c + inst.g_pt_cu * inst.p_primary)
        res = tau_scan_lp(gamma, q, inst.h_cu_pr, cap)
        tau, e = res.allocation.tau, res.allocation.e
        s = inst.g_pt_pr * inst.p_primary
        prim = tau * log2(1 + s / (inst.noise_pr + inst.h_ap_pr * p_c))
        prim += (1 - tau) * log2(1 + s / (inst.noise_pr + float(inst.h_cu_pr @ e) / (1 - tau)))
        out[float(cap)] = (prim, res.rate)
    return out


def random_k2_p1():
    inst = NetworkInstance(**K2)
    res = grid_maximize(inst, "P1", 0.05, resolution=300)
    return res.rate


if __name__ == "__main__":
    print("HARVEST_CASE1_CU4M =", repr(harvested_case1_cu4m()))
    print("PRIMARY_UNDERLAY_CASE1_MID =", repr(primary_underlay_case1_mid()))
    print("PRIMARY_OVERLAY_K2 =", repr(primary_overlay_k2()))
    print("SINGLE_FRACTION_K3_GRID =", repr(single_fraction_k3_grid()))
    print("CASE1_P1 =", repr(case1_p1()))
    print("CASE1_P2A =", repr(case1_p2a()))
    print("CASE1_REGION =", repr(case1_region_points()))
    print("K2_P1_CAP005 =", repr(random_k2_p1()))
