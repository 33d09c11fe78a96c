"""Reference values minted by ``tools/mint_derived.py``.

Each value comes from an oracle independent of the code under test: inline
formula evaluation, a brute-force grid, or the linear-program tau scan.
"""

# 0.8 * (0.01 * 4**-3 * 1 W + 0.01 * 96**-3 * 0.1 W)
HARVEST_CASE1_CU4M = 0.00012500090422453705

# case 1, P_p = 0.1 W, cap -60 dBm, tau = 0.5, every CU at half its harvested energy
PRIMARY_UNDERLAY_CASE1_MID = 3.4873930633067305

# the two-CU instance K2 below, tau = 0.3, e = [0.1, 0.05]
PRIMARY_OVERLAY_K2 = 2.577284957584042
K2 = dict(h_ap_pr=0.5, h_ap_cu=[2.0, 1.0], h_cu_pr=[0.3, 0.2], g_pt_pr=4.0,
          g_pt_cu=[0.1, 0.2], g_pt_ap=0.25, p_primary=1.0, p_max=2.0, noise_ap=1.0,
          noise_pr=1.0, eta=[0.8, 0.6])

# 200**3 grid over the energies; slopes 3, 2, 1, unit gains, cap 1, tau 0.4
SINGLE_FRACTION_K3_GRID = [0.4, 0.19899497487437187, 0.0]
SINGLE_FRACTION_K3_GRID_STEP = 0.4 / 199

# case 1 underlay optimum (tau, throughput) by the LP tau scan
CASE1_P1 = {
    1e-10: (0.7438231552000001, 0.23072301744780344),
    1e-09: (0.5257894080000001, 0.9991053452214294),
    1e-08: (0.33709454720000004, 2.661624739765049),
}

# case 1 overlay subproblem rate at fixed interference level, rate target 5
CASE1_P2A = {
    1e-13: 9.936566664034734,
    3.5e-13: 10.55273613669904,
    1e-11: 10.536924480729436,
}

# case 1 underlay frontier, 20-point cap grid, points 5, 9 and 13:
# cap -> (primary rate, secondary throughput)
CASE1_REGION = {
    2.335721469090121e-13: (6.683407892138144, 0.0013470153769554695),
    1.8329807108324375e-11: (3.4487983103796576, 0.058753987220004474),
    1.4384498882876659e-09: (3.3846338168220926, 1.2020285679882963),
}

# K2 instance, underlay cap 0.05, exhaustive grid at 300 points per axis
K2_P1_CAP005 = 0.21565947501974572
