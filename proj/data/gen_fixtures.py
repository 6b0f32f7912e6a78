#!/usr/bin/env python3
"""Regenerates the bundled data fixtures.

case33.txt is the Baran-Wu 33-bus feeder (12.66 kV) converted to per-unit on a
10 MVA base, with nominal loads scaled to a desk-friendly operating point.
profiles24.csv and fleet33.txt describe a 24-hour weekday with a three-tier
time-of-use tariff and an aggregated commuter EV fleet. Edit the parameters
below and rerun; the outputs are deterministic.
"""

import os

HERE = os.path.dirname(os.path.abspath(__file__))

S_BASE_MVA = 10.0
V_BASE_KV = 12.66
Z_BASE = V_BASE_KV**2 / S_BASE_MVA  # ohm

# Fraction of the nominal Baran-Wu load used as the hourly-shape baseline.
DEMAND_SCALE = 0.65

# from, to, R (ohm), X (ohm)
BRANCHES = [
    (1, 2, 0.0922, 0.0470),
    (2, 3, 0.4930, 0.2511),
    (3, 4, 0.3660, 0.1864),
    (4, 5, 0.3811, 0.1941),
    (5, 6, 0.8190, 0.7070),
    (6, 7, 0.1872, 0.6188),
    (7, 8, 0.7114, 0.2351),
    (8, 9, 1.0300, 0.7400),
    (9, 10, 1.0440, 0.7400),
    (10, 11, 0.1966, 0.0650),
    (11, 12, 0.3744, 0.1238),
    (12, 13, 1.4680, 1.1550),
    (13, 14, 0.5416, 0.7129),
    (14, 15, 0.5910, 0.5260),
    (15, 16, 0.7463, 0.5450),
    (16, 17, 1.2890, 1.7210),
    (17, 18, 0.7320, 0.5740),
    (2, 19, 0.1640, 0.1565),
    (19, 20, 1.5042, 1.3554),
    (20, 21, 0.4095, 0.4784),
    (21, 22, 0.7089, 0.9373),
    (3, 23, 0.4512, 0.3083),
    (23, 24, 0.8980, 0.7091),
    (24, 25, 0.8960, 0.7011),
    (6, 26, 0.2030, 0.1034),
    (26, 27, 0.2842, 0.1447),
    (27, 28, 1.0590, 0.9337),
    (28, 29, 0.8042, 0.7006),
    (29, 30, 0.5075, 0.2585),
    (30, 31, 0.9744, 0.9630),
    (31, 32, 0.3105, 0.3619),
    (32, 33, 0.3410, 0.5302),
]

# bus, P (kW), Q (kvar) at nominal loading
LOADS = [
    (2, 100, 60), (3, 90, 40), (4, 120, 80), (5, 60, 30), (6, 60, 20),
    (7, 200, 100), (8, 200, 100), (9, 60, 20), (10, 60, 20), (11, 45, 30),
    (12, 60, 35), (13, 60, 35), (14, 120, 80), (15, 60, 10), (16, 60, 20),
    (17, 60, 20), (18, 90, 40), (19, 90, 40), (20, 90, 40), (21, 90, 40),
    (22, 90, 40), (23, 90, 50), (24, 420, 200), (25, 420, 200), (26, 60, 25),
    (27, 60, 25), (28, 60, 20), (29, 120, 70), (30, 200, 600), (31, 150, 70),
    (32, 210, 100), (33, 60, 40),
]

SOLAR_BUSES = [6, 15, 24, 31]

# Apparent-power ratings: generous on the trunk, tighter on laterals.
TRUNK = {(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)}

# 24-hour weekday profiles. Price tiers: night valley, daytime shoulder,
# evening peak ($ per p.u.-hour on the 10 MVA base, i.e. $/MWh x 10).
TOU = [650] * 5 + [1300] * 12 + [2500] * 5 + [1300] * 2
DEMAND = [0.62, 0.60, 0.58, 0.58, 0.60, 0.66, 0.72, 0.78, 0.82, 0.85, 0.86,
          0.87, 0.86, 0.85, 0.84, 0.85, 0.90, 0.96, 1.00, 0.96, 0.95, 0.88,
          0.78, 0.68]
SOLAR = [0.0] * 7 + [0.15, 0.35, 0.55, 0.75, 0.90, 1.00, 0.97, 0.88, 0.70,
                     0.48, 0.25, 0.08] + [0.0] * 5
R_CHARGE = [0.92, 0.92, 0.92, 0.92, 0.92, 0.85, 0.70, 0.50, 0.45, 0.30, 0.30,
            0.30, 0.30, 0.35, 0.35, 0.35, 0.40, 0.50, 0.60, 0.72, 0.82, 0.88,
            0.92, 0.92]
R_DISCHARGE = [0.02, 0.02, 0.02, 0.02, 0.02, 0.06, 0.15, 0.30, 0.28, 0.15,
               0.10, 0.10, 0.10, 0.10, 0.12, 0.18, 0.30, 0.32, 0.25, 0.15,
               0.08, 0.05, 0.03, 0.02]
P_TRAVEL = 8.5e-4  # per-vehicle draw while driving, p.u. (8.5 kW)

# Charger menu (per vehicle, p.u.) and battery window (per vehicle, p.u.-h).
LEVELS = [("fast", 5.0e-3, 1.0), ("level2", 3.6e-4, 1.0), ("level1", 1.2e-4, 1.0)]
EVS_PER_POINT = 30
E_MIN, E_MAX = 1.2e-3, 5.4e-3
ETA_C = ETA_D = 0.9


def fmt(v):
    return f"{v:.10g}"


def write_case():
    lines = ["case v1", "name case33", f"s_base_mva {fmt(S_BASE_MVA)}",
             f"v_base_kv {fmt(V_BASE_KV)}", "horizon 24", "", "[buses]"]
    lines.append("1 0.9 1.05 1")
    for b in range(2, 34):
        lines.append(f"{b} 0.9 1.05 0")
    lines.append("")
    lines.append("[branches]")
    for f, t, r, x in BRANCHES:
        s_max = 1.0 if (f, t) in TRUNK else 0.5
        lines.append(f"{f} {t} {fmt(r / Z_BASE)} {fmt(x / Z_BASE)} {fmt(s_max)}")
    lines.append("")
    lines.append("[loads]")
    for bus, p_kw, q_kvar in LOADS:
        p = p_kw * DEMAND_SCALE / (S_BASE_MVA * 1000.0)
        q = q_kvar * DEMAND_SCALE / (S_BASE_MVA * 1000.0)
        lines.append(f"{bus} {fmt(p)} {fmt(q)}")
    lines.append("")
    lines.append("[solar]")
    for bus in SOLAR_BUSES:
        lines.append(f"{bus} 0")  # sized by the scenario's penetration target
    with open(os.path.join(HERE, "case33.txt"), "w") as f:
        f.write("\n".join(lines) + "\n")


def write_profiles():
    rows = ["hour,tou_price,demand_shape,solar_shape,r_charge,r_discharge,p_travel"]
    for t in range(24):
        assert R_CHARGE[t] + R_DISCHARGE[t] <= 1.0
        rows.append(f"{t},{fmt(TOU[t])},{fmt(DEMAND[t])},{fmt(SOLAR[t])},"
                    f"{fmt(R_CHARGE[t])},{fmt(R_DISCHARGE[t])},{fmt(P_TRAVEL)}")
    with open(os.path.join(HERE, "profiles24.csv"), "w") as f:
        f.write("\n".join(rows) + "\n")


def write_fleet():
    lines = ["fleet v1", f"evs_per_point {EVS_PER_POINT}", f"e_min {fmt(E_MIN)}",
             f"e_max {fmt(E_MAX)}", f"eta_c {fmt(ETA_C)}", f"eta_d {fmt(ETA_D)}",
             "", "[levels]"]
    for name, p_max, weight in LEVELS:
        lines.append(f"{name} {fmt(p_max)} {fmt(weight)}")
    with open(os.path.join(HERE, "fleet33.txt"), "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    write_case()
    write_profiles()
    write_fleet()
    print("wrote case33.txt, profiles24.csv, fleet33.txt")
