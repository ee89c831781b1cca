#!/usr/bin/env python3
"""Independent evaluation of the single-class Rothermel chain.

Generates tests/data/rothermel_golden.json. Written cell-by-cell like a
spreadsheet: every intermediate is a named column, computed with Python's
math module (not libm), so the Rust kernel is checked against a separate
arithmetic path.

Fuel rows are transcribed from the Anderson (1982) 13-model table
(1-h dead load in tons/acre, 1-h SAV in 1/ft, depth in ft, Mx in percent);
heat content 8000 BTU/lb and particle density 32 lb/ft^3 are the table's
constants for every model.
"""
import json
import math
import os

TONS_PER_ACRE_TO_LB_PER_FT2 = 2000.0 / 43560.0

# id: (name, 1-h load t/ac, sav 1/ft, depth ft, mx %)
ANDERSON = {
    1: ("short grass", 0.74, 3500.0, 1.0, 12.0),
    3: ("tall grass", 3.01, 1500.0, 2.5, 25.0),
    8: ("closed timber litter", 1.50, 2000.0, 0.2, 30.0),
}
HEAT = 8000.0
RHO_P = 32.0
SE = 0.010
ST = 0.0555


def row(fuel_id, moisture, wind_ft_min):
    _, load_tpa, sigma, depth, mx_pct = ANDERSON[fuel_id]
    w0 = load_tpa * TONS_PER_ACRE_TO_LB_PER_FT2
    mx = mx_pct / 100.0

    rho_b = w0 / depth
    beta = rho_b / RHO_P
    beta_op = 3.348 * sigma ** -0.8189
    ratio = beta / beta_op
    gamma_max = sigma ** 1.5 / (495.0 + 0.0594 * sigma ** 1.5)
    a_exp = 133.0 * sigma ** -0.7913
    gamma = gamma_max * ratio ** a_exp * math.exp(a_exp * (1.0 - ratio))
    wn = w0 * (1.0 - ST)
    rm = min(1.0, moisture / mx)
    eta_m = 1.0 - 2.59 * rm + 5.11 * rm ** 2 - 3.52 * rm ** 3
    eta_m = max(0.0, eta_m)
    eta_s = 0.174 * SE ** -0.19
    i_r = gamma * wn * HEAT * eta_m * eta_s
    xi = math.exp((0.792 + 0.681 * math.sqrt(sigma)) * (beta + 0.1)) / (192.0 + 0.2595 * sigma)
    eps = math.exp(-138.0 / sigma)
    q_ig = 250.0 + 1116.0 * moisture
    r_base = i_r * xi / (rho_b * eps * q_ig)

    c = 7.47 * math.exp(-0.133 * sigma ** 0.55)
    b = 0.02526 * sigma ** 0.54
    e = 0.715 * math.exp(-3.59e-4 * sigma)
    phi_w = c * wind_ft_min ** b * ratio ** (-e) if wind_ft_min > 0 else 0.0
    r_eff = max(0.0, r_base * (1.0 + phi_w + 0.0))
    return {
        "fuel_id": fuel_id,
        "moisture": moisture,
        "wind_ft_min": wind_ft_min,
        "i_r": i_r,
        "xi": xi,
        "rho_b": rho_b,
        "epsilon": eps,
        "q_ig": q_ig,
        "r_base": r_base,
        "phi_w": phi_w,
        "r_eff": r_eff,
    }


def main():
    cases = [
        row(f, m, u)
        for f in (1, 3, 8)
        for m in (0.02, 0.05, 0.10)
        for u in (0.0, 352.0, 704.0)
    ]
    out = os.path.join(os.path.dirname(__file__), "..", "data", "rothermel_golden.json")
    with open(out, "w") as fh:
        json.dump({"spread_dir": 0.0, "wind_dir": 0.0, "slope_tan": 0.0, "cases": cases}, fh, indent=1)
        fh.write("\n")
    print(f"wrote {len(cases)} cases")


if __name__ == "__main__":
    main()
