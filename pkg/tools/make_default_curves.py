"""Regenerate the bundled synthetic characterization table.

The knots are shaped by hand from simple closed forms (alpha-power delay,
exponential leakage, near-quadratic switching power) and are NOT measured
data.  Run from the repository root:

    python tools/make_default_curves.py > src/dualdvfs/data/default_curves.csv
"""

import math
import sys

V_CORE_NOM = 0.80
V_BRAM_NOM = 0.95
KNOTS = [round(0.50 + 0.025 * k, 3) for k in range(21)]

DYN_EXPONENT = 2.2


def alpha_power_delay(v, v_nom, v_th, a):
    shape = lambda x: x / (x - v_th) ** a
    return shape(v) / shape(v_nom)


def leakage(v, v_nom, k):
    return (v / v_nom) * math.exp(k * (v - v_nom))


def memory_delay(v):
    # nearly flat from nominal down to 0.80 V, then a sharp knee
    return 1.0 + 0.5 * (V_BRAM_NOM - v) + 22.0 * max(0.80 - v, 0.0) ** 1.6


CURVES = {
    ("logic", "delay"): lambda v: alpha_power_delay(v, V_CORE_NOM, 0.35, 1.2),
    ("routing", "delay"): lambda v: alpha_power_delay(v, V_CORE_NOM, 0.25, 1.1),
    ("dsp", "delay"): lambda v: alpha_power_delay(v, V_CORE_NOM, 0.33, 1.3),
    ("memory", "delay"): memory_delay,
    ("logic", "pdyn"): lambda v: (v / V_CORE_NOM) ** DYN_EXPONENT,
    ("routing", "pdyn"): lambda v: (v / V_CORE_NOM) ** DYN_EXPONENT,
    ("dsp", "pdyn"): lambda v: (v / V_CORE_NOM) ** DYN_EXPONENT,
    ("memory", "pdyn"): lambda v: (v / V_BRAM_NOM) ** DYN_EXPONENT,
    ("logic", "pstat"): lambda v: leakage(v, V_CORE_NOM, 2.0),
    ("routing", "pstat"): lambda v: leakage(v, V_CORE_NOM, 2.0),
    ("dsp", "pstat"): lambda v: leakage(v, V_CORE_NOM, 2.5),
    # -76% from 0.95 V to 0.80 V
    ("memory", "pstat"): lambda v: leakage(v, V_BRAM_NOM, 8.37),
}


def main(out=sys.stdout):
    out.write("class,kind,voltage_v,factor\n")
    for (cls, kind), fn in CURVES.items():
        for v in KNOTS:
            out.write(f"{cls},{kind},{v:.3f},{round(fn(v), 6)!r}\n")


if __name__ == "__main__":
    main()
