#!/usr/bin/env python3
"""Generate frozen AQI classification reference cases.

Independent implementation of breakpoint interpolation: concentrations are
truncated to the pollutant's table precision, interpolated linearly within the
matching row, rounded half-away-from-zero; the overall index is the max of the
sub-indices. Writes tests/data/aqi_cases.inc.
"""
import math
import random

# (lo, hi, ilo, ihi) rows; must mirror the default tables shipped in the engine.
CO_PPM = [  # 0.1 ppm resolution
    (0.0, 4.4, 0, 50),
    (4.5, 9.4, 51, 100),
    (9.5, 12.4, 101, 150),
    (12.5, 15.4, 151, 200),
    (15.5, 30.4, 201, 300),
    (30.5, 40.4, 301, 400),
    (40.5, 50.4, 401, 500),
]
SO2_PPB = [  # 1 ppb resolution
    (0, 35, 0, 50),
    (36, 75, 51, 100),
    (76, 185, 101, 150),
    (186, 304, 151, 200),
    (305, 604, 201, 300),
    (605, 804, 301, 400),
    (805, 1004, 401, 500),
]
CO2_PPM = [  # synthetic bands, 1 ppm resolution
    (0, 600, 0, 50),
    (601, 1000, 51, 100),
    (1001, 1500, 101, 150),
    (1501, 2500, 151, 200),
    (2501, 5000, 201, 300),
    (5001, 40000, 301, 500),
]
DECIMALS = {"co": 1, "so2": 0, "co2": 0}
TABLES = {"co": CO_PPM, "so2": SO2_PPB, "co2": CO2_PPM}

CATEGORIES = [
    (0, 50, "good"),
    (51, 100, "moderate"),
    (101, 150, "unhealthy-sensitive"),
    (151, 200, "unhealthy"),
    (201, 300, "very-unhealthy"),
    (301, 500, "hazardous"),
]


def truncate(c, decimals):
    scale = 10 ** decimals
    return math.floor(c * scale) / scale


def sub_index(pollutant, c):
    """Returns (index, clamped_flag)."""
    c = truncate(c, DECIMALS[pollutant])
    table = TABLES[pollutant]
    if c > table[-1][1]:
        return 500, True
    for lo, hi, ilo, ihi in table:
        if lo <= c <= hi:
            x = (ihi - ilo) / (hi - lo) * (c - lo) + ilo
            return int(math.floor(x + 0.5)), False
    raise AssertionError("gap in table for %s at %r" % (pollutant, c))


def category(index):
    for lo, hi, name in CATEGORIES:
        if lo <= index <= hi:
            return name
    return "hazardous"


def main():
    rng = random.Random(0x51C0FF)
    cases = []
    # band floors/ceilings per pollutant (exact endpoint behaviour)
    for p, table in TABLES.items():
        for lo, hi, ilo, ihi in table:
            cases.append({p: lo})
            cases.append({p: hi})
    # above-top clamp
    cases.append({"co": 99.0})
    cases.append({"so2": 2000.0})
    cases.append({"co2": 90000.0})
    # random multi-pollutant readings
    while len(cases) < 240:
        cases.append({
            "co2": rng.uniform(0, 6000),
            "co": rng.uniform(0, 45),
            "so2": rng.uniform(0, 900),
        })
    out = ["// generated by tools/oracles/aqi_cases.py -- do not edit",
           "// columns: co2 ppm, co ppm, so2 ppb, expected index, category, clamped",
           "static const struct { double co2, co, so2; int index; "
           "const char* category; bool clamped; } kAqiCases[] = {"]
    for case in cases:
        co2 = case.get("co2", 0.0)
        co = case.get("co", 0.0)
        so2 = case.get("so2", 0.0)
        results = [sub_index("co2", co2), sub_index("co", co), sub_index("so2", so2)]
        overall = max(r[0] for r in results)
        clamped = any(r[1] for r in results)
        out.append('    {%s, %s, %s, %d, "%s", %s},' % (
            repr(float(co2)), repr(float(co)), repr(float(so2)),
            overall, category(overall), "true" if clamped else "false"))
    out.append("};")
    with open("tests/data/aqi_cases.inc", "w") as f:
        f.write("\n".join(out) + "\n")
    print("wrote %d cases" % len(cases))

if __name__ == "__main__":
    main()
