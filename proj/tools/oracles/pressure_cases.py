#!/usr/bin/env python3
"""Generate frozen pressure-tendency reference cases.

Least-squares slope over (time, pressure) samples, classified with a
+/-0.1 hPa/h dead band. Times are virtual seconds; one virtual hour is 60
seconds under the 24h -> 24min compression, so hPa/hour = slope_per_sec * 60.
Writes tests/data/pressure_cases.inc.
"""
import random

DEAD_BAND = 0.1  # hPa per (virtual) hour
SECONDS_PER_VIRTUAL_HOUR = 60.0


def lsq_slope(samples):
    n = len(samples)
    mx = sum(t for t, _ in samples) / n
    my = sum(p for _, p in samples) / n
    sxx = sum((t - mx) ** 2 for t, _ in samples)
    if sxx == 0.0:
        return 0.0
    sxy = sum((t - mx) * (p - my) for t, p in samples)
    return sxy / sxx


def tendency(samples):
    slope_h = lsq_slope(samples) * SECONDS_PER_VIRTUAL_HOUR
    if slope_h > DEAD_BAND:
        return slope_h, "rising"
    if slope_h < -DEAD_BAND:
        return slope_h, "falling"
    return slope_h, "steady"


def main():
    rng = random.Random(0xBA40)
    cases = []
    # constant series -> steady
    cases.append([(float(i * 10), 1013.25) for i in range(18)])
    # strong linear rise / fall
    cases.append([(float(i * 10), 1000.0 + 0.01 * i) for i in range(18)])
    cases.append([(float(i * 10), 1000.0 - 0.01 * i) for i in range(18)])
    # two-point minimal series
    cases.append([(0.0, 1000.0), (60.0, 1000.5)])
    for _ in range(60):
        n = rng.randint(2, 18)
        t0 = rng.uniform(0, 1200)
        base = rng.uniform(980, 1040)
        drift = rng.uniform(-0.005, 0.005)  # hPa per second
        pts = []
        t = t0
        for _ in range(n):
            t += rng.uniform(5, 15)
            pts.append((t, base + drift * (t - t0) + rng.gauss(0, 0.02)))
        cases.append(pts)
    out = ["// generated by tools/oracles/pressure_cases.py -- do not edit",
           "// flattened sample arrays with per-case offsets; slope is hPa per virtual hour",
           "static const double kPressureSamples[][2] = {"]
    offsets = []
    flat = 0
    for pts in cases:
        offsets.append((flat, len(pts)))
        for t, p in pts:
            out.append("    {%s, %s}," % (repr(t), repr(p)))
        flat += len(pts)
    out.append("};")
    out.append("static const struct { int offset, count; double slope_per_hour; "
               "const char* tendency; } kPressureCases[] = {")
    for (off, cnt), pts in zip(offsets, cases):
        slope_h, label = tendency(pts)
        out.append('    {%d, %d, %s, "%s"},' % (off, cnt, repr(slope_h), label))
    out.append("};")
    with open("tests/data/pressure_cases.inc", "w") as f:
        f.write("\n".join(out) + "\n")
    print("wrote %d cases" % len(cases))

if __name__ == "__main__":
    main()
