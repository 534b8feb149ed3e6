#!/usr/bin/env python3
"""Generate frozen desired-replica reference cases for the autoscaler.

desired = clamp(ceil(avg_concurrency / target), min, max); an idle service
(zero average, nothing buffered) sits at min. Writes tests/data/scaler_cases.inc.
"""
import math
import random


def desired(avg, target, lo, hi, buffered):
    if avg <= 0.0 and buffered == 0:
        return max(lo, 0)
    raw = math.ceil(avg / target)
    if buffered > 0 and raw < 1:
        raw = 1
    return max(lo, min(hi, raw))


def main():
    rng = random.Random(0x5CA1E)
    cases = [
        (23.0, 5, 0, 18, 0),     # mid-range
        (0.0, 5, 0, 18, 0),      # idle, scale-to-zero
        (200.0, 5, 0, 18, 0),    # cap
        (0.0, 5, 1, 25, 0),      # store floor
        (0.0, 5, 0, 18, 7),      # buffered work keeps one replica coming
        (0.4, 5, 0, 18, 0),      # tiny positive average still rounds up to 1
        (5.0, 5, 0, 18, 0),      # exact multiple
        (5.0001, 5, 0, 18, 0),   # just over the multiple
    ]
    while len(cases) < 120:
        cases.append((
            round(rng.uniform(0, 400), 4),
            rng.choice([1, 2, 5, 10, 40]),
            rng.choice([0, 0, 0, 1, 3]),
            rng.choice([1, 5, 14, 18, 25, 160]),
            rng.choice([0, 0, 0, 1, 50]),
        ))
    out = ["// generated by tools/oracles/scaler_cases.py -- do not edit",
           "// columns: avg concurrency, target, min, max, buffered, expected desired",
           "static const struct { double avg; int target, lo, hi, buffered, want; }"
           " kScalerCases[] = {"]
    for avg, target, lo, hi, buffered in cases:
        lo2, hi2 = (lo, hi) if lo <= hi else (hi, lo)
        out.append("    {%s, %d, %d, %d, %d, %d}," % (
            repr(float(avg)), target, lo2, hi2, buffered,
            desired(avg, target, lo2, hi2, buffered)))
    out.append("};")
    with open("tests/data/scaler_cases.inc", "w") as f:
        f.write("\n".join(out) + "\n")
    print("wrote %d cases" % len(cases))

if __name__ == "__main__":
    main()
