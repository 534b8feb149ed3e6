#!/usr/bin/env python3
"""Generate frozen nearest-rank percentile reference cases.

Nearest-rank: for percentile p over N ascending samples, take the element at
1-based index ceil(p/100 * N). Writes tests/data/percentile_cases.inc.
"""
import math
import random


def nearest_rank(sorted_vals, p):
    n = len(sorted_vals)
    idx = max(1, math.ceil(p / 100.0 * n))
    return sorted_vals[idx - 1]


def main():
    rng = random.Random(0xE57)
    arrays = [
        [42.0],                          # single sample: every percentile equal
        [1.0, 2.0],
        [float(i) for i in range(1, 101)],  # p50=50, p90=90, p95=95, p99=99
        [float(i) for i in range(1, 115)],  # size 114 (regression for rank edges)
    ]
    for _ in range(30):
        n = rng.randint(1, 400)
        arrays.append(sorted(round(rng.expovariate(1 / 40.0), 6) for _ in range(n)))
    out = ["// generated by tools/oracles/percentile_cases.py -- do not edit",
           "static const double kPercentileValues[] = {"]
    offsets = []
    flat = 0
    for arr in arrays:
        offsets.append((flat, len(arr)))
        for v in arr:
            out.append("    %s," % repr(float(v)))
        flat += len(arr)
    out.append("};")
    out.append("// columns: offset, count, p50, p90, p95, p99")
    out.append("static const struct { int offset, count; double p50, p90, p95, p99; }"
               " kPercentileCases[] = {")
    for (off, cnt), arr in zip(offsets, arrays):
        vals = tuple(nearest_rank(arr, p) for p in (50, 90, 95, 99))
        out.append("    {%d, %d, %s, %s, %s, %s}," % ((off, cnt) + tuple(map(repr, vals))))
    out.append("};")
    with open("tests/data/percentile_cases.inc", "w") as f:
        f.write("\n".join(out) + "\n")
    print("wrote %d arrays" % len(arrays))

if __name__ == "__main__":
    main()
