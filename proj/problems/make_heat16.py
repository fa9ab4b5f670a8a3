#!/usr/bin/env python3
"""Writes heat16_forcing.csv: o_t = exp(-k^2 t) b_k, k = 1..16, on [0, 0.5].

b_k are the sine coefficients of u0(s) = s (pi - s) on [0, pi]:
b_k = 8 / (pi k^3) for odd k, 0 for even k.
"""
import math

T, N, MODES = 0.5, 10001, 16
b = [8.0 / (math.pi * k**3) if k % 2 else 0.0 for k in range(1, MODES + 1)]
with open("heat16_forcing.csv", "w") as out:
    out.write("t," + ",".join(f"x_{k}" for k in range(1, MODES + 1)) + "\n")
    for i in range(N):
        t = T * i / (N - 1)
        row = [repr(t)] + [repr(math.exp(-k * k * t) * b[k - 1]) for k in range(1, MODES + 1)]
        out.write(",".join(row) + "\n")
