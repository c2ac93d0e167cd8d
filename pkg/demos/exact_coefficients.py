"""Exact base-series coefficients of the model problem and their inner limits.

Run: python3 demos/exact_coefficients.py
"""
import time

from hosplab.coeffkernel import leading_laurent_coefficient
from hosplab.recurrences import INNER_Z0, INNER_Z1, model_amplitude_Bp, model_base_coefficients

t0 = time.perf_counter()
table = model_base_coefficients(200)
print(f"y_0 .. y_200 in {time.perf_counter() - t0:.2f} s (exact rationals)")
for n in range(4):
    print(f"  y_{n}(z) = {table[n]}")

# near z = 0 the most singular term of y_n matches the inner series
print("\nleading coefficient at z^-(2n+1) vs inner series:")
for n in range(6):
    print(f"  n={n}: {leading_laurent_coefficient(table[n], 0, 2 * n + 1)}  {INNER_Z0.coefficient(n)}")

amp = model_amplitude_Bp(10)
print("\nlate-late amplitudes B_p (normalized by the leading prefactor):")
for p in range(4):
    c = -leading_laurent_coefficient(amp[p], 1, 2 * p + 1)
    print(f"  B_{p}(z) = {amp[p]}   inner: {c} vs {INNER_Z1.coefficient(p)}")
