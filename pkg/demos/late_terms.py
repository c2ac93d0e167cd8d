"""Late-term fits and the smoothing of the remainder across the higher-order line.

Run: python3 demos/late_terms.py
"""
import math
from fractions import Fraction

from hosplab.latefit import evaluate_table, fit_factorial_power, model_radial_arc, smoothing_scan
from hosplab.recurrences import model_amplitude_Bp, model_base_coefficients
from hosplab.singulants import model_case

base, amp = model_base_coefficients(200), model_amplitude_Bp(200)

f = fit_factorial_power(evaluate_table(base, Fraction(2, 5)))
print(f"base series at z = 0.4: chi = {f.chi_hat:.10f} (z^2/2 = 0.08), alpha = {f.alpha_hat:.6f}")
print(f"  Lambda0 = {f.prefactor_hat * 0.6:.6f}  (1/sqrt(2 pi) = {1 / math.sqrt(2 * math.pi):.6f})")

g = fit_factorial_power(evaluate_table(amp, Fraction(1, 2)))
print(f"amplitudes at z = 1/2: chi_tilde = {g.chi_hat:.6f}, beta = {g.alpha_hat:.6f}")

prof = smoothing_scan(model_radial_arc(num=25), 60, model_case(), (base, amp))
print("\n    T     measured   erf model")
for p in prof.points:
    print(f"{p.T:6.2f}   {p.normalized:8.4f}   {p.cdf:8.4f}")
print(f"max deviation for |T| <= 3: {prof.max_deviation(3.0):.4f}")
