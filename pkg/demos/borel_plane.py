"""Which Borel-plane singularities are visible from a given z.

Outside the circle |z - 1/2| = 1/2 the Pade denominator has an isolated root
at chi2 = z - 1/2; inside it only the branch-point cluster at chi1 = z^2/2
remains.

Run: python3 demos/borel_plane.py
"""
import numpy as np

from hosplab.borel import classify_poles, model_borel_series, pade_build, pade_poles, pole_visible

# N = 250 is too ill-conditioned away from z = 1/2 + i and z = 1/2
for z, N in ((0.5 + 1j, 250), (1.5 + 0.2j, 60), (0.5 + 0.2j, 60), (0.5, 250)):
    series, scale = model_borel_series(z, 2 * N)
    poles = [p for p, _ in pade_poles(pade_build(series, N, scale=scale))]
    labels = classify_poles(poles)
    chi1, chi2 = z * z / 2, z - 0.5
    iso = [p for p, lab in zip(poles, labels) if lab == "isolated"]
    d2 = min(abs(p - chi2) for p in iso) if iso else np.inf
    d1 = min(abs(p - chi1) for p, lab in zip(poles, labels) if lab == "cluster")
    print(f"z = {complex(z):.3g}, N = {N}: chi2 visible {pole_visible(z)!s:5}  "
          f"nearest isolated root to chi2 {d2:.1e}, nearest cluster root to chi1 {d1:.1e}")
