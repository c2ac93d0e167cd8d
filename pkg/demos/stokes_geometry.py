"""Stokes lines, higher-order lines and component bookkeeping around loops.

Run: python3 demos/stokes_geometry.py
"""
import math

from hosplab.singulants import model_case, pearcey_case
from hosplab.stokesgeo import ComponentSet, build_atlas, circle_path, propagate_components

for case in (model_case(), pearcey_case()):
    atlas = build_atlas(case)
    counts = {}
    for c in atlas["curves"]:
        counts[c.label] = counts.get(c.label, 0) + len(c.points)
    print(f"{case.case_id}: " + ", ".join(f"{k} ({v} pts)" for k, v in sorted(counts.items())))

mc = model_case()
print("\ncounter-clockwise loop around z = 1 starting with only the base series present:")
for c in propagate_components(circle_path(1.0, 0.5, -math.pi / 2), ComponentSet.of("B"), mc):
    print(f"  crosses {c.label} at {c.z:.3f} -> {c.components!r}")

pc = pearcey_case()
xc = pc.constants["crossing_point"]
print(f"\nPearcey loop around the crossing point {xc:.4f}:")
path = circle_path(xc, 0.3, math.pi / 2, clockwise=True)
for c in propagate_components(path, ComponentSet.of("3"), pc):
    print(f"  crosses {c.label} at {c.z:.3f} -> {c.components!r}")
