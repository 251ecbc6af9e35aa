"""Hairs: curves in the Julia set tending to infinity, one per admissible address.

Run: python3 demos/02_hairs.py
"""
import numpy as np

from zorich.hairs import conjugacy_residual, endpoint, itinerary_of, trace_hair
from zorich.mapcore import default_config
from zorich.symbolic import Itinerary

cfg = default_config()
cases = [
    ("constant zero", Itinerary.constant((0, 0)), (1.0, 4.0)),
    ("period two", Itinerary.periodic([(0, 0), (2, 0)]), (1.0, 4.0)),
    ("fast growing", Itinerary.generator("power", base=3.0), (1.0, 4.0)),
]
for name, s, rng in cases:
    tr = trace_hair(s, rng, 50, 1e-9, cfg)
    print(f"{name:14s}: depth <= {tr.depth_used.max():2d}, error <= {tr.error_bound.max():.1e}, "
          f"contraction per level {tr.rate:.3f} (alpha = {cfg.alpha}), injective {tr.injective()}")

s = cases[1][1]
res, bound, k = conjugacy_residual(s, 1.0, 5, cfg)
print(f"\nf^{k}(g_s(1)) vs g_(shifted s)(E^{k}(1)): residual {res:.2e} <= bound {bound:.2e}")
x = trace_hair(s, (1.0, 1.0), 1, 1e-9, cfg).points[0]
print("address read back from the orbit:", itinerary_of(x, 3, cfg).prefix[:4])
p, b = endpoint(Itinerary.constant((0, 0)), cfg)
print(f"endpoint of the zero hair: {p.round(8)} (+- {b:.1e}), a repelling fixed point on the axis")
