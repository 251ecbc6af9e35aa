"""Paths from the basin to hair points, and a map with an attracting circle.

Run: python3 demos/05_access_and_family.py
"""
import numpy as np

from zorich import family as fm
from zorich.access import access_path
from zorich.mapcore import default_config
from zorich.symbolic import Itinerary

cfg = default_config()
path = access_path(Itinerary.periodic([(0, 0), (2, 0)]), 0.1, 12, cfg)
print("Access path to a point of the period-two hair:")
for k, (L, dist) in enumerate(zip(path.lengths, path.distances()), start=1):
    print(f"  piece {k:2d}: length {L:.3e}, distance to target {dist:.3e} (<= 4 alpha^k = {4 * cfg.alpha ** k:.3e})")

fam = fm.build_annulus_family()
c = fam.cfg
print(f"\nAnnulus family: circle radius {c.s} at height w = {c.w:.6f}, a = {c.a:.6f}")
print(f"  f(C) = C up to {fm.circle_invariance(fam):.1e}; transversal contraction s/t = {c.s / c.t:.4f}")
for fp in fm.circle_dynamics(fam, range(5, 9)):
    print(f"  u_{fp.n}: multiplier along the circle {fp.multiplier:+.6f} -> {fp.kind}")
start = fam.circle_points(np.array([0.2 - 1e-4]))[0]
end = fm.orbit(fam, start, 200)[-1]
print(f"  an orbit started just below u_5 ends at angle {np.arctan2(end[1], end[0]):.6f} (u_6 sits at {1 / 6:.6f})")
