"""Dimension experiments: nested boxes, box counting and hair coverings.

Run: python3 demos/04_dimension.py
"""
from zorich import dimension as dim
from zorich.mapcore import default_config
from zorich.symbolic import Itinerary

cfg = default_config()
q = dim.q_probe(cfg)
l0 = dim.find_l0(cfg, q)
print(f"Box shape q = {q:.4f}; images of large spheres look like round caps from level {l0}.")
d = dim.mcmullen_density(l0, cfg, q, samples=50_000)
print(f"Julia density in a box at level {l0}: {d.delta:.4f} +- {d.se:.4f}")
res = dim.nested_dimension_bound(3, cfg, q=q, l0=l0, samples=50_000)
for lv in res.levels:
    print(f"  level {lv.k}: density {lv.Delta:.4f}, diameter {lv.d:.3g} -> dimension >= {lv.bound:.4f}")
for msg in res.diagnostics:
    print("  note:", msg)

cube = ((-0.5, -0.5, 3.0), (0.5, 0.5, 4.0))
scales = [2.0 ** -j for j in range(3, 8)]
print(f"\nBox-count slope of the Julia set near height 3.5: "
      f"{dim.box_count(dim.julia_classifier(cfg), cube, scales, workers=4).slope:.3f} (tends to 3)")
cloud = dim.omega_hair_cloud(cfg, (2.5, 4.0), 4000)
print(f"Box-count slope of hair points in the thin region Omega: "
      f"{dim.box_count_points(cloud, cube, scales).slope:.3f} (tends to 1)")

zero = Itinerary.constant((0, 0))
print("\nlog of the covering ratio N d^1.2 / r^3 along the zero hair:")
for k in range(1, 6):
    print(f"  k = {k}: {dim.karpinska_cover_stats(zero, 1.0, k, cfg).log_ratio:.4g}")
print("The ratio grows at first and only falls below 1 once E^k(1) leaves double range.")
