"""The Zorich map, its constants and its inverse branches.

Run: python3 demos/01_map_and_inverse.py
"""
import numpy as np

from zorich.mapcore import default_config, eval_F, eval_f, lam
from zorich.orbits import fixed_point_xi

cfg = default_config()
print("Constants derived from a sampled derivative of F at height 0:")
print(f"  alpha = {cfg.alpha}: |Df| <= alpha below m = {cfg.m:.5f}, expansion 1/alpha above M = {cfg.M:.5f}")
print(f"  a = {cfg.a} satisfies a >= e^M - m = {np.exp(cfg.M) - cfg.m:.5f}")
print(f"  hair constants c7 = {cfg.c7:.4f}, c8 = {cfg.c8:.4f}, c9 = {cfg.c9:.4f}")

x = np.array([0.3, -0.7, 1.2])
print(f"\nF{tuple(x.tolist())} = {eval_F(x).round(6)}; |F| = {np.linalg.norm(eval_F(x)):.6f} = e^1.2")
print("F is 4-periodic in x1 and x2:", np.allclose(eval_F(x + [4, 0, 0]), eval_F(x)))

y = np.array([10.0, -3.0, 5.0])
for r in ([0, 0], [2, 0], [-1, 3]):
    p = lam(y, np.array(r), cfg)
    print(f"branch into beam {r}: {p.round(6)} -> f = {eval_f(p, cfg).round(10)}")

xi = fixed_point_xi(cfg)
print(f"\nAttracting fixed point xi = {xi.round(8)}; every orbit reaching x3 <= M converges to it.")
