"""Access paths to hair points from the basin.

For a Julia point x with orbit x_k and address s, the path is built level
by level.  With z_k = f(y_{k-1}) (height M) and r_k the even cell nearest
to (z_k1, z_k2)/2:

    u_k = (2r_k + 1, M),  v_k = (2r_k + 1, x_k3),  w_k = (2s_k + 1, x_k3)

and gamma_k = [z_k, u_k] + [u_k, v_k] + sigma_k + [w_k, y_k], where
sigma_k runs along the lines x1 odd / x2 odd at height x_k3 (beam faces,
mapped below M) and y_k is the first point of [w_k, x_k] with
f3(y_k) = M.  Gamma_k is gamma_k pulled back by L_0 o ... o L_{k-1}.
Every point of gamma_k lies at height <= M or maps there, so all of it is
in the basin; the pullbacks are therefore basin points too.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .hairs import g_k
from .mapcore import MapConfig, cell_of, eval_f, lam
from .symbolic import E_tower, Itinerary

#: Sample points per unit of polyline length (at least 8 per segment).
DENSITY = 40


def eta_mu(cfg: MapConfig) -> Tuple[float, float]:
    """Ball factor eta and length factor mu of the construction.

    eta is half the smallest of the ratios max{M, |x| - c}/|x| (c = 6 + 2a,
    the worst of the three lower bounds), i.e. M / (2 (M + 6 + 2a));
    mu = 13 + (66 + 8a)/M from length(gamma_k) <= 13|x_k| + 66 + 8a.
    """
    eta = cfg.M / (2.0 * (cfg.M + 6.0 + 2.0 * cfg.a))
    mu = 13.0 + (66.0 + 8.0 * cfg.a) / cfg.M
    return eta, mu


@dataclass
class Anchors:
    z: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    y: np.ndarray
    x: np.ndarray


@dataclass
class AccessPath:
    target: np.ndarray
    itinerary: Itinerary
    t: float
    y0: np.ndarray
    anchors: List[Anchors]
    gamma: List[np.ndarray]           # gamma_k samples, k = 1..K
    segments: List[np.ndarray]        # Gamma_k samples, k = 1..K
    lengths: List[float]
    length_bounds: List[float]
    min_ball_ratio: List[float]       # min |gamma_k| / (eta |x_k|)
    diagnostics: List[str] = field(default_factory=list)

    def distances(self) -> List[float]:
        return [float(np.min(np.linalg.norm(S - self.target, axis=-1))) for S in self.segments]

    def decay_ratios(self) -> List[float]:
        L = self.lengths
        return [L[i + 1] / L[i] for i in range(len(L) - 1)]

    def decay_rate(self) -> float:
        """Geometric rate (L_K / L_1)^(1/(K-1)) of the segment lengths."""
        L = self.lengths
        return (L[-1] / L[0]) ** (1.0 / (len(L) - 1))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "index", "x1", "x2", "x3"])
        for k, S in enumerate(self.segments, start=1):
            for i, p in enumerate(S):
                w.writerow([k, i, repr(float(p[0])), repr(float(p[1])), repr(float(p[2]))])
        return buf.getvalue()


def _f3(p, cfg):
    return eval_f(np.atleast_2d(p), cfg)[:, 2]


def first_crossing(w, x, cfg: MapConfig, n: int = 2000, iters: int = 80) -> np.ndarray:
    """First point of [w, x] (from w) where f3 reaches M; f3(w) < M <= f3(x)."""
    s = np.linspace(0.0, 1.0, n)
    pts = w + s[:, None] * (x - w)
    f3 = _f3(pts, cfg)
    above = np.nonzero(f3 >= cfg.M)[0]
    if len(above) == 0 or above[0] == 0:
        raise ValueError("segment has no crossing of f3 = M from below")
    lo, hi = s[above[0] - 1], s[above[0]]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if _f3(w + mid * (x - w), cfg)[0] >= cfg.M:
            hi = mid
        else:
            lo = mid
    return w + hi * (x - w)


def _polyline(points, density=DENSITY):
    out = []
    for a, b in zip(points[:-1], points[1:]):
        n = max(8, int(math.ceil(np.linalg.norm(b - a) * density)))
        s = np.linspace(0.0, 1.0, n, endpoint=False)
        out.append(a + s[:, None] * (b - a))
    out.append(points[-1][None])
    return np.concatenate(out)


def _odd_corner(c):
    return np.array([2.0 * c[0] + 1.0, 2.0 * c[1] + 1.0])


def _nearest_even_cell(p2) -> Tuple[int, int]:
    """Even cell whose center (2r1, 2r2) is within 4 of p2 (nearest such)."""
    r = np.rint(np.asarray(p2) / 2.0).astype(int)
    best = None
    for d1 in (-1, 0, 1):
        for d2 in (-1, 0, 1):
            c = (int(r[0] + d1), int(r[1] + d2))
            if (c[0] + c[1]) % 2:
                continue
            dist = math.hypot(2 * c[0] - p2[0], 2 * c[1] - p2[1])
            if best is None or dist < best[0]:
                best = (dist, c)
    return best[1]


def hair_orbit_points(s: Itinerary, t: float, K: int, cfg: MapConfig, depth: int = 50) -> np.ndarray:
    """x_k = g_{sigma^k s}(E^k(t)) for k = 0..K (requires E^{K+1}(t) finite)."""
    tower = E_tower(t, K + 1)
    if len(tower) < K + 2:
        raise ValueError("E-tower overflows before level K; use a smaller t")
    return np.array([g_k(s.shift(k), tower[k], depth, cfg) for k in range(K + 1)])


def access_path(s: Itinerary, t: float, K: int, cfg: MapConfig, *, depth: int = 50) -> AccessPath:
    """Build gamma_1..gamma_K and their pullbacks for x = g_s(t)."""
    eta, mu = eta_mu(cfg)
    xs = hair_orbit_points(s, t, K, cfg, depth)
    cells = [s[k] for k in range(K + 1)]
    diag: List[str] = []

    def y_of(k):
        w = np.array([*_odd_corner(cells[k]), xs[k][2]])
        return w, first_crossing(w, xs[k], cfg)

    _, y_prev = y_of(0)
    y0 = y_prev
    anchors, gammas, segs, lengths, bounds, ball = [], [], [], [], [], []
    for k in range(1, K + 1):
        x = xs[k]
        z = eval_f(y_prev, cfg)
        z[2] = cfg.M      # f3(y_prev) = M up to the bisection tolerance
        rk = _nearest_even_cell(z[:2])
        u = np.array([*_odd_corner(rk), cfg.M])
        v = np.array([*_odd_corner(rk), x[2]])
        w, y = y_of(k)
        # sigma: along x1 = v1 (odd) to w2, then along x2 = w2 (odd) to w1
        corner = np.array([v[0], w[1], x[2]])
        gamma = _polyline([z, u, v, corner, w, y])
        radius = np.linalg.norm(gamma, axis=-1).min()
        ball.append(float(radius / (eta * np.linalg.norm(x))))
        if radius < eta * np.linalg.norm(x):
            diag.append(f"level {k}: gamma enters B(0, eta|x_k|)")
        pulled = gamma
        for j in range(k - 1, -1, -1):
            pulled = lam(pulled, np.asarray(cells[j]), cfg)
        anchors.append(Anchors(z, u, v, w, y, x))
        gammas.append(gamma)
        segs.append(pulled)
        lengths.append(float(np.sum(np.linalg.norm(np.diff(pulled, axis=0), axis=-1))))
        bounds.append(cfg.c4 * mu / eta * cfg.alpha ** (k - 1))
        y_prev = y
    return AccessPath(xs[0], s, t, y0, anchors, gammas, segs, lengths, bounds, ball, diag)


def gamma_properties(path: AccessPath, cfg: MapConfig) -> dict:
    """Worst violations of (i) y3 = x3, (ii) |y - x| <= 4, (iii) f3(y) = M."""
    ys = [path.y0] + [a.y for a in path.anchors]
    xs = [path.target] + [a.x for a in path.anchors]
    return {
        "height": max(abs(y[2] - x[2]) for y, x in zip(ys, xs)),
        "distance": max(float(np.linalg.norm(y - x)) for y, x in zip(ys, xs)),
        "f3_minus_M": max(abs(float(_f3(y, cfg)[0]) - cfg.M) for y in ys),
    }
