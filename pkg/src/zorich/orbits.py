"""Attracting fixed point, orbit classification and slice renders."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .mapcore import EXP_LIMIT, ConfigurationError, MapConfig, eval_f
from .symbolic import E_iter

BASIN, JULIA, UNDECIDED = 0, 1, 2
KIND_NAMES = {BASIN: "Basin", JULIA: "JuliaEvidence", UNDECIDED: "Undecided"}

#: Orbits whose height reaches this value are certified as escaping.
SATURATION = EXP_LIMIT
#: epsilon of the growth certificate x_{k,3} >= E^k(eps).
GROWTH_EPS = 0.5


def fixed_point_xi(cfg: MapConfig, tol: float = 1e-13, start=None, max_iter: int = 500,
                   margin: float = 0.05) -> np.ndarray:
    """The attracting fixed point by Banach iteration from ``start``.

    Raises :class:`ConfigurationError` if a step ratio exceeds alpha +
    margin after the orbit has entered {x3 <= m}.
    """
    x = np.array([0.0, 0.0, cfg.m] if start is None else start, dtype=float)
    prev = None
    for _ in range(max_iter):
        y = eval_f(x, cfg)
        step = float(np.linalg.norm(y - x))
        if prev is not None and x[2] <= cfg.m and prev > 1e-14 and step / prev > cfg.alpha + margin:
            raise ConfigurationError(f"step ratio {step / prev:.3g} exceeds alpha + margin")
        x, prev = y, step
        if step < tol:
            # one more step so that |f(xi) - xi| is measured at the returned point
            return eval_f(x, cfg) if np.linalg.norm(eval_f(x, cfg) - x) < step else x
    raise ConfigurationError("fixed-point iteration did not converge")


@dataclass
class OrbitVerdict:
    kind: int
    index: int
    orbit: np.ndarray

    @property
    def name(self) -> str:
        return KIND_NAMES[self.kind]

    @property
    def is_basin(self) -> bool:
        return self.kind == BASIN


def _growth_floor(budget: int, eps: float) -> np.ndarray:
    out = np.full(budget + 1, np.inf)
    for k in range(budget + 1):
        try:
            out[k] = E_iter(eps, k)
        except OverflowError:
            break
    return out


def classify_points(x, budget: int, cfg: MapConfig, *, eps: float = GROWTH_EPS,
                    window: int = 4) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized verdicts for points of shape (n, 3).

    Returns (kind, index): index is the exit iterate for Basin, the
    certifying iterate for JuliaEvidence and ``budget`` for Undecided.
    JuliaEvidence means saturation (x3 > 700) or x_{j,3} >= E^j(eps) over
    ``window`` consecutive iterates ending at k, counting only iterates
    with E^j(eps) > M.
    """
    x = np.array(x, dtype=float).reshape(-1, 3)
    n = len(x)
    kind = np.full(n, UNDECIDED, dtype=np.int8)
    index = np.full(n, budget, dtype=np.int64)
    floor = _growth_floor(budget, eps)
    streak = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    for k in range(budget + 1):
        h = x[active, 2]
        basin = h <= cfg.M
        sat = ~basin & (h > SATURATION)
        streak_a = np.where((h >= floor[k]) & (floor[k] > cfg.M), streak[active] + 1, 0)
        streak[active] = streak_a
        grow = ~basin & ~sat & (streak_a >= window)
        kind[active[basin]] = BASIN
        index[active[basin]] = k
        kind[active[sat | grow]] = JULIA
        index[active[sat | grow]] = k
        active = active[~(basin | sat | grow)]
        if k == budget or len(active) == 0:
            break
        x[active] = eval_f(x[active], cfg)
    return kind, index


def classify_orbit(x, budget: int, cfg: MapConfig) -> OrbitVerdict:
    """Verdict for one point, with the computed orbit prefix."""
    x = np.asarray(x, dtype=float)
    orbit = [x]
    kind, index = classify_points(x[None], budget, cfg)
    for _ in range(int(index[0])):
        orbit.append(eval_f(orbit[-1], cfg, overflow="inf"))
    return OrbitVerdict(int(kind[0]), int(index[0]), np.array(orbit))


# slice renders ---------------------------------------------------------------------

AXES = {"x1": 0, "x2": 1, "x3": 2}


def parse_plane(spec: str) -> Tuple[int, float]:
    """'x2=0' -> (1, 0.0)."""
    name, _, value = spec.partition("=")
    name = name.strip()
    if name not in AXES or not value:
        raise ValueError(f"bad plane spec {spec!r}; expected e.g. 'x2=0'")
    return AXES[name], float(value)


def slice_points(plane: Tuple[int, float], window, resolution: int) -> np.ndarray:
    """Pixel centers of an axis-aligned slice, row-major, rows top-down.

    ``window`` = (u_lo, u_hi, v_lo, v_hi) over the two free axes in
    increasing axis order; rows run along the second free axis from high
    to low so that the image is upright.
    """
    axis, value = plane
    free = [i for i in range(3) if i != axis]
    u_lo, u_hi, v_lo, v_hi = window
    du = (u_hi - u_lo) / resolution
    dv = (v_hi - v_lo) / resolution
    u = u_lo + (np.arange(resolution) + 0.5) * du
    v = v_hi - (np.arange(resolution) + 0.5) * dv
    V, U = np.meshgrid(v, u, indexing="ij")
    pts = np.empty((resolution, resolution, 3))
    pts[..., axis] = value
    pts[..., free[0]] = U
    pts[..., free[1]] = V
    return pts.reshape(-1, 3)


def shade(kind: np.ndarray, index: np.ndarray, budget: int) -> np.ndarray:
    """Gray levels: Basin 255 - 8 * exit index (>= 64), JuliaEvidence 0, Undecided 128."""
    g = np.where(kind == BASIN, np.maximum(255 - 8 * index, 64), 0)
    g = np.where(kind == UNDECIDED, 128, g)
    return g.astype(np.uint8)


def render_slice(plane, window, resolution: int, budget: int, cfg: MapConfig, *,
                 workers: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Classify every pixel; returns (gray image uint8, kind array), both (res, res)."""
    from .parallel import map_rows

    if isinstance(plane, str):
        plane = parse_plane(plane)
    pts = slice_points(plane, window, resolution).reshape(resolution, resolution, 3)

    def row_block(rows):
        k, i = classify_points(pts[rows].reshape(-1, 3), budget, cfg)
        return k, i

    kinds, idx = map_rows(row_block, resolution, workers)
    kind = kinds.reshape(resolution, resolution)
    index = idx.reshape(resolution, resolution)
    return shade(kind, index, budget), kind


def planar_classify(z: np.ndarray, budget: int, cfg: MapConfig) -> np.ndarray:
    """Basin verdict of the planar model z -> Re e^z - a + i (pi/2) Im e^z.

    Re z plays x3 and (2/pi) Im z plays x1; Basin once Re z <= M.
    Returns a boolean array (True = Basin).
    """
    z = np.array(z, dtype=complex).ravel()
    basin = np.zeros(z.size, dtype=bool)
    active = np.arange(z.size)
    for _ in range(budget + 1):
        w = z[active]
        b = w.real <= cfg.M
        basin[active[b]] = True
        keep = ~b & (w.real <= SATURATION)
        active = active[keep]
        if len(active) == 0:
            break
        w = z[active]
        e = np.exp(w)
        z[active] = (e.real - cfg.a) + 1j * (math.pi / 2.0) * e.imag
    return basin


def planar_slice_agreement(window, resolution: int, budget: int, cfg: MapConfig,
                           workers: int = 1) -> float:
    """Fraction of pixels of the x2 = 0 slice where 3D and planar Basin verdicts agree."""
    _, kind = render_slice((1, 0.0), window, resolution, budget, cfg, workers=workers)
    pts = slice_points((1, 0.0), window, resolution)
    z = pts[:, 2] + 1j * (math.pi / 2.0) * pts[:, 0]
    planar = planar_classify(z, budget, cfg).reshape(resolution, resolution)
    return float(np.mean((kind == BASIN) == planar))
