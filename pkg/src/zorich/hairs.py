"""Hairs of the Julia set: g_k approximants, traces, endpoints, orbits.

For an itinerary s with inverse branches L_k = Lambda^{s_k},

    g_k(t) = (L_0 o L_1 o ... o L_k)(0, 0, E^{k+1}(t) + M)

converges to the hair g_s(t) for t > t_s.  When E^{k+1}(t) leaves the
double range the composition starts from the highest computable level;
the discarded part is bounded by the strip estimate at that level (see
:func:`_tail_bound`).
"""
from __future__ import annotations

import cmath
import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .mapcore import EXP_LIMIT, MapConfig, cell_of, eval_f, lam, parity
from .symbolic import (
    E_inv_iter, E_tower, Itinerary, endpoint_param, Saturated,
)

#: Deepest composition attempted.
DEPTH_CAP = 60


class DepthError(RuntimeError):
    """No valid starting level for the composition."""


class NotInJulia(ValueError):
    """The orbit entered H_{<=M}, so the point lies in the basin."""


def _start_levels(ts: np.ndarray, k: int):
    """Per parameter: starting level j <= k and the top tower value E^{j+1}(t)."""
    start = np.empty(len(ts), dtype=np.int64)
    top = np.empty(len(ts))
    for i, t in enumerate(ts):
        tower = E_tower(float(t), k + 1)
        start[i] = len(tower) - 2
        top[i] = tower[-1]
    if np.any(start < 0):
        raise DepthError("E(t) already overflows; no level to start from")
    return start, top


def _compose(s: Itinerary, start: np.ndarray, top: np.ndarray, cfg: MapConfig) -> np.ndarray:
    x = np.full((len(start), 3), np.nan)
    for lvl in range(int(start.max()), -1, -1):
        new = start == lvl
        if np.any(new):
            x[new] = np.stack([np.zeros(new.sum()), np.zeros(new.sum()), top[new] + cfg.M], axis=-1)
        act = start >= lvl
        x[act] = lam(x[act], np.asarray(s[lvl]), cfg)
    return x


def g_k(s: Itinerary, t, k: int, cfg: MapConfig) -> np.ndarray:
    """The approximant g_k at parameter(s) t; shape (3,) or (n, 3)."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    start, top = _start_levels(ts, k)
    out = _compose(s, start, top, cfg)
    return out[0] if np.ndim(t) == 0 else out


def g_k_levels(s: Itinerary, t, k: int, cfg: MapConfig) -> np.ndarray:
    """Effective starting level used by :func:`g_k` (k unless saturated)."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    return _start_levels(ts, k)[0]


def _tau_at(ep, k: int) -> float:
    return ep.tau[min(k, len(ep.tau) - 1)]


def _generic_bound(cfg: MapConfig, k: int) -> float:
    # |g - g_k| <= alpha^k c8 / (1 - alpha), valid for t >= tau_{k+1}
    return cfg.alpha ** k * cfg.c8 / (1.0 - cfg.alpha)


def _tail_bound(s: Itinerary, cfg: MapConfig, j: int, top: float) -> float:
    """Bound on |g(t) - g_k(t)| for a composition started at level j.

    g(t) = (L_0..L_j)(g_{sigma^{j+1}s}(T)) with T = E^{j+1}(t); the inner
    point lies within c9 of (2 s_{j+1}, T), hence within
    c9 + 2|s_{j+1}| + M of the start (0, 0, T + M).  One step of the
    path estimate and j contractions by alpha follow.
    """
    try:
        sj = s.magnitude(j + 1)
    except OverflowError:
        return math.inf
    d = cfg.c9 + 2.0 * sj + cfg.M
    return cfg.alpha ** j * cfg.c4 * math.pi * d / max(top - cfg.c9, cfg.M)


@dataclass
class HairTrace:
    itinerary: Itinerary
    params: np.ndarray
    points: np.ndarray
    depth_used: np.ndarray
    error_bound: np.ndarray
    flagged: np.ndarray
    delta_ratios: List[float] = field(default_factory=list)
    rate: float = 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x1", "x2", "x3", "depth", "error_bound"])
        for t, p, d, e in zip(self.params, self.points, self.depth_used, self.error_bound):
            w.writerow([repr(float(t)), repr(float(p[0])), repr(float(p[1])), repr(float(p[2])), int(d), repr(float(e))])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "itinerary": self.itinerary.to_dict(),
            "t": [float(v) for v in self.params],
            "points": [[float(c) for c in p] for p in self.points],
            "depth": [int(d) for d in self.depth_used],
            "error_bound": [float(e) for e in self.error_bound],
            "flagged": [bool(f) for f in self.flagged],
            "contraction_rate": self.rate,
        }, indent=1)

    def injective(self) -> bool:
        """Consecutive points are separated by more than their summed bounds."""
        gaps = np.linalg.norm(np.diff(self.points, axis=0), axis=-1)
        return bool(np.all(gaps > self.error_bound[:-1] + self.error_bound[1:]))


def _resolved_ratios(deltas: np.ndarray, scale: np.ndarray, floor: float = 1e-11):
    """Ratios delta_k / delta_{k-1} where delta_{k-1} is above roundoff."""
    ratios = []
    for k in range(1, deltas.shape[0]):
        prev, cur = deltas[k - 1], deltas[k]
        ok = prev > floor * scale
        ratios.extend((cur[ok] / prev[ok]).tolist())
    return ratios


def trace_hair(s: Itinerary, t_range: Tuple[float, float], n_points: int, tol: float,
               cfg: MapConfig, *, depth_cap: int = DEPTH_CAP, t_values: Optional[Sequence[float]] = None) -> HairTrace:
    """Sample the hair g_s on [t_lo, t_hi] to accuracy ``tol``.

    Every approximant g_0 .. g_K is computed (K = depth at which all
    points meet ``tol`` or ``depth_cap``); the per-point depth is the
    first one whose certified bound is below ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    ep = endpoint_param(s)
    ts = np.asarray(t_values, float) if t_values is not None else np.linspace(t_range[0], t_range[1], n_points)
    if np.any(ts < ep.t_s - 1e-12):
        raise ValueError(f"t below the endpoint parameter estimate {ep.t_s:.6g}")
    n = len(ts)
    depth = np.full(n, -1, dtype=np.int64)
    bound = np.full(n, np.inf)
    pts = np.full((n, 3), np.nan)
    history = []
    for k in range(depth_cap + 1):
        start, top = _start_levels(ts, k)
        gk = _compose(s, start, top, cfg)
        history.append(gk)
        for i in range(n):
            if depth[i] >= 0:
                continue
            b = math.inf
            j = int(start[i])
            if ts[i] >= _tau_at(ep, j + 2) - 1e-12:
                b = _tail_bound(s, cfg, j, float(top[i]))
            if ts[i] >= _tau_at(ep, k + 1) - 1e-12:
                b = min(b, _generic_bound(cfg, k))
            if b < tol:
                depth[i], bound[i], pts[i] = k, b, gk[i]
            elif k == depth_cap:
                bound[i], pts[i] = b, gk[i]
        if np.all(depth >= 0):
            break
    flagged = depth < 0
    depth = np.where(flagged, depth_cap, depth)
    H = np.stack(history)
    deltas = np.linalg.norm(np.diff(H, axis=0), axis=-1)
    scale = 1.0 + np.linalg.norm(H[-1], axis=-1)
    ratios = _resolved_ratios(deltas, scale)
    return HairTrace(s, ts, pts, depth, bound, flagged, ratios, geometric_rate(deltas, scale))


def geometric_rate(deltas: np.ndarray, scale: np.ndarray, floor: float = 1e-11) -> float:
    """Worst per-parameter geometric rate of the resolved deltas.

    For each parameter the rate is (delta_last / delta_first)^(1/steps)
    over the stretch of depths where the deltas are above roundoff.
    """
    worst = 0.0
    for i in range(deltas.shape[1]):
        col = deltas[:, i]
        idx = np.nonzero(col > floor * scale[i])[0]
        if len(idx) < 2:
            continue
        a, b = idx[0], idx[-1]
        worst = max(worst, (col[b] / col[a]) ** (1.0 / (b - a)))
    return worst


def endpoint(s: Itinerary, cfg: MapConfig, tol: float = 1e-8, depth: int = 40):
    """Estimate g_s(t_s) and an error bound.

    Bounded itineraries have t_s = 0; the tip g(0) is g_k(0) at depth
    ``depth`` with the Cauchy tail alpha^k c8 / (1 - alpha) (all t_k are
    eventually below any positive t, so the subsequence limit over
    g_k(tau_k) reduces to plain evaluation).  For generator tails the chain
    g_{k}(tau_k) is evaluated at the deepest available level.
    """
    ep = endpoint_param(s, depth)
    if s.bounded:
        k = depth
        while k < DEPTH_CAP and _generic_bound(cfg, k) > tol:
            k += 1
        return g_k(s, 0.0, k, cfg), _generic_bound(cfg, k)
    k = len(ep.tau) - 1
    t = ep.tau[k]
    p = g_k(s, t, k, cfg)
    lvl = int(g_k_levels(s, t, k, cfg)[0])
    top = E_tower(t, k + 1)[-1]
    b = min(_generic_bound(cfg, k), _tail_bound(s, cfg, lvl, top))
    return p, b


# orbits ------------------------------------------------------------------------

@dataclass
class ItineraryResult:
    prefix: List[Tuple[int, int]]
    orbit: np.ndarray
    basin_index: Optional[int] = None
    escaped: bool = False

    @property
    def in_basin(self) -> bool:
        return self.basin_index is not None


def itinerary_of(x, depth: int, cfg: MapConfig) -> ItineraryResult:
    """Forward orbit cells while at height >= M.

    An iterate strictly below M lies in the basin (f maps the closed
    half-space {x3 <= M} into {x3 < M}), so the exit index is definitive.
    """
    x = np.asarray(x, dtype=float)
    prefix: List[Tuple[int, int]] = []
    orbit = [x]
    for k in range(depth + 1):
        if x[2] < cfg.M:
            return ItineraryResult(prefix, np.array(orbit), basin_index=k)
        r, _ = cell_of(x[0], x[1])
        prefix.append((int(r[0]), int(r[1])))
        if k == depth:
            break
        if x[2] > EXP_LIMIT:
            return ItineraryResult(prefix, np.array(orbit), escaped=True)
        x = eval_f(x, cfg)
        orbit.append(x)
    return ItineraryResult(prefix, np.array(orbit))


@dataclass
class HairParameter:
    prefix: List[Tuple[int, int]]
    u: List[float]
    t: float
    lower: float


def hair_parameter_of(x, depth: int, cfg: MapConfig, t_s: float = 0.0) -> HairParameter:
    """Recover the hair parameter from heights x_{k,3} = E^k(u_k).

    ``u_k`` decreases to the parameter t with x = g_{s(x)}(t).  Forward
    iteration amplifies rounding, so iterates are taken while finite and
    the last computable u_k is reported.
    """
    res = itinerary_of(x, depth, cfg)
    if res.in_basin:
        raise NotInJulia(f"orbit enters H_(<=M) at index {res.basin_index}")
    u = []
    for k, xk in enumerate(res.orbit):
        u.append(E_inv_iter(float(xk[2]), k))
    return HairParameter(res.prefix, u, u[-1], t_s)


def hair_orbit(s: Itinerary, t: float, k: int, cfg: MapConfig, depth: int = 50) -> np.ndarray:
    """x_j = f^j(g_s(t)) for j <= k via the conjugacy g_{sigma^j s}(E^j(t)).

    Iterates are omitted from the first j for which E^{j+1}(t) overflows.
    """
    tower = E_tower(t, k + 1)
    pts = [g_k(s.shift(j), tower[j], depth, cfg) for j in range(min(k + 1, len(tower) - 1))]
    return np.array(pts)


def conjugacy_residual(s: Itinerary, t: float, k: int, cfg: MapConfig, depth: int = 50):
    """|f^k(g_s(t)) - g_{sigma^k s}(E^k(t))| and a propagated bound.

    Both sides use depth-``depth`` approximants.  The forward error of one
    step is at most |Df| <= c2 e^{x3} times the input error, which gives
    the returned bound (errors start at the certified hair bounds).
    Returns (residual, bound, k_used).
    """
    tower = E_tower(t, k + 1)
    k = max(len(tower) - 2, 0)
    if k == 0:
        return 0.0, 0.0, 0
    x = g_k(s, t, depth, cfg)
    err = _point_bound(s, t, depth, cfg)
    for j in range(k):
        err = err * cfg.c2 * math.exp(x[2]) * (1.0 + 1e-9) + 1e-15 * math.exp(x[2])
        x = eval_f(x, cfg)
    rhs = g_k(s.shift(k), tower[k], depth, cfg)
    err_rhs = _point_bound(s.shift(k), tower[k], depth, cfg)
    return float(np.linalg.norm(x - rhs)), err + err_rhs + 1e-12 * (1 + float(np.linalg.norm(rhs))), k


def _point_bound(s: Itinerary, t: float, k: int, cfg: MapConfig) -> float:
    ep = endpoint_param(s)
    start, top = _start_levels(np.array([t]), k)
    b = math.inf
    if t >= _tau_at(ep, int(start[0]) + 2) - 1e-12:
        b = _tail_bound(s, cfg, int(start[0]), float(top[0]))
    if t >= _tau_at(ep, k + 1) - 1e-12:
        b = min(b, _generic_bound(cfg, k))
    return b


# planar cross-check ------------------------------------------------------------

def planar_hair_2d(t, depth: int, a: float, M: float) -> np.ndarray:
    """Hair of the zero address for the planar map, by complex inverse iteration.

    In the plane x2 = 0 with z = x3 + i (pi/2) x1 the restriction of f is
    z -> Re(e^z) - a + i (pi/2) Im(e^z); on the zero address the branch
    into the strip |Im z| < pi/2 is w -> Log(Re w + a + (2i/pi) Im w).
    Returns points (x1, 0, x3).
    """
    out = []
    for tv in np.atleast_1d(t):
        tower = E_tower(float(tv), depth + 1)
        w = complex(tower[-1] + M, 0.0)
        for _ in range(len(tower) - 1):
            w = cmath.log(complex(w.real + a, w.imag * 2.0 / math.pi))
        out.append((w.imag * 2.0 / math.pi, 0.0, w.real))
    return np.array(out)


def planar_exp_oracle(t_range: Tuple[float, float], depth: int, cfg: MapConfig, n: int = 61) -> float:
    """Largest distance between the 3D zero-address hair and the planar one."""
    ts = np.linspace(t_range[0], t_range[1], n)
    zero = Itinerary.constant((0, 0))
    p3 = g_k(zero, ts, depth, cfg)
    p2 = planar_hair_2d(ts, depth, cfg.a, cfg.M)
    return float(np.max(np.linalg.norm(p3 - p2, axis=-1)))


def planar_map(z: np.ndarray, a: float) -> np.ndarray:
    """The restriction of f to {x2 = 0} in the coordinate z = x3 + i (pi/2) x1."""
    e = np.exp(z)
    return (e.real - a) + 1j * (math.pi / 2.0) * e.imag


def planar_fixed_point(a: float) -> float:
    """Attracting real fixed point of x -> e^x - a (bisection on e^x - a - x)."""
    from scipy.optimize import brentq
    return brentq(lambda x: math.exp(x) - a - x, -a - 1.0, 0.0)


# ordering persistence -------------------------------------------------------------

def estimate_H(cfg: MapConfig, samples: int = 100_000, seed: int = 0) -> int:
    """Smallest H in 1..20 for which one step of the persistence argument holds.

    Sample pairs x, y in a common beam with y3 >= x3 + H and check
    e^H e^{x3} - a - |x_{k+1}| - 4 > |x_{k+1}| + H, the inequality that
    makes the gap propagate.
    """
    rng = np.random.default_rng(seed)
    x3 = rng.uniform(cfg.M, 40.0, samples)
    u = rng.uniform(-1, 1, (samples, 2))
    x = np.column_stack([u, x3])
    fx = eval_f(x, cfg)
    nx = np.linalg.norm(fx, axis=-1)
    for H in range(1, 21):
        lhs = math.exp(H) * np.exp(x3) - cfg.a - nx - 4.0
        if np.all(lhs > nx + H):
            return H
    raise RuntimeError("no H <= 20 satisfies the persistence inequality")
