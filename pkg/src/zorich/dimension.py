"""Dimension experiments: McMullen nested boxes, box counting, the region Omega.

McMullen boxes
--------------
R(r, l) = [2r1 - q, 2r1 + q] x [2r2 - q, 2r2 + q] x [l, l + 3/4] with q
slightly above 2/3, so that h of the q-square contains the cap
{u3 >= 1/2}.  Its image is the shell-cone

    f(R(r, l)) = {y : e^l <= |y + a e3| <= e^(l + 3/4),
                      (y3 + a) / |y + a e3| >= cos(pi q / 2)},

independent of r.  U(l) is the set of boxes R(r', l') contained in it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import hemisphere_to_square
from .mapcore import MapConfig, eval_f, jacobian_lambda, lam
from .symbolic import E_iter, E_tower, Itinerary, Saturated, endpoint_param, log_E_iter

BOX_HEIGHT = 0.75
#: Levels below this are sampled in absolute coordinates with exact box tests.
EXACT_LEVEL = 30


# geometry of the boxes ---------------------------------------------------------------

def q_probe(cfg: Optional[MapConfig] = None, directions: int = 1000, margin: float = 0.01) -> float:
    """Half-width q of the boxes: h of the q-square covers the cap {u3 >= 1/2}.

    The max-norm of h^-1 over sampled cap-boundary points gives the
    smallest admissible q (by bisection on the sampled predicate); the
    result is widened by ``margin``.
    """
    phi = np.linspace(0.0, 2.0 * np.pi, directions, endpoint=False)
    s = math.sqrt(3.0) / 2.0
    cap = np.stack([s * np.cos(phi), s * np.sin(phi), np.full_like(phi, 0.5)], axis=-1)
    rho = np.max(np.abs(hemisphere_to_square(cap)), axis=-1)
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if np.all(rho <= mid):
            hi = mid
        else:
            lo = mid
    return hi * (1.0 + margin)


def J0(u) -> np.ndarray:
    """Jacobian determinant of F at height 0 in folded coordinates u.

    With rho the max-norm, h has polar angle pi rho / 2 and azimuth
    arg(u); the area factor is (pi/2) sin(pi rho / 2) rho / |u|^2.
    """
    u = np.asarray(u, dtype=float)
    rho = np.max(np.abs(u), axis=-1)
    r2 = np.sum(u * u, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = 0.5 * np.pi * np.sin(0.5 * np.pi * rho) * rho / r2
    # limit at the origin along the axes: (pi/2)^2
    return np.where(r2 > 0, val, 0.25 * np.pi ** 2)


def in_image(y, level: float, q: float, cfg: MapConfig) -> np.ndarray:
    """Membership in f(R(r, level)) (exact predicate)."""
    y = np.asarray(y, dtype=float)
    z3 = y[..., 2] + cfg.a
    n = np.sqrt(y[..., 0] ** 2 + y[..., 1] ** 2 + z3 ** 2)
    return (n >= math.exp(level)) & (n <= math.exp(level + BOX_HEIGHT)) & (z3 >= math.cos(0.5 * math.pi * q) * n)


def box_in_image(cells, levels, level: float, q: float, cfg: MapConfig) -> np.ndarray:
    """Exact test R(cell, l') subset of f(R(., level)) for arrays of boxes.

    The outer ball and the cone are convex, so the 8 corners decide them;
    the inner radius is decided by the box point nearest to -a e3.
    """
    cells = np.asarray(cells, dtype=float).reshape(-1, 2)
    levels = np.asarray(levels, dtype=float).reshape(-1)
    ok = np.ones(len(cells), dtype=bool)
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            for top in (0.0, BOX_HEIGHT):
                c = np.stack([2 * cells[:, 0] + s1 * q, 2 * cells[:, 1] + s2 * q, levels + top], axis=-1)
                z3 = c[:, 2] + cfg.a
                n = np.sqrt(c[:, 0] ** 2 + c[:, 1] ** 2 + z3 ** 2)
                ok &= (n <= math.exp(level + BOX_HEIGHT)) & (z3 >= math.cos(0.5 * math.pi * q) * n)
    near = np.stack([
        np.clip(0.0, 2 * cells[:, 0] - q, 2 * cells[:, 0] + q),
        np.clip(0.0, 2 * cells[:, 1] - q, 2 * cells[:, 1] + q),
        np.clip(-cfg.a, levels, levels + BOX_HEIGHT) + cfg.a,
    ], axis=-1)
    ok &= np.linalg.norm(near, axis=-1) >= math.exp(level)
    return ok


def box_of(y, q: float):
    """The box R(r', l') containing y, if any: (found, cells, levels)."""
    y = np.asarray(y, dtype=float)
    n = np.rint(y[..., :2] / 2.0)
    off = np.max(np.abs(y[..., :2] - 2.0 * n), axis=-1)
    lvl = np.floor(y[..., 2])
    found = (off <= q) & ((n[..., 0] + n[..., 1]) % 2 == 0) & (y[..., 2] - lvl <= BOX_HEIGHT)
    return found, n, lvl


def sample_cap(n: int, q: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform unit vectors with polar angle <= pi q / 2."""
    c0 = math.cos(0.5 * math.pi * q)
    ct = rng.uniform(c0, 1.0, n)
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    st = np.sqrt(1.0 - ct * ct)
    return np.stack([st * np.cos(phi), st * np.sin(phi), ct], axis=-1)


def sample_image(level: float, n: int, q: float, cfg: MapConfig, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples (by volume) of f(R(r, level))."""
    r3 = rng.uniform(math.exp(3 * level), math.exp(3 * (level + BOX_HEIGHT)), n)
    y = np.cbrt(r3)[:, None] * sample_cap(n, q, rng)
    y[:, 2] -= cfg.a
    return y


def sample_box(cell, level: float, n: int, q: float, rng: np.random.Generator) -> np.ndarray:
    lo = np.array([2 * cell[0] - q, 2 * cell[1] - q, level])
    hi = np.array([2 * cell[0] + q, 2 * cell[1] + q, level + BOX_HEIGHT])
    return rng.uniform(lo, hi, (n, 3))


# the sandwich (4a) ---------------------------------------------------------------------

@dataclass
class SandwichResult:
    level: int
    inner_rate: float
    outer_rate: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.inner_rate == 1.0 and self.outer_rate == 1.0


def image_sandwich_check(level: int, cfg: MapConfig, q: Optional[float] = None, *,
                         samples: int = 10_000, seed: int = 0, cell=(0, 0)) -> SandwichResult:
    """Check {e^l <= |x| <= 2e^l, x3 >= |x|/2} within f(R(r, l)) within {e^l/2 <= |x| <= 3e^l}.

    Inner: points of the inner shell-cone are pulled back by Lambda^r and
    must land in R(r, l).  Outer: images of points of R(r, l).
    """
    q = q_probe(cfg) if q is None else q
    rng = np.random.default_rng(seed)
    r3 = rng.uniform(math.exp(3 * level), 8 * math.exp(3 * level), samples)
    d = sample_cap(samples, 2.0 / 3.0, rng)     # polar angle <= pi/3, i.e. x3 >= |x|/2
    y = np.cbrt(r3)[:, None] * d
    x = lam(y, np.array(cell), cfg, check=False)
    inside = (y[:, 2] >= cfg.M) & (np.max(np.abs(x[:, :2] - 2 * np.array(cell)), axis=-1) <= q) & \
             (x[:, 2] >= level) & (x[:, 2] <= level + BOX_HEIGHT)
    pts = sample_box(cell, level, samples, q, rng)
    nf = np.linalg.norm(eval_f(pts, cfg), axis=-1)
    outer = (nf >= 0.5 * math.exp(level)) & (nf <= 3 * math.exp(level))
    return SandwichResult(level, float(inside.mean()), float(outer.mean()), samples)


def find_l0(cfg: MapConfig, q: Optional[float] = None, *, max_level: int = 30, samples: int = 10_000,
            seed: int = 0) -> int:
    """Smallest level passing :func:`image_sandwich_check`, plus one."""
    q = q_probe(cfg) if q is None else q
    for lvl in range(1, max_level + 1):
        if image_sandwich_check(lvl, cfg, q, samples=samples, seed=seed).passed:
            return lvl + 1
    raise RuntimeError(f"no level <= {max_level} passes the sandwich check")


# densities ------------------------------------------------------------------------

@dataclass
class DensityEstimate:
    level: int
    delta: float
    se: float
    samples: int
    hits: int

    @property
    def rel_se(self) -> float:
        return self.se / self.delta if self.delta > 0 else math.inf


def mcmullen_density(level: int, cfg: MapConfig, q: Optional[float] = None, *,
                     samples: int = 100_000, seed: int = 0) -> DensityEstimate:
    """Volume fraction of f(R(r, level)) covered by the boxes of U(level).

    A uniform sample point counts when it lies in a box R(r', l') and that
    box is entirely contained in the image (exact test).
    """
    q = q_probe(cfg) if q is None else q
    rng = np.random.default_rng(seed)
    y = sample_image(level, samples, q, cfg, rng)
    found, cells, lvls = box_of(y, q)
    hit = np.zeros(samples, dtype=bool)
    hit[found] = box_in_image(cells[found], lvls[found], level, q, cfg)
    p = float(hit.mean())
    return DensityEstimate(level, p, math.sqrt(p * (1 - p) / samples), samples, int(hit.sum()))


def member_boxes(level: int, cfg: MapConfig, q: float, rng: np.random.Generator, n: int = 20_000,
                 min_level: Optional[float] = None):
    """Distinct boxes of U(level) found by sampling, sorted; optional floor on l'."""
    y = sample_image(level, n, q, cfg, rng)
    found, cells, lvls = box_of(y, q)
    ok = np.zeros(n, dtype=bool)
    ok[found] = box_in_image(cells[found], lvls[found], level, q, cfg)
    if min_level is not None:
        ok &= lvls >= min_level
    boxes = sorted({(int(c[0]), int(c[1]), int(l)) for c, l in zip(cells[ok], lvls[ok])})
    return boxes


# nested construction ------------------------------------------------------------------

@dataclass
class NestedLevel:
    k: int
    cell: Tuple[int, int]
    level: float
    Delta: float
    Delta_se: float
    d: float
    d_envelope: float
    Delta_floor: float
    bound: float
    method: str


@dataclass
class NestedResult:
    levels: List[NestedLevel]
    l0: int
    q: float
    delta_hat: float
    eta: float
    diagnostics: List[str] = field(default_factory=list)

    @property
    def bounds(self) -> List[float]:
        return [lv.bound for lv in self.levels]


def _phase_hits(n: int, q: float, rng: np.random.Generator) -> np.ndarray:
    """Box membership of a uniformly random point relative to the box lattice.

    Used when the boxes are far below the float resolution of their
    position; boundary effects of the host region are O(e^-l).
    """
    p = rng.uniform(0.0, 4.0, (n, 2))
    h = rng.uniform(0.0, 1.0, n)
    c = np.rint(p / 2.0)
    off = np.max(np.abs(p - 2.0 * c), axis=-1)
    return (off <= q) & ((c[:, 0] + c[:, 1]) % 2 == 0) & (h <= BOX_HEIGHT)


def _pull_chain(x, chain, cfg: MapConfig):
    """Apply Lambda^{r_{j}} for j = len(chain)-1 .. 0 and accumulate log|Jacobian|.

    ``x`` are points of R(chain[-1] child); each step y -> Lambda^r(y)
    contributes -(3 x3 + log J0(u)) with x = Lambda^r(y).
    """
    logw = np.zeros(len(x))
    for r in reversed(chain):
        x = lam(x, np.asarray(r), cfg)
        _, u = _folded(x)
        logw -= 3.0 * x[:, 2] + np.log(J0(u))
    return x, logw


def _folded(x):
    from .mapcore import cell_of
    return cell_of(x[:, 0], x[:, 1])


def _deep_points(cell, rho, dirs):
    """Lambda^cell(e^rho * dir - a e3) without forming e^rho.

    The result is (2 cell + (-1)^cell u, rho) where u = h^-1(dir); the cell
    may be a Python int of any size.
    """
    u = hemisphere_to_square(dirs, check=False)
    s1 = -1.0 if cell[0] % 2 else 1.0
    s2 = -1.0 if cell[1] % 2 else 1.0
    x = np.empty((len(dirs), 3))
    x[:, 0] = float(2 * cell[0]) + s1 * u[:, 0]
    x[:, 1] = float(2 * cell[1]) + s2 * u[:, 1]
    x[:, 2] = rho
    return x, u


def _weighted_ratio(hit, logw):
    w = np.exp(logw - logw.max())
    p = float(np.sum(w * hit) / np.sum(w))
    neff = float(np.sum(w) ** 2 / np.sum(w * w))
    return p, math.sqrt(max(p * (1 - p), 0.0) / neff)


def _box_diameter_samples(q: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Offsets of boundary points (and corners) of a box relative to its center."""
    half = np.array([q, q, BOX_HEIGHT / 2])
    pts = rng.uniform(-half, half, (n, 3))
    face = rng.integers(0, 3, n)
    side = rng.choice([-1.0, 1.0], n)
    pts[np.arange(n), face] = side * half[face]
    corners = np.array([[a, b, c] for a in (-1, 1) for b in (-1, 1) for c in (-1, 1)]) * half
    return np.concatenate([corners, pts])


def _max_pairwise(p: np.ndarray) -> float:
    best = 0.0
    for i in range(0, len(p), 256):
        d = np.linalg.norm(p[i:i + 256, None, :] - p[None, :, :], axis=-1)
        best = max(best, float(d.max()))
    return best


def nested_dimension_bound(k_max: int, cfg: MapConfig, *, q: Optional[float] = None,
                           l0: Optional[int] = None, samples: int = 100_000, seed: int = 0,
                           diameter_samples: int = 1000) -> NestedResult:
    """McMullen lower bounds 3 - sum_{j<=k} |log Delta_j| / |log d_k|.

    A_0 = {R((0,0), l0)}; a member of A_{k+1} is the pullback of a box of
    U(l_k) under the chain of branches.  One chain is followed (children
    drawn with the seeded RNG among boxes with l' >= e^{l_k}/2, the
    sandwich region).  Delta_k is the Jacobian-weighted share of the
    pulled-back children in the pulled-back parent; d_k the diameter of
    the member, directly sampled while it is resolvable and through the
    linearized chain beyond that.
    """
    q = q_probe(cfg) if q is None else q
    l0 = find_l0(cfg, q) if l0 is None else l0
    rng = np.random.default_rng(seed)
    dens = mcmullen_density(l0, cfg, q, samples=samples, seed=seed)
    eta = cfg.eta
    diag: List[str] = []
    levels: List[NestedLevel] = []
    chain: List[Tuple[int, int]] = []        # cells r_0 .. r_{k-1} of the pulled-back branches
    cell, level = (0, 0), l0
    log_delta_sum = 0.0
    offsets = _box_diameter_samples(q, diameter_samples, rng)
    e_star = float(l0)
    for k in range(k_max + 1):
        # density of children inside the member at level k
        if level < EXACT_LEVEL:
            y = sample_image(level, samples, q, cfg, rng)
            found, cells, lvls = box_of(y, q)
            hit = np.zeros(samples, dtype=bool)
            hit[found] = box_in_image(cells[found], lvls[found], level, q, cfg)
            x = lam(y, np.asarray(cell), cfg)
            _, u = _folded(x)
            # uniform-in-volume samples, weighted by |J Lambda|
            logw = -(3.0 * x[:, 2] + np.log(J0(u)))
            method = "exact"
        elif math.isfinite(level):
            # uniform in (log radius, solid angle): dV |J Lambda| = d rho dOmega / J0(u)
            dirs = sample_cap(samples, q, rng)
            rho = level + rng.uniform(0.0, BOX_HEIGHT, samples)
            x, u = _deep_points(cell, rho, dirs)
            logw = -np.log(J0(u))
            hit = _phase_hits(samples, q, rng)
            method = "asymptotic"
        else:
            diag.append(f"level {k}: box height overflows double precision; dropped")
            break
        if chain:
            logw = logw + _pull_chain(x, chain, cfg)[1]
        Delta, Dse = _weighted_ratio(hit, logw)

        # diameter of the member
        if k == 0:
            d = float(np.linalg.norm([2 * q, 2 * q, BOX_HEIGHT]))
            dmethod = "exact"
        else:
            center = np.array([2.0 * cell[0], 2.0 * cell[1], level + BOX_HEIGHT / 2])
            if abs(level) < 1e6 and max(abs(cell[0]), abs(cell[1])) < 1e6:
                pts, _ = _pull_chain(center + offsets, chain, cfg)
                d = _max_pairwise(pts)
                dmethod = "sampled"
            else:
                J = np.eye(3)
                p = center
                for r in reversed(chain):
                    # Lambda is smooth on the scale |p|: relative central differences
                    J = jacobian_lambda(p, np.asarray(r), cfg) @ J
                    p = lam(p, np.asarray(r), cfg)
                d = _max_pairwise(offsets @ J.T)
                dmethod = "linearized"
        env = cfg.alpha ** (k - 1) * 3 * cfg.c4 * math.pi / e_star
        log_delta_sum += abs(math.log(Delta))
        bound = 3.0 - log_delta_sum / abs(math.log(d))
        levels.append(NestedLevel(k, (int(cell[0]), int(cell[1])) if abs(cell[0]) < 2 ** 62 else cell,
                                  float(level), Delta, Dse, d, env, eta ** (k + 1) * dens.delta,
                                  bound, f"{method}/{dmethod}"))
        if k == k_max:
            break
        # choose a child in the sandwich part of U(level)
        nxt = _choose_child(level, cfg, q, rng)
        if nxt is None:
            diag.append(f"level {k + 1}: no child found; dropped")
            break
        chain.append(cell)
        cell, level = nxt
        e_star = 0.5 * math.exp(e_star) if e_star < 700 else math.inf
    return NestedResult(levels, l0, q, dens.delta, eta, diag)


def _choose_child(level: float, cfg: MapConfig, q: float, rng: np.random.Generator):
    """A box R(r', l') of U(level) with l' >= e^level / 2."""
    if level < EXACT_LEVEL:
        boxes = member_boxes(level, cfg, q, rng, min_level=0.5 * math.exp(level))
        if not boxes:
            return None
        b = boxes[int(rng.integers(len(boxes)))]
        return (b[0], b[1]), float(b[2])
    if level + BOX_HEIGHT < 700:
        # macro position in the sandwich part (polar angle <= pi/3); the
        # lattice phase is below float resolution there, so the cell is
        # rounded to even parity
        d = sample_cap(1, 2.0 / 3.0, rng)[0]
        y = math.exp(level + rng.uniform(0.0, BOX_HEIGHT)) * d
        n1, n2 = int(round(y[0] / 2)), int(round(y[1] / 2))
        if (n1 + n2) % 2:
            n1 += 1
        return (n1, n2), float(math.floor(y[2] - cfg.a))
    return None


# box counting ------------------------------------------------------------------------

@dataclass
class BoxCount:
    scales: List[float]
    counts: List[int]
    slope: float
    r2: float
    flagged: int = 0

    def to_csv(self) -> str:
        lines = ["scale,count"]
        lines += [f"{s!r},{c}" for s, c in zip(self.scales, self.counts)]
        return "\n".join(lines) + "\n"


def fit_slope(scales: Sequence[float], counts: Sequence[int]) -> Tuple[float, float]:
    """Least-squares slope of log N against log(1/eps), with r^2."""
    x = np.log(1.0 / np.asarray(scales, float))
    y = np.log(np.asarray(counts, float))
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icept), *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ np.array([slope, icept])
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - pred) ** 2)) / ss if ss > 0 else 1.0
    return float(slope), r2


def _dyadic_levels(window, scales):
    lo, hi = (np.asarray(v, float) for v in window)
    side = hi - lo
    if not np.allclose(side, side[0]):
        raise ValueError("window must be a cube")
    scales = list(scales)
    if any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be decreasing")
    levels = []
    for s in scales:
        j = math.log2(side[0] / s)
        if abs(j - round(j)) > 1e-9:
            raise ValueError("scales must be the window side over powers of two")
        levels.append(int(round(j)))
    return lo, side[0], levels


def box_count(classifier: Callable[[np.ndarray], np.ndarray], window, scales: Sequence[float], *,
              oversample: int = 1, chunk: int = 1 << 18, workers: int = 1) -> BoxCount:
    """Occupied-cell counts of {classifier == True} over a cubic window.

    The classifier is evaluated at ``oversample``^3 points per finest cell;
    a finest cell is occupied if any of its points is in.  Coarser counts
    come from 2x2x2 coarsening.  The classifier may return an int array
    with 2 meaning "budget exhausted": such points count as in and are
    reported in ``flagged``.
    """
    from .parallel import map_rows

    lo, side, levels = _dyadic_levels(window, scales)
    n = 2 ** max(levels)
    m = n * oversample
    h = side / m
    coords = lo[None, :] + (np.arange(m)[:, None] + 0.5) * h
    flagged = [0]

    def plane_rows(rows):
        out = []
        fl = 0
        for i in range(rows.start, rows.stop):
            X2, X3 = np.meshgrid(coords[:, 1], coords[:, 2], indexing="ij")
            pts = np.stack([np.full(X2.size, coords[i, 0]), X2.ravel(), X3.ravel()], axis=-1)
            res = np.concatenate([np.asarray(classifier(pts[j:j + chunk])) for j in range(0, len(pts), chunk)])
            fl += int(np.sum(res == 2))
            out.append((res != 0).reshape(m, m))
        return np.array(out), np.array([fl])

    occ, fls = map_rows(plane_rows, m, workers, block=max(1, oversample))
    occ = occ.reshape(n, oversample, n, oversample, n, oversample).any(axis=(1, 3, 5))
    counts_by_level = {}
    cur = occ
    for j in range(max(levels), min(levels) - 1, -1):
        counts_by_level[j] = int(cur.sum())
        if j > min(levels):
            s = cur.shape[0] // 2
            cur = cur.reshape(s, 2, s, 2, s, 2).any(axis=(1, 3, 5))
    counts = [counts_by_level[j] for j in levels]
    slope, r2 = fit_slope(scales, counts)
    return BoxCount(list(scales), counts, slope, r2, int(fls.sum()))


def box_count_points(points: np.ndarray, window, scales: Sequence[float]) -> BoxCount:
    """Occupied-cell counts of a point cloud inside a cubic window."""
    lo, side, levels = _dyadic_levels(window, scales)
    p = np.asarray(points, float)
    rel = (p - lo) / side
    keep = np.all((rel >= 0) & (rel < 1), axis=-1)
    rel = rel[keep]
    counts = []
    for j in levels:
        idx = np.floor(rel * 2 ** j).astype(np.int64)
        counts.append(len(np.unique(idx, axis=0)))
    slope, r2 = fit_slope(scales, counts)
    return BoxCount(list(scales), counts, slope, r2)


def calibration_classifier(kind: str, thickness: float, center: float = 0.5 + 1e-3):
    """Thickened segment, plane or full cube inside the unit cube."""
    half = thickness / 2.0

    def classify(p):
        if kind == "segment":
            return (np.abs(p[:, 1] - center) < half) & (np.abs(p[:, 2] - center) < half)
        if kind == "plane":
            return np.abs(p[:, 2] - center) < half
        if kind == "cube":
            return np.ones(len(p), dtype=bool)
        raise ValueError(kind)

    return classify


def julia_classifier(cfg: MapConfig, budget: int = 40):
    """Not-Basin points: JuliaEvidence -> 1, Undecided -> 2, Basin -> 0."""
    from .orbits import BASIN, UNDECIDED, classify_points

    def classify(p):
        kind, _ = classify_points(p, budget, cfg)
        return np.where(kind == BASIN, 0, np.where(kind == UNDECIDED, 2, 1))

    return classify


# the region Omega and coverings -----------------------------------------------------------

def psi(x) -> np.ndarray:
    """psi(x) = exp(sqrt(log x)) for x >= 1."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 1):
        raise ValueError("psi is defined for x >= 1")
    return np.exp(np.sqrt(np.log(x)))


def in_omega(p, cfg: MapConfig) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    x3 = p[..., 2]
    ok = x3 > max(1.0, cfg.M)
    out = np.zeros(x3.shape, dtype=bool)
    out[ok] = (p[..., 0] ** 2 + p[..., 1] ** 2)[ok] < psi(x3[ok]) ** 2
    return out


def omega_absorption(s: Itinerary, t: float, depth: int, cfg: MapConfig, *, hair_depth: int = 50) -> Optional[int]:
    """Smallest k such that all computed iterates f^j(g_s(t)), j >= k, lie in Omega.

    Iterates are evaluated through f^j(g_s(t)) = g_{sigma^j s}(E^j(t)) up
    to ``depth`` or the last computable tower level.  Returns None when the
    last computed iterate is outside Omega.
    """
    from .hairs import hair_orbit

    ep = endpoint_param(s)
    if t <= ep.t_s:
        raise ValueError("absorption is only asserted for t > t_s")
    tower = E_tower(t, depth + 1)
    kmax = min(depth, len(tower) - 2)
    orbit = hair_orbit(s, t, kmax, cfg, hair_depth)
    inside = in_omega(orbit, cfg)
    if not inside[-1]:
        return None
    k = len(inside) - 1
    while k > 0 and inside[k - 1]:
        k -= 1
    return k


def omega_hair_cloud(cfg: MapConfig, t_range=(1.0, 4.0), n_t: int = 4000, depth: int = 40,
                     check_depth: int = 3) -> np.ndarray:
    """Points of hairs s = (0,0), c, (0,0), (0,0), ... whose orbits stay in Omega.

    c runs over even cells with 2|c| < psi(E(t_hi)); points are kept when
    iterates 1..check_depth (as far as computable) lie in Omega.
    """
    from .hairs import g_k

    ts = np.linspace(t_range[0], t_range[1], n_t)
    lim = float(psi(max(E_iter(t_range[1], 1), 1.0))) / 2.0
    R = int(math.floor(lim))
    pts = []
    for c1 in range(-R, R + 1):
        for c2 in range(-R, R + 1):
            if (c1 + c2) % 2 or math.hypot(c1, c2) >= lim:
                continue
            s = Itinerary.constant((0, 0), prefix=[(0, 0), (c1, c2)])
            g = g_k(s, ts, depth, cfg)
            keep = np.ones(n_t, dtype=bool)
            for j in range(1, check_depth + 1):
                tj = np.array([_tower_or_nan(t, j) for t in ts])
                ok = np.isfinite(tj)
                if not np.any(ok):
                    break
                orb = g_k(s.shift(j), tj[ok], depth, cfg)
                keep[ok] &= in_omega(orb, cfg)
            pts.append(g[keep])
    return np.concatenate(pts)


def _tower_or_nan(t: float, j: int) -> float:
    """E^j(t) if E^{j+1}(t) is computable, else nan."""
    tower = E_tower(float(t), j + 1)
    return tower[j] if len(tower) == j + 2 else math.nan


@dataclass
class KarpinskaStats:
    k: int
    rho: float
    log_N: float
    log_d: float
    log_r: float

    @property
    def log_ratio(self) -> float:
        return self.log_N + self.rho * self.log_d - 3.0 * self.log_r

    @property
    def N(self) -> float:
        return _safe_exp(self.log_N)

    @property
    def d(self) -> float:
        return _safe_exp(self.log_d)

    @property
    def r(self) -> float:
        return _safe_exp(self.log_r)

    @property
    def ratio(self) -> float:
        return _safe_exp(self.log_ratio)


def _safe_exp(v: float) -> float:
    return math.exp(v) if v < 709 else math.inf


#: kappa of the radius bound: the induction gives length(gamma_0) >= tau^k / (4 prod E^j).
KAPPA = 0.25


def karpinska_cover_stats(s: Itinerary, t: float, k: int, cfg: MapConfig, rho: float = 1.2) -> KarpinskaStats:
    """Covering number, diameter and radius bounds and the ratio N d^rho / r^3.

    N_k = 5 psi(3/2 E^k(t))^2 E^k(t), d_k = 2 sqrt(3) c4 pi / E^k(t),
    r_k = kappa tau^k / prod_{j=1}^{k-1} E^j(t) with tau = c3/2; all in
    log form so that k one past the E-tower overflow still works.
    """
    if rho <= 1:
        raise ValueError("rho must exceed 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    ep = endpoint_param(s)
    if t <= ep.t_s:
        raise ValueError("t must exceed the endpoint parameter")
    lek = log_E_iter(t, k)
    log_psi = math.sqrt(math.log(1.5) + lek)
    log_N = math.log(5.0) + 2.0 * log_psi + lek
    log_d = math.log(2.0 * math.sqrt(3.0) * cfg.c4 * math.pi) - lek
    tau = cfg.c3 / 2.0
    log_r = math.log(KAPPA) + k * math.log(tau) - sum(log_E_iter(t, j) for j in range(1, k))
    return KarpinskaStats(k, rho, log_N, log_d, log_r)
