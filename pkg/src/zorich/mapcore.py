"""The Zorich map F, its translate f_a = F - (0, 0, a), and inverse branches.

F is defined on the beam Q x R by F(x) = exp(x3) h(x1, x2) and extended to
all of R^3 by reflecting the beam across its side faces; each reflection
of the domain is matched by a reflection of the image in the plane
x3 = 0.  Concretely a point with horizontal coordinates (x1, x2) lies in
the cell P(r) with r = round(x / 2), is folded to

    u_i = (-1)**r_i * (x_i - 2 r_i)  in [-1, 1]

and mapped to exp(x3) * (h1(u), h2(u), (-1)**(r1 + r2) * h3(u)).
Cells with r1 + r2 even go to the upper half-space, odd ones to the lower.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Callable, Optional

import numpy as np

from . import geometry as geo

#: Largest exponent evaluated; beyond this an orbit is treated as escaping.
EXP_LIMIT = 700.0

#: Rejection radius around the nonsmooth set, in folded coordinates.
NONSMOOTH_RADIUS = 1e-4

#: Central-difference step (relative).
FD_STEP = 1e-6


class EscapeOverflow(OverflowError):
    """exp(x3) would leave the double-precision range."""


class ConfigurationError(ValueError):
    pass


class Geometry:
    """The base square-to-hemisphere map and its inverse."""

    name = "base"

    def forward(self, p):
        return geo.square_to_hemisphere(p)

    def inverse(self, u):
        return geo.hemisphere_to_square(u)


BASE_GEOMETRY = Geometry()


@dataclass(frozen=True)
class MapConfig:
    """Parameter a together with the constants of the derivative bounds.

    ``m``/``M`` are the heights below/above which F contracts/expands by
    ``alpha``; ``c1``/``c2`` bound the singular values of DF at height 0;
    ``c3``..``c6`` bound the derivative and Jacobian of the inverse branch
    on H_{>=M} (see :func:`derive_constants`).
    """

    a: float
    m: float
    M: float
    alpha: float
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float

    def __post_init__(self):
        if not self.m < self.M:
            raise ConfigurationError("need m < M")
        if not 0 < self.alpha < 1:
            raise ConfigurationError("alpha must lie in (0, 1)")
        if not 0 < self.c1 <= self.c2:
            raise ConfigurationError("need 0 < c1 <= c2")

    @property
    def hypotheses_ok(self) -> bool:
        return self.a >= math.exp(self.M) - self.m

    # constants of the hair construction
    @property
    def c7(self) -> float:
        return 2.0 + math.log(self.M + self.a)

    @property
    def c8(self) -> float:
        """Supremum over X >= 0 of c4*pi*(X + c7 + M) / max(X - c7, M).

        The quotient increases while the denominator is pinned at M and
        decreases afterwards, so the supremum sits at X = c7 + M.
        """
        return self.c4 * math.pi * 2.0 * (self.c7 + self.M) / self.M

    @property
    def c9(self) -> float:
        return self.c7 + self.c8 / (1.0 - self.alpha)

    @property
    def eta(self) -> float:
        """Density loss factor c5 / (216 c6) of one pull-back."""
        return self.c5 / (216.0 * self.c6)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps({k: float(v) for k, v in asdict(self).items()}, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "MapConfig":
        names = {f.name for f in fields(cls)}
        missing = names - set(d)
        extra = set(d) - names
        if missing or extra:
            raise ConfigurationError(f"bad MapConfig fields: missing={sorted(missing)} extra={sorted(extra)}")
        return cls(**{k: float(d[k]) for k in names})

    @classmethod
    def from_json(cls, text: str) -> "MapConfig":
        return cls.from_dict(json.loads(text))

    def with_a(self, a: float) -> "MapConfig":
        """Copy with a larger parameter (constants c3, c5 re-derived)."""
        if a < self.a:
            raise ConfigurationError("a may only be increased")
        ratio = 1.0 + a / self.M
        return replace(self, a=a, c3=1.0 / (self.c2 * ratio), c5=1.0 / (self.c2 * ratio) ** 3)


def norm3(z) -> np.ndarray:
    """Euclidean norm along the last axis, safe for entries near 1e300."""
    z = np.asarray(z, dtype=float)
    scale = np.max(np.abs(z), axis=-1)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * np.sqrt(np.sum((z / safe[..., None]) ** 2, axis=-1))


def cell_of(x1, x2):
    """Cell index r and folded coordinates u of horizontal positions.

    Points on a face x_i = 2k + 1 are assigned to the smaller index k.
    Returns integer array r and float array u, each of shape (..., 2).
    """
    x = np.stack(np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float)), axis=-1)
    r = np.ceil(x / 2.0 - 0.5).astype(np.int64)
    sign = 1 - 2 * (r & 1)
    u = sign * (x - 2.0 * r)
    return r, u


def parity(r) -> np.ndarray:
    r = np.asarray(r)
    return (r[..., 0] + r[..., 1]) & 1


def eval_F(x, geometry: Optional[Geometry] = None, *, overflow: str = "raise") -> np.ndarray:
    """Evaluate the Zorich map F.

    ``overflow='raise'`` raises :class:`EscapeOverflow` when some x3 exceeds
    :data:`EXP_LIMIT`; ``overflow='inf'`` returns inf coordinates there.
    """
    g = geometry or BASE_GEOMETRY
    x = np.asarray(x, dtype=float)
    big = x[..., 2] > EXP_LIMIT
    if np.any(big) and overflow == "raise":
        raise EscapeOverflow(f"x3 = {float(np.max(x[..., 2])):.6g} exceeds {EXP_LIMIT}")
    r, u = cell_of(x[..., 0], x[..., 1])
    w = g.forward(u)
    w[..., 2] *= 1 - 2 * parity(r)
    scale = np.exp(np.minimum(x[..., 2], EXP_LIMIT))
    out = w * scale[..., None]
    if np.any(big):
        out = np.where(big[..., None], np.copysign(np.inf, out), out)
    return out


def eval_f(x, cfg: MapConfig, geometry: Optional[Geometry] = None, *, overflow: str = "raise") -> np.ndarray:
    out = eval_F(x, geometry, overflow=overflow)
    out[..., 2] -= cfg.a
    return out


def lam(y, r, cfg: MapConfig, geometry: Optional[Geometry] = None, *, check: bool = True) -> np.ndarray:
    """Inverse branch of f from H_{>=M} into the beam T(r) = P(r) x (M, inf).

    ``r`` must have even parity; it broadcasts against ``y``.
    """
    g = geometry or BASE_GEOMETRY
    y = np.asarray(y, dtype=float)
    r = np.asarray(r, dtype=np.int64)
    if check:
        if np.any(y[..., 2] < cfg.M - 1e-12 * max(1.0, abs(cfg.M))):
            raise geo.DomainError("inverse branch needs y3 >= M")
        if np.any(parity(r) != 0):
            raise geo.DomainError("inverse branch needs an even cell index")
    z = y.copy()
    z[..., 2] = z[..., 2] + cfg.a
    n = norm3(z)
    u = g.inverse(z / n[..., None])
    sign = 1 - 2 * (r & 1)
    out = np.empty(np.broadcast_shapes(y.shape, r.shape[:-1] + (3,)))
    out[..., :2] = 2.0 * r + sign * u
    out[..., 2] = np.log(n)
    return out


def jacobian_fd(func: Callable, x, step: float = FD_STEP, relative: bool = True) -> np.ndarray:
    """Central-difference Jacobian of a map R^3 -> R^3, batched.

    Returns shape (..., 3, 3) with ``J[..., i, j] = d func_i / d x_j``.
    """
    x = np.asarray(x, dtype=float)
    if relative:
        hs = step * np.maximum(1.0, np.abs(x))
    else:
        hs = np.full(x.shape, step)
    cols = []
    for j in range(3):
        e = np.zeros_like(x)
        e[..., j] = hs[..., j]
        cols.append((func(x + e) - func(x - e)) / (2.0 * hs[..., j])[..., None])
    return np.stack(cols, axis=-1)


def jacobian_f(x, cfg: MapConfig, geometry: Optional[Geometry] = None) -> np.ndarray:
    # f differs from F by a constant, and DF(x) = exp(x3) DF(x1, x2, 0)
    x = np.asarray(x, dtype=float)
    x0 = x.copy()
    x0[..., 2] = 0.0
    J0 = jacobian_fd(lambda p: eval_F(p, geometry), x0, relative=False)
    return J0 * np.exp(x[..., 2])[..., None, None]


def jacobian_lambda(y, r, cfg: MapConfig, geometry: Optional[Geometry] = None) -> np.ndarray:
    return jacobian_fd(lambda p: lam(p, r, cfg, geometry, check=False), y)


def near_nonsmooth(x, radius: float = NONSMOOTH_RADIUS) -> np.ndarray:
    """Folded position close to a diagonal of Q or to a beam face."""
    x = np.asarray(x, dtype=float)
    _, u = cell_of(x[..., 0], x[..., 1])
    diag = geo.on_nonsmooth_set(u, radius)
    face = np.max(np.abs(u), axis=-1) > 1.0 - radius
    return diag | face


def _smooth_grid(resolution: int) -> np.ndarray:
    c = -1.0 + (np.arange(resolution) + 0.5) * (2.0 / resolution)
    g1, g2 = np.meshgrid(c, c, indexing="ij")
    p = np.stack([g1.ravel(), g2.ravel()], axis=-1)
    return p[~geo.on_nonsmooth_set(p, NONSMOOTH_RADIUS)]


def singular_value_range(resolution: int = 256, geometry: Optional[Geometry] = None):
    """Min and max singular value (and Jacobian) of DF over height 0."""
    p = _smooth_grid(resolution)
    x = np.concatenate([p, np.zeros((len(p), 1))], axis=1)
    J = jacobian_fd(lambda q: eval_F(q, geometry), x, relative=False)
    sv = np.linalg.svd(J, compute_uv=False)
    det = np.abs(np.linalg.det(J))
    return float(sv[:, -1].min()), float(sv[:, 0].max()), float(det.min()), float(det.max())


def derive_constants(alpha_target: float = 0.5, resolution: int = 256, *, margin: float = 0.05,
                     a: Optional[float] = None) -> MapConfig:
    """Constants for the base geometry from a sampled derivative.

    c1/c2 are the sampled extreme singular values of DF(., ., 0) widened
    by ``margin``.  Then |DF| <= alpha below m = log(alpha/c2) and
    l(DF) >= 1/alpha above M = log(1/(alpha c1)); a defaults to
    e^M - m rounded up to three decimals.
    """
    if resolution < 64:
        raise ValueError("resolution must be >= 64")
    if not 0 < alpha_target < 1:
        raise ConfigurationError("alpha must lie in (0, 1)")
    smin, smax, _, _ = singular_value_range(resolution)
    if not smin > 0:
        raise ConfigurationError("degenerate derivative sample (c1 <= 0)")
    c1 = smin / (1.0 + margin)
    c2 = smax * (1.0 + margin)
    m = math.log(alpha_target / c2)
    M = math.log(1.0 / (alpha_target * c1))
    if M <= 0:
        raise ConfigurationError("M <= 0; choose a smaller alpha")
    a_min = math.ceil((math.exp(M) - m) * 1000.0) / 1000.0
    if a is None:
        a = a_min
    elif a < math.exp(M) - m:
        raise ConfigurationError("a must satisfy a >= e^M - m")
    # |x + a e3| lies in [|x|, |x| (1 + a/M)] on H_{>=M}
    ratio = 1.0 + a / M
    return MapConfig(
        a=a, m=m, M=M, alpha=alpha_target, c1=c1, c2=c2,
        c3=1.0 / (c2 * ratio), c4=1.0 / c1,
        c5=1.0 / (c2 * ratio) ** 3, c6=1.0 / c1 ** 3,
    )


_DEFAULT: dict = {}


def default_config() -> MapConfig:
    """Cached ``derive_constants()`` with the default arguments."""
    if "cfg" not in _DEFAULT:
        _DEFAULT["cfg"] = derive_constants()
    return _DEFAULT["cfg"]


def dilatation_estimate(samples: int, region, *, seed: int = 0, geometry: Optional[Geometry] = None):
    """Sampled outer and inner dilatation of f over a box.

    ``region`` is ((lo1, lo2, lo3), (hi1, hi2, hi3)).  Points near the
    nonsmooth set are rejected before differencing.
    """
    rng = np.random.default_rng(seed)
    lo, hi = (np.asarray(v, float) for v in region)
    x = rng.uniform(lo, hi, size=(samples, 3))
    x = x[~near_nonsmooth(x)]
    J = jacobian_fd(lambda q: eval_F(q, geometry), x)
    sv = np.linalg.svd(J, compute_uv=False)
    det = np.abs(np.linalg.det(J))
    K_O = np.max(sv[:, 0] ** 3 / det)
    K_I = np.max(det / sv[:, -1] ** 3)
    return float(K_O), float(K_I)
