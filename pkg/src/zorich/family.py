"""Zorich maps with an invariant attracting circle.

Inside the disk of radius s + delta the square-to-hemisphere map is
replaced by the polar form

    h(r cos phi, r sin phi) = (R(r) cos Phi(phi), R(r) sin Phi(phi), sqrt(1 - R(r)^2)).

With t = R(s), w = log(s/t) and a = s sqrt(1 - t^2)/t - w the circle
C(s, w) = {x1^2 + x2^2 = s^2, x3 = w} is invariant under
f = e^{x3} h - a e3, and f restricted to it is the circle map Phi.

Outside the annulus the map is blended back to the base h: the polar
angle follows a cubic Hermite profile in the normalized ray parameter
lambda (lambda = 0 at r = s + delta, 1 on the square boundary) and the
azimuth perturbation Phi(phi) - phi is damped by (1 + cos(pi lambda))/2.
Inside r < s - delta, R continues as a monotone cubic down to R(0) = 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .mapcore import ConfigurationError, EXP_LIMIT, eval_F

PHI_IDENTITY = "identity"
PHI_WIGGLE = "wiggle"


# circle maps ------------------------------------------------------------------------

def _bump(phi):
    """b(phi) with Phi = phi + b: phi^3 sin(pi/phi) on |phi| <= 1/5, then a C^1 decay to 0 at 2/5."""
    phi = np.asarray(phi, dtype=float)
    a = np.abs(phi)
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = np.where(a > 0, phi ** 3 * np.sin(np.pi / np.where(a > 0, phi, 1.0)), 0.0)
    u = a - 0.2
    outer = (np.pi / 5.0) * u * (1.0 - u / 0.2) ** 2
    return np.where(a <= 0.2, inner, np.where(a <= 0.4, outer, 0.0))


def _bump_prime(phi):
    phi = np.asarray(phi, dtype=float)
    a = np.abs(phi)
    safe = np.where(a > 0, phi, 1.0)
    inner = np.where(a > 0, 3 * phi ** 2 * np.sin(np.pi / safe) - np.pi * phi * np.cos(np.pi / safe), 0.0)
    u = a - 0.2
    d_outer = (np.pi / 5.0) * (1.0 - 5.0 * u) * (1.0 - 15.0 * u) * np.sign(phi)
    return np.where(a <= 0.2, inner, np.where(a <= 0.4, d_outer, 0.0))


def _wrap(phi):
    """Representative in (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(phi, dtype=float), 2.0 * np.pi)


def circle_map(kind: str) -> Callable:
    if kind == PHI_IDENTITY:
        return lambda phi: np.asarray(phi, dtype=float)
    if kind == PHI_WIGGLE:
        return lambda phi: np.asarray(phi, dtype=float) + _bump(_wrap(phi))
    raise ValueError(f"unknown circle map {kind!r}")


def circle_map_prime(kind: str) -> Callable:
    if kind == PHI_IDENTITY:
        return lambda phi: np.ones_like(np.asarray(phi, dtype=float))
    if kind == PHI_WIGGLE:
        return lambda phi: 1.0 + _bump_prime(_wrap(phi))
    raise ValueError(f"unknown circle map {kind!r}")


def phi_prime_exact(n: int) -> float:
    """Phi'(1/n) = 1 - (-1)^n pi / n for n >= 5."""
    return 1.0 - (-1) ** n * math.pi / n


# radial profile ---------------------------------------------------------------------

def _hermite(x, x0, x1, y0, y1, m0, m1):
    L = x1 - x0
    s = (x - x0) / L
    h00 = 2 * s ** 3 - 3 * s ** 2 + 1
    h10 = s ** 3 - 2 * s ** 2 + s
    h01 = -2 * s ** 3 + 3 * s ** 2
    h11 = s ** 3 - s ** 2
    return h00 * y0 + h10 * L * m0 + h01 * y1 + h11 * L * m1


def _hermite_prime(x, x0, x1, y0, y1, m0, m1):
    L = x1 - x0
    s = (x - x0) / L
    d00 = (6 * s ** 2 - 6 * s) / L
    d10 = 3 * s ** 2 - 4 * s + 1
    d01 = (-6 * s ** 2 + 6 * s) / L
    d11 = 3 * s ** 2 - 2 * s
    return d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1


@dataclass(frozen=True)
class AnnulusFamilyConfig:
    """Parameters of the family; t, w, a and the bounds are derived."""

    s: float = 0.2
    delta: float = 0.05
    t: float = 0.9
    R_prime: float = 0.4
    phi: str = PHI_WIGGLE

    def __post_init__(self):
        checks = [
            (0 < self.delta, "0 < delta"),
            (self.delta < self.s, "delta < s"),
            (self.s < 0.25, "s < 1/4"),
            (0 < self.t < 1, "0 < t < 1"),
            (self.t > 4 * self.s, "t > 4s"),
            (self.R_prime > 0, "R'(s) > 0"),
            (self.R_prime < self.R_prime_limit, "R'(s) < (t/4s) sqrt((1-t^2)/(2-t^2))"),
            (self.t + self.R_prime * self.delta < 1, "R < 1 on the annulus"),
            (self.t - self.R_prime * self.delta > 0, "R > 0 on the annulus"),
        ]
        for ok, name in checks:
            if not ok:
                raise ConfigurationError(f"annulus family violates {name}")
        if self.phi not in (PHI_IDENTITY, PHI_WIGGLE):
            raise ConfigurationError(f"unknown circle map {self.phi!r}")

    @property
    def R_prime_limit(self) -> float:
        t = self.t
        return t / (4 * self.s) * math.sqrt((1 - t * t) / (2 - t * t))

    @property
    def w(self) -> float:
        return math.log(self.s / self.t)

    @property
    def a(self) -> float:
        return self.s * math.sqrt(1 - self.t ** 2) / self.t - self.w

    @property
    def radial_derivative_formula(self) -> float:
        """(s/t) R'(s) sqrt((2 - t^2)/(1 - t^2)), the stated |df/dr| on the circle."""
        t = self.t
        return self.s / t * self.R_prime * math.sqrt((2 - t * t) / (1 - t * t))

    @property
    def radial_derivative_exact(self) -> float:
        """|df/dr| on the circle: (s/t) R'(s) / sqrt(1 - t^2).

        The third component of dh/dr is -R R' / sqrt(1 - R^2); the stated
        formula drops the factor R, which makes it an upper bound.
        """
        return self.s / self.t * self.R_prime / math.sqrt(1 - self.t ** 2)

    @property
    def vertical_derivative(self) -> float:
        return self.s / self.t

    hypotheses_ok = False

    def to_dict(self) -> dict:
        return {
            "s": self.s, "delta": self.delta, "t": self.t, "R_prime": self.R_prime, "phi": self.phi,
            "w": self.w, "a": self.a, "s_over_t": self.s / self.t,
            "radial_derivative_formula": self.radial_derivative_formula,
            "radial_derivative_exact": self.radial_derivative_exact,
            "R_prime_limit": self.R_prime_limit,
            "hypotheses_ok": False,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


class AnnulusGeometry:
    """Square-to-hemisphere map carrying the polar form on the disk r < s + delta."""

    name = "annulus"

    def __init__(self, cfg: AnnulusFamilyConfig):
        self.cfg = cfg
        self.Phi = circle_map(cfg.phi)
        self.r_in = cfg.s - cfg.delta
        self.r_out = cfg.s + cfg.delta
        self.R_in = self.R(self.r_in)
        self.R_out = self.R(self.r_out)
        # inner cubic: R(0) = 0, slope 1.5 x secant at 0 (monotone), C^1 at r_in
        self._m0 = 1.5 * self.R_in / self.r_in

    def R(self, r):
        """Radial profile on the annulus: linear through (s, t) with slope R'(s)."""
        c = self.cfg
        return c.t + c.R_prime * (np.asarray(r, dtype=float) - c.s)

    def R_full(self, r):
        r = np.asarray(r, dtype=float)
        inner = _hermite(r, 0.0, self.r_in, 0.0, self.R_in, self._m0, self.cfg.R_prime)
        return np.where(r < self.r_in, inner, self.R(r))

    def R_full_prime(self, r):
        r = np.asarray(r, dtype=float)
        inner = _hermite_prime(r, 0.0, self.r_in, 0.0, self.R_in, self._m0, self.cfg.R_prime)
        return np.where(r < self.r_in, inner, self.cfg.R_prime)

    def forward(self, p):
        p = np.asarray(p, dtype=float)
        x, y = p[..., 0], p[..., 1]
        r = np.hypot(x, y)
        phi = np.arctan2(y, x)
        rho_max = np.minimum(1.0, np.maximum(np.abs(x), np.abs(y)))
        # distance from the origin to the square boundary along the ray
        r_edge = np.where(r > 0, r / np.where(rho_max > 0, rho_max, 1.0), 1.0)
        theta_out = np.arcsin(self.R_out)
        lam = np.clip((r - self.r_out) / (r_edge - self.r_out), 0.0, 1.0)
        dtheta_dr = self.cfg.R_prime / math.sqrt(1 - self.R_out ** 2)
        theta_outer = _hermite(lam, 0.0, 1.0, theta_out, np.pi / 2,
                               dtheta_dr * (r_edge - self.r_out), np.pi / 2 - theta_out)
        inside = r <= self.r_out
        Rv = np.clip(self.R_full(np.minimum(r, self.r_out)), 0.0, 1.0)
        theta = np.where(inside, np.arcsin(Rv), theta_outer)
        weight = np.where(inside, 1.0, 0.5 * (1.0 + np.cos(np.pi * lam)))
        psi = phi + weight * (self.Phi(phi) - phi)
        st = np.sin(theta)
        out = np.empty(p.shape[:-1] + (3,))
        out[..., 0] = st * np.cos(psi)
        out[..., 1] = st * np.sin(psi)
        out[..., 2] = np.cos(theta)
        return out

    def inverse(self, u):
        raise NotImplementedError("inverse branches are not available for the annulus family")


@dataclass
class AnnulusFamily:
    cfg: AnnulusFamilyConfig
    geometry: AnnulusGeometry

    def f(self, x):
        x = np.asarray(x, dtype=float)
        out = eval_F(x, self.geometry)
        out[..., 2] -= self.cfg.a
        return out

    def circle_points(self, phis) -> np.ndarray:
        phis = np.asarray(phis, dtype=float)
        c = self.cfg
        return np.stack([c.s * np.cos(phis), c.s * np.sin(phis), np.full_like(phis, c.w)], axis=-1)

    def dist_to_circle(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = np.hypot(x[..., 0], x[..., 1])
        return np.hypot(r - self.cfg.s, x[..., 2] - self.cfg.w)


def build_annulus_family(params: Optional[dict] = None, *, verify_samples: int = 20_000,
                         seed: int = 0) -> AnnulusFamily:
    """Validate parameters, build the geometry and re-check bilipschitz bounds by sampling."""
    params = dict(params or {})
    known = {"s", "delta", "t", "R_prime", "phi"}
    extra = set(params) - known
    if extra:
        raise ConfigurationError(f"unknown family parameters: {sorted(extra)}")
    cfg = AnnulusFamilyConfig(**params)
    fam = AnnulusFamily(cfg, AnnulusGeometry(cfg))
    lo, hi = bilipschitz_sample(fam, verify_samples, seed)
    if not (lo > 0 and math.isfinite(hi)):
        raise ConfigurationError("sampled geometry is not bilipschitz")
    return fam


def bilipschitz_sample(fam: AnnulusFamily, n: int = 20_000, seed: int = 0, step: float = 1e-4):
    """Min and max of |h(p) - h(q)| / |p - q| over random short pairs in the square."""
    rng = np.random.default_rng(seed)
    p = rng.uniform(-1 + step, 1 - step, (n, 2))
    d = rng.normal(size=(n, 2))
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    q = p + step * d
    g = fam.geometry
    ratio = np.linalg.norm(g.forward(p) - g.forward(q), axis=-1) / step
    return float(ratio.min()), float(ratio.max())


# dynamics on and near the circle ----------------------------------------------------------

@dataclass
class CircleFixedPoint:
    n: int
    point: np.ndarray
    multiplier: float
    multiplier_exact: float
    kind: str
    residual: float


def circle_invariance(fam: AnnulusFamily, n: int = 1000) -> float:
    """max distance of f(C) from C over n sample points."""
    phis = np.linspace(-np.pi, np.pi, n, endpoint=False)
    return float(fam.dist_to_circle(fam.f(fam.circle_points(phis))).max())


def circle_dynamics(fam: AnnulusFamily, n_range) -> List[CircleFixedPoint]:
    """Fixed points u_n at phi_n = 1/n with multiplier Phi'(phi_n) and type."""
    if fam.cfg.phi != PHI_WIGGLE:
        raise ValueError("fixed points u_n need the wiggle circle map")
    dPhi = circle_map_prime(fam.cfg.phi)
    out = []
    for n in n_range:
        if n < 5:
            raise ValueError("n must be >= 5")
        u = fam.circle_points(np.array([1.0 / n]))[0]
        mult = float(dPhi(1.0 / n))
        transversal = max(fam.cfg.radial_derivative_formula, fam.cfg.vertical_derivative)
        kind = "attracting" if mult < 1 and transversal < 1 else "saddle"
        out.append(CircleFixedPoint(n, u, mult, phi_prime_exact(n), kind,
                                    float(np.linalg.norm(fam.f(u) - u))))
    return out


def orbit(fam: AnnulusFamily, x0, steps: int) -> np.ndarray:
    xs = [np.asarray(x0, dtype=float)]
    for _ in range(steps):
        xs.append(fam.f(xs[-1]))
    return np.array(xs)


@dataclass
class AttractionReport:
    eps: float
    max_ratio: float
    samples: int
    converged: bool
    final_distance: float


def local_attraction_check(fam: AnnulusFamily, eps: float = 1e-2, samples: int = 10_000,
                           seed: int = 0, steps: int = 200) -> AttractionReport:
    """Distance-to-circle contraction over a tube of radius eps, and 200-step convergence."""
    rng = np.random.default_rng(seed)
    phi = rng.uniform(-np.pi, np.pi, samples)
    ang = rng.uniform(0, 2 * np.pi, samples)
    rad = eps * np.sqrt(rng.uniform(0, 1, samples))
    r = fam.cfg.s + rad * np.cos(ang)
    x = np.stack([r * np.cos(phi), r * np.sin(phi), fam.cfg.w + rad * np.sin(ang)], axis=-1)
    d0 = fam.dist_to_circle(x)
    d1 = fam.dist_to_circle(fam.f(x))
    ok = d0 > 0
    ratio = float(np.max(d1[ok] / d0[ok]))
    if ratio > 0.9:
        raise ConfigurationError(f"tube contraction ratio {ratio:.3g} > 0.9")
    y = x.copy()
    for _ in range(steps):
        y = fam.f(y)
    final = float(fam.dist_to_circle(y).max())
    return AttractionReport(eps, ratio, samples, final < 1e-8, final)


def radial_derivative_fd(fam: AnnulusFamily, phi: float, step: float = 1e-6) -> float:
    """|df/dr| at (s cos phi, s sin phi, w) by central differences."""
    c = fam.cfg
    e = np.array([math.cos(phi), math.sin(phi), 0.0])
    x = fam.circle_points(np.array([phi]))[0]
    return float(np.linalg.norm(fam.f(x + step * e) - fam.f(x - step * e)) / (2 * step))


def vertical_derivative_fd(fam: AnnulusFamily, phi: float, step: float = 1e-6) -> float:
    e = np.array([0.0, 0.0, 1.0])
    x = fam.circle_points(np.array([phi]))[0]
    return float(np.linalg.norm(fam.f(x + step * e) - fam.f(x - step * e)) / (2 * step))
