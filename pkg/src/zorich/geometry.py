"""Square-to-hemisphere parametrization used to build the Zorich map.

The map sends the square Q = [-1, 1]^2 onto the closed upper unit
hemisphere.  Writing rho for the max-norm of p and d for the unit
Euclidean direction of p,

    h(p) = (d * sin(pi*rho/2), cos(pi*rho/2)).

Concentric max-norm squares go to circles of latitude, the boundary of Q
goes to the equator and the origin goes to the north pole.  All functions
accept arrays whose trailing axis holds the coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Slack allowed when validating domains (points on dQ, unit vectors).
DOMAIN_TOL = 1e-12


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a map."""


@dataclass(frozen=True)
class LipschitzStats:
    lower: float
    upper: float
    samples: int

    @property
    def ratio(self) -> float:
        return self.upper / self.lower


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dim:
        raise ValueError(f"expected trailing dimension {dim}, got shape {x.shape}")
    return x


def square_to_hemisphere(p, *, check: bool = True) -> np.ndarray:
    """Evaluate h on points of the square.

    Parameters
    ----------
    p : array_like, shape (..., 2)
    check : bool
        Raise :class:`DomainError` for points outside Q.

    Returns
    -------
    ndarray, shape (..., 3)
    """
    p = _as_points(p, 2)
    rho = np.max(np.abs(p), axis=-1)
    if check and np.any(rho > 1 + DOMAIN_TOL):
        raise DomainError("point outside the square [-1, 1]^2")
    rho = np.minimum(rho, 1.0)
    norm = np.hypot(p[..., 0], p[..., 1])
    safe = np.where(norm > 0, norm, 1.0)
    angle = 0.5 * np.pi * rho
    s = np.sin(angle) / safe
    out = np.empty(p.shape[:-1] + (3,))
    out[..., 0] = p[..., 0] * s
    out[..., 1] = p[..., 1] * s
    out[..., 2] = np.cos(angle)
    return out


def hemisphere_to_square(u, *, check: bool = True) -> np.ndarray:
    """Closed-form inverse of :func:`square_to_hemisphere`.

    The polar angle is recovered with ``arctan2`` rather than ``arccos`` so
    that points close to the pole keep full relative precision.
    """
    u = _as_points(u, 3)
    if check:
        if np.any(u[..., 2] < -DOMAIN_TOL):
            raise DomainError("point below the equator")
        if np.any(np.abs(np.linalg.norm(u, axis=-1) - 1.0) > 1e-9):
            raise DomainError("point not on the unit sphere")
    horiz = np.hypot(u[..., 0], u[..., 1])
    rho = np.arctan2(horiz, np.maximum(u[..., 2], 0.0)) * (2.0 / np.pi)
    safe = np.where(horiz > 0, horiz, 1.0)
    d1 = u[..., 0] / safe
    d2 = u[..., 1] / safe
    dmax = np.maximum(np.abs(d1), np.abs(d2))
    scale = np.where(horiz > 0, rho / np.where(dmax > 0, dmax, 1.0), 0.0)
    return np.stack([d1 * scale, d2 * scale], axis=-1)


def on_nonsmooth_set(p, radius: float = 1e-4) -> np.ndarray:
    """Points within ``radius`` of the diagonals |p1| = |p2| (which contain
    the origin), where h is not differentiable."""
    p = np.asarray(p, dtype=float)
    return np.abs(np.abs(p[..., 0]) - np.abs(p[..., 1])) < radius


def sample_lipschitz(resolution: int, *, segment: bool = False) -> LipschitzStats:
    """Extremes of the stretch ratio |h(p) - h(q)| / |p - q| over grid edges.

    A uniform ``(resolution + 1)``-point grid is laid on Q (or on the
    segment from (0, 0) to (1, 0) when ``segment`` is set) and every pair of
    horizontally or vertically adjacent nodes is used, except pairs whose
    segment crosses a diagonal |p1| = |p2|.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if segment:
        xs = np.linspace(0.0, 1.0, resolution + 1)
        pts = np.stack([xs, np.zeros_like(xs)], axis=-1)
        pairs = [(pts[:-1], pts[1:])]
    else:
        xs = np.linspace(-1.0, 1.0, resolution + 1)
        g1, g2 = np.meshgrid(xs, xs, indexing="ij")
        grid = np.stack([g1, g2], axis=-1)
        pairs = [(grid[:-1, :], grid[1:, :]), (grid[:, :-1], grid[:, 1:])]

    ratios = []
    for a, b in pairs:
        a = a.reshape(-1, 2)
        b = b.reshape(-1, 2)
        # sign of |p1| - |p2| must agree at both ends (and not vanish)
        sa = np.abs(a[:, 0]) - np.abs(a[:, 1])
        sb = np.abs(b[:, 0]) - np.abs(b[:, 1])
        keep = sa * sb > 0
        if segment:
            keep = np.ones(len(a), dtype=bool)
        a, b = a[keep], b[keep]
        num = np.linalg.norm(square_to_hemisphere(a) - square_to_hemisphere(b), axis=-1)
        den = np.linalg.norm(a - b, axis=-1)
        ratios.append(num / den)
    r = np.concatenate(ratios)
    return LipschitzStats(float(r.min()), float(r.max()), int(r.size))
