import numpy as np
import pytest

from zorich import orbits
from zorich.hairs import g_k
from zorich.mapcore import ConfigurationError, eval_f
from zorich.symbolic import Itinerary


def test_fixed_point(cfg):
    xi = orbits.fixed_point_xi(cfg)
    assert np.linalg.norm(eval_f(xi, cfg) - xi) < 1e-12
    assert xi[2] == pytest.approx(-5.71269625, abs=1e-8)
    assert xi[2] <= cfg.m


def test_fixed_point_margin_violation(cfg):
    with pytest.raises(ConfigurationError):
        orbits.fixed_point_xi(cfg, max_iter=3)


def test_classify_points(cfg):
    pts = np.array([[0.0, 0.0, 0.0],                          # basin at once
                    [0.0, 0.0, 900.0],                        # saturated
                    g_k(Itinerary.constant((0, 0)), 3.0, 40, cfg)])
    kind, index = orbits.classify_points(pts, 30, cfg)
    assert kind.tolist() == [orbits.BASIN, orbits.JULIA, orbits.JULIA]
    assert index[0] == 0


def test_undecided_with_tiny_budget(cfg):
    kind, index = orbits.classify_points(np.array([[0.0, 0.0, 2.0]]), 0, cfg)
    assert kind[0] == orbits.UNDECIDED and index[0] == 0


def test_classify_orbit(cfg):
    v = orbits.classify_orbit(np.array([0.5, 0.5, 1.7]), 40, cfg)
    assert v.name in orbits.KIND_NAMES.values()
    assert len(v.orbit) == v.index + 1


def test_parse_plane():
    assert orbits.parse_plane("x2=0") == (1, 0.0)
    assert orbits.parse_plane("x3=1.5") == (2, 1.5)
    for bad in ("y=0", "x2", "x4=1"):
        with pytest.raises(ValueError):
            orbits.parse_plane(bad)


def test_slice_points_orientation():
    pts = orbits.slice_points((1, 0.0), (0, 1, 0, 1), 2)
    assert np.allclose(pts[:, 1], 0)
    # first row is the top (largest x3)
    assert pts[0, 2] == pytest.approx(0.75) and pts[-1, 2] == pytest.approx(0.25)
    assert pts[0, 0] == pytest.approx(0.25) and pts[1, 0] == pytest.approx(0.75)


def test_shade():
    g = orbits.shade(np.array([0, 0, 1, 2]), np.array([1, 40, 3, 9]), 9)
    assert g.tolist() == [247, 64, 0, 128]


def test_render_independent_of_workers(cfg):
    a, ka = orbits.render_slice("x2=0", (-3, 3, -2, 6), 40, 30, cfg, workers=1)
    b, kb = orbits.render_slice("x2=0", (-3, 3, -2, 6), 40, 30, cfg, workers=4)
    assert a.dtype == np.uint8 and a.shape == (40, 40)
    assert np.array_equal(a, b) and np.array_equal(ka, kb)
    assert (ka == orbits.BASIN).any() and (ka == orbits.JULIA).any()


def test_planar_agreement_small(cfg):
    assert orbits.planar_slice_agreement((-3, 3, -2, 6), 64, 40, cfg) > 0.99
