import numpy as np
import pytest

from zorich import access
from zorich.mapcore import eval_f
from zorich.orbits import BASIN, classify_points
from zorich.symbolic import Itinerary

ZERO = Itinerary.constant((0, 0))


@pytest.fixture(scope="module")
def path(cfg):
    return access.access_path(ZERO, 0.1, 8, cfg)


def test_eta_mu(cfg):
    eta, mu = access.eta_mu(cfg)
    assert eta == pytest.approx(0.03905, abs=1e-5)
    assert mu == pytest.approx(88.66, abs=0.01)


def test_first_crossing(cfg):
    w = np.array([1.0, 1.0, 3.0])
    x = np.array([0.0, 0.0, 3.0])
    y = access.first_crossing(w, x, cfg)
    assert eval_f(y, cfg)[2] == pytest.approx(cfg.M, abs=1e-9)
    with pytest.raises(ValueError):
        access.first_crossing(x, w, cfg)


def test_nearest_even_cell():
    assert access._nearest_even_cell([0.1, 0.2]) == (0, 0)
    assert access._nearest_even_cell([2.1, 1.9]) == (1, 1)
    c = access._nearest_even_cell([2.0, 0.1])
    assert (c[0] + c[1]) % 2 == 0


def test_path_shape(path, cfg):
    assert len(path.segments) == len(path.lengths) == 8
    assert all(L <= b for L, b in zip(path.lengths, path.length_bounds))
    assert min(path.min_ball_ratio) >= 1.0
    assert path.to_csv().splitlines()[0] == "level,index,x1,x2,x3"


def test_path_approaches_target(path, cfg):
    d = path.distances()
    assert all(dk <= 4 * cfg.alpha ** k for k, dk in enumerate(d, start=1))
    assert path.decay_rate() < cfg.alpha


def test_path_in_basin(path, cfg):
    kind, _ = classify_points(np.concatenate(path.segments), 60, cfg)
    assert np.all(kind == BASIN)


def test_anchor_properties(path, cfg):
    props = access.gamma_properties(path, cfg)
    assert props["height"] < 1e-12
    assert props["distance"] <= 4
    assert props["f3_minus_M"] < 1e-8
