import math

import numpy as np
import pytest

from zorich import geometry as geo
from zorich.mapcore import (ConfigurationError, EscapeOverflow, MapConfig, cell_of, default_config,
                            derive_constants, dilatation_estimate, eval_F, eval_f, jacobian_f, lam)


def test_default_constants(cfg):
    assert cfg.alpha == 0.5
    assert cfg.a == pytest.approx(5.716)
    assert cfg.m == pytest.approx(-1.33725, abs=1e-5)
    assert cfg.M == pytest.approx(1.47670, abs=1e-5)
    assert cfg.c1 <= cfg.c2
    assert cfg.hypotheses_ok
    assert cfg.c7 == pytest.approx(2 + math.log(cfg.M + cfg.a))
    assert cfg.c9 == pytest.approx(cfg.c7 + cfg.c8 / (1 - cfg.alpha))


def test_config_roundtrip(cfg):
    assert MapConfig.from_json(cfg.to_json()) == cfg
    assert MapConfig.from_dict(cfg.to_dict()) == cfg


def test_config_validation(cfg):
    d = cfg.to_dict()
    with pytest.raises(ConfigurationError):
        MapConfig.from_dict({**d, "alpha": 1.5})
    with pytest.raises(ConfigurationError):
        MapConfig.from_dict({**d, "m": 3.0})
    with pytest.raises(ConfigurationError):
        MapConfig.from_dict({k: v for k, v in d.items() if k != "c4"})
    with pytest.raises(ConfigurationError):
        MapConfig.from_dict({**d, "extra": 1.0})


def test_derive_constants_errors():
    with pytest.raises(ConfigurationError):
        derive_constants(1.2)
    with pytest.raises(ValueError):
        derive_constants(0.5, 16)
    with pytest.raises(ConfigurationError):
        derive_constants(0.5, a=1.0)


def test_smaller_alpha_widens_halfspaces():
    c = derive_constants(0.3)
    base = default_config()
    assert c.m < base.m and c.M > base.M
    assert c.a >= math.exp(c.M) - c.m


def test_cell_of_folding():
    r, u = cell_of(np.array([0.2, 1.5, 2.5, -3.2]), np.array([0.0, -0.5, 4.0, 0.9]))
    assert r.tolist() == [[0, 0], [1, 0], [1, 2], [-2, 0]]
    assert np.allclose(u, [[0.2, 0.0], [0.5, -0.5], [-0.5, 0.0], [0.8, 0.9]])
    # faces belong to the smaller index
    r, _ = cell_of(1.0, -1.0)
    assert r.tolist() == [0, -1]


def test_F_on_axis_and_sign_flip():
    assert np.allclose(eval_F([0.0, 0.0, 1.0]), [0, 0, math.e])
    assert np.allclose(eval_F([2.0, 0.0, 0.0]), [0, 0, -1])
    assert np.allclose(eval_F([2.0, 2.0, 0.0]), [0, 0, 1])


def test_overflow_modes():
    with pytest.raises(EscapeOverflow):
        eval_F([0.0, 0.0, 800.0])
    out = eval_F(np.array([[0.0, 0.0, 800.0], [0.0, 0.0, 1.0]]), overflow="inf")
    assert np.isinf(out[0, 2]) and np.isfinite(out[1]).all()


def test_lam_inverts_f(cfg):
    rng = np.random.default_rng(0)
    y = rng.uniform([-20, -20, cfg.M], [20, 20, 30], (500, 3))
    for r in ([0, 0], [2, 0], [-3, 1], [5, -7]):
        x = lam(y, np.array(r), cfg)
        assert np.allclose(eval_f(x, cfg), y, rtol=0, atol=1e-10 * np.abs(y).max())
        assert np.all(cell_of(x[:, 0], x[:, 1])[0] == r)


def test_lam_domain(cfg):
    with pytest.raises(geo.DomainError):
        lam([0.0, 0.0, cfg.M - 1.0], np.array([0, 0]), cfg)
    with pytest.raises(geo.DomainError):
        lam([0.0, 0.0, 3.0], np.array([1, 0]), cfg)


def test_jacobian_scales_with_height(cfg):
    x = np.array([[0.3, 0.1, 0.0], [0.3, 0.1, 2.0]])
    J = jacobian_f(x, cfg)
    assert np.allclose(J[1], J[0] * math.exp(2.0))


def test_dilatation_is_bounded():
    K_O, K_I = dilatation_estimate(2000, ((-1, -1, -1), (1, 1, 1)))
    assert 1.0 <= K_O < 10 and 1.0 <= K_I < 10
