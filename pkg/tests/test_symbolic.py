import math

import pytest

from zorich.symbolic import (E, E_inv, E_inv_iter, E_iter, E_tower, Itinerary, Saturated, endpoint_param,
                             is_admissible, log_E_iter, t_k_of)


def test_E_functions():
    assert E(0.0) == 0.0
    assert E_inv(E(1.3)) == pytest.approx(1.3)
    assert E_iter(1.0, 2) == pytest.approx(math.expm1(math.expm1(1.0)))
    assert E_inv_iter(E_iter(0.7, 3), 3) == pytest.approx(0.7)
    assert log_E_iter(1.0, 3) == pytest.approx(math.log(E_iter(1.0, 3)))


def test_saturation():
    with pytest.raises(Saturated) as exc:
        E_iter(1.0, 6)
    assert exc.value.index == 5
    tower = E_tower(1.0, 10)
    assert len(tower) == 5 and tower[-1] > 1e40
    # one level past the tower is still available in log form
    assert log_E_iter(1.0, 5) == pytest.approx(tower[-1])


def test_itinerary_access_and_shift():
    s = Itinerary.periodic([(0, 0), (2, 0)], prefix=[(4, 2)])
    assert s.entries(5) == [(4, 2), (0, 0), (2, 0), (0, 0), (2, 0)]
    assert s.shift(2).entries(3) == [(2, 0), (0, 0), (2, 0)]
    assert s.bounded
    with pytest.raises(ValueError):
        Itinerary.constant((1, 0))


def test_itinerary_dict_roundtrip():
    for s in [Itinerary.constant((2, 2), prefix=[(0, 0)]),
              Itinerary.periodic([(2, 0), (0, 2), (-2, 0)]),
              Itinerary.generator("power", base=3.0).shift(2)]:
        back = Itinerary.from_dict(s.to_dict())
        assert back == s
        assert back.entries(4) == s.entries(4)
    with pytest.raises(ValueError):
        Itinerary.from_dict({"prefix": [], "tail": {"kind": "spiral"}})


def test_generators():
    p = Itinerary.generator("power", base=3.0)
    assert p.entries(4) == [(2, 0), (4, 0), (10, 0), (28, 0)]
    assert not p.bounded
    assert p.magnitude(3) == 28.0


def test_endpoint_param():
    assert endpoint_param(Itinerary.constant((4, 0))).t_s == 0.0
    ep = endpoint_param(Itinerary.generator("tower", t0=1.0))
    assert ep.partial and ep.t_s == pytest.approx(1.0)
    assert t_k_of(Itinerary.constant((2, 0)), 0) == 4.0
    assert t_k_of(Itinerary.constant((2, 0)), 1) == pytest.approx(math.log1p(4.0))


def test_admissibility():
    assert is_admissible(Itinerary.constant((0, 0)), 0.5).admissible
    assert is_admissible(Itinerary.generator("power", base=3.0), 1.0).admissible
    with pytest.raises(ValueError):
        is_admissible(Itinerary.constant((0, 0)), -1.0)
