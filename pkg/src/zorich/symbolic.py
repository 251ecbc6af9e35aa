"""Growth function E(t) = e^t - 1, itineraries and endpoint parameters.

An itinerary is a sequence s_0 s_1 ... of cells (s1, s2) with s1 + s2
even.  Infinite sequences are represented by a finite prefix followed by
a tail rule: constant, periodic, or a generator returning s_k for any k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .mapcore import EXP_LIMIT

Cell = Tuple[int, int]


class Saturated(OverflowError):
    """An E-tower left the double-precision range.

    ``index`` is the first iterate that cannot be computed and ``value``
    the last one that could.
    """

    def __init__(self, index: int, value: float):
        super().__init__(f"E-iterate {index} overflows (previous value {value:.6g})")
        self.index = index
        self.value = value


def E(t: float) -> float:
    return math.expm1(t)


def E_inv(u: float) -> float:
    return math.log1p(u)


def E_iter(t: float, k: int) -> float:
    """k-th iterate of E; raises :class:`Saturated` instead of overflowing."""
    v = float(t)
    for i in range(k):
        if v > EXP_LIMIT:
            raise Saturated(i + 1, v)
        v = math.expm1(v)
    return v


def E_tower(t: float, k: int) -> List[float]:
    """[E^0(t), ..., E^j(t)] for the largest j <= k that is computable."""
    out = [float(t)]
    for _ in range(k):
        if out[-1] > EXP_LIMIT:
            break
        out.append(math.expm1(out[-1]))
    return out


def E_inv_iter(u: float, k: int) -> float:
    v = float(u)
    for _ in range(k):
        v = math.log1p(v)
    return v


def log_E_iter(t: float, k: int) -> float:
    """log E^k(t), usable one level beyond the saturation of E_iter."""
    if k == 0:
        return math.log(t)
    v = E_iter(t, k - 1)
    # log(e^v - 1) = v + log(1 - e^-v)
    return v + math.log(-math.expm1(-v))


def _check_cell(c) -> Cell:
    c = (int(c[0]), int(c[1]))
    if (c[0] + c[1]) % 2:
        raise ValueError(f"cell {c} has odd parity")
    return c


# tail rules -----------------------------------------------------------------

@dataclass(frozen=True)
class ConstantTail:
    entry: Cell

    kind = "constant"

    def __post_init__(self):
        object.__setattr__(self, "entry", _check_cell(self.entry))

    def at(self, k: int) -> Cell:
        return self.entry

    def shifted(self, k: int) -> "ConstantTail":
        return self

    @property
    def bounded(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"kind": "constant", "entry": list(self.entry)}


@dataclass(frozen=True)
class PeriodicTail:
    entries: Tuple[Cell, ...]

    kind = "periodic"

    def __post_init__(self):
        if not self.entries:
            raise ValueError("periodic tail needs at least one entry")
        object.__setattr__(self, "entries", tuple(_check_cell(c) for c in self.entries))

    def at(self, k: int) -> Cell:
        return self.entries[k % len(self.entries)]

    def shifted(self, k: int) -> "PeriodicTail":
        j = k % len(self.entries)
        return PeriodicTail(self.entries[j:] + self.entries[:j])

    @property
    def bounded(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"kind": "periodic", "entries": [list(c) for c in self.entries]}


def tower_rule(t0: float) -> Callable[[int], Cell]:
    """s_k = (2 ceil(E^k(t0) / 4), 0), so 2|s_k| - E^k(t0) lies in [0, 4)."""

    def rule(k: int) -> Cell:
        v = E_iter(t0, k)
        return (2 * math.ceil(v / 4.0), 0)

    return rule


def ceil_tower_rule(t0: float) -> Callable[[int], Cell]:
    """|s_k| >= ceil(E^k(t0)) with even parity: s_k = (n, 0), n even."""

    def rule(k: int) -> Cell:
        n = math.ceil(E_iter(t0, k))
        return (n + (n & 1), 0)

    return rule


def power_rule(base: float) -> Callable[[int], Cell]:
    """s_k = (2 ceil(base^k / 2), 0): exponential, hence admissible with t_s = 0."""

    def rule(k: int) -> Cell:
        return (2 * math.ceil(base ** k / 2.0), 0)

    return rule


GENERATORS: Dict[str, Callable[..., Callable[[int], Cell]]] = {
    "tower": tower_rule,
    "ceil_tower": ceil_tower_rule,
    "power": power_rule,
}


@dataclass(frozen=True)
class GeneratorTail:
    """s_{offset + k} given by a rule; ``name``/``params`` make it serializable."""

    rule: Callable[[int], Cell] = field(compare=False)
    name: Optional[str] = None
    params: Tuple[Tuple[str, float], ...] = ()
    offset: int = 0

    kind = "generator"

    @classmethod
    def named(cls, name: str, **params) -> "GeneratorTail":
        return cls(GENERATORS[name](**params), name, tuple(sorted(params.items())))

    def at(self, k: int) -> Cell:
        return _check_cell(self.rule(self.offset + k))

    def shifted(self, k: int) -> "GeneratorTail":
        return GeneratorTail(self.rule, self.name, self.params, self.offset + k)

    @property
    def bounded(self) -> bool:
        return False

    def to_dict(self) -> dict:
        if self.name is None:
            raise ValueError("anonymous generator tails cannot be serialized")
        return {"kind": "generator", "rule": self.name, "params": dict(self.params), "offset": self.offset}

    def __eq__(self, other):
        if not isinstance(other, GeneratorTail) or self.name is None:
            return self is other
        return (self.name, self.params, self.offset) == (other.name, other.params, other.offset)

    def __hash__(self):
        return hash((self.name, self.params, self.offset))


Tail = "ConstantTail | PeriodicTail | GeneratorTail"


@dataclass(frozen=True)
class Itinerary:
    prefix: Tuple[Cell, ...]
    tail: object

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(_check_cell(c) for c in self.prefix))

    @classmethod
    def constant(cls, entry: Cell = (0, 0), prefix: Sequence[Cell] = ()) -> "Itinerary":
        return cls(tuple(prefix), ConstantTail(entry))

    @classmethod
    def periodic(cls, entries: Sequence[Cell], prefix: Sequence[Cell] = ()) -> "Itinerary":
        return cls(tuple(prefix), PeriodicTail(tuple(entries)))

    @classmethod
    def generator(cls, name: str, prefix: Sequence[Cell] = (), **params) -> "Itinerary":
        return cls(tuple(prefix), GeneratorTail.named(name, **params))

    def __getitem__(self, k: int) -> Cell:
        if k < 0:
            raise IndexError(k)
        if k < len(self.prefix):
            return self.prefix[k]
        return self.tail.at(k - len(self.prefix))

    def magnitude(self, k: int) -> float:
        s = self[k]
        return math.hypot(s[0], s[1])

    @property
    def bounded(self) -> bool:
        return self.tail.bounded

    def shift(self, k: int = 1) -> "Itinerary":
        if k <= len(self.prefix):
            return Itinerary(self.prefix[k:], self.tail)
        return Itinerary((), self.tail.shifted(k - len(self.prefix)))

    def entries(self, n: int) -> List[Cell]:
        return [self[k] for k in range(n)]

    def to_dict(self) -> dict:
        return {"prefix": [list(c) for c in self.prefix], "tail": self.tail.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Itinerary":
        tail = d["tail"]
        kind = tail["kind"]
        if kind == "constant":
            t = ConstantTail(tuple(tail["entry"]))
        elif kind == "periodic":
            t = PeriodicTail(tuple(tuple(c) for c in tail["entries"]))
        elif kind == "generator":
            t = GeneratorTail.named(tail["rule"], **tail.get("params", {}))
            t = t.shifted(int(tail.get("offset", 0)))
        else:
            raise ValueError(f"unknown tail kind {kind!r}")
        return cls(tuple(tuple(c) for c in d.get("prefix", [])), t)


def shift(s: Itinerary, k: int) -> Itinerary:
    return s.shift(k)


# endpoint parameter ----------------------------------------------------------

def t_k_of(s: Itinerary, k: int) -> float:
    """t_k with 2|s_k| = E^k(t_k)."""
    return E_inv_iter(2.0 * s.magnitude(k), k)


@dataclass
class EndpointParam:
    t_s: float
    tau: List[float]
    t: List[float]
    converged: bool
    partial: bool = False
    lower: float = 0.0

    @property
    def depth(self) -> int:
        return len(self.t) - 1


def endpoint_param(s: Itinerary, depth: int = 40) -> EndpointParam:
    """Estimate t_s = limsup t_k from t_0 .. t_K.

    Bounded itineraries have t_s = 0 exactly.  A generator that overflows
    before ``depth`` yields a partial result computed from what is
    available.
    """
    ts: List[float] = []
    partial = False
    for k in range(depth + 1):
        try:
            ts.append(t_k_of(s, k))
        except OverflowError:
            partial = True
            break
    if not ts:
        raise ValueError("itinerary has no computable entries")
    tau = list(ts)
    for k in range(len(ts) - 2, -1, -1):
        tau[k] = max(ts[k], tau[k + 1])
    if s.bounded:
        return EndpointParam(0.0, tau, ts, True, partial, 0.0)
    est = tau[-1]
    converged = len(tau) > 1 and tau[-2] - tau[-1] < 1e-9
    return EndpointParam(est, tau, ts, converged, partial, min(ts[-1], est))


@dataclass
class AdmissibilityEvidence:
    admissible: bool
    ratios: List[float]
    sup: float
    proof: bool


def is_admissible(s: Itinerary, t_probe: float, depth: int = 40) -> AdmissibilityEvidence:
    """Ratios |s_k| / E^k(t_probe) over the computable range.

    The ratios count as bounded when the second half of the computed range
    never exceeds the maximum of the first half.  For bounded tails the
    verdict is certain; otherwise it is evidence at the computed depth.
    """
    if depth < 3:
        raise ValueError("depth must be >= 3")
    if t_probe <= 0:
        raise ValueError("t_probe must be positive")
    ratios: List[float] = []
    for k in range(depth + 1):
        try:
            mag = s.magnitude(k)
        except OverflowError:
            break
        try:
            ek = E_iter(t_probe, k)
        except Saturated:
            # only a finite |s_k| can be compared with an overflowing tower
            ratios.append(0.0)
            continue
        ratios.append(mag / ek)
    half = (len(ratios) + 1) // 2
    head = max(ratios[:half])
    tail = max(ratios[half:]) if len(ratios) > half else 0.0
    ok = tail <= head * (1 + 1e-12)
    return AdmissibilityEvidence(ok, ratios, max(ratios), s.bounded)
