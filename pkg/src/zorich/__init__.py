"""Numerical laboratory for Zorich maps: the map, its inverse branches,
hairs of the Julia set, dimension experiments and example families."""

from .mapcore import MapConfig, default_config, derive_constants, eval_f, lam
from .symbolic import Itinerary

__all__ = ["MapConfig", "default_config", "derive_constants", "eval_f", "lam", "Itinerary"]
__version__ = "0.1.0"
