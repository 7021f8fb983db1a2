"""Reasoning about space-time regions: moving 2D polygons, the qualitative
relations between them, consistency checking, and translation solution sets."""

from .geometry import (
    DEFAULT_EPS,
    Epsilon,
    Point,
    Polygon,
    PolygonSet,
    Vec,
    boolean_op,
    minkowski_sum,
    rcc8,
    validate_polygon,
)
from .spacetime import (
    DeriveConfig,
    Interval,
    RelationAtom,
    Slice,
    STObject,
    derive_movement,
    derive_size,
    derive_topology,
    interpolate,
    near,
)

__all__ = [
    "DEFAULT_EPS",
    "Epsilon",
    "Point",
    "Polygon",
    "PolygonSet",
    "Vec",
    "boolean_op",
    "minkowski_sum",
    "rcc8",
    "validate_polygon",
    "DeriveConfig",
    "Interval",
    "RelationAtom",
    "Slice",
    "STObject",
    "derive_movement",
    "derive_size",
    "derive_topology",
    "interpolate",
    "near",
]
