"""2D polygon geometry: validation, predicates, Minkowski sums, boolean regions.

Coordinates are plain doubles in scene units. Boundary-contact decisions use an
absolute tolerance (``Epsilon.geom_eps``); area comparisons, including region
equality, use a relative tolerance (``Epsilon.area_rel_eps``).  Pairs whose
classification margin falls below the tolerance are resolved by the fixed
decision order of :func:`rcc8`, not by exact arithmetic.

All values here are immutable and all functions are pure, so everything in
this module can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import shapely
import shapely.geometry as sgeom
import shapely.ops
from shapely.geometry.polygon import orient as _shapely_orient


class GeometryError(ValueError):
    """Base class for polygon construction and classification failures."""


class TooFewVertices(GeometryError):
    pass


class SelfIntersecting(GeometryError):
    pass


class DegenerateArea(GeometryError):
    pass


class InvalidPolygon(GeometryError):
    pass


@dataclass(frozen=True)
class Epsilon:
    """Tolerance policy: absolute for distances, relative for areas."""

    geom_eps: float = 1e-9
    area_rel_eps: float = 1e-6

    def __post_init__(self) -> None:
        if not (self.geom_eps > 0 and self.area_rel_eps > 0):
            raise ValueError("tolerances must be strictly positive")


DEFAULT_EPS = Epsilon()


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("point coordinates must be finite")

    def translated(self, v: "Vec") -> "Point":
        return Point(self.x + v.tx, self.y + v.ty)


@dataclass(frozen=True)
class Vec:
    """A translation vector (tx, ty)."""

    tx: float
    ty: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.tx) and math.isfinite(self.ty)):
            raise ValueError("translation components must be finite")

    def __neg__(self) -> "Vec":
        return Vec(-self.tx, -self.ty)

    @property
    def norm(self) -> float:
        return math.hypot(self.tx, self.ty)


def distance(p: Point, q: Point) -> float:
    """Euclidean distance between two points."""
    return math.hypot(p.x - q.x, p.y - q.y)


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


def _signed_area(pts: Sequence[Point]) -> float:
    acc = 0.0
    n = len(pts)
    for i in range(n):
        j = (i + 1) % n
        acc += pts[i].x * pts[j].y - pts[j].x * pts[i].y
    return 0.5 * acc


def _seg_point_dist(a: Point, b: Point, p: Point) -> float:
    abx, aby = b.x - a.x, b.y - a.y
    apx, apy = p.x - a.x, p.y - a.y
    denom = abx * abx + aby * aby
    if denom == 0.0:
        return math.hypot(apx, apy)
    t = max(0.0, min(1.0, (apx * abx + apy * aby) / denom))
    return math.hypot(apx - t * abx, apy - t * aby)


def segment_distance(a: Point, b: Point, c: Point, d: Point) -> float:
    """Minimum distance between closed segments ab and cd (0 if they cross)."""
    d1 = _cross(c, d, a)
    d2 = _cross(c, d, b)
    d3 = _cross(a, b, c)
    d4 = _cross(a, b, d)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return 0.0
    return min(
        _seg_point_dist(a, b, c),
        _seg_point_dist(a, b, d),
        _seg_point_dist(c, d, a),
        _seg_point_dist(c, d, b),
    )


class Polygon:
    """A canonical simple polygon: CCW, deduplicated, no collinear vertices.

    Construct through :func:`validate_polygon` unless the vertex list is
    already known to be canonical (internal fast paths pass validate=False).
    """

    __slots__ = ("vertices", "_area", "_centroid", "_bbox", "_shapely", "_diameter")

    def __init__(self, vertices: Sequence[Point], validate: bool = True):
        if validate:
            canon = validate_polygon(vertices)
            vertices = canon.vertices
        self.vertices: tuple[Point, ...] = tuple(vertices)
        self._area: float | None = None
        self._centroid: Point | None = None
        self._bbox: tuple[float, float, float, float] | None = None
        self._shapely = None
        self._diameter: float | None = None

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polygon) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        return f"Polygon({len(self.vertices)} vertices, area={self.area:.6g})"

    @property
    def area(self) -> float:
        if self._area is None:
            self._area = _signed_area(self.vertices)
        return self._area

    @property
    def centroid(self) -> Point:
        if self._centroid is None:
            a = 0.0
            cx = 0.0
            cy = 0.0
            pts = self.vertices
            n = len(pts)
            for i in range(n):
                j = (i + 1) % n
                w = pts[i].x * pts[j].y - pts[j].x * pts[i].y
                a += w
                cx += (pts[i].x + pts[j].x) * w
                cy += (pts[i].y + pts[j].y) * w
            a *= 0.5
            self._centroid = Point(cx / (6.0 * a), cy / (6.0 * a))
        return self._centroid

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        if self._bbox is None:
            xs = [p.x for p in self.vertices]
            ys = [p.y for p in self.vertices]
            self._bbox = (min(xs), min(ys), max(xs), max(ys))
        return self._bbox

    @property
    def diameter(self) -> float:
        """Largest vertex-to-vertex distance."""
        if self._diameter is None:
            best = 0.0
            pts = self.vertices
            for i in range(len(pts)):
                for j in range(i + 1, len(pts)):
                    best = max(best, distance(pts[i], pts[j]))
            self._diameter = best
        return self._diameter

    @property
    def is_convex(self) -> bool:
        pts = self.vertices
        n = len(pts)
        for i in range(n):
            if _cross(pts[i], pts[(i + 1) % n], pts[(i + 2) % n]) <= 0.0:
                return False
        return True

    def translate(self, v: Vec) -> "Polygon":
        return Polygon([p.translated(v) for p in self.vertices], validate=False)

    def reflected(self) -> "Polygon":
        """Point reflection through the origin (a half-turn, so CCW is preserved)."""
        return Polygon([Point(-p.x, -p.y) for p in self.vertices], validate=False)

    def xy(self) -> list[tuple[float, float]]:
        return [(p.x, p.y) for p in self.vertices]

    def to_shapely(self) -> sgeom.Polygon:
        if self._shapely is None:
            self._shapely = sgeom.Polygon(self.xy())
        return self._shapely


def translate(p: Polygon, v: Vec) -> Polygon:
    return p.translate(v)


def area(p: Polygon) -> float:
    return p.area


def centroid(p: Polygon) -> Point:
    return p.centroid


def _dedup(points: Sequence[Point], eps: float) -> list[Point]:
    out: list[Point] = []
    for p in points:
        if not out or distance(out[-1], p) > eps:
            out.append(p)
    if len(out) > 1 and distance(out[0], out[-1]) <= eps:
        out.pop()
    return out


def validate_polygon(raw: Sequence[Point | tuple[float, float]], eps: Epsilon = DEFAULT_EPS) -> Polygon:
    """Canonicalize a vertex list into a CCW simple polygon.

    Raises TooFewVertices, SelfIntersecting, or DegenerateArea.  Check order
    matters: crossing edges are reported as self-intersection even when the
    enclosed area vanishes (bow-ties), while fully collinear rings are
    degenerate, not self-intersecting.
    """
    pts = [p if isinstance(p, Point) else Point(*p) for p in raw]
    if len(pts) < 3:
        raise TooFewVertices(f"polygon needs at least 3 vertices, got {len(pts)}")
    pts = _dedup(pts, eps.geom_eps)
    if len(pts) < 3:
        raise DegenerateArea("polygon collapses to fewer than 3 distinct vertices")

    n = len(pts)
    # Non-adjacent edge pairs may not intersect or touch at all.
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = pts[j], pts[(j + 1) % n]
            if segment_distance(a, b, c, d) <= eps.geom_eps:
                raise SelfIntersecting(f"edges {i} and {j} intersect")

    sa = _signed_area(pts)
    if abs(sa) < eps.geom_eps * eps.geom_eps:
        raise DegenerateArea(f"polygon area {abs(sa):.3g} below tolerance")
    if sa < 0:
        pts.reverse()

    # Drop collinear midpoints; a doubled-back spike is a boundary self-contact.
    cleaned: list[Point] = []
    m = len(pts)
    for i in range(m):
        prev, cur, nxt = pts[i - 1], pts[i], pts[(i + 1) % m]
        base = distance(prev, nxt)
        if base > eps.geom_eps and _seg_point_dist(prev, nxt, cur) <= eps.geom_eps:
            dot = (cur.x - prev.x) * (nxt.x - cur.x) + (cur.y - prev.y) * (nxt.y - cur.y)
            if dot < 0:
                raise SelfIntersecting(f"boundary doubles back at vertex {i}")
            continue
        if base <= eps.geom_eps:
            raise SelfIntersecting(f"boundary doubles back at vertex {i}")
        cleaned.append(cur)
    if len(cleaned) < 3:
        raise DegenerateArea("polygon collapses after collinear vertex removal")
    return Polygon(cleaned, validate=False)


# ---------------------------------------------------------------------------
# RCC-8 base relation classification
# ---------------------------------------------------------------------------

DC, EC, PO, TPP, NTPP, TPPI, NTPPI, EQ = (
    "dc", "ec", "po", "tpp", "ntpp", "tppi", "ntppi", "eq",
)

RCC8_RELATIONS: tuple[str, ...] = (DC, EC, PO, TPP, NTPP, TPPI, NTPPI, EQ)

RCC8_CONVERSE = {
    DC: DC, EC: EC, PO: PO, EQ: EQ,
    TPP: TPPI, TPPI: TPP, NTPP: NTPPI, NTPPI: NTPP,
}


def _bbox_gap(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> float:
    dx = max(b[0] - a[2], a[0] - b[2], 0.0)
    dy = max(b[1] - a[3], a[1] - b[3], 0.0)
    return math.hypot(dx, dy)


def rcc8(p: Polygon, q: Polygon, eps: Epsilon = DEFAULT_EPS) -> str:
    """Classify the RCC-8 base relation between two ground polygons.

    Exactly one of dc, ec, po, tpp, ntpp, tppi, ntppi, eq is returned:
    dc when the gap exceeds geom_eps, eq when the symmetric difference is
    relatively negligible, containment split into tangential/non-tangential
    by boundary distance, then po versus ec by interior overlap.
    """
    if not isinstance(p, Polygon) or not isinstance(q, Polygon):
        raise InvalidPolygon("rcc8 expects validated polygons")
    if _bbox_gap(p.bbox, q.bbox) > eps.geom_eps:
        return DC
    sp, sq = p.to_shapely(), q.to_shapely()
    if sp.distance(sq) > eps.geom_eps:
        return DC
    a_p, a_q = p.area, q.area
    overlap = sp.intersection(sq).area
    if (a_p + a_q - 2.0 * overlap) < eps.area_rel_eps * max(a_p, a_q):
        return EQ
    p_in_q = (a_p - overlap) < eps.area_rel_eps * a_p
    q_in_p = (a_q - overlap) < eps.area_rel_eps * a_q
    if p_in_q:
        touch = sp.boundary.distance(sq.boundary) <= eps.geom_eps
        return TPP if touch else NTPP
    if q_in_p:
        touch = sp.boundary.distance(sq.boundary) <= eps.geom_eps
        return TPPI if touch else NTPPI
    if overlap > eps.area_rel_eps * min(a_p, a_q):
        return PO
    return EC


# ---------------------------------------------------------------------------
# Triangulation, convex hulls, Minkowski sums
# ---------------------------------------------------------------------------


def convex_hull(points: Iterable[Point]) -> list[Point]:
    """Monotone-chain hull, CCW, collinear points dropped."""
    pts = sorted(set((p.x, p.y) for p in points))
    if len(pts) <= 2:
        return [Point(x, y) for x, y in pts]

    def chain(seq):
        out: list[tuple[float, float]] = []
        for p in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    return [Point(x, y) for x, y in hull]


def _point_in_triangle(p: Point, a: Point, b: Point, c: Point, tol: float) -> bool:
    d1 = _cross(a, b, p)
    d2 = _cross(b, c, p)
    d3 = _cross(c, a, p)
    return d1 >= -tol and d2 >= -tol and d3 >= -tol


def triangulate(poly: Polygon) -> list[tuple[Point, Point, Point]]:
    """Ear-clipping triangulation of a canonical simple polygon."""
    pts = list(poly.vertices)
    if poly.is_convex:
        return [(pts[0], pts[i], pts[i + 1]) for i in range(1, len(pts) - 1)]
    idx = list(range(len(pts)))
    tris: list[tuple[Point, Point, Point]] = []
    scale = max(abs(v) for p in pts for v in (p.x, p.y)) or 1.0
    tol = 1e-12 * scale * scale
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10 * len(pts) * len(pts):
            raise InvalidPolygon("ear clipping failed to make progress")
        clipped = False
        for k in range(len(idx)):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
            a, b, c = pts[i0], pts[i1], pts[i2]
            if _cross(a, b, c) <= tol:
                continue
            blocked = False
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                if _point_in_triangle(pts[j], a, b, c, tol):
                    blocked = True
                    break
            if not blocked:
                tris.append((a, b, c))
                idx.pop(k)
                clipped = True
                break
        if not clipped:
            raise InvalidPolygon("no ear found; polygon may be non-simple")
    tris.append((pts[idx[0]], pts[idx[1]], pts[idx[2]]))
    return tris


def _convex_minkowski(a: Sequence[Point], b: Sequence[Point]) -> list[Point]:
    return convex_hull(Point(p.x + q.x, p.y + q.y) for p in a for q in b)


def minkowski_sum(p: Polygon, q: "Polygon | Point | Vec") -> "PolygonSet":
    """Minkowski sum {a + b : a in p, b in q}.

    Non-convex inputs are triangulated, convex pieces are summed pairwise, and
    the pieces are unioned.  A Point or Vec second operand degenerates to a
    translation of ``p``.
    """
    if isinstance(q, Vec):
        return PolygonSet.from_polygons([p.translate(q)])
    if isinstance(q, Point):
        return PolygonSet.from_polygons([p.translate(Vec(q.x, q.y))])
    parts_p = [tuple(p.vertices)] if p.is_convex else triangulate(p)
    parts_q = [tuple(q.vertices)] if q.is_convex else triangulate(q)
    pieces = []
    for tp in parts_p:
        for tq in parts_q:
            hull = _convex_minkowski(tp, tq)
            if len(hull) >= 3:
                pieces.append(sgeom.Polygon([(pt.x, pt.y) for pt in hull]))
    return PolygonSet.from_shapely(shapely.ops.unary_union(pieces))


# ---------------------------------------------------------------------------
# Boolean regions
# ---------------------------------------------------------------------------


def _polygonal_parts(geom) -> list[sgeom.Polygon]:
    if geom.is_empty:
        return []
    if isinstance(geom, sgeom.Polygon):
        return [geom] if geom.area > 0 else []
    if isinstance(geom, (sgeom.MultiPolygon, sgeom.GeometryCollection)):
        out: list[sgeom.Polygon] = []
        for g in geom.geoms:
            out.extend(_polygonal_parts(g))
        return out
    return []


def _clean(geom) -> sgeom.base.BaseGeometry:
    parts = _polygonal_parts(geom)
    if not parts:
        return sgeom.Polygon()
    if len(parts) == 1:
        return parts[0]
    return shapely.ops.unary_union(parts)


class PolygonSet:
    """A regularized polygonal region, possibly flagged as a complement.

    With ``complement`` set the value denotes "everything except the stored
    region"; boolean operations rewrite complements by De Morgan's laws so no
    workspace is needed until the set is materialized with :meth:`resolve`.
    """

    __slots__ = ("geom", "complement")

    def __init__(self, geom, complement: bool = False):
        self.geom = _clean(geom)
        self.complement = bool(complement)

    @classmethod
    def empty(cls) -> "PolygonSet":
        return cls(sgeom.Polygon())

    @classmethod
    def everything(cls) -> "PolygonSet":
        return cls(sgeom.Polygon(), complement=True)

    @classmethod
    def from_polygons(cls, polys: Iterable[Polygon], complement: bool = False) -> "PolygonSet":
        return cls(shapely.ops.unary_union([p.to_shapely() for p in polys]), complement)

    @classmethod
    def from_shapely(cls, geom, complement: bool = False) -> "PolygonSet":
        return cls(geom, complement)

    @classmethod
    def box(cls, xmin: float, ymin: float, xmax: float, ymax: float) -> "PolygonSet":
        return cls(sgeom.box(xmin, ymin, xmax, ymax))

    def __repr__(self) -> str:
        tag = "complement of " if self.complement else ""
        return f"PolygonSet({tag}area={self.geom.area:.6g})"

    @property
    def is_empty(self) -> bool:
        if self.complement:
            return False
        return self.geom.is_empty or self.geom.area == 0.0

    @property
    def area(self) -> float:
        if self.complement:
            raise ValueError("area of an unresolved complement region is unbounded")
        return self.geom.area

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return self.geom.bounds

    def covers(self, x: float, y: float) -> bool:
        pt = sgeom.Point(x, y)
        inside = self.geom.covers(pt) if not self.geom.is_empty else False
        if self.complement:
            # Closure of the complement: boundary points belong to both sides.
            interior = self.geom.contains(pt) if not self.geom.is_empty else False
            return not interior
        return inside

    def union(self, other: "PolygonSet") -> "PolygonSet":
        a, b = self, other
        if not a.complement and not b.complement:
            return PolygonSet(a.geom.union(b.geom))
        if not a.complement and b.complement:
            return PolygonSet(b.geom.difference(a.geom), complement=True)
        if a.complement and not b.complement:
            return PolygonSet(a.geom.difference(b.geom), complement=True)
        return PolygonSet(a.geom.intersection(b.geom), complement=True)

    def intersection(self, other: "PolygonSet") -> "PolygonSet":
        a, b = self, other
        if not a.complement and not b.complement:
            return PolygonSet(a.geom.intersection(b.geom))
        if not a.complement and b.complement:
            return PolygonSet(a.geom.difference(b.geom))
        if a.complement and not b.complement:
            return PolygonSet(b.geom.difference(a.geom))
        return PolygonSet(a.geom.union(b.geom), complement=True)

    def difference(self, other: "PolygonSet") -> "PolygonSet":
        a, b = self, other
        if not a.complement and not b.complement:
            return PolygonSet(a.geom.difference(b.geom))
        if not a.complement and b.complement:
            return PolygonSet(a.geom.intersection(b.geom))
        if a.complement and not b.complement:
            return PolygonSet(a.geom.union(b.geom), complement=True)
        return PolygonSet(b.geom.difference(a.geom))

    def resolve(self, box: tuple[float, float, float, float]) -> "PolygonSet":
        """Materialize against a workspace box; complements become concrete."""
        bgeom = sgeom.box(*box)
        if self.complement:
            return PolygonSet(bgeom.difference(self.geom))
        return PolygonSet(self.geom.intersection(bgeom))

    def shells(self) -> list[list[Point]]:
        """Outer rings, CCW, closing vertex dropped."""
        out = []
        for poly in _polygonal_parts(self.geom):
            poly = _shapely_orient(poly, 1.0)
            coords = list(poly.exterior.coords)[:-1]
            out.append([Point(x, y) for x, y in coords])
        return out

    def holes(self) -> list[list[Point]]:
        """Inner rings, CW, closing vertex dropped."""
        out = []
        for poly in _polygonal_parts(self.geom):
            poly = _shapely_orient(poly, 1.0)
            for ring in poly.interiors:
                coords = list(ring.coords)[:-1]
                out.append([Point(x, y) for x, y in coords])
        return out

    def sym_diff_area(self, other: "PolygonSet") -> float:
        if self.complement or other.complement:
            raise ValueError("resolve complements before comparing areas")
        return self.geom.symmetric_difference(other.geom).area


def boolean_op(a: PolygonSet, b: PolygonSet, op: str) -> PolygonSet:
    """Regularized boolean operation; op is union, intersection, or difference."""
    if op == "union":
        return a.union(b)
    if op == "intersection":
        return a.intersection(b)
    if op == "difference":
        return a.difference(b)
    raise ValueError(f"unknown boolean op: {op!r}")
