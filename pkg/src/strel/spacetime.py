"""Space-time objects and the derivation of qualitative relations over intervals.

An ST object is a time-indexed map of polygon slices.  Relations are derived
over the discrete frame set supplied with the data (missing frames are filled
by rigid interpolation when bracketed).  The derivation emits every relation
name that holds, not just a strongest one, so the output of a derivation is a
set of atoms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from .geometry import (
    DEFAULT_EPS,
    Epsilon,
    Point,
    Polygon,
    Vec,
    distance,
    rcc8,
)


class SpacetimeError(ValueError):
    pass


class MissingSlices(SpacetimeError):
    pass


class NoBracketingSlices(SpacetimeError):
    pass


# Slice-level groupings over the eight base relations.
RCC8_ALL = frozenset({"dc", "ec", "po", "tpp", "ntpp", "tppi", "ntppi", "eq"})
DR_S = frozenset({"dc", "ec"})
P_S = frozenset({"tpp", "ntpp", "eq"})
PP_S = frozenset({"tpp", "ntpp"})
PI_S = frozenset({"tppi", "ntppi", "eq"})
PPI_S = frozenset({"tppi", "ntppi"})
C_S = RCC8_ALL - {"dc"}
O_S = frozenset({"po", "tpp", "ntpp", "tppi", "ntppi", "eq"})

TOPOLOGY_VOCAB = (
    "dc", "dr", "ec", "po", "tpp", "ntpp", "tppi", "ntppi", "eq",
    "p", "pp", "c", "o", "split", "merge",
)
SIZE_VOCAB = ("fixed_size", "grows", "shrinks")
MOVEMENT_VOCAB = ("moves", "move_parallel", "towards", "away", "follows")
UNARY_RELATIONS = frozenset(SIZE_VOCAB) | {"moves"}

ASPECT_VOCAB = {
    "topology": frozenset(TOPOLOGY_VOCAB),
    "size": frozenset(SIZE_VOCAB),
    "movement": frozenset(MOVEMENT_VOCAB),
}


@dataclass(frozen=True, order=True)
class Interval:
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < 0:
            raise ValueError("time stamps are non-negative frame indices")
        if self.start > self.end:
            raise ValueError(f"interval start {self.start} after end {self.end}")

    def __contains__(self, t: int) -> bool:
        return self.start <= t <= self.end


@dataclass(frozen=True)
class Slice:
    time: int
    shape: Polygon


@dataclass
class STObject:
    """A space-time history: an identifier plus one polygon slice per frame."""

    id: str
    slices: dict[int, Polygon] = field(default_factory=dict)

    def times(self) -> list[int]:
        return sorted(self.slices)

    def add(self, t: int, shape: Polygon) -> None:
        if t < 0:
            raise ValueError("time stamps are non-negative")
        if t in self.slices:
            raise ValueError(f"object {self.id} already has a slice at {t}")
        self.slices[t] = shape

    def span(self) -> Optional[Interval]:
        ts = self.times()
        if not ts:
            return None
        return Interval(ts[0], ts[-1])


Scene = Mapping[str, STObject]


@dataclass(frozen=True)
class RelationAtom:
    """One named relation over one or two objects on a time interval."""

    aspect: str
    name: str
    args: tuple[str, ...]
    interval: Interval

    def __post_init__(self) -> None:
        vocab = ASPECT_VOCAB.get(self.aspect)
        if vocab is None:
            raise ValueError(f"unknown aspect {self.aspect!r}")
        if self.name not in vocab:
            raise ValueError(f"{self.name!r} is not a {self.aspect} relation")
        want = 1 if self.name in UNARY_RELATIONS else 2
        if len(self.args) != want:
            raise ValueError(f"{self.name} takes {want} argument(s), got {len(self.args)}")

    def sort_key(self):
        return (self.aspect, self.name, self.args, self.interval.start, self.interval.end)

    def __repr__(self) -> str:
        args = ", ".join(self.args)
        return f"{self.name}({args})@[{self.interval.start},{self.interval.end}]"


@dataclass(frozen=True)
class DeriveConfig:
    """Knobs for relation derivation.

    follows_max_gap is the maximum frame gap between the two time points of a
    follows witness.  near_threshold defaults to twice the mean slice diameter
    of the scene when left unset.
    """

    follows_max_gap: int = 5
    near_threshold: Optional[float] = None
    eps: Epsilon = DEFAULT_EPS

    def __post_init__(self) -> None:
        if self.follows_max_gap < 1:
            raise ValueError("follows_max_gap must be at least 1")
        if self.near_threshold is not None and self.near_threshold <= 0:
            raise ValueError("near_threshold must be positive")

    @classmethod
    def for_scene(cls, scene: Scene, **kwargs) -> "DeriveConfig":
        cfg = cls(**kwargs)
        if cfg.near_threshold is None:
            diams = [poly.diameter for obj in scene.values() for poly in obj.slices.values()]
            if diams:
                cfg = replace(cfg, near_threshold=2.0 * sum(diams) / len(diams))
        return cfg


def interpolate(s: STObject, t: int) -> Polygon:
    """Slice of ``s`` at time t, linearly interpolating when t is missing.

    The nearest earlier shape is moved rigidly along the straight line between
    the bracketing centroids; vertices are never morphed.  Raises
    NoBracketingSlices outside the recorded range.
    """
    if t in s.slices:
        return s.slices[t]
    ts = s.times()
    earlier = [u for u in ts if u < t]
    later = [u for u in ts if u > t]
    if not earlier or not later:
        raise NoBracketingSlices(f"object {s.id} has no slices bracketing time {t}")
    t1, t2 = earlier[-1], later[0]
    c1 = s.slices[t1].centroid
    c2 = s.slices[t2].centroid
    f = (t - t1) / (t2 - t1)
    return s.slices[t1].translate(Vec(f * (c2.x - c1.x), f * (c2.y - c1.y)))


def _frames(interval: Interval, objects: Sequence[STObject]) -> list[int]:
    """Frames to quantify over: union of slice times of the objects within I."""
    times: set[int] = set()
    for obj in objects:
        times.update(t for t in obj.slices if t in interval)
    if not times:
        raise MissingSlices(
            "no slices of " + ", ".join(o.id for o in objects) +
            f" fall inside [{interval.start}, {interval.end}]"
        )
    return sorted(times)


def _shape_at(obj: STObject, t: int) -> Polygon:
    try:
        return interpolate(obj, t)
    except NoBracketingSlices as exc:
        raise MissingSlices(str(exc)) from exc


def derive_topology(a: STObject, b: STObject, interval: Interval,
                    cfg: DeriveConfig = DeriveConfig()) -> set[RelationAtom]:
    """All interval-level mereotopological relations holding between a and b."""
    frames = _frames(interval, (a, b))
    rels = [rcc8(_shape_at(a, t), _shape_at(b, t), cfg.eps) for t in frames]
    held = interval_topology(rels)
    return {RelationAtom("topology", name, (a.id, b.id), interval) for name in held}


def interval_topology(rels: Sequence[str]) -> set[str]:
    first, last = rels[0], rels[-1]
    every = set(rels)
    held: set[str] = set()
    if every <= {"dc"}:
        held.add("dc")
    if every <= DR_S:
        held.add("dr")
    if every <= P_S:
        held.add("p")
    if every <= {"ntpp"}:
        held.add("ntpp")
    if every <= {"ntppi"}:
        held.add("ntppi")
    if every <= {"eq"}:
        held.add("eq")
    if every & C_S:
        held.add("c")
    if every & O_S:
        held.add("o")
    if "po" in every:
        held.add("po")
    if "dr" in held and "ec" in every:
        held.add("ec")
    if "p" in held and every & PP_S:
        held.add("pp")
    if "p" in held and "tpp" in every:
        held.add("tpp")
    # Inverse containment mirrors tpp: all frames contain b, some tangentially.
    if every <= PI_S and "tppi" in every:
        held.add("tppi")
    if first in P_S and last == "dc":
        held.add("split")
    if first == "dc" and last in P_S:
        held.add("merge")
    return held


def derive_size(target: "STObject | tuple[STObject, STObject]", interval: Interval,
                cfg: DeriveConfig = DeriveConfig()) -> set[RelationAtom]:
    """Unary size relations (fixed_size, grows, shrinks) for one or both objects."""
    objs = target if isinstance(target, tuple) else (target,)
    atoms: set[RelationAtom] = set()
    for obj in objs:
        frames = _frames(interval, (obj,))
        areas = [_shape_at(obj, t).area for t in frames]
        rel_eps = cfg.eps.area_rel_eps
        top = max(areas)
        fixed = (top - min(areas)) <= rel_eps * top
        if fixed:
            atoms.add(RelationAtom("size", "fixed_size", (obj.id,), interval))
            continue
        slack = rel_eps * top
        if all(x <= y + slack for x, y in zip(areas, areas[1:])):
            atoms.add(RelationAtom("size", "grows", (obj.id,), interval))
        if all(x >= y - slack for x, y in zip(areas, areas[1:])):
            atoms.add(RelationAtom("size", "shrinks", (obj.id,), interval))
    return atoms


def _moves(cs: Sequence[Point], eps: Epsilon) -> bool:
    return any(
        distance(ci, cj) > eps.geom_eps
        for ci, cj in itertools.combinations(cs, 2)
    )


def derive_movement(a: STObject, b: Optional[STObject], interval: Interval,
                    cfg: DeriveConfig = DeriveConfig()) -> set[RelationAtom]:
    """Movement relations: unary moves plus, when b is given, the binary
    relations oriented as (a, b)."""
    eps = cfg.eps
    if b is None:
        frames = _frames(interval, (a,))
        cs = [_shape_at(a, t).centroid for t in frames]
        if _moves(cs, eps):
            return {RelationAtom("movement", "moves", (a.id,), interval)}
        return set()

    frames = _frames(interval, (a, b))
    c1 = [_shape_at(a, t).centroid for t in frames]
    c2 = [_shape_at(b, t).centroid for t in frames]
    atoms: set[RelationAtom] = set()
    a_moves = _moves(c1, eps)
    b_moves = _moves(c2, eps)
    if a_moves:
        atoms.add(RelationAtom("movement", "moves", (a.id,), interval))
    if b_moves:
        atoms.add(RelationAtom("movement", "moves", (b.id,), interval))

    diffs = [Point(q.x - p.x, q.y - p.y) for p, q in zip(c1, c2)]
    parallel = a_moves and all(distance(diffs[0], d) <= eps.geom_eps for d in diffs)
    if parallel:
        atoms.add(RelationAtom("movement", "move_parallel", (a.id, b.id), interval))

    deltas = [distance(p, q) for p, q in zip(c1, c2)]
    non_increasing = all(x >= y - eps.geom_eps for x, y in zip(deltas, deltas[1:]))
    non_decreasing = all(x <= y + eps.geom_eps for x, y in zip(deltas, deltas[1:]))
    if a_moves and not parallel and non_increasing:
        atoms.add(RelationAtom("movement", "towards", (a.id, b.id), interval))
    if a_moves and not parallel and non_decreasing:
        atoms.add(RelationAtom("movement", "away", (a.id, b.id), interval))

    if len(frames) >= 2 and _follows(frames, c1, c2, cfg):
        atoms.add(RelationAtom("movement", "follows", (a.id, b.id), interval))
    return atoms


def _follows(frames: Sequence[int], c1: Sequence[Point], c2: Sequence[Point],
             cfg: DeriveConfig) -> bool:
    """a follows b: every later frame has an earlier witness within the gap
    threshold such that a moved toward b's old position while b moved away
    from it."""
    eps = cfg.eps.geom_eps
    for j in range(1, len(frames)):
        ok = False
        for i in range(j):
            if frames[j] - frames[i] > cfg.follows_max_gap:
                continue
            d_then = distance(c1[i], c2[i])
            if d_then > distance(c1[j], c2[i]) + eps and d_then + eps < distance(c1[i], c2[j]):
                ok = True
                break
        if not ok:
            return False
    return True


def near(a: STObject, b: STObject, t: int, cfg: DeriveConfig) -> bool:
    """Centroid distance strictly below the configured threshold at time t."""
    threshold = cfg.near_threshold
    if threshold is None:
        diams = [poly.diameter for obj in (a, b) for poly in obj.slices.values()]
        threshold = 2.0 * sum(diams) / len(diams)
    ca = _shape_at(a, t).centroid
    cb = _shape_at(b, t).centroid
    return distance(ca, cb) < threshold


def derive_pair(a: STObject, b: STObject, interval: Interval, aspect: str,
                cfg: DeriveConfig = DeriveConfig()) -> set[RelationAtom]:
    """Derivation for one ordered pair and one aspect (both directions for
    topology/movement are the caller's concern)."""
    if aspect == "topology":
        return derive_topology(a, b, interval, cfg)
    if aspect == "size":
        return derive_size((a, b), interval, cfg)
    if aspect == "movement":
        return derive_movement(a, b, interval, cfg)
    raise ValueError(f"unknown aspect {aspect!r}")


def derive_all(scene: Scene, interval: Interval, aspects: Iterable[str] = ("topology", "size", "movement"),
               pairs: Optional[Sequence[tuple[str, str]]] = None,
               cfg: Optional[DeriveConfig] = None) -> set[RelationAtom]:
    """Derive relations for the given ordered pairs (default: all ordered pairs)."""
    if cfg is None:
        cfg = DeriveConfig.for_scene(scene)
    ids = sorted(scene)
    if pairs is None:
        pairs = [(x, y) for x in ids for y in ids if x != y]
    atoms: set[RelationAtom] = set()
    for aspect in aspects:
        if aspect == "size":
            seen: set[str] = set()
            for x, y in pairs:
                for e in (x, y):
                    if e not in seen:
                        seen.add(e)
                        atoms |= derive_size(scene[e], interval, cfg)
            if not pairs:
                for e in ids:
                    atoms |= derive_size(scene[e], interval, cfg)
            continue
        for x, y in pairs:
            atoms |= derive_pair(scene[x], scene[y], interval, aspect, cfg)
    return atoms
