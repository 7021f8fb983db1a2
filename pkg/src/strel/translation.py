"""Feasible-translation reasoning.

For a polygon free to translate and a fixed polygon, the set of translation
vectors realizing a mereotopological relation is an exact region in (tx, ty)
space built from Minkowski sums: the overlap family comes from the obstacle
P1 + (-P0), disconnection from its complement (clipped to a finite
workspace), boundary-contact relations from tolerance-thick boundary bands,
and containment from the erosion of the fixed polygon.  Conjunctions of
constraints intersect their regions; a non-empty intersection certifies the
conjunction and its minimum-norm vector is reported as the witness.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import shapely
import shapely.affinity
import shapely.geometry as sgeom
import shapely.ops

from .geometry import (
    DEFAULT_EPS,
    Epsilon,
    Point,
    Polygon,
    PolygonSet,
    RCC8_CONVERSE,
    Vec,
    minkowski_sum,
    rcc8,
    triangulate,
    _convex_minkowski,
    _polygonal_parts,
)
from .spacetime import (
    C_S,
    DR_S,
    Interval,
    O_S,
    P_S,
    PI_S,
    PP_S,
    PPI_S,
    RCC8_ALL,
    RelationAtom,
    Slice,
    STObject,
)
from .algebra import TOPOLOGY_SEMS


class TranslationError(ValueError):
    pass


class EmptyWorkspace(TranslationError):
    pass


class RelationUnsupported(TranslationError):
    pass


class WorkspaceMismatch(TranslationError):
    pass


class NoWitness(TranslationError):
    pass


class UnsupportedConstraintShape(TranslationError):
    pass


_GROUPS = {
    "dr": DR_S,
    "p": P_S,
    "pp": PP_S,
    "pi": PI_S,
    "ppi": PPI_S,
    "c": C_S,
    "o": O_S,
}


def slice_relation_set(rel: "str | Iterable[str]") -> frozenset[str]:
    """Normalize a relation name or collection to base RCC-8 names."""
    names = [rel] if isinstance(rel, str) else list(rel)
    out: set[str] = set()
    for name in names:
        if name in RCC8_ALL:
            out.add(name)
        elif name in _GROUPS:
            out |= _GROUPS[name]
        else:
            raise RelationUnsupported(f"{name!r} is not a slice-level topology relation")
    return frozenset(out)


@dataclass(frozen=True)
class WorkspaceConfig:
    """Finite workspace bounding complement regions, plus the oracle grid step."""

    box: tuple[float, float, float, float]
    grid_step: float = 0.05

    def __post_init__(self) -> None:
        xmin, ymin, xmax, ymax = self.box
        if not (xmax > xmin and ymax > ymin):
            raise EmptyWorkspace(f"degenerate workspace box {self.box}")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")

    @classmethod
    def around(cls, polygons: Iterable[Polygon], inflate: float = 4.0,
               grid_step: Optional[float] = None) -> "WorkspaceConfig":
        boxes = [p.bbox for p in polygons]
        if not boxes:
            raise EmptyWorkspace("no geometry to build a workspace around")
        xmin = min(b[0] for b in boxes)
        ymin = min(b[1] for b in boxes)
        xmax = max(b[2] for b in boxes)
        ymax = max(b[3] for b in boxes)
        cx, cy = (xmin + xmax) / 2, (ymin + ymax) / 2
        hw = max((xmax - xmin) / 2, 0.5) * inflate
        hh = max((ymax - ymin) / 2, 0.5) * inflate
        box = (cx - hw, cy - hh, cx + hw, cy + hh)
        if grid_step is None:
            grid_step = max(hw, hh) / 75.0
        return cls(box, grid_step)

    def shapely_box(self) -> sgeom.Polygon:
        return sgeom.box(*self.box)


@dataclass(frozen=True)
class Witness:
    """A concrete feasible translation and the slices it grounds."""

    vector: Vec
    ground_slices: tuple[Slice, ...] = ()


@dataclass(frozen=True)
class UngroundTranslation:
    """Declares target_object as a translated copy of source_object's history."""

    source_object: str
    target_object: str
    shared_vector: bool = True


@dataclass
class SolutionSet:
    """Region of feasible translation vectors for one or more constraints."""

    region: PolygonSet
    workspace: WorkspaceConfig
    constraints: tuple[tuple[Polygon, Polygon, frozenset[str]], ...] = ()
    boundary_targets: tuple = ()  # shapely curves carrying exact boundary relations

    @property
    def is_empty(self) -> bool:
        return self.region.is_empty

    @property
    def area(self) -> float:
        return self.region.area

    def covers(self, tx: float, ty: float) -> bool:
        return self.region.covers(tx, ty)

    def polygons(self) -> list[list[Point]]:
        return self.region.shells()


def _congruence_vector(p0: Polygon, p1: Polygon, eps: Epsilon) -> Optional[Vec]:
    """Translation mapping p0 exactly onto p1, when the shapes are congruent."""
    if len(p0) != len(p1):
        return None
    c0, c1 = p0.centroid, p1.centroid
    v = Vec(c1.x - c0.x, c1.y - c0.y)
    moved = [pt.translated(v) for pt in p0.vertices]
    n = len(moved)
    verts1 = p1.vertices
    for shift in range(n):
        if all(
            math.hypot(moved[i].x - verts1[(i + shift) % n].x,
                       moved[i].y - verts1[(i + shift) % n].y) <= eps.geom_eps
            for i in range(n)
        ):
            return v
    return None


def _strip_convex_cells(geom) -> list[list[Point]]:
    """Split a polygonal region into convex cells by vertical lines through
    every vertex.  Between consecutive cuts each piece is a trapezoid."""
    cells: list[list[Point]] = []
    for poly in _polygonal_parts(geom):
        xs = sorted({x for ring in [poly.exterior, *poly.interiors] for x, _ in ring.coords})
        ymin, ymax = poly.bounds[1] - 1.0, poly.bounds[3] + 1.0
        for x0, x1 in zip(xs, xs[1:]):
            if x1 - x0 <= 0:
                continue
            piece = poly.intersection(sgeom.box(x0, ymin, x1, ymax))
            for part in _polygonal_parts(piece):
                coords = [Point(x, y) for x, y in part.exterior.coords[:-1]]
                hull = _convex_hull_points(coords)
                if len(hull) >= 3:
                    cells.append(hull)
    return cells


def _convex_hull_points(points: Sequence[Point]) -> list[Point]:
    from .geometry import convex_hull

    return convex_hull(points)


def _minkowski_region(geom, poly: Polygon):
    """Minkowski sum of an arbitrary polygonal region with a polygon."""
    cells = _strip_convex_cells(geom)
    tris = [tuple(poly.vertices)] if poly.is_convex else triangulate(poly)
    pieces = []
    for cell in cells:
        for tri in tris:
            hull = _convex_minkowski(cell, tri)
            if len(hull) >= 3:
                pieces.append(sgeom.Polygon([(p.x, p.y) for p in hull]))
    if not pieces:
        return sgeom.Polygon()
    return shapely.ops.unary_union(pieces)


def containment_region(p0: Polygon, p1: Polygon):
    """Shapely region of vectors t with p0 + t inside p1 (boundary contact allowed).

    Computed as the complement of (outside-of-p1) + (-p0), evaluated inside a
    box that covers every translation keeping the bounding boxes nested.
    """
    b0, b1 = p0.bbox, p1.bbox
    tx_lo, tx_hi = b1[0] - b0[0], b1[2] - b0[2]
    ty_lo, ty_hi = b1[1] - b0[1], b1[3] - b0[3]
    if tx_lo > tx_hi or ty_lo > ty_hi:
        return sgeom.Polygon()
    pad = max(b0[2] - b0[0], b0[3] - b0[1], 1.0) + 1.0
    big = sgeom.box(b1[0] - pad, b1[1] - pad, b1[2] + pad, b1[3] + pad)
    outside = big.difference(p1.to_shapely())
    obstacle = _minkowski_region(outside, p0.reflected())
    candidates = sgeom.box(tx_lo - 0.5, ty_lo - 0.5, tx_hi + 0.5, ty_hi + 0.5)
    return candidates.difference(obstacle)


def _reflect(geom):
    return shapely.affinity.scale(geom, xfact=-1.0, yfact=-1.0, origin=(0, 0))


def solution_set(p0: Polygon, p1: Polygon, rel: "str | Iterable[str]",
                 ws: WorkspaceConfig, eps: Epsilon = DEFAULT_EPS) -> SolutionSet:
    """Exact region of vectors t such that rcc8(p0 + t, p1) falls in rel.

    rel may be a base relation, a grouping name (dr, p, pp, c, o), or any
    collection of those.  Boundary-coincident relations (ec, tpp, tppi, eq)
    become geom_eps-thick bands so they remain representable as areas.
    """
    bases = slice_relation_set(rel)
    geps = eps.geom_eps
    obstacle = minkowski_sum(p1, p0.reflected()).geom
    ws_box = ws.shapely_box()
    parts = []
    targets = []

    contain_ab = None
    if bases & {"tpp", "ntpp", "po", "eq"}:
        contain_ab = containment_region(p0, p1)
    contain_ba = None
    if bases & {"tppi", "ntppi", "po"}:
        contain_ba = _reflect(containment_region(p1, p0))
    eq_vec = _congruence_vector(p0, p1, eps) if bases & {"eq", "po"} else None

    if "dc" in bases:
        keep_out = obstacle.union(obstacle.boundary.buffer(geps))
        parts.append(ws_box.difference(keep_out))
    if "ec" in bases:
        parts.append(obstacle.boundary.buffer(geps))
        targets.append(obstacle.boundary)
    if "po" in bases:
        region = obstacle
        if contain_ab is not None and not contain_ab.is_empty:
            region = region.difference(contain_ab)
        if contain_ba is not None and not contain_ba.is_empty:
            region = region.difference(contain_ba)
        if eq_vec is not None:
            region = region.difference(sgeom.Point(eq_vec.tx, eq_vec.ty).buffer(10 * geps))
        parts.append(region)
    if "tpp" in bases and contain_ab is not None and contain_ab.area > 0:
        parts.append(contain_ab.boundary.buffer(geps))
        targets.append(contain_ab.boundary)
    if "ntpp" in bases and contain_ab is not None and contain_ab.area > 0:
        parts.append(contain_ab.difference(contain_ab.boundary.buffer(geps)))
    if "tppi" in bases and contain_ba is not None and contain_ba.area > 0:
        parts.append(contain_ba.boundary.buffer(geps))
        targets.append(contain_ba.boundary)
    if "ntppi" in bases and contain_ba is not None and contain_ba.area > 0:
        parts.append(contain_ba.difference(contain_ba.boundary.buffer(geps)))
    if "eq" in bases and eq_vec is not None:
        parts.append(sgeom.Point(eq_vec.tx, eq_vec.ty).buffer(geps, quad_segs=16))
        targets.append(sgeom.Point(eq_vec.tx, eq_vec.ty))

    union = shapely.ops.unary_union(parts) if parts else sgeom.Polygon()
    region = PolygonSet(union).resolve(ws.box)
    return SolutionSet(
        region=region,
        workspace=ws,
        constraints=((p0, p1, bases),),
        boundary_targets=tuple(targets),
    )


def full_solution_set(ws: WorkspaceConfig) -> SolutionSet:
    return SolutionSet(region=PolygonSet.box(*ws.box), workspace=ws)


def intersect_solution_sets(sets: Sequence[SolutionSet]) -> SolutionSet:
    """Regularized intersection; the conjunction of the constraints is
    consistent exactly when the result is non-empty."""
    if not sets:
        raise ValueError("nothing to intersect")
    first = sets[0]
    for other in sets[1:]:
        if other.workspace.box != first.workspace.box:
            raise WorkspaceMismatch(
                f"workspaces differ: {first.workspace.box} vs {other.workspace.box}"
            )
    region = first.region
    constraints = list(first.constraints)
    targets = list(first.boundary_targets)
    for other in sets[1:]:
        region = region.intersection(other.region)
        constraints.extend(other.constraints)
        targets.extend(other.boundary_targets)
    return SolutionSet(
        region=region,
        workspace=first.workspace,
        constraints=tuple(constraints),
        boundary_targets=tuple(targets),
    )


def _ring_candidates(region: PolygonSet) -> list[Vec]:
    out = []
    for poly in _polygonal_parts(region.geom):
        rings = [poly.exterior, *poly.interiors]
        for ring in rings:
            coords = list(ring.coords)
            for (x1, y1), (x2, y2) in zip(coords, coords[1:]):
                ax, ay = x2 - x1, y2 - y1
                denom = ax * ax + ay * ay
                t = 0.0 if denom == 0 else max(0.0, min(1.0, -(x1 * ax + y1 * ay) / denom))
                out.append(Vec(x1 + t * ax, y1 + t * ay))
    return out


def minimal_witness(m: SolutionSet, source_slices: Sequence[Slice] = (),
                    eps: Epsilon = DEFAULT_EPS) -> Witness:
    """Minimum-norm vector in the solution set, ties broken by (tx, ty).

    Vectors on tolerance-thick boundary bands are snapped back onto the exact
    relation boundary; every returned vector re-verifies against the stored
    constraints with the ground classifier.
    """
    if m.is_empty:
        raise NoWitness("solution set is empty")
    candidates: list[Vec] = []
    if m.region.covers(0.0, 0.0):
        candidates.append(Vec(0.0, 0.0))
    candidates.extend(_ring_candidates(m.region))
    candidates.sort(key=lambda v: (v.norm, v.tx, v.ty))

    def verified(v: Vec) -> bool:
        return all(rcc8(p0.translate(v), p1, eps) in bases for p0, p1, bases in m.constraints)

    def finish(v: Vec) -> Witness:
        slices = tuple(Slice(s.time, s.shape.translate(v)) for s in source_slices)
        return Witness(v, slices)

    tried = 0
    for cand in candidates:
        options = [cand]
        pt = sgeom.Point(cand.tx, cand.ty)
        for curve in m.boundary_targets:
            if curve.is_empty:
                continue
            proj = curve if isinstance(curve, sgeom.Point) else curve.interpolate(curve.project(pt))
            if proj.distance(pt) <= 4 * eps.geom_eps:
                options.insert(0, Vec(proj.x, proj.y))
        for v in options:
            if verified(v):
                return finish(v)
        tried += 1
        if tried >= 64:
            break
    # Open relation families (interior overlap, strict containment, strict
    # disconnection) exclude the region's own boundary, so step inward.  The
    # norm penalty stays far below the grid_step*sqrt(2) minimality bound.
    xmin, ymin, xmax, ymax = m.workspace.box
    diag = math.hypot(xmax - xmin, ymax - ymin)
    origin = sgeom.Point(0.0, 0.0)
    for factor in (1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 5e-3):
        eroded = m.region.geom.buffer(-factor * diag)
        if eroded.is_empty:
            continue
        _, near = shapely.ops.nearest_points(origin, eroded)
        v = Vec(near.x, near.y)
        if verified(v):
            return finish(v)
    raise NoWitness("no candidate vector passed relation verification")


# ---------------------------------------------------------------------------
# Whole-program translation checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TranslationModel:
    """One scenario: which frame realizes each existential constraint, and
    the witnesses that ground every translated entity under that choice.
    Witnesses are materialized for the first ``witness_models`` models only;
    later models carry an empty mapping."""

    existential_choices: tuple[tuple[RelationAtom, int], ...]
    witnesses: dict

    def __hash__(self):  # pragma: no cover - convenience only
        return hash(self.existential_choices)


@dataclass
class TranslationCheck:
    consistent: bool
    per_slice_sets: dict
    witnesses: dict
    models: list


def _conv_set(bases: frozenset[str]) -> frozenset[str]:
    return frozenset(RCC8_CONVERSE[b] for b in bases)


@dataclass
class _EntityProblem:
    entity: str
    source: STObject
    shared: bool
    universal: dict  # time -> list[(ground Polygon, frozenset)]
    existentials: list  # [(atom, [(time, ground Polygon)], frozenset)]


def _atom_slice_requirements(atom: RelationAtom, unground: str, source: STObject,
                             ground_obj: STObject, problem: _EntityProblem) -> None:
    if atom.aspect != "topology":
        raise UnsupportedConstraintShape(
            f"only mereotopological constraints are supported on translated "
            f"objects, got {atom.aspect}/{atom.name}"
        )
    sem = TOPOLOGY_SEMS[atom.name]
    flip = atom.args.index(unground) == 1
    conv = _conv_set if flip else (lambda s: s)
    times = [t for t in source.times() if t in atom.interval and t in ground_obj.slices]
    if not times:
        raise UnsupportedConstraintShape(
            f"{atom!r}: no common frames between {unground} and {ground_obj.id}"
        )
    every = conv(sem.every)
    if every != RCC8_ALL:
        for t in times:
            problem.universal.setdefault(t, []).append((ground_obj.slices[t], every))
    if sem.start != sem.every:
        problem.universal.setdefault(times[0], []).append(
            (ground_obj.slices[times[0]], conv(sem.start))
        )
    if sem.end != sem.every:
        problem.universal.setdefault(times[-1], []).append(
            (ground_obj.slices[times[-1]], conv(sem.end))
        )
    if sem.some != sem.every:
        options = [(t, ground_obj.slices[t]) for t in times]
        problem.existentials.append((atom, options, conv(sem.some)))


def check_translated_program(scene: Mapping[str, STObject],
                             translations: Sequence[UngroundTranslation],
                             atoms: Sequence[RelationAtom],
                             ws: Optional[WorkspaceConfig] = None,
                             eps: Epsilon = DEFAULT_EPS,
                             max_models: int = 1,
                             witness_models: int = 1) -> TranslationCheck:
    """Decide whether translations exist satisfying all asserted relations.

    Interval-level assertions decompose into per-frame relation-set
    requirements; universal parts constrain every frame while existential
    parts branch over which frame realizes them, so each reported model names
    its witness frames.  Constraints between two translated objects are not
    supported.
    """
    if ws is None:
        ws = WorkspaceConfig.around(
            [poly for obj in scene.values() for poly in obj.slices.values()]
        )
    by_target = {tr.target_object: tr for tr in translations}
    if len(by_target) != len(translations):
        raise UnsupportedConstraintShape("duplicate translation target")
    problems: dict[str, _EntityProblem] = {}
    for tr in translations:
        source = scene.get(tr.source_object)
        if source is None or not source.slices:
            raise UnsupportedConstraintShape(
                f"translation source {tr.source_object!r} has no ground slices"
            )
        problems[tr.target_object] = _EntityProblem(
            entity=tr.target_object, source=source, shared=tr.shared_vector,
            universal={}, existentials=[],
        )

    ground_violations: list[RelationAtom] = []
    for atom in sorted(atoms, key=lambda a: a.sort_key()):
        unground_args = [a for a in atom.args if a in by_target]
        if len(unground_args) == 2:
            raise UnsupportedConstraintShape(
                f"{atom!r} relates two translated objects"
            )
        if not unground_args:
            if not _ground_atom_holds(scene, atom, eps):
                ground_violations.append(atom)
            continue
        unground = unground_args[0]
        other = atom.args[0] if atom.args[1] == unground else atom.args[1]
        if other not in scene or other in by_target:
            raise UnsupportedConstraintShape(f"{atom!r}: ground counterpart unavailable")
        _atom_slice_requirements(atom, unground, problems[unground].source,
                                 scene[other], problems[unground])

    if ground_violations:
        return TranslationCheck(False, {}, {}, [])

    cache: dict = {}

    def region_for(p0: Polygon, p1: Polygon, bases: frozenset[str]) -> SolutionSet:
        key = (p0, p1, bases)
        if key not in cache:
            cache[key] = solution_set(p0, p1, bases, ws, eps)
        return cache[key]

    per_slice_sets: dict = {}
    all_models: list[TranslationModel] = []
    witnesses: dict = {}

    entity_models: list[list] = []
    for entity in sorted(problems):
        prob = problems[entity]
        models = _solve_entity(prob, region_for, ws, eps, max_models, per_slice_sets)
        if not models:
            return TranslationCheck(False, per_slice_sets, {}, [])
        entity_models.append((prob, models))

    # combine independent entities into joint models, capped at max_models
    for idx, combo in enumerate(
        itertools.islice(itertools.product(*(m for _, m in entity_models)), max_models)
    ):
        choices: list = []
        wit: dict = {}
        for (prob, _), entity_choice in zip(entity_models, combo):
            choices.extend(entity_choice[0])
            if idx < witness_models:
                wit[prob.entity] = _materialize_witnesses(prob, entity_choice[1], ws, eps)
        all_models.append(TranslationModel(tuple(choices), wit))
    if all_models:
        witnesses = all_models[0].witnesses
    return TranslationCheck(bool(all_models), per_slice_sets, witnesses, all_models)


def _materialize_witnesses(prob: "_EntityProblem", payload, ws: WorkspaceConfig,
                           eps: Epsilon) -> tuple[Witness, ...]:
    source_slices = [Slice(t, prob.source.slices[t]) for t in prob.source.times()]
    if prob.shared:
        return (minimal_witness(payload, source_slices, eps),)
    out: list[Witness] = []
    for s in source_slices:
        m = payload.get(s.time)
        if m is None:
            out.append(Witness(Vec(0.0, 0.0), (s,)))
        else:
            out.append(minimal_witness(m, (s,), eps))
    return tuple(out)


def _ground_atom_holds(scene: Mapping[str, STObject], atom: RelationAtom,
                       eps: Epsilon) -> bool:
    from .spacetime import DeriveConfig, derive_movement, derive_size, derive_topology

    cfg = DeriveConfig(eps=eps, near_threshold=1.0)
    objs = [scene[a] for a in atom.args]
    if atom.aspect == "topology":
        derived = derive_topology(objs[0], objs[1], atom.interval, cfg)
    elif atom.aspect == "size":
        derived = derive_size(objs[0] if len(objs) == 1 else tuple(objs), atom.interval, cfg)
    else:
        derived = derive_movement(objs[0], objs[1] if len(objs) > 1 else None,
                                  atom.interval, cfg)
    return atom in derived


def _solve_entity(prob: _EntityProblem, region_for, ws: WorkspaceConfig,
                  eps: Epsilon, max_models: int, per_slice_sets: dict) -> list:
    """All (up to max_models) scenario models for one translated entity.

    Returns (existential_choices, payload) tuples, where the payload carries
    the feasible regions (one set for a shared vector, a per-frame map
    otherwise) from which witnesses can be materialized later.
    """
    base: dict[int, SolutionSet] = {}
    for t, reqs in sorted(prob.universal.items()):
        sets = [region_for(prob.source.slices[t], g, bases) for g, bases in reqs]
        base[t] = intersect_solution_sets(sets)
        per_slice_sets[(prob.entity, t)] = base[t]
        if base[t].is_empty:
            return []

    models: list = []
    if prob.shared:
        shared_base = None
        for t, s in sorted(base.items()):
            shared_base = s if shared_base is None else intersect_solution_sets([shared_base, s])
            if shared_base.is_empty:
                return []
        if shared_base is None:
            shared_base = full_solution_set(ws)

        def descend(idx: int, acc: SolutionSet, choices: tuple) -> None:
            if len(models) >= max_models:
                return
            if idx == len(prob.existentials):
                models.append((choices, acc))
                return
            atom, options, bases = prob.existentials[idx]
            for t, ground in options:
                if len(models) >= max_models:
                    return
                narrowed = intersect_solution_sets(
                    [acc, region_for(prob.source.slices[t], ground, bases)]
                )
                if narrowed.is_empty:
                    continue
                descend(idx + 1, narrowed, choices + ((atom, t),))

        descend(0, shared_base, ())
        return models

    def descend_ps(idx: int, overlay: dict, choices: tuple) -> None:
        if len(models) >= max_models:
            return
        if idx == len(prob.existentials):
            final = dict(base)
            final.update(overlay)
            models.append((choices, final))
            return
        atom, options, bases = prob.existentials[idx]
        for t, ground in options:
            if len(models) >= max_models:
                return
            current = overlay.get(t, base.get(t, full_solution_set(ws)))
            narrowed = intersect_solution_sets(
                [current, region_for(prob.source.slices[t], ground, bases)]
            )
            if narrowed.is_empty:
                continue
            child = dict(overlay)
            child[t] = narrowed
            descend_ps(idx + 1, child, choices + ((atom, t),))

    descend_ps(0, {}, ())
    return models


# ---------------------------------------------------------------------------
# Export helpers
# ---------------------------------------------------------------------------


def region_to_svg(regions: Sequence[tuple[PolygonSet, str]], path: Optional[str] = None,
                  scale: float = 100.0) -> str:
    """Render regions as an SVG document; each entry is (region, fill colour)."""
    bounds = [r.bounds for r, _ in regions if not r.is_empty]
    if bounds:
        xmin = min(b[0] for b in bounds)
        ymin = min(b[1] for b in bounds)
        xmax = max(b[2] for b in bounds)
        ymax = max(b[3] for b in bounds)
    else:
        xmin = ymin = 0.0
        xmax = ymax = 1.0
    pad = 0.05 * max(xmax - xmin, ymax - ymin, 1.0)
    view = (
        (xmin - pad) * scale,
        -(ymax + pad) * scale,
        (xmax - xmin + 2 * pad) * scale,
        (ymax - ymin + 2 * pad) * scale,
    )
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{view[0]:.2f} {view[1]:.2f} '
        f'{view[2]:.2f} {view[3]:.2f}">',
    ]
    for region, colour in regions:
        for poly in _polygonal_parts(region.geom):
            d_parts = []
            for ring in [poly.exterior, *poly.interiors]:
                pts = " L ".join(f"{x * scale:.3f} {-y * scale:.3f}" for x, y in ring.coords)
                d_parts.append(f"M {pts} Z")
            lines.append(
                f'  <path d="{" ".join(d_parts)}" fill="{colour}" fill-opacity="0.5" '
                f'fill-rule="evenodd" stroke="black" stroke-width="0.5"/>'
            )
    lines.append("</svg>")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
