"""Synthetic benchmark harnesses and the cost-optimal motion planner.

The generators build scenes of drifting random polygons with per-object
direction, speed, angular speed, and acceleration.  The four harnesses
measure relation-derivation scaling, robustness of interpolation under slice
deletion, translation-model enumeration, and purely qualitative consistency
checking.  The planner searches move/stay assignments per object and step in
increasing cost order and grounds the cheapest feasible assignment with
minimum-norm translations.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
import statistics
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .geometry import DegenerateArea, Point, Polygon, SelfIntersecting, Vec, rcc8, validate_polygon
from .spacetime import (
    DeriveConfig,
    Interval,
    RelationAtom,
    STObject,
    Slice,
    derive_all,
    interpolate,
)
from . import algebra
from . import translation as trans

log = logging.getLogger(__name__)

DEFAULT_SEED = 20240817


@dataclass(frozen=True)
class MotionParams:
    """Per-object motion: heading, speed, and their fixed per-frame changes."""

    direction: tuple[float, float]
    speed: float
    angular_speed: float
    acceleration: float

    def __post_init__(self) -> None:
        if not (-0.1 <= self.angular_speed <= 0.1 and -0.1 <= self.acceleration <= 0.1):
            raise ValueError("angular speed and acceleration must lie in [-0.1, 0.1]")


def _random_polygon(rng: random.Random, radius: float = 0.45) -> Polygon:
    while True:
        n = rng.randint(5, 10)
        angles = sorted(rng.uniform(0.0, 2.0 * math.pi) for _ in range(n))
        if n > 1 and min(b - a for a, b in zip(angles, angles[1:])) < 0.05:
            continue
        pts = [
            Point(rng.uniform(0.35, 1.0) * radius * math.cos(t),
                  rng.uniform(0.35, 1.0) * radius * math.sin(t))
            for t in angles
        ]
        try:
            return validate_polygon(pts)
        except (SelfIntersecting, DegenerateArea):
            continue


def gen_scene(n: int, m: int, seed: int = DEFAULT_SEED) -> dict[str, STObject]:
    """n objects over m frames; deterministic for a given seed.

    Every object carries a random 5-10 vertex polygon.  Per frame the position
    advances along the heading by the current speed, then the heading turns by
    the angular speed and the speed grows by the acceleration.
    """
    if n < 1 or m < 1:
        raise ValueError("need at least one object and one frame")
    rng = random.Random(seed)
    side = 3.0 * math.sqrt(n)
    log.info("gen_scene: n=%d m=%d seed=%d workspace_side=%.2f", n, m, seed, side)
    scene: dict[str, STObject] = {}
    for i in range(n):
        shape = _random_polygon(rng)
        x = rng.uniform(0.0, side)
        y = rng.uniform(0.0, side)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        params = MotionParams(
            direction=(math.cos(theta), math.sin(theta)),
            speed=rng.uniform(0.0, 0.5),
            angular_speed=rng.uniform(-0.1, 0.1),
            acceleration=rng.uniform(-0.1, 0.1),
        )
        obj = STObject(f"o{i}")
        dx, dy = params.direction
        speed = params.speed
        for t in range(m):
            obj.add(t, shape.translate(Vec(x, y)))
            x += dx * speed
            y += dy * speed
            cos_w = math.cos(params.angular_speed)
            sin_w = math.sin(params.angular_speed)
            dx, dy = dx * cos_w - dy * sin_w, dx * sin_w + dy * cos_w
            speed += params.acceleration
        scene[obj.id] = obj
    return scene


def _median_time(fn, runs: int = 5) -> float:
    fn()  # warm-up discarded
    samples = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def run_t1(n: int, m: int, seed: int = DEFAULT_SEED) -> dict[str, float]:
    """Wall time for the two derivation workloads: one pair over all steps,
    and all pairs over one step."""
    scene = gen_scene(n, m, seed)
    cfg = DeriveConfig.for_scene(scene)
    ids = sorted(scene)

    def one_pair() -> None:
        derive_all(scene, Interval(0, m - 1), pairs=[(ids[0], ids[1])] if n > 1 else [], cfg=cfg)

    def all_pairs() -> None:
        derive_all(scene, Interval(0, min(1, m - 1)), cfg=cfg)

    return {
        "onePairAllSteps": _median_time(one_pair) if n > 1 else 0.0,
        "allPairsOneStep": _median_time(all_pairs),
    }


def t1_csv(rows: Iterable[tuple[int, int, dict[str, float]]]) -> str:
    lines = ["n,m,workload,seconds"]
    for n, m, result in rows:
        for workload in ("onePairAllSteps", "allPairsOneStep"):
            lines.append(f"{n},{m},{workload},{result[workload]:.6f}")
    return "\n".join(lines) + "\n"


def _fill_deleted(obj: STObject, original_times: Sequence[int]) -> STObject:
    """Reconstruct deleted slices: interpolate when bracketed, otherwise hold
    the nearest surviving slice."""
    filled = STObject(obj.id, dict(obj.slices))
    ts = obj.times()
    for t in original_times:
        if t in filled.slices:
            continue
        if ts and ts[0] < t < ts[-1]:
            filled.slices[t] = interpolate(obj, t)
        elif ts:
            nearest = min(ts, key=lambda u: (abs(u - t), u))
            filled.slices[t] = obj.slices[nearest]
    return filled


def run_t2(delete_fraction: float, seed: int = DEFAULT_SEED,
           n: int = 10, m: int = 20) -> float:
    """Fraction of relation atoms preserved after deleting random slices and
    reconstructing them by interpolation."""
    if not (0.0 <= delete_fraction < 1.0):
        raise ValueError("delete_fraction must lie in [0, 1)")
    scene = gen_scene(n, m, seed)
    cfg = DeriveConfig.for_scene(scene)
    interval = Interval(0, m - 1)
    reference = derive_all(scene, interval, cfg=cfg)

    rng = random.Random(seed ^ 0x5EED)
    slots = [(obj_id, t) for obj_id in sorted(scene) for t in range(m)]
    k = round(delete_fraction * len(slots))
    deleted = set(rng.sample(slots, k))
    damaged: dict[str, STObject] = {}
    for obj_id, obj in scene.items():
        kept = {t: s for t, s in obj.slices.items() if (obj_id, t) not in deleted}
        damaged[obj_id] = _fill_deleted(STObject(obj_id, kept), range(m))
    rederived = derive_all(damaged, interval, cfg=cfg)
    if not reference:
        return 1.0
    return len(reference & rederived) / len(reference)


def t2_csv(rows: Iterable[tuple[float, int, float]]) -> str:
    lines = ["fraction,seed,accuracy"]
    for fraction, seed, accuracy in rows:
        lines.append(f"{fraction},{seed},{accuracy:.6f}")
    return "\n".join(lines) + "\n"


# Drawn from the relations a random scene can typically realize, so that
# instances are satisfiable and the existential branching produces the large
# model counts this harness is meant to exercise.
T3_RELATION_POOL = ("dc", "dr", "c", "o", "po", "ec")


def run_t3(n: int, seed: int = DEFAULT_SEED, m: int = 10,
           max_models: int = 10_000) -> dict[str, float]:
    """Translate one object with m slices against n ground objects, one
    mereotopological assertion each, and count scenario models.

    Each slice carries its own translation vector; which slice realizes each
    existential relation is a scenario choice, so model counts multiply."""
    t0 = time.perf_counter()
    rng = random.Random(seed)
    scene = gen_scene(n, m, seed) if n > 0 else {}
    mover_src = STObject("_src_g")
    side = 3.0 * math.sqrt(max(n, 1))
    for t in range(m):
        mover_src.add(
            t,
            _random_polygon(rng).translate(
                Vec(rng.uniform(0, side), rng.uniform(0, side))
            ),
        )
    full_scene = dict(scene)
    full_scene[mover_src.id] = mover_src
    atoms = [
        RelationAtom(
            "topology",
            T3_RELATION_POOL[rng.randrange(len(T3_RELATION_POOL))],
            ("g", obj_id),
            Interval(0, m - 1),
        )
        for obj_id in sorted(scene)
    ]
    ws = trans.WorkspaceConfig.around(
        [p for o in full_scene.values() for p in o.slices.values()]
    )
    check = trans.check_translated_program(
        full_scene,
        [trans.UngroundTranslation(mover_src.id, "g", shared_vector=False)],
        atoms,
        ws=ws,
        max_models=max_models,
    )
    seconds = time.perf_counter() - t0
    log.info("run_t3: n=%d seed=%d models=%d %.3fs", n, seed, len(check.models), seconds)
    return {"models": float(len(check.models)), "seconds": seconds}


def t3_csv(rows: Iterable[tuple[int, dict[str, float]]]) -> str:
    lines = ["n,models,seconds"]
    for n, result in rows:
        lines.append(f"{n},{int(result['models'])},{result['seconds']:.6f}")
    return "\n".join(lines) + "\n"


# The classic random-instance scheme draws edge labels from the eight base
# mereotopological relations.
T4_RELATION_POOL = ("dc", "ec", "po", "tpp", "ntpp", "tppi", "ntppi", "eq")


def random_network(n: int, rng: random.Random, degree: float = 5.0,
                   alternatives: int = 4,
                   pool: Sequence[str] = T4_RELATION_POOL) -> algebra.QualitativeNetwork:
    """Random qualitative network: pairs drawn until the mean degree target,
    each carrying a disjunction of distinct randomly chosen relations."""
    nodes = [f"x{i}" for i in range(n)]
    net = algebra.QualitativeNetwork(nodes)
    all_pairs = list(itertools.combinations(nodes, 2))
    target_edges = min(len(all_pairs), max(1, round(degree * n / 2)))
    rng.shuffle(all_pairs)
    for a, b in all_pairs[:target_edges]:
        if rng.random() < 0.5:
            a, b = b, a
        rels = rng.sample(pool, alternatives)
        net.constrain(a, b, rels)
    return net


def run_t4(n: int, seed: int = DEFAULT_SEED, trials: int = 10,
           table: Optional[algebra.RuleTable] = None) -> dict:
    """Consistency checking of random qualitative networks; reports the
    fraction of trials with at least one model and per-trial runtimes."""
    if table is None:
        table = algebra.default_rule_table()
    results = []
    for trial in range(trials):
        rng = random.Random(seed * 1_000_003 + trial)
        net = random_network(n, rng)
        t0 = time.perf_counter()
        models = algebra.enumerate_scenarios(net, table, limit=1)
        seconds = time.perf_counter() - t0
        results.append({"trial": trial, "models": len(models), "seconds": seconds})
    fraction = sum(1 for r in results if r["models"]) / len(results)
    mean_seconds = statistics.mean(r["seconds"] for r in results)
    log.info("run_t4: n=%d consistent=%.0f%% mean=%.3fs", n, 100 * fraction, mean_seconds)
    return {"n": n, "consistent_fraction": fraction, "mean_seconds": mean_seconds,
            "trials": results}


def t4_csv(rows: Iterable[dict]) -> str:
    lines = ["n,trial,models,seconds"]
    for result in rows:
        for tr in result["trials"]:
            lines.append(f"{result['n']},{tr['trial']},{tr['models']},{tr['seconds']:.6f}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Abductive motion planning
# ---------------------------------------------------------------------------


class NoPlan(ValueError):
    pass


@dataclass(frozen=True)
class PlanProblem:
    """Initial shapes, movable objects with move costs, hard constraints over
    the horizon, and a goal atom at its stated interval."""

    initial: Mapping[str, Polygon]
    movable: tuple[str, ...]
    move_costs: Mapping[str, int]
    hard_constraints: tuple[RelationAtom, ...]
    goal: RelationAtom
    horizon: Interval
    workspace: Optional[trans.WorkspaceConfig] = None

    def __post_init__(self) -> None:
        for ent in self.movable:
            if ent not in self.initial:
                raise ValueError(f"movable {ent!r} has no initial shape")
            if self.move_costs.get(ent, -1) < 0:
                raise ValueError(f"movable {ent!r} needs a non-negative move cost")
        for atom in (*self.hard_constraints, self.goal):
            for ent in atom.args:
                if ent not in self.initial:
                    raise ValueError(f"{atom!r} references unknown object {ent!r}")


@dataclass(frozen=True)
class PlanSolution:
    moves: tuple[tuple[str, int], ...]  # (object, step) pairs that move
    trajectories: Mapping[str, tuple[trans.Witness, ...]]
    total_cost: int


def _atom_frame_requirements(atom: RelationAtom, horizon: Interval):
    """Per-frame slice-relation sets for a planner atom.

    Existential components must be pinned to a single frame (a one-frame
    interval); wider existential constraints would branch into scenarios.
    """
    if atom.aspect != "topology":
        raise NoPlan(f"planner constraints must be topological, got {atom!r}")
    sem = algebra.TOPOLOGY_SEMS[atom.name]
    frames = [t for t in range(horizon.start, horizon.end + 1) if t in atom.interval]
    if not frames:
        raise NoPlan(f"{atom!r} lies outside the horizon")
    reqs: dict[int, frozenset[str]] = {}

    def tighten(t: int, s: frozenset) -> None:
        reqs[t] = reqs.get(t, frozenset(algebra.RCC8_ALL)) & s

    for t in frames:
        tighten(t, sem.every)
    tighten(frames[0], sem.start)
    tighten(frames[-1], sem.end)
    if sem.some != sem.every:
        if len(frames) != 1:
            raise NoPlan(
                f"{atom!r}: existential constraints must name a single frame"
            )
        tighten(frames[0], sem.some)
    return reqs


def plan(problem: PlanProblem) -> PlanSolution:
    """Cheapest move/stay assignment whose per-frame constraints are feasible.

    Assignments are explored in increasing (cost, lexicographic) order, so the
    first feasible one is optimal.  Assignments that displace both ends of a
    constrained pair are skipped (joint translation spaces are out of scope).
    """
    horizon = problem.horizon
    steps = list(range(horizon.start + 1, horizon.end + 1))
    movables = tuple(sorted(problem.movable))
    slots = [(obj, step) for obj in movables for step in steps]
    ws = problem.workspace
    if ws is None:
        ws = trans.WorkspaceConfig.around(list(problem.initial.values()))
    atoms = (*problem.hard_constraints, problem.goal)
    atom_reqs = [(atom, _atom_frame_requirements(atom, horizon)) for atom in atoms]

    patterns = sorted(
        itertools.product((False, True), repeat=len(slots)),
        key=lambda p: (sum(problem.move_costs[slots[i][0]] for i, on in enumerate(p) if on), p),
    )
    region_cache: dict = {}

    def region_for(p0, p1, bases):
        key = (p0, p1, bases)
        if key not in region_cache:
            region_cache[key] = trans.solution_set(p0, p1, bases, ws)
        return region_cache[key]

    for pattern in patterns:
        moves = tuple(slot for slot, on in zip(slots, pattern) if on)
        displaced = {obj for obj, _ in moves}
        solution = _try_assignment(problem, moves, displaced, atom_reqs, region_for, ws)
        if solution is not None:
            return solution
    raise NoPlan("no move/stay assignment satisfies the constraints")


def _try_assignment(problem: PlanProblem, moves, displaced, atom_reqs, region_for,
                    ws) -> Optional[PlanSolution]:
    horizon = problem.horizon
    frames = list(range(horizon.start, horizon.end + 1))
    move_steps: dict[str, list[int]] = {obj: [] for obj in displaced}
    for obj, step in moves:
        move_steps[obj].append(step)

    # run r of a displaced object = frames sharing one displacement vector
    runs: dict[str, list[list[int]]] = {}
    for obj in displaced:
        breaks = sorted(move_steps[obj])
        segments: list[list[int]] = [[frames[0]]]
        for t in frames[1:]:
            if t in breaks:
                segments.append([t])
            else:
                segments[-1].append(t)
        runs[obj] = segments

    run_sets: dict[tuple[str, int], Optional[trans.SolutionSet]] = {}
    for atom, reqs in atom_reqs:
        a, b = atom.args
        a_d, b_d = a in displaced, b in displaced
        if a_d and b_d:
            return None  # both ends translated: unsupported shape, skip
        if not a_d and not b_d:
            for t, bases in reqs.items():
                if rcc8(problem.initial[a], problem.initial[b]) not in bases:
                    return None
            continue
        mover, anchor = (a, b) if a_d else (b, a)
        flip = not a_d
        for t, bases in reqs.items():
            use = frozenset(trans.RCC8_CONVERSE[x] for x in bases) if flip else bases
            run_idx = next(i for i, seg in enumerate(runs[mover]) if t in seg)
            if run_idx == 0:
                # undisplaced prefix: the initial placement must already comply
                if rcc8(problem.initial[mover], problem.initial[anchor]) not in use:
                    return None
                continue
            key = (mover, run_idx)
            m = region_for(problem.initial[mover], problem.initial[anchor], use)
            prev = run_sets.get(key)
            merged = m if prev is None else trans.intersect_solution_sets([prev, m])
            if merged.is_empty:
                return None
            run_sets[key] = merged

    trajectories: dict[str, tuple[trans.Witness, ...]] = {}
    for obj in sorted(problem.initial):
        base = problem.initial[obj]
        if obj not in displaced:
            trajectories[obj] = tuple(
                trans.Witness(Vec(0.0, 0.0), (Slice(t, base),)) for t in frames
            )
            continue
        vectors: dict[int, Vec] = {}
        for idx, seg in enumerate(runs[obj]):
            if idx == 0:
                vec = Vec(0.0, 0.0)
            else:
                m = run_sets.get((obj, idx))
                if m is None:
                    m = trans.full_solution_set(ws)
                try:
                    vec = trans.minimal_witness(m).vector
                except trans.NoWitness:
                    return None
            for t in seg:
                vectors[t] = vec
        trajectories[obj] = tuple(
            trans.Witness(vectors[t], (Slice(t, base.translate(vectors[t])),)) for t in frames
        )

    # independent re-verification of every frame with the ground classifier
    for atom, reqs in atom_reqs:
        a, b = atom.args
        for t, bases in reqs.items():
            shape_a = trajectories[a][t - horizon.start].ground_slices[0].shape
            shape_b = trajectories[b][t - horizon.start].ground_slices[0].shape
            if rcc8(shape_a, shape_b) not in bases:
                return None

    cost = sum(problem.move_costs[obj] for obj, _ in moves)
    return PlanSolution(moves=moves, trajectories=trajectories, total_cost=cost)


def example_desk_problem() -> PlanProblem:
    """Synthetic desk layout: a hand must reach a cup across a laptop that
    nothing may touch; only the hand should end up moving."""
    laptop = validate_polygon([(-1.5, 0.0), (1.5, 0.0), (1.5, 2.0), (-1.5, 2.0)])
    hand = validate_polygon([(-0.4, -2.4), (0.4, -2.4), (0.4, -1.6), (-0.4, -1.6)])
    cup = validate_polygon([(-0.3, 3.2), (0.3, 3.2), (0.3, 3.8), (-0.3, 3.8)])
    horizon = Interval(0, 2)
    constraints = (
        RelationAtom("topology", "dc", ("hand", "laptop"), horizon),
        RelationAtom("topology", "dc", ("cup", "laptop"), horizon),
    )
    goal = RelationAtom("topology", "ec", ("hand", "cup"), Interval(2, 2))
    return PlanProblem(
        initial={"laptop": laptop, "hand": hand, "cup": cup},
        movable=("cup", "hand", "laptop"),
        move_costs={"hand": 1, "cup": 2, "laptop": 5},
        hard_constraints=constraints,
        goal=goal,
        horizon=horizon,
    )
