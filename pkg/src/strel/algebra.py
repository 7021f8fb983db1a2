"""Purely qualitative reasoning over relation networks.

The vocabulary is the interval-level relation language (mereotopology over
whole histories plus binary movement relations).  Property rules over that
vocabulary (irreflexivity, converses, implications, mutual and transitive
inconsistency) are derived symbolically from per-frame relation-set semantics
and the base RCC-8 composition table, then verified against randomly sampled
ground scenes before being retained.  Constraint networks carry disjunctive
relation sets per ordered pair and are closed by 3-path consistency.

A surviving network is only known to be "not 3-path inconsistent"; algebraic
closure here is sound but not complete, so consistency is never claimed.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Optional, Sequence

from .geometry import Point, Polygon, RCC8_CONVERSE, Vec, validate_polygon
from .spacetime import (
    C_S,
    DR_S,
    DeriveConfig,
    Interval,
    O_S,
    P_S,
    PI_S,
    PP_S,
    RCC8_ALL,
    STObject,
    derive_movement,
    interval_topology,
)

log = logging.getLogger(__name__)

TOPOLOGY_NETWORK_VOCAB = (
    "dc", "dr", "ec", "po", "tpp", "ntpp", "tppi", "ntppi", "eq",
    "p", "pp", "c", "o", "split", "merge",
)
MOVEMENT_NETWORK_VOCAB = ("move_parallel", "towards", "away", "follows")
NETWORK_VOCAB: tuple[str, ...] = TOPOLOGY_NETWORK_VOCAB + MOVEMENT_NETWORK_VOCAB
VOCAB_ORDER = {name: i for i, name in enumerate(NETWORK_VOCAB)}
FULL_SET = frozenset(NETWORK_VOCAB)

RULE_KINDS = {
    "reflexive": 1,
    "irreflexive": 1,
    "symmetric": 1,
    "asymmetric": 1,
    "converse": 2,
    "implies": 2,
    "mutuallyInconsistent": 2,
    "transitivelyInconsistent": 3,
}


# ---------------------------------------------------------------------------
# Base composition table (standard RCC-8 weak composition)
# ---------------------------------------------------------------------------

def _fs(*names: str) -> frozenset[str]:
    return frozenset(names)


_ALL8 = RCC8_ALL

RCC8_COMPOSITION: dict[str, dict[str, frozenset[str]]] = {
    "dc": {
        "dc": _ALL8,
        "ec": _fs("dc", "ec", "po", "tpp", "ntpp"),
        "po": _fs("dc", "ec", "po", "tpp", "ntpp"),
        "tpp": _fs("dc", "ec", "po", "tpp", "ntpp"),
        "ntpp": _fs("dc", "ec", "po", "tpp", "ntpp"),
        "tppi": _fs("dc"),
        "ntppi": _fs("dc"),
        "eq": _fs("dc"),
    },
    "ec": {
        "dc": _fs("dc", "ec", "po", "tppi", "ntppi"),
        "ec": _fs("dc", "ec", "po", "tpp", "tppi", "eq"),
        "po": _fs("dc", "ec", "po", "tpp", "ntpp"),
        "tpp": _fs("ec", "po", "tpp", "ntpp"),
        "ntpp": _fs("po", "tpp", "ntpp"),
        "tppi": _fs("dc", "ec"),
        "ntppi": _fs("dc"),
        "eq": _fs("ec"),
    },
    "po": {
        "dc": _fs("dc", "ec", "po", "tppi", "ntppi"),
        "ec": _fs("dc", "ec", "po", "tppi", "ntppi"),
        "po": _ALL8,
        "tpp": _fs("po", "tpp", "ntpp"),
        "ntpp": _fs("po", "tpp", "ntpp"),
        "tppi": _fs("dc", "ec", "po", "tppi", "ntppi"),
        "ntppi": _fs("dc", "ec", "po", "tppi", "ntppi"),
        "eq": _fs("po"),
    },
    "tpp": {
        "dc": _fs("dc"),
        "ec": _fs("dc", "ec"),
        "po": _fs("dc", "ec", "po", "tpp", "ntpp"),
        "tpp": _fs("tpp", "ntpp"),
        "ntpp": _fs("ntpp"),
        "tppi": _fs("dc", "ec", "po", "tpp", "tppi", "eq"),
        "ntppi": _fs("dc", "ec", "po", "tppi", "ntppi"),
        "eq": _fs("tpp"),
    },
    "ntpp": {
        "dc": _fs("dc"),
        "ec": _fs("dc"),
        "po": _fs("dc", "ec", "po", "tpp", "ntpp"),
        "tpp": _fs("ntpp"),
        "ntpp": _fs("ntpp"),
        "tppi": _fs("dc", "ec", "po", "tpp", "ntpp"),
        "ntppi": _ALL8,
        "eq": _fs("ntpp"),
    },
    "tppi": {
        "dc": _fs("dc", "ec", "po", "tppi", "ntppi"),
        "ec": _fs("ec", "po", "tppi", "ntppi"),
        "po": _fs("po", "tppi", "ntppi"),
        "tpp": _fs("po", "tpp", "tppi", "eq"),
        "ntpp": _fs("po", "tpp", "ntpp"),
        "tppi": _fs("tppi", "ntppi"),
        "ntppi": _fs("ntppi"),
        "eq": _fs("tppi"),
    },
    "ntppi": {
        "dc": _fs("dc", "ec", "po", "tppi", "ntppi"),
        "ec": _fs("po", "tppi", "ntppi"),
        "po": _fs("po", "tppi", "ntppi"),
        "tpp": _fs("po", "tppi", "ntppi"),
        "ntpp": _fs("po", "tpp", "ntpp", "tppi", "ntppi", "eq"),
        "tppi": _fs("ntppi"),
        "ntppi": _fs("ntppi"),
        "eq": _fs("ntppi"),
    },
    "eq": {name: _fs(name) for name in RCC8_ALL},
}


def _check_composition_table() -> None:
    # Converse identity: comp(r, s) must equal conv(comp(conv(s), conv(r))).
    for r in RCC8_ALL:
        for s in RCC8_ALL:
            lhs = RCC8_COMPOSITION[r][s]
            rhs = frozenset(
                RCC8_CONVERSE[x]
                for x in RCC8_COMPOSITION[RCC8_CONVERSE[s]][RCC8_CONVERSE[r]]
            )
            if lhs != rhs:
                raise AssertionError(f"composition table asymmetric at ({r}, {s})")


_check_composition_table()


@lru_cache(maxsize=None)
def compose_sets(s1: frozenset, s2: frozenset) -> frozenset:
    out: set[str] = set()
    for a in s1:
        row = RCC8_COMPOSITION[a]
        for b in s2:
            out |= row[b]
    return frozenset(out)


# ---------------------------------------------------------------------------
# Interval-relation semantics as per-frame slice-relation sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Sem:
    """What an interval relation requires of the per-frame slice relations."""

    every: frozenset = _ALL8     # allowed at every frame
    some: frozenset = _ALL8      # some frame must realize one of these
    start: frozenset = _ALL8     # constraint on the first frame
    end: frozenset = _ALL8       # constraint on the last frame

    def normalized(self) -> "_Sem":
        return _Sem(
            self.every,
            self.some & self.every,
            self.start & self.every,
            self.end & self.every,
        )

    def converse(self) -> "_Sem":
        conv = lambda s: frozenset(RCC8_CONVERSE[x] for x in s)
        return _Sem(conv(self.every), conv(self.some), conv(self.start), conv(self.end))


TOPOLOGY_SEMS: dict[str, _Sem] = {
    name: sem.normalized()
    for name, sem in {
        "dc": _Sem(every=_fs("dc")),
        "dr": _Sem(every=DR_S),
        "ec": _Sem(every=DR_S, some=_fs("ec")),
        "po": _Sem(some=_fs("po")),
        "tpp": _Sem(every=P_S, some=_fs("tpp")),
        "ntpp": _Sem(every=_fs("ntpp")),
        "tppi": _Sem(every=PI_S, some=_fs("tppi")),
        "ntppi": _Sem(every=_fs("ntppi")),
        "eq": _Sem(every=_fs("eq")),
        "p": _Sem(every=P_S),
        "pp": _Sem(every=P_S, some=PP_S),
        "c": _Sem(some=C_S),
        "o": _Sem(some=O_S),
        "split": _Sem(start=P_S, end=_fs("dc")),
        "merge": _Sem(start=_fs("dc"), end=P_S),
    }.items()
}


def _joint_infeasible(sems: Sequence[_Sem]) -> bool:
    """True when no slice-relation sequence can satisfy all sems at once.

    Witness frames are treated as independent (as in intervals with at least
    three frames), so infeasibility verdicts hold for every interval length.
    """
    every = frozenset(_ALL8)
    for s in sems:
        every &= s.every
    if not every:
        return True
    start = every
    end = every
    for s in sems:
        start &= s.start
        end &= s.end
    if not start or not end:
        return True
    return any(not (s.some & every) for s in sems)


def _entails(s1: _Sem, s2: _Sem) -> bool:
    """Every history satisfying s1 also satisfies s2."""
    if not (s1.every <= s2.every and s1.start <= s2.start and s1.end <= s2.end):
        return False
    return (
        s1.some <= s2.some
        or s1.every <= s2.some
        or s1.start <= s2.some
        or s1.end <= s2.some
    )


def _bad_triple(s1: _Sem, s2: _Sem, s3: _Sem) -> bool:
    """r1(A,B), r2(B,C), r3(A,C) jointly impossible at the slice level."""
    k_every = compose_sets(s1.every, s2.every)
    if not (s3.every & k_every):
        return True
    if not (s3.some & k_every):
        return True
    if not (s3.every & compose_sets(s1.some, s2.every)):
        return True
    if not (s3.every & compose_sets(s1.every, s2.some)):
        return True
    if not (s3.start & compose_sets(s1.start, s2.start)):
        return True
    if not (s3.end & compose_sets(s1.end, s2.end)):
        return True
    return False


# ---------------------------------------------------------------------------
# Property rules and the rule table
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class PropertyRule:
    kind: str
    relations: tuple[str, ...]

    def __post_init__(self) -> None:
        arity = RULE_KINDS.get(self.kind)
        if arity is None:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if len(self.relations) != arity:
            raise ValueError(f"{self.kind} takes {arity} relation(s)")
        for r in self.relations:
            if r not in VOCAB_ORDER:
                raise ValueError(f"unknown relation {r!r}")

    def line(self) -> str:
        return " ".join((self.kind,) + self.relations)


class RuleTable:
    """An immutable set of verified property rules plus lookup structures."""

    def __init__(self, rules: Iterable[PropertyRule], provenance: str = "derived",
                 version: int = 1):
        self.rules: frozenset[PropertyRule] = frozenset(rules)
        self.provenance = provenance
        self.version = version
        self._validate()
        self._compile()

    def _validate(self) -> None:
        reflexive = {r.relations[0] for r in self.rules if r.kind == "reflexive"}
        irreflexive = {r.relations[0] for r in self.rules if r.kind == "irreflexive"}
        if reflexive & irreflexive:
            raise ValueError(f"rules mark {reflexive & irreflexive} both reflexive and irreflexive")
        symmetric = {r.relations[0] for r in self.rules if r.kind == "symmetric"}
        asymmetric = {r.relations[0] for r in self.rules if r.kind == "asymmetric"}
        if symmetric & asymmetric:
            raise ValueError(f"rules mark {symmetric & asymmetric} both symmetric and asymmetric")
        conv: dict[str, str] = {}
        for r in self.rules:
            if r.kind == "converse":
                a, b = r.relations
                if conv.setdefault(a, b) != b:
                    raise ValueError(f"{a} has two converse partners")

    def _compile(self) -> None:
        self.irreflexive: frozenset[str] = frozenset(
            r.relations[0] for r in self.rules if r.kind in ("irreflexive",)
        ) | frozenset(r.relations[0] for r in self.rules if r.kind == "asymmetric")
        self.asymmetric: frozenset[str] = frozenset(
            r.relations[0] for r in self.rules if r.kind == "asymmetric"
        )
        self.reflexive: frozenset[str] = frozenset(
            r.relations[0] for r in self.rules if r.kind == "reflexive"
        )
        conv: dict[str, str] = {}
        for r in self.rules:
            if r.kind == "symmetric":
                conv[r.relations[0]] = r.relations[0]
            elif r.kind == "converse":
                conv[r.relations[0]] = r.relations[1]
        self.converse: Mapping[str, str] = conv
        self.mutual: frozenset[frozenset[str]] = frozenset(
            frozenset(r.relations) for r in self.rules if r.kind == "mutuallyInconsistent"
        )
        self.implications: dict[str, frozenset[str]] = {}
        for r in self.rules:
            if r.kind == "implies":
                a, b = r.relations
                self.implications[a] = self.implications.get(a, frozenset()) | {b}
        bad3 = frozenset(r.relations for r in self.rules if r.kind == "transitivelyInconsistent")
        self.bad_triples: frozenset[tuple[str, str, str]] = bad3
        allowed: dict[tuple[str, str], frozenset[str]] = {}
        banned: dict[tuple[str, str], set[str]] = {}
        for r1, r2, r3 in bad3:
            banned.setdefault((r1, r2), set()).add(r3)
        for key, bans in banned.items():
            allowed[key] = FULL_SET - frozenset(bans)
        self._allowed3 = allowed
        row: dict[str, frozenset[str]] = {}
        col: dict[str, frozenset[str]] = {}
        for r1 in NETWORK_VOCAB:
            acc: frozenset[str] = frozenset()
            for r2 in NETWORK_VOCAB:
                acc |= allowed.get((r1, r2), FULL_SET)
                if acc == FULL_SET:
                    break
            row[r1] = acc
        for r2 in NETWORK_VOCAB:
            acc = frozenset()
            for r1 in NETWORK_VOCAB:
                acc |= allowed.get((r1, r2), FULL_SET)
                if acc == FULL_SET:
                    break
            col[r2] = acc
        self._row_union = row
        self._col_union = col

    def allowed_through(self, s_ab: frozenset[str], s_bc: frozenset[str]) -> frozenset[str]:
        """Relations on (A,C) permitted by some pair from the two leg sets."""
        if s_ab == FULL_SET and s_bc == FULL_SET:
            return FULL_SET
        acc: frozenset[str] = frozenset()
        if s_bc == FULL_SET:
            for r1 in s_ab:
                acc |= self._row_union[r1]
                if acc == FULL_SET:
                    return acc
            return acc
        if s_ab == FULL_SET:
            for r2 in s_bc:
                acc |= self._col_union[r2]
                if acc == FULL_SET:
                    return acc
            return acc
        for r1 in s_ab:
            for r2 in s_bc:
                acc |= self._allowed3.get((r1, r2), FULL_SET)
                if acc == FULL_SET:
                    return acc
        return acc

    def cross_incompatible(self, r: str, s: str) -> bool:
        """r on (A,B) cannot hold together with s on (B,A)."""
        if r == s and r in self.asymmetric:
            return True
        cs = self.converse.get(s)
        if cs is None:
            return False
        if cs == r:
            return False
        return frozenset((r, cs)) in self.mutual

    def pair_incompatible(self, r: str, s: str) -> bool:
        """r and s cannot hold together on the same ordered pair."""
        return r != s and frozenset((r, s)) in self.mutual

    # -- serialization ------------------------------------------------------

    def to_text(self) -> str:
        lines = [
            f"# space-time relation property rules, format v{self.version}",
            f"# provenance: {self.provenance}",
            "# line format: kind rel1 [rel2 [rel3]]",
        ]
        lines.extend(sorted(r.line() for r in self.rules))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, provenance: str = "embedded") -> "RuleTable":
        rules = []
        version = 1
        for raw in text.splitlines():
            line = raw.strip()
            if line.startswith("#"):
                if "format v" in line:
                    version = int(line.rsplit("v", 1)[1])
                continue
            if not line:
                continue
            parts = line.split()
            rules.append(PropertyRule(parts[0], tuple(parts[1:])))
        return cls(rules, provenance=provenance, version=version)

    @classmethod
    def load_default(cls) -> "RuleTable":
        text = resources.files("strel").joinpath("data/rules_v1.txt").read_text()
        return cls.from_text(text, provenance="embedded")


_DEFAULT_TABLE: Optional[RuleTable] = None


def default_rule_table() -> RuleTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = RuleTable.load_default()
    return _DEFAULT_TABLE


# ---------------------------------------------------------------------------
# Candidate derivation
# ---------------------------------------------------------------------------

_DIAGONAL_OK = _fs("eq")  # the slice relation of any region to itself

_MOVEMENT_RULES: tuple[PropertyRule, ...] = (
    PropertyRule("irreflexive", ("towards",)),
    PropertyRule("irreflexive", ("away",)),
    PropertyRule("irreflexive", ("follows",)),
    PropertyRule("symmetric", ("move_parallel",)),
    PropertyRule("mutuallyInconsistent", ("move_parallel", "towards")),
    PropertyRule("mutuallyInconsistent", ("move_parallel", "away")),
    PropertyRule("mutuallyInconsistent", ("eq", "towards")),
    PropertyRule("mutuallyInconsistent", ("eq", "away")),
    PropertyRule("mutuallyInconsistent", ("eq", "follows")),
    PropertyRule("transitivelyInconsistent", ("move_parallel", "move_parallel", "towards")),
    PropertyRule("transitivelyInconsistent", ("move_parallel", "move_parallel", "away")),
)


def candidate_rules() -> set[PropertyRule]:
    """Symbolically derived candidates over the relation vocabulary."""
    rules: set[PropertyRule] = set()
    topo = TOPOLOGY_NETWORK_VOCAB
    for name in topo:
        sem = TOPOLOGY_SEMS[name]
        holds_on_diagonal = (
            _DIAGONAL_OK <= sem.every
            and _DIAGONAL_OK <= sem.some
            and _DIAGONAL_OK <= sem.start
            and _DIAGONAL_OK <= sem.end
        )
        possible_on_diagonal = (
            (sem.every & _DIAGONAL_OK)
            and (sem.some & _DIAGONAL_OK)
            and (sem.start & _DIAGONAL_OK)
            and (sem.end & _DIAGONAL_OK)
        )
        if holds_on_diagonal:
            rules.add(PropertyRule("reflexive", (name,)))
        elif not possible_on_diagonal:
            rules.add(PropertyRule("irreflexive", (name,)))
        conv = sem.converse()
        if conv == sem:
            rules.add(PropertyRule("symmetric", (name,)))
        elif _joint_infeasible((sem, conv)):
            rules.add(PropertyRule("asymmetric", (name,)))
    for r1, r2 in itertools.permutations(topo, 2):
        s1, s2 = TOPOLOGY_SEMS[r1], TOPOLOGY_SEMS[r2]
        if s1.converse() == s2:
            rules.add(PropertyRule("converse", (r1, r2)))
        if _entails(s1, s2):
            rules.add(PropertyRule("implies", (r1, r2)))
    for r1, r2 in itertools.combinations(topo, 2):
        if _joint_infeasible((TOPOLOGY_SEMS[r1], TOPOLOGY_SEMS[r2])):
            rules.add(PropertyRule("mutuallyInconsistent", tuple(sorted((r1, r2)))))
    for r1, r2, r3 in itertools.product(topo, repeat=3):
        if _bad_triple(TOPOLOGY_SEMS[r1], TOPOLOGY_SEMS[r2], TOPOLOGY_SEMS[r3]):
            rules.add(PropertyRule("transitivelyInconsistent", (r1, r2, r3)))
    # Histories equal on every frame share centre points throughout, which
    # rules out the distance-based movement relations on the composed pair.
    for r1, r2 in itertools.product(topo, repeat=2):
        k = compose_sets(TOPOLOGY_SEMS[r1].every, TOPOLOGY_SEMS[r2].every)
        if k <= _fs("eq"):
            for r3 in ("towards", "away", "follows"):
                rules.add(PropertyRule("transitivelyInconsistent", (r1, r2, r3)))
    rules.update(_MOVEMENT_RULES)
    return rules


# ---------------------------------------------------------------------------
# Sampling verification
# ---------------------------------------------------------------------------


def _scale_about(poly: Polygon, factor: float, center: Point) -> Polygon:
    pts = [
        Point(center.x + factor * (p.x - center.x), center.y + factor * (p.y - center.y))
        for p in poly.vertices
    ]
    return Polygon(pts, validate=False)


def _random_polygon(rng: random.Random, radius: float = 0.5) -> Polygon:
    while True:
        n = rng.randint(5, 10)
        angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(n))
        if min(b - a for a, b in zip(angles, angles[1:])) < 0.05:
            continue
        pts = [
            Point(rng.uniform(0.3, 1.0) * radius * math.cos(t),
                  rng.uniform(0.3, 1.0) * radius * math.sin(t))
            for t in angles
        ]
        try:
            return validate_polygon(pts)
        except Exception:
            continue


def _square(x: float, y: float, side: float) -> Polygon:
    return Polygon(
        [Point(x, y), Point(x + side, y), Point(x + side, y + side), Point(x, y + side)],
        validate=False,
    )


def _track(base: Polygon, positions: Sequence[tuple[float, float]]) -> list[Polygon]:
    return [base.translate(Vec(x, y)) for x, y in positions]


def sample_scene(rng: random.Random, frames: int = 3) -> dict[str, STObject]:
    """One random 3-object scene drawn from a mix of construction families.

    The families deliberately cover containment, tangency, overlap, equality,
    split/merge, parallel motion, pursuit, and constant-distance orbiting so
    that candidate rules face diverse counterexample opportunities.
    """
    fam = rng.randrange(9)
    tracks: list[list[Polygon]]
    if fam == 0:  # independent random walks, occasional jump
        tracks = []
        for _ in range(3):
            base = _random_polygon(rng)
            x, y = rng.uniform(-2, 2), rng.uniform(-2, 2)
            pos = []
            for _t in range(frames):
                pos.append((x, y))
                if rng.random() < 0.15:
                    x, y = rng.uniform(-2, 2), rng.uniform(-2, 2)
                else:
                    x += rng.uniform(-0.5, 0.5)
                    y += rng.uniform(-0.5, 0.5)
            tracks.append(_track(base, pos))
    elif fam == 1:  # nested stack, drifting together
        a = _random_polygon(rng)
        b = _scale_about(a, rng.uniform(1.6, 2.2), a.centroid)
        c = _scale_about(a, rng.uniform(3.0, 4.0), a.centroid)
        vx, vy = rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)
        pos = [(vx * t, vy * t) for t in range(frames)]
        tracks = [_track(a, pos), _track(b, pos), _track(c, pos)]
    elif fam == 2:  # tangential containment (shared edge, exact coordinates)
        outer = _square(0.0, 0.0, 2.0)
        s = rng.choice([0.5, 1.0])
        y0 = rng.choice([0.0, 0.5, 1.0])
        inner = _square(0.0, min(y0, 2.0 - s), s)
        third = _random_polygon(rng).translate(Vec(rng.uniform(3, 5), rng.uniform(-1, 1)))
        still = [(0.0, 0.0)] * frames
        tracks = [_track(inner, still), _track(outer, still), _track(third, still)]
    elif fam == 3:  # external contact via shared edge
        a = _square(0.0, 0.0, 1.0)
        b = _square(1.0, 0.0, 1.0)
        c = _square(rng.choice([2.0, 3.0]), 0.0, 1.0)
        still = [(0.0, 0.0)] * frames
        tracks = [_track(a, still), _track(b, still), _track(c, still)]
    elif fam == 4:  # split / merge: nested start, separated end
        outer = _random_polygon(rng, radius=1.0)
        inner = _scale_about(outer, 0.4, outer.centroid)
        far = (rng.uniform(4, 6), rng.uniform(-2, 2))
        pos_inner = [(0.0, 0.0)] * (frames - 1) + [far]
        if rng.random() < 0.5:
            pos_inner = pos_inner[::-1]
        third = _random_polygon(rng).translate(Vec(-4.0, 0.0))
        tracks = [
            _track(inner, pos_inner),
            _track(outer, [(0.0, 0.0)] * frames),
            _track(third, [(0.0, 0.0)] * frames),
        ]
    elif fam == 5:  # parallel motion
        v = (rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6))
        pos = [(v[0] * t, v[1] * t) for t in range(frames)]
        tracks = [
            _track(_random_polygon(rng).translate(Vec(0.0, i * 2.0)), pos)
            for i in range(3)
        ]
    elif fam == 6:  # pursuit: a visits b's previous positions
        step = (rng.uniform(0.4, 0.8), rng.uniform(-0.2, 0.2))
        b_pos = [(step[0] * t, step[1] * t) for t in range(frames + 1)]
        a_pos = [(x - step[0], y - step[1]) for x, y in b_pos[:frames]]
        base_a = _random_polygon(rng, radius=0.3)
        base_b = _random_polygon(rng, radius=0.3)
        third = _random_polygon(rng).translate(Vec(0.0, 4.0))
        tracks = [
            _track(base_a, a_pos),
            _track(base_b, b_pos[:frames]),
            _track(third, [(0.0, 0.0)] * frames),
        ]
    elif fam == 7:  # exact copies
        a = _random_polygon(rng)
        v = (rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))
        pos = [(v[0] * t, v[1] * t) for t in range(frames)]
        off = rng.choice([0.0, 3.0])
        tracks = [
            _track(a, pos),
            _track(a, pos),
            _track(a, [(x + off, y + 2.5) for x, y in pos]),
        ]
    else:  # orbit at constant radius around a still object
        center = _random_polygon(rng, radius=0.4)
        sat = _random_polygon(rng, radius=0.25)
        radius = rng.uniform(2.0, 3.0)
        w = rng.uniform(0.3, 1.0)
        pos = [(radius * math.cos(w * t), radius * math.sin(w * t)) for t in range(frames)]
        third = _random_polygon(rng).translate(Vec(0.0, -5.0))
        tracks = [_track(sat, pos), _track(center, [(0.0, 0.0)] * frames),
                  _track(third, [(0.0, 0.0)] * frames)]

    scene: dict[str, STObject] = {}
    for i, tr in enumerate(tracks):
        obj = STObject(f"s{i}")
        for t, shape in enumerate(tr):
            obj.add(t, shape)
        scene[obj.id] = obj
    return scene


def _in_decade_band(value: float, threshold: float) -> bool:
    return threshold / 10.0 < value < threshold * 10.0


def _pair_margins_ok(p: Polygon, q: Polygon, cfg: DeriveConfig) -> bool:
    """Reject configurations whose classification sits near a tolerance edge."""
    eps = cfg.eps
    sp, sq = p.to_shapely(), q.to_shapely()
    d = sp.distance(sq)
    if _in_decade_band(d, eps.geom_eps):
        return False
    if d > 0:
        return True
    a_p, a_q = p.area, q.area
    overlap = sp.intersection(sq).area
    if _in_decade_band(overlap, eps.area_rel_eps * min(a_p, a_q)):
        return False
    if _in_decade_band(a_p + a_q - 2 * overlap, eps.area_rel_eps * max(a_p, a_q)):
        return False
    if _in_decade_band(a_p - overlap, eps.area_rel_eps * a_p):
        return False
    if _in_decade_band(a_q - overlap, eps.area_rel_eps * a_q):
        return False
    bdist = sp.boundary.distance(sq.boundary)
    if _in_decade_band(bdist, eps.geom_eps):
        return False
    return True


def _scene_margins_ok(scene: Mapping[str, STObject], cfg: DeriveConfig) -> bool:
    objs = sorted(scene)
    frames = sorted(next(iter(scene.values())).slices)
    for i, a in enumerate(objs):
        for b in objs[i + 1:]:
            for t in frames:
                if not _pair_margins_ok(scene[a].slices[t], scene[b].slices[t], cfg):
                    return False
            ca = [scene[a].slices[t].centroid for t in frames]
            cb = [scene[b].slices[t].centroid for t in frames]
            for p, q in itertools.combinations(ca, 2):
                if _in_decade_band(math.hypot(p.x - q.x, p.y - q.y), cfg.eps.geom_eps):
                    return False
            diffs = [(q.x - p.x, q.y - p.y) for p, q in zip(ca, cb)]
            for (x1, y1), (x2, y2) in itertools.combinations(diffs, 2):
                if _in_decade_band(math.hypot(x1 - x2, y1 - y2), cfg.eps.geom_eps):
                    return False
    return True


def held_relations(scene: Mapping[str, STObject], cfg: DeriveConfig,
                   ) -> dict[tuple[str, str], frozenset[str]]:
    """Network-vocabulary relations that hold per ordered pair (diagonal included)."""
    from .geometry import rcc8

    objs = sorted(scene)
    frames = sorted(next(iter(scene.values())).slices)
    interval = Interval(frames[0], frames[-1])
    held: dict[tuple[str, str], frozenset[str]] = {}
    for i, a in enumerate(objs):
        for b in objs[i:]:
            if a == b:
                rels = ["eq"] * len(frames)
            else:
                rels = [rcc8(scene[a].slices[t], scene[b].slices[t], cfg.eps) for t in frames]
            fwd = interval_topology(rels)
            rev = interval_topology([RCC8_CONVERSE[r] for r in rels])
            mov_ab = {
                at.name
                for at in derive_movement(scene[a], scene[b], interval, cfg)
                if at.name != "moves" and at.args == (a, b)
            }
            if a == b:
                held[(a, a)] = frozenset(fwd | mov_ab)
            else:
                mov_ba = {
                    at.name
                    for at in derive_movement(scene[b], scene[a], interval, cfg)
                    if at.name != "moves" and at.args == (b, a)
                }
                held[(a, b)] = frozenset(fwd | mov_ab)
                held[(b, a)] = frozenset(rev | mov_ba)
    return held


def find_rule_violations(rules: Iterable[PropertyRule],
                         held: Mapping[tuple[str, str], frozenset[str]],
                         ) -> list[PropertyRule]:
    """Rules contradicted by one scene's held-relation map."""
    objs = sorted({a for a, _ in held})
    bad: list[PropertyRule] = []
    trans_by_leading: dict[tuple[str, str], list[PropertyRule]] = {}
    for rule in rules:
        if rule.kind == "transitivelyInconsistent":
            trans_by_leading.setdefault((rule.relations[0], rule.relations[1]), []).append(rule)

    for rule in rules:
        k = rule.kind
        rel = rule.relations
        if k == "reflexive":
            if any(rel[0] not in held[(o, o)] for o in objs):
                bad.append(rule)
        elif k == "irreflexive":
            if any(rel[0] in held[(o, o)] for o in objs):
                bad.append(rule)
        elif k == "symmetric":
            if any(
                rel[0] in held[(a, b)] and rel[0] not in held[(b, a)]
                for a in objs for b in objs if a != b
            ):
                bad.append(rule)
        elif k == "asymmetric":
            if any(
                rel[0] in held[(a, b)] and rel[0] in held[(b, a)]
                for a in objs for b in objs if a != b
            ):
                bad.append(rule)
        elif k == "converse":
            if any(
                rel[0] in held[(a, b)] and rel[1] not in held[(b, a)]
                for a in objs for b in objs if a != b
            ):
                bad.append(rule)
        elif k == "implies":
            if any(
                rel[0] in held[(a, b)] and rel[1] not in held[(a, b)]
                for a in objs for b in objs if a != b
            ):
                bad.append(rule)
        elif k == "mutuallyInconsistent":
            if any(
                rel[0] in held[(a, b)] and rel[1] in held[(a, b)]
                for a in objs for b in objs if a != b
            ):
                bad.append(rule)

    for a, b, c in itertools.permutations(objs, 3):
        h_ab, h_bc, h_ac = held[(a, b)], held[(b, c)], held[(a, c)]
        for (r1, r2), rule_list in trans_by_leading.items():
            if r1 in h_ab and r2 in h_bc:
                for rule in rule_list:
                    if rule.relations[2] in h_ac:
                        bad.append(rule)
    return bad


def verify_rules(rules: Iterable[PropertyRule], scenes: int, seed: int = 0,
                 cfg: Optional[DeriveConfig] = None) -> dict[PropertyRule, int]:
    """Hunt for counterexamples; returns violation counts per refuted rule."""
    cfg = cfg or DeriveConfig(near_threshold=1.0)
    rng = random.Random(seed)
    rules = list(rules)
    violations: dict[PropertyRule, int] = {}
    produced = 0
    while produced < scenes:
        scene = sample_scene(rng)
        if not _scene_margins_ok(scene, cfg):
            continue
        produced += 1
        held = held_relations(scene, cfg)
        for rule in find_rule_violations(rules, held):
            violations[rule] = violations.get(rule, 0) + 1
    return violations


def derive_rule_table(sampling_budget: int = 10_000, seed: int = 20240817) -> RuleTable:
    """Derive candidates symbolically, verify them by scene sampling, and keep
    only the rules with no observed counterexample."""
    if sampling_budget < 10_000:
        raise ValueError("sampling budget below the minimum of 10000 scenes")
    candidates = candidate_rules()
    refuted = verify_rules(candidates, sampling_budget, seed=seed)
    if refuted:
        for rule, count in sorted(refuted.items()):
            log.warning("dropping refuted candidate %s (%d counterexamples)", rule.line(), count)
    kept = [r for r in candidates if r not in refuted]
    return RuleTable(kept, provenance="derived")


# ---------------------------------------------------------------------------
# Qualitative networks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Inconsistent:
    """Returned when closure empties a constraint set (not an exception)."""

    pair: Optional[tuple[str, str]] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Assignment:
    """One atomic choice of relation per constrained pair."""

    choices: tuple[tuple[tuple[str, str], str], ...]

    def as_dict(self) -> dict[tuple[str, str], str]:
        return dict(self.choices)


class QualitativeNetwork:
    """Objects plus disjunctive relation constraints on ordered pairs."""

    def __init__(self, nodes: Iterable[str] = ()):
        self.nodes: set[str] = set(nodes)
        self.constraints: dict[tuple[str, str], frozenset[str]] = {}

    def add_node(self, node: str) -> None:
        self.nodes.add(node)

    def constrain(self, a: str, b: str, rels: Iterable[str]) -> None:
        """Intersect the (a, b) entry with the given alternatives."""
        rels = frozenset(rels)
        unknown = rels - set(NETWORK_VOCAB)
        if unknown:
            raise ValueError(f"unknown relations {sorted(unknown)}")
        self.nodes.add(a)
        self.nodes.add(b)
        key = (a, b)
        if key in self.constraints:
            rels = self.constraints[key] & rels
        self.constraints[key] = rels

    def get(self, a: str, b: str) -> frozenset[str]:
        return self.constraints.get((a, b), FULL_SET)

    def copy(self) -> "QualitativeNetwork":
        net = QualitativeNetwork(self.nodes)
        net.constraints = dict(self.constraints)
        return net

    def is_atomic(self) -> bool:
        return all(len(s) == 1 for s in self.constraints.values())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QualitativeNetwork)
            and self.nodes == other.nodes
            and self.constraints == other.constraints
        )

    def __repr__(self) -> str:
        return f"QualitativeNetwork({len(self.nodes)} nodes, {len(self.constraints)} constraints)"


def network_from_atoms(atoms: Iterable[tuple[str, str, str]], table: RuleTable,
                       nodes: Iterable[str] = ()) -> "QualitativeNetwork | Inconsistent":
    """Build a network from conjunctive (a, b, relation) assertions.

    The first atom on an ordered pair seeds the entry; later atoms on the same
    pair are checked for pairwise compatibility against it (an incompatible
    pair is immediately inconsistent) but do not widen the disjunction.
    """
    net = QualitativeNetwork(nodes)
    primary: dict[tuple[str, str], str] = {}
    for a, b, rel in sorted(atoms):
        net.add_node(a)
        net.add_node(b)
        key = (a, b)
        if key not in primary:
            primary[key] = rel
            net.constrain(a, b, {rel})
            continue
        if table.pair_incompatible(primary[key], rel):
            return Inconsistent(key, f"{primary[key]} and {rel} asserted together")
    # cross-direction sanity for directly asserted opposite pairs
    for (a, b), rel in primary.items():
        other = primary.get((b, a))
        if other is not None and table.cross_incompatible(rel, other):
            return Inconsistent((a, b), f"{rel}({a},{b}) against {other}({b},{a})")
    return net


def _converse_image(table: RuleTable, rels: frozenset[str]) -> Optional[frozenset[str]]:
    out = set()
    for r in rels:
        c = table.converse.get(r)
        if c is None:
            return None
        out.add(c)
    return frozenset(out)


def _c_star(net: QualitativeNetwork, table: RuleTable, a: str, b: str) -> frozenset[str]:
    direct = net.constraints.get((a, b))
    if direct is not None:
        return direct
    reverse = net.constraints.get((b, a))
    if reverse is not None:
        image = _converse_image(table, reverse)
        if image is not None:
            return image
    return FULL_SET


def apply_property_rules(net: QualitativeNetwork, table: RuleTable,
                         ) -> "QualitativeNetwork | Inconsistent":
    """Close the network under converse propagation and unary/pair pruning."""
    out = net.copy()
    changed = True
    while changed:
        changed = False
        for (a, b), rels in sorted(out.constraints.items()):
            if a == b:
                pruned = rels - table.irreflexive
                if pruned != rels:
                    if not pruned:
                        return Inconsistent((a, b), "irreflexive relation on a single object")
                    out.constraints[(a, b)] = pruned
                    changed = True
                continue
            # A forced relation propagates its converse as a new fact.  The
            # vocabulary is not jointly exclusive, so an existing reverse
            # entry is never intersected; compatibility pruning below keeps
            # the two directions in step.
            if len(rels) == 1 and (b, a) not in out.constraints:
                image = _converse_image(table, rels)
                if image is not None:
                    out.constraints[(b, a)] = image
                    changed = True
        for (a, b), rels in sorted(out.constraints.items()):
            if a == b:
                continue
            reverse = out.constraints.get((b, a))
            if reverse is None:
                continue
            keep = frozenset(
                r for r in rels if any(not table.cross_incompatible(r, s) for s in reverse)
            )
            if keep != rels:
                if not keep:
                    return Inconsistent((a, b), "cross-direction constraints conflict")
                out.constraints[(a, b)] = keep
                changed = True
    return out


def path_consistency(net: QualitativeNetwork, table: RuleTable,
                     ) -> "QualitativeNetwork | Inconsistent":
    """Algebraic-closure fixpoint over all triples.

    Prunes a relation from C(A,C) when no pair of relations on (A,B) and (B,C)
    permits it under the transitivity entries.  The result is 3-consistent,
    which does not in general imply global consistency.
    """
    closed = apply_property_rules(net, table)
    if isinstance(closed, Inconsistent):
        return closed
    out = closed
    nodes = sorted(out.nodes)
    changed = True
    while changed:
        changed = False
        for (a, c) in sorted(out.constraints):
            if a == c:
                continue
            current = out.constraints[(a, c)]
            for b in nodes:
                if b == a or b == c:
                    continue
                s_ab = _c_star(out, table, a, b)
                s_bc = _c_star(out, table, b, c)
                if s_ab == FULL_SET and s_bc == FULL_SET:
                    continue
                allowed = table.allowed_through(s_ab, s_bc)
                new = current & allowed
                if new != current:
                    if not new:
                        return Inconsistent((a, c), f"no relation permitted through {b}")
                    out.constraints[(a, c)] = new
                    current = new
                    changed = True
        if changed:
            refreshed = apply_property_rules(out, table)
            if isinstance(refreshed, Inconsistent):
                return refreshed
            out = refreshed
    return out


def enumerate_scenarios(net: QualitativeNetwork, table: RuleTable, limit: int,
                        ) -> list[Assignment]:
    """Backtracking refinement to atomic networks, path-consistent at each step.

    Pairs are refined in lexicographic order and alternatives in vocabulary
    order, so the result list is deterministic.
    """
    if limit < 1:
        raise ValueError("limit must be at least 1")
    results: list[Assignment] = []

    def record(n: QualitativeNetwork) -> None:
        choices = tuple(sorted((pair, next(iter(rels))) for pair, rels in n.constraints.items()))
        results.append(Assignment(choices))

    def descend(n: "QualitativeNetwork | Inconsistent") -> None:
        if isinstance(n, Inconsistent) or len(results) >= limit:
            return
        target = None
        for pair in sorted(n.constraints):
            if len(n.constraints[pair]) > 1:
                target = pair
                break
        if target is None:
            record(n)
            return
        for rel in sorted(n.constraints[target], key=VOCAB_ORDER.__getitem__):
            if len(results) >= limit:
                return
            child = n.copy()
            child.constraints[target] = frozenset({rel})
            descend(path_consistency(child, table))

    descend(path_consistency(net, table))
    return results
