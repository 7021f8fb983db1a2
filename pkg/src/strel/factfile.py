"""The declarative fact-file language and its evaluator.

Facts are Prolog-style ground terms terminated by periods, with ``%`` line
comments.  The accepted predicates declare polygons and space-time entities,
assert or request relations, and configure result filters:

    polygon(p1, (0,0, 1,0, 1,1, 0,1)).
    translation(p1, p2).                      % p2 translates p1, vector open
    st_object(a).                             % symbol-only entity
    st_object(a, at(3), id(p1)).              % slice of a at time 3
    spacetime(topology, a, b, time(0, 9)).    % derive relations
    topology(ntpp, a, b, time(0, 9)).         % assert a relation
    size(grows, a, time(0, 9)).               % unary size assertion
    movement(follows, a, b, time(0, 9)).
    filter(min_duration, 3).                  % report maximal sub-intervals
    filter(near, at(25)).                     % keep pairs near at a time

Evaluation routes ground assertions to geometric verification, assertions on
translated entities to the translation solver, and assertions among entities
with no slices to qualitative closure.  Output is deterministic: atoms are
sorted and numbers are printed with nine significant digits.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .geometry import DEFAULT_EPS, Epsilon, GeometryError, Point, Polygon, validate_polygon
from .spacetime import (
    ASPECT_VOCAB,
    DeriveConfig,
    Interval,
    MOVEMENT_VOCAB,
    RelationAtom,
    SIZE_VOCAB,
    STObject,
    UNARY_RELATIONS,
    derive_movement,
    derive_pair,
    derive_size,
    derive_topology,
    near,
)
from . import algebra
from . import translation as trans


class InterfaceError(ValueError):
    pass


class ParseError(InterfaceError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class DanglingReference(InterfaceError):
    pass


class DuplicatePolygonId(InterfaceError):
    pass


class UnboundEntity(InterfaceError):
    pass


class MixedModeUnsupported(InterfaceError):
    pass


# ---------------------------------------------------------------------------
# Lexing and parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<comment>%[^\n]*)"
    r"|(?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_:]*)"
    r"|(?P<punct>[(),.])"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = match.lastgroup
        value = match.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = match.end()
    return tokens


@dataclass(frozen=True)
class Term:
    """A functor with arguments, a bare name, or a number."""

    functor: Optional[str]
    args: tuple = ()
    number: Optional[float] = None

    @property
    def is_number(self) -> bool:
        return self.number is not None

    @property
    def is_name(self) -> bool:
        return self.functor is not None and not self.args


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def _peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self, expect: str) -> _Token:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", "", 1, 1)
            raise ParseError(f"unexpected end of input, expected {expect}", last.line, last.col)
        self.pos += 1
        return tok

    def _expect_punct(self, symbol: str) -> _Token:
        tok = self._next(repr(symbol))
        if tok.kind != "punct" or tok.value != symbol:
            raise ParseError(f"expected {symbol!r}, found {tok.value!r}", tok.line, tok.col)
        return tok

    def facts(self) -> list[tuple[_Token, str, tuple[Term, ...]]]:
        out = []
        while self._peek() is not None:
            head = self._next("a predicate name")
            if head.kind != "name":
                raise ParseError(f"expected a predicate name, found {head.value!r}",
                                 head.line, head.col)
            self._expect_punct("(")
            args = self._args()
            self._expect_punct(")")
            self._expect_punct(".")
            out.append((head, head.value, tuple(args)))
        return out

    def _args(self) -> list[Term]:
        args = [self._term()]
        while True:
            tok = self._peek()
            if tok is not None and tok.kind == "punct" and tok.value == ",":
                self.pos += 1
                args.append(self._term())
            else:
                return args

    def _term(self) -> Term:
        tok = self._next("a term")
        if tok.kind == "number":
            return Term(functor=None, number=float(tok.value))
        if tok.kind == "name":
            nxt = self._peek()
            if nxt is not None and nxt.kind == "punct" and nxt.value == "(":
                self.pos += 1
                args = self._args()
                self._expect_punct(")")
                return Term(functor=tok.value, args=tuple(args))
            return Term(functor=tok.value)
        if tok.kind == "punct" and tok.value == "(":
            args = self._args()
            self._expect_punct(")")
            return Term(functor="", args=tuple(args))
        raise ParseError(f"expected a term, found {tok.value!r}", tok.line, tok.col)


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Directive:
    aspect: str
    entities: tuple[str, ...]
    interval: Interval

    def sort_key(self):
        return (self.aspect, self.entities, self.interval.start, self.interval.end)


@dataclass(frozen=True)
class QueryFilter:
    kind: str  # min_duration | near
    value: float

    def sort_key(self):
        return (self.kind, self.value)


@dataclass(frozen=True)
class FactProgram:
    """Canonical, order-insensitive representation of a fact file."""

    polygons: tuple[tuple[str, tuple[tuple[float, float], ...]], ...] = ()
    translations: tuple[tuple[str, str], ...] = ()
    entities: tuple[str, ...] = ()
    slices: tuple[tuple[str, int, str], ...] = ()
    directives: tuple[Directive, ...] = ()
    assertions: tuple[RelationAtom, ...] = ()
    filters: tuple[QueryFilter, ...] = ()
    witness_decls: tuple[tuple[str, tuple[str, ...]], ...] = ()

    def polygon_map(self) -> dict[str, tuple[tuple[float, float], ...]]:
        return dict(self.polygons)


_ACCEPTED = {
    ("polygon", 2), ("translation", 2),
    ("st_object", 1), ("st_object", 3),
    ("spacetime", 3), ("spacetime", 4),
    ("topology", 4), ("size", 3), ("size", 4),
    ("movement", 3), ("movement", 4),
    ("spatial", 3), ("filter", 2),
}


def _want_name(term: Term, what: str, tok: _Token) -> str:
    if not term.is_name:
        raise ParseError(f"expected {what}", tok.line, tok.col)
    return term.functor


def _want_int(term: Term, what: str, tok: _Token) -> int:
    if not term.is_number or term.number != int(term.number):
        raise ParseError(f"expected {what} (an integer)", tok.line, tok.col)
    value = int(term.number)
    if value < 0:
        raise ParseError(f"{what} must be non-negative", tok.line, tok.col)
    return value


def _want_wrapped(term: Term, functor: str, tok: _Token) -> tuple[Term, ...]:
    if term.functor != functor:
        raise ParseError(f"expected {functor}(...)", tok.line, tok.col)
    return term.args


def _interval_from(term: Term, tok: _Token) -> Interval:
    args = _want_wrapped(term, "time", tok)
    if len(args) != 2:
        raise ParseError("time(T1, T2) takes two arguments", tok.line, tok.col)
    t1 = _want_int(args[0], "a time point", tok)
    t2 = _want_int(args[1], "a time point", tok)
    if t1 > t2:
        raise ParseError("time interval runs backwards", tok.line, tok.col)
    return Interval(t1, t2)


def _relation_atom(aspect: str, args: tuple[Term, ...], tok: _Token) -> list[RelationAtom]:
    rel = _want_name(args[0], "a relation name", tok)
    interval = _interval_from(args[-1], tok)
    entity_terms = args[1:-1]
    entities = tuple(_want_name(t, "an entity name", tok) for t in entity_terms)
    vocab = ASPECT_VOCAB[aspect]
    if rel not in vocab:
        raise ParseError(f"{rel!r} is not a {aspect} relation", tok.line, tok.col)
    unary = rel in UNARY_RELATIONS
    if unary and len(entities) == 2:
        if aspect == "size":
            # binary surface form asserts the unary relation for both entities
            return [RelationAtom(aspect, rel, (e,), interval) for e in entities]
        raise ParseError(f"{rel} is a unary relation", tok.line, tok.col)
    if not unary and len(entities) == 1:
        raise ParseError(f"{rel} relates two entities", tok.line, tok.col)
    try:
        return [RelationAtom(aspect, rel, entities, interval)]
    except ValueError as exc:
        raise ParseError(str(exc), tok.line, tok.col) from None


def parse(text: str) -> FactProgram:
    """Parse fact-file text into a canonical FactProgram.

    Raises ParseError with the line and column of the offending token, and
    DuplicatePolygonId / DanglingReference for declaration-level faults.
    """
    facts = _Parser(_tokenize(text)).facts()
    polygons: dict[str, tuple[tuple[float, float], ...]] = {}
    translations: list[tuple[str, str]] = []
    entities: set[str] = set()
    slices: list[tuple[str, int, str]] = []
    directives: list[Directive] = []
    assertions: list[RelationAtom] = []
    filters: list[QueryFilter] = []
    witness_decls: list[tuple[str, tuple[str, ...]]] = []

    for tok, name, args in facts:
        key = (name, len(args))
        if key not in _ACCEPTED:
            raise ParseError(f"unknown predicate {name}/{len(args)}", tok.line, tok.col)
        if name == "polygon":
            pid = _want_name(args[0], "a polygon id", tok)
            coords = args[1]
            if coords.functor != "" or not coords.args:
                raise ParseError("expected a coordinate tuple", tok.line, tok.col)
            numbers = []
            for term in coords.args:
                if not term.is_number:
                    raise ParseError("polygon coordinates must be numbers", tok.line, tok.col)
                numbers.append(term.number)
            if len(numbers) % 2 != 0:
                raise ParseError("odd number of polygon coordinates", tok.line, tok.col)
            if len(numbers) < 6:
                raise ParseError("a polygon needs at least three vertices", tok.line, tok.col)
            if pid in polygons:
                raise DuplicatePolygonId(f"polygon {pid!r} declared twice")
            polygons[pid] = tuple(zip(numbers[0::2], numbers[1::2]))
        elif name == "translation":
            src = _want_name(args[0], "a polygon id", tok)
            dst = _want_name(args[1], "a polygon id", tok)
            translations.append((src, dst))
        elif name == "st_object" and len(args) == 1:
            entities.add(_want_name(args[0], "an entity name", tok))
        elif name == "st_object":
            ent = _want_name(args[0], "an entity name", tok)
            at_args = _want_wrapped(args[1], "at", tok)
            if len(at_args) != 1:
                raise ParseError("at(Time) takes one argument", tok.line, tok.col)
            t = _want_int(at_args[0], "a time point", tok)
            id_args = _want_wrapped(args[2], "id", tok)
            if len(id_args) != 1:
                raise ParseError("id(Pg) takes one argument", tok.line, tok.col)
            pg = _want_name(id_args[0], "a polygon id", tok)
            entities.add(ent)
            slices.append((ent, t, pg))
        elif name == "spacetime":
            aspect = _want_name(args[0], "an aspect", tok)
            if aspect not in ASPECT_VOCAB:
                raise ParseError(f"unknown aspect {aspect!r}", tok.line, tok.col)
            interval = _interval_from(args[-1], tok)
            ents = tuple(_want_name(t, "an entity name", tok) for t in args[1:-1])
            if aspect == "topology" and len(ents) == 1:
                raise ParseError("topology derivation relates two entities", tok.line, tok.col)
            directives.append(Directive(aspect, ents, interval))
        elif name in ("topology", "size", "movement"):
            assertions.extend(_relation_atom(name, args, tok))
        elif name == "filter":
            kind = _want_name(args[0], "a filter kind", tok)
            if kind == "min_duration":
                value = float(_want_int(args[1], "a duration", tok))
            elif kind == "near":
                at_args = _want_wrapped(args[1], "at", tok)
                if len(at_args) != 1:
                    raise ParseError("at(Time) takes one argument", tok.line, tok.col)
                value = float(_want_int(at_args[0], "a time point", tok))
            else:
                raise ParseError(f"unknown filter {kind!r}", tok.line, tok.col)
            filters.append(QueryFilter(kind, value))
        elif name == "spatial":
            marker = _want_name(args[0], "the witness marker", tok)
            if marker != "witness":
                raise ParseError("spatial/3 facts start with 'witness'", tok.line, tok.col)
            ent = _want_name(args[1], "an entity name", tok)
            if args[2].is_name:
                ids = (args[2].functor,)
            else:
                ids = tuple(_want_name(t, "a polygon id", tok) for t in args[2].args)
            witness_decls.append((ent, ids))

    translated_ids = {dst for _, dst in translations}
    for src, dst in translations:
        if src not in polygons:
            raise DanglingReference(f"translation source polygon {src!r} not declared")
        if dst in polygons:
            raise DuplicatePolygonId(f"{dst!r} declared both as ground polygon and translation")
    for ent, t, pg in slices:
        if pg not in polygons and pg not in translated_ids:
            raise DanglingReference(f"slice of {ent!r} references unknown polygon {pg!r}")
    seen_slots = set()
    for ent, t, pg in slices:
        if (ent, t) in seen_slots:
            raise DanglingReference(f"{ent!r} has two slices at time {t}")
        seen_slots.add((ent, t))

    return FactProgram(
        polygons=tuple(sorted(polygons.items())),
        translations=tuple(sorted(set(translations))),
        entities=tuple(sorted(entities)),
        slices=tuple(sorted(slices)),
        directives=tuple(sorted(set(directives), key=Directive.sort_key)),
        assertions=tuple(sorted(set(assertions), key=RelationAtom.sort_key)),
        filters=tuple(sorted(set(filters), key=QueryFilter.sort_key)),
        witness_decls=tuple(sorted(witness_decls)),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def format_number(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return f"{x:.9g}"


def _atom_fact(atom: RelationAtom) -> str:
    i = atom.interval
    args = ", ".join(atom.args)
    return f"{atom.aspect}({atom.name}, {args}, time({i.start}, {i.end}))."


def program_to_text(prog: FactProgram) -> str:
    lines: list[str] = []
    for pid, coords in prog.polygons:
        flat = ", ".join(f"{format_number(x)}, {format_number(y)}" for x, y in coords)
        lines.append(f"polygon({pid}, ({flat})).")
    for src, dst in prog.translations:
        lines.append(f"translation({src}, {dst}).")
    slice_entities = {e for e, _, _ in prog.slices}
    for ent in prog.entities:
        if ent not in slice_entities:
            lines.append(f"st_object({ent}).")
    for ent, t, pg in prog.slices:
        lines.append(f"st_object({ent}, at({t}), id({pg})).")
    for d in prog.directives:
        ents = ", ".join(d.entities)
        lines.append(f"spacetime({d.aspect}, {ents}, time({d.interval.start}, {d.interval.end})).")
    for atom in prog.assertions:
        lines.append(_atom_fact(atom))
    for f in prog.filters:
        if f.kind == "near":
            lines.append(f"filter(near, at({int(f.value)})).")
        else:
            lines.append(f"filter({f.kind}, {format_number(f.value)}).")
    for ent, ids in prog.witness_decls:
        lines.append(f"spatial(witness, {ent}, ({', '.join(ids)})).")
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class ResultSet:
    """Evaluation output: derived atoms, witnesses, and a status verdict."""

    atoms: tuple[RelationAtom, ...] = ()
    witnesses: tuple[tuple[str, tuple[trans.Witness, ...]], ...] = ()
    status: str = "derived"  # derived | consistent | inconsistent
    violations: tuple[RelationAtom, ...] = ()


def result_to_text(rs: ResultSet) -> str:
    lines = [f"% status: {rs.status}"]
    for atom in sorted(rs.atoms, key=RelationAtom.sort_key):
        lines.append(_atom_fact(atom))
    for atom in sorted(rs.violations, key=RelationAtom.sort_key):
        lines.append(f"% violated: {_atom_fact(atom)}")
    for entity, wits in sorted(rs.witnesses):
        ids = []
        for w in wits:
            for s in w.ground_slices:
                wid = f"{entity}_w{s.time}"
                ids.append(wid)
                flat = ", ".join(
                    f"{format_number(p.x)}, {format_number(p.y)}" for p in s.shape.vertices
                )
                lines.append(f"polygon({wid}, ({flat})).")
        lines.append(f"spatial(witness, {entity}, ({', '.join(ids)})).")
        if len(wits) == 1:
            v = wits[0].vector
            lines.append(
                f"translation_vector({entity}, {format_number(v.tx)}, {format_number(v.ty)})."
            )
        else:
            for w in wits:
                t = w.ground_slices[0].time if w.ground_slices else 0
                v = w.vector
                lines.append(
                    f"translation_vector({entity}, at({t}), "
                    f"{format_number(v.tx)}, {format_number(v.ty)})."
                )
    return "\n".join(lines) + "\n"


def serialize(value: "ResultSet | FactProgram") -> str:
    """Render a result set or a program back into fact syntax."""
    if isinstance(value, FactProgram):
        return program_to_text(value)
    return result_to_text(value)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass
class _SceneData:
    ground: dict[str, STObject]
    unground: dict[str, trans.UngroundTranslation]
    symbolic: set[str]
    sources: dict[str, STObject]


def _build_scene(prog: FactProgram) -> _SceneData:
    polys: dict[str, Polygon] = {}
    for pid, coords in prog.polygons:
        try:
            polys[pid] = validate_polygon([Point(x, y) for x, y in coords])
        except GeometryError as exc:
            raise DanglingReference(f"polygon {pid!r} is invalid: {exc}") from exc
    translated = {dst: src for src, dst in prog.translations}

    ground: dict[str, STObject] = {}
    unground_slices: dict[str, list[tuple[int, str]]] = {}
    for ent, t, pg in prog.slices:
        if pg in translated:
            unground_slices.setdefault(ent, []).append((t, pg))
        else:
            ground.setdefault(ent, STObject(ent)).add(t, polys[pg])
    mixed = set(ground) & set(unground_slices)
    if mixed:
        raise trans.UnsupportedConstraintShape(
            f"entities {sorted(mixed)} mix ground and translated slices"
        )

    unground: dict[str, trans.UngroundTranslation] = {}
    sources: dict[str, STObject] = {}
    for ent, entries in unground_slices.items():
        src_obj = STObject(f"_src_{ent}")
        for t, pg in entries:
            src_obj.add(t, polys[translated[pg]])
        sources[ent] = src_obj
        unground[ent] = trans.UngroundTranslation(src_obj.id, ent, shared_vector=True)
    symbolic = {e for e in prog.entities if e not in ground and e not in unground}
    return _SceneData(ground, unground, symbolic, sources)


def _check_mixed_mode(prog: FactProgram) -> None:
    derived_cover = {
        (d.aspect, frozenset(d.entities), d.interval) for d in prog.directives
    }
    for atom in prog.assertions:
        key = (atom.aspect, frozenset(atom.args), atom.interval)
        if key in derived_cover:
            raise MixedModeUnsupported(
                f"{atom!r} is asserted and also covered by a derivation directive"
            )


def _run_directives(prog: FactProgram, scene: _SceneData, cfg: DeriveConfig,
                    ) -> set[RelationAtom]:
    atoms: set[RelationAtom] = set()
    for d in prog.directives:
        for ent in d.entities:
            if ent not in scene.ground:
                raise UnboundEntity(
                    f"directive references {ent!r}, which has no ground slices"
                )
        objs = [scene.ground[e] for e in d.entities]
        if len(objs) == 1:
            if d.aspect == "size":
                atoms |= derive_size(objs[0], d.interval, cfg)
            else:
                atoms |= derive_movement(objs[0], None, d.interval, cfg)
            continue
        a, b = objs
        if d.aspect == "size":
            atoms |= derive_size((a, b), d.interval, cfg)
        else:
            atoms |= derive_pair(a, b, d.interval, d.aspect, cfg)
            atoms |= derive_pair(b, a, d.interval, d.aspect, cfg)
    return atoms


def _subinterval_atoms(a: STObject, b: Optional[STObject], aspect: str,
                       window: Interval, min_len: int, cfg: DeriveConfig,
                       ) -> set[RelationAtom]:
    """Atoms on every maximal sub-interval of the window, kept when the
    sub-interval spans at least min_len time units."""
    times = sorted(t for t in a.times() if t in window and (b is None or t in b.slices))
    valid: dict[tuple[str, str, tuple[str, ...]], list[tuple[int, int]]] = {}
    for i, t1 in enumerate(times):
        for j in range(i + 1, len(times)):
            t2 = times[j]
            if t2 - t1 < min_len:
                continue
            interval = Interval(t1, t2)
            if aspect == "movement":
                derived = derive_movement(a, b, interval, cfg)
            elif aspect == "topology":
                derived = derive_topology(a, b, interval, cfg)
            else:
                derived = derive_size(a if b is None else (a, b), interval, cfg)
            for atom in derived:
                valid.setdefault((atom.aspect, atom.name, atom.args), []).append((t1, t2))
    out: set[RelationAtom] = set()
    for (aspect_name, name, args), spans in valid.items():
        maximal = [
            (s, e) for s, e in spans
            if not any(s2 <= s and e <= e2 and (s2, e2) != (s, e) for s2, e2 in spans)
        ]
        out.update(
            RelationAtom(aspect_name, name, args, Interval(s, e)) for s, e in sorted(set(maximal))
        )
    return out


def _pair_near(scene: _SceneData, args: Sequence[str], near_times: Sequence[int],
               cfg: DeriveConfig) -> bool:
    a, b = (scene.ground[x] for x in args)
    return all(near(a, b, t, cfg) for t in near_times)


def _derive_with_filters(prog: FactProgram, scene: _SceneData, cfg: DeriveConfig,
                         ) -> set[RelationAtom]:
    near_times = [int(f.value) for f in prog.filters if f.kind == "near"]
    min_dur = max((int(f.value) for f in prog.filters if f.kind == "min_duration"), default=0)
    if not min_dur:
        atoms = _run_directives(prog, scene, cfg)
        if near_times:
            atoms = {
                atom for atom in atoms
                if len(atom.args) == 2 and _pair_near(scene, atom.args, near_times, cfg)
            }
        return atoms
    # a duration floor asks for maximal sub-intervals, so derivation itself
    # scans sub-windows instead of filtering whole-window atoms
    atoms: set[RelationAtom] = set()
    for d in prog.directives:
        for ent in d.entities:
            if ent not in scene.ground:
                raise UnboundEntity(f"directive references {ent!r}, which has no ground slices")
        objs = [scene.ground[e] for e in d.entities]
        if len(objs) == 1:
            if near_times:
                continue
            atoms |= _subinterval_atoms(objs[0], None, d.aspect, d.interval, min_dur, cfg)
            continue
        a, b = objs
        if near_times and not _pair_near(scene, (a.id, b.id), near_times, cfg):
            continue
        atoms |= _subinterval_atoms(a, b, d.aspect, d.interval, min_dur, cfg)
        atoms |= _subinterval_atoms(b, a, d.aspect, d.interval, min_dur, cfg)
    if near_times:
        atoms = {atom for atom in atoms if len(atom.args) == 2}
    return atoms


def evaluate(prog: FactProgram, cfg: Optional[DeriveConfig] = None,
             ws: Optional[trans.WorkspaceConfig] = None,
             table: Optional[algebra.RuleTable] = None,
             max_models: int = 1) -> ResultSet:
    """Evaluate a program: run derivations, verify ground assertions, solve
    translation constraints, and close purely symbolic assertions."""
    _check_mixed_mode(prog)
    scene = _build_scene(prog)
    if cfg is None:
        cfg = DeriveConfig.for_scene(scene.ground) if scene.ground else DeriveConfig(near_threshold=1.0)

    known = set(scene.ground) | set(scene.unground) | scene.symbolic
    for atom in prog.assertions:
        for ent in atom.args:
            if ent not in known:
                raise UnboundEntity(f"{atom!r} references undeclared entity {ent!r}")
    for d in prog.directives:
        for ent in d.entities:
            if ent not in known:
                raise UnboundEntity(f"directive references undeclared entity {ent!r}")

    atoms = _derive_with_filters(prog, scene, cfg)

    violations: list[RelationAtom] = []
    witnesses: dict[str, tuple[trans.Witness, ...]] = {}
    status_checks = False
    inconsistent = False

    ground_atoms: list[RelationAtom] = []
    translated_atoms: list[RelationAtom] = []
    symbolic_atoms: list[RelationAtom] = []
    for atom in prog.assertions:
        kinds = {
            "unground" if e in scene.unground else
            "symbolic" if e in scene.symbolic else "ground"
            for e in atom.args
        }
        if "unground" in kinds:
            translated_atoms.append(atom)
        elif "symbolic" in kinds:
            symbolic_atoms.append(atom)
        else:
            ground_atoms.append(atom)

    if ground_atoms:
        status_checks = True
        for atom in ground_atoms:
            if not _ground_atom_holds(scene.ground, atom, cfg):
                violations.append(atom)
                inconsistent = True

    if symbolic_atoms:
        status_checks = True
        if table is None:
            table = algebra.default_rule_table()
        by_interval: dict[Interval, list[RelationAtom]] = {}
        for atom in symbolic_atoms:
            by_interval.setdefault(atom.interval, []).append(atom)
        for interval, group in sorted(by_interval.items(), key=lambda kv: (kv[0].start, kv[0].end)):
            pairs = [
                (a.args[0], a.args[1], a.name) for a in group
                if len(a.args) == 2 and a.name in algebra.VOCAB_ORDER
            ]
            net = algebra.network_from_atoms(pairs, table)
            if isinstance(net, algebra.Inconsistent):
                inconsistent = True
                violations.extend(group)
                continue
            closed = algebra.path_consistency(net, table)
            if isinstance(closed, algebra.Inconsistent):
                inconsistent = True
                violations.extend(group)

    if scene.unground:
        status_checks = True
        if ws is None:
            polys = [p for o in scene.ground.values() for p in o.slices.values()]
            polys += [p for o in scene.sources.values() for p in o.slices.values()]
            ws = trans.WorkspaceConfig.around(polys)
        full_scene: dict[str, STObject] = dict(scene.ground)
        for ent, src in scene.sources.items():
            full_scene[src.id] = src
        check = trans.check_translated_program(
            full_scene,
            sorted(scene.unground.values(), key=lambda tr: tr.target_object),
            translated_atoms,
            ws=ws,
            eps=cfg.eps,
            max_models=max_models,
        )
        if not check.consistent:
            inconsistent = True
            violations.extend(translated_atoms)
        else:
            witnesses.update(check.witnesses)

    if inconsistent:
        status = "inconsistent"
    elif status_checks:
        status = "consistent"
    else:
        status = "derived"
    return ResultSet(
        atoms=tuple(sorted(atoms, key=RelationAtom.sort_key)),
        witnesses=tuple(sorted(witnesses.items())),
        status=status,
        violations=tuple(sorted(violations, key=RelationAtom.sort_key)),
    )


def _ground_atom_holds(ground: Mapping[str, STObject], atom: RelationAtom,
                       cfg: DeriveConfig) -> bool:
    objs = [ground[a] for a in atom.args]
    if atom.aspect == "topology":
        derived = derive_topology(objs[0], objs[1], atom.interval, cfg)
    elif atom.aspect == "size":
        derived = derive_size(objs[0] if len(objs) == 1 else tuple(objs), atom.interval, cfg)
    else:
        derived = derive_movement(objs[0], objs[1] if len(objs) > 1 else None,
                                  atom.interval, cfg)
    return atom in derived
