import random
import subprocess
import sys

import pytest

from strel import factfile as F
from strel.factfile import (
    DanglingReference,
    DuplicatePolygonId,
    MixedModeUnsupported,
    ParseError,
    UnboundEntity,
    evaluate,
    parse,
    serialize,
)
from strel.spacetime import Interval, RelationAtom


BASIC = """
polygon(p1, (0,0, 1,0, 1,1, 0,1)).
st_object(o1, at(0), id(p1)).
"""


# --- parsing -----------------------------------------------------------------


def test_parse_basic_program():
    prog = parse(BASIC)
    assert dict(prog.polygons)["p1"] == ((0, 0), (1, 0), (1, 1), (0, 1))
    assert prog.slices == (("o1", 0, "p1"),)
    assert prog.entities == ("o1",)


def test_parse_empty_input():
    assert parse("") == F.FactProgram()
    assert parse("  % only a comment\n") == F.FactProgram()


def test_parse_too_few_coordinates():
    with pytest.raises(ParseError) as err:
        parse("polygon(p1, (0,0)).")
    assert err.value.line == 1


def test_parse_error_positions():
    with pytest.raises(ParseError) as err:
        parse("polygon(p1, (0,0, 1,0, 1,1, 0,1)).\nwat(p).")
    assert err.value.line == 2
    assert err.value.col == 1


def test_parse_unknown_predicate():
    with pytest.raises(ParseError, match="unknown predicate"):
        parse("mystery(a, b).")


def test_parse_unknown_relation():
    with pytest.raises(ParseError, match="not a topology relation"):
        parse("topology(sideways, a, b, time(0, 1)).")


def test_parse_negative_time_rejected():
    with pytest.raises(ParseError):
        parse("st_object(a, at(-1), id(p)).")


def test_parse_duplicate_polygon():
    with pytest.raises(DuplicatePolygonId):
        parse("polygon(p, (0,0, 1,0, 0,1)). polygon(p, (0,0, 2,0, 0,2)).")


def test_parse_dangling_slice_reference():
    with pytest.raises(DanglingReference):
        parse("st_object(a, at(0), id(ghost)).")


def test_parse_ids_with_colons():
    prog = parse("polygon('co:8'.replace(...) , (0,0, 1,0, 0,1)).".replace(
        "'co:8'.replace(...) ", "co:8"))
    assert dict(prog.polygons)["co:8"]


def test_parse_size_binary_asserts_both():
    prog = parse("st_object(a). st_object(b). size(grows, a, b, time(0, 2)).")
    assert set(prog.assertions) == {
        RelationAtom("size", "grows", ("a",), Interval(0, 2)),
        RelationAtom("size", "grows", ("b",), Interval(0, 2)),
    }


def test_parse_movement_unary_and_binary():
    prog = parse(
        "st_object(a). st_object(b). movement(moves, a, time(0, 1)). "
        "movement(follows, a, b, time(0, 1))."
    )
    assert len(prog.assertions) == 2


def test_round_trip_idempotent():
    prog = parse(BASIC + "spacetime(topology, o1, o1, time(0, 0)).")
    text = serialize(prog)
    assert parse(text) == prog
    assert serialize(parse(text)) == text


def _random_program(rng: random.Random) -> str:
    lines = []
    n_poly = rng.randint(1, 4)
    for i in range(n_poly):
        pts = []
        r = rng.uniform(0.5, 2.0)
        import math
        k = rng.randint(3, 7)
        for j in range(k):
            ang = 2 * math.pi * j / k
            pts += [round(r * math.cos(ang), 3), round(r * math.sin(ang), 3)]
        flat = ", ".join(str(v) for v in pts)
        lines.append(f"polygon(pg{i}, ({flat})).")
    ents = [f"e{i}" for i in range(rng.randint(1, 3))]
    for e in ents:
        if rng.random() < 0.3:
            lines.append(f"st_object({e}).")
        else:
            for t in range(rng.randint(1, 3)):
                lines.append(f"st_object({e}, at({t}), id(pg{rng.randrange(n_poly)})).")
    if rng.random() < 0.5 and len(ents) >= 2:
        lines.append(f"spacetime(movement, {ents[0]}, {ents[1]}, time(0, 5)).")
    if rng.random() < 0.3:
        lines.append("filter(min_duration, 2).")
    rng.shuffle(lines)
    return "\n".join(lines)


def test_round_trip_fuzz(rng):
    for _ in range(100):
        text = _random_program(rng)
        try:
            prog = parse(text)
        except (ParseError, DanglingReference, DuplicatePolygonId):
            continue
        assert parse(serialize(prog)) == prog


# --- evaluation ---------------------------------------------------------------


def test_evaluate_derives_all_pairs_one_step():
    text = """
    polygon(pa, (0,0, 1,0, 1,1, 0,1)).
    polygon(pb0, (5,0, 6,0, 6,1, 5,1)).
    polygon(pb1, (4,0, 5,0, 5,1, 4,1)).
    st_object(a, at(0), id(pa)). st_object(a, at(1), id(pa)).
    st_object(b, at(0), id(pb0)). st_object(b, at(1), id(pb1)).
    spacetime(movement, a, b, time(0, 1)).
    """
    rs = evaluate(parse(text))
    assert rs.status == "derived"
    names = {(a.name, a.args) for a in rs.atoms}
    assert ("moves", ("b",)) in names
    assert ("towards", ("b", "a")) in names


def test_evaluate_symbolic_inconsistency():
    text = """
    st_object(a). st_object(b). st_object(c).
    topology(pp, a, b, time(0, 10)).
    topology(pp, b, c, time(0, 10)).
    topology(dc, a, c, time(0, 10)).
    """
    rs = evaluate(parse(text))
    assert rs.status == "inconsistent"
    assert len(rs.violations) == 3


def test_evaluate_symbolic_consistent_subsets():
    base = [
        "topology(pp, a, b, time(0, 10)).",
        "topology(pp, b, c, time(0, 10)).",
        "topology(dc, a, c, time(0, 10)).",
    ]
    for skip in range(3):
        text = "st_object(a). st_object(b). st_object(c).\n" + "\n".join(
            line for i, line in enumerate(base) if i != skip
        )
        assert evaluate(parse(text)).status == "consistent"


def test_evaluate_ground_assertion_verified():
    text = BASIC + """
    polygon(p2, (5,0, 6,0, 6,1, 5,1)).
    st_object(o2, at(0), id(p2)).
    topology(dc, o1, o2, time(0, 0)).
    """
    assert evaluate(parse(text)).status == "consistent"
    bad = text.replace("topology(dc", "topology(o")
    rs = evaluate(parse(bad))
    assert rs.status == "inconsistent"
    assert rs.violations[0].name == "o"


def test_evaluate_no_directives_empty_derived():
    rs = evaluate(parse(BASIC))
    assert rs.atoms == ()
    assert rs.status == "derived"


def test_evaluate_unbound_entity():
    with pytest.raises(UnboundEntity):
        evaluate(parse(BASIC + "topology(dc, o1, ghost, time(0, 0))."))


def test_evaluate_mixed_mode_rejected():
    text = BASIC + """
    polygon(p2, (5,0, 6,0, 6,1, 5,1)).
    st_object(o2, at(0), id(p2)).
    spacetime(topology, o1, o2, time(0, 0)).
    topology(dc, o1, o2, time(0, 0)).
    """
    with pytest.raises(MixedModeUnsupported):
        evaluate(parse(text))


def test_evaluate_translation_route():
    text = """
    polygon(big, (10,10, 14,10, 14,14, 10,14)).
    polygon(small, (0,0, 1,0, 1,1, 0,1)).
    translation(small, small_t).
    st_object(box, at(0), id(big)).
    st_object(item, at(0), id(small_t)).
    topology(pp, item, box, time(0, 0)).
    """
    rs = evaluate(parse(text))
    assert rs.status == "consistent"
    assert rs.witnesses and rs.witnesses[0][0] == "item"
    vec = rs.witnesses[0][1][0].vector
    assert (vec.tx, vec.ty) == pytest.approx((10.0, 10.0), abs=1e-6)


def test_evaluate_translation_infeasible():
    text = """
    polygon(big, (10,10, 11,10, 11,11, 10,11)).
    polygon(small, (0,0, 2,0, 2,2, 0,2)).
    translation(small, small_t).
    st_object(box, at(0), id(big)).
    st_object(item, at(0), id(small_t)).
    topology(pp, item, box, time(0, 0)).
    """
    assert evaluate(parse(text)).status == "inconsistent"


def test_evaluate_duration_filter_reports_subintervals():
    # b approaches a only during frames 2..5
    rows = []
    xs = [9.0, 9.5, 9.0, 7.0, 5.0, 3.0]
    for t, x in enumerate(xs):
        rows.append(f"polygon(pb{t}, ({x},0, {x + 1},0, {x + 1},1, {x},1)).")
        rows.append(f"st_object(b, at({t}), id(pb{t})).")
    text = (
        "polygon(pa, (0,0, 1,0, 1,1, 0,1)).\n"
        + "\n".join(f"st_object(a, at({t}), id(pa))." for t in range(6))
        + "\n"
        + "\n".join(rows)
        + "\nspacetime(movement, a, b, time(0, 5)).\nfilter(min_duration, 3).\n"
    )
    rs = evaluate(parse(text))
    towards = [a for a in rs.atoms if a.name == "towards" and a.args == ("b", "a")]
    assert towards
    assert all(atom.interval.end - atom.interval.start >= 3 for atom in towards)
    spans = {(a.interval.start, a.interval.end) for a in towards}
    assert (1, 5) in spans


def test_evaluate_near_filter():
    text = """
    polygon(pa, (0,0, 1,0, 1,1, 0,1)).
    polygon(pb, (1.5,0, 2.5,0, 2.5,1, 1.5,1)).
    polygon(pc, (40,0, 41,0, 41,1, 40,1)).
    st_object(a, at(0), id(pa)). st_object(a, at(1), id(pa)).
    st_object(b, at(0), id(pb)). st_object(b, at(1), id(pb)).
    st_object(c, at(0), id(pc)). st_object(c, at(1), id(pc)).
    spacetime(topology, a, b, time(0, 1)).
    spacetime(topology, a, c, time(0, 1)).
    filter(near, at(0)).
    """
    rs = evaluate(parse(text))
    pairs = {frozenset(a.args) for a in rs.atoms}
    assert frozenset({"a", "b"}) in pairs
    assert frozenset({"a", "c"}) not in pairs


def test_evaluate_deterministic_bytes():
    text = BASIC + """
    polygon(p2, (0.5,0.5, 1.5,0.5, 1.5,1.5, 0.5,1.5)).
    st_object(o2, at(0), id(p2)).
    spacetime(topology, o1, o2, time(0, 0)).
    """
    out1 = serialize(evaluate(parse(text)))
    out2 = serialize(evaluate(parse(text)))
    assert out1 == out2


# --- CLI ----------------------------------------------------------------------


def _run_cli(args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "strel.cli", *args],
        capture_output=True, text=True, cwd=cwd,
    )


@pytest.fixture
def scene_file(tmp_path):
    path = tmp_path / "scene.str"
    path.write_text(
        "polygon(p1, (0,0, 1,0, 1,1, 0,1)).\n"
        "polygon(p2, (3,0, 4,0, 4,1, 3,1)).\n"
        "st_object(a, at(0), id(p1)). st_object(a, at(1), id(p1)).\n"
        "st_object(b, at(0), id(p2)). st_object(b, at(1), id(p2)).\n"
    )
    return path


def test_cli_derive_deterministic(scene_file, tmp_path):
    r1 = _run_cli(["derive", str(scene_file), "--aspect", "all"], tmp_path)
    r2 = _run_cli(["derive", str(scene_file), "--aspect", "all"], tmp_path)
    assert r1.returncode == 0
    assert r1.stdout == r2.stdout
    assert "topology(dc, a, b, time(0, 1))." in r1.stdout


def test_cli_check_exit_codes(scene_file, tmp_path):
    ok = _run_cli(["check", str(scene_file)], tmp_path)
    assert ok.returncode == 0
    bad = tmp_path / "bad.str"
    bad.write_text(
        "st_object(a). st_object(b). st_object(c).\n"
        "topology(pp, a, b, time(0, 1)).\n"
        "topology(pp, b, c, time(0, 1)).\n"
        "topology(dc, a, c, time(0, 1)).\n"
    )
    assert _run_cli(["check", str(bad)], tmp_path).returncode == 1
    broken = tmp_path / "broken.str"
    broken.write_text("polygon(p, (0,0)).")
    assert _run_cli(["check", str(broken)], tmp_path).returncode == 2
    assert _run_cli(["check", str(tmp_path / "missing.str")], tmp_path).returncode == 2


def test_cli_translate_svg(tmp_path):
    f = tmp_path / "tr.str"
    f.write_text(
        "polygon(big, (10,10, 14,10, 14,14, 10,14)).\n"
        "polygon(small, (0,0, 1,0, 1,1, 0,1)).\n"
        "translation(small, small_t).\n"
        "st_object(box, at(0), id(big)).\n"
        "st_object(item, at(0), id(small_t)).\n"
        "topology(pp, item, box, time(0, 0)).\n"
    )
    svg = tmp_path / "out.svg"
    r = _run_cli(["translate", str(f), "--emit-svg", str(svg)], tmp_path)
    assert r.returncode == 0
    assert "translation_vector(item" in r.stdout
    assert svg.read_text().startswith("<?xml")


def test_cli_bench_csv(tmp_path):
    r = _run_cli(["bench", "t4", "--n", "3", "--seed", "5"], tmp_path)
    assert r.returncode == 0
    lines = r.stdout.strip().splitlines()
    assert lines[0] == "n,trial,models,seconds"
    assert len(lines) == 11


def test_cli_seed_env(tmp_path, scene_file):
    import os
    env = dict(os.environ, STR_SEED="123")
    r = subprocess.run(
        [sys.executable, "-m", "strel.cli", "-v", "bench", "t4", "--n", "3"],
        capture_output=True, text=True, env=env,
    )
    assert r.returncode == 0
    assert "seed=123" in r.stderr
