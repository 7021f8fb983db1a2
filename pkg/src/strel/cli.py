"""Command line interface: derive, check, translate, plan, and bench."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import algebra, experiments, factfile
from . import translation as trans
from .spacetime import DeriveConfig, Interval, RelationAtom

log = logging.getLogger("strel.cli")


def _seed(args) -> int:
    env = os.environ.get("STR_SEED")
    if env is not None:
        seed = int(env)
    elif getattr(args, "seed", None) is not None:
        seed = args.seed
    else:
        seed = experiments.DEFAULT_SEED
    log.info("seed=%d", seed)
    return seed


def _read_program(path: str) -> factfile.FactProgram:
    with open(path) as fh:
        return factfile.parse(fh.read())


def _config(args, prog: factfile.FactProgram) -> DeriveConfig:
    kwargs = {}
    if getattr(args, "alpha", None) is not None:
        kwargs["follows_max_gap"] = args.alpha
    if getattr(args, "near_threshold", None) is not None:
        kwargs["near_threshold"] = args.near_threshold
    scene = factfile._build_scene(prog)
    if scene.ground:
        return DeriveConfig.for_scene(scene.ground, **kwargs)
    kwargs.setdefault("near_threshold", 1.0)
    return DeriveConfig(**kwargs)


def _workspace(args) -> "trans.WorkspaceConfig | None":
    raw = getattr(args, "workspace", None)
    if raw is None:
        return None
    parts = [float(v) for v in raw.split(",")]
    if len(parts) != 4:
        raise SystemExit("--workspace expects xmin,ymin,xmax,ymax")
    return trans.WorkspaceConfig(tuple(parts))


def _augment_directives(args, prog: factfile.FactProgram) -> factfile.FactProgram:
    """Turn --aspect/--pair/--time flags into derivation directives."""
    aspect = getattr(args, "aspect", None)
    if aspect is None:
        return prog
    aspects = ["topology", "size", "movement"] if aspect == "all" else [aspect]
    scene = factfile._build_scene(prog)
    ids = sorted(scene.ground)
    if getattr(args, "pair", None):
        a, b = args.pair.split(",")
        pairs = [(a.strip(), b.strip())]
    else:
        pairs = [(x, y) for i, x in enumerate(ids) for y in ids[i + 1:]]
    if getattr(args, "time", None):
        t1, t2 = (int(v) for v in args.time.split(":"))
    else:
        times = [t for obj in scene.ground.values() for t in obj.times()]
        if not times:
            raise SystemExit("scene has no slices to derive from")
        t1, t2 = min(times), max(times)
    interval = Interval(t1, t2)
    new = list(prog.directives)
    for asp in aspects:
        for a, b in pairs:
            new.append(factfile.Directive(asp, (a, b), interval))
    return factfile.FactProgram(
        polygons=prog.polygons,
        translations=prog.translations,
        entities=prog.entities,
        slices=prog.slices,
        directives=tuple(sorted(set(new), key=factfile.Directive.sort_key)),
        assertions=prog.assertions,
        filters=prog.filters,
        witness_decls=prog.witness_decls,
    )


def cmd_derive(args) -> int:
    prog = _read_program(args.file)
    prog = _augment_directives(args, prog)
    cfg = _config(args, prog)
    rs = factfile.evaluate(prog, cfg=cfg, ws=_workspace(args))
    sys.stdout.write(factfile.serialize(rs))
    return 0


def cmd_check(args) -> int:
    try:
        prog = _read_program(args.file)
        cfg = _config(args, prog)
        rs = factfile.evaluate(prog, cfg=cfg, ws=_workspace(args))
    except (factfile.InterfaceError, trans.TranslationError, ValueError, OSError) as exc:
        sys.stdout.write(f"% error: {exc}\n")
        return 2
    sys.stdout.write(factfile.serialize(rs))
    return 1 if rs.status == "inconsistent" else 0


def cmd_translate(args) -> int:
    prog = _read_program(args.file)
    cfg = _config(args, prog)
    ws = _workspace(args)
    rs = factfile.evaluate(prog, cfg=cfg, ws=ws, max_models=args.max_models)
    sys.stdout.write(factfile.serialize(rs))
    if args.emit_svg:
        scene = factfile._build_scene(prog)
        if ws is None and (scene.ground or scene.sources):
            polys = [p for o in scene.ground.values() for p in o.slices.values()]
            polys += [p for o in scene.sources.values() for p in o.slices.values()]
            ws = trans.WorkspaceConfig.around(polys)
        regions = []
        palette = ["#4477aa", "#ee6677", "#228833", "#ccbb44"]
        full = dict(scene.ground)
        for ent, src in scene.sources.items():
            full[src.id] = src
        check = trans.check_translated_program(
            full, sorted(scene.unground.values(), key=lambda t: t.target_object),
            [a for a in prog.assertions if any(e in scene.unground for e in a.args)],
            ws=ws, max_models=1,
        )
        for i, (key, sol) in enumerate(sorted(check.per_slice_sets.items())):
            regions.append((sol.region, palette[i % len(palette)]))
        trans.region_to_svg(regions, path=args.emit_svg)
        log.info("wrote %s", args.emit_svg)
    return 0 if rs.status != "inconsistent" else 1


def cmd_plan(args) -> int:
    problem = experiments.example_desk_problem() if args.file == "example" else None
    if problem is None:
        raise SystemExit("plan currently accepts the built-in 'example' problem file")
    if args.horizon is not None:
        problem = experiments.PlanProblem(
            initial=problem.initial, movable=problem.movable,
            move_costs=problem.move_costs, hard_constraints=problem.hard_constraints,
            goal=problem.goal, horizon=Interval(0, args.horizon),
        )
    try:
        solution = experiments.plan(problem)
    except experiments.NoPlan as exc:
        sys.stdout.write(f"% no plan: {exc}\n")
        return 1
    if args.max_cost is not None and solution.total_cost > args.max_cost:
        sys.stdout.write(f"% no plan within cost {args.max_cost}\n")
        return 1
    sys.stdout.write(f"% plan cost: {solution.total_cost}\n")
    for obj, step in solution.moves:
        sys.stdout.write(f"move({obj}, at({step})).\n")
    for obj in sorted(solution.trajectories):
        for w in solution.trajectories[obj]:
            s = w.ground_slices[0]
            flat = ", ".join(
                f"{factfile.format_number(p.x)}, {factfile.format_number(p.y)}"
                for p in s.shape.vertices
            )
            sys.stdout.write(f"polygon({obj}_t{s.time}, ({flat})).\n")
    return 0


def cmd_bench(args) -> int:
    seed = _seed(args)
    test = args.test
    if test == "t1":
        n = args.n or 10
        m = args.m or 40
        rows = [(n, m, experiments.run_t1(n, m, seed))]
        out = experiments.t1_csv(rows)
    elif test == "t2":
        fractions = [0.05, 0.10, 0.15, 0.20]
        rows = [(f, seed, experiments.run_t2(f, seed)) for f in fractions]
        out = experiments.t2_csv(rows)
    elif test == "t3":
        n = args.n if args.n is not None else 5
        out = experiments.t3_csv([(n, experiments.run_t3(n, seed))])
    elif test == "t4":
        n = args.n or 10
        out = experiments.t4_csv([experiments.run_t4(n, seed)])
    else:  # pragma: no cover - argparse restricts choices
        raise SystemExit(f"unknown bench {test}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="str",
        description="Reason about moving polygons: derive qualitative relations, "
                    "check consistency, solve for feasible translations.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="derive relations from a fact file")
    p.add_argument("file")
    p.add_argument("--aspect", choices=["topology", "size", "movement", "all"])
    p.add_argument("--pair", help="A,B to restrict derivation to one pair")
    p.add_argument("--time", help="T1:T2 window")
    p.add_argument("--alpha", type=int, help="maximum frame gap for follows")
    p.add_argument("--near-threshold", type=float, dest="near_threshold")
    p.set_defaults(fn=cmd_derive)

    p = sub.add_parser("check", help="consistency-check a fact file")
    p.add_argument("file")
    p.add_argument("--workspace", help="xmin,ymin,xmax,ymax")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("translate", help="solve translation constraints")
    p.add_argument("file")
    p.add_argument("--workspace", help="xmin,ymin,xmax,ymax")
    p.add_argument("--emit-svg", dest="emit_svg", help="write solution regions as SVG")
    p.add_argument("--max-models", dest="max_models", type=int, default=1)
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("plan", help="search for a cost-optimal motion plan")
    p.add_argument("file", help="'example' for the built-in desk scenario")
    p.add_argument("--horizon", type=int)
    p.add_argument("--max-cost", dest="max_cost", type=int)
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("bench", help="run a benchmark harness")
    p.add_argument("test", choices=["t1", "t2", "t3", "t4"])
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except (factfile.InterfaceError, trans.TranslationError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
