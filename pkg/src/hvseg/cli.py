"""Command-line front end.

Exit codes: 0 = yes / accepted / done, 1 = no / rejected, 2 = error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence

from . import gen, oracle, realize, reduce as rd, solve
from .core import (
    InstanceError,
    LevelInstance,
    SegInstance,
    SegWitness,
    SeqPQInstance,
    WitnessError,
    check_witness,
    validate,
)
from .jsonio import (
    FormatError,
    dumps,
    instance_from_dict,
    instance_to_dict,
    loads,
    problem_of,
    witness_from_dict,
    witness_to_dict,
)

EXIT_YES, EXIT_NO, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    """Reported as a one-line diagnostic with exit code 2."""


# ---------------------------------------------------------------------------
# file helpers
# ---------------------------------------------------------------------------


def write_atomic(path: str | Path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or Path("."))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_instance(path: str | Path, problem: str | None = None):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from exc
    inst = instance_from_dict(loads(text), problem)
    if not isinstance(inst, rd.SimPQInstance):
        report = validate(inst)
        if not report:
            raise CliError(f"{path}: invalid instance: {'; '.join(report.violations)}")
    return inst


def read_witness(spec: str, instance):
    """A witness file, or for segment instances an inline order such as
    ``b,a,c`` or ``(b,a,c)``."""
    if os.path.exists(spec):
        return witness_from_dict(loads(Path(spec).read_text(encoding="utf-8")), problem_of(instance))
    if isinstance(instance, SegInstance):
        names = [x.strip() for x in spec.strip().strip("()[]").split(",") if x.strip()]
        return SegWitness(tuple(names))
    raise CliError(f"witness file {spec} not found")


def _emit(args: argparse.Namespace, record: dict, text: str) -> None:
    if args.json:
        print(dumps(record), end="")
    elif not args.quiet:
        print(text)


def _inputs(path: str) -> list[Path]:
    p = Path(path)
    if p.is_dir():
        return sorted(q for q in p.iterdir() if q.suffix == ".json" and q.is_file())
    return [p]


def _batch(args: argparse.Namespace, worker: Callable[[argparse.Namespace, str], tuple[int, dict, str]]) -> int:
    """Run ``worker`` on every input, concurrently with --jobs > 1; results
    are reported in input order. The overall exit code is the worst one."""
    files = [str(f) for path in args.paths for f in _inputs(path)]
    if not files:
        raise CliError("no input files")
    if args.jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_guarded, [worker] * len(files), [args] * len(files), files))
    else:
        results = [_guarded(worker, args, f) for f in files]
    for code, record, text in results:
        _emit(args, record, text)
    return max(code for code, _, _ in results)


def _guarded(worker, args: argparse.Namespace, path: str) -> tuple[int, dict, str]:
    try:
        return worker(args, path)
    except (CliError, FormatError, InstanceError, WitnessError, solve.SearchBudgetExceeded,
            oracle.OracleCapExceeded, ValueError) as exc:
        return EXIT_ERROR, {"file": path, "error": str(exc)}, f"{path}: error: {exc}"


def _witness_target(args: argparse.Namespace, path: str) -> str | None:
    if not args.witness:
        return None
    if len(args.paths) > 1 or Path(args.paths[0]).is_dir():
        os.makedirs(args.witness, exist_ok=True)
        return str(Path(args.witness) / f"{Path(path).stem}.witness.json")
    return args.witness


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _solve_one(args: argparse.Namespace, path: str) -> tuple[int, dict, str]:
    inst = read_instance(path, args.problem)
    record: dict[str, Any] = {"file": path, "problem": problem_of(inst)}
    if isinstance(inst, SegInstance) and inst.sigma_v is not None:
        res = solve.recognize_fixed_both(inst)
        record["variant"] = "fully-fixed"
        record["answer"] = "yes" if res else "no"
        if res:
            return EXIT_YES, record, f"{path}: yes (fully fixed)"
        h, v = res.detail.split(",")
        record["cross"] = [h, v]
        return EXIT_NO, record, f"{path}: no, cross at ({h}, {v})"
    if isinstance(inst, SegInstance):
        res = solve.solve_sfhvseg(inst, budget=args.budget, method=args.method)
    elif isinstance(inst, LevelInstance):
        res = solve.solve_tlp(inst, budget=args.budget, method=args.method)
    elif isinstance(inst, SeqPQInstance):
        res = solve.solve_seqpq(inst, budget=args.budget, method=args.method)
    else:
        raise CliError("simpq instances cannot be solved directly; solve the seqpq source")
    record.update(answer="yes" if res else "no", nodes=res.nodes, engine=res.engine)
    if not res:
        return EXIT_NO, record, f"{path}: no"
    record["witness"] = witness_to_dict(res.witness)
    target = _witness_target(args, path)
    if target:
        write_atomic(target, dumps(witness_to_dict(res.witness)))
        record["witness_file"] = target
    if isinstance(res.witness, SegWitness):
        shown = f"sigma_v = ({', '.join(res.witness.sigma_v)})"
    else:
        shown = "witness found"
    return EXIT_YES, record, f"{path}: yes, {shown}"


def cmd_solve(args: argparse.Namespace) -> int:
    return _batch(args, _solve_one)


def _size(inst) -> dict[str, int]:
    if isinstance(inst, SegInstance):
        return {"horizontals": len(inst.horizontals), "verticals": len(inst.verticals), "edges": len(inst.edges)}
    if isinstance(inst, LevelInstance):
        return {
            "vertices": len(inst.level),
            "edges": len(inst.edges),
            "levels": inst.num_levels,
            "constraints": sum(len(f) for f in inst.constraints.values()),
        }
    if isinstance(inst, SeqPQInstance):
        return {"elements": len(inst.ground), "trees": inst.k}
    return {"trees": len(inst.trees), "arcs": len(inst.arcs), "max_degree": inst.max_degree()}


def _route(inst, target: str):
    """Target instance for ``--to``, composing steps where needed."""
    if isinstance(inst, SegInstance):
        if target == "tlp":
            return rd.hvseg_to_tlp(inst).target
        if target in ("seqpq", "simpq"):
            sp = rd.hvseg_to_tlp(inst).then(rd.tlp_to_seqpq).target
            return sp if target == "seqpq" else rd.seqpq_to_simpq(sp)
    elif isinstance(inst, LevelInstance):
        steps = {
            "matching": rd.tlp_to_matching,
            "split": rd.tlp_split_levels,
            "hvseg": rd.tlp_to_hvseg,
            "seqpq": rd.tlp_to_seqpq,
        }
        if target == "split" and not inst.is_matching():
            return rd.tlp_to_matching(inst).then(rd.tlp_split_levels).target
        if target in steps:
            return steps[target](inst).target
        if target == "simpq":
            return rd.seqpq_to_simpq(rd.tlp_to_seqpq(inst).target)
    elif isinstance(inst, SeqPQInstance):
        if target == "tlp":
            return rd.seqpq_to_tlp(inst).target
        if target == "hvseg":
            return rd.seqpq_to_tlp(inst).then(rd.tlp_to_hvseg).target
        if target == "simpq":
            return rd.seqpq_to_simpq(inst)
    raise CliError(f"no reduction from {problem_of(inst)} to {target}")


def cmd_reduce(args: argparse.Namespace) -> int:
    inst = read_instance(args.path, args.problem)
    out = _route(inst, args.to)
    text = dumps(instance_to_dict(out))
    if args.output:
        write_atomic(args.output, text)
    elif not args.json:
        print(text, end="")
    record = {"source": _size(inst), "target": _size(out), "problem": problem_of(out)}
    if args.json:
        print(dumps(record), end="")
    elif not args.quiet:
        src = ", ".join(f"{k}={v}" for k, v in record["source"].items())
        tgt = ", ".join(f"{k}={v}" for k, v in record["target"].items())
        print(f"{problem_of(inst)} [{src}] -> {problem_of(out)} [{tgt}]", file=sys.stderr)
    return EXIT_YES


def cmd_check(args: argparse.Namespace) -> int:
    inst = read_instance(args.path, args.problem)
    res = check_witness(inst, read_witness(args.witness, inst))
    _emit(args, {"accepted": res.ok, "detail": res.detail},
          "accepted" if res else f"rejected: {res.detail}")
    return EXIT_YES if res else EXIT_NO


def cmd_oracle(args: argparse.Namespace) -> int:
    inst = read_instance(args.path, args.problem)
    if isinstance(inst, SegInstance) and inst.sigma_v is not None:
        inst = inst.with_sigma_v(None)
    if isinstance(inst, SegInstance):
        res = oracle.brute_sfhvseg(inst, args.cap, first_only=not args.all)
    else:
        res = oracle.decide(inst, args.cap)
    record: dict[str, Any] = {"answer": "yes" if res else "no"}
    lines = ["yes" if res else "no"]
    if res and args.all:
        record["witnesses"] = [witness_to_dict(w) for w in res.witnesses]
        for w in res.witnesses:
            lines.append(", ".join(w.sigma_v) if isinstance(w, SegWitness) else dumps(witness_to_dict(w)).strip())
    _emit(args, record, "\n".join(lines))
    return EXIT_YES if res else EXIT_NO


def cmd_render(args: argparse.Namespace) -> int:
    inst = read_instance(args.path, args.problem)
    if isinstance(inst, SegInstance):
        if args.witness:
            sigma = read_witness(args.witness, inst).sigma_v
        elif inst.sigma_v is not None:
            sigma = inst.sigma_v
        else:
            res = solve.solve_sfhvseg(inst)
            if not res:
                raise CliError("instance is a no-instance; pass --witness to draw a given order")
            sigma = res.witness.sigma_v
        arr = realize.realize_segments(inst, sigma)
        svg = realize.emit_svg(arr, scale=args.scale, edges=inst.edges)
        ok = arr.represents(inst)
    elif isinstance(inst, LevelInstance):
        if args.witness:
            w = read_witness(args.witness, inst)
        else:
            res = solve.solve_tlp(inst)
            if not res:
                raise CliError("instance is a no-instance; pass --witness to draw given orders")
            w = res.witness
        drawing = realize.level_drawing(inst, w.orders)
        svg = realize.emit_svg(drawing, scale=args.scale)
        ok = bool(check_witness(inst, w))
    else:
        raise CliError(f"cannot render a {problem_of(inst)} instance")
    write_atomic(args.output, svg)
    _emit(args, {"output": args.output, "valid": ok},
          f"wrote {args.output}" + ("" if ok else " (witness invalid; unwanted crossings circled)"))
    return EXIT_YES if ok else EXIT_NO


def cmd_gen(args: argparse.Namespace) -> int:
    if args.kind == "arrangement":
        inst = gen.gen_arrangement(args.n, args.m or args.n, args.density, args.seed)
    elif args.kind == "random-seg":
        inst = gen.random_seg(args.n, args.m or args.n, args.density, args.seed)
    elif args.kind == "planted-seqpq":
        inst = gen.gen_planted_seqpq(args.n, args.k, args.seed)
    elif args.kind == "random-seqpq":
        inst = gen.random_seqpq(args.n, args.k, args.seed)
    else:
        inst = gen.random_level(args.n, args.k, args.density, args.seed)
    if args.mutate:
        if not isinstance(inst, SegInstance):
            raise CliError("--mutate applies to segment instances only")
        inst = gen.mutate(inst, args.mutate, args.seed)
    text = dumps(instance_to_dict(inst))
    if args.output:
        write_atomic(args.output, text)
        if not args.quiet and not args.json:
            print(f"wrote {args.output}")
    else:
        print(text, end="")
    return EXIT_YES


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="no human-readable output")
    common.add_argument("--jobs", type=_positive, default=argparse.SUPPRESS, help="parallel workers for batches")

    parser = argparse.ArgumentParser(prog="hvseg", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    def problem_flag(p: argparse.ArgumentParser) -> None:
        p.add_argument("--problem", choices=("sfhvseg", "tlp", "seqpq", "simpq"), help="override the problem tag")

    p = sub.add_parser("solve", parents=[common], help="decide instances and emit witnesses")
    p.add_argument("paths", nargs="+", help="instance files or directories of them")
    problem_flag(p)
    p.add_argument("--witness", help="witness output file (directory in batch mode)")
    p.add_argument("--method", choices=solve.METHODS, default="auto")
    p.add_argument("--budget", type=_positive, help="search node budget")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reduce", parents=[common], help="map an instance to another formulation")
    p.add_argument("path")
    problem_flag(p)
    p.add_argument("--to", required=True, choices=("tlp", "matching", "split", "hvseg", "seqpq", "simpq"))
    p.add_argument("-o", "--output", help="target instance file (stdout if omitted)")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("check", parents=[common], help="verify a witness")
    p.add_argument("path")
    problem_flag(p)
    p.add_argument("--witness", required=True, help="witness file, or an inline order like b,a,c")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", parents=[common], help="brute-force decision")
    p.add_argument("path")
    problem_flag(p)
    p.add_argument("--all", action="store_true", help="list every witness (segment instances)")
    p.add_argument("--cap", type=_positive, default=oracle.DEFAULT_CAP)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("render", parents=[common], help="draw a witness as SVG")
    p.add_argument("path")
    problem_flag(p)
    p.add_argument("--witness", help="witness file or inline order; solved if omitted")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--scale", type=_positive, default=realize.DEFAULT_SCALE, help="pixels per grid unit")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("gen", parents=[common], help="generate a seeded instance")
    p.add_argument("kind", choices=("arrangement", "random-seg", "planted-seqpq", "random-seqpq", "random-level"))
    p.add_argument("--n", type=_positive, default=10, help="horizontals, elements or vertices")
    p.add_argument("--m", type=_positive, help="verticals (defaults to --n)")
    p.add_argument("--k", type=_positive, default=5, help="trees or levels")
    p.add_argument("--density", type=float, default=0.3, help="segment density or edge probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mutate", type=_positive, help="flip this many adjacencies afterwards")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_YES if exc.code == 0 else EXIT_ERROR
    for name, default in (("json", False), ("quiet", False), ("jobs", 1)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except (CliError, FormatError, InstanceError, WitnessError, solve.SearchBudgetExceeded,
            oracle.OracleCapExceeded, ValueError, OSError) as exc:
        print(f"hvseg: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - the exit-code contract is total
        print(f"hvseg: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
