"""Command-line interface.

Subcommands:

* ``graphref run --config FILE [--out DIR]`` run a campaign
* ``graphref verify --spec FILE --input FILE --format obj|pgm|xyz|txt`` check
  one input; exit 0 when clean, 1 when violations were found
* ``graphref mutate --seed FILE --budget N --out DIR [--count M]
  [--no-refine] [--no-neighbor]`` emit mutants of one seed
* ``graphref report --in DIR --format json|csv`` re-emit a campaign report
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import builtin_spec_text
from .constraints import parse_spec, verify
from .converters import (
    FormatDescriptor,
    FormatKind,
    dump_bytes,
    format_for_path,
    load_bytes,
)
from .errors import GraphRefError
from .harness import load_config, load_report, render_report, result_from_report, run_campaign
from .mutation import NeighborPolicy, mutate_n
from .refine import refine


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.out:
        config = replace(config, out_dir=args.out)
    result = run_campaign(config)
    s = result.summary
    print(f"generated={s.generated} valid={s.valid} vir={s.vir:.3f}", end="")
    if s.sps is not None:
        print(f" sps={s.sps:.3f}", end="")
    print(f" artifacts={result.artifact_dir}")
    return 0


def _format_descriptor(fmt: str | None, path: str, knn_k: int) -> FormatDescriptor:
    kind = FormatKind(fmt) if fmt else format_for_path(path)
    return FormatDescriptor(kind, {"knn_k": str(knn_k)})


def _cmd_verify(args) -> int:
    spec_text = (
        builtin_spec_text() if args.spec == "builtin" else Path(args.spec).read_text("utf-8")
    )
    spec = parse_spec(spec_text)
    fmt = _format_descriptor(args.format, args.input, args.knn_k)
    graph = load_bytes(Path(args.input).read_bytes(), fmt)
    report = verify(spec, graph, epsilon=args.epsilon)
    for v in report.entries:
        print(f"violation: constraint[{v.constraint_index}] {v.label} "
              f"{v.element_kind} {v.element_id} measured={v.measured}")
    print(f"{len(report)} violation(s)")
    return 0 if report.is_clean() else 1


def _cmd_mutate(args) -> int:
    fmt = _format_descriptor(args.format, args.seed, args.knn_k)
    base = load_bytes(Path(args.seed).read_bytes(), fmt)
    spec = parse_spec(
        builtin_spec_text() if args.spec == "builtin" else Path(args.spec).read_text("utf-8")
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    policy = NeighborPolicy(enabled=not args.no_neighbor)
    rng = np.random.default_rng(args.rng_seed)
    for i in range(args.count):
        mutant, records = mutate_n(base, args.budget, policy=policy, rng=rng)
        status = "skipped"
        if not args.no_refine:
            mutant, outcome = refine(mutant, spec, epsilon=args.epsilon)
            status = outcome.status.value
        data = dump_bytes(mutant, fmt)
        ext = Path(args.seed).suffix or ".out"
        path = out / f"mutant{i:03d}{ext}"
        path.write_bytes(data)
        ops = ",".join(r.op_kind for r in records)
        print(f"{path} refine={status} ops={ops}")
    return 0


def _cmd_report(args) -> int:
    report = load_report(Path(args.in_dir) / "report.json")
    result = result_from_report(report, artifact_dir=args.in_dir)
    text = render_report(result, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphref", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a campaign from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", help="override the artifact directory")
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="verify one input against a spec")
    p_verify.add_argument("--spec", required=True, help="path to a .gcon file, or 'builtin'")
    p_verify.add_argument("--input", required=True)
    p_verify.add_argument("--format", choices=[k.value for k in FormatKind])
    p_verify.add_argument("--epsilon", type=float, default=1e-9)
    p_verify.add_argument("--knn-k", type=int, default=4)
    p_verify.set_defaults(func=_cmd_verify)

    p_mutate = sub.add_parser("mutate", help="mutate one seed input")
    p_mutate.add_argument("--seed", required=True)
    p_mutate.add_argument("--budget", type=int, default=5)
    p_mutate.add_argument("--out", required=True)
    p_mutate.add_argument("--count", type=int, default=1)
    p_mutate.add_argument("--no-refine", action="store_true")
    p_mutate.add_argument("--no-neighbor", action="store_true")
    p_mutate.add_argument("--format", choices=[k.value for k in FormatKind])
    p_mutate.add_argument("--spec", default="builtin")
    p_mutate.add_argument("--epsilon", type=float, default=1e-9)
    p_mutate.add_argument("--knn-k", type=int, default=4)
    p_mutate.add_argument("--rng-seed", type=int, default=0)
    p_mutate.set_defaults(func=_cmd_mutate)

    p_report = sub.add_parser("report", help="re-emit a campaign report")
    p_report.add_argument("--in", dest="in_dir", required=True)
    p_report.add_argument("--format", choices=["json", "csv"], default="json")
    p_report.add_argument("--out")
    p_report.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GraphRefError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
