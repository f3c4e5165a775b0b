"""Command line front end.

Exit codes follow one contract everywhere: 0 when the answer is
reachable or the evidence verified, 1 when unreachable or refuted, 2 on
malformed input or an exhausted budget.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path as FsPath

from .analysis import structure_report
from .automaton import OCA, Config, parse_config, parse_oca, format_oca
from .campaign import format_report, run_campaign
from .evidence import format_run, verify_evidence
from .exploration import ExplorationBudget, ResourceExceeded
from .generators import FuzzSpec, gen_subset_sum
from .invariants import format_witness
from .pessimistic import decide_pessimistic_reach, format_certificate, make_certificate
from .solver import REACHABLE, decide_full


class CliError(Exception):
    """Anything that should end the process with exit code 2."""


def _load_oca(path: str) -> OCA:
    try:
        return parse_oca(FsPath(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None


def _endpoint(text: str) -> Config:
    try:
        return parse_config(text)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _emit(path: str | None, text: str) -> None:
    if path is None:
        return
    try:
        FsPath(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from None


def _budget(args: argparse.Namespace) -> ExplorationBudget | None:
    if args.budget_values is None and args.budget_nodes is None:
        return None
    return ExplorationBudget(
        value_cap=args.budget_values if args.budget_values is not None else 500_000,
        length_cap=500_000,
        node_cap=args.budget_nodes if args.budget_nodes is not None else 500_000,
    )


def cmd_decide(args: argparse.Namespace) -> int:
    a = _load_oca(args.file)
    src, trg = _endpoint(args.src), _endpoint(args.trg)
    try:
        verdict = decide_full(a, src, trg, budget=_budget(args))
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if verdict.kind == REACHABLE:
        print(f"reachable: run of {len(verdict.run)} transitions")
        _emit(args.emit, format_run(src, trg, verdict.run))
        return 0
    if verdict.witness is not None:
        print("unreachable: invariant witness found")
        _emit(args.emit, format_witness(verdict.witness, normalized=True))
    else:
        print(f"unreachable: {verdict.note}")
        if args.emit:
            print("no standalone evidence format for this verdict", file=sys.stderr)
    return 1


def cmd_verify(args: argparse.Namespace) -> int:
    a = _load_oca(args.file)
    src, trg = _endpoint(args.src), _endpoint(args.trg)
    try:
        text = FsPath(args.evidence).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {args.evidence}: {exc}") from None
    try:
        report = verify_evidence(a, src, trg, text)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if report.verified:
        print(f"verified: {report.kind}")
        return 0
    print(f"refuted: {report.kind} ({report.condition})")
    return 1


def cmd_analyze(args: argparse.Namespace) -> int:
    print(structure_report(_load_oca(args.file)), end="")
    return 0


def cmd_pessimistic(args: argparse.Namespace) -> int:
    a = _load_oca(args.file)
    src, trg = _endpoint(args.src), _endpoint(args.trg)
    try:
        run = decide_pessimistic_reach(a, src, trg)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if run is None:
        print("no pessimistic run")
        return 1
    print(f"pessimistic run of {len(run)} transitions")
    _emit(args.emit, format_certificate(src, trg, make_certificate(a, src, run)))
    return 0


def cmd_gen_subset_sum(args: argparse.Namespace) -> int:
    try:
        a, src, trg = gen_subset_sum(tuple(args.values), args.sum)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    text = format_oca(a)
    if args.emit:
        _emit(args.emit, text)
        hints = sys.stdout
    else:
        # Keep stdout a parseable automaton so `> file` round-trips.
        print(text, end="")
        hints = sys.stderr
    print(f"src {src}", file=hints)
    print(f"trg {trg}", file=hints)
    return 0


def cmd_fuzz(args: argparse.Namespace) -> int:
    try:
        spec = FuzzSpec(
            num_states=args.num_states,
            max_update=args.max_update,
            max_guard=args.max_guard,
            guard_density=args.guard_density,
            equality_fraction=args.equality_fraction,
            count=args.count,
            seed=args.seed,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    report = run_campaign(spec)
    text = format_report(report)
    if args.emit:
        _emit(args.emit, text)
    else:
        print(text, end="")
    print(f"campaign finished in {report.seconds:.1f}s", file=sys.stderr)
    return 0 if report.clean() else 1


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ocareach",
        description="reachability in one-counter automata with counter tests",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def endpoints(p: argparse.ArgumentParser) -> None:
        p.add_argument("--src", required=True, help="source, e.g. q:0")
        p.add_argument("--trg", required=True, help="target, e.g. q:10")

    decide = sub.add_parser("decide", help="decide reachability")
    decide.add_argument("file")
    endpoints(decide)
    decide.add_argument("--emit", help="write the run or witness here")
    decide.add_argument("--budget-values", type=int)
    decide.add_argument("--budget-nodes", type=int)
    decide.set_defaults(fn=cmd_decide)

    verify = sub.add_parser("verify", help="check an evidence file")
    verify.add_argument("file")
    endpoints(verify)
    verify.add_argument("evidence")
    verify.set_defaults(fn=cmd_verify)

    analyze = sub.add_parser("analyze", help="structural report")
    analyze.add_argument("file")
    analyze.set_defaults(fn=cmd_analyze)

    pess = sub.add_parser("pessimistic", help="descent-only reachability")
    pess.add_argument("file")
    endpoints(pess)
    pess.add_argument("--emit", help="write the certificate here")
    pess.set_defaults(fn=cmd_pessimistic)

    gen = sub.add_parser("gen-subset-sum", help="emit a subset-sum instance")
    gen.add_argument("values", nargs="*", type=int)
    gen.add_argument("--sum", type=int, required=True)
    gen.add_argument("--emit", help="write the instance here")
    gen.set_defaults(fn=cmd_gen_subset_sum)

    fuzz = sub.add_parser("fuzz", help="differential campaign against the oracle")
    fuzz.add_argument("--seed", type=int, default=0)
    fuzz.add_argument("--count", type=int, default=100)
    fuzz.add_argument("--num-states", type=int, default=4)
    fuzz.add_argument("--max-update", type=int, default=3)
    fuzz.add_argument("--max-guard", type=int, default=8)
    fuzz.add_argument("--guard-density", type=float, default=0.5)
    fuzz.add_argument("--equality-fraction", type=float, default=0.0)
    fuzz.add_argument("--emit", help="write the report here")
    fuzz.set_defaults(fn=cmd_fuzz)

    return top


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceExceeded as exc:
        print(f"resource exceeded: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
