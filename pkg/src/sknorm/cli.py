"""
Command-line interface: ``sknorm <command> [options]``.

Commands
--------
check     check a norm against every trace of a trace file
synth     synthesise a prohibition or obligation from labelled traces
revise    revise a reference norm within (or at the least) editing distance
gen3sat   generate the trace set encoding a random 3SAT instance
oracle    enumerate every solution by brute force

Exit codes: 0 success, 1 clean negative answer (no solution, or a
violation while checking), 2 input or usage error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from typing import Sequence

from sknorm.config import load_config
from sknorm.errors import NormInputError, ResourceLimitExceeded
from sknorm.monitor import NormKind, check_all, dumps_norm, load_norm
from sknorm.reductions import generate, random_3sat, reduction_sizes, sat3_oracle
from sknorm.revision import RevisionProblem, Revised, revise, revision_report
from sknorm.synthesis import (
    REPORT_SCHEMA,
    Solution,
    StateSetTriple,
    feasible_rows,
    synthesis_report,
    synthesize,
)
from sknorm.tracemodel import LabeledTraceSet, dumps_traces, load_traces
from sknorm.visualizer import TraceSetVisualizer

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3


@dataclass(frozen=True)
class CommandOutcome:
    """Exit code, the report for stdout and an optional message for stderr."""

    exit_code: int
    report: str = ""
    message: str | None = None


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format", choices=["human", "json"], default="human", help="Report format"
    )
    common.add_argument("--config", default=None, help="YAML file overriding the defaults")
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="Log progress (-vv for debug)"
    )

    parser = _ArgumentParser(
        prog="sknorm", description="Synthesise and revise conditional norms from labelled traces"
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("check", parents=[common], help="Check a norm against a trace file")
    p.add_argument("--norm", required=True, help="Norm file (JSON)")
    p.add_argument("--traces", required=True, help="Trace file (JSON)")

    p = sub.add_parser("synth", parents=[common], help="Synthesise a norm")
    p.add_argument("--kind", choices=["prohibition", "obligation"], default="prohibition")
    p.add_argument("--traces", required=True, help="Trace file (JSON)")
    p.add_argument("--engine", choices=["sat", "brute"], default="sat")
    p.add_argument("--norm-out", default=None, help="Write the synthesised norm here")
    p.add_argument("--dot", default=None, help="Write a DOT diagram of the solution here")

    p = sub.add_parser("revise", parents=[common], help="Revise a reference norm")
    p.add_argument("--norm", required=True, help="Reference norm file (JSON)")
    p.add_argument("--traces", required=True, help="Trace file (JSON)")
    budget = p.add_mutually_exclusive_group(required=True)
    budget.add_argument("--max-dist", type=int, default=None, help="Largest allowed distance")
    budget.add_argument("--minimize", action="store_true", help="Find the smallest distance")
    p.add_argument("--norm-out", default=None, help="Write the revised norm here")

    p = sub.add_parser("gen3sat", parents=[common], help="Generate a 3SAT reduction")
    p.add_argument("--kind", choices=["prohibition", "obligation"], default="prohibition")
    p.add_argument("--vars", type=int, required=True, help="Number of variables")
    p.add_argument("--clauses", type=int, required=True, help="Number of clauses")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--encoding", choices=["onehot", "binary"], default=None)
    p.add_argument("--out", default=None, help="Trace file to write (default: stdout)")
    p.add_argument("--dimacs", default=None, help="Also write the instance as DIMACS CNF")

    p = sub.add_parser("oracle", parents=[common], help="Enumerate all solutions by brute force")
    p.add_argument("--kind", choices=["prohibition", "obligation"], default="prohibition")
    p.add_argument("--traces", required=True, help="Trace file (JSON)")
    p.add_argument("--limit", type=int, default=10, help="Solutions to list")

    return parser


def _setup_logging(config: dict, verbose: int) -> None:
    level = logging.getLevelName(config["logging"]["level"])
    if verbose == 1:
        level = min(level, logging.INFO)
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, format=config["logging"]["format"], stream=sys.stderr, force=True
    )


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def _describe_set(triple: StateSetTriple, members) -> str:
    if not members:
        return "(none)"
    return " ".join(f"s{k}={triple.universe[k]}" for k in sorted(members))


def _describe_triple(triple: StateSetTriple) -> list[str]:
    return [
        f"  X_C: {_describe_set(triple, triple.condition)}",
        f"  X_{triple.kind.symbol}: {_describe_set(triple, triple.target)}",
        f"  X_D: {_describe_set(triple, triple.deadline)}",
    ]


def _state_text(state: dict) -> str:
    return "{" + ",".join(f"{p}:{int(v)}" for p, v in state.items()) + "}"


def _describe_norm(norm: dict) -> list[str]:
    return [f"  {key}: {norm[key]}" for key in ("condition", "target", "deadline")]


def _solver_options(config: dict) -> dict:
    solver = config["solver"]
    return {
        "backend": solver["backend"],
        "max_steps": solver["max_steps"],
        "max_clauses": solver["max_clauses"],
    }


# Commands
# ========


def _cmd_check(args, config) -> CommandOutcome:
    traces = load_traces(args.traces)
    norm = load_norm(args.norm, traces.vocab)
    results = check_all(norm, traces)
    violated = sum(1 for _, _, v in results if v.violated)

    if args.format == "json":
        report = _json(
            {
                "schema": REPORT_SCHEMA,
                "command": "check",
                "norm": norm.to_dict(),
                "results": [
                    {
                        "label": label,
                        "index": idx,
                        "violated": v.violated,
                        "witness": None if v.witness is None else v.witness.to_dict(),
                    }
                    for label, idx, v in results
                ],
                "violated": violated,
                "total": len(results),
            }
        )
    else:
        lines = [f"norm: {norm}"]
        lines += [f"{label}[{idx}]\t{v}" for label, idx, v in results]
        lines.append(f"violated: {violated} of {len(results)} traces")
        report = "\n".join(lines) + "\n"
    return CommandOutcome(EXIT_NEGATIVE if violated else EXIT_OK, report)


def _cmd_synth(args, config) -> CommandOutcome:
    traces = load_traces(args.traces)
    result = synthesize(
        traces,
        args.kind,
        args.engine,
        max_bits=config["brute_force"]["max_bits"],
        **_solver_options(config),
    )
    doc = synthesis_report(traces, result)
    doc["engine"] = args.engine

    if isinstance(result, Solution):
        if args.norm_out:
            _write(args.norm_out, dumps_norm(result.norm))
        if args.dot:
            _write(args.dot, TraceSetVisualizer(traces, result.triple).to_dot())

    if args.format == "json":
        report = _json(doc)
    elif isinstance(result, Solution):
        lines = [f"SOLUTION ({doc['kind']}, {args.engine} engine)"]
        if result.trivial:
            lines.append("  trivial: no negative traces, the norm is never detached")
        lines += _describe_triple(result.triple)
        lines += _describe_norm(doc["norm"])
        lines.append(f"verification: {doc['verification']}")
        lines.append("stats: " + " ".join(f"{k}={v}" for k, v in doc["stats"].items()))
        report = "\n".join(lines) + "\n"
    else:
        report = (
            f"NO SOLUTION ({doc['kind']}): no norm over the {doc['universe_size']} "
            "observed states classifies the traces\n"
        )
    return CommandOutcome(EXIT_OK if result.feasible else EXIT_NEGATIVE, report)


def _cmd_revise(args, config) -> CommandOutcome:
    traces = load_traces(args.traces)
    reference = load_norm(args.norm, traces.vocab)
    budget = "minimize" if args.minimize else args.max_dist
    problem = RevisionProblem(traces, reference, budget)
    result = revise(problem, **_solver_options(config))
    doc = revision_report(problem, result)

    if isinstance(result, Revised) and args.norm_out:
        _write(args.norm_out, dumps_norm(result.norm))

    if args.format == "json":
        report = _json(doc)
    elif isinstance(result, Revised):
        lines = [
            f"REVISED ({doc['kind']}): distance {result.distance} "
            f"(budget {budget}, at most {doc['max_distance']})",
            f"note: {doc['normalization']}",
        ]
        for name, change in doc["diff"].items():
            added = ", ".join(_state_text(s) for s in change["added"]) or "-"
            removed = ", ".join(_state_text(s) for s in change["removed"]) or "-"
            lines.append(f"  {name}: +[{added}] -[{removed}]")
        lines += _describe_norm(doc["norm"])
        lines.append(f"verification: {doc['verification']}")
        report = "\n".join(lines) + "\n"
    else:
        report = f"NO SOLUTION ({doc['kind']}): no classifying norm within distance {budget}\n"
    return CommandOutcome(EXIT_OK if result.feasible else EXIT_NEGATIVE, report)


def _cmd_gen3sat(args, config) -> CommandOutcome:
    kind = NormKind.parse(args.kind)
    encoding = args.encoding or config["reductions"]["encoding"]
    instance = random_3sat(args.vars, args.clauses, args.seed)
    artifacts = generate(instance, kind, encoding)
    traces_text = dumps_traces(artifacts.traces)

    if args.dimacs:
        _write(args.dimacs, instance.to_dimacs())
    if args.out is None:
        return CommandOutcome(EXIT_OK, traces_text)
    _write(args.out, traces_text)

    satisfiable = None
    if instance.num_vars <= config["oracle"]["max_vars"]:
        satisfiable = sat3_oracle(instance, config["oracle"]["max_vars"]) is not None
    doc = {
        "schema": REPORT_SCHEMA,
        "command": "gen3sat",
        "kind": kind.value,
        "vars": args.vars,
        "clauses": args.clauses,
        "seed": args.seed,
        "encoding": encoding,
        "satisfiable": satisfiable,
        **reduction_sizes(args.vars, args.clauses, kind),
    }
    if args.format == "json":
        return CommandOutcome(EXIT_OK, _json(doc))
    report = (
        f"wrote {args.out}: {doc['negative']} negative and {doc['positive']} positive traces "
        f"over {doc['states']} states ({encoding} encoding)\n"
    )
    return CommandOutcome(EXIT_OK, report)


def _cmd_oracle(args, config) -> CommandOutcome:
    traces: LabeledTraceSet = load_traces(args.traces)
    kind = NormKind.parse(args.kind)
    grid, rows = feasible_rows(traces, kind, config["brute_force"]["max_bits"])
    n = len(traces.universe)
    shown = [
        StateSetTriple.from_masks(kind, traces.vocab, traces.universe, grid[r].reshape(3, n))
        for r in rows[: max(args.limit, 0)]
    ]

    if args.format == "json":
        report = _json(
            {
                "schema": REPORT_SCHEMA,
                "command": "oracle",
                "kind": kind.value,
                "universe_size": n,
                "candidates": int(grid.shape[0]),
                "solutions": int(rows.size),
                "listed": [t.to_dict() for t in shown],
            }
        )
    else:
        lines = [f"{rows.size} of {grid.shape[0]} candidate triples classify the traces"]
        for number, triple in enumerate(shown, start=1):
            lines.append(f"solution {number}:")
            lines += _describe_triple(triple)
        report = "\n".join(lines) + "\n"
    return CommandOutcome(EXIT_OK if rows.size else EXIT_NEGATIVE, report)


_COMMANDS = {
    "check": _cmd_check,
    "synth": _cmd_synth,
    "revise": _cmd_revise,
    "gen3sat": _cmd_gen3sat,
    "oracle": _cmd_oracle,
}


def dispatch(argv: Sequence[str] | None = None) -> CommandOutcome:
    """
    Run one command and capture its outcome without touching stdout.

    Input problems map to exit code 2 and exhausted budgets to 3, each with
    a one-line message.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        return CommandOutcome(EXIT_INPUT, "", str(e))
    except SystemExit as e:
        return CommandOutcome(int(e.code or 0))

    try:
        config = load_config(args.config)
        _setup_logging(config, args.verbose)
        return _COMMANDS[args.command](args, config)
    except ResourceLimitExceeded as e:
        return CommandOutcome(EXIT_RESOURCE, "", f"resource limit: {e}")
    except (NormInputError, OSError) as e:
        return CommandOutcome(EXIT_INPUT, "", f"error: {e}")


def main(argv: Sequence[str] | None = None) -> int:
    outcome = dispatch(argv)
    if outcome.report:
        sys.stdout.write(outcome.report)
    if outcome.message:
        print(outcome.message, file=sys.stderr)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
