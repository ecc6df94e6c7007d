"""Command-line interface: solve, generate, bench, and oracle-check.

Exit codes: 0 success, 1 oracle-check failures, 2 usage or input errors,
3 solve aborted on a time or memory limit.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .dominance import (
    EpsilonCovering,
    TradeoffDominance,
    load_tradeoffs,
    save_tradeoffs,
    tradeoff_dominates,
)
from .generator import (
    InfeasibleParamsError,
    MoidParams,
    TradeoffParams,
    generate_moid,
    generate_recall_moid,
    generate_tradeoffs,
)
from .model import DiagramValidationError, InfluenceDiagram, load_diagram, save_diagram
from .solver import (
    PolicyCountError,
    SolverLimits,
    brute_force_solve,
    legal_elimination_order,
    induced_width,
    maximal_indices_for,
    solve,
)
from .vectors import PARETO, UtilitySet, UtilityVector, convex_set_dominates

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_LIMIT = 3

TIME_LIMIT_ENV = "MOID_TIME_LIMIT"
MEMORY_LIMIT_ENV = "MOID_MEMORY_LIMIT"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _sig6(x: float) -> float:
    return float(f"{x:.6g}")


def _limits(args) -> SolverLimits:
    time_limit = args.time_limit
    if time_limit is None and os.environ.get(TIME_LIMIT_ENV):
        time_limit = float(os.environ[TIME_LIMIT_ENV])
    memory_limit = args.memory_limit
    if memory_limit is None and os.environ.get(MEMORY_LIMIT_ENV):
        memory_limit = int(os.environ[MEMORY_LIMIT_ENV])
    return SolverLimits(time_limit=time_limit, memory_limit=memory_limit)


def _load_diagram_file(path: str) -> InfluenceDiagram:
    try:
        return load_diagram(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CliError(f"diagram file not found: {path}") from None
    except DiagramValidationError as exc:
        raise CliError(str(exc)) from None


def _relation(args, d: InfluenceDiagram):
    mode = args.mode
    if mode == "pareto":
        return PARETO
    if mode == "epsilon":
        if args.epsilon is None:
            raise CliError("--epsilon is required in epsilon mode")
        return EpsilonCovering(args.epsilon[0] if isinstance(args.epsilon, list) else args.epsilon)
    if mode == "tradeoff":
        if not args.tradeoffs:
            raise CliError("--tradeoffs FILE is required in tradeoff mode")
        theta, senses = load_tradeoffs(Path(args.tradeoffs).read_text(encoding="utf-8"))
        declared = tuple(s for _, s in d.objectives)
        if senses != declared:
            raise CliError(
                f"tradeoff file senses {senses} do not match the diagram's {declared}"
            )
        return TradeoffDominance(theta)
    raise CliError(f"unknown mode {mode!r}")


def _policy_doc(policy) -> dict:
    doc = {}
    for dec, rule in policy.rules.items():
        doc[dec] = {
            "parents": list(rule.parents),
            "rules": [
                {"when": dict(zip(rule.parents, config)), "choose": value}
                for config, value in sorted(rule.table.items())
            ],
        }
    return doc


def _report_doc(report) -> dict:
    return {
        "mode": report.mode,
        "seed": report.seed,
        "solved": report.solved,
        "failure_reason": report.failure_reason,
        "induced_width": report.induced_width,
        "wall_time": report.wall_time,
        "set_size_trace": list(report.set_size_trace),
        "maximal_utilities": (
            [[_sig6(c) for c in v.coords] for v in report.maximal_utilities]
            if report.maximal_utilities is not None
            else None
        ),
        "policy": _policy_doc(report.policy) if report.policy is not None else None,
    }


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    d = _load_diagram_file(args.input)
    rel = _relation(args, d)
    report = solve(d, rel, limits=_limits(args), seed=args.seed)
    doc = _report_doc(report)
    text = json.dumps(doc, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if not report.solved:
        print(f"unsolved: {report.failure_reason}", file=sys.stderr)
        return EXIT_LIMIT
    n = len(report.maximal_utilities)
    print(
        f"solved {args.input} mode={report.mode}: {n} maximal vector(s), "
        f"width {report.induced_width}, {report.wall_time:.3f}s",
        file=sys.stderr,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def _tradeoff_params(args, seed: int) -> TradeoffParams:
    return TradeoffParams(
        pairs=args.pairs,
        triplets=args.triplets,
        coeff_range=tuple(args.coeff_range),
        strength_range=tuple(args.strength_range) if args.strength_range else None,
        seed=seed,
    )


def cmd_generate(args) -> int:
    try:
        params = MoidParams.from_string(args.clazz, seed=args.seed)
        diagram = generate_moid(params)
    except InfeasibleParamsError as exc:
        raise CliError(str(exc)) from None
    out = Path(args.out)
    out.write_text(save_diagram(diagram) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(diagram.variables)} variables)", file=sys.stderr)
    if args.tradeoffs_out:
        theta = generate_tradeoffs(_tradeoff_params(args, args.seed), params.objectives)
        senses = tuple(s for _, s in diagram.objectives)
        Path(args.tradeoffs_out).write_text(save_tradeoffs(theta, senses) + "\n", encoding="utf-8")
        print(f"wrote {args.tradeoffs_out} ({len(theta)} tradeoff pairs)", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _class_instances(spec: str, count: int, seed: int):
    """Yield (label, diagram) pairs for a class spec or a fixture path."""
    try:
        params = MoidParams.from_string(spec)
    except (ValueError, InfeasibleParamsError):
        params = None
    if params is None:
        if not Path(spec).exists():
            raise CliError(f"--class {spec!r} is neither 'C,D,k,p,r,a,O' nor a diagram file")
        d = _load_diagram_file(spec)
        for _ in range(count):
            yield spec, d
        return
    for i in range(count):
        inst = MoidParams.from_string(spec, seed=seed + i)
        yield spec, generate_moid(inst)


def _lower_median(values):
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def _bench_rows(args):
    limits = _limits(args)
    epsilons = args.epsilon or [0.1]
    mode_cells = []
    for mode in args.mode:
        if mode == "epsilon":
            mode_cells.extend(("epsilon", eps) for eps in epsilons)
        else:
            mode_cells.append((mode, None))
    for spec in args.clazz:
        diagrams = list(_class_instances(spec, args.instances, args.seed))
        widths = [induced_width(d, legal_elimination_order(d)) for _, d in diagrams]
        for mode, eps in mode_cells:
            sizes, times = [], []
            solved = 0
            for i, (_label, d) in enumerate(diagrams):
                if mode == "pareto":
                    rel = PARETO
                elif mode == "epsilon":
                    rel = EpsilonCovering(eps)
                else:
                    if args.tradeoffs:
                        theta, _senses = load_tradeoffs(
                            Path(args.tradeoffs).read_text(encoding="utf-8")
                        )
                    else:
                        theta = generate_tradeoffs(
                            _tradeoff_params(args, args.seed + i), d.p
                        )
                    rel = TradeoffDominance(theta)
                report = solve(d, rel, limits=limits, seed=args.seed + i)
                if report.solved:
                    solved += 1
                    sizes.append(len(report.maximal_utilities))
                    times.append(report.wall_time)
            row = {
                "class": spec,
                "mode": mode,
                "epsilon": f"{eps:g}" if eps is not None else "",
                "w_star": f"{np.mean(widths):.6g}",
                "solved": solved,
                "time_s": f"{np.mean(times):.6g}" if times else "",
                "avg": f"{np.mean(sizes):.6g}" if sizes else "",
                "stdev": f"{np.std(sizes):.6g}" if sizes else "",
                "med": f"{_lower_median(sizes):.6g}" if sizes else "",
            }
            yield row


BENCH_COLUMNS = ["class", "mode", "epsilon", "w_star", "solved", "time_s", "avg", "stdev", "med"]


def cmd_bench(args) -> int:
    rows = list(_bench_rows(args))
    out = Path(args.out) if args.out else None
    if out:
        with out.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {out} ({len(rows)} rows)", file=sys.stderr)
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle-check
# ---------------------------------------------------------------------------


def _internal_set(d: InfluenceDiagram, utilities: UtilitySet) -> np.ndarray:
    return np.array([d.sense_signs * np.array(v.coords) for v in utilities])


def _as_set(rows: np.ndarray) -> UtilitySet:
    return UtilitySet(tuple(UtilityVector(tuple(r)) for r in rows))


def _check_instance(d: InfluenceDiagram, mode: str, eps: float, theta, seed: int, limits) -> str:
    """Returns 'pass', 'fail', or a 'skip (...)' explanation."""
    brute = brute_force_solve(d, PARETO)
    brute_rows = _internal_set(d, brute.utilities)
    if mode == "pareto":
        report = solve(d, PARETO, limits=limits, seed=seed)
        if not report.solved:
            return f"skip (unsolved: {report.failure_reason})"
        rows = _internal_set(d, report.maximal_utilities)
        ok = convex_set_dominates(_as_set(rows), _as_set(brute_rows)) and convex_set_dominates(
            _as_set(brute_rows), _as_set(rows)
        )
        return "pass" if ok else "fail"
    if mode == "epsilon":
        entries = [x for u in d.utilities for row in u.entries for x in row]
        if min(entries) <= 0:
            return "skip (utilities not strictly positive)"
        report = solve(d, EpsilonCovering(eps), limits=limits, seed=seed)
        if not report.solved:
            return f"skip (unsolved: {report.failure_reason})"
        rows = _internal_set(d, report.maximal_utilities)
        covered = all(
            ((1 + eps) * rows >= v - 1e-9).all(axis=1).any() for v in brute_rows
        )
        return "pass" if covered else "fail"
    if mode == "tradeoff":
        if theta is None:
            if d.p < 2:
                return "skip (tradeoffs need at least 2 objectives)"
            theta = generate_tradeoffs(TradeoffParams(pairs=1, triplets=0, seed=seed), d.p)
        rel = TradeoffDominance(theta)
        report = solve(d, rel, limits=limits, seed=seed)
        if not report.solved:
            return f"skip (unsolved: {report.failure_reason})"
        rows = _internal_set(d, report.maximal_utilities)
        oracle = brute_rows[maximal_indices_for(brute_rows, rel)]
        # Cone-equivalence: compare in the dual-ray coordinates, where cone
        # dominance is componentwise.
        rays = rel.rays(d.p)
        a, b = _as_set(rows @ rays.T), _as_set(oracle @ rays.T)
        ok = convex_set_dominates(a, b) and convex_set_dominates(b, a)
        return "pass" if ok else "fail"
    raise CliError(f"unknown mode {mode!r}")


def cmd_oracle_check(args) -> int:
    limits = _limits(args)
    eps = (args.epsilon or [0.1])[0]
    theta = None
    if args.tradeoffs:
        theta, _senses = load_tradeoffs(Path(args.tradeoffs).read_text(encoding="utf-8"))

    instances: list[tuple[str, InfluenceDiagram]] = []
    if args.input:
        instances.append((args.input, _load_diagram_file(args.input)))
    else:
        if not args.clazz:
            raise CliError("oracle-check needs --input FILE or --class C,D,k,p,r,a,O")
        for i in range(args.instances):
            params = MoidParams.from_string(args.clazz[0], seed=args.seed + i)
            instances.append((f"{args.clazz[0]}#{i}", generate_recall_moid(params)))

    passed = failed = skipped = 0
    for label, d in instances:
        for mode in args.mode:
            try:
                verdict = _check_instance(d, mode, eps, theta, args.seed, limits)
            except PolicyCountError as exc:
                verdict = f"skip (policy space too large: {exc.count})"
            print(f"{label} [{mode}]: {verdict}")
            if verdict == "pass":
                passed += 1
            elif verdict == "fail":
                failed += 1
            else:
                skipped += 1
    print(f"oracle-check: {passed} passed, {failed} failed, {skipped} skipped")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(sp):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--time-limit", type=float, default=None, help="seconds per solve")
    sp.add_argument("--memory-limit", type=int, default=None, help="bytes of live tables")


def _add_tradeoff_gen(sp):
    sp.add_argument("--pairs", type=int, default=1, help="pairwise tradeoffs K")
    sp.add_argument("--triplets", type=int, default=0, help="3-way tradeoffs T")
    sp.add_argument(
        "--coeff-range", type=float, nargs=2, default=[0.1, 1.0], metavar=("LO", "HI")
    )
    sp.add_argument(
        "--strength-range", type=float, nargs=2, default=None, metavar=("LO", "HI")
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moid",
        description="Multi-objective influence diagrams: solve, generate, bench, oracle-check.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve a diagram file")
    sp.add_argument("--input", required=True)
    sp.add_argument("--mode", choices=["pareto", "epsilon", "tradeoff"], default="pareto")
    sp.add_argument("--epsilon", type=float, action="append")
    sp.add_argument("--tradeoffs", help="tradeoff file (tradeoff mode)")
    sp.add_argument("--out", help="report file (default: stdout)")
    _add_common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("generate", help="generate a random diagram (and tradeoffs)")
    sp.add_argument("--class", dest="clazz", required=True, metavar="C,D,k,p,r,a,O")
    sp.add_argument("--out", required=True)
    sp.add_argument("--tradeoffs-out", help="also write a random tradeoff file")
    _add_tradeoff_gen(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("bench", help="benchmark classes and emit a CSV")
    sp.add_argument(
        "--class",
        dest="clazz",
        action="append",
        required=True,
        metavar="C,D,k,p,r,a,O",
        help="class parameters, or a diagram file path; repeatable",
    )
    sp.add_argument("--instances", type=int, default=10)
    sp.add_argument(
        "--mode",
        action="append",
        choices=["pareto", "epsilon", "tradeoff"],
        required=True,
        help="repeatable",
    )
    sp.add_argument("--epsilon", type=float, action="append", help="repeatable (epsilon mode)")
    sp.add_argument("--tradeoffs", help="fixed tradeoff file (tradeoff mode)")
    sp.add_argument("--out", help="CSV path (default: stdout)")
    _add_tradeoff_gen(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("oracle-check", help="compare the solver against brute force")
    sp.add_argument("--input", help="check one diagram file")
    sp.add_argument("--class", dest="clazz", action="append", metavar="C,D,k,p,r,a,O")
    sp.add_argument("--instances", type=int, default=10)
    sp.add_argument(
        "--mode",
        action="append",
        choices=["pareto", "epsilon", "tradeoff"],
        required=True,
    )
    sp.add_argument("--epsilon", type=float, action="append")
    sp.add_argument("--tradeoffs", help="fixed tradeoff file")
    _add_common(sp)
    sp.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (DiagramValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
