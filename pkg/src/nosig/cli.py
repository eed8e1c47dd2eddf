"""``nosig`` command-line front end.

Exit codes: 0 success or yes-instance, 1 negative result (no-instance, or a
strategy that fails ``check``), 2 bad input, 3 internal invariant violation.

Numeric libraries are imported lazily so ``NOSIG_THREADS`` can cap worker
threads before they start.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3

_THREAD_VARS = ("NUMBA_NUM_THREADS", "OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _apply_thread_cap() -> None:
    n = os.environ.get("NOSIG_THREADS")
    if n:
        for var in _THREAD_VARS:
            os.environ.setdefault(var, n)


def _parse_dims(text: str):
    from nosig.game import SpaceDims

    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        values = [int(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"dims must be integers: {text!r}") from exc
    if len(values) == 1:
        return SpaceDims.uniform(values[0])
    if len(values) != 8:
        raise argparse.ArgumentTypeError("dims takes one integer or eight (s0 s1 t0 t1 a0 a1 b0 b1)")
    return SpaceDims.from_list(values)


def _write_or_print(text: str, out) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _strategy_file(side, matrix, qdims, adims, with_witnesses=True, witnesses=None):
    from nosig.io import StrategyFile
    from nosig.nosignaling import check_no_signaling

    if with_witnesses and witnesses is None:
        _, witnesses = check_no_signaling(matrix, qdims, adims)
    return StrategyFile(side, tuple(qdims), tuple(adims), matrix, witnesses)


def cmd_solve(args) -> int:
    from nosig import io
    from nosig.game import build_verifier
    from nosig.mwum import SolverConfig, solve_equilibrium

    V = build_verifier(io.read_game(args.game))
    config = SolverConfig(
        delta=args.delta, oracle=args.oracle, certify=args.certify,
        record_trace=args.trace, seed=args.seed, early_exit=args.early_exit,
    )
    result = solve_equilibrium(V, config)
    d = V.dims
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_strategy(_strategy_file("alice", result.alice, d.alice_questions, d.alice_answers), out / "alice.json")
    io.write_strategy(_strategy_file("bob", result.bob, d.bob_questions, d.bob_answers), out / "bob.json")
    A, A0, A1 = result.alice_triple
    io.write_strategy(
        _strategy_file("alice", A, d.alice_questions, d.alice_answers, witnesses=(A0, A1)),
        out / "alice_triple.json",
    )

    doc = {
        "game": str(args.game),
        "delta": io.format_float(args.delta),
        "oracle": args.oracle,
        "seed": args.seed,
        "epsilon": io.format_float(config.learning_rate),
        "iterations_planned": result.iterations_planned,
        "iterations": result.iterations_run,
        "value_estimate": io.format_float(result.value_estimate),
        "loss_bound_violations": result.loss_bound_violations,
    }
    summary = [f"value_estimate={doc['value_estimate']}", f"iterations={result.iterations_run}"]
    if args.certify:
        doc["lambda"] = io.format_rational(result.lambda_value)
        for side in ("alice", "bob"):
            gap = getattr(result, f"certified_gap_{side}")
            doc[f"certified_gap_{side}"] = io.format_float(gap)
            doc[f"certified_gap_{side}_exact"] = io.format_rational(gap)
        summary += [f"lambda={doc['lambda']}", f"gap_alice={doc['certified_gap_alice']}",
                    f"gap_bob={doc['certified_gap_bob']}"]
    if args.trace:
        with open(out / "trace.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "objective"])
            for t, v in enumerate(result.trace):
                writer.writerow([t, io.format_float(v)])
    (out / "result.json").write_text(io.dumps(doc))
    print(" ".join(summary))
    return EXIT_OK


def cmd_exact(args) -> int:
    from nosig import io
    from nosig.exact.oracle import lambda_exact
    from nosig.game import build_verifier

    V = build_verifier(io.read_game(args.game))
    lam, A_star, B_star = lambda_exact(V)
    if args.out is not None:
        d = V.dims
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        io.write_strategy(_strategy_file("alice", A_star, d.alice_questions, d.alice_answers), out / "alice.json")
        io.write_strategy(_strategy_file("bob", B_star, d.bob_questions, d.bob_answers), out / "bob.json")
    print(io.format_rational(lam))
    return EXIT_OK


def cmd_check(args) -> int:
    from nosig import io
    from nosig.nosignaling import check_no_signaling

    sf = io.read_strategy(args.strategy)
    tol = args.tol if args.tol is not None else (0 if sf.exact else 1e-9)
    violation, _ = check_no_signaling(sf.matrix, sf.qdims, sf.adims, tol=tol)
    print(io.format_entry(violation))
    return EXIT_OK if violation <= tol else EXIT_NEGATIVE


def cmd_round(args) -> int:
    from nosig import io
    from nosig.nosignaling import round_to_no_signaling

    sf = io.read_strategy(args.strategy)
    if sf.witnesses is None:
        raise io.ParseError(f"{args.strategy}: rounding needs 'witnesses'")
    A_ns = round_to_no_signaling(sf.matrix, *sf.witnesses, sf.qdims, sf.adims)
    rounded = io.StrategyFile(sf.side, sf.qdims, sf.adims, A_ns, sf.witnesses)
    _write_or_print(io.dumps(io.strategy_to_dict(rounded)), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    from nosig import io
    from nosig.generators import generate

    spec = generate(args.kind, seed=args.seed, dims=args.dims)
    _write_or_print(io.dumps(io.game_to_dict(spec)), args.out)
    return EXIT_OK


def cmd_decide(args) -> int:
    from nosig import io
    from nosig.game import build_verifier
    from nosig.mwum import SolverConfig, decide

    V = build_verifier(io.read_game(args.game))
    delta = (args.completeness - args.soundness) / 3
    config = SolverConfig(delta=delta, oracle=args.oracle) if delta > 0 else None
    verdict, result = decide(V, args.completeness, args.soundness, config)
    print(f"{verdict} value_estimate={io.format_float(result.value_estimate)}")
    return EXIT_OK if verdict == "yes-instance" else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    from nosig.generators import KINDS
    from nosig.mwum import ORACLES

    parser = argparse.ArgumentParser(prog="nosig", description="No-signaling competing-team game solver.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="approximate equilibrium by penalized multiplicative weights")
    p.add_argument("game", type=Path)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--oracle", choices=ORACLES, default="exact-lp")
    p.add_argument("--certify", action="store_true", help="compute exact optimality gaps")
    p.add_argument("--trace", action="store_true", help="write per-iteration objective to trace.csv")
    p.add_argument("--seed", type=int, default=0, help="recorded in the result; the solver is deterministic")
    p.add_argument("--early-exit", action="store_true")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exact", help="exact equilibrium value by rational LP")
    p.add_argument("game", type=Path)
    p.add_argument("--out", type=Path, help="directory for optimal strategy files")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("check", help="no-signaling violation of a strategy file")
    p.add_argument("strategy", type=Path)
    p.add_argument("--tol", type=float, help="default 0 for exact files, 1e-9 for float files")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("round", help="round a strategy with witnesses to a no-signaling one")
    p.add_argument("strategy", type=Path)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("gen", help="write a generated game file")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", type=_parse_dims, help="one integer for all eight dims, or eight integers")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser(
        "decide",
        help="threshold decision on the rejection value",
        description=(
            "Game entries are rejection payouts. A yes-instance has rejection value at most 1-c, "
            "a no-instance at least 1-s. The solver runs at accuracy (c-s)/3 and answers "
            "yes-instance iff its estimate is below 1-(c+s)/2."
        ),
    )
    p.add_argument("game", type=Path)
    p.add_argument("-c", "--completeness", type=float, required=True)
    p.add_argument("-s", "--soundness", type=float, required=True)
    p.add_argument("--oracle", choices=ORACLES, default="exact-lp")
    p.set_defaults(func=cmd_decide)
    return parser


def run(argv=None) -> int:
    _apply_thread_cap()
    from nosig.errors import InvariantViolation, NosigError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"nosig: invariant violation {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (NosigError, ValueError, OSError) as exc:
        print(f"nosig: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())
