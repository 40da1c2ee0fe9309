"""Command-line front end.

Exit codes: 0 success, 1 verification or validation failure, 2 bad flags,
3 budget or capacity exceeded, 4 policy refused, 5 no winning strategy.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from . import closed_forms
from .core import GameSpec, QuestionVector, Response, StateVector, Variant, sphere_bound, transition, weight
from .errors import BudgetExceeded, CapacityError, DomainError, FormatError, StrategyInapplicable, VerificationError
from .quasiball import parse_collection, serialize_collection, strategy_to_covering, validate_collection
from .solver import DEFAULT_BUDGET, Solver, Winner, question_candidates
from .strategy import one_lie_full_policy, two_lie_full_policy, verify_policy

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_REFUSED = 4
EXIT_NO_STRATEGY = 5
DEFAULT_SEED = 20240601


class PlaySession:
    """Engine-Paul against a human Carole, one answer at a time.

    Paul asks a winning question when one exists; from a lost position he
    asks the most balanced question.
    """

    def __init__(self, spec: GameSpec, solver: Solver):
        self.spec = spec
        self.solver = solver
        self.state = spec.initial
        self.remaining = spec.rounds
        self.history: list[str] = []
        self.question: Optional[QuestionVector] = None
        if not self.finished:
            self.question = self._pick()

    @property
    def finished(self) -> bool:
        return self.remaining == 0

    @property
    def paul_wins(self) -> bool:
        return self.spec.paul_wins_at_end(self.state.total)

    def _pick(self) -> QuestionVector:
        best = self.solver.best_question(self.spec.variant, self.state, self.remaining)
        if best is not None:
            return best
        return question_candidates(self.state, self.remaining)[0]

    def answer(self, response: Response) -> StateVector:
        if self.finished:
            raise DomainError("the game is over")
        self.state = transition(self.state, self.question, response)
        self.remaining -= 1
        self.history.append(response.value)
        self.question = None if self.finished else self._pick()
        return self.state

    def hint(self) -> str:
        w = weight(self.remaining, self.state)
        return f"weight: {w} vs 2^{self.remaining} = {1 << self.remaining}"


def run_play(spec: GameSpec, solver: Solver, stdin: TextIO, stdout: TextIO) -> int:
    session = PlaySession(spec, solver)
    print(f"state: {session.state}", file=stdout)
    while not session.finished:
        round_no = spec.rounds - session.remaining + 1
        print(f"round {round_no}: question {session.question}", file=stdout)
        while True:
            stdout.write("answer (Y/N/hint)> ")
            stdout.flush()
            line = stdin.readline()
            if not line:
                print("\nCarole resigns", file=stdout)
                print("Paul wins", file=stdout)
                return EXIT_OK
            text = line.strip().upper()
            if text == "HINT":
                print(session.hint(), file=stdout)
            elif text in ("Y", "N"):
                break
            else:
                print("please answer Y, N or hint", file=stdout)
        session.answer(Response(text))
        print(f"state: {session.state}", file=stdout)
    print(f"survivors: {session.state.total}", file=stdout)
    print("Paul wins" if session.paul_wins else "Carole wins", file=stdout)
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def _nonneg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {value}")
    return value


def _positive(text: str) -> int:
    value = _nonneg(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _add_game_flags(p: argparse.ArgumentParser, variant: bool = True) -> None:
    if variant:
        p.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.PATHOLOGICAL.value)
    p.add_argument("--lies", type=_nonneg, required=True)
    p.add_argument("--state", required=True, help="x0,x1,...,xk")
    p.add_argument("--rounds", type=_nonneg, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ulam", description="Exact and constructive tools for liar games.")
    parser.add_argument("--threads", type=_positive, default=1, help="worker threads (ULAM_THREADS overrides)")
    parser.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET, help="solver question budget")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--cache", type=Path, help="memo file loaded before and saved after the command")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="decide a game exactly")
    _add_game_flags(p)
    p.add_argument("--tree", type=Path, help="write Paul's strategy tree here")

    p = sub.add_parser("table", help="threshold table by formula and/or exact solver")
    p.add_argument("--lies", type=_nonneg, required=True)
    p.add_argument("--max-rounds", type=_nonneg, required=True)
    p.add_argument("--mode", choices=["formula", "dp", "both"], default="formula")

    p = sub.add_parser("verify-policy", help="replay a constructive policy on every branch")
    p.add_argument("--kind", choices=["one-lie", "two-lie"], required=True)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--rounds", type=_nonneg, required=True)
    p.add_argument("--list-failures", type=_nonneg, default=20)

    p = sub.add_parser("cover", help="write a covering or packing certificate from a solved game")
    _add_game_flags(p)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("check-cover", help="validate a certificate file")
    p.add_argument("path", type=Path)

    p = sub.add_parser("play", help="play Carole against the engine")
    _add_game_flags(p)

    p = sub.add_parser("cache", help="dump or load the solver memo")
    p.add_argument("action", choices=["dump", "load"])
    p.add_argument("path", type=Path)
    return parser


def _thread_count(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    env = os.environ.get("ULAM_THREADS")
    if env is None:
        return args.threads
    try:
        value = int(env)
    except ValueError:
        value = 0
    if value < 1:
        parser.error(f"ULAM_THREADS must be a positive integer, got {env!r}")
    return value


def _game_spec(args: argparse.Namespace, parser: argparse.ArgumentParser) -> GameSpec:
    try:
        state = StateVector.parse(args.state)
    except ValueError as exc:
        parser.error(f"--state: {exc}")
    if state.k != args.lies:
        parser.error(f"--state {state} has {state.k + 1} entries but --lies is {args.lies}")
    variant = Variant(getattr(args, "variant", Variant.PATHOLOGICAL.value))
    return GameSpec(variant, state, args.rounds, args.lies)


# -- commands ----------------------------------------------------------------


def cmd_solve(args, parser, solver: Solver, out: TextIO) -> int:
    spec = _game_spec(args, parser)
    outcome = solver.solve(spec, want_tree=args.tree is not None)
    print(f"winner: {outcome.winner}", file=out)
    print(f"variant: {spec.variant}", file=out)
    print(f"state: {spec.initial}", file=out)
    print(f"rounds: {spec.rounds}", file=out)
    print(f"weight: {weight(spec.rounds, spec.initial)}", file=out)
    print(f"threshold: {1 << spec.rounds}", file=out)
    print(f"visited: {outcome.stats.visited}", file=out)
    print(f"memo_hits: {outcome.stats.memo_hits}", file=out)
    print(f"memo_size: {solver.memo_size}", file=out)
    if args.tree is not None:
        if outcome.strategy is None:
            print("tree: none (Carole wins)", file=out)
        else:
            args.tree.write_text(outcome.strategy.render())
            print(f"tree: {args.tree}", file=out)
    return EXIT_OK


def cmd_table(args, parser, solver: Solver, out: TextIO) -> int:
    k = args.lies
    if args.mode != "dp" and k not in (1, 2):
        parser.error("formula mode needs --lies 1 or 2")
    use_formula = args.mode in ("formula", "both")
    use_dp = args.mode in ("dp", "both")
    columns = ["q"] + (["formula"] if use_formula else []) + (["dp"] if use_dp else []) + ["sphere_bound", "gap"]
    print("# " + " ".join(columns), file=out)
    status = EXIT_OK
    for q in range(1, args.max_rounds + 1):
        row = [str(q)]
        value = None
        if use_formula:
            value = closed_forms.f_star_formula(q, k)
            row.append(str(value))
        if use_dp:
            try:
                exact = solver.f_star(q, k)
            except (BudgetExceeded, CapacityError):
                row.append("skipped")
            else:
                row.append(str(exact))
                if value is not None and exact != value:
                    print(f"error: q={q} formula {value} != dp {exact}", file=out)
                    status = EXIT_FAILED
                value = exact
        sb = sphere_bound(q, k)
        row += [str(sb), str(value - sb) if value is not None else "skipped"]
        print(" ".join(row), file=out)
    return status


def cmd_verify_policy(args, parser, solver: Solver, out: TextIO) -> int:
    try:
        if args.kind == "one-lie":
            policy = one_lie_full_policy(args.n, args.rounds)
            spec = GameSpec.pathological((args.n, 0), args.rounds)
        else:
            policy = two_lie_full_policy(args.n, args.rounds, solver)
            spec = GameSpec.pathological((args.n, 0, 0), args.rounds)
        report = verify_policy(spec, policy, args.list_failures)
    except (DomainError, StrategyInapplicable) as exc:
        print(f"refused: {exc}", file=out)
        return EXIT_REFUSED
    except VerificationError as exc:
        print(f"illegal move: {exc}", file=out)
        return EXIT_FAILED
    out.write(report.render())
    return EXIT_OK if report.all_win else EXIT_FAILED


def cmd_cover(args, parser, solver: Solver, out: TextIO) -> int:
    spec = _game_spec(args, parser)
    outcome = solver.solve(spec, want_tree=True)
    if outcome.winner is Winner.CAROLE:
        print("no winning strategy exists", file=out)
        return EXIT_NO_STRATEGY
    coll = strategy_to_covering(outcome.strategy, spec)
    report = validate_collection(coll, args.seed)
    text = serialize_collection(coll)
    if args.out is not None:
        args.out.write_text(text)
        print(f"certificate: {args.out}", file=out)
    else:
        out.write(text)
    out.write(report.render())
    return EXIT_OK if report else EXIT_FAILED


def cmd_check_cover(args, parser, solver: Solver, out: TextIO) -> int:
    try:
        coll = parse_collection(args.path.read_text())
        report = validate_collection(coll, args.seed)
    except OSError as exc:
        parser.error(f"cannot read {args.path}: {exc}")
    except FormatError as exc:
        print(f"status: fail\nreason: {exc}", file=out)
        return EXIT_FAILED
    out.write(report.render())
    return EXIT_OK if report else EXIT_FAILED


def cmd_play(args, parser, solver: Solver, out: TextIO, stdin: TextIO) -> int:
    return run_play(_game_spec(args, parser), solver, stdin, out)


def cmd_cache(args, parser, solver: Solver, out: TextIO) -> int:
    if args.action == "dump":
        with open(args.path, "w") as fh:
            count = solver.dump_memo(fh)
        print(f"entries: {count}", file=out)
        return EXIT_OK
    try:
        with open(args.path) as fh:
            count = solver.load_memo(fh)
    except OSError as exc:
        parser.error(f"cannot read {args.path}: {exc}")
    except FormatError as exc:
        print(f"status: fail\nreason: {exc}", file=out)
        return EXIT_FAILED
    print(f"entries: {count}", file=out)
    print(f"memo_size: {solver.memo_size}", file=out)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "table": cmd_table,
    "verify-policy": cmd_verify_policy,
    "cover": cmd_cover,
    "check-cover": cmd_check_cover,
    "cache": cmd_cache,
}


def main(argv: Optional[Sequence[str]] = None, stdin: TextIO = None, stdout: TextIO = None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        solver = Solver(budget=args.budget, threads=_thread_count(args, parser))
        if args.cache is not None and args.cache.exists():
            with open(args.cache) as fh:
                solver.load_memo(fh)
        if args.command == "play":
            status = cmd_play(args, parser, solver, stdout, stdin)
        else:
            status = COMMANDS[args.command](args, parser, solver, stdout)
        if args.cache is not None:
            with open(args.cache, "w") as fh:
                solver.dump_memo(fh)
        return status
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (BudgetExceeded, CapacityError) as exc:
        print(f"error: {exc}", file=stdout)
        return EXIT_BUDGET
    except FormatError as exc:
        print(f"error: {exc}", file=stdout)
        return EXIT_FAILED

