"""Constructive strategies for Paul and an exhaustive verifier for them.

A :class:`Policy` maps ``(state, rounds_remaining, memory)`` to a question.
``memory`` is any hashable per-branch bookkeeping the policy carries (the
two-lie policy keeps its set-aside coins there); it is updated after each
answer by ``advance``.  Because a policy's behaviour below a node depends
only on ``(rounds_remaining, state, memory)``, the verifier memoizes on that
triple and still accounts for every one of the 2^q answer sequences.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Optional, Sequence

from .closed_forms import (
    paul_wins_1lie_pathological,
    paul_wins_2lie_pathological,
    two_lie_deficit,
)
from .core import (
    GameSpec,
    QuestionVector,
    Response,
    StateVector,
    Variant,
    binom,
    binom_le,
    character,
    end_condition,
    format_vector,
    is_legal,
    no_state,
    sphere_bound,
    weight,
    weight_coefficients,
    yes_state,
)
from .errors import DomainError, StrategyInapplicable, UlamError, VerificationError
from .solver import Solver, default_solver

MAX_VERIFY_ROUNDS = 28
ENDGAME_ROUNDS = 6

Chooser = Callable[[tuple, int, Hashable], Sequence[int]]
Advancer = Callable[[Hashable, Response, tuple, int], Hashable]


@dataclass(frozen=True)
class Policy:
    name: str
    choose: Chooser
    advance: Optional[Advancer] = None
    memory: Hashable = None

    def move(self, state: Sequence[int], rounds_remaining: int, memory: Hashable = None) -> QuestionVector:
        return QuestionVector(self.choose(tuple(state), rounds_remaining, memory))

    def next_memory(self, memory: Hashable, response: Response, state: tuple, rounds_remaining: int) -> Hashable:
        if self.advance is None:
            return memory
        return self.advance(memory, response, state, rounds_remaining)


# -- verification ------------------------------------------------------------


@dataclass(frozen=True)
class _Summary:
    wins: int
    losses: int
    min_survivors: int
    max_survivors: int


@dataclass
class VerificationReport:
    variant: Variant
    rounds: int
    branches: int
    wins: int
    min_survivors: int
    max_survivors: int
    level_margins: dict[int, int]
    first_loss: Optional[str]
    failed_branches: list[str] = field(default_factory=list)
    distinct_nodes: int = 0

    @property
    def losses(self) -> int:
        return self.branches - self.wins

    @property
    def all_win(self) -> bool:
        return self.wins == self.branches

    def render(self) -> str:
        lines = [f"failed: {seq or '-'}" for seq in self.failed_branches]
        if self.losses > len(self.failed_branches):
            lines.append(f"failed_unlisted: {self.losses - len(self.failed_branches)}")
        lines += [
            f"variant: {self.variant}",
            f"rounds: {self.rounds}",
            f"branches: {self.branches}",
            f"wins: {self.wins}",
            f"losses: {self.losses}",
            f"min_survivors: {self.min_survivors}",
            f"max_survivors: {self.max_survivors}",
            f"distinct_nodes: {self.distinct_nodes}",
        ]
        for j in sorted(self.level_margins, reverse=True):
            lines.append(f"margin[{j}]: {self.level_margins[j]}")
        lines.append(f"first_loss: {self.first_loss if self.first_loss is not None else 'none'}")
        lines.append(f"{self.wins}/{self.branches} branches: {'win' if self.all_win else 'loss'}")
        return "\n".join(lines) + "\n"


def verify_policy(spec: GameSpec, policy: Policy, list_failures: int = 20) -> VerificationReport:
    """Replay ``policy`` against every answer sequence of ``spec``.

    Branch counts are exact (each leaf is weighted by the number of answer
    sequences reaching it).  ``margin[j]`` is the least slack seen at j rounds
    remaining: weight minus 2^j for the pathological game, 2^j minus weight
    for the original one.
    """
    if spec.rounds > MAX_VERIFY_ROUNDS:
        raise DomainError(f"verification is limited to q <= {MAX_VERIFY_ROUNDS}")
    variant = spec.variant
    q = spec.rounds
    memo: dict[tuple, _Summary] = {}
    edges: dict[tuple, tuple[tuple, tuple]] = {}
    margins: dict[int, int] = {}

    def visit(j: int, x: tuple, mem: Hashable) -> _Summary:
        key = (j, x, mem)
        found = memo.get(key)
        if found is not None:
            return found
        w = weight(j, x)
        slack = w - (1 << j) if variant is Variant.PATHOLOGICAL else (1 << j) - w
        if j not in margins or slack < margins[j]:
            margins[j] = slack
        if j == 0:
            total = sum(x)
            won = end_condition(variant, total)
            result = _Summary(int(won), int(not won), total, total)
        else:
            a = tuple(policy.choose(x, j, mem))
            if not is_legal(x, a):
                raise VerificationError(
                    f"round {q - j + 1}: policy {policy.name!r} asked "
                    f"{format_vector(a)} at state {format_vector(x)}"
                )
            n_state = no_state(x, a)
            y_state = yes_state(x, a)
            n_key = (j - 1, n_state, policy.next_memory(mem, Response.N, n_state, j - 1))
            y_key = (j - 1, y_state, policy.next_memory(mem, Response.Y, y_state, j - 1))
            left = visit(*n_key)
            right = visit(*y_key)
            edges[key] = (n_key, y_key)
            result = _Summary(
                left.wins + right.wins,
                left.losses + right.losses,
                min(left.min_survivors, right.min_survivors),
                max(left.max_survivors, right.max_survivors),
            )
        memo[key] = result
        return result

    root = (q, tuple(spec.initial), policy.memory)
    summary = visit(*root)
    failed = []
    if summary.losses:
        _collect_losses(root, "", memo, edges, failed, list_failures)
    return VerificationReport(
        variant=variant,
        rounds=q,
        branches=summary.wins + summary.losses,
        wins=summary.wins,
        min_survivors=summary.min_survivors,
        max_survivors=summary.max_survivors,
        level_margins=margins,
        first_loss=failed[0] if failed else None,
        failed_branches=failed,
        distinct_nodes=len(memo),
    )


def _collect_losses(key, prefix, memo, edges, out, limit) -> None:
    # N before Y: lexicographically least sequences come first
    if len(out) >= limit or memo[key].losses == 0:
        return
    if key not in edges:
        out.append(prefix)
        return
    n_key, y_key = edges[key]
    _collect_losses(n_key, prefix + "N", memo, edges, out, limit)
    _collect_losses(y_key, prefix + "Y", memo, edges, out, limit)


# -- general-k opening -------------------------------------------------------


def floor_ceiling_question(x: Sequence[int], rounds_remaining: int) -> QuestionVector:
    """Halve every class; odd classes alternate ceiling/floor from the lowest index.

    For j = rounds_remaining - 1 >= 2k - 1 the imbalance lies in [0, C(j, k)].
    """
    if rounds_remaining < 1:
        raise DomainError("no question is asked with zero rounds remaining")
    if not any(x):
        raise DomainError("the zero state has no floor-ceiling question")
    out = []
    take_ceiling = True
    for xi in x:
        if xi % 2 == 0:
            out.append(xi // 2)
        else:
            out.append((xi + 1) // 2 if take_ceiling else xi // 2)
            take_ceiling = not take_ceiling
    return QuestionVector(out)


def greedy_trim(x: Sequence[int], j: int) -> tuple[StateVector, StateVector]:
    """Drop coins, heaviest class first, until the j-weight is exactly 2^j.

    A coin is only dropped if the weight stays >= 2^j.  Pennies (weight 1)
    close the final gap, so the state needs enough of them; otherwise
    DomainError.  Returns ``(kept, removed)``.
    """
    target = 1 << j
    w = weight(j, x)
    if w < target:
        raise DomainError(f"weight {w} of {format_vector(x)} is already below 2^{j}")
    excess = w - target
    removed = []
    for xi, c in zip(x, weight_coefficients(j, len(x) - 1)):
        take = min(xi, excess // c)
        removed.append(take)
        excess -= take * c
    if excess:
        raise DomainError(f"{format_vector(x)} has too few pennies to land on 2^{j} exactly")
    kept = StateVector(xi - ri for xi, ri in zip(x, removed))
    return kept, StateVector(removed)


# -- one lie -----------------------------------------------------------------


def one_lie_move(x0: int, x1: int) -> QuestionVector:
    """Question keeping the character of both successors >= character - 1.

    The rule depends on the shape: no zero-lie elements, exactly one, an even
    number, or an odd number of at least three.  With two or more zero-lie
    elements the rule needs x1 >= x0 - 1.
    """
    q = character(x0, x1)
    if q is None:
        raise DomainError("the zero state has no move")
    if x0 >= 2 and x1 < x0 - 1:
        raise DomainError(f"one-lie move needs x1 >= x0 - 1, got ({x0}, {x1})")
    if x0 == 0:
        return QuestionVector((0, x1 // 2))
    if x0 == 1:
        return QuestionVector((1, (x1 + 1 - q) // 2))
    if x0 % 2 == 0:
        return QuestionVector((x0 // 2, x1 // 2))
    return QuestionVector(((x0 + 1) // 2, -((q - 1 - x1) // 2)))


def one_lie_full_policy(n: int, q: int) -> Policy:
    """Paul's winning policy for the pathological ((n,0), q, 1) game."""
    if not paul_wins_1lie_pathological(n, q):
        raise DomainError(f"Paul cannot win the one-lie game with n={n}, q={q}")

    def choose(x, rounds_remaining, _memory):
        if rounds_remaining == q:
            return (-(-x[0] // 2), 0)
        return one_lie_move(x[0], x[1])

    return Policy(f"one-lie(n={n}, q={q})", choose)


# -- two lies ----------------------------------------------------------------


@dataclass(frozen=True)
class OpeningCase:
    """The first two questions for the two-lie game with ``n = 4p + r``, ``q - 2 = 4l + s``."""

    n: int
    q: int
    p: int
    r: int
    l: int
    s: int
    a: tuple[int, int, int]
    b_yes: tuple[int, int, int]
    b_no: tuple[int, int, int]

    @property
    def start(self) -> tuple[int, int, int]:
        return (self.n, 0, 0)

    def after_first(self) -> dict[str, tuple[int, ...]]:
        return {"Y": yes_state(self.start, self.a), "N": no_state(self.start, self.a)}

    def legal(self) -> bool:
        first = self.after_first()
        return (
            is_legal(self.start, self.a)
            and is_legal(first["Y"], self.b_yes)
            and is_legal(first["N"], self.b_no)
        )

    def leaves(self) -> dict[str, tuple[int, ...]]:
        first = self.after_first()
        out = {}
        for r1, b in (("Y", self.b_yes), ("N", self.b_no)):
            out[r1 + "Y"] = yes_state(first[r1], b)
            out[r1 + "N"] = no_state(first[r1], b)
        return out

    def realized_delta(self) -> int:
        """Four times the lightest (q-2)-weight after two rounds, minus the initial q-weight."""
        lightest = min(weight(self.q - 2, s) for s in self.leaves().values())
        return 4 * lightest - weight(self.q, self.start)

    def min_pennies(self) -> int:
        return min(s[2] for s in self.leaves().values())


def two_lie_opening(n: int, q: int, check: bool = True) -> OpeningCase:
    """Opening questions ``(a, b^Y, b^N)`` for the pathological ((n,0,0), q, 2) game.

    With ``check`` (default) the parameters must satisfy q >= 19 and n at
    least the sphere bound, and the two-round expansion is verified: all
    questions legal, worst-case imbalance equal to minus the two-lie
    deficit, and enough pennies left for the later rounds.
    """
    if q < 2:
        raise DomainError("the opening needs at least two rounds")
    if check and (q < 19 or n < sphere_bound(q, 2)):
        raise DomainError(f"opening requires q >= 19 and n >= {sphere_bound(q, 2)} (got n={n}, q={q})")
    p, r = divmod(n, 4)
    l, s = divmod(q - 2, 4)
    if r == 0:
        a = (2 * p, 0, 0)
        b_yes = b_no = (p, p, 0)
    elif r == 1:
        a = (2 * p + 1, 0, 0)
        b_yes = (p + 1, p, 0)
        if (q - 2) % 2:
            b_no = (p, p + 1, 0)
        else:
            b_no = (p + 1, p - (q - 2) // 2 + 1, 0)
    elif r == 2:
        a = (2 * p + 1, 0, 0)
        b_yes = b_no = (p + 1, p - l + 1, 0) if s == 0 else (p, p + l + 1, 0)
    else:
        a = (2 * p + 2, 0, 0)
        b_yes = (p + 1, p + 1, 0)
        b_no = {
            0: (p, p + l + 1, 0),
            1: (p, p + l + 1, 0),
            2: (p + 1, p - l + 1, 0),
            3: (p, p + l + 2, 0),
        }[s]
    case = OpeningCase(n, q, p, r, l, s, a, b_yes, b_no)
    if check:
        if not case.legal():
            raise StrategyInapplicable(f"opening questions for n={n}, q={q} are not legal")
        if case.realized_delta() != -two_lie_deficit(n, q):
            raise StrategyInapplicable(
                f"opening for n={n}, q={q} realizes {case.realized_delta()}, "
                f"expected {-two_lie_deficit(n, q)}"
            )
        need = (q - 2) ** 2 + binom_le(q - 2, 2)
        if case.min_pennies() < need:
            raise StrategyInapplicable(f"opening leaves {case.min_pennies()} pennies, need {need}")
    return case


def fictitious_play_move(p: Sequence[int], rounds_remaining: int, simulation: bool = False) -> QuestionVector:
    """Exactly weight-halving question for a two-lie state of weight 2^rounds_remaining.

    Zero-lie and one-lie coins are split by parity of ``p_0``; the penny
    count is then the unique value making the imbalance zero.  Outside
    ``simulation`` the penny count must be a legal entry.
    """
    if len(p) != 3:
        raise DomainError("fictitious play is defined for two lies")
    if rounds_remaining < 1:
        raise DomainError("no question is asked with zero rounds remaining")
    if weight(rounds_remaining, p) != 1 << rounds_remaining:
        raise DomainError(f"state {format_vector(p)} does not have weight 2^{rounds_remaining}")
    j = rounds_remaining - 1
    p0, p1, p2 = p
    if p0 % 2:
        v0, v1 = (p0 + 1) // 2, p1 // 2
    else:
        v0, v1 = p0 // 2, -(-p1 // 2)
    rest = (2 * v0 - p0) * binom(j, 2) + (2 * v1 - p1) * j
    if (p2 - rest) % 2:
        raise StrategyInapplicable(f"no integral penny split balances {format_vector(p)} at j={j}")
    v2 = (p2 - rest) // 2
    if not simulation and not 0 <= v2 <= p2:
        raise StrategyInapplicable(f"penny split {v2} illegal for {format_vector(p)} at j={j}")
    return QuestionVector((v0, v1, v2))


def two_lie_full_policy(n: int, q: int, solver: Optional[Solver] = None) -> Policy:
    """Paul's winning policy for the pathological ((n,0,0), q, 2) game, q >= 25.

    Two opening rounds, then surplus coins are set aside (never placed in a
    question, so they can only help), fictitious play while more than six
    rounds remain, and exact-solver moves for the last six.
    """
    if q < 25:
        raise DomainError("the constructive two-lie policy needs q >= 25; use the exact solver")
    if not paul_wins_2lie_pathological(n, q):
        raise DomainError(f"Paul cannot win the two-lie game with n={n}, q={q}")
    engine = solver or default_solver()
    opening = two_lie_opening(n, q)
    first = opening.after_first()
    pennies_needed = (q - 2) ** 2

    def choose(x, rounds_remaining, shadow):
        if rounds_remaining == q:
            return opening.a
        if rounds_remaining == q - 1:
            if x == first["Y"]:
                return opening.b_yes
            if x == first["N"]:
                return opening.b_no
            raise StrategyInapplicable(f"unexpected state {format_vector(x)} in round 2")
        virtual = tuple(xi - si for xi, si in zip(x, shadow))
        if rounds_remaining > ENDGAME_ROUNDS:
            return fictitious_play_move(virtual, rounds_remaining)
        a = engine.best_question(Variant.PATHOLOGICAL, virtual, rounds_remaining)
        if a is None:
            raise StrategyInapplicable(f"endgame state {format_vector(virtual)} is lost")
        return a

    def advance(shadow, response, state, rounds_remaining):
        if rounds_remaining == q - 2:
            kept, removed = greedy_trim(state, q - 2)
            if kept[2] < pennies_needed and any(kept[:2]):
                raise StrategyInapplicable(f"only {kept[2]} pennies after trimming {format_vector(state)}")
            return tuple(removed)
        if shadow is None:
            return None
        if response is Response.Y:
            return (0,) + shadow[:-1]
        return shadow

    return Policy(f"two-lie(n={n}, q={q})", choose, advance)


# -- fictitious play analysis ------------------------------------------------

ALLOWED_ENDGAME_STATES = frozenset(
    {
        (1, 3, 21), (1, 2, 28), (1, 1, 35), (1, 0, 42),
        (0, 8, 8), (0, 7, 15), (0, 6, 22), (0, 5, 29), (0, 4, 36),
        (0, 3, 43), (0, 2, 50), (0, 1, 57), (0, 0, 64),
    }
)
EXCLUDED_ENDGAME_STATES = frozenset({(1, 5, 7), (1, 4, 14)})


def stated_e2_limit(j: int) -> int:
    return binom(j, 2) + 5


def inductive_e2_limit(j: int) -> int:
    """Bound that actually closes the per-round recursion e(j) <= e(j+1)/2 + C(j,2)/2 + 2."""
    return binom(j, 2) + j + 5


class TraceError(UlamError):
    def __init__(self, message: str, trace: "FictitiousTrace"):
        super().__init__(message)
        self.trace = trace


def perfect_play(x: Sequence[int], q: int, j: int) -> tuple[Fraction, Fraction, Fraction]:
    """Exact-halving reference state with j rounds left, in closed form."""
    m = q - j
    scale = Fraction(1, 2**m)
    x0, x1, x2 = x
    return (
        x0 * scale,
        (x1 + x0 * m) * scale,
        (x2 + x1 * m + x0 * binom(m, 2)) * scale,
    )


def perfect_play_iterated(x: Sequence[int], q: int, j: int) -> tuple[Fraction, Fraction, Fraction]:
    state = tuple(Fraction(v) for v in x)
    for _ in range(q - j):
        state = (state[0] / 2, (state[0] + state[1]) / 2, (state[1] + state[2]) / 2)
    return state


@dataclass
class FictitiousLevel:
    j: int
    perfect: tuple[Fraction, Fraction, Fraction]
    states: frozenset
    max_e0: Fraction
    max_e1: Fraction
    max_e2: Fraction
    max_e01: Fraction


@dataclass
class FictitiousTrace:
    initial: tuple[int, int, int]
    q: int
    levels: list[FictitiousLevel]
    branches: int
    sampled: bool
    problems: list[str] = field(default_factory=list)

    @property
    def endgame_states(self) -> frozenset:
        return self.levels[-1].states


def fictitious_simulation(
    x: Sequence[int],
    q: int,
    samples: Optional[int] = None,
    seed: int = 0,
    stop: int = ENDGAME_ROUNDS,
    e2_limit: Callable[[int], int] = stated_e2_limit,
) -> FictitiousTrace:
    """Run fictitious play from ``x`` down to ``stop`` rounds remaining.

    Without ``samples`` every answer sequence is followed (distinct states
    are propagated level by level, which covers all 2^(q-stop) sequences);
    with ``samples`` that many random sequences are drawn.  Every recorded
    state is checked against the weight-halving identity, the deviation
    bounds from perfect play, and the endgame claims.  All checks run to
    completion; any violation then raises TraceError carrying the full trace
    (``trace.problems`` lists every violation, the message names the first).
    """
    x = tuple(x)
    if len(x) != 3:
        raise DomainError("fictitious play is defined for two lies")
    if q < 23 or weight(q, x) != 1 << q or x[2] < q * q:
        raise DomainError("fictitious simulation needs q >= 23, weight 2^q and at least q^2 pennies")
    moves: dict[tuple, tuple] = {}

    def successors(state, j):
        v = moves.get((state, j))
        if v is None:
            v = moves[(state, j)] = tuple(fictitious_play_move(state, j, simulation=True))
        return yes_state(state, v), no_state(state, v)

    per_level: dict[int, set] = {q: {x}}
    if samples is None:
        frontier = {x}
        for j in range(q, stop, -1):
            nxt = set()
            for state in frontier:
                nxt.update(successors(state, j))
            per_level[j - 1] = nxt
            frontier = nxt
        branches = 2 ** (q - stop)
    else:
        rng = random.Random(seed)
        for j in range(q - 1, stop - 1, -1):
            per_level[j] = set()
        for _ in range(samples):
            state = x
            for j in range(q, stop, -1):
                y, n = successors(state, j)
                state = y if rng.getrandbits(1) else n
                per_level[j - 1].add(state)
        branches = samples

    trace = FictitiousTrace(x, q, [], branches, samples is not None)
    problems = []
    for j in range(q, stop - 1, -1):
        pp = perfect_play(x, q, j)
        states = per_level[j]
        e0 = max(abs(pp[0] - s[0]) for s in states)
        e1 = max(abs(pp[1] - s[1]) for s in states)
        e2 = max(abs(pp[2] - s[2]) for s in states)
        e01 = max(abs(pp[0] + pp[1] - s[0] - s[1]) for s in states)
        trace.levels.append(FictitiousLevel(j, pp, frozenset(states), e0, e1, e2, e01))
        for s in states:
            if weight(j, s) != 1 << j:
                problems.append(f"weight of {s} at j={j} is not 2^{j}")
            if s[0] < 0 or s[1] < 0:
                problems.append(f"negative low-lie count in {s} at j={j}")
            if s[2] <= 1:
                problems.append(f"pennies fell to {s[2]} at j={j}")
        if e0 > 1 or e1 > 3 or e2 > e2_limit(j) or e01 >= 2:
            problems.append(f"deviation bound broken at j={j}: e0={e0}, e1={e1}, e2={e2}, e01={e01}")
    if stop == ENDGAME_ROUNDS:
        for s in sorted(per_level[stop]):
            if s[0] > 1:
                problems.append(f"endgame state {s} has more than one zero-lie element")
            elif s in EXCLUDED_ENDGAME_STATES:
                problems.append(f"endgame state {s} is one of the excluded states")
            elif s not in ALLOWED_ENDGAME_STATES:
                problems.append(f"endgame state {s} is not in the allowed list")
    trace.problems = problems
    if problems:
        raise TraceError(problems[0], trace)
    return trace


def iter_admissible_states(q: int, count: int, seed: int = 0) -> Iterable[tuple[int, int, int]]:
    """Random integer states with q-weight 2^q and at least q^2 pennies."""
    rng = random.Random(seed)
    c0, c1, _ = weight_coefficients(q, 2)
    budget = (1 << q) - q * q
    for _ in range(count):
        x0 = rng.randint(0, budget // c0)
        x1 = rng.randint(0, (budget - x0 * c0) // c1)
        yield (x0, x1, (1 << q) - x0 * c0 - x1 * c1)
