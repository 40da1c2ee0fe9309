"""Exact minimax evaluation of the pathological and original liar games.

Paul wins position ``(x, j)`` iff some legal question leaves him winning after
either answer.  Positions depend only on the count vector, so a memo keyed by
``(variant, rounds_remaining, counts)`` makes the recursion a dynamic program.

Two exact cuts keep the search small:

* pathological: a state of j-weight below 2^j is lost for Paul (Carole
  always takes the lighter successor), so only questions whose lighter
  successor keeps weight >= 2^(j-1) are tried;
* original: dually, a j-weight above 2^j is lost for Paul, so only questions
  whose heavier successor stays <= 2^(j-1) are tried.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterator, Optional, Sequence

from .core import (
    MAX_ROUNDS,
    GameSpec,
    QuestionVector,
    StateVector,
    Variant,
    end_condition,
    format_vector,
    imbalance_coefficients,
    no_state,
    sphere_bound,
    binom_le,
    weight,
    yes_state,
)
from .errors import BudgetExceeded, CapacityError, DomainError, FormatError

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**9


class Winner(enum.Enum):
    PAUL = "Paul"
    CAROLE = "Carole"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, eq=False)
class TreeNode:
    """One node of a strategy tree; leaves carry no question."""

    state: StateVector
    question: Optional[QuestionVector] = None
    no: Optional["TreeNode"] = None
    yes: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.question is None

    def child(self, response: str) -> "TreeNode":
        if self.is_leaf:
            raise DomainError("leaf nodes have no children")
        return self.yes if response == "Y" else self.no


@dataclass(frozen=True)
class DecisionTree:
    """A full binary strategy tree of depth ``depth``.

    Subtrees for equal ``(rounds_remaining, state)`` are shared, so the
    object is a DAG in memory even though it denotes 2^depth leaves.
    """

    root: TreeNode
    depth: int

    def leaf(self, responses: str) -> TreeNode:
        node = self.root
        for r in responses:
            node = node.child(r)
        return node

    def paths(self) -> Iterator[tuple[str, TreeNode]]:
        """Yield ``(responses, leaf)`` for every leaf, N before Y."""
        stack: list[tuple[str, TreeNode]] = [("", self.root)]
        while stack:
            prefix, node = stack.pop()
            if node.is_leaf:
                yield prefix, node
                continue
            stack.append((prefix + "Y", node.yes))
            stack.append((prefix + "N", node.no))

    def check(self, variant: Optional[Variant] = None) -> None:
        """Raise DomainError unless the tree is structurally sound.

        With ``variant`` given, every leaf must also satisfy that game's win
        condition; the message names the first violating leaf path.
        """
        seen: set[tuple[int, int]] = set()
        stack: list[tuple[str, TreeNode]] = [("", self.root)]
        while stack:
            path, node = stack.pop()
            depth = len(path)
            marker = (id(node), depth)
            if marker in seen:
                continue
            seen.add(marker)
            if depth == self.depth:
                if not node.is_leaf:
                    raise DomainError(f"node at depth {depth} ({path or '-'}) is not a leaf")
                if variant is not None and not end_condition(variant, node.state.total):
                    raise DomainError(
                        f"leaf {path or '-'} with state {node.state} loses the {variant} game"
                    )
                continue
            if node.is_leaf or node.no is None or node.yes is None:
                raise DomainError(f"internal node {path or '-'} is missing children")
            a = node.question
            if len(a) != len(node.state) or any(
                ai < 0 or ai > xi for ai, xi in zip(a, node.state)
            ):
                raise DomainError(f"question {a} illegal for state {node.state} at {path or '-'}")
            if node.yes.state != yes_state(node.state, a):
                raise DomainError(f"Y child of {path or '-'} has the wrong state")
            if node.no.state != no_state(node.state, a):
                raise DomainError(f"N child of {path or '-'} has the wrong state")
            stack.append((path + "Y", node.yes))
            stack.append((path + "N", node.no))

    def render(self) -> str:
        """One line per internal node in breadth-first order: path, state, question."""
        lines = []
        frontier = [("-", self.root)]
        while frontier:
            nxt = []
            for path, node in frontier:
                if node.is_leaf:
                    lines.append(f"{path} {node.state} leaf")
                    continue
                lines.append(f"{path} {node.state} {node.question}")
                base = "" if path == "-" else path
                nxt.append((base + "N", node.no))
                nxt.append((base + "Y", node.yes))
            frontier = nxt
        return "\n".join(lines) + "\n"


@dataclass
class SolveStats:
    visited: int = 0
    memo_hits: int = 0
    peak_memo: int = 0
    questions: int = 0


@dataclass
class SolveOutcome:
    winner: Winner
    strategy: Optional[DecisionTree]
    stats: SolveStats = field(default_factory=SolveStats)


def enumerate_questions(
    x: Sequence[int], coeffs: Sequence[int], hi: Optional[int]
) -> tuple[list[tuple[int, tuple[int, ...]]], int]:
    """All legal ``a`` with ``0 <= delta(a) <= hi`` and ``delta = sum (2a_i - x_i) c_i``.

    Of a pair ``a``, ``x - a`` (same successors, swapped) only the member with
    nonnegative imbalance is produced; when the imbalance is zero the
    lexicographically smaller member is kept.  Returns ``(candidates, scanned)``
    where candidates are ``(delta, a)`` sorted ascending and ``scanned`` counts
    the partial questions visited (the budget unit).
    """
    size = len(x)
    suffix = [0] * (size + 1)
    for i in range(size - 1, -1, -1):
        suffix[i] = suffix[i + 1] + x[i] * coeffs[i]
    if hi is None:
        hi = suffix[0]
    out: list[tuple[int, tuple[int, ...]]] = []
    scanned = 0
    prefix = [0] * size

    def rec(i: int, partial: int) -> None:
        nonlocal scanned
        xi, c = x[i], coeffs[i]
        rest = suffix[i + 1]
        lo_t = -rest - partial
        hi_t = hi + rest - partial
        if c == 0:
            if lo_t > 0 or hi_t < 0:
                return
            amin, amax = 0, xi
        else:
            tmin = -((-lo_t) // c)
            tmax = hi_t // c
            amin = max(0, -((-(tmin + xi)) // 2))
            amax = min(xi, (tmax + xi) // 2)
        last = i == size - 1
        for ai in range(amin, amax + 1):
            scanned += 1
            prefix[i] = ai
            d = partial + (2 * ai - xi) * c
            if not last:
                rec(i + 1, d)
                continue
            if d < 0 or d > hi:
                continue
            a = tuple(prefix)
            if d == 0:
                mirror = tuple(xj - aj for xj, aj in zip(x, a))
                if mirror < a:
                    continue
            out.append((d, a))

    rec(0, 0)
    out.sort()
    return out, scanned


def question_candidates(
    x: Sequence[int], rounds_remaining: int, max_imbalance: Optional[int] = None
) -> list[QuestionVector]:
    """Symmetry-reduced legal questions at ``x``, most balanced first.

    The imbalance is measured at ``rounds_remaining - 1`` (the rounds left
    after this question).  ``max_imbalance`` optionally drops every question
    whose imbalance exceeds it.
    """
    if rounds_remaining < 1:
        raise DomainError("no question is asked with zero rounds remaining")
    coeffs = imbalance_coefficients(rounds_remaining - 1, len(x) - 1)
    cands, _ = enumerate_questions(tuple(x), coeffs, max_imbalance)
    return [QuestionVector(a) for _, a in cands]


class Solver:
    """Memoized exact solver shared across queries.

    The memo survives between calls, so threshold searches over many n reuse
    sub-results.  ``budget`` caps the number of enumerated questions per
    public call; exceeding it raises BudgetExceeded.
    """

    def __init__(self, budget: int = DEFAULT_BUDGET, threads: int = 1):
        self.budget = budget
        self.threads = max(1, int(threads))
        self._memo: dict[tuple[Variant, int, tuple[int, ...]], bool] = {}
        self._choice: dict[tuple[Variant, int, tuple[int, ...]], tuple[int, ...]] = {}
        self.stats = SolveStats()

    # -- memo access -------------------------------------------------------

    @property
    def memo_size(self) -> int:
        return len(self._memo)

    def memo_items(self) -> Iterator[tuple[Variant, int, tuple[int, ...], bool]]:
        for (variant, j, x), won in self._memo.items():
            yield variant, j, x, won

    def remember(self, variant: Variant, j: int, x: Sequence[int], paul_wins: bool) -> None:
        self._memo[(variant, j, tuple(x))] = paul_wins

    # -- core recursion ----------------------------------------------------

    def _charge(self, n: int, j: int, x: tuple[int, ...]) -> None:
        self.stats.questions += n
        if self.stats.questions > self.budget:
            raise BudgetExceeded(
                f"question budget {self.budget} exceeded "
                f"(rounds={j}, k={len(x) - 1}, state={format_vector(x)})"
            )

    def _wins(self, variant: Variant, j: int, x: tuple[int, ...]) -> bool:
        key = (variant, j, x)
        hit = self._memo.get(key)
        if hit is not None:
            self.stats.memo_hits += 1
            return hit
        self.stats.visited += 1
        result = self._evaluate(variant, j, x)
        self._memo[key] = result
        return result

    def _evaluate(self, variant: Variant, j: int, x: tuple[int, ...]) -> bool:
        total = sum(x)
        target = 1 << j
        if variant is Variant.PATHOLOGICAL:
            if j == 0:
                return total >= 1
            # one element per response string: each survives its own path
            if total >= target:
                return True
            if weight(j, x) < target:
                return False
        else:
            if total <= 1:
                return True
            if j == 0:
                return False
            if weight(j, x) > target:
                return False
        a = self._search(variant, j, x)
        if a is None:
            return False
        self._choice[(variant, j, x)] = a
        return True

    def _bound(self, variant: Variant, j: int, x: tuple[int, ...]) -> int:
        w = weight(j, x)
        if variant is Variant.PATHOLOGICAL:
            return w - (1 << j)
        return (1 << j) - w

    def _candidates(self, variant: Variant, j: int, x: tuple[int, ...]):
        coeffs = imbalance_coefficients(j - 1, len(x) - 1)
        cands, scanned = enumerate_questions(x, coeffs, self._bound(variant, j, x))
        self._charge(scanned, j, x)
        return cands

    def _question_wins(self, variant: Variant, j: int, x: tuple[int, ...], a) -> bool:
        y = yes_state(x, a)
        n = no_state(x, a)
        # check the successor Carole prefers first: lighter (pathological) or heavier (original)
        if variant is Variant.PATHOLOGICAL:
            return self._wins(variant, j - 1, n) and self._wins(variant, j - 1, y)
        return self._wins(variant, j - 1, y) and self._wins(variant, j - 1, n)

    def _search(self, variant: Variant, j: int, x: tuple[int, ...]) -> Optional[tuple[int, ...]]:
        for _, a in self._candidates(variant, j, x):
            if self._question_wins(variant, j, x, a):
                return a
        return None

    def _search_parallel(self, variant: Variant, j: int, x: tuple[int, ...]):
        cands = self._candidates(variant, j, x)
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            results = list(pool.map(lambda c: self._question_wins(variant, j, x, c[1]), cands))
        for (_, a), ok in zip(cands, results):
            if ok:
                return a
        return None

    def _root(self, variant: Variant, j: int, x: tuple[int, ...]) -> bool:
        if self.threads == 1 or j == 0:
            return self._wins(variant, j, x)
        key = (variant, j, x)
        if key in self._memo:
            self.stats.memo_hits += 1
            return self._memo[key]
        total = sum(x)
        shortcut = (
            total >= (1 << j) or weight(j, x) < (1 << j)
            if variant is Variant.PATHOLOGICAL
            else total <= 1 or weight(j, x) > (1 << j)
        )
        if shortcut:
            return self._wins(variant, j, x)
        self.stats.visited += 1
        a = self._search_parallel(variant, j, x)
        if a is not None:
            self._choice[key] = a
        self._memo[key] = a is not None
        return a is not None

    def _winning_question(self, variant: Variant, j: int, x: tuple[int, ...]) -> tuple[int, ...]:
        key = (variant, j, x)
        a = self._choice.get(key)
        if a is not None:
            return a
        if variant is Variant.ORIGINAL and sum(x) <= 1:
            coeffs = imbalance_coefficients(j - 1, len(x) - 1)
            cands, _ = enumerate_questions(x, coeffs, None)
            a = cands[0][1]
        else:
            a = self._search(variant, j, x)
        if a is None:
            raise AssertionError(f"no winning question at a Paul-win position {x}, j={j}")
        self._choice[key] = a
        return a

    def _build(self, variant: Variant, j: int, x: tuple[int, ...], cache: dict) -> TreeNode:
        node = cache.get((j, x))
        if node is not None:
            return node
        state = StateVector(x)
        if j == 0:
            node = TreeNode(state)
        else:
            a = self._winning_question(variant, j, x)
            node = TreeNode(
                state,
                QuestionVector(a),
                no=self._build(variant, j - 1, no_state(x, a), cache),
                yes=self._build(variant, j - 1, yes_state(x, a), cache),
            )
        cache[(j, x)] = node
        return node

    def _begin(self) -> None:
        self.stats = SolveStats()

    def _finish(self) -> SolveStats:
        self.stats.peak_memo = max(self.stats.peak_memo, len(self._memo))
        return self.stats

    # -- public API --------------------------------------------------------

    def paul_wins(self, variant: Variant, x: Sequence[int], rounds: int) -> bool:
        if rounds > MAX_ROUNDS:
            raise CapacityError(f"q={rounds} exceeds the supported cap {MAX_ROUNDS}")
        return self._root(variant, rounds, tuple(x))

    def solve(self, spec: GameSpec, want_tree: bool = False) -> SolveOutcome:
        """Decide the game under optimal play, optionally extracting Paul's tree."""
        self._begin()
        x = tuple(spec.initial)
        won = self._root(spec.variant, spec.rounds, x)
        tree = None
        if won and want_tree:
            tree = DecisionTree(self._build(spec.variant, spec.rounds, x, {}), spec.rounds)
        return SolveOutcome(Winner.PAUL if won else Winner.CAROLE, tree, self._finish())

    def best_question(self, variant: Variant, x: Sequence[int], rounds: int) -> Optional[QuestionVector]:
        """Paul's first winning question in candidate order, or None if he loses."""
        if rounds < 1:
            raise DomainError("no question is asked with zero rounds remaining")
        x = tuple(x)
        if not self._root(variant, rounds, x):
            return None
        return QuestionVector(self._winning_question(variant, rounds, x))

    def max_winning_rounds(self, x: Sequence[int], variant: Variant = Variant.PATHOLOGICAL) -> Optional[int]:
        """Largest q for which Paul wins the pathological game from ``x``.

        Every q below the first q whose weight falls under 2^q is evaluated,
        so the interval structure of the winning set is checked rather than
        assumed.
        """
        if variant is not Variant.PATHOLOGICAL:
            raise DomainError("max_winning_rounds is defined for the pathological game only")
        x = tuple(x)
        if sum(x) == 0:
            return None
        ceiling = 0
        while weight(ceiling, x) >= (1 << ceiling):
            ceiling += 1
            if ceiling > MAX_ROUNDS:
                raise CapacityError("winning horizon exceeds the supported round cap")
        self._begin()
        wins = [self._wins(variant, q, x) for q in range(ceiling)]
        self._finish()
        best = max(q for q, w in enumerate(wins) if w)
        if not all(wins[: best + 1]):
            raise AssertionError(f"winning rounds for {format_vector(x)} are not downward closed")
        return best

    def f_star(self, q: int, k: int) -> int:
        """Minimum n such that Paul wins the pathological ((n,0,...,0), q, k) game."""
        if q == 0:
            return 1
        self._begin()

        def wins(n: int) -> bool:
            return self._wins(Variant.PATHOLOGICAL, q, (n,) + (0,) * k)

        lo = max(1, sphere_bound(q, k))
        if wins(lo):
            self._finish()
            return lo
        failing, step = lo, 1
        while True:
            n = min(lo + step, 1 << q)
            if wins(n):
                break
            failing, step = n, step * 2
        passing = n
        while passing - failing > 1:
            mid = (passing + failing) // 2
            if wins(mid):
                passing = mid
            else:
                failing = mid
        self._finish()
        return passing

    def f_original(self, q: int, k: int) -> int:
        """Maximum n such that Paul wins the original ((n,0,...,0), q, k) game."""
        if q == 0:
            return 1
        self._begin()

        def wins(n: int) -> bool:
            return self._wins(Variant.ORIGINAL, q, (n,) + (0,) * k)

        passing = 1
        failing = (1 << q) // binom_le(q, k) + 1
        while failing - passing > 1:
            mid = (passing + failing) // 2
            if wins(mid):
                passing = mid
            else:
                failing = mid
        self._finish()
        return passing

    # -- persistence -------------------------------------------------------

    def dump_memo(self, stream: IO[str]) -> int:
        """Write the memo as ``k q x0,...,xk winner`` lines grouped by variant."""
        count = 0
        for variant in Variant:
            rows = sorted(
                (len(x) - 1, j, x, won)
                for (v, j, x), won in self._memo.items()
                if v is variant
            )
            if not rows:
                continue
            stream.write(f"# variant={variant.value}\n")
            for k, j, x, won in rows:
                stream.write(f"{k} {j} {format_vector(x)} {'Paul' if won else 'Carole'}\n")
                count += 1
        return count

    def load_memo(self, stream: IO[str]) -> int:
        """Merge entries from ``dump_memo`` output; raises FormatError on bad lines."""
        variant = Variant.PATHOLOGICAL
        entries = []
        for lineno, line in enumerate(stream, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# variant="):
                    try:
                        variant = Variant(line.split("=", 1)[1])
                    except ValueError:
                        raise FormatError(f"line {lineno}: unknown variant") from None
                continue
            parts = line.split()
            if len(parts) != 4:
                raise FormatError(f"line {lineno}: expected 'k q x winner'")
            try:
                k, j = int(parts[0]), int(parts[1])
                x = StateVector.parse(parts[2])
            except (ValueError, FormatError) as exc:
                raise FormatError(f"line {lineno}: {exc}") from None
            if k < 0 or x.k != k:
                raise FormatError(f"line {lineno}: k={k} does not match state {x}")
            if not 0 <= j <= MAX_ROUNDS:
                raise FormatError(f"line {lineno}: q={j} out of range")
            if parts[3] not in ("Paul", "Carole"):
                raise FormatError(f"line {lineno}: winner must be Paul or Carole")
            won = parts[3] == "Paul"
            if variant is Variant.PATHOLOGICAL and won and weight(j, x) < (1 << j):
                raise FormatError(f"line {lineno}: Paul cannot win below the sphere bound")
            entries.append((variant, j, tuple(x), won))
        for variant, j, x, won in entries:
            self._memo[(variant, j, x)] = won
        return len(entries)


_default_solver: Optional[Solver] = None


def default_solver() -> Solver:
    global _default_solver
    if _default_solver is None:
        _default_solver = Solver()
    return _default_solver


def solve(spec: GameSpec, want_tree: bool = False, solver: Optional[Solver] = None) -> SolveOutcome:
    return (solver or default_solver()).solve(spec, want_tree)


def max_winning_rounds(x: Sequence[int], variant: Variant = Variant.PATHOLOGICAL,
                       solver: Optional[Solver] = None) -> Optional[int]:
    return (solver or default_solver()).max_winning_rounds(x, variant)


def f_star(q: int, k: int, solver: Optional[Solver] = None) -> int:
    return (solver or default_solver()).f_star(q, k)


def f_original(q: int, k: int, solver: Optional[Solver] = None) -> int:
    return (solver or default_solver()).f_original(q, k)
