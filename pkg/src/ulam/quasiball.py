"""Quasiballs, covering/packing collections, and the strategy equivalence.

A radius-i quasiball in the q-cube is given by its assignment: every set of
at most i lie positions (1-indexed, strictly increasing tuples) maps to a
Y/N string of length q.  The assignment of a winning strategy's element is
"where does this element end up if Carole lies exactly at these positions".
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Optional, Sequence

from .core import (
    GameSpec,
    QuestionVector,
    StateVector,
    Variant,
    binom_le,
    end_condition,
    format_vector,
)
from .errors import BudgetExceeded, DomainError, FormatError
from .solver import DecisionTree, TreeNode

MAX_COVER_ROUNDS = 28
HEADER = "quasiball-cover v1"

Positions = tuple[int, ...]


def lie_sets(q: int, radius: int) -> Iterator[Positions]:
    """All position sets of size <= radius in canonical (size, lexicographic) order."""
    for size in range(min(radius, q) + 1):
        yield from combinations(range(1, q + 1), size)


def format_positions(p: Positions) -> str:
    return ",".join(map(str, p)) if p else "-"


def vertex_index(v: str) -> int:
    # N=0, Y=1, first position most significant: integer order is string order
    out = 0
    for c in v:
        out = (out << 1) | (c == "Y")
    return out


def vertex_string(index: int, q: int) -> str:
    return "".join("Y" if index >> (q - 1 - b) & 1 else "N" for b in range(q))


@dataclass
class Quasiball:
    q: int
    radius: int
    assignment: dict[Positions, str]

    @property
    def stem(self) -> str:
        return self.assignment[()]

    @property
    def image(self) -> set[str]:
        return set(self.assignment.values())

    def entries(self) -> list[tuple[Positions, str]]:
        return sorted(self.assignment.items(), key=lambda kv: (len(kv[0]), kv[0]))


@dataclass
class QuasiballReport:
    ok: bool
    message: str = "pass"
    pair: Optional[tuple[Positions, Positions]] = None
    sampled_pairs: int = 0

    def __bool__(self) -> bool:
        return self.ok


def _check_format(ball: Quasiball) -> None:
    if ball.q < 0 or ball.radius < 0:
        raise FormatError("dimension and radius must be nonnegative")
    for p, v in ball.assignment.items():
        if not isinstance(p, tuple) or any(not isinstance(i, int) for i in p):
            raise FormatError(f"malformed position list {p!r}")
        if any(i < 1 or i > ball.q for i in p) or any(a >= b for a, b in zip(p, p[1:])):
            raise FormatError(f"position list {format_positions(p)} is not strictly increasing in 1..{ball.q}")
        if len(p) > ball.radius:
            raise FormatError(f"position list {format_positions(p)} exceeds radius {ball.radius}")
        if len(v) != ball.q or set(v) - {"Y", "N"}:
            raise FormatError(f"{v!r} is not a Y/N vertex of length {ball.q}")


def _pair_violation(ball: Quasiball, a: Positions, b: Positions) -> Optional[str]:
    split = b[len(a)]
    fa, fb = ball.assignment[a], ball.assignment[b]
    if fa[: split - 1] != fb[: split - 1]:
        return f"f({format_positions(a)})={fa} and f({format_positions(b)})={fb} disagree before position {split}"
    if fa[split - 1] == fb[split - 1]:
        return f"position {split} must flip between f({format_positions(a)})={fa} and f({format_positions(b)})={fb}"
    return None


def validate_quasiball(ball: Quasiball, seed: int = 0) -> QuasiballReport:
    """Check domain, nested-pair structure and injectivity; report the first failure.

    Nested pairs differing by one position are checked exhaustively; pairs
    differing by more follow from them by chaining, and a random sample of
    10 * |ball| of them is checked as well.
    """
    _check_format(ball)
    missing = [p for p in lie_sets(ball.q, ball.radius) if p not in ball.assignment]
    if missing:
        return QuasiballReport(False, f"no vertex assigned to {format_positions(missing[0])}")
    for b in lie_sets(ball.q, ball.radius):
        if b:
            problem = _pair_violation(ball, b[:-1], b)
            if problem:
                return QuasiballReport(False, problem, (b[:-1], b))
    owners: dict[str, Positions] = {}
    for p, v in ball.entries():
        if v in owners:
            return QuasiballReport(
                False, f"f({format_positions(owners[v])}) and f({format_positions(p)}) are both {v}", (owners[v], p)
            )
        owners[v] = p
    deep = [p for p in ball.assignment if len(p) >= 2]
    samples = 10 * binom_le(ball.q, ball.radius) if deep else 0
    rng = random.Random(seed)
    for _ in range(samples):
        b = rng.choice(deep)
        a = b[: rng.randrange(len(b) - 1)]
        problem = _pair_violation(ball, a, b)
        if problem:
            return QuasiballReport(False, problem, (a, b), samples)
    return QuasiballReport(True, sampled_pairs=samples)


def hamming_quasiball(center: str, radius: int) -> Quasiball:
    """The radius ball around ``center``: f(P) flips ``center`` at the positions in P."""
    q = len(center)
    flip = {"Y": "N", "N": "Y"}
    assignment = {}
    for p in lie_sets(q, radius):
        v = list(center)
        for i in p:
            v[i - 1] = flip[v[i - 1]]
        assignment[p] = "".join(v)
    return Quasiball(q, radius, assignment)


def restrict(ball: Quasiball, radius: int) -> Quasiball:
    """Keep the part of the assignment on sets of size <= radius."""
    if radius > ball.radius:
        raise DomainError("restriction cannot enlarge the radius")
    return Quasiball(ball.q, radius, {p: v for p, v in ball.assignment.items() if len(p) <= radius})


def descend(ball: Quasiball, response: str) -> Optional[Quasiball]:
    """The ball one level down after Carole's first answer, or None if it dies.

    An answer matching the stem's first bit is truthful for the element: the
    sets avoiding position 1 survive at the same radius.  Otherwise the sets
    containing position 1 survive with that lie consumed.
    """
    truthful = ball.stem[:1] == response
    if not truthful and ball.radius == 0:
        return None
    assignment = {}
    for p, v in ball.assignment.items():
        if (1 in p) == truthful:
            continue
        rest = p[1:] if not truthful else p
        assignment[tuple(i - 1 for i in rest)] = v[1:]
    return Quasiball(ball.q - 1, ball.radius - (not truthful), assignment)


# -- collections -------------------------------------------------------------


@dataclass
class QuasiballCollection:
    q: int
    k: int
    x: tuple[int, ...]
    balls: list[Quasiball]
    mode: str

    def __post_init__(self):
        if self.mode not in ("covering", "packing"):
            raise FormatError(f"unknown mode {self.mode!r}")
        self.x = tuple(self.x)
        if len(self.x) != self.k + 1:
            raise FormatError(f"profile {format_vector(self.x)} does not have k+1={self.k + 1} entries")


@dataclass
class CollectionReport:
    ok: bool
    mode: str
    q: int
    profile: tuple[int, ...]
    slots: int = 0
    distinct: int = 0
    message: str = "pass"
    uncovered: Optional[str] = None
    collision: Optional[str] = None
    bad_ball: Optional[int] = None
    sampled_pairs: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def overlap(self) -> int:
        return self.slots - self.distinct

    def __bool__(self) -> bool:
        return self.ok

    def render(self) -> str:
        lines = [
            f"status: {'pass' if self.ok else 'fail'}",
            f"mode: {self.mode}",
            f"q: {self.q}",
            f"profile: {format_vector(self.profile)}",
            f"slots: {self.slots}",
            f"vertices: {1 << self.q}",
            f"distinct: {self.distinct}",
            f"overlap: {self.overlap}",
            f"sampled_pairs: {self.sampled_pairs}",
        ]
        if self.uncovered is not None:
            lines.append(f"uncovered: {self.uncovered}")
        if self.collision is not None:
            lines.append(f"collision: {self.collision}")
        if self.bad_ball is not None:
            lines.append(f"ball: {self.bad_ball}")
        if not self.ok:
            lines.append(f"reason: {self.message}")
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def validate_collection(coll: QuasiballCollection, seed: int = 0) -> CollectionReport:
    """Validate every ball, the radius profile and the covering/packing condition.

    Witnesses are the lexicographically least uncovered or shared vertex.
    """
    if coll.q > MAX_COVER_ROUNDS:
        raise BudgetExceeded(f"union bitset for q={coll.q} exceeds the cap q <= {MAX_COVER_ROUNDS}")
    report = CollectionReport(True, coll.mode, coll.q, coll.x)
    report.notes.append("nested pairs more than one position apart are checked by sampling")

    def fail(message: str, **kw) -> CollectionReport:
        report.ok = False
        report.message = message
        for key, value in kw.items():
            setattr(report, key, value)
        return report

    for idx, ball in enumerate(coll.balls):
        if ball.q != coll.q:
            return fail(f"ball {idx} lives in dimension {ball.q}, not {coll.q}", bad_ball=idx)
        if ball.radius > coll.k:
            return fail(f"ball {idx} has radius {ball.radius} > k={coll.k}", bad_ball=idx)
        single = validate_quasiball(ball, seed + idx)
        report.sampled_pairs += single.sampled_pairs
        if not single:
            return fail(f"ball {idx}: {single.message}", bad_ball=idx)
    counts = Counter(ball.radius for ball in coll.balls)
    actual = tuple(counts.get(coll.k - i, 0) for i in range(coll.k + 1))
    if actual != coll.x:
        return fail(f"radius profile {format_vector(actual)} does not match declared {format_vector(coll.x)}")

    seen = bytearray(((1 << coll.q) + 7) // 8)
    collisions = []
    for ball in coll.balls:
        for v in ball.assignment.values():
            idx = vertex_index(v)
            byte, bit = divmod(idx, 8)
            if seen[byte] >> bit & 1:
                collisions.append(idx)
            else:
                seen[byte] |= 1 << bit
            report.slots += 1
    report.distinct = report.slots - len(collisions)
    if coll.mode == "packing" and collisions:
        return fail("balls overlap", collision=vertex_string(min(collisions), coll.q))
    if coll.mode == "covering":
        hole = _first_unset(seen, 1 << coll.q)
        if hole is not None:
            return fail("union misses a vertex", uncovered=vertex_string(hole, coll.q))
    return report


def _first_unset(bits: bytearray, size: int) -> Optional[int]:
    for byte, value in enumerate(bits):
        if value != 0xFF:
            for bit in range(8):
                idx = byte * 8 + bit
                if idx >= size:
                    return None
                if not value >> bit & 1:
                    return idx
    return None


# -- strategy equivalence ----------------------------------------------------


def strategy_to_covering(tree: DecisionTree, spec: GameSpec) -> QuasiballCollection:
    """Read one quasiball per initial element off a winning strategy tree.

    Elements are labeled class by class; a question ``(a_0, ..., a_k)`` is
    realized by the a_i lowest labels of each class.  Pathological trees give
    a covering, original-game trees a packing.
    """
    tree.check(spec.variant)
    if tuple(tree.root.state) != tuple(spec.initial) or tree.depth != spec.rounds:
        raise DomainError("tree does not match the game specification")
    k = spec.lies
    q = spec.rounds
    start_class = []
    classes: list[list[int]] = []
    for i, count in enumerate(spec.initial):
        base = len(start_class)
        classes.append(list(range(base, base + count)))
        start_class.extend([i] * count)
    assignments: list[dict[Positions, str]] = [{} for _ in start_class]
    lies: list[tuple[int, ...]] = [() for _ in start_class]

    def walk(node: TreeNode, path: str, classes: list[list[int]]) -> None:
        if node.is_leaf:
            for members in classes:
                for e in members:
                    assignments[e][lies[e]] = path
            return
        position = len(path) + 1
        asked = [set(members[:a]) for members, a in zip(classes, node.question)]
        for response, child in (("N", node.no), ("Y", node.yes)):
            nxt: list[list[int]] = [[] for _ in range(k + 1)]
            changed = []
            for i, members in enumerate(classes):
                for e in members:
                    if (e in asked[i]) == (response == "Y"):
                        nxt[i].append(e)
                    elif i < k:
                        nxt[i + 1].append(e)
                        changed.append(e)
            for members in nxt:
                members.sort()
            for e in changed:
                lies[e] = lies[e] + (position,)
            walk(child, path + response, nxt)
            for e in changed:
                lies[e] = lies[e][:-1]

    walk(tree.root, "", classes)
    balls = [Quasiball(q, k - start_class[e], assignments[e]) for e in range(len(start_class))]
    mode = "covering" if spec.variant is Variant.PATHOLOGICAL else "packing"
    return QuasiballCollection(q, k, tuple(spec.initial), balls, mode)


def covering_to_strategy(coll: QuasiballCollection, variant: Variant, seed: int = 0) -> DecisionTree:
    """Build Paul's strategy tree from a validated collection and check it wins.

    Each element's ball decides its membership in the current question (stem
    starts with Y) and is descended along Carole's answer.
    """
    expected = "covering" if variant is Variant.PATHOLOGICAL else "packing"
    if coll.mode != expected:
        raise DomainError(f"the {variant} game needs a {expected}, got a {coll.mode}")
    report = validate_collection(coll, seed)
    if not report:
        raise DomainError(f"invalid collection: {report.message}")
    k = coll.k

    def counts(balls: Sequence[Quasiball]) -> StateVector:
        c = [0] * (k + 1)
        for b in balls:
            c[k - b.radius] += 1
        return StateVector(c)

    def build(balls: list[Quasiball], j: int) -> TreeNode:
        if not balls:
            return empty_tree(j, k)
        state = counts(balls)
        if j == 0:
            return TreeNode(state)
        question = [0] * (k + 1)
        for b in balls:
            if b.stem[0] == "Y":
                question[k - b.radius] += 1
        children = {}
        for response in ("N", "Y"):
            nxt = [d for d in (descend(b, response) for b in balls) if d is not None]
            children[response] = build(nxt, j - 1)
        return TreeNode(state, QuestionVector(question), no=children["N"], yes=children["Y"])

    tree = DecisionTree(build(list(coll.balls), coll.q), coll.q)
    tree.check(variant)
    return tree


def empty_tree(q: int, k: int) -> TreeNode:
    """Depth-q tree over the zero state (every element already eliminated)."""
    zero = StateVector((0,) * (k + 1))
    node = TreeNode(zero)
    for _ in range(q):
        node = TreeNode(zero, QuestionVector((0,) * (k + 1)), no=node, yes=node)
    return node


# -- certificate files -------------------------------------------------------


def serialize_collection(coll: QuasiballCollection) -> str:
    lines = [HEADER, f"q={coll.q} k={coll.k} mode={coll.mode} x={format_vector(coll.x)}"]
    for idx, ball in enumerate(coll.balls):
        lines.append(f"ball {idx} radius {ball.radius}")
        lines += [f"{format_positions(p)} : {v}" for p, v in ball.entries()]
    return "\n".join(lines) + "\n"


def _parse_positions(text: str, line_no: int) -> Positions:
    if text == "-":
        return ()
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise FormatError(f"line {line_no}: malformed position list {text!r}") from None


def parse_collection(text: str) -> QuasiballCollection:
    """Parse a certificate.  Ball ordinals are not checked and missing entries
    are left for the validator to report."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise FormatError(f"missing header {HEADER!r}")
    if len(lines) < 2:
        raise FormatError("missing profile line")
    fields = {}
    for token in lines[1].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise FormatError(f"line 2: malformed field {token!r}")
        fields[key] = value
    try:
        q, k, mode = int(fields["q"]), int(fields["k"]), fields["mode"]
        x = tuple(int(t) for t in fields["x"].split(","))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"line 2: bad profile line ({exc})") from None
    balls: list[Quasiball] = []
    for line_no, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        if line.startswith("ball "):
            parts = line.split()
            if len(parts) != 4 or parts[2] != "radius":
                raise FormatError(f"line {line_no}: malformed ball header {line!r}")
            try:
                radius = int(parts[3])
            except ValueError:
                raise FormatError(f"line {line_no}: bad radius {parts[3]!r}") from None
            balls.append(Quasiball(q, radius, {}))
            continue
        if not balls:
            raise FormatError(f"line {line_no}: entry before any ball header")
        left, sep, right = line.partition(":")
        if not sep:
            raise FormatError(f"line {line_no}: expected '<positions> : <vertex>'")
        p = _parse_positions(left.strip(), line_no)
        if p in balls[-1].assignment:
            raise FormatError(f"line {line_no}: duplicate entry {format_positions(p)}")
        balls[-1].assignment[p] = right.strip()
    return QuasiballCollection(q, k, x, balls, mode)
