"""State vectors, transitions and Berlekamp weights for the liar games.

A position of a q-round game with k lies is fully described by the counts
``(x_0, ..., x_k)`` of surviving elements carrying i lies.  Everything here is
exact integer arithmetic on such tuples.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterable, Optional, Sequence

from .errors import CapacityError, FormatError, LegalityError, ShapeError

MAX_ROUNDS = 100
U64_LIMIT = 1 << 64
U128_LIMIT = 1 << 128


class Variant(enum.Enum):
    PATHOLOGICAL = "pathological"
    ORIGINAL = "original"

    def __str__(self) -> str:
        return self.value


class Response(enum.Enum):
    Y = "Y"
    N = "N"

    @property
    def complement(self) -> "Response":
        return Response.N if self is Response.Y else Response.Y

    def __str__(self) -> str:
        return self.value


def _parse_counts(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        raise FormatError("empty vector")
    parts = text.split(",")
    try:
        values = tuple(int(p) for p in parts)
    except ValueError:
        raise FormatError(f"not a comma-separated integer vector: {text!r}") from None
    if any(p != str(v) for p, v in zip(parts, values)):
        raise FormatError(f"non-canonical integer in {text!r}")
    return values


class StateVector(tuple):
    """Counts ``(x_0, ..., x_k)`` of elements by number of lies carried.

    A thin ``tuple`` subclass: hashing and equality are those of the plain
    tuple, so the solver can key memo tables by either form.
    """

    __slots__ = ()

    def __new__(cls, counts: Iterable[int], k: Optional[int] = None):
        values = tuple(int(c) for c in counts)
        if not values:
            raise ShapeError("a state vector needs at least one entry")
        if k is not None and len(values) != k + 1:
            raise ShapeError(f"expected {k + 1} entries for k={k}, got {len(values)}")
        if any(v < 0 for v in values):
            raise ValueError(f"state entries must be nonnegative: {values}")
        if sum(values) >= U64_LIMIT:
            raise CapacityError("total element count does not fit in 64 bits")
        return super().__new__(cls, values)

    @property
    def k(self) -> int:
        return len(self) - 1

    @property
    def total(self) -> int:
        return sum(self)

    @classmethod
    def parse(cls, text: str, k: Optional[int] = None) -> "StateVector":
        return cls(_parse_counts(text), k)

    @classmethod
    def initial(cls, n: int, k: int) -> "StateVector":
        return cls((n,) + (0,) * k)

    def __str__(self) -> str:
        return format_vector(self)

    def __repr__(self) -> str:
        return f"StateVector({format_vector(self)})"


class QuestionVector(tuple):
    """Paul's split ``(a_0, ..., a_k)``; legality is checked against a state."""

    __slots__ = ()

    def __new__(cls, entries: Iterable[int]):
        values = tuple(int(a) for a in entries)
        if not values:
            raise ShapeError("a question vector needs at least one entry")
        return super().__new__(cls, values)

    @classmethod
    def parse(cls, text: str) -> "QuestionVector":
        return cls(_parse_counts(text))

    def __str__(self) -> str:
        return format_vector(self)

    def __repr__(self) -> str:
        return f"QuestionVector({format_vector(self)})"


def format_vector(values: Sequence[int]) -> str:
    return ",".join(str(v) for v in values)


@dataclass(frozen=True)
class GameSpec:
    variant: Variant
    initial: StateVector
    rounds: int
    lies: int

    def __post_init__(self):
        if not isinstance(self.initial, StateVector):
            object.__setattr__(self, "initial", StateVector(self.initial))
        if self.rounds < 0:
            raise ValueError("rounds must be nonnegative")
        if self.rounds > MAX_ROUNDS:
            raise CapacityError(f"q={self.rounds} exceeds the supported cap {MAX_ROUNDS}")
        if self.lies != self.initial.k:
            raise ShapeError(f"lies={self.lies} disagrees with state {self.initial}")

    @classmethod
    def pathological(cls, initial, rounds: int) -> "GameSpec":
        state = StateVector(initial)
        return cls(Variant.PATHOLOGICAL, state, rounds, state.k)

    @classmethod
    def original(cls, initial, rounds: int) -> "GameSpec":
        state = StateVector(initial)
        return cls(Variant.ORIGINAL, state, rounds, state.k)

    def paul_wins_at_end(self, total: int) -> bool:
        return end_condition(self.variant, total)


def end_condition(variant: Variant, total: int) -> bool:
    """Paul's win condition once no rounds remain, given the survivor count."""
    if variant is Variant.PATHOLOGICAL:
        return total >= 1
    return total <= 1


def _check_q(q: int) -> None:
    if q < 0:
        raise ValueError(f"q must be nonnegative, got {q}")
    if q > MAX_ROUNDS:
        raise CapacityError(f"q={q} exceeds the supported cap {MAX_ROUNDS}")


@lru_cache(maxsize=None)
def binom_le(q: int, m: int) -> int:
    """Size of a radius-m Hamming ball in the q-cube: sum of C(q, j) for j <= m."""
    _check_q(q)
    if m < 0:
        return 0
    if m >= q:
        return 1 << q
    return sum(comb(q, j) for j in range(m + 1))


def binom(m: int, j: int) -> int:
    """C(m, j) with the convention C(m, j) = 0 whenever m < j or either is negative."""
    if j < 0 or m < j:
        return 0
    return comb(m, j)


@lru_cache(maxsize=None)
def weight_coefficients(q: int, k: int) -> tuple[int, ...]:
    """Per-class element weights ``binom_le(q, k - i)`` for i = 0..k."""
    return tuple(binom_le(q, k - i) for i in range(k + 1))


@lru_cache(maxsize=None)
def imbalance_coefficients(j: int, k: int) -> tuple[int, ...]:
    return tuple(binom(j, k - i) for i in range(k + 1))


def weight(q: int, x: Sequence[int]) -> int:
    """Berlekamp q-weight of a state."""
    coeffs = weight_coefficients(q, len(x) - 1)
    w = sum(c * xi for c, xi in zip(coeffs, x))
    if w >= U128_LIMIT:
        raise CapacityError(f"weight of {format_vector(x)} at q={q} overflows 128 bits")
    return w


def check_legal(x: Sequence[int], a: Sequence[int]) -> None:
    if len(a) != len(x):
        raise ShapeError(f"question {format_vector(a)} does not match state {format_vector(x)}")
    for i, (ai, xi) in enumerate(zip(a, x)):
        if ai < 0 or ai > xi:
            raise LegalityError(
                f"question {format_vector(a)} is illegal for state {format_vector(x)} (entry {i})"
            )


def is_legal(x: Sequence[int], a: Sequence[int]) -> bool:
    return len(a) == len(x) and all(0 <= ai <= xi for ai, xi in zip(a, x))


def yes_state(x: Sequence[int], a: Sequence[int]) -> tuple[int, ...]:
    """Raw Y successor without legality checks (fictitious play needs negatives)."""
    out = [a[0]]
    for i in range(1, len(x)):
        out.append(a[i] + x[i - 1] - a[i - 1])
    return tuple(out)


def no_state(x: Sequence[int], a: Sequence[int]) -> tuple[int, ...]:
    out = [x[0] - a[0]]
    for i in range(1, len(x)):
        out.append(x[i] - a[i] + a[i - 1])
    return tuple(out)


def transition(x: Sequence[int], a: Sequence[int], r: Response) -> StateVector:
    """State after Carole answers ``r`` to question ``a``.

    Y puts a lie on every element outside the question set, N on every
    element inside it; elements pushed past k lies disappear.
    """
    check_legal(x, a)
    if r is Response.Y:
        return StateVector(yes_state(x, a))
    return StateVector(no_state(x, a))


def imbalance(j: int, x: Sequence[int], a: Sequence[int]) -> int:
    """Weight of the Y successor minus weight of the N successor at j rounds.

    Evaluated twice (difference of weights and the coefficient form
    ``sum (2 a_i - x_i) C(j, k - i)``); disagreement is a bug.
    """
    check_legal(x, a)
    direct = weight(j, yes_state(x, a)) - weight(j, no_state(x, a))
    closed = imbalance_closed_form(j, x, a)
    if direct != closed:
        raise AssertionError(f"imbalance evaluations disagree: {direct} != {closed}")
    return direct


def imbalance_closed_form(j: int, x: Sequence[int], a: Sequence[int]) -> int:
    coeffs = imbalance_coefficients(j, len(x) - 1)
    return sum((2 * ai - xi) * c for ai, xi, c in zip(a, x, coeffs))


def sphere_bound(q: int, k: int) -> int:
    """Ceiling of 2^q over the radius-k ball size."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    ball = binom_le(q, k)
    return -(-(1 << q) // ball)


def character(x0: int, x1: int) -> Optional[int]:
    """Largest q with (q+1) x0 + x1 >= 2^q for a one-lie state; None for (0, 0)."""
    if x0 < 0 or x1 < 0:
        raise ValueError("state entries must be nonnegative")
    if x0 == 0 and x1 == 0:
        return None
    # once the weight drops below 2^q it stays below for every larger q
    q = 0
    while (q + 1) * x0 + x1 >= (1 << q):
        q += 1
        if q > MAX_ROUNDS + 1:
            raise CapacityError("character exceeds the supported round cap")
    return q - 1


def _same_shape(x: Sequence[int], y: Sequence[int]) -> None:
    if len(x) != len(y):
        raise ShapeError(f"states {format_vector(x)} and {format_vector(y)} have different k")


def covers(x: Sequence[int], y: Sequence[int]) -> bool:
    """True when y_i <= x_i for every i."""
    _same_shape(x, y)
    return all(yi <= xi for xi, yi in zip(x, y))


def majorizes(x: Sequence[int], y: Sequence[int]) -> bool:
    """True when every prefix sum of y is at most the matching prefix sum of x."""
    _same_shape(x, y)
    sx = sy = 0
    for xi, yi in zip(x, y):
        sx += xi
        sy += yi
        if sy > sx:
            return False
    return True
