"""Exact win criteria and thresholds for one and two lies."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .core import binom, binom_le, sphere_bound

log = logging.getLogger(__name__)


def paul_wins_1lie_pathological(n: int, q: int) -> bool:
    """Paul wins the pathological ((n,0), q, 1) game.

    Even n needs 2^q <= n(q+1); an odd n wastes q-1 of weight on the
    unavoidably unbalanced first question.
    """
    bound = n * (q + 1) if n % 2 == 0 else n * (q + 1) - (q - 1)
    return (1 << q) <= bound


def f_star_1(q: int) -> int:
    """Minimum n for which Paul wins the pathological one-lie game.

    Scans upward from the sphere bound using the exact inequality; the
    closed branch formula is evaluated alongside and any disagreement is
    logged (it happens at q = 1).
    """
    n = sphere_bound(q, 1)
    while not paul_wins_1lie_pathological(n, q):
        n += 1
    branch = f_star_1_branch_formula(q)
    if branch != n:
        log.info("branch formula gives %d but the exact minimum is %d at q=%d", branch, n, q)
    return n


def f_star_1_branch_formula(q: int) -> int:
    """Sphere bound if it is odd and 2^q mod (q+1) is 1 or 2, else the next even number."""
    sb = sphere_bound(q, 1)
    if sb % 2 == 1 and (1 << q) % (q + 1) in (1, 2):
        return sb
    return 2 * -(-sb // 2)


def paul_wins_1lie_original(n: int, q: int) -> bool:
    """Paul wins the original ((n,0), q, 1) game (at most one survivor).

    Even n: n(q+1) <= 2^q.  Odd n: n(q+1) + (q-1) <= 2^q; at q = 0 this reads
    n - 1 <= 1 for odd n, i.e. n = 1, which matches the trivial game.
    """
    need = n * (q + 1) if n % 2 == 0 else n * (q + 1) + (q - 1)
    return need <= (1 << q)


def f_1(q: int) -> int:
    """Largest n satisfying the one-lie original criterion."""
    n = (1 << q) // (q + 1)
    while n > 1 and not paul_wins_1lie_original(n, q):
        n -= 1
    return max(n, 1)


@dataclass(frozen=True)
class TwoLieCorrection:
    A: int
    B: int


def two_lie_correction(n: int, q: int) -> TwoLieCorrection:
    """Parity corrections (A, B) of the two-lie threshold; B uses least residues mod 4."""
    A = n % 2
    r = n % 4
    if r == 0:
        B = 0
    elif r == 1:
        B = 2 * (q % 2)
    elif r == 2:
        B = (1 - q**3) % 4
    else:
        B = (1 + q**3) % 4
    return TwoLieCorrection(A, B)


def two_lie_deficit(n: int, q: int) -> int:
    """Weight lost to imbalance in the first two rounds: A C(q-1,2) + B C(q-2,1)."""
    c = two_lie_correction(n, q)
    return c.A * binom(q - 1, 2) + c.B * binom(q - 2, 1)


def paul_wins_2lie_pathological(n: int, q: int) -> bool:
    return (1 << q) <= n * binom_le(q, 2) - two_lie_deficit(n, q)


def f_star_2(q: int) -> int:
    """First n at or above the sphere bound satisfying the two-lie criterion."""
    n = sphere_bound(q, 2)
    while not paul_wins_2lie_pathological(n, q):
        n += 1
    return n


def f_star_formula(q: int, k: int) -> int:
    if k == 1:
        return f_star_1(q)
    if k == 2:
        return f_star_2(q)
    raise ValueError("closed forms exist for k = 1 and k = 2 only")
