"""Independent oracles used by the tests.

Nothing here imports the package: transitions, weights and the game value are
re-derived from the rules directly (element lists, plain loops), so agreement
with the library is evidence rather than tautology.
"""

from functools import lru_cache
from itertools import combinations, product
from math import comb


def ball_size(q, m):
    # count vertices of {0,1}^q at Hamming distance <= m from 0...0
    return sum(1 for v in product((0, 1), repeat=q) if sum(v) <= m)


def successors(x, a):
    # element-level: each element carries a lie count; questioned ones gain a
    # lie on N, the others on Y; anything past k lies is dropped
    k = len(x) - 1
    out = {}
    for answer in "YN":
        counts = [0] * (k + 1)
        for i in range(k + 1):
            for inside, count in ((True, a[i]), (False, x[i] - a[i])):
                lied = inside != (answer == "Y")
                j = i + lied
                if j <= k:
                    counts[j] += count
        out[answer] = tuple(counts)
    return out


def berlekamp(q, x):
    k = len(x) - 1
    return sum(xi * sum(comb(q, t) for t in range(k - i + 1)) for i, xi in enumerate(x))


@lru_cache(maxsize=None)
def paul_wins(x, q, variant):
    """Plain minimax over every legal question, no pruning or symmetry."""
    if q == 0:
        total = sum(x)
        return total >= 1 if variant == "pathological" else total <= 1
    for a in product(*(range(xi + 1) for xi in x)):
        nxt = successors(x, a)
        if paul_wins(nxt["Y"], q - 1, variant) and paul_wins(nxt["N"], q - 1, variant):
            return True
    return False


def threshold_pathological(q, k):
    n = 1
    while not paul_wins((n,) + (0,) * k, q, "pathological"):
        n += 1
    return n


def threshold_original(q, k):
    n = 1
    while paul_wins((n + 1,) + (0,) * k, q, "original"):
        n += 1
    return n


def subsets_upto(q, r):
    for size in range(r + 1):
        yield from combinations(range(1, q + 1), size)
