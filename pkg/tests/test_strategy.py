from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import brute_force
from ulam.closed_forms import f_star_1, f_star_2, two_lie_deficit
from ulam.core import GameSpec, binom, binom_le, imbalance, is_legal, weight
from ulam.errors import DomainError, StrategyInapplicable, VerificationError
from ulam.solver import question_candidates
from ulam.strategy import (
    ALLOWED_ENDGAME_STATES,
    Policy,
    TraceError,
    fictitious_play_move,
    fictitious_simulation,
    floor_ceiling_question,
    greedy_trim,
    inductive_e2_limit,
    iter_admissible_states,
    one_lie_full_policy,
    one_lie_move,
    perfect_play,
    perfect_play_iterated,
    two_lie_full_policy,
    two_lie_opening,
    verify_policy,
)


def balanced_policy():
    return Policy("balanced", lambda x, rr, _m: question_candidates(x, rr)[0])


class TestFloorCeiling:
    @pytest.mark.parametrize("x,expected", [((4, 6), (2, 3)), ((5, 2), (3, 1)), ((3, 3, 1), (2, 1, 1))])
    def test_examples(self, x, expected):
        assert floor_ceiling_question(x, 5) == expected

    def test_zero_state(self):
        with pytest.raises(DomainError):
            floor_ceiling_question((0, 0), 3)

    @settings(max_examples=300)
    @given(st.integers(1, 4).flatmap(
        lambda k: st.tuples(st.just(k), st.lists(st.integers(0, 1000), min_size=k + 1, max_size=k + 1),
                            st.integers(2 * k - 1, 40))))
    def test_imbalance_window(self, args):
        # the window holds once j = rounds_remaining - 1 >= 2k - 1
        k, x, j = args
        if not any(x):
            return
        a = floor_ceiling_question(x, j + 1)
        assert is_legal(x, a)
        assert 0 <= imbalance(j, x, a) <= binom(j, k)


class TestOneLie:
    @pytest.mark.parametrize("x,expected", [((4, 5), (2, 2)), ((5, 8), (3, 2)), ((1, 9), (1, 3))])
    def test_move_examples(self, x, expected):
        assert one_lie_move(*x) == expected

    def test_move_outside_shapes(self):
        with pytest.raises(DomainError):
            one_lie_move(0, 0)
        with pytest.raises(DomainError):
            one_lie_move(3, 0)

    @settings(max_examples=300)
    @given(st.integers(0, 2000), st.integers(0, 2000))
    def test_move_keeps_character(self, x0, x1):
        from ulam.core import character

        if x0 == x1 == 0 or (x0 >= 2 and x1 < x0 - 1):
            return
        c = character(x0, x1)
        if c == 0:
            return
        a = one_lie_move(x0, x1)
        assert is_legal((x0, x1), a)
        for child in brute_force.successors((x0, x1), a).values():
            assert child != (0, 0) and character(*child) >= c - 1

    @pytest.mark.parametrize("q", range(0, 15))
    def test_policy_wins_at_threshold(self, q):
        n = f_star_1(q)
        report = verify_policy(GameSpec.pathological((n, 0), q), one_lie_full_policy(n, q))
        assert report.all_win and report.branches == 2**q

    def test_policy_examples(self):
        report = verify_policy(GameSpec.pathological((4, 0), 4), one_lie_full_policy(4, 4))
        assert (report.wins, report.branches) == (16, 16)
        assert verify_policy(GameSpec.pathological((1, 0), 0), one_lie_full_policy(1, 0)).branches == 1
        with pytest.raises(DomainError):
            one_lie_full_policy(3, 4)


class TestVerify:
    def test_losing_instance_reports_branches(self):
        report = verify_policy(GameSpec.pathological((3, 1), 4), balanced_policy())
        assert not report.all_win
        assert report.first_loss == report.failed_branches[0]
        assert report.failed_branches == sorted(report.failed_branches)
        assert all(len(s) == 4 for s in report.failed_branches)
        assert "failed: " in report.render()
        assert report.render().rstrip().endswith("branches: loss")

    def test_zero_rounds(self):
        report = verify_policy(GameSpec.pathological((1,), 0), balanced_policy())
        assert report.all_win and report.branches == 1

    def test_branch_counts_are_exact(self):
        # a policy that never asks anything: every branch keeps the lone element only if
        # Carole never lies about it, i.e. answers N every time
        never = Policy("never", lambda x, rr, m: (0,) * len(x))
        report = verify_policy(GameSpec.pathological((1, 0), 3), never)
        assert report.branches == 8 and report.wins == 4  # at most one Y

    def test_illegal_move(self):
        greedy = Policy("greedy", lambda x, rr, m: tuple(xi + 1 for xi in x))
        with pytest.raises(VerificationError, match="round 1"):
            verify_policy(GameSpec.pathological((2, 0), 2), greedy)

    def test_round_limit(self):
        with pytest.raises(DomainError):
            verify_policy(GameSpec.pathological((2, 0), 29), balanced_policy())


class TestGreedyTrim:
    def test_examples(self):
        assert greedy_trim((0, 0, 10), 3) == ((0, 0, 8), (0, 0, 2))
        assert greedy_trim((1, 0, 0, 0), 0) == ((1, 0, 0, 0), (0, 0, 0, 0))
        assert greedy_trim((2, 1, 5), 3) == ((0, 1, 4), (2, 0, 1))

    def test_below_target(self):
        with pytest.raises(DomainError):
            greedy_trim((1, 0), 4)

    def test_too_few_pennies(self):
        # weight 6 at j=2; a zero-lie coin weighs 3, so only pennies could remove 2
        with pytest.raises(DomainError, match="pennies"):
            greedy_trim((2, 0), 2)

    @given(st.lists(st.integers(0, 500), min_size=1, max_size=4), st.integers(0, 20))
    def test_lands_exactly(self, x, j):
        if weight(j, x) < 2**j:
            return
        try:
            kept, removed = greedy_trim(x, j)
        except DomainError:
            # only possible when the pennies cannot cover what the heavier classes leave
            assert x[-1] < weight(j, x) - 2**j
            return
        assert weight(j, kept) == 2**j
        assert all(k + r == xi for k, r, xi in zip(kept, removed, x))


class TestOpening:
    def test_examples_outside_hypotheses(self):
        c = two_lie_opening(20, 20, check=False)
        assert (c.a, c.b_yes, c.b_no) == ((10, 0, 0), (5, 5, 0), (5, 5, 0))
        # n = 4p+1, q-2 even: p - (q-2)/2 + 1 is negative for p=5, q=20
        c = two_lie_opening(21, 20, check=False)
        assert (c.a, c.b_yes, c.b_no) == ((11, 0, 0), (6, 5, 0), (6, -3, 0))
        assert not c.legal()
        c = two_lie_opening(23, 20, check=False)
        assert (c.a, c.b_yes, c.b_no) == ((12, 0, 0), (6, 6, 0), (6, 2, 0))
        assert c.legal() and c.realized_delta() == -two_lie_deficit(23, 20)

    def test_hypotheses_enforced(self):
        with pytest.raises(DomainError):
            two_lie_opening(20, 20)
        with pytest.raises(DomainError):
            two_lie_opening(10**6, 18)

    @pytest.mark.parametrize("q", range(19, 41))
    def test_deficit_and_pennies(self, q):
        need = (q - 2) ** 2 + binom_le(q - 2, 2)
        start = f_star_2(q) - 4
        for n in range(max(start, 1), start + 12):
            if n * binom_le(q, 2) < 2**q:
                continue
            case = two_lie_opening(n, q)
            leaves = case.leaves()
            assert len(leaves) == 4
            lightest = min(weight(q - 2, s) for s in leaves.values())
            assert 4 * lightest - weight(q, (n, 0, 0)) == -two_lie_deficit(n, q)
            assert case.min_pennies() >= need


class TestFictitiousPlay:
    @pytest.mark.parametrize(
        "p,expected", [((0, 0, 64), (0, 0, 32)), ((1, 3, 21), (1, 1, 8)), ((1, 0, 42), (1, 0, 16))]
    )
    def test_examples(self, p, expected):
        a = fictitious_play_move(p, 6)
        assert a == expected
        kids = brute_force.successors(p, a)
        assert brute_force.berlekamp(5, kids["Y"]) == brute_force.berlekamp(5, kids["N"]) == 32

    def test_every_allowed_endgame_state_halves(self):
        for p in ALLOWED_ENDGAME_STATES:
            assert weight(6, p) == 64
            a = fictitious_play_move(p, 6)
            assert imbalance(5, p, a) == 0

    def test_rejects_wrong_weight(self):
        with pytest.raises(DomainError):
            fictitious_play_move((0, 0, 63), 6)

    def test_rejects_negative_split(self):
        # weight 2^4 but too few pennies to balance: v2 would be -1
        with pytest.raises(StrategyInapplicable):
            fictitious_play_move((0, 3, 1), 4)
        assert fictitious_play_move((0, 3, 1), 4, simulation=True) == (0, 2, -1)

    @given(st.integers(0, 10**5), st.integers(0, 10**5), st.integers(0, 40), st.integers(0, 40))
    def test_perfect_play_closed_form(self, x1, x2, x0, m):
        q = 60
        j = q - m
        assert perfect_play((x0, x1, x2), q, j) == perfect_play_iterated((x0, x1, x2), q, j)
        assert all(isinstance(v, Fraction) for v in perfect_play((x0, x1, x2), q, j))

    def test_pennies_only(self):
        trace = fictitious_simulation((0, 0, 2**23), 23)
        assert trace.endgame_states == {(0, 0, 64)}
        assert trace.branches == 2**17

    def test_sampled_mode_is_seeded(self):
        x = next(iter_admissible_states(23, 1, seed=3))
        a = fictitious_simulation(x, 23, samples=200, seed=5, e2_limit=inductive_e2_limit)
        b = fictitious_simulation(x, 23, samples=200, seed=5, e2_limit=inductive_e2_limit)
        assert a.endgame_states == b.endgame_states and a.sampled

    def test_random_admissible_states(self):
        for x in iter_admissible_states(23, 200, seed=11):
            trace = fictitious_simulation(x, 23, e2_limit=inductive_e2_limit)
            assert trace.endgame_states <= ALLOWED_ENDGAME_STATES

    def test_stated_penny_deviation_bound_can_fail(self):
        # the bound C(j,2)+5 does not survive its own induction step; this admissible
        # state exceeds it at j=10 while every structural claim still holds
        x = (25027, 4135, 1356889)
        assert weight(23, x) == 2**23 and x[2] >= 23**2
        with pytest.raises(TraceError) as err:
            fictitious_simulation(x, 23)
        assert all("deviation" in p for p in err.value.trace.problems)
        fictitious_simulation(x, 23, e2_limit=inductive_e2_limit)

    def test_preconditions(self):
        with pytest.raises(DomainError):
            fictitious_simulation((0, 0, 2**22), 22)
        with pytest.raises(DomainError):
            fictitious_simulation((0, 0, 2**23 - 1), 23)


class TestTwoLiePolicy:
    def test_refuses_below_threshold(self):
        with pytest.raises(DomainError):
            two_lie_full_policy(f_star_2(25) - 1, 25)
        with pytest.raises(DomainError):
            two_lie_full_policy(100, 20)

    @pytest.mark.parametrize("q", [25, 26])
    def test_wins_everywhere_near_threshold(self, q):
        for n in range(f_star_2(q), f_star_2(q) + 4):
            report = verify_policy(GameSpec.pathological((n, 0, 0), q), two_lie_full_policy(n, q))
            assert report.all_win and report.branches == 2**q
