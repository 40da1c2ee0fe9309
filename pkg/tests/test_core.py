import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brute_force import ball_size, berlekamp, successors
from ulam.core import (
    GameSpec,
    QuestionVector,
    Response,
    StateVector,
    Variant,
    binom_le,
    character,
    covers,
    imbalance,
    imbalance_closed_form,
    majorizes,
    sphere_bound,
    transition,
    weight,
)
from ulam.errors import CapacityError, FormatError, LegalityError, ShapeError


@st.composite
def state_and_question(draw, max_k=4, max_entry=40):
    k = draw(st.integers(0, max_k))
    x = tuple(draw(st.lists(st.integers(0, max_entry), min_size=k + 1, max_size=k + 1)))
    a = tuple(draw(st.integers(0, xi)) for xi in x)
    return x, a


class TestVectors:
    def test_parse_and_format(self):
        x = StateVector.parse("3,1")
        assert x == (3, 1) and x.k == 1 and x.total == 4
        assert str(x) == "3,1"
        assert StateVector.parse("7") == (7,)

    @pytest.mark.parametrize("text", ["", "3,,1", "3;1", "a,b", "+3,1", " 3, 1x"])
    def test_parse_rejects_garbage(self, text):
        with pytest.raises(FormatError):
            StateVector.parse(text)

    def test_shape_and_sign(self):
        with pytest.raises(ShapeError):
            StateVector((1, 2), k=2)
        with pytest.raises(ValueError):
            StateVector((1, -1))
        with pytest.raises(CapacityError):
            StateVector((1 << 64,))

    def test_initial(self):
        assert StateVector.initial(5, 2) == (5, 0, 0)

    def test_question_parse(self):
        assert QuestionVector.parse("1,1") == (1, 1)

    def test_spec_checks_lies(self):
        with pytest.raises(ShapeError):
            GameSpec(Variant.PATHOLOGICAL, StateVector((3, 1)), 4, 2)
        with pytest.raises(CapacityError):
            GameSpec.pathological((1, 0), 101)


class TestBinomLe:
    @pytest.mark.parametrize("q,m,expected", [(4, 1, 5), (7, 0, 1), (5, 2, 16)])
    def test_examples(self, q, m, expected):
        assert binom_le(q, m) == expected

    @pytest.mark.parametrize("q", range(0, 11))
    @pytest.mark.parametrize("m", range(-1, 5))
    def test_matches_vertex_count(self, q, m):
        assert binom_le(q, m) == ball_size(q, m)

    def test_cap(self):
        assert binom_le(100, 100) == 1 << 100
        with pytest.raises(CapacityError):
            binom_le(101, 1)


class TestWeight:
    def test_examples(self):
        assert weight(4, (3, 1)) == 16
        assert weight(9, (0, 0, 0)) == 0
        assert weight(0, (2, 5, 9)) == 16

    def test_overflow(self):
        with pytest.raises(CapacityError):
            weight(100, ((1 << 63),) + (0,) * 40)

    @given(state_and_question(max_entry=10**6), st.integers(0, 30))
    def test_matches_independent_formula(self, xa, q):
        x, _ = xa
        assert weight(q, x) == berlekamp(q, x)


class TestTransition:
    def test_examples(self):
        x, a = StateVector((3, 1)), QuestionVector((1, 1))
        assert transition(x, a, Response.Y) == (1, 3)
        assert transition(x, a, Response.N) == (2, 1)
        assert transition(x, x, Response.Y) == x

    def test_illegal(self):
        with pytest.raises(LegalityError):
            transition((3, 1), (4, 0), Response.Y)
        with pytest.raises(LegalityError):
            transition((3, 1), (-1, 0), Response.N)
        with pytest.raises(ShapeError):
            transition((3, 1), (1,), Response.N)

    @given(state_and_question())
    def test_matches_element_level_rule(self, xa):
        x, a = xa
        nxt = successors(x, a)
        assert transition(x, a, Response.Y) == nxt["Y"]
        assert transition(x, a, Response.N) == nxt["N"]

    def test_complement(self):
        assert Response.Y.complement is Response.N


class TestImbalance:
    def test_examples(self):
        assert imbalance(3, (3, 1), (1, 1)) == -2
        assert imbalance(7, (4, 6, 2), (2, 3, 1)) == 0
        assert imbalance(5, (1, 3, 21), (1, 1, 8)) == 0

    @settings(max_examples=300)
    @given(state_and_question(max_entry=10**5), st.integers(0, 30))
    def test_conservation_and_closed_form(self, xa, j):
        x, a = xa
        y, n = successors(x, a)["Y"], successors(x, a)["N"]
        assert berlekamp(j, y) + berlekamp(j, n) == berlekamp(j + 1, x)
        assert imbalance(j, x, a) == imbalance_closed_form(j, x, a) == berlekamp(j, y) - berlekamp(j, n)


class TestSphereBound:
    @pytest.mark.parametrize("q,k,expected", [(4, 1, 4), (6, 0, 64), (10, 2, 19)])
    def test_examples(self, q, k, expected):
        assert sphere_bound(q, k) == expected

    @given(st.integers(0, 40), st.integers(0, 5))
    def test_is_a_ceiling(self, q, k):
        sb = sphere_bound(q, k)
        ball = binom_le(q, k)
        assert sb * ball >= 1 << q > (sb - 1) * ball


class TestCharacter:
    @pytest.mark.parametrize("x0,x1,expected", [(3, 1, 4), (0, 1, 0), (1, 0, 1), (0, 0, None)])
    def test_examples(self, x0, x1, expected):
        assert character(x0, x1) == expected

    @given(st.integers(0, 10**6), st.integers(0, 10**6))
    def test_is_largest_solution(self, x0, x1):
        c = character(x0, x1)
        if c is None:
            assert x0 == x1 == 0
            return
        assert (c + 1) * x0 + x1 >= 2**c
        assert all((q + 1) * x0 + x1 < 2**q for q in range(c + 1, 64))


class TestOrders:
    def test_examples(self):
        assert majorizes((3, 1), (2, 2)) and not covers((3, 1), (2, 2))
        assert majorizes((2, 2), (2, 2)) and covers((2, 2), (2, 2))
        assert not majorizes((2, 2), (3, 1))

    def test_shape(self):
        with pytest.raises(ShapeError):
            covers((1, 2), (1, 2, 3))
        with pytest.raises(ShapeError):
            majorizes((1,), (1, 2))

    @given(state_and_question(max_entry=50))
    def test_covering_implies_majorizing(self, xa):
        x, y = xa  # y <= x componentwise by construction
        assert covers(x, y) and majorizes(x, y)
