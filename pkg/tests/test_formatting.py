import pytest
from hypothesis import given
from hypothesis import strategies as st

from strategos.formatting import check_arithmetic, fmt_num, normalize_ws


class TestFmtNum:
    @pytest.mark.parametrize(
        "value,expected",
        [
            (5, "5"),
            (5.0, "5"),
            (-2, "-2"),
            (0.75, "0.75"),
            (1.25, "1.25"),
            (6.5, "6.5"),
            (0.0, "0"),
            (10 / 2, "5"),
        ],
    )
    def test_examples(self, value, expected):
        assert fmt_num(value) == expected

    @given(st.integers(-10**6, 10**6))
    def test_integers_have_no_point(self, n):
        assert "." not in fmt_num(n)

    @given(st.floats(allow_nan=False, allow_infinity=False, width=32))
    def test_round_trips(self, x):
        assert float(fmt_num(x)) == pytest.approx(float(x), rel=1e-6, abs=1e-9)


class TestNormalizeWs:
    def test_collapses_runs_and_blank_lines(self):
        a = "x  =  1\n\n\n y\t z \n"
        b = "x = 1\ny z"
        assert normalize_ws(a) == normalize_ws(b)

    def test_distinguishes_content(self):
        assert normalize_ws("x=1") != normalize_ws("x=2")


class TestCheckArithmetic:
    GOOD = [
        "So, Bob's expected reward for b1 is (r11+r21)/2 = (7+3)/2 = 10/2 = 5",
        "Value of proposal for Alice: (3*1) + (1*3) + (0*2) = 3+3+0 = 6/10",
        "Difference in payoffs 8-6 = 2.",
        "Bob wants 0/1 = 0 book, 3/4 = 0.75 hat, 1/1 = 1 balls.",
        "Updated belief: book: 0+0=0, hat: 0.75+0.5=1.25, balls: 1+1=2",
        "So, Alice gets (1-0)=1 books, (4-3)=1 hats, (1-1)=0 balls.",
        "If Bob plays b1, exepected reward for b1 is search(Bob, Gopher, max, b1) = 0.",
        "So, Bob will play compare(Bob, max, [b1=0, b2=0]) = [b1,b2].",
        "Expected reward for Bob = mean([r11, r21]) = mean([7, 3]) = 5.",
        "So, Gopher's expected reward for a1 is (r11+r12)/2 = (-3+-1)/2 = -4/2 = -2",
        "As a1=8, a2=4, 8>4, a1>a2, Gopher will play a1.",
        "weighted 0.5*8 + 0.5*3 = 4+1.5 = 5.5",
    ]
    BAD = [
        "So, Bob's expected reward for b1 is (7+3)/2 = 11/2 = 5",
        "Difference in payoffs 8-6 = 3.",
        "Value of proposal for Alice: (3*1) + (1*3) + (0*2) = 3+3+0 = 7/10",
        "Updated belief: hat: 0.75+0.5=1.3",
        "So, Bob gets (3-3)=1 books.",
    ]

    @pytest.mark.parametrize("text", GOOD)
    def test_honest_lines_pass(self, text):
        assert check_arithmetic(text) == []

    @pytest.mark.parametrize("text", BAD)
    def test_dishonest_lines_flagged(self, text):
        assert check_arithmetic(text) != []

    def test_division_by_zero_flagged(self):
        assert check_arithmetic("ratio 3/0 = 7") != []
