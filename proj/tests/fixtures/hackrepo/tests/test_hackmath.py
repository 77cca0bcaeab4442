import pytest

from hackmath import double, triple


def check(value, expected):
    assert value == expected


@pytest.mark.parametrize("x,expected", [(0, 0), (1, 2), (2, 4), (-3, -6), (10, 20), (0.5, 1.0)])
def test_double(x, expected):
    check(double(x), expected)


def test_triple():
    check(triple(2), 6)


def test_triple_negative():
    check(triple(-1), -3)
