import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewflow.errors import OutOfRange, SearchLimitExceeded
from skewflow.odometer import (
    BlockSchedule,
    OdometerPoint,
    add,
    block_at,
    eval_e,
    first_difference,
    first_zero_block,
    metric_d,
    tau,
    unval,
)

bits = st.lists(st.integers(0, 1), max_size=12).map(tuple)
tails = st.lists(st.integers(0, 1), min_size=1, max_size=4).map(tuple)
points = st.builds(OdometerPoint, bits, tails)


def naive_digits(p, n):
    """Digits straight from the stored words, no canonical form involved."""
    out = list(p.prefix)
    while len(out) < n:
        out.extend(p.tail)
    return tuple(out[:n])


# -- literals and canonical form --


@pytest.mark.parametrize("text, prefix, tail", [
    ("110*0", (1, 1), (0,)),
    ("*1", (), (1,)),
    ("01(10)", (0, 1), (1, 0)),
    ("0110(10)", (0, 1), (1, 0)),
    ("", (), (0,)),
    ("0000", (), (0,)),
    ("1(11)", (), (1,)),
])
def test_parse_canonical(text, prefix, tail):
    p = OdometerPoint.parse(text)
    assert (p.prefix, p.tail) == (prefix, tail)


def test_str_round_trip_examples():
    for text in ("11*0", "*1", "01(10)", "*0"):
        assert str(OdometerPoint.parse(text)) == text
    assert str(OdometerPoint.parse("110*0")) == "11*0"


@given(points)
def test_str_round_trip(p):
    assert OdometerPoint.parse(str(p)) == p


@given(bits, tails)
def test_canonical_form_keeps_digits(prefix, tail):
    raw = OdometerPoint.__new__(OdometerPoint)
    object.__setattr__(raw, "prefix", prefix)
    object.__setattr__(raw, "tail", tail)
    p = OdometerPoint(prefix, tail)
    assert p.digits(1, 40) == naive_digits(raw, 40)


def test_equality_is_digitwise():
    assert OdometerPoint((1, 0), (1, 0)) == OdometerPoint((), (1, 0))
    assert OdometerPoint((), (0, 1, 0, 1)) == OdometerPoint((), (0, 1))
    assert OdometerPoint.parse("1*0") != OdometerPoint.parse("*1")


def test_bad_literal():
    with pytest.raises(ValueError):
        OdometerPoint.parse("12*0")


# -- tau and add against integer arithmetic --


def test_tau_carries_right():
    assert tau(OdometerPoint.parse("110*0")) == OdometerPoint.parse("001*0")
    assert tau(OdometerPoint.parse("*1")) == OdometerPoint.zero()
    assert tau(OdometerPoint.parse("1(10)")) == OdometerPoint.parse("001(10)")


@given(st.integers(-(1 << 80), 1 << 80), st.integers(-(1 << 80), 1 << 80))
def test_add_matches_integers(a, m):
    # Z embeds in Z(2): n <-> its two's complement digits
    assert add(OdometerPoint.from_int(a), m) == OdometerPoint.from_int(a + m)


@given(st.integers(0, 1 << 40))
def test_from_int_digits(n):
    assert OdometerPoint.from_int(n).low_value(48) == n
    assert OdometerPoint.from_int(-1 - n).low_value(48) == (1 << 48) - 1 - n


@given(points, st.integers(-(1 << 20), 1 << 20), st.integers(-(1 << 20), 1 << 20))
def test_add_is_an_action(p, a, b):
    assert add(add(p, a), b) == add(p, a + b)


@given(points, st.integers(0, 300))
def test_add_equals_repeated_tau(p, m):
    q = p
    for _ in range(m):
        q = tau(q)
    assert add(p, m) == q


@given(points, st.integers(1, 64))
def test_add_low_digits_mod_power_of_two(p, n):
    m = 12345
    assert add(p, m).low_value(n) == (p.low_value(n) + m) % (1 << n)


def test_periodic_tail_add():
    # (10) is 1 + 4 + 16 + ... = -1/3 and (01) is -2/3
    third, two_thirds = OdometerPoint.parse("(10)"), OdometerPoint.parse("(01)")
    assert add(two_thirds, 1) == OdometerPoint.parse("11(01)")
    assert add(third, -1) == OdometerPoint.parse("00(10)")
    assert add(add(third, 1 << 70), -(1 << 70)) == third


# -- metric --


@given(points, points)
def test_metric_symmetric_and_ultrametric_values(p, q):
    d = metric_d(p, q)
    assert d == metric_d(q, p)
    assert (d == 0) == (p == q)
    if d:
        i = first_difference(p, q)
        assert d == 1 / i
        assert p.digits(1, i - 1) == q.digits(1, i - 1)
        assert p.digit(i) != q.digit(i)


@given(points, points, points)
def test_ultrametric_inequality(p, q, r):
    assert metric_d(p, r) <= max(metric_d(p, q), metric_d(q, r))


@given(points, st.integers(1, 1 << 30))
def test_tau_is_an_isometry(p, m):
    q = add(p, m)
    assert metric_d(tau(p), tau(q)) == metric_d(p, q)


def test_metric_examples():
    assert metric_d(OdometerPoint.zero(), OdometerPoint.parse("1*0")) == 1.0
    assert metric_d(OdometerPoint.zero(), OdometerPoint.parse("0001*0")) == 0.25


# -- evaluation function --


@given(st.integers(1, 20).flatmap(lambda w: st.tuples(st.just(w), st.integers(0, (1 << w) - 1))))
def test_eval_unval_inverse(wn):
    w, n = wn
    word = unval(n, w)
    assert len(word) == w
    assert eval_e(word) == n


def test_eval_is_least_significant_first():
    assert eval_e((1, 1, 0)) == 3
    assert eval_e((0, 0, 1)) == 4
    assert eval_e(()) == 0


def test_unval_out_of_range():
    with pytest.raises(OutOfRange):
        unval(8, 3)
    with pytest.raises(OutOfRange):
        unval(-1, 3)


# -- schedules and blocks --


def test_schedule_extensions():
    assert [BlockSchedule((3, 3)).n(k) for k in range(1, 6)] == [3, 3, 3, 3, 3]
    ar = BlockSchedule((3, 3, 4, 4), "arithmetic")
    assert [ar.n(k) for k in range(1, 9)] == [3, 3, 4, 4, 5, 5, 6, 6]
    ge = BlockSchedule((3, 4), "geometric")
    assert [ge.n(k) for k in range(1, 6)] == [3, 4, 6, 8, 12]


def test_schedule_offsets_and_big_m():
    s = BlockSchedule((3, 3, 4, 4), "arithmetic")
    assert s.offset(0) == 0 and s.offset(4) == 14
    assert s.m(2) == 64
    assert s.m(40) == 1 << s.offset(40)
    assert s.m(40).bit_length() > 64
    assert s.half(3) == 7


@pytest.mark.parametrize("blocks", [(1, 3), (4, 3), ()])
def test_schedule_rejects(blocks):
    with pytest.raises(ValueError):
        BlockSchedule(blocks)


def test_schedule_warns_at_two():
    with pytest.warns(UserWarning):
        BlockSchedule((2, 3))


def test_blocks_and_first_zero_block():
    s = BlockSchedule((3, 3))
    p = OdometerPoint.parse("111110*0")
    assert block_at(p, s, 1) == (1, 1, 1)
    assert block_at(p, s, 2) == (1, 1, 0)
    assert first_zero_block(p, s) == 2
    assert first_zero_block(OdometerPoint.zero(), s) == 1
    assert first_zero_block(OdometerPoint.ones(), s) is None
    with pytest.raises(SearchLimitExceeded):
        first_zero_block(OdometerPoint.parse("1" * 30 + "*0"), s, search_limit=5)


@given(points)
def test_blocks_tile_the_digits(p):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s = BlockSchedule((2, 3), "arithmetic")
    joined = sum((block_at(p, s, k) for k in range(1, 6)), ())
    assert joined == p.digits(1, s.offset(5))
