import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewflow import circle
from skewflow.circle import IDENTITY, ArcPower, Rotation
from skewflow.errors import IndexOutOfRange, ValidationFailure
from skewflow.family import PRESETS, CocycleFamily, TRule, preset, reference_family, validate_family
from skewflow.odometer import BlockSchedule

REF = reference_family()


def literal(fam, k, lo, hi):
    h = IDENTITY
    for j in range(lo, hi + 1):
        h = circle.compose(fam.phi(k, j), h)
    return h


def test_reference_parameters():
    assert [REF.n(k) for k in range(1, 7)] == [3, 3, 4, 4, 5, 5]
    assert REF.theta(1) == Fraction(1, 3)
    assert REF.theta(2) == Fraction(1, 7)
    assert REF.t(1) == 1.5 and REF.t(3) == 1.125
    assert REF.level_map(1) == Rotation(Fraction(1, 3))
    assert REF.level_map(2) == ArcPower(1, math.log(1.5))


def test_branches_balance():
    for k in range(1, 5):
        H = REF.schedule.half(k)
        signs = [REF.branch(k, j) for j in range(REF.max_index(k) + 1)]
        assert signs[0] == 0
        assert signs.count(1) == H and signs.count(-1) == H
        assert signs == sorted(signs, key=lambda b: {0: 0, 1: 1, -1: 2}[b])


def test_branch_out_of_range():
    with pytest.raises(IndexOutOfRange):
        REF.phi(1, 7)
    with pytest.raises(IndexOutOfRange):
        REF.phi(1, -1)


def test_phi_zero_is_identity():
    for k in range(1, 8):
        assert REF.phi(k, 0) is IDENTITY


@given(st.integers(1, 6), st.data())
def test_segment_matches_literal_composition(k, data):
    top = REF.max_index(k)
    lo = data.draw(st.integers(0, top))
    hi = data.draw(st.integers(lo - 1, top))
    assert REF.segment(k, lo, hi) == literal(REF, k, lo, hi)


def test_net_counts():
    # block value e: net power of phi^(e-1) o ... o phi^0
    H = REF.schedule.half(1)
    assert REF.net_count(1, 0) == 0
    assert REF.net_count(1, 1) == 0
    assert REF.net_count(1, H + 1) == H
    assert REF.net_count(1, 2 * H + 1) == 0
    assert [REF.net_count(1, e) for e in range(8)] == [0, 0, 1, 2, 3, 2, 1, 0]


def test_printed_branch_rule_breaks_cancellation():
    fam = CocycleFamily(REF.schedule, REF.t_rule, branch_rule="printed")
    assert fam.phi(1, 1) is IDENTITY
    assert fam.segment(1, 0, fam.max_index(1)) != IDENTITY
    rep = validate_family(fam)
    assert not rep.ok
    assert rep.failures[0][0] == "C3"
    with pytest.raises(ValidationFailure) as err:
        validate_family(fam, strict=True)
    assert err.value.condition == "C3" and err.value.level == 1


def test_t_rules():
    s = BlockSchedule((3, 3, 4, 4, 5, 5))
    assert TRule("one_plus_pow2").excess(3, s) == 0.125
    assert TRule("count_scaled", rate=3.5).excess(3, s) == pytest.approx(3.5 * 3 / 15)
    ex = TRule("explicit", values=(2.0, 1.5))
    assert [1 + ex.excess(k, s) for k in (1, 2, 3, 4)] == [2.0, 1.5, 1.25, 1.125]
    assert TRule("identity").excess(5, s) == 0.0
    with pytest.raises(ValueError):
        TRule("explicit", values=(0.5,))
    with pytest.raises(ValueError):
        TRule("bogus")


def test_log_t_has_no_cancellation():
    fam = CocycleFamily(BlockSchedule((3, 3, 40, 40)), TRule("count_scaled"))
    assert fam.log_t(2) == pytest.approx(2 / fam.schedule.half(4), rel=1e-12)


def test_dict_round_trip():
    for fam in PRESETS.values():
        assert CocycleFamily.from_dict(fam.to_dict()) == fam
    assert CocycleFamily.from_dict({"schedule": [3, 3]}).t_rule == TRule()


def test_presets():
    c5, c6 = preset("proximal-c5"), preset("almost-proximal-c6-n3")
    assert c5.arcs == 1 and c6.arcs == 3
    assert [c5.n(k) for k in range(1, 7)] == [3, 3, 4, 4, 5, 5]
    assert c5.schedule == c6.schedule
    with pytest.raises(KeyError):
        preset("nope")


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_validate(name):
    rep = validate_family(preset(name), levels=8)
    assert rep.ok, rep.failures
    assert rep.c1_decreasing
    assert all(lc.c3_deviation == 0.0 for lc in rep.levels)


def test_c1_failure_is_reported():
    fam = CocycleFamily(REF.schedule, TRule("explicit", values=(1.2, 1.5)))
    rep = validate_family(fam)
    assert ("C1", 4) == rep.failures[0][:2]
    assert not rep.c1_decreasing


def test_identity_families_pass_c1():
    fam = CocycleFamily(REF.schedule, TRule("identity"), rotation_rule="identity")
    rep = validate_family(fam)
    assert rep.ok
    assert all(lc.c1_sup == 0.0 for lc in rep.levels)


def test_validation_report_dict():
    d = validate_family(REF).to_dict()
    assert d["ok"] and len(d["levels"]) == 6
    assert d["levels"][0]["kind"] == "rotation"
