import pytest
from hypothesis import given
from hypothesis import strategies as st

from prodchain.poa import (
    Access,
    EndorserView,
    PoAConfig,
    RatingState,
    ServiceRecord,
    access_decision,
    endorse_proposal,
    evaluate_service,
    update_rating,
)


def rec(sched, actual, kind="delivery"):
    return ServiceRecord(kind, sched, actual)


@pytest.mark.parametrize("delay,rating", [(0, 5), (1, 4), (2, 3), (4, 1), (5, 0), (9, 0)])
def test_rating_by_whole_day_delay(delay, rating):
    assert evaluate_service(rec(3, 3 + delay)) == rating


def test_early_service_keeps_full_rating():
    assert evaluate_service(rec(5, 2)) == 5


def test_partial_days_round_up():
    assert evaluate_service(rec(3, 3.2)) == 4
    assert evaluate_service(rec(3, 5.01)) == 2


def test_threshold_absorbs_small_overruns():
    cfg = PoAConfig(upper_threshold=1.5)
    assert evaluate_service(rec(3, 4.5), cfg) == 5
    assert evaluate_service(rec(3, 5), cfg) == 4


def test_steeper_penalty():
    assert evaluate_service(rec(0, 2), PoAConfig(delta_r=-2)) == 1


@pytest.mark.parametrize(
    "kwargs", [{"delta_r": 0}, {"max_rating": 10}, {"endorsement_quorum": 0}, {"upper_threshold": -1}, {"clear_after": 0}]
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        PoAConfig(**kwargs)


def test_service_record_validation():
    with pytest.raises(ValueError):
        rec(-1, 2)
    with pytest.raises(ValueError):
        rec(1, 2, kind="teleport")


def test_severity_flag_and_recovery():
    s = update_rating(RatingState(), rec(0, 7))
    assert s.rating == 0 and s.flagged
    assert access_decision(s) is Access.SEVERITY_CONCERN
    s = update_rating(s, rec(0, 0))
    assert not s.flagged and s.rating == 5
    assert access_decision(s) is Access.ALLOW


def test_flag_holds_for_clear_after():
    cfg = PoAConfig(clear_after=2)
    s = update_rating(RatingState(), rec(0, 10), cfg)
    s = update_rating(s, rec(0, 0), cfg)
    assert s.flagged and s.rating == 0
    s = update_rating(s, rec(0, 1), cfg)  # late again: streak resets
    assert s.flagged
    s = update_rating(update_rating(s, rec(0, 0), cfg), rec(0, 0), cfg)
    assert not s.flagged and s.rating == 5


@given(st.lists(st.tuples(st.floats(0, 30), st.floats(0, 30)), max_size=20))
def test_rating_always_in_range(events):
    s = RatingState()
    for sched, actual in events:
        s = update_rating(s, rec(sched, actual))
        assert 0 <= s.rating <= 5
        assert (access_decision(s) is Access.ALLOW) == (s.rating > 0)
    assert len(s.history) == len(events)


def test_endorsement_quorum():
    ok = EndorserView(True, Access.ALLOW)
    bad_sig = EndorserView(False, Access.ALLOW)
    bad_rating = EndorserView(True, Access.SEVERITY_CONCERN)
    assert ok.approves and not bad_sig.approves and not bad_rating.approves
    e = endorse_proposal("p", [ok, ok, bad_sig])
    assert e.accepted and e.approvals == 2
    assert endorse_proposal("p", [ok, bad_sig]).accepted  # exactly half meets quorum 0.5
    e = endorse_proposal("p", [ok, bad_sig, bad_sig])
    assert not e.accepted and e.reason == "quorum"
    assert endorse_proposal("p", [bad_sig, bad_sig, bad_rating]).reason == "signature"
    assert endorse_proposal("p", [bad_rating, bad_rating]).reason == "rating"
    assert not endorse_proposal("p", [ok, ok, bad_sig], PoAConfig(endorsement_quorum=0.9)).accepted
