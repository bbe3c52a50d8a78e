"""Schema-level behavior: insight-range grammar, timestamps, record and job
validation, serialization round-trips."""

from __future__ import annotations

from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adtracker.domain import (
    SENTINEL_UPPER,
    ActiveStatus,
    AdQuery,
    DemographicShare,
    Gender,
    InsightRange,
    JobSpec,
    Platform,
    RegionalShare,
    Visibility,
    ad_record_from_dict,
    ad_record_to_dict,
    format_insight_range,
    format_rfc3339,
    job_spec_from_payload,
    job_spec_to_dict,
    parse_insight_range,
    parse_rfc3339,
    range_midpoint,
    validate_ad_record,
    validate_job_spec,
)
from adtracker.errors import InvalidWindow, MalformedPayload, MalformedRange
from adtracker.provider import generate_ads


# -- insight ranges -----------------------------------------------------------


@pytest.mark.parametrize(
    "text,expected",
    [
        ("1000-4999", (1000, 4999)),
        ("0", (0, 0)),
        ("<100", (0, 99)),
        (">5000", (5000, SENTINEL_UPPER)),
        ("1,000-4,999", (1000, 4999)),
        ("  25-30 ", (25, 30)),
        ("1000000", (1000000, 1000000)),
    ],
)
def test_parse_insight_range_grammar(text, expected):
    r = parse_insight_range(text)
    assert (r.lower, r.upper) == expected


@pytest.mark.parametrize(
    "text",
    ["5000-100", "", "abc", "-5", "<0", "10-", "-", "1.5-2.5", "10--20", None],
)
def test_parse_insight_range_rejects(text):
    with pytest.raises(MalformedRange):
        parse_insight_range(text)


def test_insight_range_invariants():
    with pytest.raises(MalformedRange):
        InsightRange(10, 5)
    with pytest.raises(MalformedRange):
        InsightRange(-1, 5)


@pytest.mark.parametrize(
    "r,mid",
    [
        (InsightRange(1000, 4999), 2999.5),
        (InsightRange(0, 0), 0),
        (InsightRange(5000, SENTINEL_UPPER), 5000),
    ],
)
def test_range_midpoint(r, mid):
    assert range_midpoint(r) == mid


@given(
    lower=st.integers(min_value=0, max_value=10**9),
    span=st.integers(min_value=0, max_value=10**9),
)
def test_range_format_parse_round_trip(lower, span):
    # parse is total on its grammar: format-then-parse restores (L, U)
    r = InsightRange(lower, lower + span)
    assert parse_insight_range(format_insight_range(r)) == r


# -- timestamps ---------------------------------------------------------------


@pytest.mark.parametrize(
    "text,epoch",
    [
        ("1970-01-01T00:00:00Z", 0),
        ("2020-01-01T00:00:00Z", 1577836800),
        ("2020-01-01T01:00:00+01:00", 1577836800),
        ("2020-06-15T12:30:45Z", 1592224245),
    ],
)
def test_parse_rfc3339(text, epoch):
    assert parse_rfc3339(text) == epoch


def test_parse_rfc3339_rejects_garbage():
    with pytest.raises(MalformedPayload):
        parse_rfc3339("not-a-time")


@given(st.integers(min_value=0, max_value=4102444800))
def test_rfc3339_round_trip(epoch):
    assert parse_rfc3339(format_rfc3339(epoch)) == epoch


# -- ad record validation -----------------------------------------------------


def _valid_ad():
    return generate_ads(3, 1)[0]


def test_generated_records_pass_validation():
    for ad in generate_ads(11, 50):
        assert validate_ad_record(ad) == []


def test_validate_rejects_missing_ids():
    ad = _valid_ad()
    assert validate_ad_record(replace(ad, ad_id="")) != []
    assert validate_ad_record(replace(ad, page_id="")) != []


def test_validate_rejects_delivery_order():
    ad = _valid_ad()
    bad = replace(ad, delivery_start=200, delivery_stop=100)
    assert any("delivery" in p for p in validate_ad_record(bad))


def test_validate_requires_currency_with_spend():
    ad = _valid_ad()
    assert ad.spend is not None
    bad = replace(ad, currency=None)
    assert any("currency" in p for p in validate_ad_record(bad))


def test_validate_rejects_duplicate_region():
    ad = _valid_ad()
    share = RegionalShare("CA", "Ontario", 10.0)
    bad = replace(ad, regional_distribution=(share, share))
    assert validate_ad_record(bad) != []


def test_validate_rejects_percent_overflow():
    ad = _valid_ad()
    shares = (
        RegionalShare("CA", "Ontario", 60.0),
        RegionalShare("CA", "Quebec", 41.0),
    )
    bad = replace(ad, regional_distribution=shares)
    assert any("sum" in p for p in validate_ad_record(bad))


def test_percent_sum_tolerance_allows_rounding_noise():
    ad = _valid_ad()
    shares = (
        RegionalShare("CA", "Ontario", 60.0),
        RegionalShare("CA", "Quebec", 40.4),
    )
    assert validate_ad_record(replace(ad, regional_distribution=shares)) == []


def test_validate_rejects_unknown_country_and_bad_gender():
    ad = _valid_ad()
    bad = replace(ad, regional_distribution=(RegionalShare("ZZ", "Nowhere", 5.0),))
    assert validate_ad_record(bad) != []
    with pytest.raises(ValueError):
        DemographicShare("25-34", Gender("other"), 5.0)


def test_ad_record_dict_round_trip():
    for ad in generate_ads(5, 25):
        assert ad_record_from_dict(ad_record_to_dict(ad)) == ad


def test_ad_record_from_dict_rejects_junk():
    with pytest.raises(MalformedPayload):
        ad_record_from_dict({"ad_id": "1"})
    with pytest.raises(MalformedPayload):
        ad_record_from_dict("nope")


def test_analysis_time_prefers_delivery_start():
    ad = replace(_valid_ad(), creation_time=100, delivery_start=200, delivery_stop=None)
    assert ad.analysis_time == 200
    assert replace(ad, delivery_start=None, delivery_stop=None).analysis_time == 100


# -- job specs ----------------------------------------------------------------


def _ok_spec(**kw):
    base = dict(
        search_term="Trump",
        reached_countries=("CA",),
        active_status=ActiveStatus.ACTIVE,
        platforms=(Platform.FACEBOOK,),
    )
    base.update(kw)
    return JobSpec(**base)


def test_validate_job_spec_accepts_reference_spec():
    assert validate_job_spec(_ok_spec()) == []


def test_validate_job_spec_is_idempotent():
    spec = _ok_spec()
    assert validate_job_spec(spec) == []
    assert validate_job_spec(spec) == []


def test_validate_job_spec_collects_violations():
    spec = _ok_spec(search_term="", reached_countries=("ZZ",), platforms=())
    codes = {v.code for v in validate_job_spec(spec)}
    assert codes == {"empty_search_term", "unknown_country_code", "empty_platform_list"}


def test_validate_job_spec_flags_duplicate_platform():
    spec = _ok_spec(platforms=(Platform.FACEBOOK, Platform.FACEBOOK))
    assert {v.code for v in validate_job_spec(spec)} == {"duplicate_platform"}


def test_job_spec_payload_resolves_aliases():
    spec, violations = job_spec_from_payload(
        {
            "search_term": "vote",
            "reached_countries": ["england", "usa"],
            "active_status": "all",
            "platforms": ["facebook"],
        }
    )
    assert violations == []
    assert spec.reached_countries == ("GB", "US")


def test_job_spec_payload_rejects_unknown_tokens():
    spec, violations = job_spec_from_payload(
        {
            "search_term": "vote",
            "reached_countries": ["Atlantis"],
            "active_status": "RUNNING",
            "platforms": ["myspace"],
        }
    )
    assert spec is None
    codes = {v.code for v in violations}
    assert "unknown_country_code" in codes
    assert "unknown_enum_token" in codes


def test_job_spec_dict_round_trip():
    spec = _ok_spec(visibility=Visibility.PUBLIC)
    restored, violations = job_spec_from_payload(job_spec_to_dict(spec))
    assert violations == []
    assert restored == spec


def test_ad_query_rejects_inverted_window():
    with pytest.raises(InvalidWindow):
        AdQuery(requesting_user="acct-1", time_window=(10, 5))
