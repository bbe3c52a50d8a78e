"""Store behavior: deduplicating upserts, batch atomicity, windowed snapshot
queries with visibility rules, and job/account persistence."""

from __future__ import annotations

from dataclasses import replace

import pytest

from adtracker.domain import (
    AccountStatus,
    ActiveStatus,
    AdQuery,
    InsightRange,
    Job,
    JobSpec,
    JobState,
    Platform,
    Visibility,
    provider_fields_json,
)
from adtracker.errors import StorageFailure, Unauthorized, UnknownJob
from adtracker.provider import generate_ads
from adtracker.store import Store
from conftest import MockClock


def _job(job_id="job-1", owner="acct-x", visibility=Visibility.PRIVATE) -> Job:
    spec = JobSpec(
        search_term="campaign",
        reached_countries=("CA",),
        active_status=ActiveStatus.ALL,
        platforms=(Platform.FACEBOOK,),
        visibility=visibility,
    )
    return Job(job_id=job_id, owner=owner, spec=spec, created_at=0, state=JobState.ACTIVE)


@pytest.fixture
def seeded(store, manager):
    store.put_job(_job("job-1", owner=manager.account_id))
    return store


# -- upserts ------------------------------------------------------------------


def test_fresh_batch_all_inserted(seeded):
    ads = generate_ads(1, 10)
    report = seeded.upsert_ads("job-1", ads)
    assert (report.inserted, report.updated, report.unchanged, report.skipped_invalid) == (10, 0, 0, 0)


def test_reapplied_batch_all_unchanged(seeded):
    ads = generate_ads(1, 10)
    seeded.upsert_ads("job-1", ads)
    report = seeded.upsert_ads("job-1", ads)
    assert (report.inserted, report.updated, report.unchanged, report.skipped_invalid) == (0, 0, 10, 0)


def test_mutated_subset_counts_updated(seeded):
    ads = generate_ads(1, 10)
    seeded.upsert_ads("job-1", ads)
    mutated = [
        replace(ad, impressions=InsightRange(1, 2)) if i < 3 else ad
        for i, ad in enumerate(ads)
    ]
    report = seeded.upsert_ads("job-1", mutated)
    assert (report.inserted, report.updated, report.unchanged) == (0, 3, 7)


def test_invalid_records_skipped_not_fatal(seeded):
    ads = generate_ads(1, 5)
    bad = replace(ads[0], ad_id="")
    report = seeded.upsert_ads("job-1", [bad, *ads[1:]])
    assert report.skipped_invalid == 1 and report.inserted == 4


def test_upsert_unknown_job_rejected(store):
    with pytest.raises(UnknownJob):
        store.upsert_ads("job-missing", generate_ads(1, 1))


def test_upsert_updates_refresh_last_seen_only(seeded, clock):
    ads = generate_ads(1, 4)
    seeded.upsert_ads("job-1", ads)
    before = {a.ad_id: a for a in seeded.all_ads()}
    clock.advance(100)
    seeded.upsert_ads("job-1", ads)
    after = {a.ad_id: a for a in seeded.all_ads()}
    for ad_id, ad in after.items():
        assert ad.last_seen == before[ad_id].last_seen + 100
        assert ad.first_seen == before[ad_id].first_seen
        assert provider_fields_json(ad) == provider_fields_json(before[ad_id])


def test_dedup_across_jobs(seeded, manager):
    seeded.put_job(_job("job-2", owner=manager.account_id))
    ads = generate_ads(1, 8)
    seeded.upsert_ads("job-1", ads)
    seeded.upsert_ads("job-2", ads)
    assert seeded.count_ads() == 8


def test_batch_atomicity_under_fault(seeded):
    # a mid-batch storage fault must roll back the entire batch
    ads = generate_ads(1, 10)
    calls = {"n": 0}

    def explode():
        calls["n"] += 1
        if calls["n"] == 6:
            raise StorageFailure("disk went away")

    seeded.fault_hook = explode
    with pytest.raises(StorageFailure):
        seeded.upsert_ads("job-1", ads)
    seeded.fault_hook = None
    assert seeded.count_ads() == 0
    report = seeded.upsert_ads("job-1", ads)
    assert report.inserted == 10


def test_identity_change_logged_and_updated(seeded, caplog):
    ads = generate_ads(1, 1)
    seeded.upsert_ads("job-1", ads)
    with caplog.at_level("WARNING"):
        report = seeded.upsert_ads("job-1", [replace(ads[0], body="rewritten text")])
    assert report.updated == 1
    assert any("identity" in r.message for r in caplog.records)


# -- queries ------------------------------------------------------------------


def test_query_requires_approved_account(seeded, accounts):
    pending = accounts.sign_up("pending@example.org", "pending-password")
    with pytest.raises(Unauthorized):
        seeded.query_ads(AdQuery(requesting_user=pending.account_id))
    with pytest.raises(Unauthorized):
        seeded.query_ads(AdQuery(requesting_user="acct-ghost"))


def test_query_window_matches_linear_scan(seeded, manager):
    ads = generate_ads(17, 120)
    seeded.upsert_ads("job-1", ads)
    lo = min(a.analysis_time for a in ads) + 10_000_000
    hi = max(a.analysis_time for a in ads) - 10_000_000
    got = seeded.query_ads(AdQuery(requesting_user=manager.account_id, time_window=(lo, hi)))
    expected = sorted(
        (a for a in ads if lo <= a.analysis_time <= hi),
        key=lambda a: (a.analysis_time, a.ad_id),
    )
    assert [a.ad_id for a in got] == [a.ad_id for a in expected]


def test_query_empty_point_window(seeded, manager):
    ads = generate_ads(17, 20)
    seeded.upsert_ads("job-1", ads)
    t = min(a.analysis_time for a in ads) - 1
    assert seeded.query_ads(AdQuery(requesting_user=manager.account_id, time_window=(t, t))) == []


def test_query_page_filter(seeded, manager):
    ads = generate_ads(17, 40)
    seeded.upsert_ads("job-1", ads)
    target = ads[0].page_id
    got = seeded.query_ads(
        AdQuery(requesting_user=manager.account_id, page_ids=frozenset({target}))
    )
    assert got and all(a.page_id == target for a in got)


def test_private_job_invisible_to_non_owner(store, accounts, manager):
    other = accounts.sign_up("other@example.org", "other-password-1")
    other = accounts.review(manager, other.account_id, AccountStatus.APPROVED)
    store.put_job(_job("job-priv", owner=manager.account_id, visibility=Visibility.PRIVATE))
    store.put_job(_job("job-pub", owner=manager.account_id, visibility=Visibility.PUBLIC))
    priv_ads, pub_ads = generate_ads(3, 6), generate_ads(4, 6)
    store.upsert_ads("job-priv", priv_ads)
    store.upsert_ads("job-pub", pub_ads)

    seen = {a.ad_id for a in store.query_ads(AdQuery(requesting_user=other.account_id))}
    assert seen == {a.ad_id for a in pub_ads}
    # managers see everything
    seen_mgr = {a.ad_id for a in store.query_ads(AdQuery(requesting_user=manager.account_id))}
    assert seen_mgr == {a.ad_id for a in priv_ads} | {a.ad_id for a in pub_ads}


# -- job CRUD -----------------------------------------------------------------


def test_job_put_get_round_trip(store):
    job = _job("job-rt")
    store.put_job(job)
    assert store.get_job("job-rt") == job


def test_job_delete_then_get_unknown(store):
    store.put_job(_job("job-del"))
    store.delete_job("job-del")
    with pytest.raises(UnknownJob):
        store.get_job("job-del")
    with pytest.raises(UnknownJob):
        store.delete_job("job-del")


def test_deleted_job_keeps_shared_ads(store, manager):
    store.put_job(_job("job-a", owner=manager.account_id))
    store.put_job(_job("job-b", owner=manager.account_id))
    ads = generate_ads(9, 5)
    store.upsert_ads("job-a", ads)
    store.upsert_ads("job-b", ads)
    store.delete_job("job-a")
    assert store.count_ads() == 5
    assert {a.ad_id for a in store.ads_for_job("job-b")} == {a.ad_id for a in ads}
    assert store.ads_for_job("job-a") == []
    # deleted jobs are invisible to queries
    visible = store.query_ads(AdQuery(requesting_user=manager.account_id))
    assert {a.ad_id for a in visible} == {a.ad_id for a in ads}


def test_list_jobs_substring_and_visibility(store, accounts, manager):
    other = accounts.sign_up("peer@example.org", "peer-password-1")
    other = accounts.review(manager, other.account_id, AccountStatus.APPROVED)
    mine = _job("job-mine", owner=other.account_id)
    mine = replace(mine, spec=replace(mine.spec, search_term="Trump Canada"))
    store.put_job(mine)
    store.put_job(_job("job-secret", owner=manager.account_id, visibility=Visibility.PRIVATE))
    store.put_job(_job("job-open", owner=manager.account_id, visibility=Visibility.PUBLIC))

    ids = {j.job_id for j in store.list_jobs(other)}
    assert ids == {"job-mine", "job-open"}
    assert [j.job_id for j in store.list_jobs(other, "tRuMp")] == ["job-mine"]
    assert {j.job_id for j in store.list_jobs(manager)} == {"job-mine", "job-secret", "job-open"}
    # no filter at all behaves like the empty filter
    assert store.list_jobs(other, None) == store.list_jobs(other, "")


def test_jobs_persist_across_reopen(tmp_path, clock):
    store = Store(tmp_path, clock=clock)
    store.put_job(_job("job-keep"))
    store.upsert_ads("job-keep", generate_ads(2, 3))
    store.close()

    reopened = Store(tmp_path, clock=clock)
    try:
        job = reopened.get_job("job-keep")
        assert job.spec.search_term == "campaign"
        assert reopened.count_ads() == 3
    finally:
        reopened.close()


def test_update_job_poll_state_survives_delete(store, clock):
    from adtracker.domain import PollReport, UpsertReport

    store.put_job(_job("job-mid"))
    store.delete_job("job-mid")
    report = PollReport(started_at=1, finished_at=2, pages_fetched=1,
                        upsert=UpsertReport(inserted=5), errors=())
    store.update_job_poll_state("job-mid", 2, report)
    job = store.get_job("job-mid", include_deleted=True)
    assert job.last_report.upsert.inserted == 5
    assert job.state is JobState.DELETED
