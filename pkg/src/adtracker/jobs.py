"""Job management: registration, continuous poll cycles against the archive
provider, a worker-pool scheduler, and RFC-4180 CSV export."""

from __future__ import annotations

import csv
import io
import json
import logging
import secrets
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

from . import accounts as authz
from .domain import (
    Account,
    AdRecord,
    Job,
    JobSpec,
    JobState,
    PollReport,
    UpsertReport,
    format_insight_range,
    format_rfc3339,
    validate_job_spec,
)
from .errors import (
    AuthFailed,
    InvalidSpec,
    RateLimited,
    StorageFailure,
    TransportError,
    Unauthorized,
    UnknownJob,
)
from .provider import AdsProvider, PageCursor
from .store import Store

logger = logging.getLogger(__name__)

DEFAULT_POLL_INTERVAL_S = 300
DEFAULT_MAX_PAGES_PER_CYCLE = 40
DEFAULT_WORKER_COUNT = 4

# Bound on rate-limit suspensions within one cycle so a hostile wait hint
# cannot pin a worker forever.
_MAX_RATE_LIMIT_WAITS = 10

CSV_HEADER = (
    "ad_id,page_id,page_name,creation_time,body,link_caption,link_description,"
    "link_title,snapshot_url,spend_lower,spend_upper,currency,funded_entity,"
    "delivery_start,delivery_stop,impressions_lower,impressions_upper,"
    "potential_reach_lower,potential_reach_upper,regional_distribution,"
    "demographic_distribution"
)


@dataclass(frozen=True)
class JobRunnerConfig:
    poll_interval_s: int = DEFAULT_POLL_INTERVAL_S
    max_pages_per_cycle: int = DEFAULT_MAX_PAGES_PER_CYCLE
    worker_count: int = DEFAULT_WORKER_COUNT


class JobManager:
    """Registration, poll cycles, deletion, and export for search jobs."""

    def __init__(
        self,
        store: Store,
        provider: AdsProvider,
        config: JobRunnerConfig | None = None,
        clock: Callable[[], float] = time.time,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.store = store
        self.provider = provider
        self.config = config or JobRunnerConfig()
        self._clock = clock
        self._sleep = sleep
        # Set by an attached scheduler so registration can trigger an
        # immediate first poll.
        self.on_registered: Callable[[Job], None] | None = None

    def _now(self) -> int:
        return int(self._clock())

    def register_job(self, owner: Account, spec: JobSpec) -> Job:
        """Persist a validated job for an approved owner and enqueue its first
        poll (a job with no last_poll_at is immediately due)."""
        if owner.status.value != "APPROVED":
            raise Unauthorized("only approved accounts may register jobs")
        violations = validate_job_spec(spec)
        if violations:
            raise InvalidSpec(violations)
        job = Job(
            job_id=f"job-{secrets.token_hex(8)}",
            owner=owner.account_id,
            spec=spec,
            created_at=self._now(),
            state=JobState.ACTIVE,
        )
        self.store.put_job(job)
        if self.on_registered is not None:
            self.on_registered(job)
        return job

    def delete_job(self, user: Account, job_id: str) -> None:
        job = self.store.get_job(job_id)
        if not authz.authorize(user, authz.DELETE_JOB, job):
            raise Unauthorized("not the owner or a manager")
        self.store.delete_job(job_id)

    def run_poll_cycle(self, job: Job | str) -> PollReport:
        """One full pagination of the job's query with batch-atomic upserts.

        Rate-limit pushback suspends and resumes within the cycle; terminal
        errors end it early. All outcomes land in the PollReport; nothing is
        raised to the caller.
        """
        job_id = job if isinstance(job, str) else job.job_id
        started_at = self._now()
        total = UpsertReport()
        errors: list[tuple[str, str]] = []
        pages_fetched = 0
        cursor: PageCursor | None = None
        rate_limit_waits = 0

        while pages_fetched < self.config.max_pages_per_cycle:
            try:
                current = self.store.get_job(job_id)
            except UnknownJob:
                # Deleted mid-cycle: stop after the page already ingested.
                errors.append(("job_deleted", "job deleted during cycle"))
                break
            if current.state is not JobState.ACTIVE:
                break
            try:
                page = self.provider.fetch_page(current.spec, cursor)
            except RateLimited as exc:
                rate_limit_waits += 1
                if rate_limit_waits > _MAX_RATE_LIMIT_WAITS:
                    errors.append(("rate_limited", "gave up after repeated pushback"))
                    break
                self._sleep(exc.wait_s)
                continue
            except AuthFailed as exc:
                errors.append(("auth_failed", str(exc)))
                break
            except TransportError as exc:
                errors.append(("transport", str(exc)))
                break
            try:
                total = total + self.store.upsert_ads(job_id, page.ads)
            except UnknownJob:
                errors.append(("job_deleted", "job deleted during cycle"))
                break
            except StorageFailure as exc:
                errors.append(("storage", str(exc)))
                break
            if page.skipped_invalid:
                total = total + UpsertReport(skipped_invalid=page.skipped_invalid)
                errors.append(
                    ("malformed_payload", f"{page.skipped_invalid} records skipped")
                )
            pages_fetched += 1
            cursor = page.next_cursor
            if cursor is None:
                break

        finished_at = max(self._now(), started_at)
        report = PollReport(
            started_at=started_at,
            finished_at=finished_at,
            pages_fetched=pages_fetched,
            upsert=total,
            errors=tuple(errors),
        )
        try:
            self.store.update_job_poll_state(job_id, finished_at, report)
        except UnknownJob:
            logger.warning("job %s vanished before its report could be stored", job_id)
        return report

    # -- CSV export -----------------------------------------------------------

    def export_csv(self, user: Account, job_id: str) -> Iterator[bytes]:
        """Stream the job's ads as RFC-4180 CSV (UTF-8, CRLF rows), ordered by
        (analysis_time, ad_id)."""
        job = self.store.get_job(job_id)
        if not authz.authorize(user, authz.EXPORT_JOB, job):
            raise Unauthorized("job not visible to this account")
        ads = self.store.ads_for_job(job_id)
        return _csv_stream(ads)


def _opt_time_field(epoch: int | None) -> str:
    return "" if epoch is None else format_rfc3339(epoch)


def ad_to_csv_row(ad: AdRecord) -> list[str]:
    def bound(r, which: int) -> str:
        return "" if r is None else str((r.lower, r.upper)[which])

    regional = json.dumps(
        [
            {"country_code": s.country_code, "region_name": s.region_name,
             "percentage": s.percentage}
            for s in ad.regional_distribution
        ],
        separators=(",", ":"),
        ensure_ascii=False,
    )
    demographic = json.dumps(
        [
            {"age_range": s.age_range, "gender": s.gender.value,
             "percentage": s.percentage}
            for s in ad.demographic_distribution
        ],
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return [
        ad.ad_id,
        ad.page_id,
        ad.page_name,
        format_rfc3339(ad.creation_time),
        ad.body,
        ad.link_caption or "",
        ad.link_description or "",
        ad.link_title or "",
        ad.snapshot_url or "",
        bound(ad.spend, 0),
        bound(ad.spend, 1),
        ad.currency or "",
        ad.funded_entity or "",
        _opt_time_field(ad.delivery_start),
        _opt_time_field(ad.delivery_stop),
        bound(ad.impressions, 0),
        bound(ad.impressions, 1),
        bound(ad.potential_reach, 0),
        bound(ad.potential_reach, 1),
        regional,
        demographic,
    ]


def _csv_stream(ads: list[AdRecord]) -> Iterator[bytes]:
    buffer = io.StringIO()
    writer = csv.writer(buffer)  # csv defaults are RFC-4180: CRLF, doubled quotes
    writer.writerow(CSV_HEADER.split(","))
    yield buffer.getvalue().encode("utf-8")
    for ad in ads:
        buffer.seek(0)
        buffer.truncate(0)
        writer.writerow(ad_to_csv_row(ad))
        yield buffer.getvalue().encode("utf-8")


class PollScheduler:
    """Single coordinator dispatching due jobs to a bounded worker pool with
    per-job mutual exclusion."""

    def __init__(self, manager: JobManager, clock: Callable[[], float] = time.time):
        self._manager = manager
        self._clock = clock
        self._interval = manager.config.poll_interval_s
        self._executor = ThreadPoolExecutor(
            max_workers=manager.config.worker_count,
            thread_name_prefix="adtracker-poll",
        )
        self._in_flight: set[str] = set()
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        manager.on_registered = self._on_registered

    def _on_registered(self, job: Job) -> None:
        self._dispatch(job.job_id)

    def _dispatch(self, job_id: str) -> bool:
        with self._lock:
            if job_id in self._in_flight:
                return False
            self._in_flight.add(job_id)
        self._executor.submit(self._run_one, job_id)
        return True

    def _run_one(self, job_id: str) -> None:
        try:
            self._manager.run_poll_cycle(job_id)
        except Exception:
            logger.exception("poll cycle for %s crashed", job_id)
        finally:
            with self._lock:
                self._in_flight.discard(job_id)

    def due_jobs(self, now: float | None = None) -> list[Job]:
        now = self._clock() if now is None else now
        due = []
        for job in self._manager.store.all_active_jobs():
            if job.last_poll_at is None or job.last_poll_at <= now - self._interval:
                due.append(job)
        return due

    def tick(self, now: float | None = None) -> list[str]:
        """Dispatch every due job not already in flight; returns their ids."""
        dispatched = []
        for job in self.due_jobs(now):
            if self._dispatch(job.job_id):
                dispatched.append(job.job_id)
        return dispatched

    def run_forever(self, tick_interval_s: float = 1.0) -> None:
        while not self._stop.wait(tick_interval_s):
            try:
                self.tick()
            except Exception:
                logger.exception("scheduler tick failed")

    def start(self, tick_interval_s: float = 1.0) -> None:
        if self._thread is not None:
            return
        self._thread = threading.Thread(
            target=self.run_forever, args=(tick_interval_s,),
            name="adtracker-scheduler", daemon=True,
        )
        self._thread.start()

    def shutdown(self, wait: bool = True) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None
        self._executor.shutdown(wait=wait)

    def idle(self) -> bool:
        with self._lock:
            return not self._in_flight

    def wait_idle(self, timeout_s: float = 30.0) -> bool:
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            if self.idle():
                return True
            time.sleep(0.01)
        return self.idle()
