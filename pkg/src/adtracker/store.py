"""Durable storage for ads, jobs, accounts, and sessions.

A single embedded SQLite database under ``<data_dir>/store/``. Every public
method runs under one lock and each upsert batch is one transaction, so a
batch either fully applies or not at all and readers never observe half of
one. Ads are deduplicated by ad_id; job links are many-to-many.
"""

from __future__ import annotations

import json
import logging
import sqlite3
import threading
import time
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .domain import (
    Account,
    AccountStatus,
    AdQuery,
    AdRecord,
    Job,
    JobState,
    PollReport,
    Role,
    UpsertReport,
    ad_record_from_dict,
    job_spec_from_dict,
    job_spec_to_dict,
    poll_report_from_dict,
    poll_report_to_dict,
    provider_fields_json,
    validate_ad_record,
)
from .errors import StorageFailure, Unauthorized, UnknownAccount, UnknownJob

logger = logging.getLogger(__name__)

# Fields the archive is known to revise in place; a difference elsewhere under
# the same ad_id is an identity anomaly and gets logged.
_MUTABLE_KEYS = {
    "spend",
    "impressions",
    "potential_reach",
    "delivery_stop",
    "regional_distribution",
    "demographic_distribution",
}

_SCHEMA = """
CREATE TABLE IF NOT EXISTS ads (
    ad_id TEXT PRIMARY KEY,
    page_id TEXT NOT NULL,
    analysis_time INTEGER NOT NULL,
    first_seen INTEGER NOT NULL,
    last_seen INTEGER NOT NULL,
    record TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_ads_analysis_time ON ads(analysis_time);
CREATE TABLE IF NOT EXISTS job_ads (
    job_id TEXT NOT NULL,
    ad_id TEXT NOT NULL,
    PRIMARY KEY (job_id, ad_id)
);
CREATE TABLE IF NOT EXISTS jobs (
    job_id TEXT PRIMARY KEY,
    owner TEXT NOT NULL,
    state TEXT NOT NULL,
    search_term TEXT NOT NULL,
    visibility TEXT NOT NULL,
    created_at INTEGER NOT NULL,
    last_poll_at INTEGER,
    spec TEXT NOT NULL,
    last_report TEXT
);
CREATE TABLE IF NOT EXISTS accounts (
    account_id TEXT PRIMARY KEY,
    email TEXT NOT NULL UNIQUE,
    password_hash TEXT NOT NULL,
    role TEXT NOT NULL,
    status TEXT NOT NULL,
    identity_confirmed INTEGER NOT NULL,
    developer_account INTEGER NOT NULL,
    created_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
    token TEXT PRIMARY KEY,
    account_id TEXT NOT NULL,
    expires_at INTEGER NOT NULL
);
"""


class Store:
    """Thread-safe store over one SQLite file."""

    def __init__(self, data_dir: str | Path, clock: Callable[[], float] = time.time):
        self.data_dir = Path(data_dir)
        store_dir = self.data_dir / "store"
        store_dir.mkdir(parents=True, exist_ok=True)
        (self.data_dir / "images").mkdir(parents=True, exist_ok=True)
        self._clock = clock
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(
            store_dir / "adtracker.sqlite3", check_same_thread=False,
            isolation_level=None,
        )
        self._conn.executescript(_SCHEMA)
        # Test hook: called once per row write inside an upsert batch, before
        # the write happens; lets tests prove batch atomicity by injecting
        # failures mid-batch.
        self.fault_hook: Callable[[], None] | None = None

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    def _now(self) -> int:
        return int(self._clock())

    # -- ads ---------------------------------------------------------------

    def upsert_ads(self, job_id: str, ads: Sequence[AdRecord]) -> UpsertReport:
        """Deduplicating batch ingest, atomic per batch.

        New ad_ids are inserted with first_seen = last_seen = now; existing
        ones are replaced (updated) when any provider field differs, else only
        last_seen is refreshed (unchanged). Invalid records are counted and
        skipped. Every accepted ad is linked to job_id.
        """
        with self._lock:
            job_row = self._conn.execute(
                "SELECT state FROM jobs WHERE job_id = ?", (job_id,)
            ).fetchone()
            if job_row is None or job_row[0] == JobState.DELETED.value:
                raise UnknownJob(job_id)
            now = self._now()
            inserted = updated = unchanged = skipped = 0
            try:
                self._conn.execute("BEGIN IMMEDIATE")
                for ad in ads:
                    if validate_ad_record(ad):
                        skipped += 1
                        continue
                    if self.fault_hook is not None:
                        self.fault_hook()
                    incoming = provider_fields_json(ad)
                    row = self._conn.execute(
                        "SELECT record FROM ads WHERE ad_id = ?", (ad.ad_id,)
                    ).fetchone()
                    if row is None:
                        self._conn.execute(
                            "INSERT INTO ads (ad_id, page_id, analysis_time,"
                            " first_seen, last_seen, record)"
                            " VALUES (?, ?, ?, ?, ?, ?)",
                            (ad.ad_id, ad.page_id, ad.analysis_time, now, now, incoming),
                        )
                        inserted += 1
                    elif row[0] != incoming:
                        self._log_identity_anomaly(ad.ad_id, row[0], incoming)
                        self._conn.execute(
                            "UPDATE ads SET page_id = ?, analysis_time = ?,"
                            " last_seen = ?, record = ? WHERE ad_id = ?",
                            (ad.page_id, ad.analysis_time, now, incoming, ad.ad_id),
                        )
                        updated += 1
                    else:
                        self._conn.execute(
                            "UPDATE ads SET last_seen = ? WHERE ad_id = ?",
                            (now, ad.ad_id),
                        )
                        unchanged += 1
                    self._conn.execute(
                        "INSERT OR IGNORE INTO job_ads (job_id, ad_id) VALUES (?, ?)",
                        (job_id, ad.ad_id),
                    )
                self._conn.execute("COMMIT")
            except Exception as exc:
                self._conn.execute("ROLLBACK")
                if isinstance(exc, StorageFailure):
                    raise
                raise StorageFailure(f"upsert batch failed: {exc}") from exc
            return UpsertReport(inserted, updated, unchanged, skipped)

    @staticmethod
    def _log_identity_anomaly(ad_id: str, old_json: str, new_json: str) -> None:
        old, new = json.loads(old_json), json.loads(new_json)
        changed = {k for k in old if old.get(k) != new.get(k)}
        identity_changed = changed - _MUTABLE_KEYS
        if identity_changed:
            logger.warning(
                "ad %s changed identity fields under the same id: %s",
                ad_id, sorted(identity_changed),
            )

    def _row_to_ad(self, record_json: str, first_seen: int, last_seen: int) -> AdRecord:
        obj = json.loads(record_json)
        obj["first_seen"] = first_seen
        obj["last_seen"] = last_seen
        return ad_record_from_dict(obj)

    def _visible_job_ids(self, account: Account) -> set[str]:
        if account.role is Role.MANAGER:
            rows = self._conn.execute(
                "SELECT job_id FROM jobs WHERE state != ?", (JobState.DELETED.value,)
            )
        else:
            rows = self._conn.execute(
                "SELECT job_id FROM jobs WHERE state != ? AND (owner = ? OR visibility = 'PUBLIC')",
                (JobState.DELETED.value, account.account_id),
            )
        return {row[0] for row in rows}

    def query_ads(self, q: AdQuery) -> list[AdRecord]:
        """Visible ads matching the query, ordered by (analysis_time, ad_id)."""
        with self._lock:
            account = self._get_account_or_none(q.requesting_user)
            if account is None or account.status is not AccountStatus.APPROVED:
                raise Unauthorized("requesting user is not an approved account")
            job_ids = self._visible_job_ids(account)
            if q.job_ids is not None:
                job_ids &= set(q.job_ids)
            if not job_ids:
                return []
            placeholders = ",".join("?" for _ in job_ids)
            sql = (
                "SELECT DISTINCT a.record, a.first_seen, a.last_seen,"
                " a.analysis_time, a.ad_id"
                f" FROM ads a JOIN job_ads ja ON a.ad_id = ja.ad_id"
                f" WHERE ja.job_id IN ({placeholders})"
            )
            params: list = list(job_ids)
            if q.time_window is not None:
                sql += " AND a.analysis_time BETWEEN ? AND ?"
                params.extend(q.time_window)
            if q.page_ids is not None:
                page_ph = ",".join("?" for _ in q.page_ids)
                sql += f" AND a.page_id IN ({page_ph})"
                params.extend(q.page_ids)
            sql += " ORDER BY a.analysis_time, a.ad_id"
            rows = self._conn.execute(sql, params).fetchall()
            return [self._row_to_ad(r[0], r[1], r[2]) for r in rows]

    def ads_for_job(self, job_id: str) -> list[AdRecord]:
        """All ads linked to one job, ordered by (analysis_time, ad_id).
        Authorization is the caller's responsibility."""
        with self._lock:
            rows = self._conn.execute(
                "SELECT a.record, a.first_seen, a.last_seen"
                " FROM ads a JOIN job_ads ja ON a.ad_id = ja.ad_id"
                " WHERE ja.job_id = ? ORDER BY a.analysis_time, a.ad_id",
                (job_id,),
            ).fetchall()
            return [self._row_to_ad(r[0], r[1], r[2]) for r in rows]

    def count_ads(self) -> int:
        with self._lock:
            return self._conn.execute("SELECT COUNT(*) FROM ads").fetchone()[0]

    def all_ads(self) -> list[AdRecord]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT record, first_seen, last_seen FROM ads ORDER BY ad_id"
            ).fetchall()
            return [self._row_to_ad(r[0], r[1], r[2]) for r in rows]

    # -- jobs ----------------------------------------------------------------

    def put_job(self, job: Job) -> None:
        with self._lock:
            try:
                self._conn.execute(
                    "INSERT OR REPLACE INTO jobs (job_id, owner, state, search_term,"
                    " visibility, created_at, last_poll_at, spec, last_report)"
                    " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
                    (
                        job.job_id,
                        job.owner,
                        job.state.value,
                        job.spec.search_term,
                        job.spec.visibility.value,
                        job.created_at,
                        job.last_poll_at,
                        json.dumps(job_spec_to_dict(job.spec)),
                        None
                        if job.last_report is None
                        else json.dumps(poll_report_to_dict(job.last_report)),
                    ),
                )
            except sqlite3.Error as exc:
                raise StorageFailure(f"put_job failed: {exc}") from exc

    def _job_from_row(self, row) -> Job:
        (job_id, owner, state, _term, _vis, created_at, last_poll_at, spec, report) = row
        return Job(
            job_id=job_id,
            owner=owner,
            spec=job_spec_from_dict(json.loads(spec)),
            created_at=created_at,
            state=JobState(state),
            last_poll_at=last_poll_at,
            last_report=None if report is None else poll_report_from_dict(json.loads(report)),
        )

    _JOB_COLS = ("job_id, owner, state, search_term, visibility, created_at,"
                 " last_poll_at, spec, last_report")

    def get_job(self, job_id: str, include_deleted: bool = False) -> Job:
        with self._lock:
            row = self._conn.execute(
                f"SELECT {self._JOB_COLS} FROM jobs WHERE job_id = ?", (job_id,)
            ).fetchone()
            if row is None:
                raise UnknownJob(job_id)
            job = self._job_from_row(row)
            if job.state is JobState.DELETED and not include_deleted:
                raise UnknownJob(job_id)
            return job

    def delete_job(self, job_id: str) -> None:
        """Soft-delete: mark DELETED and drop its ad links. Ads stay (another
        job may link them); the row stays for audit."""
        with self._lock:
            job = self.get_job(job_id)  # raises UnknownJob for absent/deleted
            try:
                self._conn.execute("BEGIN IMMEDIATE")
                self._conn.execute(
                    "UPDATE jobs SET state = ? WHERE job_id = ?",
                    (JobState.DELETED.value, job.job_id),
                )
                self._conn.execute("DELETE FROM job_ads WHERE job_id = ?", (job_id,))
                self._conn.execute("COMMIT")
            except sqlite3.Error as exc:
                self._conn.execute("ROLLBACK")
                raise StorageFailure(f"delete_job failed: {exc}") from exc

    def list_jobs(self, account: Account, query: str | None = "") -> list[Job]:
        """Jobs visible to the account (owned or PUBLIC; managers see all),
        filtered by case-insensitive substring on search_term."""
        needle = (query or "").casefold()
        with self._lock:
            rows = self._conn.execute(
                f"SELECT {self._JOB_COLS} FROM jobs WHERE state != ?"
                " ORDER BY created_at, job_id",
                (JobState.DELETED.value,),
            ).fetchall()
        jobs = [self._job_from_row(row) for row in rows]
        visible = [
            j
            for j in jobs
            if account.role is Role.MANAGER
            or j.owner == account.account_id
            or j.spec.visibility.value == "PUBLIC"
        ]
        if needle:
            visible = [j for j in visible if needle in j.spec.search_term.casefold()]
        return visible

    def all_active_jobs(self) -> list[Job]:
        """System-level listing used by the scheduler."""
        with self._lock:
            rows = self._conn.execute(
                f"SELECT {self._JOB_COLS} FROM jobs WHERE state = ?"
                " ORDER BY created_at, job_id",
                (JobState.ACTIVE.value,),
            ).fetchall()
            return [self._job_from_row(row) for row in rows]

    def update_job_poll_state(self, job_id: str, last_poll_at: int,
                              report: PollReport) -> None:
        """Persist a finished cycle's outcome; works on DELETED rows too so a
        cycle interrupted by deletion still leaves its report behind."""
        with self._lock:
            cur = self._conn.execute(
                "UPDATE jobs SET last_poll_at = ?, last_report = ? WHERE job_id = ?",
                (last_poll_at, json.dumps(poll_report_to_dict(report)), job_id),
            )
            if cur.rowcount == 0:
                raise UnknownJob(job_id)

    # -- accounts / sessions -------------------------------------------------

    def put_account(self, account: Account) -> None:
        with self._lock:
            try:
                self._conn.execute(
                    "INSERT INTO accounts (account_id, email, password_hash, role,"
                    " status, identity_confirmed, developer_account, created_at)"
                    " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                    (
                        account.account_id,
                        account.email,
                        account.password_hash,
                        account.role.value,
                        account.status.value,
                        int(account.identity_confirmed),
                        int(account.developer_account),
                        account.created_at,
                    ),
                )
            except sqlite3.IntegrityError as exc:
                raise StorageFailure(f"account conflict: {exc}") from exc

    @staticmethod
    def _account_from_row(row) -> Account:
        return Account(
            account_id=row[0],
            email=row[1],
            password_hash=row[2],
            role=Role(row[3]),
            status=AccountStatus(row[4]),
            identity_confirmed=bool(row[5]),
            developer_account=bool(row[6]),
            created_at=row[7],
        )

    def _get_account_or_none(self, account_id: str) -> Account | None:
        row = self._conn.execute(
            "SELECT * FROM accounts WHERE account_id = ?", (account_id,)
        ).fetchone()
        return None if row is None else self._account_from_row(row)

    def get_account(self, account_id: str) -> Account:
        with self._lock:
            account = self._get_account_or_none(account_id)
            if account is None:
                raise UnknownAccount(account_id)
            return account

    def get_account_by_email(self, email: str) -> Account | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM accounts WHERE email = ?", (email,)
            ).fetchone()
            return None if row is None else self._account_from_row(row)

    def set_account_status(self, account_id: str, status: AccountStatus) -> None:
        with self._lock:
            cur = self._conn.execute(
                "UPDATE accounts SET status = ? WHERE account_id = ?",
                (status.value, account_id),
            )
            if cur.rowcount == 0:
                raise UnknownAccount(account_id)

    def list_accounts(self, status: AccountStatus | None = None) -> list[Account]:
        with self._lock:
            if status is None:
                rows = self._conn.execute(
                    "SELECT * FROM accounts ORDER BY created_at, account_id"
                ).fetchall()
            else:
                rows = self._conn.execute(
                    "SELECT * FROM accounts WHERE status = ?"
                    " ORDER BY created_at, account_id",
                    (status.value,),
                ).fetchall()
            return [self._account_from_row(row) for row in rows]

    def put_session(self, token: str, account_id: str, expires_at: int) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO sessions (token, account_id, expires_at)"
                " VALUES (?, ?, ?)",
                (token, account_id, expires_at),
            )

    def get_session(self, token: str) -> tuple[str, int] | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT account_id, expires_at FROM sessions WHERE token = ?",
                (token,),
            ).fetchone()
            return None if row is None else (row[0], row[1])

    def delete_session(self, token: str) -> None:
        with self._lock:
            self._conn.execute("DELETE FROM sessions WHERE token = ?", (token,))

    # -- test support ----------------------------------------------------------

    def raw_dump(self) -> dict[str, list[tuple]]:
        """Full table contents, used by tests to scan for plaintext secrets and
        to compare store states."""
        with self._lock:
            out = {}
            for table in ("ads", "job_ads", "jobs", "accounts", "sessions"):
                out[table] = self._conn.execute(
                    f"SELECT * FROM {table} ORDER BY 1"
                ).fetchall()
            return out
