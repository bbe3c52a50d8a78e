"""HTTP/JSON boundary: versioned routes under /api/v1, a total error-to-status
mapping, and JSON-line request logs."""

from __future__ import annotations

import json
import logging
import math
import time
from typing import Any, Mapping

from fastapi import Body, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from . import accounts as authz
from .advertisers import AdvertiserEntry, advertiser_report
from .countries import ISO_ALPHA2
from .domain import (
    Account,
    AccountStatus,
    ActiveStatus,
    AdCategory,
    AdQuery,
    Platform,
    Role,
    Visibility,
    account_public_dict,
    format_rfc3339,
    job_spec_from_payload,
    job_to_dict,
    parse_rfc3339,
    poll_report_to_dict,
)
from .errors import (
    AdTrackerError,
    AuthFailed,
    DownloadFailed,
    EmailTaken,
    GraphLookupFailed,
    InvalidSpec,
    InvalidState,
    InvalidWindow,
    MalformedPayload,
    MalformedRange,
    NotAnImage,
    RateLimited,
    StorageFailure,
    TransportError,
    Unauthorized,
    UnknownAccount,
    UnknownJob,
    WeakPassword,
)
from .geo import (
    GeoCluster,
    LocationRank,
    RankEntry,
    RegionalReport,
    regional_report,
)
from .runtime import Runtime

request_log = logging.getLogger("adtracker.requests")

API_PREFIX = "/api/v1"
DEFAULT_JOBS_LIMIT = 50

# Every module error maps to exactly one (code, status). Anything outside
# this table is a programming bug and is allowed to become a generic 500.
ERROR_MAP: dict[type[AdTrackerError], tuple[str, int]] = {
    MalformedRange: ("malformed_range", 400),
    MalformedPayload: ("malformed_payload", 400),
    InvalidSpec: ("invalid_spec", 400),
    InvalidWindow: ("invalid_window", 400),
    WeakPassword: ("weak_password", 400),
    EmailTaken: ("email_taken", 400),
    InvalidState: ("invalid_state", 400),
    AuthFailed: ("auth_failed", 401),
    Unauthorized: ("unauthorized", 403),
    UnknownJob: ("unknown_job", 404),
    UnknownAccount: ("unknown_account", 404),
    GraphLookupFailed: ("graph_lookup_failed", 404),
    DownloadFailed: ("download_failed", 404),
    NotAnImage: ("not_an_image", 404),
    RateLimited: ("rate_limited", 429),
    TransportError: ("transport_error", 429),
    StorageFailure: ("storage_failure", 500),
}


def error_payload(exc: AdTrackerError) -> tuple[dict[str, Any], int, dict[str, str]]:
    """Resolve an application error to (body, status, extra headers)."""
    for klass in type(exc).__mro__:
        if klass in ERROR_MAP:
            code, status = ERROR_MAP[klass]  # type: ignore[index]
            break
    else:
        code, status = "internal", 500
    body: dict[str, Any] = {"error": {"code": code, "message": str(exc)}}
    headers: dict[str, str] = {}
    if isinstance(exc, InvalidSpec):
        body["error"]["violations"] = [
            {"code": v.code, "field": v.field, "detail": v.detail}
            for v in exc.violations
        ]
    if isinstance(exc, RateLimited):
        headers["Retry-After"] = str(max(1, math.ceil(exc.wait_s)))
    return body, status, headers


# -- report serialization -----------------------------------------------------


def _round4(x: float) -> float:
    return round(float(x), 4)


def serialize_report(report: RegionalReport) -> dict[str, Any]:
    """Regional report as plain JSON types; weighted values carry at most
    four decimals."""

    def rank_row(e: RankEntry) -> dict[str, Any]:
        return {
            "country_code": e.country_code,
            "region_name": e.region_name,
            "raw_count": e.raw_count,
            "weighted_reach": _round4(e.weighted_reach),
        }

    return {
        "clusters": [
            {
                "centroid": {"lat": c.centroid[0], "lon": c.centroid[1]},
                "members": [
                    {"country_code": cc, "region_name": rn} for cc, rn in c.members
                ],
                "raw_count": c.raw_count,
                "weighted_reach": _round4(c.weighted_reach),
            }
            for c in report.clusters
        ],
        "ranks": [rank_row(e) for e in report.ranks.entries],
        "unresolved": [rank_row(e) for e in report.ranks.unresolved],
    }


def deserialize_report(payload: Mapping[str, Any]) -> RegionalReport:
    """Inverse of serialize_report for payloads produced by it."""
    try:
        clusters = tuple(
            GeoCluster(
                centroid=(float(c["centroid"]["lat"]), float(c["centroid"]["lon"])),
                members=tuple(
                    (m["country_code"], m["region_name"]) for m in c["members"]
                ),
                raw_count=int(c["raw_count"]),
                weighted_reach=float(c["weighted_reach"]),
            )
            for c in payload["clusters"]
        )

        def rank_entry(row: Mapping[str, Any]) -> RankEntry:
            return RankEntry(
                country_code=row["country_code"],
                region_name=row["region_name"],
                raw_count=int(row["raw_count"]),
                weighted_reach=float(row["weighted_reach"]),
            )

        ranks = LocationRank(
            entries=tuple(rank_entry(r) for r in payload["ranks"]),
            unresolved=tuple(rank_entry(r) for r in payload["unresolved"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedPayload(f"bad report payload: {exc}")
    return RegionalReport(clusters=clusters, ranks=ranks)


def serialize_advertisers(entries: tuple[AdvertiserEntry, ...]) -> list[dict[str, Any]]:
    return [
        {
            "page_id": e.page_id,
            "page_name": e.page_name,
            "ad_count": e.ad_count,
            "total_weighted_impressions": _round4(e.total_weighted_impressions),
            "profile_image_ref": e.profile_image_ref,
        }
        for e in entries
    ]


# -- request plumbing ---------------------------------------------------------


def _bearer_token(request: Request) -> str:
    header = request.headers.get("authorization", "")
    scheme, _, token = header.partition(" ")
    if scheme.lower() != "bearer" or not token.strip():
        raise AuthFailed("missing bearer token")
    return token.strip()


def _require_str(payload: Mapping[str, Any], key: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str) or not value:
        raise MalformedPayload(f"{key} must be a non-empty string")
    return value


def _parse_instant(raw: str) -> int:
    raw = raw.strip()
    if not raw:
        raise MalformedPayload("empty timestamp")
    try:
        return int(raw)
    except ValueError:
        return parse_rfc3339(raw)


def _parse_window(start: str | None, end: str | None, now: int) -> tuple[int, int]:
    lo = 0 if start is None else _parse_instant(start)
    hi = now if end is None else _parse_instant(end)
    if lo > hi:
        raise InvalidWindow(f"window start {lo} is after end {hi}")
    return lo, hi


def _parse_job_ids(raw: str | None) -> frozenset[str] | None:
    if raw is None or not raw.strip():
        return None
    return frozenset(part.strip() for part in raw.split(",") if part.strip())


def create_app(rt: Runtime, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="adtracker", docs_url=None, redoc_url=None, openapi_url=None)

    def now() -> int:
        return int(rt.clock())

    def current_account(request: Request) -> Account:
        account = rt.accounts.authenticate(_bearer_token(request))
        if account is None:
            raise AuthFailed("invalid or expired token")
        return account

    def approved_account(request: Request) -> Account:
        account = current_account(request)
        if account.status is not AccountStatus.APPROVED:
            raise Unauthorized("account is not approved")
        return account

    @app.exception_handler(AdTrackerError)
    async def _on_app_error(request: Request, exc: AdTrackerError):
        body, status, headers = error_payload(exc)
        return JSONResponse(body, status_code=status, headers=headers)

    @app.exception_handler(RequestValidationError)
    async def _on_validation_error(request: Request, exc: RequestValidationError):
        # Body/query shape failures are client errors, not 422 novelties.
        return JSONResponse(
            {"error": {"code": "malformed_payload", "message": str(exc.errors()[:3])}},
            status_code=400,
        )

    @app.middleware("http")
    async def _log_requests(request: Request, call_next):
        started = time.monotonic()
        response = await call_next(request)
        request_log.info(
            "%s",
            json.dumps(
                {
                    "ts": format_rfc3339(now()),
                    "method": request.method,
                    "path": request.url.path,
                    "status": response.status_code,
                    "duration_ms": round((time.monotonic() - started) * 1000, 2),
                },
                separators=(",", ":"),
            ),
        )
        return response

    # -- accounts ----------------------------------------------------------

    @app.post(f"{API_PREFIX}/signup", status_code=201)
    def signup(payload: dict[str, Any] = Body(...)):
        account = rt.accounts.sign_up(
            _require_str(payload, "email"),
            _require_str(payload, "password"),
            identity_confirmed=bool(payload.get("identity_confirmed", False)),
            developer_account=bool(payload.get("developer_account", False)),
        )
        return account_public_dict(account)

    @app.post(f"{API_PREFIX}/login")
    def login(payload: dict[str, Any] = Body(...)):
        token, expires_at = rt.accounts.login(
            _require_str(payload, "email"), _require_str(payload, "password")
        )
        return {"token": token, "expires_at": format_rfc3339(expires_at)}

    @app.post(f"{API_PREFIX}/logout")
    def logout(request: Request):
        rt.accounts.logout(_bearer_token(request))
        return {"status": "ok"}

    @app.get(f"{API_PREFIX}/accounts")
    def list_accounts(request: Request, status: str | None = None):
        account = current_account(request)
        if not authz.authorize(account, authz.REVIEW_ACCOUNTS):
            raise Unauthorized("manager role required")
        wanted: AccountStatus | None = None
        if status is not None:
            try:
                wanted = AccountStatus(status.upper())
            except ValueError:
                raise MalformedPayload(f"unknown status filter: {status!r}")
        return {
            "accounts": [
                account_public_dict(a) for a in rt.store.list_accounts(wanted)
            ]
        }

    @app.post(f"{API_PREFIX}/accounts/{{account_id}}/review")
    def review_account(
        account_id: str, request: Request, payload: dict[str, Any] = Body(...)
    ):
        manager = current_account(request)
        raw = _require_str(payload, "decision")
        try:
            decision = AccountStatus(raw.upper())
        except ValueError:
            raise InvalidState(f"decision must be APPROVED or REJECTED, got {raw!r}")
        return account_public_dict(rt.accounts.review(manager, account_id, decision))

    # -- jobs ----------------------------------------------------------------

    @app.post(f"{API_PREFIX}/jobs", status_code=201)
    def register_job(request: Request, payload: dict[str, Any] = Body(...)):
        account = approved_account(request)
        spec, violations = job_spec_from_payload(payload)
        if spec is None:
            raise InvalidSpec(violations)
        return job_to_dict(rt.manager.register_job(account, spec))

    @app.get(f"{API_PREFIX}/jobs")
    def list_jobs(
        request: Request,
        query: str | None = None,
        limit: int = DEFAULT_JOBS_LIMIT,
        offset: int = 0,
    ):
        account = approved_account(request)
        if limit <= 0 or offset < 0:
            raise MalformedPayload("limit must be positive and offset non-negative")
        jobs = rt.store.list_jobs(account, query)
        window = jobs[offset : offset + limit]
        return {"jobs": [job_to_dict(j) for j in window], "total": len(jobs)}

    @app.get(f"{API_PREFIX}/jobs/{{job_id}}")
    def get_job(job_id: str, request: Request):
        account = approved_account(request)
        job = rt.store.get_job(job_id)
        if not authz.authorize(account, authz.READ_JOB, job):
            raise Unauthorized("job not visible to this account")
        return job_to_dict(job)

    @app.delete(f"{API_PREFIX}/jobs/{{job_id}}")
    def delete_job(job_id: str, request: Request):
        account = approved_account(request)
        rt.manager.delete_job(account, job_id)
        return {"status": "deleted", "job_id": job_id}

    @app.get(f"{API_PREFIX}/jobs/{{job_id}}/report")
    def job_report(job_id: str, request: Request):
        account = approved_account(request)
        job = rt.store.get_job(job_id)
        if not authz.authorize(account, authz.READ_JOB, job):
            raise Unauthorized("job not visible to this account")
        return {
            "job_id": job.job_id,
            "state": job.state.value,
            "last_poll_at": None
            if job.last_poll_at is None
            else format_rfc3339(job.last_poll_at),
            "report": None
            if job.last_report is None
            else poll_report_to_dict(job.last_report),
        }

    @app.get(f"{API_PREFIX}/jobs/{{job_id}}/export.csv")
    def export_job(job_id: str, request: Request):
        account = approved_account(request)
        stream = rt.manager.export_csv(account, job_id)
        return StreamingResponse(
            stream,
            media_type="text/csv; charset=utf-8",
            headers={
                "Content-Disposition": f'attachment; filename="{job_id}.csv"'
            },
        )

    # -- analyses -------------------------------------------------------------

    @app.get(f"{API_PREFIX}/analysis/regions")
    def analysis_regions(
        request: Request,
        start: str | None = None,
        end: str | None = None,
        threshold_km: float | None = None,
        jobs: str | None = None,
    ):
        account = approved_account(request)
        threshold = rt.config.cluster_threshold_km if threshold_km is None else threshold_km
        if threshold < 0:
            raise MalformedPayload("threshold_km must be >= 0")
        q = AdQuery(
            requesting_user=account.account_id,
            time_window=_parse_window(start, end, now()),
            job_ids=_parse_job_ids(jobs),
        )
        return serialize_report(regional_report(rt.store, q, threshold, rt.gazetteer))

    @app.get(f"{API_PREFIX}/analysis/advertisers")
    def analysis_advertisers(
        request: Request,
        start: str | None = None,
        end: str | None = None,
        jobs: str | None = None,
    ):
        account = approved_account(request)
        q = AdQuery(
            requesting_user=account.account_id,
            time_window=_parse_window(start, end, now()),
            job_ids=_parse_job_ids(jobs),
        )
        entries = advertiser_report(rt.store, q, image_cache=rt.image_cache)
        return {"advertisers": serialize_advertisers(entries)}

    # -- pages ---------------------------------------------------------------

    @app.get(f"{API_PREFIX}/pages/{{page_id}}/image")
    def page_image(page_id: str, request: Request):
        approved_account(request)
        image = rt.image_cache.fetch(page_id)
        return Response(
            content=image.data,
            media_type=image.content_type,
            headers={"Cache-Control": f"max-age={rt.config.image_ttl_s}"},
        )

    @app.get(f"{API_PREFIX}/vocabulary")
    def vocabulary():
        # The UI builds its job form from this, so form options and server
        # validation can never drift apart. Static data, no auth needed.
        return {
            "active_status": [s.value for s in ActiveStatus],
            "categories": [c.value for c in AdCategory],
            "platforms": [p.value for p in Platform],
            "visibility": [v.value for v in Visibility],
            "countries": sorted(ISO_ALPHA2),
        }

    @app.get(f"{API_PREFIX}/healthz")
    def healthz():
        return {"status": "ok"}

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
