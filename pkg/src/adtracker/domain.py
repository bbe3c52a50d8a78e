"""Canonical data schema: ads, jobs, distributions, accounts, and their
parsing/validation rules.

Everything here is an immutable value (frozen dataclasses, tuples), safe to
share across threads. Timestamps are UTC epoch seconds; the wire form is
RFC-3339. Archive quantities (impressions, spend, potential reach) live in
closed integer intervals because that is how the archive reports them.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Iterable, Mapping
from urllib.parse import urlparse

from .countries import ISO_ALPHA2, resolve_country
from .errors import InvalidWindow, MalformedPayload, MalformedRange

# Numeric stand-in for the unbounded side of ">N" ranges.
SENTINEL_UPPER = 10**12

# Provider rounding slack allowed on a percentage sum.
PERCENT_SUM_TOLERANCE = 0.5


# ---------------------------------------------------------------------------
# Enums
# ---------------------------------------------------------------------------


class ActiveStatus(str, Enum):
    ACTIVE = "ACTIVE"
    INACTIVE = "INACTIVE"
    ALL = "ALL"


class AdCategory(str, Enum):
    POLITICAL_AND_ISSUE = "POLITICAL_AND_ISSUE"


class Platform(str, Enum):
    FACEBOOK = "FACEBOOK"
    INSTAGRAM = "INSTAGRAM"
    MESSENGER = "MESSENGER"
    WHATSAPP = "WHATSAPP"
    OCULUS = "OCULUS"


class Visibility(str, Enum):
    PRIVATE = "PRIVATE"
    PUBLIC = "PUBLIC"


class Gender(str, Enum):
    FEMALE = "female"
    MALE = "male"
    UNKNOWN = "unknown"


class JobState(str, Enum):
    ACTIVE = "ACTIVE"
    DELETED = "DELETED"


class Role(str, Enum):
    RESEARCHER = "RESEARCHER"
    MANAGER = "MANAGER"


class AccountStatus(str, Enum):
    PENDING = "PENDING"
    APPROVED = "APPROVED"
    REJECTED = "REJECTED"


# ---------------------------------------------------------------------------
# Timestamps
# ---------------------------------------------------------------------------


def parse_rfc3339(text: str) -> int:
    """Parse an RFC-3339 timestamp into UTC epoch seconds (floor of sub-seconds)."""
    cleaned = text.strip()
    if cleaned.endswith(("Z", "z")):
        cleaned = cleaned[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(cleaned)
    except ValueError as exc:
        raise MalformedPayload(f"bad timestamp: {text!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_rfc3339(epoch: int) -> str:
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ"
    )


# ---------------------------------------------------------------------------
# Insight ranges
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InsightRange:
    """Closed interval [lower, upper] of a non-negative archive quantity."""

    lower: int
    upper: int

    def __post_init__(self):
        if self.lower < 0 or self.lower > self.upper:
            raise MalformedRange(f"invalid range ({self.lower}, {self.upper})")


_RANGE_PAIR = re.compile(r"^(\d[\d,]*)\s*-\s*(\d[\d,]*)$")
_RANGE_EXACT = re.compile(r"^(\d[\d,]*)$")
_RANGE_BELOW = re.compile(r"^<\s*(\d[\d,]*)$")
_RANGE_ABOVE = re.compile(r"^>\s*(\d[\d,]*)$")


def _digits(token: str) -> int:
    return int(token.replace(",", ""))


def parse_insight_range(text: str) -> InsightRange:
    """Parse an archive range string.

    Accepted forms: "L-U", "N", "<U", ">L"; commas allowed as thousands
    separators. "<U" becomes (0, U-1); ">L" becomes (L, SENTINEL_UPPER).
    """
    if not isinstance(text, str):
        raise MalformedRange(f"range must be a string, got {type(text).__name__}")
    cleaned = text.strip()
    if m := _RANGE_PAIR.match(cleaned):
        lower, upper = _digits(m.group(1)), _digits(m.group(2))
        if lower > upper:
            raise MalformedRange(f"lower exceeds upper in {text!r}")
        return InsightRange(lower, upper)
    if m := _RANGE_EXACT.match(cleaned):
        value = _digits(m.group(1))
        return InsightRange(value, value)
    if m := _RANGE_BELOW.match(cleaned):
        upper = _digits(m.group(1))
        if upper < 1:
            raise MalformedRange(f"open upper bound must be positive: {text!r}")
        return InsightRange(0, upper - 1)
    if m := _RANGE_ABOVE.match(cleaned):
        return InsightRange(_digits(m.group(1)), SENTINEL_UPPER)
    raise MalformedRange(f"unrecognized range string: {text!r}")


def format_insight_range(r: InsightRange) -> str:
    if r.upper == SENTINEL_UPPER:
        return f">{r.lower}"
    if r.lower == r.upper:
        return str(r.lower)
    return f"{r.lower}-{r.upper}"


def range_midpoint(r: InsightRange) -> float:
    """Single scalar for sorting/aggregation; unbounded ranges fall back to lower."""
    if r.upper == SENTINEL_UPPER:
        return float(r.lower)
    return (r.lower + r.upper) / 2


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegionalShare:
    country_code: str
    region_name: str
    percentage: float


@dataclass(frozen=True)
class DemographicShare:
    age_range: str
    gender: Gender
    percentage: float


# ---------------------------------------------------------------------------
# Ad records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdRecord:
    """One archived advertisement. first_seen/last_seen are stamped by the
    store on ingest, never by a provider."""

    ad_id: str
    page_id: str
    page_name: str
    creation_time: int
    body: str = ""
    link_caption: str | None = None
    link_description: str | None = None
    link_title: str | None = None
    snapshot_url: str | None = None
    spend: InsightRange | None = None
    currency: str | None = None
    funded_entity: str | None = None
    delivery_start: int | None = None
    delivery_stop: int | None = None
    impressions: InsightRange | None = None
    potential_reach: InsightRange | None = None
    regional_distribution: tuple[RegionalShare, ...] = ()
    demographic_distribution: tuple[DemographicShare, ...] = ()
    first_seen: int | None = None
    last_seen: int | None = None

    @property
    def analysis_time(self) -> int:
        """Time used for windowed queries: delivery start when known, else
        creation time (ads that never ran stay queryable)."""
        return self.delivery_start if self.delivery_start is not None else self.creation_time


_CURRENCY = re.compile(r"^[A-Z]{3}$")


def _is_absolute_url(url: str) -> bool:
    parts = urlparse(url)
    return bool(parts.scheme and parts.netloc)


def validate_ad_record(ad: AdRecord) -> list[str]:
    """Schema validation; returns a list of human-readable problems, empty if valid."""
    problems: list[str] = []
    if not ad.ad_id:
        problems.append("ad_id is empty")
    if not ad.page_id:
        problems.append("page_id is empty")
    if ad.delivery_start is not None and ad.delivery_stop is not None:
        if ad.delivery_start > ad.delivery_stop:
            problems.append("delivery_start after delivery_stop")
    for label, r in (
        ("spend", ad.spend),
        ("impressions", ad.impressions),
        ("potential_reach", ad.potential_reach),
    ):
        if r is not None and (r.lower < 0 or r.lower > r.upper):
            problems.append(f"{label} range invalid ({r.lower}, {r.upper})")
    if ad.spend is not None and ad.currency is None:
        problems.append("spend present without currency")
    if ad.currency is not None and not _CURRENCY.match(ad.currency):
        problems.append(f"currency not an ISO-4217 code: {ad.currency!r}")
    if ad.snapshot_url is not None and not _is_absolute_url(ad.snapshot_url):
        problems.append(f"snapshot_url not absolute: {ad.snapshot_url!r}")

    seen_regions: set[tuple[str, str]] = set()
    pct_sum = 0.0
    for share in ad.regional_distribution:
        if not 0.0 <= share.percentage <= 100.0:
            problems.append(f"regional percentage out of range: {share.percentage}")
        if share.country_code not in ISO_ALPHA2:
            problems.append(f"unknown country code: {share.country_code!r}")
        key = (share.country_code, share.region_name)
        if key in seen_regions:
            problems.append(f"duplicate region entry: {key}")
        seen_regions.add(key)
        pct_sum += share.percentage
    if pct_sum > 100.0 + PERCENT_SUM_TOLERANCE:
        problems.append(f"regional percentages sum to {pct_sum:.2f}")

    seen_demo: set[tuple[str, Gender]] = set()
    for share in ad.demographic_distribution:
        if not 0.0 <= share.percentage <= 100.0:
            problems.append(f"demographic percentage out of range: {share.percentage}")
        if not isinstance(share.gender, Gender):
            problems.append(f"unknown gender token: {share.gender!r}")
            continue
        key = (share.age_range, share.gender)
        if key in seen_demo:
            problems.append(f"duplicate demographic entry: {key}")
        seen_demo.add(key)

    if ad.first_seen is not None and ad.last_seen is not None:
        if ad.first_seen > ad.last_seen:
            problems.append("first_seen after last_seen")
    return problems


# --- JSON codec (used by the store, fixture files, and the API) -----------


def _range_to_dict(r: InsightRange | None) -> dict[str, int] | None:
    return None if r is None else {"lower": r.lower, "upper": r.upper}


def _opt_time(epoch: int | None) -> str | None:
    return None if epoch is None else format_rfc3339(epoch)


def ad_record_to_dict(ad: AdRecord, include_seen: bool = True) -> dict[str, Any]:
    out: dict[str, Any] = {
        "ad_id": ad.ad_id,
        "page_id": ad.page_id,
        "page_name": ad.page_name,
        "creation_time": format_rfc3339(ad.creation_time),
        "body": ad.body,
        "link_caption": ad.link_caption,
        "link_description": ad.link_description,
        "link_title": ad.link_title,
        "snapshot_url": ad.snapshot_url,
        "spend": _range_to_dict(ad.spend),
        "currency": ad.currency,
        "funded_entity": ad.funded_entity,
        "delivery_start": _opt_time(ad.delivery_start),
        "delivery_stop": _opt_time(ad.delivery_stop),
        "impressions": _range_to_dict(ad.impressions),
        "potential_reach": _range_to_dict(ad.potential_reach),
        "regional_distribution": [
            {
                "country_code": s.country_code,
                "region_name": s.region_name,
                "percentage": s.percentage,
            }
            for s in ad.regional_distribution
        ],
        "demographic_distribution": [
            {
                "age_range": s.age_range,
                "gender": s.gender.value,
                "percentage": s.percentage,
            }
            for s in ad.demographic_distribution
        ],
    }
    if include_seen:
        out["first_seen"] = _opt_time(ad.first_seen)
        out["last_seen"] = _opt_time(ad.last_seen)
    return out


def _require_str(obj: Mapping[str, Any], key: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str):
        raise MalformedPayload(f"field {key!r} missing or not a string")
    return value


def _opt_str(obj: Mapping[str, Any], key: str) -> str | None:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise MalformedPayload(f"field {key!r} not a string")
    return value


def _range_from(value: Any, key: str) -> InsightRange | None:
    if value is None:
        return None
    if isinstance(value, str):
        return parse_insight_range(value)
    if isinstance(value, Mapping):
        try:
            return InsightRange(int(value["lower"]), int(value["upper"]))
        except (KeyError, TypeError, ValueError, MalformedRange) as exc:
            raise MalformedPayload(f"bad range object in {key!r}: {value!r}") from exc
    raise MalformedPayload(f"bad range in {key!r}: {value!r}")


def _time_from(value: Any, key: str, required: bool = False) -> int | None:
    if value is None:
        if required:
            raise MalformedPayload(f"field {key!r} missing")
        return None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return int(value)
    if isinstance(value, str):
        return parse_rfc3339(value)
    raise MalformedPayload(f"bad timestamp in {key!r}: {value!r}")


def ad_record_from_dict(obj: Mapping[str, Any]) -> AdRecord:
    """Decode the canonical JSON object form. Raises MalformedPayload."""
    if not isinstance(obj, Mapping):
        raise MalformedPayload("ad record is not an object")
    regional = []
    for entry in obj.get("regional_distribution") or ():
        if not isinstance(entry, Mapping):
            raise MalformedPayload("regional entry is not an object")
        try:
            pct = float(entry["percentage"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedPayload(f"bad regional percentage: {entry!r}") from exc
        regional.append(
            RegionalShare(
                country_code=_require_str(entry, "country_code"),
                region_name=_require_str(entry, "region_name"),
                percentage=pct,
            )
        )
    demographic = []
    for entry in obj.get("demographic_distribution") or ():
        if not isinstance(entry, Mapping):
            raise MalformedPayload("demographic entry is not an object")
        try:
            gender = Gender(str(entry.get("gender", "")).lower())
            pct = float(entry["percentage"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedPayload(f"bad demographic entry: {entry!r}") from exc
        demographic.append(
            DemographicShare(
                age_range=_require_str(entry, "age_range"),
                gender=gender,
                percentage=pct,
            )
        )
    return AdRecord(
        ad_id=_require_str(obj, "ad_id"),
        page_id=_require_str(obj, "page_id"),
        page_name=_require_str(obj, "page_name"),
        creation_time=_time_from(obj.get("creation_time"), "creation_time", required=True),
        body=obj.get("body") or "",
        link_caption=_opt_str(obj, "link_caption"),
        link_description=_opt_str(obj, "link_description"),
        link_title=_opt_str(obj, "link_title"),
        snapshot_url=_opt_str(obj, "snapshot_url"),
        spend=_range_from(obj.get("spend"), "spend"),
        currency=_opt_str(obj, "currency"),
        funded_entity=_opt_str(obj, "funded_entity"),
        delivery_start=_time_from(obj.get("delivery_start"), "delivery_start"),
        delivery_stop=_time_from(obj.get("delivery_stop"), "delivery_stop"),
        impressions=_range_from(obj.get("impressions"), "impressions"),
        potential_reach=_range_from(obj.get("potential_reach"), "potential_reach"),
        regional_distribution=tuple(regional),
        demographic_distribution=tuple(demographic),
        first_seen=_time_from(obj.get("first_seen"), "first_seen"),
        last_seen=_time_from(obj.get("last_seen"), "last_seen"),
    )


def provider_fields_json(ad: AdRecord) -> str:
    """Stable serialization of the provider-owned fields, used by the store to
    classify a re-ingested record as changed or unchanged."""
    return json.dumps(
        ad_record_to_dict(ad, include_seen=False),
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )


# ---------------------------------------------------------------------------
# Job specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JobSpec:
    """A persistent search registration: what to ask the archive for."""

    search_term: str
    reached_countries: tuple[str, ...]
    active_status: ActiveStatus
    platforms: tuple[Platform, ...]
    category: AdCategory = AdCategory.POLITICAL_AND_ISSUE
    visibility: Visibility = Visibility.PRIVATE


@dataclass(frozen=True)
class SpecViolation:
    code: str
    field: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.code}({self.field}{': ' + self.detail if self.detail else ''})"


def validate_job_spec(spec: JobSpec) -> list[SpecViolation]:
    """Collect every violation; an empty list means the spec is acceptable."""
    violations: list[SpecViolation] = []
    if not spec.search_term.strip():
        violations.append(SpecViolation("empty_search_term", "search_term"))
    if not spec.reached_countries:
        violations.append(SpecViolation("empty_country_list", "reached_countries"))
    for code in spec.reached_countries:
        if code not in ISO_ALPHA2:
            violations.append(
                SpecViolation("unknown_country_code", "reached_countries", code)
            )
    if not spec.platforms:
        violations.append(SpecViolation("empty_platform_list", "platforms"))
    if len(set(spec.platforms)) != len(spec.platforms):
        violations.append(SpecViolation("duplicate_platform", "platforms"))
    for fname, value, enum_cls in (
        ("active_status", spec.active_status, ActiveStatus),
        ("category", spec.category, AdCategory),
        ("visibility", spec.visibility, Visibility),
    ):
        if not isinstance(value, enum_cls):
            violations.append(SpecViolation("unknown_enum_token", fname, str(value)))
    for platform in spec.platforms:
        if not isinstance(platform, Platform):
            violations.append(
                SpecViolation("unknown_enum_token", "platforms", str(platform))
            )
    return violations


def _parse_enum(enum_cls, raw: Any, fname: str, violations: list[SpecViolation]):
    try:
        return enum_cls(str(raw).strip().upper())
    except ValueError:
        violations.append(SpecViolation("unknown_enum_token", fname, str(raw)))
        return None


def job_spec_from_payload(payload: Mapping[str, Any]) -> tuple[JobSpec | None, list[SpecViolation]]:
    """Build a JobSpec from untrusted input (API body), collecting violations.

    Country tokens may be codes or known English names; anything else is an
    unknown_country_code violation.
    """
    violations: list[SpecViolation] = []
    search_term = str(payload.get("search_term") or "")

    countries: list[str] = []
    raw_countries = payload.get("reached_countries") or []
    if not isinstance(raw_countries, (list, tuple)):
        raw_countries = [raw_countries]
    for token in raw_countries:
        code = resolve_country(str(token))
        if code is None:
            violations.append(
                SpecViolation("unknown_country_code", "reached_countries", str(token))
            )
        else:
            countries.append(code)

    status = _parse_enum(ActiveStatus, payload.get("active_status", ""), "active_status", violations)
    category = _parse_enum(
        AdCategory, payload.get("category", AdCategory.POLITICAL_AND_ISSUE.value),
        "category", violations,
    )
    visibility = _parse_enum(
        Visibility, payload.get("visibility", Visibility.PRIVATE.value),
        "visibility", violations,
    )

    platforms: list[Platform] = []
    raw_platforms = payload.get("platforms") or []
    if not isinstance(raw_platforms, (list, tuple)):
        raw_platforms = [raw_platforms]
    for token in raw_platforms:
        parsed = _parse_enum(Platform, token, "platforms", violations)
        if parsed is not None:
            platforms.append(parsed)

    if violations:
        return None, violations
    spec = JobSpec(
        search_term=search_term,
        reached_countries=tuple(countries),
        active_status=status,
        platforms=tuple(platforms),
        category=category,
        visibility=visibility,
    )
    remaining = validate_job_spec(spec)
    if remaining:
        return None, remaining
    return spec, []


def job_spec_to_dict(spec: JobSpec) -> dict[str, Any]:
    return {
        "search_term": spec.search_term,
        "reached_countries": list(spec.reached_countries),
        "active_status": spec.active_status.value,
        "category": spec.category.value,
        "platforms": [p.value for p in spec.platforms],
        "visibility": spec.visibility.value,
    }


def job_spec_from_dict(obj: Mapping[str, Any]) -> JobSpec:
    """Decode a trusted (store-internal) spec object."""
    return JobSpec(
        search_term=obj["search_term"],
        reached_countries=tuple(obj["reached_countries"]),
        active_status=ActiveStatus(obj["active_status"]),
        platforms=tuple(Platform(p) for p in obj["platforms"]),
        category=AdCategory(obj["category"]),
        visibility=Visibility(obj["visibility"]),
    )


# ---------------------------------------------------------------------------
# Jobs, poll reports, upsert reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UpsertReport:
    inserted: int = 0
    updated: int = 0
    unchanged: int = 0
    skipped_invalid: int = 0

    def __add__(self, other: "UpsertReport") -> "UpsertReport":
        return UpsertReport(
            self.inserted + other.inserted,
            self.updated + other.updated,
            self.unchanged + other.unchanged,
            self.skipped_invalid + other.skipped_invalid,
        )

    @property
    def total(self) -> int:
        return self.inserted + self.updated + self.unchanged + self.skipped_invalid


@dataclass(frozen=True)
class PollReport:
    started_at: int
    finished_at: int
    pages_fetched: int
    upsert: UpsertReport
    errors: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Job:
    job_id: str
    owner: str
    spec: JobSpec
    created_at: int
    state: JobState = JobState.ACTIVE
    last_poll_at: int | None = None
    last_report: PollReport | None = None


def poll_report_to_dict(report: PollReport) -> dict[str, Any]:
    return {
        "started_at": format_rfc3339(report.started_at),
        "finished_at": format_rfc3339(report.finished_at),
        "pages_fetched": report.pages_fetched,
        "upsert": {
            "inserted": report.upsert.inserted,
            "updated": report.upsert.updated,
            "unchanged": report.upsert.unchanged,
            "skipped_invalid": report.upsert.skipped_invalid,
        },
        "errors": [list(e) for e in report.errors],
    }


def poll_report_from_dict(obj: Mapping[str, Any]) -> PollReport:
    up = obj["upsert"]
    return PollReport(
        started_at=parse_rfc3339(obj["started_at"]),
        finished_at=parse_rfc3339(obj["finished_at"]),
        pages_fetched=int(obj["pages_fetched"]),
        upsert=UpsertReport(
            int(up["inserted"]), int(up["updated"]),
            int(up["unchanged"]), int(up["skipped_invalid"]),
        ),
        errors=tuple((str(k), str(m)) for k, m in obj.get("errors", [])),
    )


def job_to_dict(job: Job) -> dict[str, Any]:
    return {
        "job_id": job.job_id,
        "owner": job.owner,
        "spec": job_spec_to_dict(job.spec),
        "created_at": format_rfc3339(job.created_at),
        "state": job.state.value,
        "last_poll_at": _opt_time(job.last_poll_at),
        "last_report": None if job.last_report is None else poll_report_to_dict(job.last_report),
    }


def job_from_dict(obj: Mapping[str, Any]) -> Job:
    report = obj.get("last_report")
    return Job(
        job_id=obj["job_id"],
        owner=obj["owner"],
        spec=job_spec_from_dict(obj["spec"]),
        created_at=parse_rfc3339(obj["created_at"]),
        state=JobState(obj["state"]),
        last_poll_at=None if obj.get("last_poll_at") is None else parse_rfc3339(obj["last_poll_at"]),
        last_report=None if report is None else poll_report_from_dict(report),
    )


# ---------------------------------------------------------------------------
# Queries and accounts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdQuery:
    """Snapshot query over stored ads; requesting_user scopes visibility."""

    requesting_user: str
    time_window: tuple[int, int] | None = None
    job_ids: frozenset[str] | None = None
    page_ids: frozenset[str] | None = None

    def __post_init__(self):
        if self.time_window is not None and self.time_window[0] > self.time_window[1]:
            raise InvalidWindow("time_window start after end")


@dataclass(frozen=True)
class Account:
    account_id: str
    email: str
    password_hash: str
    role: Role
    status: AccountStatus
    identity_confirmed: bool
    developer_account: bool
    created_at: int


def account_public_dict(account: Account) -> dict[str, Any]:
    """Account fields safe to send over the API (never the password hash)."""
    return {
        "account_id": account.account_id,
        "email": account.email,
        "role": account.role.value,
        "status": account.status.value,
        "identity_confirmed": account.identity_confirmed,
        "developer_account": account.developer_account,
        "created_at": format_rfc3339(account.created_at),
    }


__all__ = [
    "SENTINEL_UPPER",
    "ActiveStatus",
    "AdCategory",
    "Platform",
    "Visibility",
    "Gender",
    "JobState",
    "Role",
    "AccountStatus",
    "InsightRange",
    "RegionalShare",
    "DemographicShare",
    "AdRecord",
    "JobSpec",
    "SpecViolation",
    "UpsertReport",
    "PollReport",
    "Job",
    "AdQuery",
    "Account",
    "parse_rfc3339",
    "format_rfc3339",
    "parse_insight_range",
    "format_insight_range",
    "range_midpoint",
    "validate_ad_record",
    "validate_job_spec",
    "job_spec_from_payload",
    "ad_record_to_dict",
    "ad_record_from_dict",
    "provider_fields_json",
    "job_spec_to_dict",
    "job_spec_from_dict",
    "job_to_dict",
    "job_from_dict",
    "poll_report_to_dict",
    "poll_report_from_dict",
    "account_public_dict",
]
