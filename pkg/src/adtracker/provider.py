"""Clients for an ads-archive service: a provider contract, a deterministic
simulated implementation for offline use, and a live HTTP implementation with
paging, rate limiting, and retries.
"""

from __future__ import annotations

import json
import logging
import random
import threading
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Protocol, Sequence

import httpx

from .countries import resolve_country
from .domain import (
    ActiveStatus,
    AdRecord,
    DemographicShare,
    Gender,
    InsightRange,
    JobSpec,
    RegionalShare,
    SENTINEL_UPPER,
    ad_record_from_dict,
    ad_record_to_dict,
    parse_insight_range,
    parse_rfc3339,
    validate_ad_record,
)
from .errors import (
    AuthFailed,
    MalformedPayload,
    MalformedRange,
    RateLimited,
    TransportError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PageCursor:
    """Opaque forward cursor issued by a provider; never interpret the token."""

    token: str

    def __post_init__(self):
        if not self.token:
            raise MalformedPayload("empty page cursor")


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str
    access_token: str
    max_requests_per_minute: int = 60
    page_size: int = 25
    retry_limit: int = 3

    def __post_init__(self):
        if not 1 <= self.page_size <= 250:
            raise ValueError("page_size must be in [1, 250]")
        if self.max_requests_per_minute < 1:
            raise ValueError("max_requests_per_minute must be positive")
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be non-negative")


@dataclass
class AdPage:
    """One page of results. next_cursor is None exactly when exhausted;
    skipped_invalid counts records dropped by schema validation."""

    ads: list[AdRecord]
    next_cursor: PageCursor | None
    skipped_invalid: int = 0


class AdsProvider(Protocol):
    def fetch_page(self, spec: JobSpec, cursor: PageCursor | None = None) -> AdPage: ...


# ---------------------------------------------------------------------------
# Rate limiting
# ---------------------------------------------------------------------------


class RollingWindowLimiter:
    """Blocking limiter: at most max_per_window grants in any rolling window.

    Clock and sleep are injectable so tests can drive it with virtual time.
    A grant "occupies" the window for exactly window_s seconds; a grant made
    at t blocks the (max+1)-th caller until t + window_s.
    """

    def __init__(
        self,
        max_per_window: int,
        window_s: float = 60.0,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if max_per_window < 1:
            raise ValueError("max_per_window must be positive")
        self.max_per_window = max_per_window
        self.window_s = window_s
        self._clock = clock
        self._sleep = sleep
        self._grants: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                while self._grants and now - self._grants[0] >= self.window_s:
                    self._grants.popleft()
                if len(self._grants) < self.max_per_window:
                    self._grants.append(now)
                    return
                wait = self.window_s - (now - self._grants[0])
            # floor prevents a zero-length sleep from spinning when float
            # rounding leaves the oldest grant a hair short of expiry
            self._sleep(max(wait, 0.001))


def backoff_delays(retry_limit: int, rng: random.Random, base: float = 1.0,
                   factor: float = 2.0, cap: float = 60.0) -> list[float]:
    """Exponential backoff schedule with jitter in [0.5, 1.0] of the nominal delay."""
    return [
        min(cap, base * factor**attempt) * rng.uniform(0.5, 1.0)
        for attempt in range(retry_limit)
    ]


# ---------------------------------------------------------------------------
# Spec matching (shared predicate semantics of the simulated provider)
# ---------------------------------------------------------------------------


def ad_is_active(ad: AdRecord) -> bool:
    """An ad still delivering has no delivery_stop."""
    return ad.delivery_stop is None


def spec_matches(spec: JobSpec, ad: AdRecord) -> bool:
    """Case-insensitive substring match over the text fields, country
    intersection on the regional distribution, and delivery-status filter."""
    term = spec.search_term.casefold()
    haystacks = (
        ad.body,
        ad.link_title,
        ad.link_caption,
        ad.link_description,
        ad.page_name,
    )
    if not any(term in text.casefold() for text in haystacks if text):
        return False
    countries = set(spec.reached_countries)
    if not any(share.country_code in countries for share in ad.regional_distribution):
        return False
    if spec.active_status is ActiveStatus.ACTIVE and not ad_is_active(ad):
        return False
    if spec.active_status is ActiveStatus.INACTIVE and ad_is_active(ad):
        return False
    return True


# ---------------------------------------------------------------------------
# Simulated provider
# ---------------------------------------------------------------------------

# Region pool used by generated fixtures; the bundled gazetteer covers all of it.
SIMULATED_REGIONS: tuple[tuple[str, str], ...] = (
    ("CA", "Ontario"),
    ("CA", "Quebec"),
    ("CA", "British Columbia"),
    ("CA", "Alberta"),
    ("US", "California"),
    ("US", "Texas"),
    ("US", "New York"),
    ("US", "Florida"),
    ("GB", "England"),
    ("GB", "Scotland"),
    ("GB", "Wales"),
    ("BR", "São Paulo"),
    ("BR", "Rio de Janeiro"),
    ("BR", "Bahia"),
    ("DE", "Bavaria"),
    ("DE", "Berlin"),
    ("AU", "New South Wales"),
    ("AU", "Victoria"),
    ("AU", "Queensland"),
    ("JP", "Tokyo"),
    ("JP", "Osaka"),
    ("FR", "Île-de-France"),
    ("FR", "Provence-Alpes-Côte d'Azur"),
)

SIMULATED_COUNTRIES: tuple[str, ...] = tuple(
    sorted({cc for cc, _ in SIMULATED_REGIONS})
)

SIMULATED_PAGES: tuple[tuple[str, str], ...] = (
    ("pg-100234", "Green Future Coalition"),
    ("pg-100871", "Citizens for Tomorrow"),
    ("pg-101442", "Liberty Voice Network"),
    ("pg-102005", "The Policy Desk"),
    ("pg-102633", "United Workers Forum"),
    ("pg-103210", "Coastal Heritage Fund"),
    ("pg-103987", "Open Roads Initiative"),
    ("pg-104555", "Fair Vote, Fair Voice"),
    ("pg-105121", "Northern Lights PAC"),
    ("pg-105760", "Civic Signal"),
    ("pg-106318", "Bright Harbor Group"),
    ("pg-107004", "Hands-On Health Alliance"),
)

_KEYWORDS = (
    "Trump",
    "Biden",
    "climate",
    "healthcare",
    "economy",
    "education",
    "immigration",
    "energy",
)

_BODY_TEMPLATES = (
    "Join the {kw} campaign in {region} today.",
    "Why {kw} matters: our campaign explained.",
    'Supporters said "{kw} now!" at a campaign rally in {region}.',
    "Campaign update: the {kw} plan, explained step by step.",
    "Our {kw} campaign reached {region} this week. Read more.",
)

_AGE_BANDS = ("18-24", "25-34", "35-44", "45-54", "55-64", "65+")

_IMPRESSION_BUCKETS = (
    (0, 999),
    (1000, 4999),
    (5000, 9999),
    (10000, 49999),
    (50000, 99999),
    (100000, 199999),
    (200000, 499999),
    (500000, 999999),
    (1000000, SENTINEL_UPPER),
)

_SPEND_BUCKETS = (
    (0, 99),
    (100, 499),
    (500, 999),
    (1000, 4999),
    (5000, 9999),
    (10000, 49999),
)

_CURRENCIES = ("USD", "CAD", "GBP", "BRL", "EUR", "AUD", "JPY")

_FUNDERS = (
    "Paid for by the Greener Tomorrow Fund",
    'Paid for by "Friends of the Valley"',
    "Sponsored by Atlas Civic Partners, LLC",
    "Funded by the Open Policy Trust",
)

# Fixed 2-year generation window: 2020-01-01 .. 2022-01-01 UTC.
_GEN_WINDOW = (1577836800, 1640995200)


def _percentages(rng: random.Random, k: int) -> list[float]:
    weights = [rng.uniform(0.5, 2.0) for _ in range(k)]
    total = rng.uniform(60.0, 100.0)
    scale = total / sum(weights)
    return [round(w * scale, 2) for w in weights]


def generate_ads(seed: int, n_ads: int) -> list[AdRecord]:
    """Deterministically generate n_ads schema-valid records.

    The stream is prefix-stable: generate_ads(seed, n+k)[:n] equals
    generate_ads(seed, n), which lets tests grow a fixture in place.
    """
    rng = random.Random(seed)
    ads: list[AdRecord] = []
    seen_ids: set[str] = set()
    for i in range(n_ads):
        ad_id = str(rng.randrange(10**15, 10**16))
        while ad_id in seen_ids:
            ad_id = str(rng.randrange(10**15, 10**16))
        seen_ids.add(ad_id)

        page_id, page_name = rng.choice(SIMULATED_PAGES)
        creation = rng.randrange(*_GEN_WINDOW)
        if rng.random() < 0.9:
            delivery_start = creation + rng.randrange(0, 14 * 86400)
            delivery_stop = (
                delivery_start + rng.randrange(3600, 90 * 86400)
                if rng.random() < 0.6
                else None
            )
        else:
            delivery_start = None
            delivery_stop = None

        k = rng.randint(1, 4)
        regions = rng.sample(SIMULATED_REGIONS, k)
        pcts = _percentages(rng, k)
        regional = tuple(
            RegionalShare(cc, name, pct)
            for (cc, name), pct in zip(regions, pcts)
        )

        dk = rng.randint(2, 5)
        demo_pool = [(band, g) for band in _AGE_BANDS for g in Gender]
        demo_keys = rng.sample(demo_pool, dk)
        demo_pcts = _percentages(rng, dk)
        demographic = tuple(
            DemographicShare(band, gender, pct)
            for (band, gender), pct in zip(demo_keys, demo_pcts)
        )

        keyword = rng.choice(_KEYWORDS)
        body = rng.choice(_BODY_TEMPLATES).format(kw=keyword, region=regions[0][1])
        if i % 7 == 3:
            # Exercise CSV quoting: embed a comma, a double quote, and a newline.
            body += '\nNote: "paid media, reviewed".'

        has_link = rng.random() < 0.7
        impressions = (
            InsightRange(*rng.choice(_IMPRESSION_BUCKETS)) if rng.random() < 0.85 else None
        )
        reach = (
            InsightRange(*rng.choice(_IMPRESSION_BUCKETS)) if rng.random() < 0.7 else None
        )
        spend = InsightRange(*rng.choice(_SPEND_BUCKETS)) if rng.random() < 0.75 else None

        ads.append(
            AdRecord(
                ad_id=ad_id,
                page_id=page_id,
                page_name=page_name,
                creation_time=creation,
                body=body,
                link_caption="ads.example.org" if has_link else None,
                link_description=f"More on the {keyword} campaign" if has_link else None,
                link_title=f"{keyword} facts" if has_link else None,
                snapshot_url=f"https://ads.example.org/archive/render?id={ad_id}",
                spend=spend,
                currency=rng.choice(_CURRENCIES) if spend is not None else None,
                funded_entity=rng.choice(_FUNDERS) if rng.random() < 0.6 else None,
                delivery_start=delivery_start,
                delivery_stop=delivery_stop,
                impressions=impressions,
                potential_reach=reach,
                regional_distribution=regional,
                demographic_distribution=demographic,
            )
        )
    return ads


class SimulatedAdsProvider:
    """Deterministic in-memory archive. Immutable after seeding except for the
    explicit grow() hook used to model the archive gaining new ads."""

    def __init__(self, ads: Sequence[AdRecord], page_size: int = 25,
                 seed: int | None = None):
        if not 1 <= page_size <= 250:
            raise ValueError("page_size must be in [1, 250]")
        self._ads = list(ads)
        self._page_size = page_size
        self._seed = seed

    @classmethod
    def seed(cls, seed: int, n_ads: int, page_size: int = 25) -> "SimulatedAdsProvider":
        if n_ads < 0:
            raise ValueError("n_ads must be non-negative")
        return cls(generate_ads(seed, n_ads), page_size=page_size, seed=seed)

    @classmethod
    def from_jsonl(cls, path: str | Path, page_size: int = 25) -> "SimulatedAdsProvider":
        """Load a fixture file: one canonical AdRecord JSON object per line, UTF-8."""
        ads = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedPayload(f"{path}:{lineno}: not JSON") from exc
                ads.append(ad_record_from_dict(obj))
        return cls(ads, page_size=page_size)

    def dump_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for ad in self._ads:
                fh.write(json.dumps(ad_record_to_dict(ad, include_seen=False),
                                    ensure_ascii=False) + "\n")

    @property
    def ads(self) -> list[AdRecord]:
        return list(self._ads)

    def grow(self, extra: int) -> None:
        """Extend a seeded fixture by regenerating the (prefix-stable) stream."""
        if self._seed is None:
            raise ValueError("grow() requires a seeded provider")
        self._ads = generate_ads(self._seed, len(self._ads) + extra)

    def fetch_page(self, spec: JobSpec, cursor: PageCursor | None = None) -> AdPage:
        offset = 0
        if cursor is not None:
            try:
                offset = int(cursor.token)
            except ValueError as exc:
                raise MalformedPayload(f"bad cursor token: {cursor.token!r}") from exc
            if offset < 0:
                raise MalformedPayload(f"bad cursor token: {cursor.token!r}")
        matching = [ad for ad in self._ads if spec_matches(spec, ad)]
        page = matching[offset : offset + self._page_size]
        end = offset + self._page_size
        next_cursor = PageCursor(str(end)) if end < len(matching) else None
        return AdPage(ads=page, next_cursor=next_cursor)


# ---------------------------------------------------------------------------
# Live provider
# ---------------------------------------------------------------------------


def parse_live_ad(obj: Mapping[str, Any]) -> AdRecord:
    """Decode one archive API item (public snake_case field names) into an
    AdRecord. Unknown fields are ignored; bad content raises MalformedPayload.
    """
    if not isinstance(obj, Mapping):
        raise MalformedPayload("archive item is not an object")

    def opt(key: str) -> str | None:
        value = obj.get(key)
        return None if value in (None, "") else str(value)

    def time_of(key: str) -> int | None:
        value = obj.get(key)
        return None if value in (None, "") else parse_rfc3339(str(value))

    def range_of(key: str) -> InsightRange | None:
        value = obj.get(key)
        if value in (None, ""):
            return None
        try:
            if isinstance(value, str):
                return parse_insight_range(value)
            if isinstance(value, Mapping):
                lower = value.get("lower_bound")
                upper = value.get("upper_bound", lower)
                return InsightRange(int(lower), int(upper))
        except (TypeError, ValueError, MalformedRange) as exc:
            # a bad range never aborts the page, only this record
            raise MalformedPayload(f"bad {key} bounds: {value!r}") from exc
        raise MalformedPayload(f"bad {key}: {value!r}")

    regional = []
    for entry in obj.get("delivery_by_region") or ():
        if not isinstance(entry, Mapping):
            raise MalformedPayload("delivery_by_region entry is not an object")
        country_token = entry.get("country") or entry.get("region")
        code = resolve_country(str(country_token)) if country_token else None
        if code is None:
            raise MalformedPayload(f"unresolvable country in region entry: {entry!r}")
        try:
            pct = float(entry["percentage"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedPayload(f"bad region percentage: {entry!r}") from exc
        regional.append(RegionalShare(code, str(entry.get("region", "")), pct))

    demographic = []
    for entry in obj.get("demographic_distribution") or ():
        if not isinstance(entry, Mapping):
            raise MalformedPayload("demographic entry is not an object")
        try:
            gender = Gender(str(entry.get("gender", "unknown")).lower())
            pct = float(entry["percentage"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedPayload(f"bad demographic entry: {entry!r}") from exc
        demographic.append(DemographicShare(str(entry.get("age", "")), gender, pct))

    ad_id = opt("id")
    page_id = opt("page_id")
    if not ad_id or not page_id:
        raise MalformedPayload("archive item missing id or page_id")

    record = AdRecord(
        ad_id=ad_id,
        page_id=page_id,
        page_name=opt("page_name") or "",
        creation_time=time_of("ad_creation_time") or 0,
        body=opt("ad_creative_body") or "",
        link_caption=opt("ad_creative_link_caption"),
        link_description=opt("ad_creative_link_description"),
        link_title=opt("ad_creative_link_title"),
        snapshot_url=opt("ad_snapshot_url"),
        spend=range_of("spend"),
        currency=opt("currency"),
        funded_entity=opt("funding_entity"),
        delivery_start=time_of("ad_delivery_start_time"),
        delivery_stop=time_of("ad_delivery_stop_time"),
        impressions=range_of("impressions"),
        potential_reach=range_of("potential_reach"),
        regional_distribution=tuple(regional),
        demographic_distribution=tuple(demographic),
    )
    if obj.get("ad_creation_time") in (None, ""):
        raise MalformedPayload("archive item missing ad_creation_time")
    return record


class LiveAdsProvider:
    """HTTPS client for the real archive. Bearer-token auth, query-parameter
    search, cursor paging, shared rate limiter, retry with backoff."""

    def __init__(
        self,
        config: ProviderConfig,
        limiter: RollingWindowLimiter | None = None,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
    ):
        self._config = config
        self._limiter = limiter or RollingWindowLimiter(config.max_requests_per_minute)
        self._client = client or httpx.Client(timeout=30.0)
        self._sleep = sleep
        self._rng = rng or random.Random()

    def _params(self, spec: JobSpec, cursor: PageCursor | None) -> dict[str, str]:
        params = {
            "search_terms": spec.search_term,
            "ad_reached_countries": ",".join(spec.reached_countries),
            "ad_active_status": spec.active_status.value,
            "ad_type": spec.category.value,
            "publisher_platforms": ",".join(p.value for p in spec.platforms),
            "limit": str(self._config.page_size),
            "fields": ",".join(
                (
                    "id", "page_id", "page_name", "ad_creation_time",
                    "ad_creative_body", "ad_creative_link_caption",
                    "ad_creative_link_description", "ad_creative_link_title",
                    "ad_snapshot_url", "spend", "currency", "funding_entity",
                    "ad_delivery_start_time", "ad_delivery_stop_time",
                    "impressions", "potential_reach", "delivery_by_region",
                    "demographic_distribution",
                )
            ),
        }
        if cursor is not None:
            params["after"] = cursor.token
        return params

    def _request(self, params: dict[str, str]) -> dict[str, Any]:
        delays = backoff_delays(self._config.retry_limit, self._rng)
        attempt = 0
        while True:
            self._limiter.acquire()
            try:
                response = self._client.get(
                    self._config.base_url,
                    params=params,
                    headers={"Authorization": f"Bearer {self._config.access_token}"},
                )
            except httpx.HTTPError as exc:
                if attempt < len(delays):
                    self._sleep(delays[attempt])
                    attempt += 1
                    continue
                raise TransportError(f"archive request failed: {exc}") from exc
            if response.status_code in (401, 403):
                raise AuthFailed(f"archive rejected credentials ({response.status_code})")
            if response.status_code == 429:
                retry_after = response.headers.get("Retry-After")
                try:
                    wait = float(retry_after) if retry_after else 60.0
                except ValueError:
                    wait = 60.0
                raise RateLimited(wait_s=wait)
            if response.status_code >= 500:
                if attempt < len(delays):
                    self._sleep(delays[attempt])
                    attempt += 1
                    continue
                raise TransportError(f"archive returned {response.status_code}")
            if response.status_code != 200:
                raise TransportError(f"unexpected archive status {response.status_code}")
            try:
                return response.json()
            except ValueError as exc:
                raise TransportError("archive response is not JSON") from exc

    def fetch_page(self, spec: JobSpec, cursor: PageCursor | None = None) -> AdPage:
        payload = self._request(self._params(spec, cursor))
        items = payload.get("data")
        if not isinstance(items, list):
            raise TransportError("archive response missing data list")
        ads: list[AdRecord] = []
        skipped = 0
        for item in items:
            try:
                record = parse_live_ad(item)
            except MalformedPayload as exc:
                skipped += 1
                logger.warning("skipping malformed archive item: %s", exc)
                continue
            if validate_ad_record(record):
                skipped += 1
                logger.warning("skipping schema-invalid archive item %s", record.ad_id)
                continue
            ads.append(record)
        paging = payload.get("paging") or {}
        after = (paging.get("cursors") or {}).get("after")
        has_next = bool(paging.get("next")) and bool(after)
        next_cursor = PageCursor(str(after)) if has_next else None
        return AdPage(ads=ads, next_cursor=next_cursor, skipped_invalid=skipped)
