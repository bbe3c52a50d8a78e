"""Advertiser analysis: group ads by page, rank by volume, and fetch/cache
page profile images through a graph provider."""

from __future__ import annotations

import hashlib
import json
import struct
import threading
import time
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol

import httpx

from .domain import AdQuery, AdRecord, format_rfc3339, parse_rfc3339, range_midpoint
from .errors import AdTrackerError, DownloadFailed, GraphLookupFailed, NotAnImage

DEFAULT_IMAGE_TTL_S = 7 * 86400


@dataclass(frozen=True)
class AdvertiserEntry:
    page_id: str
    page_name: str
    ad_count: int
    total_weighted_impressions: float
    profile_image_ref: str | None = None


@dataclass(frozen=True)
class ProfileImage:
    page_id: str
    content_type: str
    data: bytes
    fetched_at: int

    def __post_init__(self):
        if not self.data:
            raise ValueError("profile image has no bytes")
        if not self.content_type.startswith("image/"):
            raise ValueError(f"not an image MIME type: {self.content_type}")


def advertiser_report(store, q: AdQuery,
                      image_cache: "ProfileImageCache | None" = None) -> tuple[AdvertiserEntry, ...]:
    """Group the visible ads by page_id and rank by ad count (ties broken by
    page_id). The display name comes from the most recent ad in the group;
    impressions are summed as range midpoints."""
    ads = store.query_ads(q)
    groups: dict[str, list[AdRecord]] = {}
    for ad in ads:
        groups.setdefault(ad.page_id, []).append(ad)

    entries = []
    for page_id, group in groups.items():
        newest = max(group, key=lambda ad: (ad.analysis_time, ad.ad_id))
        weighted = sum(
            range_midpoint(ad.impressions) for ad in group if ad.impressions is not None
        )
        ref = None
        if image_cache is not None and image_cache.peek(page_id) is not None:
            ref = page_id
        entries.append(
            AdvertiserEntry(
                page_id=page_id,
                page_name=newest.page_name,
                ad_count=len(group),
                total_weighted_impressions=weighted,
                profile_image_ref=ref,
            )
        )
    entries.sort(key=lambda e: (-e.ad_count, e.page_id))
    return tuple(entries)


# ---------------------------------------------------------------------------
# Graph providers
# ---------------------------------------------------------------------------


class GraphProvider(Protocol):
    def picture_url(self, page_id: str) -> str: ...
    def download(self, url: str) -> tuple[str, bytes]: ...


def make_png(rgb: tuple[int, int, int], size: int = 4) -> bytes:
    """Minimal valid PNG of one solid color (enough for fixtures and the UI)."""

    def chunk(tag: bytes, payload: bytes) -> bytes:
        return (
            struct.pack(">I", len(payload))
            + tag
            + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
        )

    header = struct.pack(">IIBBBBB", size, size, 8, 2, 0, 0, 0)
    row = b"\x00" + bytes(rgb) * size
    body = zlib.compress(row * size)
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", header)
        + chunk(b"IDAT", body)
        + chunk(b"IEND", b"")
    )


class SimulatedGraphProvider:
    """Deterministic offline graph: every known page gets a solid-color PNG
    derived from its id. Tracks call counts so tests can assert cache hits."""

    def __init__(self, images: Mapping[str, tuple[str, bytes]] | None = None,
                 missing: set[str] | None = None):
        self._images = dict(images) if images is not None else None
        self._missing = missing or set()
        self.lookup_calls = 0
        self.download_calls = 0

    def _image_for(self, page_id: str) -> tuple[str, bytes]:
        if self._images is not None:
            if page_id not in self._images:
                raise GraphLookupFailed(page_id)
            return self._images[page_id]
        digest = hashlib.sha256(page_id.encode("utf-8")).digest()
        return "image/png", make_png((digest[0], digest[1], digest[2]))

    def picture_url(self, page_id: str) -> str:
        self.lookup_calls += 1
        if page_id in self._missing:
            raise GraphLookupFailed(page_id)
        if self._images is not None and page_id not in self._images:
            raise GraphLookupFailed(page_id)
        return f"simulated://pages/{page_id}/picture"

    def download(self, url: str) -> tuple[str, bytes]:
        self.download_calls += 1
        prefix, _, rest = url.partition("://")
        if prefix != "simulated" or not rest.startswith("pages/"):
            raise DownloadFailed(url)
        page_id = rest.split("/")[1]
        return self._image_for(page_id)


class LiveGraphProvider:
    """Two-step live lookup: ask the graph endpoint for the picture URL, then
    download the bytes."""

    def __init__(self, base_url: str, access_token: str,
                 client: httpx.Client | None = None):
        self._base_url = base_url.rstrip("/")
        self._token = access_token
        self._client = client or httpx.Client(timeout=30.0, follow_redirects=True)

    def picture_url(self, page_id: str) -> str:
        try:
            response = self._client.get(
                f"{self._base_url}/{page_id}/picture",
                params={"redirect": "false", "type": "large"},
                headers={"Authorization": f"Bearer {self._token}"},
            )
        except httpx.HTTPError as exc:
            raise GraphLookupFailed(f"graph request failed: {exc}") from exc
        if response.status_code != 200:
            raise GraphLookupFailed(f"graph returned {response.status_code} for {page_id}")
        url = ((response.json() or {}).get("data") or {}).get("url")
        if not url:
            raise GraphLookupFailed(f"no picture URL for {page_id}")
        return url

    def download(self, url: str) -> tuple[str, bytes]:
        try:
            response = self._client.get(url)
        except httpx.HTTPError as exc:
            raise DownloadFailed(f"image download failed: {exc}") from exc
        if response.status_code != 200:
            raise DownloadFailed(f"image download returned {response.status_code}")
        content_type = response.headers.get("Content-Type", "").split(";")[0].strip()
        return content_type, response.content


# ---------------------------------------------------------------------------
# Image cache
# ---------------------------------------------------------------------------


def _safe_name(page_id: str) -> str:
    return "".join(c if c.isalnum() or c in "-._" else f"_{ord(c):02x}" for c in page_id)


class ProfileImageCache:
    """Disk cache under <data_dir>/images: <page_id>.bin plus a .meta JSON
    sidecar. Fetches are single-flight per page; entries younger than the TTL
    are served without touching the provider."""

    def __init__(self, data_dir: str | Path, graph: GraphProvider,
                 ttl_s: int = DEFAULT_IMAGE_TTL_S,
                 clock: Callable[[], float] = time.time):
        self._dir = Path(data_dir) / "images"
        self._dir.mkdir(parents=True, exist_ok=True)
        self._graph = graph
        self._ttl_s = ttl_s
        self._clock = clock
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _paths(self, page_id: str) -> tuple[Path, Path]:
        stem = _safe_name(page_id)
        return self._dir / f"{stem}.bin", self._dir / f"{stem}.meta"

    def _lock_for(self, page_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(page_id, threading.Lock())

    def _load(self, page_id: str) -> ProfileImage | None:
        bin_path, meta_path = self._paths(page_id)
        if not bin_path.exists() or not meta_path.exists():
            return None
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            return ProfileImage(
                page_id=page_id,
                content_type=meta["content_type"],
                data=bin_path.read_bytes(),
                fetched_at=parse_rfc3339(meta["fetched_at"]),
            )
        except (OSError, ValueError, KeyError, AdTrackerError):
            return None

    def peek(self, page_id: str) -> ProfileImage | None:
        """Cached copy of any age, without fetching."""
        return self._load(page_id)

    def fetch(self, page_id: str) -> ProfileImage:
        """Cached-or-fetched profile image for a page.

        Raises GraphLookupFailed / DownloadFailed / NotAnImage; callers render
        a placeholder in those cases, a report never fails over an image.
        """
        if not page_id:
            raise GraphLookupFailed("empty page_id")
        with self._lock_for(page_id):
            cached = self._load(page_id)
            now = int(self._clock())
            if cached is not None and now - cached.fetched_at < self._ttl_s:
                return cached
            url = self._graph.picture_url(page_id)
            content_type, data = self._graph.download(url)
            if not content_type.startswith("image/"):
                raise NotAnImage(f"{page_id}: got {content_type or 'unknown type'}")
            if not data:
                raise DownloadFailed(f"{page_id}: empty body")
            image = ProfileImage(page_id=page_id, content_type=content_type,
                                 data=data, fetched_at=now)
            bin_path, meta_path = self._paths(page_id)
            tmp_bin = bin_path.with_suffix(".bin.tmp")
            tmp_meta = meta_path.with_suffix(".meta.tmp")
            tmp_bin.write_bytes(data)
            tmp_meta.write_text(
                json.dumps(
                    {
                        "content_type": content_type,
                        "fetched_at": format_rfc3339(now),
                    }
                ),
                encoding="utf-8",
            )
            tmp_bin.replace(bin_path)
            tmp_meta.replace(meta_path)
            return image
