"""Regional reach analysis: resolve sub-country regions to coordinates,
cluster nearby map spots, and rank locations by weighted reach.

Clustering is single-linkage with a strict distance threshold: two spots are
connected when their great-circle distance is below the threshold, and
clusters are the connected components. Coincident coordinates always share a
cluster (they are the same map spot), so a zero threshold yields one cluster
per distinct coordinate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .domain import AdQuery

EARTH_RADIUS_KM = 6371.0

DEFAULT_CLUSTER_THRESHOLD_KM = 100.0

RegionKey = tuple[str, str]  # (country_code, region_name)
Coord = tuple[float, float]  # (lat, lon) degrees


def haversine_km(a: Coord, b: Coord) -> float:
    """Great-circle distance in kilometers."""
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def normalize_region(name: str) -> str:
    """Lookup normalization: trim, casefold, collapse internal whitespace."""
    return " ".join(name.split()).casefold()


class Gazetteer:
    """Immutable (country_code, region_name) → (lat, lon) lookup table."""

    def __init__(self, entries: Mapping[RegionKey, Coord]):
        table: dict[RegionKey, Coord] = {}
        canonical: dict[RegionKey, str] = {}
        for (cc, name), (lat, lon) in entries.items():
            if not -90.0 <= lat <= 90.0 or not -180.0 < lon <= 180.0:
                raise ValueError(f"coordinates out of bounds for {(cc, name)}")
            key = (cc.upper(), normalize_region(name))
            table[key] = (lat, lon)
            canonical[key] = " ".join(name.split())
        self._table = table
        self._canonical = canonical

    def __len__(self) -> int:
        return len(self._table)

    def resolve(self, country_code: str, region_name: str) -> Coord | None:
        """Normalized key lookup; a miss returns None, never a guess."""
        return self._table.get((country_code.upper(), normalize_region(region_name)))

    def canonical_name(self, country_code: str, region_name: str) -> str | None:
        return self._canonical.get((country_code.upper(), normalize_region(region_name)))

    @classmethod
    def from_csv(cls, path: str | Path) -> "Gazetteer":
        """Load `country_code,region_name,lat,lon` rows (UTF-8, header row)."""
        entries: dict[RegionKey, Coord] = {}
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                entries[(row["country_code"], row["region_name"])] = (
                    float(row["lat"]),
                    float(row["lon"]),
                )
        return cls(entries)

    @classmethod
    def bundled(cls) -> "Gazetteer":
        """The packaged default, covering the simulated provider's regions."""
        ref = resources.files("adtracker.data") / "gazetteer.csv"
        with resources.as_file(ref) as path:
            return cls.from_csv(path)


def resolve_region(country_code: str, region_name: str, gazetteer: Gazetteer) -> Coord | None:
    return gazetteer.resolve(country_code, region_name)


@dataclass(frozen=True)
class RegionStat:
    """Per-region accumulation: which ads touched it and their summed share."""

    ad_ids: frozenset[str]
    weighted: float

    @property
    def raw_count(self) -> int:
        return len(self.ad_ids)


@dataclass(frozen=True)
class GeoCluster:
    centroid: Coord
    members: tuple[RegionKey, ...]
    raw_count: int
    weighted_reach: float


@dataclass(frozen=True)
class RankEntry:
    country_code: str
    region_name: str
    raw_count: int
    weighted_reach: float


@dataclass(frozen=True)
class LocationRank:
    entries: tuple[RankEntry, ...]
    unresolved: tuple[RankEntry, ...]


@dataclass(frozen=True)
class RegionalReport:
    clusters: tuple[GeoCluster, ...]
    ranks: LocationRank


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[rj] = ri


def _centroid(coords: Sequence[Coord]) -> Coord:
    lat = sum(c[0] for c in coords) / len(coords)
    lons = [c[1] for c in coords]
    if max(lons) - min(lons) > 180.0:
        # Antimeridian-spanning cluster: unwrap before averaging.
        lons = [lon + 360.0 if lon < 0 else lon for lon in lons]
    lon = sum(lons) / len(lons)
    if lon > 180.0:
        lon -= 360.0
    return (lat, lon)


def cluster_locations(
    points: Sequence[tuple[RegionKey, Coord]],
    threshold_km: float,
    region_stats: Mapping[RegionKey, RegionStat] | None = None,
) -> list[GeoCluster]:
    """Single-linkage agglomeration over the "closer than threshold" graph.

    Connectivity is strict (d < threshold), except that points at identical
    coordinates are always merged. Without region_stats each member counts as
    one ad with zero weighted reach. Output ordering: weighted reach
    descending, then first (smallest) member key ascending.
    """
    if threshold_km < 0:
        raise ValueError("threshold_km must be non-negative")
    n = len(points)
    if n == 0:
        return []
    uf = _UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = points[i][1], points[j][1]
            if a == b or haversine_km(a, b) < threshold_km:
                uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)

    clusters = []
    for indexes in groups.values():
        members = sorted(points[i][0] for i in indexes)
        coords = [points[i][1] for i in indexes]
        if region_stats is None:
            raw = len(members)
            weighted = 0.0
        else:
            ad_ids: set[str] = set()
            weighted = 0.0
            for key in members:
                stat = region_stats[key]
                ad_ids |= stat.ad_ids
                weighted += stat.weighted
            raw = len(ad_ids)
        clusters.append(
            GeoCluster(
                centroid=_centroid(coords),
                members=tuple(members),
                raw_count=raw,
                weighted_reach=weighted,
            )
        )
    clusters.sort(key=lambda c: (-c.weighted_reach, c.members[0]))
    return clusters


def _rank(entries: Iterable[tuple[RegionKey, RegionStat]]) -> tuple[RankEntry, ...]:
    ranked = sorted(
        entries,
        key=lambda kv: (-kv[1].weighted, -kv[1].raw_count, kv[0]),
    )
    return tuple(
        RankEntry(
            country_code=key[0],
            region_name=key[1],
            raw_count=stat.raw_count,
            weighted_reach=stat.weighted,
        )
        for key, stat in ranked
    )


def accumulate_regions(ads) -> dict[RegionKey, RegionStat]:
    """Sum per-region reach over ads: one raw count per distinct ad, weighted
    by percentage/100. Keys use the cleaned display spelling of the region."""
    acc: dict[RegionKey, tuple[set[str], float]] = {}
    display: dict[tuple[str, str], str] = {}
    for ad in ads:
        for share in ad.regional_distribution:
            norm = (share.country_code.upper(), normalize_region(share.region_name))
            if norm not in display:
                display[norm] = " ".join(share.region_name.split())
            ids, weighted = acc.setdefault(norm, (set(), 0.0))
            ids.add(ad.ad_id)
            acc[norm] = (ids, weighted + share.percentage / 100.0)
    return {
        (norm[0], display[norm]): RegionStat(frozenset(ids), weighted)
        for norm, (ids, weighted) in acc.items()
    }


def regional_report(store, q: AdQuery, threshold_km: float,
                    gazetteer: Gazetteer) -> RegionalReport:
    """Windowed regional analysis over the store snapshot visible to the
    requesting user: clustered resolved regions plus a full location ranking
    with unresolved regions bucketed separately."""
    ads = store.query_ads(q)
    stats = accumulate_regions(ads)

    resolved: dict[RegionKey, RegionStat] = {}
    unresolved: dict[RegionKey, RegionStat] = {}
    points: list[tuple[RegionKey, Coord]] = []
    for key, stat in stats.items():
        coord = gazetteer.resolve(*key)
        if coord is None:
            unresolved[key] = stat
        else:
            canonical = gazetteer.canonical_name(*key) or key[1]
            ckey = (key[0], canonical)
            resolved[ckey] = stat
            points.append((ckey, coord))

    clusters = cluster_locations(points, threshold_km, region_stats=resolved)
    ranks = LocationRank(entries=_rank(resolved.items()), unresolved=_rank(unresolved.items()))
    return RegionalReport(clusters=tuple(clusters), ranks=ranks)
