"""Geospatial analysis: great-circle distance, gazetteer resolution,
single-linkage clustering, and per-region reach accumulation."""

from __future__ import annotations

import math
from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adtracker.domain import AdQuery, AdRecord, RegionalShare
from adtracker.geo import (
    EARTH_RADIUS_KM,
    Gazetteer,
    RegionStat,
    accumulate_regions,
    cluster_locations,
    haversine_km,
    normalize_region,
    regional_report,
)
from adtracker.provider import generate_ads

# -- distance -----------------------------------------------------------------

# Frozen by hand: pi * 6371 km and one equatorial degree (6371 * pi / 180).
ANTIPODAL_KM = 20015.086796
ONE_DEGREE_EQUATOR_KM = 111.19492664


def test_haversine_zero_for_identical_points():
    assert haversine_km((43.7, -79.4), (43.7, -79.4)) == 0.0


def test_haversine_antipodal():
    assert haversine_km((0.0, 0.0), (0.0, 180.0)) == pytest.approx(ANTIPODAL_KM, abs=1e-5)
    assert haversine_km((90.0, 0.0), (-90.0, 0.0)) == pytest.approx(ANTIPODAL_KM, abs=1e-5)


def test_haversine_one_equatorial_degree():
    assert haversine_km((0.0, 0.0), (0.0, 1.0)) == pytest.approx(
        ONE_DEGREE_EQUATOR_KM, abs=1e-5
    )


def test_haversine_poles_share_a_point():
    # all longitudes coincide at a pole
    assert haversine_km((90.0, 123.0), (90.0, -45.0)) < 1e-6


def _law_of_cosines_km(a, b) -> float:
    # independent formula for cross-checking; unstable only near antipodes
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    cos_c = math.sin(lat1) * math.sin(lat2) + math.cos(lat1) * math.cos(lat2) * math.cos(
        lon2 - lon1
    )
    return EARTH_RADIUS_KM * math.acos(max(-1.0, min(1.0, cos_c)))


coords = st.tuples(
    st.floats(min_value=-89.0, max_value=89.0),
    st.floats(min_value=-179.0, max_value=179.0),
)


@settings(max_examples=150, deadline=None)
@given(a=coords, b=coords)
def test_haversine_matches_law_of_cosines(a, b):
    d = haversine_km(a, b)
    assert d == haversine_km(b, a)
    assert 0.0 <= d <= ANTIPODAL_KM + 1e-6
    if 1.0 < d < 19_000:  # acos is unstable near coincident and antipodal points
        assert d == pytest.approx(_law_of_cosines_km(a, b), rel=1e-6)


# -- region name normalization and gazetteer ----------------------------------


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("Ontario", "ontario"),
        ("  ONTARIO  ", "ontario"),
        ("New   York", "new york"),
        ("Île-de-France", "île-de-france"),
        ("São Paulo", "são paulo"),
    ],
)
def test_normalize_region(raw, expected):
    assert normalize_region(raw) == expected


def test_gazetteer_resolves_normalized_keys():
    gz = Gazetteer({("ca", "  Ontario  "): (51.25, -85.32)})
    assert gz.resolve("CA", "ontario") == (51.25, -85.32)
    assert gz.resolve("ca", " ONTARIO ") == (51.25, -85.32)
    assert gz.canonical_name("CA", "ontario") == "Ontario"
    assert gz.resolve("CA", "Atlantis") is None
    assert gz.canonical_name("CA", "Atlantis") is None
    assert len(gz) == 1


def test_gazetteer_rejects_out_of_bounds_coordinates():
    with pytest.raises(ValueError):
        Gazetteer({("CA", "Ontario"): (90.1, 0.0)})
    with pytest.raises(ValueError):
        Gazetteer({("CA", "Ontario"): (0.0, -180.0)})  # canonical form is +180
    Gazetteer({("CA", "Ontario"): (0.0, 180.0)})  # boundary is fine


def test_gazetteer_from_csv(tmp_path):
    path = tmp_path / "regions.csv"
    path.write_text(
        "country_code,region_name,lat,lon\n"
        "CA,Ontario,51.2538,-85.3232\n"
        "JP,Tokyo,35.6762,139.6503\n",
        encoding="utf-8",
    )
    gz = Gazetteer.from_csv(path)
    assert gz.resolve("CA", "ontario") == (51.2538, -85.3232)
    assert gz.resolve("JP", "TOKYO") == (35.6762, 139.6503)


def test_bundled_gazetteer_covers_every_simulated_region():
    gz = Gazetteer.bundled()
    seen = set()
    for ad in generate_ads(7, 60):
        for share in ad.regional_distribution:
            seen.add((share.country_code, share.region_name))
    assert seen, "fixture should carry regional data"
    for cc, name in sorted(seen):
        assert gz.resolve(cc, name) is not None, f"unresolvable region {(cc, name)}"


# -- clustering ---------------------------------------------------------------


def _pt(name, lat, lon):
    return (("XX", name), (lat, lon))


def _member_sets(clusters):
    return {frozenset(c.members) for c in clusters}


def test_cluster_empty_input():
    assert cluster_locations([], 100.0) == []


def test_cluster_rejects_negative_threshold():
    with pytest.raises(ValueError):
        cluster_locations([_pt("a", 0, 0)], -1.0)


def test_zero_threshold_groups_only_coincident_points():
    pts = [_pt("a", 10.0, 20.0), _pt("b", 10.0, 20.0), _pt("c", 11.0, 21.0)]
    clusters = cluster_locations(pts, 0.0)
    assert _member_sets(clusters) == {
        frozenset({("XX", "a"), ("XX", "b")}),
        frozenset({("XX", "c")}),
    }


def test_single_linkage_chains_beyond_threshold():
    # a-b and b-c are ~111 km apart, a-c is ~222 km; chaining merges all three
    pts = [_pt("a", 0.0, 0.0), _pt("b", 0.0, 1.0), _pt("c", 0.0, 2.0)]
    merged = cluster_locations(pts, 150.0)
    assert _member_sets(merged) == {frozenset({("XX", "a"), ("XX", "b"), ("XX", "c")})}
    apart = cluster_locations(pts, 100.0)
    assert len(apart) == 3


def test_threshold_is_strict():
    pts = [_pt("a", 0.0, 0.0), _pt("b", 0.0, 1.0)]
    d = haversine_km((0.0, 0.0), (0.0, 1.0))
    assert len(cluster_locations(pts, d)) == 2  # d < d is false
    assert len(cluster_locations(pts, d * 1.000001)) == 1


def test_centroid_is_coordinate_mean():
    clusters = cluster_locations([_pt("a", 0.0, 0.0), _pt("b", 2.0, 2.0)], 1_000.0)
    assert len(clusters) == 1
    assert clusters[0].centroid == pytest.approx((1.0, 1.0))


def test_centroid_across_antimeridian():
    pts = [_pt("a", 0.0, 179.5), _pt("b", 0.0, -179.5)]
    clusters = cluster_locations(pts, 200.0)
    assert len(clusters) == 1
    lat, lon = clusters[0].centroid
    assert lat == pytest.approx(0.0)
    assert lon == pytest.approx(180.0)


def test_cluster_stats_union_raw_counts_and_sum_weights():
    stats = {
        ("XX", "a"): RegionStat(frozenset({"ad1", "ad2"}), 1.2),
        ("XX", "b"): RegionStat(frozenset({"ad2", "ad3"}), 0.5),
        ("XX", "c"): RegionStat(frozenset({"ad4"}), 0.9),
    }
    pts = [_pt("a", 0.0, 0.0), _pt("b", 0.0, 0.2), _pt("c", 40.0, 40.0)]
    clusters = cluster_locations(pts, 100.0, region_stats=stats)
    by_members = {c.members: c for c in clusters}
    ab = by_members[(("XX", "a"), ("XX", "b"))]
    assert ab.raw_count == 3  # ad2 shared between members counts once
    assert ab.weighted_reach == pytest.approx(1.7)
    c = by_members[(("XX", "c"),)]
    assert c.raw_count == 1
    assert c.weighted_reach == pytest.approx(0.9)
    # ordering: weighted reach descending
    assert [cl.weighted_reach for cl in clusters] == sorted(
        (cl.weighted_reach for cl in clusters), reverse=True
    )


def test_cluster_order_breaks_ties_by_first_member():
    stats = {
        ("XX", "a"): RegionStat(frozenset({"1"}), 1.0),
        ("XX", "z"): RegionStat(frozenset({"2"}), 1.0),
    }
    pts = [_pt("z", 50.0, 50.0), _pt("a", 0.0, 0.0)]
    clusters = cluster_locations(pts, 10.0, region_stats=stats)
    assert [c.members[0] for c in clusters] == [("XX", "a"), ("XX", "z")]


def _bfs_components(points, threshold_km):
    """Independent connected-components oracle over the same edge predicate."""
    n = len(points)
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        comp = []
        queue = deque([start])
        seen[start] = True
        while queue:
            i = queue.popleft()
            comp.append(i)
            for j in range(n):
                if seen[j]:
                    continue
                a, b = points[i][1], points[j][1]
                if a == b or haversine_km(a, b) < threshold_km:
                    seen[j] = True
                    queue.append(j)
        comps.append(frozenset(points[i][0] for i in comp))
    return set(comps)


point_lists = st.lists(
    st.tuples(
        st.floats(min_value=-85.0, max_value=85.0),
        st.floats(min_value=-180.0, max_value=180.0, exclude_min=True),
    ),
    min_size=0,
    max_size=18,
)


@settings(max_examples=80, deadline=None)
@given(raw=point_lists, threshold=st.sampled_from([0.0, 50.0, 500.0, 5_000.0, 21_000.0]))
def test_clusters_match_bfs_components(raw, threshold):
    points = [((f"C{i}", f"r{i}"), coord) for i, coord in enumerate(raw)]
    clusters = cluster_locations(points, threshold)
    assert _member_sets(clusters) == _bfs_components(points, threshold)


@settings(max_examples=60, deadline=None)
@given(raw=point_lists)
def test_clusters_partition_input_and_coarsen_with_threshold(raw):
    points = [((f"C{i}", f"r{i}"), coord) for i, coord in enumerate(raw)]
    fine = cluster_locations(points, 100.0)
    all_members = [m for c in fine for m in c.members]
    assert sorted(all_members) == sorted(k for k, _ in points)
    assert len(set(all_members)) == len(all_members)

    coarse = cluster_locations(points, 2_000.0)
    coarse_sets = _member_sets(coarse)
    for c in fine:
        fine_set = set(c.members)
        assert any(fine_set <= big for big in coarse_sets)


@settings(max_examples=40, deadline=None)
@given(raw=point_lists, threshold=st.sampled_from([0.0, 150.0, 3_000.0]))
def test_cluster_weight_conservation(raw, threshold):
    points = [((f"C{i}", f"r{i}"), coord) for i, coord in enumerate(raw)]
    stats = {
        key: RegionStat(frozenset({f"ad-{i}", "ad-shared"}), 0.1 * (i + 1))
        for i, (key, _) in enumerate(points)
    }
    clusters = cluster_locations(points, threshold, region_stats=stats)
    total = sum(c.weighted_reach for c in clusters)
    assert total == pytest.approx(sum(s.weighted for s in stats.values()))


# -- reach accumulation --------------------------------------------------------


def _ad(ad_id, *shares):
    return AdRecord(
        ad_id=ad_id,
        page_id="p1",
        page_name="Page",
        creation_time=1_700_000_000,
        regional_distribution=tuple(RegionalShare(cc, name, pct) for cc, name, pct in shares),
    )


def test_accumulate_counts_distinct_ads_and_sums_shares():
    ads = [
        _ad("a1", ("CA", "Ontario", 80.0), ("CA", "Quebec", 20.0)),
        _ad("a2", ("CA", "Ontario", 80.0), ("US", "California", 20.0)),
    ]
    stats = accumulate_regions(ads)
    assert stats[("CA", "Ontario")].raw_count == 2
    assert stats[("CA", "Ontario")].weighted == pytest.approx(1.6)
    assert stats[("CA", "Quebec")].raw_count == 1
    assert stats[("CA", "Quebec")].weighted == pytest.approx(0.2)
    assert stats[("US", "California")].weighted == pytest.approx(0.2)


def test_accumulate_unifies_spellings_under_first_seen_display():
    ads = [
        _ad("a1", ("CA", "Ontario", 50.0)),
        _ad("a2", ("ca", "  ONTARIO ", 25.0)),
    ]
    stats = accumulate_regions(ads)
    assert set(stats) == {("CA", "Ontario")}
    assert stats[("CA", "Ontario")].raw_count == 2
    assert stats[("CA", "Ontario")].weighted == pytest.approx(0.75)


def test_accumulate_matches_brute_force_oracle():
    ads = generate_ads(3, 40)
    expected: dict[tuple[str, str], tuple[set, float]] = {}
    for ad in ads:
        for share in ad.regional_distribution:
            key = (share.country_code.upper(), " ".join(share.region_name.split()).casefold())
            ids, w = expected.setdefault(key, (set(), 0.0))
            ids.add(ad.ad_id)
            expected[key] = (ids, w + share.percentage / 100.0)
    stats = accumulate_regions(ads)
    got = {
        (cc, name.casefold()): (set(stat.ad_ids), stat.weighted)
        for (cc, name), stat in stats.items()
    }
    assert set(got) == set(expected)
    for key, (ids, w) in expected.items():
        assert got[key][0] == ids
        assert got[key][1] == pytest.approx(w)


# -- report assembly -----------------------------------------------------------


class _StubStore:
    def __init__(self, ads):
        self._ads = list(ads)

    def query_ads(self, q):
        return list(self._ads)


def test_regional_report_separates_unresolved_and_clusters_resolved():
    gz = Gazetteer(
        {
            ("CA", "Ontario"): (51.2538, -85.3232),
            ("CA", "Quebec"): (52.9399, -73.5491),
        }
    )
    ads = [
        _ad("a1", ("CA", "Ontario", 80.0), ("CA", "Quebec", 20.0)),
        _ad("a2", ("CA", "ontario", 80.0), ("CA", "Atlantis", 20.0)),
    ]
    store = _StubStore(ads)
    q = AdQuery(requesting_user="acct-1")

    wide = regional_report(store, q, threshold_km=2_000.0, gazetteer=gz)
    assert len(wide.clusters) == 1
    assert wide.clusters[0].members == (("CA", "Ontario"), ("CA", "Quebec"))
    assert wide.clusters[0].raw_count == 2
    assert wide.clusters[0].weighted_reach == pytest.approx(1.8)

    narrow = regional_report(store, q, threshold_km=100.0, gazetteer=gz)
    assert len(narrow.clusters) == 2

    ranks = narrow.ranks
    assert [(e.country_code, e.region_name) for e in ranks.entries] == [
        ("CA", "Ontario"),
        ("CA", "Quebec"),
    ]
    assert ranks.entries[0].raw_count == 2
    assert ranks.entries[0].weighted_reach == pytest.approx(1.6)
    assert [(e.country_code, e.region_name) for e in ranks.unresolved] == [("CA", "Atlantis")]
    assert ranks.unresolved[0].weighted_reach == pytest.approx(0.2)
