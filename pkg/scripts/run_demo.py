#!/usr/bin/env python3
"""Offline walkthrough against the simulated archive: register one job, run a
poll cycle, then print the regional clusters, the advertiser leaderboard, and
the size of a CSV export."""

from __future__ import annotations

import argparse
import tempfile

from adtracker.advertisers import advertiser_report
from adtracker.config import AppConfig
from adtracker.domain import ActiveStatus, AdQuery, JobSpec, Platform
from adtracker.geo import regional_report
from adtracker.provider import SIMULATED_COUNTRIES
from adtracker.runtime import build_runtime


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7, help="simulated archive seed")
    parser.add_argument("--ads", type=int, default=60, help="simulated archive size")
    parser.add_argument("--threshold-km", type=float, default=100.0,
                        help="cluster linkage threshold")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory(prefix="adtracker-demo-") as data_dir:
        rt = build_runtime(
            AppConfig(data_dir=data_dir, seed=args.seed, seed_count=args.ads, page_size=25)
        )
        rt.manager.on_registered = None  # poll synchronously below
        try:
            manager = rt.accounts.bootstrap_manager(
                "demo-manager@example.org", "demo-passphrase-1"
            )
            job = rt.manager.register_job(
                manager,
                JobSpec(
                    search_term="campaign",
                    reached_countries=SIMULATED_COUNTRIES,
                    active_status=ActiveStatus.ALL,
                    platforms=(Platform.FACEBOOK, Platform.INSTAGRAM),
                ),
            )
            report = rt.manager.run_poll_cycle(job)
            print(f"job {job.job_id}: {report.pages_fetched} pages,"
                  f" {report.upsert.inserted} ads inserted")

            q = AdQuery(requesting_user=manager.account_id)
            regional = regional_report(rt.store, q, args.threshold_km, rt.gazetteer)
            print(f"\n{len(regional.clusters)} clusters at {args.threshold_km:g} km:")
            for cluster in regional.clusters[:8]:
                names = ", ".join(f"{cc}/{name}" for cc, name in cluster.members)
                print(f"  ({cluster.centroid[0]:8.3f},{cluster.centroid[1]:9.3f})"
                      f"  ads={cluster.raw_count:<3d} reach={cluster.weighted_reach:7.2f}"
                      f"  {names}")
            if len(regional.clusters) > 8:
                print(f"  ... and {len(regional.clusters) - 8} more")

            advertisers = advertiser_report(rt.store, q)
            print(f"\ntop advertisers of {len(advertisers)}:")
            for entry in advertisers[:5]:
                print(f"  {entry.ad_count:3d} ads  {entry.page_name}"
                      f"  (weighted impressions {entry.total_weighted_impressions:,.0f})")

            csv_bytes = b"".join(rt.manager.export_csv(manager, job.job_id))
            rows = csv_bytes.count(b"\r\n") - 1
            print(f"\nCSV export: {len(csv_bytes)} bytes, {rows} data rows")
        finally:
            rt.shutdown()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
