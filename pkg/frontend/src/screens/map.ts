// Ad map: server-side clusters drawn as markers on an equirectangular SVG.
// The client never re-clusters; every number shown comes from the API.

import { queryString } from "../api.js";
import { clear, dayEnd, dayStart, el, svgEl } from "../dom.js";
import type { AppContext, Screen } from "../router.js";
import type { Cluster, RankRow, RegionalReport } from "../types.js";

const MAP_W = 720;
const MAP_H = 360;

function project(lat: number, lon: number): [number, number] {
  return [((lon + 180) / 360) * MAP_W, ((90 - lat) / 180) * MAP_H];
}

/** Marker area tracks weighted reach, normalized to the heaviest cluster. */
function markerRadius(reach: number, maxReach: number): number {
  if (maxReach <= 0) return 4;
  return 4 + 14 * Math.sqrt(Math.max(reach, 0) / maxReach);
}

function rankTable(rows: RankRow[]): HTMLTableElement {
  const body = el("tbody", {});
  rows.forEach((row, index) => {
    body.append(
      el(
        "tr",
        {},
        el("td", {}, String(index + 1)),
        el("td", {}, row.country_code),
        el("td", {}, row.region_name),
        el("td", {}, String(row.raw_count)),
        el("td", {}, row.weighted_reach.toFixed(4)),
      ),
    );
  });
  return el(
    "table",
    { class: "rank-table" },
    el(
      "thead",
      {},
      el(
        "tr",
        {},
        el("th", {}, "#"),
        el("th", {}, "Country"),
        el("th", {}, "Region"),
        el("th", {}, "Ads"),
        el("th", {}, "Weighted reach"),
      ),
    ),
    body,
  );
}

export function mapScreen(ctx: AppContext): Screen {
  const start = el("input", { type: "date", name: "start" });
  const end = el("input", { type: "date", name: "end" });
  const threshold = el("input", {
    type: "number",
    name: "threshold_km",
    min: "0",
    step: "50",
    placeholder: "server default",
  });
  const apply = el("button", { type: "submit" }, "Apply");
  const controls = el(
    "form",
    { class: "window-picker" },
    el("label", {}, "From", start),
    el("label", {}, "To", end),
    el("label", {}, "Threshold km", threshold),
    apply,
  );

  const mapSlot = el("div", { class: "map-slot" });
  const detail = el("div", { class: "cluster-detail" });
  const ranksSlot = el("div", { class: "ranks-slot" });
  const container = el(
    "section",
    { class: "ad-map" },
    el("h2", {}, "Ad map"),
    controls,
    mapSlot,
    detail,
    ranksSlot,
  );

  const showCluster = (cluster: Cluster) => {
    clear(detail);
    const members = cluster.members
      .map((m) => `${m.country_code} / ${m.region_name}`)
      .join(", ");
    detail.append(
      el("h3", {}, members),
      el("p", {}, `ads: `, el("span", { class: "raw-count" }, String(cluster.raw_count))),
      el("p", {}, `weighted reach: ${cluster.weighted_reach.toFixed(4)}`),
    );
  };

  const renderReport = (report: RegionalReport) => {
    clear(mapSlot);
    clear(detail);
    clear(ranksSlot);

    if (report.clusters.length === 0) {
      mapSlot.append(el("p", { class: "empty-state" }, "no ads in this window"));
      return;
    }

    const svg = svgEl("svg", {
      class: "world-map",
      viewBox: `0 0 ${MAP_W} ${MAP_H}`,
      role: "img",
    });
    svg.append(
      svgEl("rect", { x: "0", y: "0", width: String(MAP_W), height: String(MAP_H), class: "sea" }),
    );
    const maxReach = Math.max(...report.clusters.map((c) => c.weighted_reach));
    for (const cluster of report.clusters) {
      const [x, y] = project(cluster.centroid.lat, cluster.centroid.lon);
      const marker = svgEl("circle", {
        class: "marker",
        cx: x.toFixed(1),
        cy: y.toFixed(1),
        r: markerRadius(cluster.weighted_reach, maxReach).toFixed(1),
      });
      marker.append(
        svgEl("title", {}, `${cluster.raw_count} ads, reach ${cluster.weighted_reach.toFixed(2)}`),
      );
      marker.addEventListener("click", () => showCluster(cluster));
      svg.append(marker);
    }
    mapSlot.append(svg);

    ranksSlot.append(el("h3", {}, "Locations by weighted reach"), rankTable(report.ranks));
    if (report.unresolved.length > 0) {
      ranksSlot.append(
        el(
          "details",
          { class: "unresolved" },
          el("summary", {}, `${report.unresolved.length} regions without coordinates`),
          rankTable(report.unresolved),
        ),
      );
    }
  };

  const load = (): Promise<void> =>
    ctx.client
      .json<RegionalReport>(
        "GET",
        `/analysis/regions${queryString({
          start: dayStart(start.value),
          end: dayEnd(end.value),
          threshold_km: threshold.value === "" ? undefined : threshold.value,
        })}`,
      )
      .then(renderReport)
      .catch(() => undefined);

  controls.addEventListener("submit", (event) => {
    event.preventDefault();
    void load();
  });

  return { element: container, ready: load() };
}
