// Advertiser leaderboard in the API's order. Profile images load through an
// authorized fetch; any failure falls back to the placeholder avatar.

import { queryString } from "../api.js";
import { clear, dayEnd, dayStart, el } from "../dom.js";
import type { AppContext, Screen } from "../router.js";
import type { AdvertiserList } from "../types.js";

// neutral inline avatar so rows never show a broken image
export const PLACEHOLDER_AVATAR =
  "data:image/svg+xml," +
  encodeURIComponent(
    '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 32 32">' +
      '<rect width="32" height="32" fill="#ccd5e0"/>' +
      '<circle cx="16" cy="12" r="6" fill="#8899aa"/>' +
      '<ellipse cx="16" cy="28" rx="11" ry="8" fill="#8899aa"/>' +
      "</svg>",
  );

export function advertisersScreen(ctx: AppContext): Screen {
  const start = el("input", { type: "date", name: "start" });
  const end = el("input", { type: "date", name: "end" });
  const controls = el(
    "form",
    { class: "window-picker" },
    el("label", {}, "From", start),
    el("label", {}, "To", end),
    el("button", { type: "submit" }, "Apply"),
  );

  const listSlot = el("ol", { class: "leaderboard" });
  const container = el(
    "section",
    { class: "advertisers" },
    el("h2", {}, "Top advertisers"),
    controls,
    listSlot,
  );

  const loadImage = (img: HTMLImageElement, pageId: string) => {
    void ctx.client
      .blob(`/pages/${encodeURIComponent(pageId)}/image`)
      .then((blob) => {
        img.src = URL.createObjectURL(blob);
      })
      .catch(() => undefined); // keep the placeholder
  };

  const load = (): Promise<void> =>
    ctx.client
      .json<AdvertiserList>(
        "GET",
        `/analysis/advertisers${queryString({
          start: dayStart(start.value),
          end: dayEnd(end.value),
        })}`,
      )
      .then((body) => {
        clear(listSlot);
        if (body.advertisers.length === 0) {
          listSlot.append(el("li", { class: "empty-state" }, "no advertisers in this window"));
          return;
        }
        for (const entry of body.advertisers) {
          const avatar = el("img", {
            class: "avatar",
            alt: "",
            src: PLACEHOLDER_AVATAR,
          });
          loadImage(avatar, entry.page_id);
          listSlot.append(
            el(
              "li",
              { class: "advertiser-row", "data-page-id": entry.page_id },
              avatar,
              el("span", { class: "page-name" }, entry.page_name),
              el("span", { class: "ad-count" }, `${entry.ad_count} ads`),
            ),
          );
        }
      })
      .catch(() => undefined);

  controls.addEventListener("submit", (event) => {
    event.preventDefault();
    void load();
  });

  return { element: container, ready: load() };
}
