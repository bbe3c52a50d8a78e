// Contract: leaderboard rows appear in the API's order, and image failures
// degrade to the placeholder avatar without breaking the row.

import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { PLACEHOLDER_AVATAR, advertisersScreen } from "../src/screens/advertisers.js";
import type { AdvertiserList } from "../src/types.js";
import { installFetchMock } from "./helpers.js";

// names deliberately out of alphabetical and count order would differ if the
// UI sorted on its own
const FIXTURE: AdvertiserList = {
  advertisers: [
    {
      page_id: "page-9",
      page_name: "Zeta Fund",
      ad_count: 7,
      total_weighted_impressions: 910998.0,
      profile_image_ref: "page-9",
    },
    {
      page_id: "page-2",
      page_name: "Alpha Desk",
      ad_count: 7,
      total_weighted_impressions: 420997.0,
      profile_image_ref: null,
    },
    {
      page_id: "page-5",
      page_name: "Mid Coalition",
      ad_count: 3,
      total_weighted_impressions: 738496.0,
      profile_image_ref: null,
    },
  ],
};

afterEach(() => {
  vi.unstubAllGlobals();
  window.localStorage.clear();
  document.body.innerHTML = "";
});

describe("advertiser leaderboard", () => {
  it("lists advertisers in the API's order", async () => {
    installFetchMock({
      "GET /api/v1/analysis/advertisers": { body: FIXTURE },
      // no image fixtures: every lookup 404s and the placeholder stays
    });
    const client = new ApiClient(() => undefined);
    client.setToken("tok-test");
    const screen = advertisersScreen({ client, navigate: () => undefined });
    document.body.append(screen.element);
    await screen.ready;

    const names = Array.from(screen.element.querySelectorAll(".page-name")).map(
      (n) => n.textContent,
    );
    expect(names).toEqual(["Zeta Fund", "Alpha Desk", "Mid Coalition"]);

    const counts = Array.from(screen.element.querySelectorAll(".ad-count")).map(
      (n) => n.textContent,
    );
    expect(counts).toEqual(["7 ads", "7 ads", "3 ads"]);
  });

  it("keeps the placeholder avatar when the image fetch fails", async () => {
    installFetchMock({
      "GET /api/v1/analysis/advertisers": { body: FIXTURE },
    });
    const client = new ApiClient(() => undefined);
    client.setToken("tok-test");
    const screen = advertisersScreen({ client, navigate: () => undefined });
    document.body.append(screen.element);
    await screen.ready;
    await new Promise((resolve) => setTimeout(resolve, 0)); // let image fetches settle

    const avatars = screen.element.querySelectorAll<HTMLImageElement>("img.avatar");
    expect(avatars.length).toBe(FIXTURE.advertisers.length);
    for (const avatar of avatars) {
      expect(avatar.src).toBe(PLACEHOLDER_AVATAR);
    }
  });
});
