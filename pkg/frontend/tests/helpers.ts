// Shared fetch mocking for the contract tests: fixtures stand in for the
// real /api/v1 responses; every call is recorded for assertions.

import { vi } from "vitest";

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
}

export interface MockResult {
  status?: number;
  body?: unknown;
}

export type Routes = Record<string, MockResult | ((url: URL) => MockResult)>;

const JSON_HEADERS = { "content-type": "application/json" };

/** Install a fetch stub answering from `routes`, keyed "METHOD /path"
 * (query string ignored for matching). Unrouted requests 404. */
export function installFetchMock(routes: Routes): RecordedCall[] {
  const calls: RecordedCall[] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = new URL(String(input), "http://ui.test");
      const method = (init?.method ?? "GET").toUpperCase();
      calls.push({
        method,
        path: url.pathname + url.search,
        body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
      });
      const route = routes[`${method} ${url.pathname}`];
      const result =
        route === undefined ? undefined : typeof route === "function" ? route(url) : route;
      if (result === undefined) {
        return new Response(
          JSON.stringify({ error: { code: "unknown", message: `no fixture for ${url.pathname}` } }),
          { status: 404, headers: JSON_HEADERS },
        );
      }
      return new Response(JSON.stringify(result.body ?? {}), {
        status: result.status ?? 200,
        headers: JSON_HEADERS,
      });
    }),
  );
  return calls;
}

/** The enum vocabulary fixture. THREADS and ZZ are sentinels that do not
 * exist in the real service: they prove the form renders whatever the
 * vocabulary endpoint returns instead of a hardcoded list. */
export const VOCAB_FIXTURE = {
  active_status: ["ACTIVE", "INACTIVE", "ALL"],
  categories: ["POLITICAL_AND_ISSUE"],
  platforms: ["FACEBOOK", "INSTAGRAM", "MESSENGER", "WHATSAPP", "OCULUS", "THREADS"],
  visibility: ["PRIVATE", "PUBLIC"],
  countries: ["BR", "CA", "DE", "US", "ZZ"],
};

export function freshRoot(): HTMLElement {
  document.body.innerHTML = "";
  window.location.hash = "";
  const root = document.createElement("div");
  root.id = "app";
  document.body.append(root);
  return root;
}
