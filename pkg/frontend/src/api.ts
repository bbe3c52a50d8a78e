// Thin fetch wrapper around /api/v1: bearer token storage, error decoding,
// in-flight GET de-duplication, and the global 401 -> login redirect.

import type { Violation } from "./types.js";

export const API_PREFIX = "/api/v1";
export const TOKEN_KEY = "adtracker.token";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly violations: Violation[];

  constructor(status: number, code: string, message: string, violations: Violation[] = []) {
    super(message);
    this.status = status;
    this.code = code;
    this.violations = violations;
  }
}

interface ErrorBody {
  error?: { code?: string; message?: string; violations?: Violation[] };
}

export class ApiClient {
  private readonly storage: Storage;
  private readonly onUnauthorized: () => void;
  // one promise per in-flight GET; concurrent callers share the result
  private readonly inflight = new Map<string, Promise<unknown>>();

  constructor(onUnauthorized: () => void, storage: Storage = window.localStorage) {
    this.onUnauthorized = onUnauthorized;
    this.storage = storage;
  }

  get token(): string | null {
    return this.storage.getItem(TOKEN_KEY);
  }

  setToken(token: string): void {
    this.storage.setItem(TOKEN_KEY, token);
  }

  clearToken(): void {
    this.storage.removeItem(TOKEN_KEY);
  }

  private async raw(method: string, path: string, body?: unknown): Promise<Response> {
    const headers: Record<string, string> = {};
    const token = this.token;
    if (token !== null) headers["authorization"] = `Bearer ${token}`;
    const init: RequestInit = { method, headers };
    if (body !== undefined) {
      headers["content-type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    const response = await fetch(`${API_PREFIX}${path}`, init);
    if (response.status === 401) {
      this.clearToken();
      this.onUnauthorized();
      throw new ApiError(401, "auth_failed", "session expired");
    }
    if (!response.ok) {
      let decoded: ErrorBody = {};
      try {
        decoded = (await response.json()) as ErrorBody;
      } catch {
        // non-JSON error body; fall through to the generic message
      }
      const err = decoded.error ?? {};
      throw new ApiError(
        response.status,
        err.code ?? "unknown",
        err.message ?? `request failed with ${response.status}`,
        err.violations ?? [],
      );
    }
    return response;
  }

  async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    if (method === "GET") {
      const key = path;
      const pending = this.inflight.get(key);
      if (pending !== undefined) return pending as Promise<T>;
      const promise = this.raw(method, path)
        .then((r) => r.json() as Promise<T>)
        .finally(() => this.inflight.delete(key));
      this.inflight.set(key, promise);
      return promise;
    }
    const response = await this.raw(method, path, body);
    return (await response.json()) as T;
  }

  async blob(path: string): Promise<Blob> {
    const response = await this.raw("GET", path);
    return response.blob();
  }
}

/** Query string from defined params only. */
export function queryString(params: Record<string, string | undefined>): string {
  const search = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined && value !== "") search.set(key, value);
  }
  const encoded = search.toString();
  return encoded === "" ? "" : `?${encoded}`;
}
